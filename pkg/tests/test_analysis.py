import numpy as np
import pytest

from qboltz.analysis import fit_rate, linearize, lyapunov_f, lyapunov_g, \
    lyapunov_gradient_g, quadratic_form_samples, reaction_jacobians
from qboltz.collision import conserved
from qboltz.equilibrium import bose_solution_from_energy, bose_state
from qboltz.errors import NumericError
from qboltz.gspace import f_to_g, g_rhs, reversible_pairs
from qboltz.integrator import IntegratorOptions, compile_system, integrate_f
from qboltz.kernels import Kernel

from oracles import fd_jacobian

K3 = Kernel.constant(1.0, 3)
K4 = Kernel.constant(1.0, 4)


def test_lyapunov_value_at_equilibrium():
    # L(G*) = -sum log F*_k
    assert lyapunov_g(np.array([0.5]), np.array([0.5])) == pytest.approx(0.0)
    G = np.array([0.5, 0.25])
    assert lyapunov_g(G, G) == pytest.approx(np.log(3.0))
    assert lyapunov_f(np.array([1.0]), np.array([1.0])) == pytest.approx(0.0)
    F = np.array([1.0, 1.0 / 3.0])
    assert lyapunov_f(F, F) == pytest.approx(np.log(3.0))


def test_lyapunov_minimal_at_equilibrium():
    Gstar = f_to_g(bose_state(0.8, 3))
    base = lyapunov_g(Gstar, Gstar)
    rng = np.random.default_rng(2)
    for _ in range(50):
        G = rng.uniform(0.05, 0.95, 3)
        if np.max(np.abs(G - Gstar)) < 1e-8:
            continue
        assert lyapunov_g(G, Gstar) > base


def test_transform_identity():
    rng = np.random.default_rng(6)
    for _ in range(100):
        I = int(rng.integers(1, 9))
        F = rng.uniform(0.05, 5.0, I)
        Fstar = rng.uniform(0.05, 5.0, I)
        lf = lyapunov_f(F, Fstar)
        lg = lyapunov_g(f_to_g(F), f_to_g(Fstar))
        assert abs(lf - lg) <= 1e-12 * max(1.0, abs(lf))


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(9)
    Gstar = np.array([0.4, 0.3, 0.2])
    for _ in range(10):
        G = rng.uniform(0.1, 0.9, 3)
        grad = lyapunov_gradient_g(G, Gstar)
        h = 1e-7
        for j in range(3):
            Gp, Gm = G.copy(), G.copy()
            Gp[j] += h
            Gm[j] -= h
            fd = (lyapunov_g(Gp, Gstar) - lyapunov_g(Gm, Gstar)) / (2 * h)
            assert fd == pytest.approx(grad[j], rel=1e-6)


def test_convexity_of_lyapunov_f():
    rng = np.random.default_rng(14)
    Fstar = np.array([1.0, 0.5])
    for _ in range(10):
        F = rng.uniform(0.2, 3.0, 2)
        h = 1e-4
        for j in range(2):
            Fp, Fm = F.copy(), F.copy()
            Fp[j] += h
            Fm[j] -= h
            second = (lyapunov_f(Fp, Fstar) - 2 * lyapunov_f(F, Fstar)
                      + lyapunov_f(Fm, Fstar)) / h ** 2
            exact = 1.0 / F[j] - 1.0 / (1.0 + F[j])
            assert exact > 0
            assert second == pytest.approx(exact, rel=1e-5)


def test_linearize_frozen():
    report = linearize(np.array([0.5]), K12=K3)
    assert report.verdict == "frozen"
    assert report.predicted_rate is None
    assert report.subspace_dim == 0


def test_linearize_requires_equilibrium():
    with pytest.raises(ValueError, match="equilibrium"):
        linearize(np.array([0.9, 0.1]), K12=K3)


def test_linearize_negative_definite():
    Gstar = np.array([0.5, 0.25])
    report = linearize(Gstar, K12=K3)
    assert report.verdict == "negative definite"
    assert report.subspace_dim == 1
    assert np.all(report.eigenvalues < 0)
    assert report.predicted_rate > 0


def test_linearize_matches_fd_jacobian():
    # restricted spectrum of the true Jacobian equals the reported one
    for Gstar, kw in [
        (np.array([0.5, 0.25]), dict(K12=K3)),
        (f_to_g(bose_state(0.7, 4)), dict(K12=K3, K22=K4, K13=K4)),
    ]:
        I = len(Gstar)
        pairs = reversible_pairs(I, **{k: v for k, v in kw.items()})
        report = linearize(Gstar, **kw)
        J_fd = fd_jacobian(lambda G: g_rhs(G, pairs=pairs), Gstar)
        _, J_R = reaction_jacobians(Gstar, pairs)
        np.testing.assert_allclose(J_R, J_fd, rtol=1e-4, atol=1e-7)
        # the reported values plus the conserved-direction zeros must be
        # exactly the spectrum of the numerical Jacobian
        full = np.concatenate([report.eigenvalues,
                               np.zeros(I - report.subspace_dim)])
        fd_eigs = np.sort(np.real(np.linalg.eigvals(J_fd)))
        np.testing.assert_allclose(np.sort(full), fd_eigs, rtol=1e-4, atol=1e-5)


def test_quadratic_form_negative():
    Gstar = f_to_g(bose_state(0.9, 4))
    pairs = reversible_pairs(4, K12=K3, K22=K4, K13=K4)
    vals = quadratic_form_samples(Gstar, pairs, n=20, seed=1)
    assert len(vals) == 20
    assert np.all(vals < 0)


def test_fit_rate_on_trajectory():
    F0 = np.array([0.3, 1.4])
    system = compile_system(2, K12=K3)
    sol = bose_solution_from_energy(conserved(F0).energy, 2)
    opts = IntegratorOptions(h=1e-3, t_max=40.0, record_every=10)
    traj = integrate_f(system, F0, opts, reference=sol.Fstar)
    fit = fit_rate(traj.times, traj.states, sol.Fstar)
    assert fit.slope < 0
    assert fit.r_squared >= 0.99
    assert fit.prefactor_estimate > 0


def test_fit_rate_error_floor():
    times = np.linspace(0, 10, 50)
    states = np.tile([1.0, 0.5], (50, 1))
    with pytest.raises(NumericError, match="floor"):
        fit_rate(times, states, np.array([1.0, 0.5]))
