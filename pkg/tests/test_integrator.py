import numpy as np
import pytest

from qboltz.collision import conserved
from qboltz.equilibrium import bose_solution_from_energy, c22_solution
from qboltz.errors import StiffnessError
from qboltz.gspace import f_to_g
from qboltz.integrator import IntegratorOptions, Trajectory, compile_system, \
    integrate, integrate_f
from qboltz.kernels import Kernel

K3 = Kernel.constant(1.0, 3)
K4 = Kernel.constant(1.0, 4)


def test_options_validation():
    with pytest.raises(ValueError):
        IntegratorOptions(h=0.0)
    with pytest.raises(ValueError):
        IntegratorOptions(method="euler")
    with pytest.raises(ValueError):
        IntegratorOptions(record_every=0)


def test_zero_field_constant_trajectory():
    opts = IntegratorOptions(h=0.1, t_max=10.0, record_every=10)
    traj = integrate(lambda x: np.zeros_like(x), np.array([1.0, 1.0]), opts)
    assert np.all(traj.states == 1.0)
    assert np.max(np.abs(traj.energy - traj.energy[0])) == 0.0


def test_compiled_rhs_matches_operators():
    from qboltz.collision import combined_rhs
    rng = np.random.default_rng(31)
    for _ in range(20):
        I = int(rng.integers(2, 8))
        system = compile_system(I, K12=K3, K22=K4, K13=K4)
        F = rng.uniform(0.1, 3.0, I)
        np.testing.assert_allclose(system.rhs(F),
                                   combined_rhs(F, K12=K3, K22=K4, K13=K4),
                                   atol=1e-12)


def test_frozen_flag():
    assert compile_system(1, K12=K3).frozen
    assert compile_system(2, K22=K4).frozen
    assert compile_system(2, K13=K4).frozen
    assert not compile_system(2, K12=K3).frozen
    assert not compile_system(3, K22=K4).frozen
    assert not compile_system(3, K13=K4).frozen


def test_c12_convergence_to_bose():
    system = compile_system(2, K12=K3)
    opts = IntegratorOptions(h=1e-3, t_max=40.0, record_every=100)
    sol = bose_solution_from_energy(3.0, 2)
    traj = integrate_f(system, np.array([1.0, 1.0]), opts, reference=sol.Fstar)
    assert np.max(np.abs(traj.states[-1] - sol.Fstar)) <= 1e-6
    # and the limit is the analytic (1, 1/3)-shaped member for energy 3
    assert traj.states[-1][0] == pytest.approx(sol.Fstar[0], abs=1e-6)


def test_c22_convergence_to_two_param():
    system = compile_system(3, K22=K4)
    opts = IntegratorOptions(h=1e-3, t_max=50.0, record_every=100)
    F0 = np.array([2.0, 1.0, 1.0])
    c = conserved(F0)
    sol = c22_solution(c.mass, c.energy, 3)
    traj = integrate_f(system, F0, opts, reference=sol.Fstar)
    assert np.max(np.abs(traj.states[-1] - sol.Fstar)) <= 1e-6


def test_conservation_drift():
    rng = np.random.default_rng(13)
    for kernels in (dict(K12=K3), dict(K22=K4), dict(K13=K4),
                    dict(K12=K3, K22=K4, K13=K4)):
        I = 5
        system = compile_system(I, **kernels)
        F0 = rng.uniform(0.2, 2.0, I)
        opts = IntegratorOptions(h=1e-3, t_max=50.0, record_every=1000)
        traj = integrate_f(system, F0, opts)
        drift = np.max(np.abs(traj.energy - traj.energy[0])) / traj.energy[0]
        assert drift <= 1e-8
        if set(kernels) == {"K22"}:
            mdrift = np.max(np.abs(traj.mass - traj.mass[0])) / traj.mass[0]
            assert mdrift <= 1e-8


def test_positivity_of_recorded_states():
    rng = np.random.default_rng(19)
    system = compile_system(4, K12=K3, K22=K4, K13=K4)
    for _ in range(5):
        F0 = rng.uniform(0.05, 2.0, 4)
        opts = IntegratorOptions(h=1e-3, t_max=20.0, record_every=100)
        traj = integrate_f(system, F0, opts)
        assert np.all(traj.states > 0)


def test_fourth_order_convergence():
    system = compile_system(3, K12=K3)
    F0 = np.array([0.8, 1.1, 0.4])
    ref = integrate_f(system, F0,
                      IntegratorOptions(h=1e-4, t_max=1.0, record_every=10 ** 9))
    errs = []
    for h in (4e-2, 2e-2):
        traj = integrate_f(system, F0,
                           IntegratorOptions(h=h, t_max=1.0, record_every=10 ** 9))
        errs.append(np.max(np.abs(traj.states[-1] - ref.states[-1])))
    ratio = errs[0] / errs[1]
    assert 8.0 <= ratio <= 32.0


def test_stop_epsilon():
    system = compile_system(2, K12=K3)
    sol = bose_solution_from_energy(3.0, 2)
    opts = IntegratorOptions(h=1e-3, t_max=1000.0, record_every=100,
                             stop_epsilon=1e-8)
    traj = integrate_f(system, np.array([1.0, 1.0]), opts, reference=sol.Fstar)
    assert traj.times[-1] < 1000.0
    assert np.max(np.abs(traj.states[-1] - sol.Fstar)) < 1e-8


def test_reject_and_halve_preserves_domain():
    # a field aimed straight at the boundary forces halvings, not a crash
    opts = IntegratorOptions(h=0.5, t_max=2.0, record_every=1)
    traj = integrate(lambda x: -x, np.array([1.0]), opts)
    assert np.all(traj.states > 0)


def test_stiffness_error():
    opts = IntegratorOptions(h=1.0, t_max=2.0, record_every=1)
    with pytest.raises(StiffnessError):
        # constant negative field: every halved step still lands at <= 0
        integrate(lambda x: np.array([-10.0]), np.array([1.0]), opts)


def test_rk45_adaptive_agrees_with_rk4():
    system = compile_system(3, K12=K3, K22=K4)
    F0 = np.array([0.5, 1.0, 0.7])
    t4 = integrate_f(system, F0,
                     IntegratorOptions(h=1e-3, t_max=5.0, record_every=10 ** 9))
    t45 = integrate_f(system, F0,
                      IntegratorOptions(method="rk45_adaptive", h=1e-2,
                                        t_max=5.0, record_every=10 ** 9))
    np.testing.assert_allclose(t45.states[-1], t4.states[-1], rtol=1e-6)


def test_g_domain_integration():
    from qboltz.gspace import g_rhs, g_to_f
    opts = IntegratorOptions(h=1e-3, t_max=10.0, record_every=100)
    G0 = f_to_g(np.array([1.0, 1.0]))
    traj = integrate(lambda G: g_rhs(G, K12=K3), G0, opts, domain="G")
    assert np.all((traj.states > 0) & (traj.states < 1))
    sol = bose_solution_from_energy(3.0, 2)
    np.testing.assert_allclose(g_to_f(traj.states[-1]), sol.Fstar, atol=1e-5)


def test_trajectory_csv(tmp_path):
    system = compile_system(2, K12=K3)
    sol = bose_solution_from_energy(3.0, 2)
    opts = IntegratorOptions(h=1e-3, t_max=1.0, record_every=100)
    traj = integrate_f(system, np.array([1.0, 1.0]), opts, reference=sol.Fstar)
    path = tmp_path / "traj.csv"
    traj.to_csv(str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,F_1,F_2,energy,mass,lyapunov,max_err"
    data = np.loadtxt(str(path), delimiter=",", skiprows=1)
    np.testing.assert_allclose(data[:, 0], traj.times)
    np.testing.assert_allclose(data[:, 1:3], traj.states)


def test_trajectory_times_validation():
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 0.0]), states=np.ones((2, 1)),
                   energy=np.ones(2), mass=np.ones(2),
                   lyapunov=np.ones(2), max_err=np.ones(2))
