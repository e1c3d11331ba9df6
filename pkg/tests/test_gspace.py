import numpy as np
import pytest

from qboltz.collision import combined_rhs
from qboltz.errors import DomainError
from qboltz.gspace import f_to_g, g_rhs, g_to_f, reversible_pairs
from qboltz.kernels import Kernel

K3 = Kernel.constant(1.0, 3)
K4 = Kernel.constant(1.0, 4)


def test_transform_fixed_values():
    np.testing.assert_allclose(f_to_g(np.array([1.0])), [0.5])
    np.testing.assert_allclose(f_to_g(np.array([1.0 / 3.0, 1.0 / 7.0])),
                               [0.25, 0.125])


def test_transform_roundtrip():
    rng = np.random.default_rng(0)
    for _ in range(100):
        F = rng.uniform(0.01, 10.0, int(rng.integers(1, 9)))
        np.testing.assert_allclose(g_to_f(f_to_g(F)), F, atol=1e-15, rtol=1e-12)


def test_transform_domain():
    with pytest.raises(DomainError):
        f_to_g(np.array([0.0]))
    with pytest.raises(DomainError):
        g_to_f(np.array([1.0]))
    with pytest.raises(DomainError):
        g_to_f(np.array([-0.1]))


def test_g_rhs_c12_fixture():
    out = g_rhs(np.array([0.5, 0.5]), K12=K3)
    np.testing.assert_allclose(out, [1.0, -0.5])


def test_g_rhs_c22_fixture():
    G = f_to_g(np.array([2.0, 1.0, 1.0]))
    np.testing.assert_allclose(G, [2.0 / 3.0, 0.5, 0.5])
    out = g_rhs(G, K22=K4)
    np.testing.assert_allclose(out, [-2.0 / 9.0, 1.0, -0.5])


def test_g_rhs_geometric_equilibrium():
    # G_k = exp(-rho*k) makes G^y = G^y' on every splitting resonance
    for rho in (0.4, 1.0):
        G = np.exp(-rho * np.arange(1, 5))
        np.testing.assert_allclose(g_rhs(G, K12=K3), 0.0, atol=1e-14)


def test_g_rhs_chain_rule_consistency():
    rng = np.random.default_rng(21)
    for _ in range(100):
        I = int(rng.integers(2, 9))
        F = rng.uniform(0.1, 3.0, I)
        G = f_to_g(F)
        expected = combined_rhs(F, K12=K3, K22=K4, K13=K4) / (1.0 + F) ** 2
        np.testing.assert_allclose(g_rhs(G, K12=K3, K22=K4, K13=K4),
                                   expected, atol=1e-12)


def test_h_factor_symmetry():
    rng = np.random.default_rng(4)
    pairs = reversible_pairs(5, K12=K3, K22=K4, K13=K4)
    assert pairs
    for p in pairs:
        for _ in range(50):
            G = rng.uniform(0.05, 0.95, 5)
            # H is defined symmetrically; verify forward/backward share it
            fwd = p.forward_rate(G) / float(np.prod(G ** p.reactant_vec))
            bwd = p.backward_rate(G) / float(np.prod(G ** p.product_vec))
            assert abs(fwd - bwd) <= 1e-14 * max(abs(fwd), 1.0)


def test_boundary_rejection():
    with pytest.raises(DomainError):
        g_rhs(np.array([0.5, 1.0 - 1e-13]), K12=K3)
    with pytest.raises(DomainError):
        g_rhs(np.array([1e-13, 0.5]), K12=K3)
