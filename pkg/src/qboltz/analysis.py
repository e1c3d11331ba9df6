"""Lyapunov functions, equilibrium linearization, and rate fitting.

The free-energy-like functional L decreases along every trajectory and has
the equilibrium as its unique critical point on each conservation slice.
Linearizing the G-space field at the equilibrium gives a matrix that is
self-adjoint and negative definite on the stoichiometric subspace in a
weighted metric; its least-negative eigenvalue is the predicted asymptotic
decay rate, which ``fit_rate`` estimates independently from a trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .gspace import ReversiblePair, check_state_g, g_rhs, reversible_pairs
from .kernels import Kernel

_EQUILIBRIUM_TOL = 1e-10


def lyapunov_g(G: np.ndarray, Gstar: np.ndarray) -> float:
    """L(G) = sum log(1-G_k) + G_k log(G_k)/(1-G_k) - log(G*_k)/(1-G_k)."""
    G = check_state_g(G)
    Gstar = check_state_g(Gstar)
    return float(np.sum(
        np.log(1.0 - G) + G * np.log(G) / (1.0 - G) - np.log(Gstar) / (1.0 - G)
    ))


def lyapunov_f(F: np.ndarray, Fstar: np.ndarray) -> float:
    """Same functional in occupation variables; equals lyapunov_g after the
    substitution G = F/(F+1)."""
    F = np.asarray(F, dtype=float)
    Fstar = np.asarray(Fstar, dtype=float)
    if np.any(F <= 0) or np.any(Fstar <= 0):
        raise ValueError("occupation numbers must be strictly positive")
    return float(np.sum(
        F * np.log(F) - (1.0 + F) * np.log(1.0 + F)
        + (np.log(Fstar + 1.0) - np.log(Fstar)) * (F + 1.0)
    ))


def lyapunov_gradient_g(G: np.ndarray, Gstar: np.ndarray) -> np.ndarray:
    """Gradient of L: components log(G_k/G*_k) / (1-G_k)^2."""
    G = check_state_g(G)
    Gstar = check_state_g(Gstar)
    return np.log(G / Gstar) / (1.0 - G) ** 2


@dataclass(frozen=True)
class SpectralReport:
    """Linearization at an equilibrium of the G-space dynamics."""

    Gstar: np.ndarray
    eigenvalues: np.ndarray          # restricted spectrum, ascending
    predicted_rate: float | None     # -(largest eigenvalue); None when frozen
    verdict: str                     # "negative definite" | "frozen" | "indefinite"
    subspace_dim: int

    def to_json_dict(self) -> dict:
        return {
            "Gstar": [float(x) for x in self.Gstar],
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "predicted_rate": self.predicted_rate,
            "verdict": self.verdict,
            "subspace_dim": self.subspace_dim,
        }


def reaction_jacobians(Gstar: np.ndarray,
                       pairs: list[ReversiblePair]) -> tuple[np.ndarray, np.ndarray]:
    """Jacobians (J_S, J_R) of the reaction sum and the full field at G*.

    J_S delta = -sum_r c_r ((y-y') * delta)(y-y') with the weighted product
    u*v = sum u_k v_k / G*_k and c_r = rate * (G*)^y * H(G*);
    J_R = diag((1-G*)^2) J_S.
    """
    Gstar = check_state_g(Gstar)
    I = len(Gstar)
    J_S = np.zeros((I, I))
    for p in pairs:
        v = p.reactant_vec - p.product_vec
        c = p.rate_constant * float(np.prod(Gstar ** p.reactant_vec)) * p.h_value(Gstar)
        J_S -= c * np.outer(v, v / Gstar)
    J_R = ((1.0 - Gstar) ** 2)[:, None] * J_S
    return J_S, J_R


def linearize(Gstar: np.ndarray, K12: Kernel | None = None,
              K22: Kernel | None = None, K13: Kernel | None = None) -> SpectralReport:
    """Spectrum of the linearized dynamics on the stoichiometric subspace.

    The field Jacobian J_R = diag((1-G*)^2) J_S is self-adjoint in the
    metric diag(1/(G*_k (1-G*_k)^2)); conjugating by the metric square root
    turns it into an explicit sum of rank-one terms whose restriction to the
    reaction-vector span is diagonalized directly.  Reported eigenvalues are
    genuine eigenvalues of J_R.
    """
    Gstar = check_state_g(Gstar)
    I = len(Gstar)
    pairs = reversible_pairs(I, K12=K12, K22=K22, K13=K13)
    if not pairs:
        return SpectralReport(Gstar=Gstar, eigenvalues=np.array([]),
                              predicted_rate=None, verdict="frozen",
                              subspace_dim=0)
    resid = float(np.max(np.abs(g_rhs(Gstar, pairs=pairs))))
    if resid > _EQUILIBRIUM_TOL:
        raise ValueError(
            f"linearize requires an equilibrium (rhs inf-norm {resid:.3e})"
        )
    # symmetrized rank-one form: u_r = (1-G*)/sqrt(G*) * (y - y')
    scale = (1.0 - Gstar) / np.sqrt(Gstar)
    A = np.zeros((I, I))
    vecs = []
    for p in pairs:
        v = p.reactant_vec - p.product_vec
        c = p.rate_constant * float(np.prod(Gstar ** p.reactant_vec)) * p.h_value(Gstar)
        u = scale * v
        A -= c * np.outer(u, u)
        vecs.append(u)
    V = np.column_stack(vecs)
    # orthonormal basis of the (scaled) stoichiometric subspace
    U, s, _ = np.linalg.svd(V, full_matrices=False)
    rank = int(np.sum(s > 1e-12 * s.max()))
    Q = U[:, :rank]
    eigs = np.linalg.eigvalsh(Q.T @ A @ Q)
    verdict = "negative definite" if np.all(eigs < 0) else "indefinite"
    return SpectralReport(
        Gstar=Gstar,
        eigenvalues=np.sort(eigs),
        predicted_rate=float(-np.max(eigs)),
        verdict=verdict,
        subspace_dim=rank,
    )


def quadratic_form_samples(Gstar: np.ndarray, pairs: list[ReversiblePair],
                           n: int = 20, seed: int = 0) -> np.ndarray:
    """Values of (J_S delta) * delta for random delta in span{y'-y}.

    The weighted product is u*v = sum u_k v_k / G*_k; all values are
    negative when the restricted Jacobian is negative definite.
    """
    Gstar = check_state_g(Gstar)
    J_S, _ = reaction_jacobians(Gstar, pairs)
    V = np.column_stack([p.product_vec - p.reactant_vec for p in pairs])
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(n):
        delta = V @ rng.standard_normal(V.shape[1])
        if np.max(np.abs(delta)) < 1e-12:
            continue
        vals.append(float((J_S @ delta) @ (delta / Gstar)))
    return np.array(vals)


@dataclass(frozen=True)
class RateFit:
    """Least-squares exponential-decay fit of a trajectory tail."""

    slope: float
    intercept: float
    r_squared: float

    @property
    def prefactor_estimate(self) -> float:
        return float(np.exp(self.intercept))


def fit_rate(times: np.ndarray, states: np.ndarray, Fstar: np.ndarray,
             window: float = 0.5, floor: float = 1e-12) -> RateFit:
    """Fit log max_k|F_k(t) - F*_k| over the tail of a trajectory.

    ``window`` selects the trailing fraction of the samples whose error is
    still above ``floor``; the early transient would otherwise bias the
    slope.
    """
    times = np.asarray(times, dtype=float)
    states = np.asarray(states, dtype=float)
    err = np.max(np.abs(states - np.asarray(Fstar)[None, :]), axis=1)
    alive = err > floor
    if np.sum(err > 1e-13) == 0:
        raise NumericError(
            "error floor reached everywhere; rerun with a shorter horizon"
        )
    t, e = times[alive], err[alive]
    n_tail = max(int(np.ceil(window * len(t))), 2)
    t, e = t[-n_tail:], e[-n_tail:]
    if len(t) < 20:
        raise NumericError(
            f"only {len(t)} usable tail samples (need >= 20); record more often"
        )
    y = np.log(e)
    A = np.column_stack([t, np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return RateFit(slope=float(coef[0]), intercept=float(coef[1]), r_squared=r2)
