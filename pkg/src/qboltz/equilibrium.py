"""Equilibrium families and solvers.

Every operator with splitting/merging processes relaxes to the one-parameter
family F*_k = 1/(exp(rho*k) - 1), with rho fixed by the conserved energy.
The pure 2<->2 exchange conserves mass as well and relaxes to the
two-parameter family F*_k = 1/(exp(rho2*(k-1) - rho1*(k-2)) - 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, NumericError

_RESIDUAL_TOL = 1e-12
_MAX_BISECT = 200


@dataclass(frozen=True)
class EquilibriumSolution:
    """A solved equilibrium: family tag, parameters, state and residuals."""

    family: str                      # "bose" or "two_param"
    params: tuple[float, ...]        # (rho,) or (rho1, rho2)
    I: int
    Fstar: np.ndarray
    residuals: dict[str, float] = field(default_factory=dict)


def bose_state(rho: float, I: int) -> np.ndarray:
    """F*_k = 1/(exp(rho*k) - 1) for k = 1..I."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    k = np.arange(1, I + 1)
    return 1.0 / np.expm1(rho * k)


def two_param_state(rho1: float, rho2: float, I: int) -> np.ndarray:
    """F*_k = 1/(exp(rho2*(k-1) - rho1*(k-2)) - 1); exponents must be > 0."""
    k = np.arange(1, I + 1)
    theta = rho2 * (k - 1) - rho1 * (k - 2)
    if np.any(theta <= 0):
        raise ValueError(
            f"two-parameter exponent nonpositive at some k (theta={theta})"
        )
    return 1.0 / np.expm1(theta)


def bose_solution(rho: float, I: int) -> EquilibriumSolution:
    return EquilibriumSolution(family="bose", params=(float(rho),), I=I,
                               Fstar=bose_state(rho, I))


def two_param_solution(rho1: float, rho2: float, I: int) -> EquilibriumSolution:
    return EquilibriumSolution(family="two_param",
                               params=(float(rho1), float(rho2)), I=I,
                               Fstar=two_param_state(rho1, rho2, I))


def equilibrium_state(sol: EquilibriumSolution) -> np.ndarray:
    """Materialize F* from the family formula."""
    if sol.family == "bose":
        return bose_state(sol.params[0], sol.I)
    if sol.family == "two_param":
        return two_param_state(sol.params[0], sol.params[1], sol.I)
    raise ValueError(f"unknown equilibrium family {sol.family!r}")


def energy_of_rho(rho: float, I: int) -> float:
    """sum_{k=1}^I k/(exp(rho*k) - 1); strictly decreasing in rho."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    k = np.arange(1, I + 1)
    with np.errstate(over="ignore"):
        return float(np.sum(k / np.expm1(rho * k)))


def solve_rho(E: float, I: int) -> float:
    """Invert the energy relation for the one-parameter family.

    The map rho -> energy is a strictly decreasing bijection from (0, inf)
    onto (0, inf), so a bracketing bisection always converges.
    """
    if E <= 0:
        raise ValueError("energy must be positive")
    lo, hi = 1e-8, 1e3
    while energy_of_rho(lo, I) < E:
        lo /= 10.0
        if lo < 1e-300:
            raise NumericError(f"cannot bracket rho for E={E}")
    while energy_of_rho(hi, I) > E:
        hi *= 10.0
        if hi > 1e300:
            raise NumericError(f"cannot bracket rho for E={E}")
    rho = 0.5 * (lo + hi)
    for _ in range(_MAX_BISECT):
        rho = 0.5 * (lo + hi)
        val = energy_of_rho(rho, I)
        if abs(val - E) <= _RESIDUAL_TOL:
            return rho
        if val > E:
            lo = rho
        else:
            hi = rho
    if abs(energy_of_rho(rho, I) - E) > 1e-9:
        raise NumericError(
            f"bisection for rho did not converge (residual "
            f"{energy_of_rho(rho, I) - E:.3e})"
        )
    return rho


def bose_solution_from_energy(E: float, I: int) -> EquilibriumSolution:
    """Solve for rho and package state plus conservation residual."""
    rho = solve_rho(E, I)
    Fstar = bose_state(rho, I)
    return EquilibriumSolution(
        family="bose", params=(rho,), I=I, Fstar=Fstar,
        residuals={"energy": float(np.arange(1, I + 1) @ Fstar - E)},
    )


def _two_param_mass_energy(rho1: float, rho2: float, I: int):
    k = np.arange(1, I + 1)
    theta = rho2 * (k - 1) - rho1 * (k - 2)
    if np.any(theta <= 0):
        return None
    F = 1.0 / np.expm1(theta)
    # dF/dtheta = -F(F+1); Jacobian columns: d/d(rho1), d/d(rho2)
    dF = -F * (F + 1.0)
    jac = np.array([
        [float(np.sum(dF * -(k - 2))), float(np.sum(dF * (k - 1)))],
        [float(np.sum(k * dF * -(k - 2))), float(np.sum(k * dF * (k - 1)))],
    ])
    return F, np.array([F.sum(), float(k @ F)]), jac


def solve_c22_equilibrium(M: float, E: float, I: int) -> tuple[float, float]:
    """Solve for (rho1, rho2) matching mass M and energy E, I >= 3.

    Damped 2D Newton with a warm start from the one-parameter family and a
    coarse-grid fallback.  Steps leaving the positivity domain of the
    exponents are halved.
    """
    if M <= 0 or E <= 0:
        raise ValueError("mass and energy must be positive")
    if not (M < E < I * M):
        raise InfeasibleError(
            f"(M, E)=({M}, {E}) infeasible for I={I}: need M < E < I*M"
        )
    target = np.array([M, E])

    seeds = []
    try:
        rho = solve_rho(E, I)
        seeds.append((rho, 2 * rho))
    except NumericError:
        pass
    grid = [2.0 ** e for e in range(-4, 5)]
    seeds.extend((a, b) for a in grid for b in grid)

    best = None
    for rho1, rho2 in seeds:
        state = _two_param_mass_energy(rho1, rho2, I)
        if state is None:
            continue
        x = np.array([rho1, rho2])
        F, vals, jac = state
        res = vals - target
        for _ in range(100):
            if np.linalg.norm(res) <= _RESIDUAL_TOL:
                break
            try:
                step = np.linalg.solve(jac, -res)
            except np.linalg.LinAlgError:
                break
            lam = 1.0
            for _ in range(60):
                trial = x + lam * step
                st = _two_param_mass_energy(trial[0], trial[1], I)
                if st is not None and np.linalg.norm(st[1] - target) < np.linalg.norm(res):
                    x = trial
                    F, vals, jac = st
                    res = vals - target
                    break
                lam *= 0.5
            else:
                break
        if best is None or np.linalg.norm(res) < best[0]:
            best = (float(np.linalg.norm(res)), x.copy())
        if np.linalg.norm(res) <= _RESIDUAL_TOL:
            break

    if best is None or best[0] > 1e-10:
        last = best[0] if best is not None else float("inf")
        raise NumericError(
            f"two-parameter Newton stagnated (last residual norm {last:.3e})"
        )
    return float(best[1][0]), float(best[1][1])


def c22_solution(M: float, E: float, I: int) -> EquilibriumSolution:
    """Solve and package the two-parameter equilibrium with residuals."""
    rho1, rho2 = solve_c22_equilibrium(M, E, I)
    F = two_param_state(rho1, rho2, I)
    k = np.arange(1, I + 1)
    return EquilibriumSolution(
        family="two_param", params=(rho1, rho2), I=I, Fstar=F,
        residuals={"mass": float(F.sum() - M), "energy": float(k @ F - E)},
    )
