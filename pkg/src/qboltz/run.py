"""Preset experiment drivers shared by the CLI and the verification suite.

A "mode" names the active operator combination.  Runs integrate the
F-space dynamics, solve the matching equilibrium family from the conserved
quantities of the initial state, and optionally fit the empirical decay
rate and compare it with the linearization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import equilibrium as eq
from .analysis import RateFit, SpectralReport, fit_rate, linearize
from .collision import conserved
from .errors import NumericError
from .gspace import f_to_g
from .integrator import IntegratorOptions, Trajectory, compile_system, integrate_f
from .kernels import Kernel
from .lattice import LatticeConfig, Ray, enumerate_rays

MODES = {
    "c12": ("K12",),
    "c13": ("K13",),
    "c22": ("K22",),
    "c12+c22": ("K12", "K22"),
    "c12+c22+c13": ("K12", "K22", "K13"),
}

_ARITY = {"K12": 3, "K22": 4, "K13": 4}


def kernels_for_mode(mode: str,
                     K12: Kernel | None = None,
                     K22: Kernel | None = None,
                     K13: Kernel | None = None) -> dict[str, Kernel]:
    """Kernels for the operators enabled by ``mode``; missing ones default
    to the constant-1 kernel."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {sorted(MODES)}")
    supplied = {"K12": K12, "K22": K22, "K13": K13}
    out = {}
    for name in MODES[mode]:
        k = supplied[name]
        out[name] = k if k is not None else Kernel.constant(1.0, _ARITY[name])
    return out


def random_positive_state(I: int, seed, scale: float = 1.0) -> np.ndarray:
    """Reproducible positive initial condition, entries in (0, scale]."""
    rng = np.random.default_rng(seed)
    return scale * rng.uniform(0.1, 1.0, size=I)


def reference_equilibrium(mode: str, F0: np.ndarray) -> Optional[eq.EquilibriumSolution]:
    """Equilibrium the mode's dynamics preserves from F0's conserved values.

    Pure 2<->2 exchange pins both mass and energy (two-parameter family);
    every other mode pins energy only (one-parameter family).  Returns None
    when the family is undefined (degenerate short systems).
    """
    cons = conserved(F0)
    I = len(F0)
    if mode == "c22":
        if I < 3:
            return None
        return eq.c22_solution(cons.mass, cons.energy, I)
    return eq.bose_solution_from_energy(cons.energy, I)


@dataclass
class RunResult:
    """One simulated ray: trajectory, equilibrium reference, analysis."""

    mode: str
    I: int
    F0: np.ndarray
    trajectory: Optional[Trajectory]
    equilibrium: Optional[eq.EquilibriumSolution]
    frozen: bool
    fit: Optional[RateFit] = None
    spectral: Optional[SpectralReport] = None


def run_simulation(mode: str, F0: np.ndarray,
                   kernels: dict[str, Kernel] | None = None,
                   opts: IntegratorOptions | None = None,
                   fit_window: float = 0.5,
                   analyze: bool = False) -> RunResult:
    """Integrate one ray and package equilibrium/rate diagnostics.

    Frozen systems (no active resonance) return immediately with a
    constant-state verdict and no trajectory.
    """
    F0 = np.asarray(F0, dtype=float)
    I = len(F0)
    kernels = kernels if kernels is not None else kernels_for_mode(mode)
    opts = opts if opts is not None else IntegratorOptions()
    system = compile_system(I, K12=kernels.get("K12"), K22=kernels.get("K22"),
                            K13=kernels.get("K13"))
    if system.frozen:
        return RunResult(mode=mode, I=I, F0=F0, trajectory=None,
                         equilibrium=None, frozen=True)
    sol = reference_equilibrium(mode, F0)
    ref = sol.Fstar if sol is not None else None
    traj = integrate_f(system, F0, opts, reference=ref)
    result = RunResult(mode=mode, I=I, F0=F0, trajectory=traj,
                       equilibrium=sol, frozen=False)
    if analyze and sol is not None:
        try:
            result.fit = fit_rate(traj.times, traj.states, sol.Fstar,
                                  window=fit_window)
        except NumericError:
            result.fit = None
        result.spectral = linearize(f_to_g(sol.Fstar),
                                    K12=kernels.get("K12"),
                                    K22=kernels.get("K22"),
                                    K13=kernels.get("K13"))
    return result


def ray_seed(seed: int, ray_index: int):
    """Per-ray RNG seed sequence for lattice runs (deterministic)."""
    return [int(seed), int(ray_index)]


def run_lattice(mode: str, R: float, seed: int = 0, scale: float = 1.0,
                kernels: dict[str, Kernel] | None = None,
                opts: IntegratorOptions | None = None,
                analyze: bool = False) -> list[tuple[Ray, RunResult]]:
    """Decompose the lattice ball into rays and run each independently.

    Ray i gets the seed sequence [seed, i], so a standalone 1D run with the
    same sequence reproduces it bit for bit.
    """
    rays = enumerate_rays(LatticeConfig(R=R))
    out = []
    for i, ray in enumerate(rays):
        F0 = random_positive_state(ray.I, ray_seed(seed, i), scale=scale)
        out.append((ray, run_simulation(mode, F0, kernels=kernels, opts=opts,
                                        analyze=analyze)))
    return out
