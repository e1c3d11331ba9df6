"""Integer momentum lattice and its decomposition into 1D rays.

The linear dispersion makes every collisional resonance collinear, so the
3D lattice dynamics splits into independent chains indexed by primitive
integer directions.  A ray is a primitive direction P0 together with the
number I of its positive multiples inside the lattice ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Optional


@dataclass(frozen=True)
class DispersionConfig:
    """Sound speed for the linear dispersion law E(p) = c * |p|.

    Either pass ``c`` directly or the physical parameters ``g`` (interaction
    strength), ``n_c`` (condensate density) and ``m`` (mass), in which case
    c = sqrt(g * n_c / m).  The value is carried for documentation of a run;
    ray dynamics never reads it (it cancels in every collinear resonance).
    """

    c: Optional[float] = None
    g: Optional[float] = None
    n_c: Optional[float] = None
    m: Optional[float] = None

    def __post_init__(self):
        phys = (self.g, self.n_c, self.m)
        if all(v is not None for v in phys):
            if any(v <= 0 for v in phys):
                raise ValueError("g, n_c, m must all be positive")
            derived = math.sqrt(self.g * self.n_c / self.m)
            if self.c is None:
                object.__setattr__(self, "c", derived)
            elif not math.isclose(self.c, derived, rel_tol=1e-12):
                raise ValueError(
                    f"inconsistent dispersion: c={self.c} but sqrt(g*n_c/m)={derived}"
                )
        if self.c is None:
            raise ValueError("need either c or all of g, n_c, m")
        if self.c <= 0:
            raise ValueError("sound speed must be positive")


@dataclass(frozen=True)
class LatticeConfig:
    """The lattice ball {p in Z^3 : |p| < R}."""

    R: float

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("lattice radius R must be positive")


@dataclass(frozen=True)
class Ray:
    """One decoupled 1D subsystem: primitive direction P0 and index count I."""

    P0: tuple[int, int, int]
    I: int

    def __post_init__(self):
        if self.P0 == (0, 0, 0):
            raise ValueError("ray direction cannot be the zero vector")
        if math.gcd(*(abs(x) for x in self.P0)) != 1:
            raise ValueError(f"ray direction {self.P0} is not primitive")
        if self.I < 1:
            raise ValueError("ray must contain at least one lattice point")

    @property
    def norm(self) -> float:
        return math.sqrt(sum(x * x for x in self.P0))

    def points(self) -> list[tuple[int, int, int]]:
        """Lattice points k*P0, 1 <= k <= I, carried by this ray."""
        return [tuple(k * x for x in self.P0) for k in range(1, self.I + 1)]


def primitive_direction(p: tuple[int, int, int]) -> tuple[int, int, int]:
    """Reduce a nonzero integer vector to its primitive direction.

    Divides by the gcd of the absolute components; the sign is preserved, so
    the result is positively collinear with ``p``.
    """
    if all(x == 0 for x in p):
        raise ValueError("zero momentum has no direction")
    g = math.gcd(*(abs(int(x)) for x in p))
    return tuple(int(x) // g for x in p)


def ray_index_count(P0: tuple[int, int, int], R: float) -> int:
    """Largest k >= 0 with k*|P0| < R (strict; boundary points excluded)."""
    if all(x == 0 for x in P0) or math.gcd(*(abs(int(x)) for x in P0)) != 1:
        raise ValueError(f"{P0} is not a primitive direction")
    norm = math.sqrt(sum(x * x for x in P0))
    k = int(R / norm)
    # float guard around the strict-inequality boundary
    while k * norm >= R:
        k -= 1
    while (k + 1) * norm < R:
        k += 1
    return max(k, 0)


def enumerate_rays(cfg: LatticeConfig) -> list[Ray]:
    """Partition the nonzero points of the lattice ball into rays.

    Every nonzero p with |p| < R lies on exactly one returned ray as
    p = k*P0 with 1 <= k <= I.  Rays are sorted lexicographically by P0
    so results are deterministic.  The origin is excluded (its occupation
    is constant in time and decoupled from everything else).
    """
    R = cfg.R
    bound = int(math.ceil(R))
    directions: set[tuple[int, int, int]] = set()
    for p in product(range(-bound, bound + 1), repeat=3):
        if p == (0, 0, 0):
            continue
        if sum(x * x for x in p) >= R * R:
            continue
        directions.add(primitive_direction(p))
    rays = [Ray(P0=d, I=ray_index_count(d, R)) for d in sorted(directions)]
    return rays
