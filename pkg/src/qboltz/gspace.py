"""The bounded variables G_k = F_k / (F_k + 1) and their vector field.

In G-space every collision operator becomes diag((1-G_k)^2) times a signed
sum over reversible reactions y <-> y' between integer complexes with equal
k-sum.  The forward/backward rates share a common symmetric factor H, which
is what makes the Lyapunov computation and the equilibrium linearization
transparent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collision import c12_resonances, c13_resonances, c22_resonances, check_state_f
from .errors import DomainError
from .kernels import Kernel

_BOUNDARY_MARGIN = 1e-12


def check_state_g(G: np.ndarray, margin: float = 0.0) -> np.ndarray:
    """Validate a G-state; entries must lie in the open interval (0, 1)."""
    G = np.asarray(G, dtype=float)
    if G.ndim != 1 or len(G) < 1:
        raise ValueError("state must be a nonempty 1D vector")
    if not np.all((G > margin) & (G < 1.0 - margin)):
        raise DomainError("G entries must lie strictly inside (0, 1)")
    return G


def f_to_g(F: np.ndarray) -> np.ndarray:
    """Map occupations to bounded variables, G_k = F_k / (F_k + 1)."""
    F = check_state_f(F)
    return F / (F + 1.0)


def g_to_f(G: np.ndarray) -> np.ndarray:
    """Inverse map, F_k = G_k / (1 - G_k)."""
    G = check_state_g(G)
    return G / (1.0 - G)


@dataclass(frozen=True)
class ReversiblePair:
    """A reversible reaction y <-> y' with its rate data.

    ``reactant``/``product`` are multiplicity vectors over species 1..I.
    ``rate_constant`` already includes the ordered-tuple multiplicity of the
    exchange, so summing (forward - backward) * (product - reactant) over all
    pairs reproduces the collision dynamics exactly.
    """

    reactant: tuple[int, ...]
    product: tuple[int, ...]
    rate_constant: float

    @property
    def reactant_vec(self) -> np.ndarray:
        return np.array(self.reactant, dtype=float)

    @property
    def product_vec(self) -> np.ndarray:
        return np.array(self.product, dtype=float)

    def h_value(self, G: np.ndarray) -> float:
        """The shared factor H(G) = 1 / prod (1-G_k)^(y_k + y'_k)."""
        tot = self.reactant_vec + self.product_vec
        return float(1.0 / np.prod((1.0 - G) ** tot))

    def forward_rate(self, G: np.ndarray) -> float:
        """K_{y -> y'}(G) = rate_constant * G^y * H(G)."""
        return self.rate_constant * float(np.prod(G ** self.reactant_vec)) * self.h_value(G)

    def backward_rate(self, G: np.ndarray) -> float:
        """K_{y' -> y}(G) = rate_constant * G^y' * H(G)."""
        return self.rate_constant * float(np.prod(G ** self.product_vec)) * self.h_value(G)


def _complex(I: int, *ks: int) -> tuple[int, ...]:
    v = [0] * I
    for k in ks:
        v[k - 1] += 1
    return tuple(v)


def reversible_pairs(I: int, K12: Kernel | None = None,
                     K22: Kernel | None = None,
                     K13: Kernel | None = None) -> list[ReversiblePair]:
    """Enumerate the reversible reactions of the enabled operators.

    For the 1<->2 operator the pair {k2, k3} <-> {k1} carries constant
    2*K off the diagonal and K on it; the 1<->3 and 2<->2 constants carry
    the analogous arrangement counts.  Pairs with zero kernel value are
    dropped.
    """
    if K12 is None and K22 is None and K13 is None:
        raise ValueError("at least one kernel must be enabled")
    pairs: list[ReversiblePair] = []
    if K12 is not None:
        for k1, k2, k3, m in c12_resonances(I):
            v = K12(k1, k2, k3)
            if v != 0.0:
                pairs.append(ReversiblePair(
                    reactant=_complex(I, k2, k3),
                    product=_complex(I, k1),
                    rate_constant=m * v,
                ))
    if K22 is not None:
        for (a, b), (c, d), w in c22_resonances(I):
            v = K22(a, b, c, d)
            if v != 0.0:
                pairs.append(ReversiblePair(
                    reactant=_complex(I, a, b),
                    product=_complex(I, c, d),
                    rate_constant=w * v,
                ))
    if K13 is not None:
        for k1, trip, m in c13_resonances(I):
            v = K13(k1, *trip)
            if v != 0.0:
                pairs.append(ReversiblePair(
                    reactant=_complex(I, *trip),
                    product=_complex(I, k1),
                    rate_constant=m * v,
                ))
    return pairs


def g_rhs(G: np.ndarray, K12: Kernel | None = None,
          K22: Kernel | None = None, K13: Kernel | None = None,
          pairs: list[ReversiblePair] | None = None) -> np.ndarray:
    """G-space vector field: diag((1-G)^2) * sum (K_f - K_b)(y' - y).

    States within 1e-12 of the boundary of (0,1)^I are rejected, not
    clamped; a persistence failure should be loud.
    """
    G = check_state_g(G, margin=_BOUNDARY_MARGIN)
    if pairs is None:
        pairs = reversible_pairs(len(G), K12=K12, K22=K22, K13=K13)
    out = np.zeros(len(G))
    for p in pairs:
        net = p.forward_rate(G) - p.backward_rate(G)
        out += net * (p.product_vec - p.reactant_vec)
    return (1.0 - G) ** 2 * out
