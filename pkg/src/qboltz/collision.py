"""Discrete collision operators on a single ray.

The occupation vector F has length I, entry F_k being the occupation of the
lattice point k*P0.  Three operators are provided:

* ``c12_rhs``  -- 1 <-> 2 particle processes (splitting/merging, k2+k3=k1),
* ``c13_rhs``  -- 1 <-> 3 processes (k2+k3+k4=k1),
* ``c22_rhs``  -- 2 <-> 2 exchange (k1+k2=k3+k4), the scalar-index model.

The operator functions iterate over ordered index tuples exactly as the
defining sums are written.  ``*_resonances``/``*_terms`` give the collapsed
unordered form (one entry per reversible exchange with a multiplicity
weight), used by the reaction-network view and the compiled integrator; the
two forms are equivalent and are cross-checked in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import DomainError
from .kernels import Kernel


@dataclass(frozen=True)
class ConservedQuantities:
    """Linear functionals preserved by the dynamics.

    ``energy`` (sum of k*F_k) is conserved by every operator; ``mass``
    (sum of F_k) only by the pure 2<->2 exchange.
    """

    energy: float
    mass: float


def check_state_f(F: np.ndarray) -> np.ndarray:
    """Validate and return an occupation vector (positive entries)."""
    F = np.asarray(F, dtype=float)
    if F.ndim != 1 or len(F) < 1:
        raise ValueError("state must be a nonempty 1D vector")
    if not np.all(F > 0):
        raise DomainError("occupation numbers must be strictly positive")
    if not np.all(np.isfinite(F)):
        raise DomainError("occupation numbers must be finite")
    return F


def conserved(F: np.ndarray) -> ConservedQuantities:
    """Energy sum(k*F_k) and mass sum(F_k) of a state."""
    F = check_state_f(F)
    k = np.arange(1, len(F) + 1)
    return ConservedQuantities(energy=float(k @ F), mass=float(F.sum()))


def _require_arity(kernel: Kernel, arity: int):
    if kernel.arity != arity:
        raise ValueError(f"expected kernel of arity {arity}, got {kernel.arity}")


def c12_rhs(F: np.ndarray, K12: Kernel) -> np.ndarray:
    """Right-hand side of the 1<->2 operator, ordered sums as written."""
    F = check_state_f(F)
    _require_arity(K12, 3)
    I = len(F)
    out = np.zeros(I)
    for k1 in range(1, I + 1):
        acc = 0.0
        # gain/loss from decompositions k1 = k2 + k3
        for k2 in range(1, I + 1):
            k3 = k1 - k2
            if 1 <= k3 <= I:
                f1, f2, f3 = F[k1 - 1], F[k2 - 1], F[k3 - 1]
                acc += K12(k1, k2, k3) * (
                    (f1 + 1) * f2 * f3 - f1 * (f2 + 1) * (f3 + 1)
                )
        # k1 participating in a larger mode k2 = k1 + k3
        for k3 in range(1, I + 1):
            k2 = k1 + k3
            if k2 <= I:
                f1, f2, f3 = F[k1 - 1], F[k2 - 1], F[k3 - 1]
                acc -= 2 * K12(k2, k1, k3) * (
                    (f2 + 1) * f1 * f3 - f2 * (f1 + 1) * (f3 + 1)
                )
        out[k1 - 1] = acc
    return out


def c13_rhs(F: np.ndarray, K13: Kernel) -> np.ndarray:
    """Right-hand side of the 1<->3 operator, ordered sums as written."""
    F = check_state_f(F)
    _require_arity(K13, 4)
    I = len(F)
    out = np.zeros(I)
    for k1 in range(1, I + 1):
        acc = 0.0
        for k2 in range(1, I + 1):
            for k3 in range(1, I + 1):
                k4 = k1 - k2 - k3
                if 1 <= k4 <= I:
                    f1, f2, f3, f4 = F[k1 - 1], F[k2 - 1], F[k3 - 1], F[k4 - 1]
                    acc += K13(k1, k2, k3, k4) * (
                        (f1 + 1) * f2 * f3 * f4
                        - f1 * (f2 + 1) * (f3 + 1) * (f4 + 1)
                    )
        for k2 in range(1, I + 1):
            for k3 in range(1, I + 1):
                k4 = k1 + k2 + k3
                if k4 <= I:
                    f1, f2, f3, f4 = F[k1 - 1], F[k2 - 1], F[k3 - 1], F[k4 - 1]
                    acc -= 3 * K13(k4, k1, k2, k3) * (
                        (f4 + 1) * f1 * f2 * f3
                        - f4 * (f1 + 1) * (f2 + 1) * (f3 + 1)
                    )
        out[k1 - 1] = acc
    return out


def c22_rhs(F: np.ndarray, K22: Kernel) -> np.ndarray:
    """Right-hand side of the 2<->2 exchange operator, ordered sums."""
    F = check_state_f(F)
    _require_arity(K22, 4)
    I = len(F)
    out = np.zeros(I)
    for k1 in range(1, I + 1):
        acc = 0.0
        for k2 in range(1, I + 1):
            for k3 in range(1, I + 1):
                k4 = k1 + k2 - k3
                if 1 <= k4 <= I:
                    f1, f2, f3, f4 = F[k1 - 1], F[k2 - 1], F[k3 - 1], F[k4 - 1]
                    acc += K22(k1, k2, k3, k4) * (
                        (f1 + 1) * (f2 + 1) * f3 * f4
                        - f1 * f2 * (f3 + 1) * (f4 + 1)
                    )
        out[k1 - 1] = acc
    return out


def combined_rhs(F: np.ndarray, K12: Kernel | None = None,
                 K22: Kernel | None = None,
                 K13: Kernel | None = None) -> np.ndarray:
    """Pointwise sum of the enabled operators."""
    if K12 is None and K22 is None and K13 is None:
        raise ValueError("at least one kernel must be enabled")
    F = check_state_f(F)
    out = np.zeros(len(F))
    if K12 is not None:
        out += c12_rhs(F, K12)
    if K22 is not None:
        out += c22_rhs(F, K22)
    if K13 is not None:
        out += c13_rhs(F, K13)
    return out


# ---------------------------------------------------------------------------
# Collapsed (unordered) resonance enumeration.
#
# Each resonance is a reversible exchange between two integer multisets with
# equal k-sum; the multiplicity weight counts the ordered tuples it absorbs.
# ---------------------------------------------------------------------------

def c12_resonances(I: int) -> list[tuple[int, int, int, int]]:
    """All (k1, k2, k3, m) with k2 <= k3, k2 + k3 = k1 <= I.

    m is the number of ordered (k2, k3) pairs: 1 on the diagonal, else 2.
    """
    res = []
    for k1 in range(2, I + 1):
        for k2 in range(1, k1 // 2 + 1):
            k3 = k1 - k2
            if k3 <= I:
                res.append((k1, k2, k3, 1 if k2 == k3 else 2))
    return res


def _multiset_perms(ms: tuple[int, ...]) -> int:
    counts = {}
    for x in ms:
        counts[x] = counts.get(x, 0) + 1
    n = factorial(len(ms))
    for c in counts.values():
        n //= factorial(c)
    return n


def c13_resonances(I: int) -> list[tuple[int, tuple[int, int, int], int]]:
    """All (k1, (k2, k3, k4) sorted, m) with k2+k3+k4 = k1 <= I.

    m is the number of ordered arrangements of the triple.
    """
    res = []
    for k1 in range(3, I + 1):
        for k2 in range(1, I + 1):
            for k3 in range(k2, I + 1):
                k4 = k1 - k2 - k3
                if k3 <= k4 <= I:
                    trip = (k2, k3, k4)
                    res.append((k1, trip, _multiset_perms(trip)))
    return res


def c22_resonances(I: int) -> list[tuple[tuple[int, int], tuple[int, int], int]]:
    """All nontrivial exchanges ((a, b), (c, d), w) with a+b = c+d.

    Pairs are sorted multisets, (a, b) < (c, d) lexicographically; equal
    multisets are skipped (their bracket vanishes identically).  The weight
    w = m_ab * m_cd / 2 absorbs the ordered-tuple count.
    """
    res = []
    for a in range(1, I + 1):
        for b in range(a, I + 1):
            s = a + b
            for c in range(1, I + 1):
                d = s - c
                if c <= d <= I and (a, b) < (c, d):
                    m_ab = 1 if a == b else 2
                    m_cd = 1 if c == d else 2
                    res.append(((a, b), (c, d), m_ab * m_cd // 2))
    return res


def c12_terms(I: int, K12: Kernel) -> tuple[np.ndarray, np.ndarray]:
    """0-based index rows (k1, k2, k3) and coefficients m * K per resonance."""
    _require_arity(K12, 3)
    rows, coefs = [], []
    for k1, k2, k3, m in c12_resonances(I):
        v = K12(k1, k2, k3)
        if v != 0.0:
            rows.append((k1 - 1, k2 - 1, k3 - 1))
            coefs.append(m * v)
    return (np.array(rows, dtype=np.int64).reshape(-1, 3),
            np.array(coefs, dtype=np.float64))


def c13_terms(I: int, K13: Kernel) -> tuple[np.ndarray, np.ndarray]:
    """0-based index rows (k1, k2, k3, k4) and coefficients m * K."""
    _require_arity(K13, 4)
    rows, coefs = [], []
    for k1, trip, m in c13_resonances(I):
        v = K13(k1, *trip)
        if v != 0.0:
            rows.append((k1 - 1,) + tuple(k - 1 for k in trip))
            coefs.append(m * v)
    return (np.array(rows, dtype=np.int64).reshape(-1, 4),
            np.array(coefs, dtype=np.float64))


def c22_terms(I: int, K22: Kernel) -> tuple[np.ndarray, np.ndarray]:
    """0-based index rows (a, b, c, d) and coefficients w * K."""
    _require_arity(K22, 4)
    rows, coefs = [], []
    for (a, b), (c, d), w in c22_resonances(I):
        v = K22(a, b, c, d)
        if v != 0.0:
            rows.append((a - 1, b - 1, c - 1, d - 1))
            coefs.append(w * v)
    return (np.array(rows, dtype=np.int64).reshape(-1, 4),
            np.array(coefs, dtype=np.float64))
