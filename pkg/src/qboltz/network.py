"""Mass-action reaction networks and Petri-net persistence certificates.

The 1<->2 collision dynamics is compiled into an explicit list of chemical
reactions whose mass-action system reproduces it term for term.  Structural
persistence is certified the Petri-net way: every minimal siphon must
contain the support of a nonnegative conserved linear form (P-semiflow).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .collision import c13_resonances, c22_resonances, check_state_f
from .kernels import Kernel

SIPHON_SPECIES_LIMIT = 16


@dataclass(frozen=True)
class Reaction:
    """reactant -> product with a positive mass-action rate constant."""

    reactant: tuple[int, ...]
    product: tuple[int, ...]
    rate: float

    def __post_init__(self):
        if self.reactant == self.product:
            raise ValueError("reactant and product complexes must differ")
        if self.rate <= 0:
            raise ValueError("rate constant must be positive")

    @property
    def vector(self) -> np.ndarray:
        """Net stoichiometric change (product - reactant)."""
        return np.array(self.product, dtype=float) - np.array(self.reactant, dtype=float)


@dataclass
class ReactionNetwork:
    """Species 1..I plus a reaction list; stoichiometry is derived."""

    I: int
    reactions: list[Reaction] = field(default_factory=list)

    @property
    def stoichiometric_matrix(self) -> np.ndarray:
        """I x n_reactions matrix with columns product - reactant."""
        if not self.reactions:
            return np.zeros((self.I, 0))
        return np.column_stack([r.vector for r in self.reactions])

    def to_json_dict(self) -> dict:
        return {
            "species": [f"X{k}" for k in range(1, self.I + 1)],
            "reactions": [
                {
                    "reactants": {str(k + 1): int(m) for k, m in enumerate(r.reactant) if m},
                    "products": {str(k + 1): int(m) for k, m in enumerate(r.product) if m},
                    "rate": r.rate,
                }
                for r in self.reactions
            ],
        }

    def to_json(self, path: str | None = None) -> str:
        text = json.dumps(self.to_json_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def _complex(I: int, *ks: int) -> tuple[int, ...]:
    v = [0] * I
    for k in ks:
        v[k - 1] += 1
    return tuple(v)


def build_c12_network(I: int, K12: Kernel) -> ReactionNetwork:
    """Compile the 1<->2 dynamics into an explicit reaction list.

    For each unordered condensation {k2, k3} -> k1 (k2+k3 = k1 <= I) with
    kernel value K:

    * k2 != k3: four reactions, all with constant 2K --
      X_k2+X_k3 -> X_k1, X_k1 -> X_k2+X_k3, X_k2+X_k1 -> 2X_k2+X_k3,
      X_k3+X_k1 -> 2X_k3+X_k2 (the last is the role-swapped companion).
    * k2 == k3: three reactions -- 2X_k2 <-> X_k1 at K each way, and
      X_k2+X_k1 -> 3X_k2 at 2K.
    """
    if K12.arity != 3:
        raise ValueError("c12 network needs an arity-3 kernel")
    net = ReactionNetwork(I=I)
    for k1 in range(2, I + 1):
        for k2 in range(1, k1 // 2 + 1):
            k3 = k1 - k2
            v = K12(k1, k2, k3)
            if v == 0.0:
                continue
            if k2 != k3:
                net.reactions.append(Reaction(_complex(I, k2, k3), _complex(I, k1), 2 * v))
                net.reactions.append(Reaction(_complex(I, k1), _complex(I, k2, k3), 2 * v))
                net.reactions.append(Reaction(_complex(I, k2, k1), _complex(I, k2, k2, k3), 2 * v))
                net.reactions.append(Reaction(_complex(I, k3, k1), _complex(I, k3, k3, k2), 2 * v))
            else:
                net.reactions.append(Reaction(_complex(I, k2, k2), _complex(I, k1), v))
                net.reactions.append(Reaction(_complex(I, k1), _complex(I, k2, k2), v))
                net.reactions.append(Reaction(_complex(I, k2, k1), _complex(I, k2, k2, k2), 2 * v))
    return net


def c22_skeleton_network(I: int, K22: Kernel | None = None) -> ReactionNetwork:
    """Reversible exchange skeleton X_a + X_b <-> X_c + X_d (a+b = c+d)."""
    if K22 is None:
        K22 = Kernel.constant(1.0, 4)
    net = ReactionNetwork(I=I)
    for (a, b), (c, d), w in c22_resonances(I):
        v = K22(a, b, c, d)
        if v == 0.0:
            continue
        net.reactions.append(Reaction(_complex(I, a, b), _complex(I, c, d), w * v))
        net.reactions.append(Reaction(_complex(I, c, d), _complex(I, a, b), w * v))
    return net


def c13_skeleton_network(I: int, K13: Kernel | None = None) -> ReactionNetwork:
    """Reversible skeleton X_k2 + X_k3 + X_k4 <-> X_k1 (k2+k3+k4 = k1)."""
    if K13 is None:
        K13 = Kernel.constant(1.0, 4)
    net = ReactionNetwork(I=I)
    for k1, trip, m in c13_resonances(I):
        v = K13(k1, *trip)
        if v == 0.0:
            continue
        net.reactions.append(Reaction(_complex(I, *trip), _complex(I, k1), m * v))
        net.reactions.append(Reaction(_complex(I, k1), _complex(I, *trip), m * v))
    return net


def mass_action_rhs(net: ReactionNetwork, F: np.ndarray) -> np.ndarray:
    """xdot = sum_j rate_j * F^(reactant_j) * (product_j - reactant_j)."""
    F = check_state_f(F)
    if len(F) != net.I:
        raise ValueError(f"state length {len(F)} != species count {net.I}")
    out = np.zeros(net.I)
    for r in net.reactions:
        alpha = np.array(r.reactant, dtype=float)
        out += r.rate * float(np.prod(F ** alpha)) * r.vector
    return out


def minimal_siphons(net: ReactionNetwork) -> list[frozenset[int]]:
    """All inclusion-minimal nonempty siphons, by exhaustive subset search.

    A siphon is a species set S such that every reaction producing a member
    of S also consumes a member of S.  Species are reported as 1-based
    indices, in deterministic ascending order.
    """
    if net.I > SIPHON_SPECIES_LIMIT:
        raise ValueError(
            f"siphon enumeration capped at {SIPHON_SPECIES_LIMIT} species; "
            "use check_p_semiflow on candidate conservation laws instead"
        )
    masks = []
    for r in net.reactions:
        prod = sum(1 << k for k, m in enumerate(r.product) if m > 0)
        reac = sum(1 << k for k, m in enumerate(r.reactant) if m > 0)
        masks.append((prod, reac))
    siphons = []
    for S in range(1, 1 << net.I):
        ok = all(not (prod & S) or (reac & S) for prod, reac in masks)
        if ok:
            siphons.append(S)
    minimal = [
        S for S in siphons
        if not any(T != S and (T & S) == T for T in siphons)
    ]
    out = [frozenset(k + 1 for k in range(net.I) if S & (1 << k)) for S in minimal]
    return sorted(out, key=lambda s: sorted(s))


def check_p_semiflow(net: ReactionNetwork, w: np.ndarray) -> bool:
    """True iff w >= 0, w != 0 and w is in the left kernel of the stoichiometry."""
    w = np.asarray(w, dtype=float)
    if len(w) != net.I:
        raise ValueError(f"weight length {len(w)} != species count {net.I}")
    if np.any(w < 0) or not np.any(w > 0):
        return False
    N = net.stoichiometric_matrix
    if N.shape[1] == 0:
        return True
    return bool(np.max(np.abs(w @ N)) <= 1e-9)


@dataclass(frozen=True)
class PersistenceReport:
    """Outcome of the siphon/P-semiflow persistence certificate."""

    certified: bool
    siphons: tuple[frozenset[int], ...]
    covered: dict
    uncovered: tuple[frozenset[int], ...]
    invalid_candidates: tuple[int, ...]


def persistence_certificate(net: ReactionNetwork,
                            candidate_semiflows: list[np.ndarray]) -> PersistenceReport:
    """Certify persistence: every minimal siphon must contain the support
    of some valid candidate P-semiflow.

    Candidates that are not actual P-semiflows of the network are ignored
    (and reported).  An empty network is trivially certified.
    """
    siphons = minimal_siphons(net)
    valid = []
    invalid = []
    for i, w in enumerate(candidate_semiflows):
        if check_p_semiflow(net, w):
            valid.append((i, frozenset(
                k + 1 for k, x in enumerate(np.asarray(w)) if x > 0)))
        else:
            invalid.append(i)
    covered = {}
    uncovered = []
    for S in siphons:
        hit = next((i for i, supp in valid if supp <= S), None)
        if hit is None:
            uncovered.append(S)
        else:
            covered[S] = hit
    return PersistenceReport(
        certified=not uncovered,
        siphons=tuple(siphons),
        covered=covered,
        uncovered=tuple(uncovered),
        invalid_candidates=tuple(invalid),
    )
