"""Collision rate kernels.

A kernel assigns a nonnegative rate coefficient to each index tuple of a
fixed arity (3 for the 1<->2 operator, 4 for the 2<->2 and 1<->3 operators).
Lookups are invariant under any permutation of the indices: tables store the
sorted tuple.  A kernel is 0 whenever any index is 0.
"""

from __future__ import annotations

import json
from typing import Iterable, Mapping, Union


class Kernel:
    """Permutation-symmetric nonnegative rate coefficients.

    Use :meth:`constant` or :meth:`from_table` to construct.
    """

    def __init__(self, arity: int, *, value: float | None = None,
                 table: Mapping[tuple[int, ...], float] | None = None):
        if arity not in (3, 4):
            raise ValueError(f"kernel arity must be 3 or 4, got {arity}")
        if (value is None) == (table is None):
            raise ValueError("exactly one of value/table must be given")
        self.arity = arity
        self.kind = "constant" if value is not None else "table"
        if value is not None:
            if value < 0:
                raise ValueError("kernel value must be nonnegative")
            self.value = float(value)
            self.table = None
        else:
            self.value = None
            self.table = {}
            for idx, v in table.items():
                key = tuple(sorted(int(i) for i in idx))
                if len(key) != arity:
                    raise ValueError(f"index tuple {idx} has wrong arity")
                if v < 0:
                    raise ValueError("kernel value must be nonnegative")
                if key in self.table:
                    raise ValueError(f"duplicate canonical index tuple {key}")
                self.table[key] = float(v)

    @classmethod
    def constant(cls, value: float, arity: int) -> "Kernel":
        return cls(arity, value=value)

    @classmethod
    def from_table(cls, entries: Mapping[tuple[int, ...], float],
                   arity: int) -> "Kernel":
        return cls(arity, table=entries)

    @classmethod
    def from_json(cls, source: Union[str, Iterable[dict]], arity: int | None = None) -> "Kernel":
        """Load a table kernel from a JSON file path or a parsed entry list.

        The file holds an array of ``{"indices": [k1, ...], "value": v}``.
        Duplicate canonical (sorted) tuples are a load error.
        """
        if isinstance(source, str):
            with open(source) as fh:
                entries = json.load(fh)
        else:
            entries = list(source)
        if not entries:
            raise ValueError("empty kernel table")
        arities = {len(e["indices"]) for e in entries}
        if len(arities) != 1:
            raise ValueError(f"mixed index arities in kernel table: {sorted(arities)}")
        found = arities.pop()
        if arity is not None and found != arity:
            raise ValueError(f"kernel table arity {found} != expected {arity}")
        table = {}
        for e in entries:
            key = tuple(sorted(int(i) for i in e["indices"]))
            if key in table:
                raise ValueError(f"duplicate canonical index tuple {key}")
            table[key] = float(e["value"])
        return cls(found, table=table)

    def __call__(self, *indices: int) -> float:
        if len(indices) != self.arity:
            raise ValueError(
                f"kernel of arity {self.arity} called with {len(indices)} indices"
            )
        if any(i == 0 for i in indices):
            return 0.0
        if self.kind == "constant":
            return self.value
        return self.table.get(tuple(sorted(indices)), 0.0)

    def __repr__(self):
        if self.kind == "constant":
            return f"Kernel.constant({self.value}, arity={self.arity})"
        return f"Kernel.from_table(<{len(self.table)} entries>, arity={self.arity})"
