"""Finite multisets of points in F_p^d.

Cardinality always counts multiplicities.  Instances are immutable after
construction; all operations return new multisets.  Support order is
lexicographic everywhere, which keeps every downstream search deterministic.
"""

from __future__ import annotations

from typing import Callable, Dict, Iterable, Iterator, Optional, Tuple

import numpy as np

from .group import GroupParams, AffineIso, Vec


class GroupMultiset:
    __slots__ = ("params", "_entries", "_cardinality", "_arrays")

    def __init__(self, params: GroupParams, entries: Dict[Vec, int]):
        clean: Dict[Vec, int] = {}
        for elem, mult in sorted(entries.items()):
            if mult < 0:
                raise ValueError(f"negative multiplicity for {elem}")
            if mult == 0:
                continue
            key = params.reduce(elem)
            if key != tuple(elem):
                raise ValueError(f"element {elem} is not a canonical residue vector")
            clean[key] = clean.get(key, 0) + int(mult)
        self.params = params
        self._entries = clean
        self._cardinality = sum(clean.values())
        self._arrays: Optional[tuple] = None

    @classmethod
    def from_points(cls, params: GroupParams, points: Iterable) -> "GroupMultiset":
        entries: Dict[Vec, int] = {}
        for pt in points:
            key = params.reduce(tuple(pt))
            entries[key] = entries.get(key, 0) + 1
        return cls(params, entries)

    @classmethod
    def empty(cls, params: GroupParams) -> "GroupMultiset":
        return cls(params, {})

    # -- queries ---------------------------------------------------------

    @property
    def cardinality(self) -> int:
        return self._cardinality

    def __len__(self) -> int:
        return self._cardinality

    def __bool__(self) -> bool:
        return self._cardinality > 0

    def support(self) -> Tuple[Vec, ...]:
        return tuple(self._entries.keys())

    def support_size(self) -> int:
        return len(self._entries)

    def multiplicity(self, x: Vec) -> int:
        return self._entries.get(tuple(x), 0)

    def __contains__(self, x) -> bool:
        return tuple(x) in self._entries

    def items(self) -> Iterator[Tuple[Vec, int]]:
        return iter(self._entries.items())

    def iter_with_multiplicity(self) -> Iterator[Vec]:
        for elem, mult in self._entries.items():
            for _ in range(mult):
                yield elem

    def is_set(self) -> bool:
        return all(m == 1 for m in self._entries.values())

    def arrays(self):
        """(support array (n, d) int64, multiplicity array (n,) int64)."""
        if self._arrays is None:
            if self._entries:
                pts = np.array(list(self._entries.keys()), dtype=np.int64)
                mults = np.array(list(self._entries.values()), dtype=np.int64)
            else:
                pts = np.zeros((0, self.params.d), dtype=np.int64)
                mults = np.zeros((0,), dtype=np.int64)
            self._arrays = (pts, mults)
        return self._arrays

    def total(self) -> Vec:
        """Sum of all elements with multiplicity."""
        acc = [0] * self.params.d
        for elem, mult in self._entries.items():
            for i, c in enumerate(elem):
                acc[i] += mult * c
        return tuple(a % self.params.p for a in acc)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupMultiset):
            return NotImplemented
        return self.params == other.params and self._entries == other._entries

    def __repr__(self) -> str:
        return (
            f"GroupMultiset(p={self.params.p}, d={self.params.d}, "
            f"|X|={self._cardinality}, support={len(self._entries)})"
        )

    # -- algebra ---------------------------------------------------------

    def union(self, other: "GroupMultiset") -> "GroupMultiset":
        entries = dict(self._entries)
        for elem, mult in other.items():
            entries[elem] = entries.get(elem, 0) + mult
        return GroupMultiset(self.params, entries)

    def minus(self, other: "GroupMultiset") -> "GroupMultiset":
        entries = dict(self._entries)
        for elem, mult in other.items():
            have = entries.get(elem, 0)
            if have < mult:
                raise ValueError(f"cannot remove {mult} copies of {elem}, have {have}")
            entries[elem] = have - mult
        return GroupMultiset(self.params, entries)

    def contains_submultiset(self, other: "GroupMultiset") -> bool:
        return all(self.multiplicity(e) >= m for e, m in other.items())

    def restrict(self, pred: Callable[[Vec], bool]) -> "GroupMultiset":
        return GroupMultiset(
            self.params, {e: m for e, m in self._entries.items() if pred(e)}
        )

    def translate(self, v: Vec) -> "GroupMultiset":
        add = self.params.add
        return GroupMultiset(
            self.params, {add(e, v): m for e, m in self._entries.items()}
        )

    def apply_iso(self, psi: AffineIso) -> "GroupMultiset":
        p = self.params.p
        return GroupMultiset(
            self.params, {psi.apply(e, p): m for e, m in self._entries.items()}
        )


def change_coords(X: GroupMultiset, psi: AffineIso) -> GroupMultiset:
    """Image multiset under an affine isomorphism; multiplicities carry over."""
    psi.validate(X.params.p)
    return X.apply_iso(psi)
