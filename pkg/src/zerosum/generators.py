"""Deterministic instance generators.

Every generator takes a seed and produces the same instance for the same
arguments; instances are sets (distinct points) unless a multiset is built
explicitly from repeated input.
"""

from __future__ import annotations

import random
from typing import List, Optional, Sequence

from . import linalg
from .group import AffineIso, GroupParams, Vec
from .multiset import GroupMultiset

KINDS = ("explicit", "random-cloud", "fiber-union", "box", "adversarial-thin")


def explicit(params: GroupParams, elements: Sequence[Sequence[int]]) -> GroupMultiset:
    return GroupMultiset.from_points(params, elements)


def random_cloud(params: GroupParams, size: int, seed: int) -> GroupMultiset:
    """Uniformly random distinct points."""
    if size > params.order:
        raise ValueError("size exceeds the group order")
    rng = random.Random(seed)
    seen = set()
    while len(seen) < size:
        seen.add(tuple(rng.randrange(params.p) for _ in range(params.d)))
    return GroupMultiset.from_points(params, sorted(seen))


def fiber_union(
    params: GroupParams,
    n_fibers: int,
    fiber_size: Optional[int] = None,
    seed: int = 0,
    skew: bool = False,
    offset: int = 0,
) -> GroupMultiset:
    """Union of full or partial parallel lines over consecutive first
    coordinates; optionally pushed through a random linear isomorphism so the
    tube direction is not axis-aligned."""
    p, d = params.p, params.d
    if d < 2:
        raise ValueError("fiber unions need d >= 2")
    if n_fibers > p:
        raise ValueError("more fibers than residues")
    rng = random.Random(seed)
    if fiber_size is None:
        fiber_size = p ** (d - 1)
    pts: List[Vec] = []
    for i in range(n_fibers):
        first = (offset + i) % p
        tails = set()
        if fiber_size >= p ** (d - 1):
            tails = {tuple(t) for t in _all_tails(p, d - 1)}
        else:
            while len(tails) < fiber_size:
                tails.add(tuple(rng.randrange(p) for _ in range(d - 1)))
        for tail in sorted(tails):
            pts.append((first,) + tail)
    X = GroupMultiset.from_points(params, pts)
    if skew:
        mat = _random_invertible(params, rng)
        X = X.apply_iso(AffineIso(mat, (0,) * d))
    return X


def _all_tails(p: int, k: int):
    if k == 0:
        yield ()
        return
    for head in range(p):
        for rest in _all_tails(p, k - 1):
            yield (head,) + rest


def _random_invertible(params: GroupParams, rng: random.Random):
    p, d = params.p, params.d
    while True:
        mat = tuple(tuple(rng.randrange(p) for _ in range(d)) for _ in range(d))
        if linalg.invert_matrix(mat, p) is not None:
            return mat


def box(params: GroupParams, K: int, size: Optional[int] = None, seed: int = 0) -> GroupMultiset:
    """Points of the box [-K, K]^d, optionally subsampled to `size`."""
    p, d = params.p, params.d
    width = min(2 * K + 1, p)
    vals = sorted({v % p for v in range(-K, K + 1)})
    pts = []

    def rec(prefix):
        if len(prefix) == d:
            pts.append(tuple(prefix))
            return
        for v in vals:
            rec(prefix + [v])

    rec([])
    if size is not None and size < len(pts):
        rng = random.Random(seed)
        idx = sorted(rng.sample(range(len(pts)), size))
        pts = [pts[i] for i in idx]
    return GroupMultiset.from_points(params, pts)


def adversarial_thin(params: GroupParams, size: int, K: int, seed: int = 0) -> GroupMultiset:
    """Points concentrated in a slab |first coordinate| <= K: thin along x_1,
    built to exercise tube reductions and failure paths."""
    p, d = params.p, params.d
    rng = random.Random(seed)
    vals = sorted({v % p for v in range(-K, K + 1)})
    seen = set()
    while len(seen) < min(size, len(vals) * p ** (d - 1)):
        head = vals[rng.randrange(len(vals))]
        seen.add((head,) + tuple(rng.randrange(p) for _ in range(d - 1)))
    return GroupMultiset.from_points(params, sorted(seen))


def generate(kind: str, params: GroupParams, seed: int = 0, **kw) -> GroupMultiset:
    if kind == "explicit":
        return explicit(params, kw["elements"])
    if kind == "random-cloud":
        return random_cloud(params, kw["size"], seed)
    if kind == "fiber-union":
        return fiber_union(
            params,
            kw["n_fibers"],
            kw.get("fiber_size"),
            seed,
            kw.get("skew", False),
            kw.get("offset", 0),
        )
    if kind == "box":
        return box(params, kw["K"], kw.get("size"), seed)
    if kind == "adversarial-thin":
        return adversarial_thin(params, kw["size"], kw.get("K", 1), seed)
    raise ValueError(f"unknown generator kind {kind!r}; choose from {KINDS}")
