"""Thickness along linear functionals and the tube/decomposition machinery.

A multiset X is (K, delta)-thick along a functional xi when at least a
delta-fraction of X (with multiplicity) lies outside the slab H(xi, K).
Everything below is built from exhaustive scans: one value histogram per
canonical direction (leading coefficient 1), expanded to all scalar
multiples by index permutation -- scaling is not a symmetry here, since
[-K, K] pulls back along c to an arithmetic progression -- with the binding
constant term read off circular window sums.

Three operations mirror the structural reductions used by the search
pipeline: a single tube reduction, a recursive decomposition into parts that
are thick inside their affine hulls, and a strengthened decomposition whose
part-unions all carry re-checkable tubular certificates.

Deltas and epsilons are Fractions throughout; no comparison ever goes
through floating point.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .group import (
    AffineIso,
    GroupParams,
    LinearFunctional,
    Vec,
    affine_hull,
    canonical_linear_parts,
    in_interval,
    nonconstant_on_span,
)
from .multiset import GroupMultiset


class DecompositionBudgetError(RuntimeError):
    """Raised when the iterate exponent outruns its cap (a sign the growth
    function is pathological for this instance)."""


class SubsetSweepBudgetError(RuntimeError):
    """Raised when 2^m subset sweeps would exceed the configured budget."""

    def __init__(self, message: str, m: int, budget: int):
        super().__init__(message)
        self.m = m
        self.budget = budget


# ---------------------------------------------------------------------------
# Growth functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthFunction:
    """Strictly increasing g: N -> N with g(K) > K, evaluated exactly.

    kinds: affine a*K+b, polynomial (K+b)^a, exponential a^K.
    """

    kind: str
    a: int
    b: int = 0

    def __post_init__(self):
        if self.kind == "affine":
            if self.a < 1 or self.b < 1:
                raise ValueError("affine growth needs a >= 1 and b >= 1")
        elif self.kind == "polynomial":
            if self.a < 2 or self.b < 1:
                raise ValueError("polynomial growth needs exponent >= 2 and shift >= 1")
        elif self.kind == "exponential":
            if self.a < 2:
                raise ValueError("exponential growth needs base >= 2")
        else:
            raise ValueError(f"unknown growth kind {self.kind!r}")

    def __call__(self, K: int) -> int:
        if K < 0:
            raise ValueError("growth functions are defined on N")
        if self.kind == "affine":
            return self.a * K + self.b
        if self.kind == "polynomial":
            return (K + self.b) ** self.a
        return self.a ** K if self.a ** K > K else K + 1  # exponential; g(K) > K

    def iterate(self, times: int, K: int) -> int:
        v = K
        for _ in range(times):
            v = self(v)
        return v

    def describe(self) -> str:
        if self.kind == "affine":
            if self.a == 1:
                return f"K+{self.b}"
            return f"{self.a}K+{self.b}"
        if self.kind == "polynomial":
            return f"(K+{self.b})^{self.a}"
        return f"{self.a}^K"

    @staticmethod
    def parse(text: str) -> "GrowthFunction":
        s = text.replace(" ", "")
        m = re.fullmatch(r"(?:(\d+))?K\+(\d+)", s)
        if m:
            return GrowthFunction("affine", int(m.group(1) or 1), int(m.group(2)))
        m = re.fullmatch(r"\(K\+(\d+)\)\^(\d+)", s)
        if m:
            return GrowthFunction("polynomial", int(m.group(2)), int(m.group(1)))
        m = re.fullmatch(r"(\d+)\^K", s)
        if m:
            return GrowthFunction("exponential", int(m.group(1)))
        raise ValueError(f"cannot parse growth function {text!r}")


class IteratedGrowth:
    """g^j as a growth function; used where a proof substitutes g -> g^{j}."""

    def __init__(self, base: GrowthFunction, times: int):
        if times < 1:
            raise ValueError("iteration count must be positive")
        self.base = base
        self.times = times

    def __call__(self, K: int) -> int:
        return self.base.iterate(self.times, K)

    def iterate(self, times: int, K: int) -> int:
        return self.base.iterate(self.times * times, K)

    def describe(self) -> str:
        return f"({self.base.describe()})^{self.times}"


DEFAULT_GROWTH = GrowthFunction("affine", 4, 4)


@dataclass(frozen=True)
class ThicknessParams:
    K: int
    delta: Fraction

    def __post_init__(self):
        if self.K < 0:
            raise ValueError("K must be nonnegative")
        if not (0 < self.delta <= 1):
            raise ValueError("delta must lie in (0, 1]")


# ---------------------------------------------------------------------------
# Histogram scans
# ---------------------------------------------------------------------------


def value_histogram(X: GroupMultiset, linear: Vec) -> np.ndarray:
    """Multiplicity-weighted histogram of x -> <linear, x> over F_p."""
    p = X.params.p
    pts, mults = X.arrays()
    if len(pts) == 0:
        return np.zeros(p, dtype=np.int64)
    vals = (pts @ np.asarray(linear, dtype=np.int64)) % p
    return np.bincount(vals, weights=mults, minlength=p).astype(np.int64)


def window_counts(hist: np.ndarray, K: int, p: int) -> np.ndarray:
    """counts[a0] = total histogram mass with a0 + value in [-K, K]."""
    w = min(2 * K + 1, p)
    doubled = np.concatenate([hist, hist])
    csum = np.concatenate([[0], np.cumsum(doubled)])
    starts = (-K - np.arange(p)) % p
    return csum[starts + w] - csum[starts]


def best_window(hist: np.ndarray, K: int, p: int) -> Tuple[int, int]:
    """(max in-tube count over constant terms, smallest a0 attaining it)."""
    counts = window_counts(hist, K, p)
    best = int(counts.max())
    a0 = int(np.flatnonzero(counts == best)[0])
    return best, a0


@lru_cache(maxsize=64)
def _inverse_table(p: int) -> np.ndarray:
    return np.array([pow(c, -1, p) for c in range(1, p)], dtype=np.int64)


def scaling_window_table(hist: np.ndarray, K: int, p: int) -> np.ndarray:
    """In-tube counts for every scalar multiple of a direction at once.

    The value histogram of (c * linear) is the c-permutation of the histogram
    of linear, so row c-1, column a0 holds |X ∩ H(c*linear + a0, K)|.
    Scalings matter: [-K, K] pulls back along c to an arithmetic progression,
    not an interval, so thickness along a direction says nothing about its
    multiples and an exhaustive scan must cover all of them.
    """
    w = min(2 * K + 1, p)
    idx = (_inverse_table(p)[:, None] * np.arange(p)[None, :]) % p
    scaled = hist[idx]  # scaled[c-1, v] = hist[c^{-1} v]
    doubled = np.concatenate([scaled, scaled], axis=1)
    csum = np.concatenate(
        [np.zeros((p - 1, 1), dtype=np.int64), np.cumsum(doubled, axis=1)], axis=1
    )
    starts = (-K - np.arange(p)) % p
    return csum[:, starts + w] - csum[:, starts]


def _argmax_functional(
    counts: np.ndarray, lam: Vec, p: int, zero_constant_term: bool
) -> Tuple[int, Vec, int]:
    """Largest in-tube count over (scaling, a0), with the lexicographically
    smallest scaled functional among the maximisers.

    lam is canonical (leading coefficient 1), so c*lam compares by c alone
    and the lex-min maximiser is the smallest row, then the smallest column.
    """
    if zero_constant_term:
        col = counts[:, 0]
        best = int(col.max())
        c = int(np.flatnonzero(col == best)[0]) + 1
        a0 = 0
    else:
        best = int(counts.max())
        hit_rows = np.flatnonzero((counts == best).any(axis=1))
        row = int(hit_rows[0])
        c = row + 1
        a0 = int(np.flatnonzero(counts[row] == best)[0])
    scaled = tuple((c * a) % p for a in lam)
    return best, scaled, a0


def inside_count(X: GroupMultiset, xi: LinearFunctional, K: int) -> int:
    p = X.params.p
    hist = value_histogram(X, xi.linear)
    return int(window_counts(hist, K, p)[xi.a0 % p])


def is_thick(X: GroupMultiset, xi: LinearFunctional, params: ThicknessParams):
    """(thick?, outside count): at least delta|X| mass outside H(xi, K)."""
    if xi.is_constant():
        raise ValueError("thickness along a constant functional is undefined")
    if len(X) == 0:
        raise ValueError("thickness of an empty multiset is undefined")
    outside = len(X) - inside_count(X, xi, params.K)
    return Fraction(outside) >= params.delta * len(X), outside


def _span_filter(parts: Sequence[Vec], excluded: Sequence[Vec], p: int) -> List[Vec]:
    if not excluded:
        return list(parts)
    reduced, pivots = linalg.rref(excluded, p)
    out = []
    for lam in parts:
        v = list(lam)
        for row, c in zip(reduced, pivots):
            if v[c] % p:
                f = v[c]
                v = [(x - f * y) % p for x, y in zip(v, row)]
        if any(x % p for x in v):
            out.append(lam)
    return out


def candidate_parts(
    X: GroupMultiset,
    excluded: Sequence[Vec] = (),
    hull_basis: Optional[Sequence[Vec]] = None,
    fiber_start: Optional[int] = None,
) -> List[Vec]:
    """Canonical linear parts, optionally filtered to those independent from
    `excluded`, non-constant on a hull with direction basis `hull_basis`, or
    non-constant on the fiber subspace {0}^l x F_p^{d-l} (fiber_start = l)."""
    p, d = X.params.p, X.params.d
    parts: Sequence[Vec] = canonical_linear_parts(p, d)
    if fiber_start is not None:
        parts = [lam for lam in parts if any(lam[fiber_start:])]
    if hull_basis is not None:
        parts = [lam for lam in parts if nonconstant_on_span(lam, hull_basis, p)]
    return _span_filter(parts, excluded, p)


def find_thin_functional(
    X: GroupMultiset,
    K: int,
    delta: Fraction,
    excluded: Sequence[Vec] = (),
    hull_basis: Optional[Sequence[Vec]] = None,
) -> Optional[LinearFunctional]:
    """A functional along which X fails to be (K, delta)-thick.

    Directions are enumerated once through their canonical representatives
    and expanded to all scalar multiples through histogram permutations; the
    constant term is chosen to maximise |X ∩ H(xi, K)|.  Among thin
    functionals the largest in-tube count wins, ties broken by the
    lexicographic encoding.  Returns None when X is thick along every
    admissible functional.
    """
    n = len(X)
    p = X.params.p
    best: Optional[Tuple[int, Vec, int]] = None
    for lam in candidate_parts(X, excluded=excluded, hull_basis=hull_basis):
        hist = value_histogram(X, lam)
        counts = scaling_window_table(hist, K, p)
        in_tube, scaled, a0 = _argmax_functional(counts, lam, p, False)
        outside = n - in_tube
        if Fraction(outside) < delta * n:  # thin
            key = (-in_tube, scaled, a0)
            if best is None or key < (-best[0], best[1], best[2]):
                best = (in_tube, scaled, a0)
    if best is None:
        return None
    return LinearFunctional(best[2], best[1])


def min_outside_fraction(
    X: GroupMultiset,
    K: int,
    linear_parts: Sequence[Vec],
    zero_constant_term: bool = False,
) -> Tuple[Fraction, Optional[LinearFunctional]]:
    """Worst-case thickness over a family of directions and all their scalar
    multiples.

    For each functional the binding constant term maximises the in-tube count
    (fixed to a0 = 0 when zero_constant_term is set).  Returns the minimum
    outside fraction and a functional attaining it; an empty family yields
    (1, None), i.e. vacuous thickness.
    """
    n = len(X)
    if n == 0:
        raise ValueError("empty multiset")
    worst: Optional[Tuple[Fraction, Vec, int]] = None
    p = X.params.p
    for lam in linear_parts:
        hist = value_histogram(X, lam)
        counts = scaling_window_table(hist, K, p)
        in_tube, scaled, a0 = _argmax_functional(counts, lam, p, zero_constant_term)
        frac = Fraction(n - in_tube, n)
        if worst is None or (frac, scaled, a0) < (worst[0], worst[1], worst[2]):
            worst = (frac, scaled, a0)
    if worst is None:
        return Fraction(1), None
    return worst[0], LinearFunctional(worst[2], worst[1])


def hull_thickness(X: GroupMultiset, K: int) -> Tuple[Fraction, Optional[LinearFunctional]]:
    """Worst outside-fraction at radius K over directions non-constant on the
    affine hull of X.  dim-0 hulls have no such direction: vacuously (1, None)."""
    dim, _base, basis = affine_hull(X.support(), X.params.p)
    if dim == 0:
        return Fraction(1), None
    parts = candidate_parts(X, hull_basis=basis)
    return min_outside_fraction(X, K, parts)


# ---------------------------------------------------------------------------
# Tubular certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TubularCertificate:
    """Witness that a set is (K, K', delta)-tubular: psi maps it into
    [-K, K]^l x F_p^{d-l}, and the image is (K', delta)-thick along every
    functional that is non-constant on the fiber factor."""

    params: GroupParams
    l: int
    psi: AffineIso
    K: int
    K_prime: int
    delta: Fraction
    functionals: Tuple[LinearFunctional, ...]

    def validate(self, X: GroupMultiset):
        """(ok, achieved outside-fraction, worst functional) by full rescan."""
        p = self.params.p
        img = X.apply_iso(self.psi)
        for x, _m in img.items():
            if any(not in_interval(c, self.K, p) for c in x[: self.l]):
                return False, Fraction(0), None
        if self.l == self.params.d:
            return True, Fraction(1), None
        parts = candidate_parts(img, fiber_start=self.l)
        frac, worst = min_outside_fraction(img, self.K_prime, parts)
        return frac >= self.delta, frac, worst


def tube_decompose(
    X: GroupMultiset,
    K0: int,
    delta: Fraction,
    g: GrowthFunction,
    validate: bool = True,
) -> Tuple[GroupMultiset, TubularCertificate]:
    """Single tube reduction.

    Greedily accumulates independent directions xi_i along which X is
    (g^i(K0), 2^i delta)-thin, then keeps Y = X ∩ ⋂ H(xi_i, K) with
    K = g^l(K0).  The leftover set is at most a 2^{d+1} delta fraction, and Y
    is (g(K), delta)-tubular via the coordinate change sending xi_1..xi_l to
    the first l coordinates.
    """
    params = X.params
    d, p = params.d, params.p
    delta = Fraction(delta)
    if not delta < Fraction(1, 2 ** (d + 1)):
        raise ValueError("tube reduction requires delta < 2^-(d+1)")
    if len(X) == 0:
        raise ValueError("empty multiset")

    chosen: List[LinearFunctional] = []
    for i in range(1, d + 1):
        Ki = g.iterate(i, K0)
        thin = find_thin_functional(
            X, Ki, (2 ** i) * delta, excluded=[f.linear for f in chosen]
        )
        if thin is None:
            break
        chosen.append(thin)

    l = len(chosen)
    K = g.iterate(l, K0)
    if chosen:
        fns = list(chosen)

        def keep(x: Vec) -> bool:
            return all(in_interval(f.evaluate(x, p), K, p) for f in fns)

        Y = X.restrict(keep)
    else:
        Y = X

    lower = (Fraction(1) - Fraction(2 ** (d + 1)) * delta) * len(X)
    assert Fraction(len(Y)) >= lower, "tube reduction kept too little mass"

    if l > 0:
        matrix = linalg.complete_basis([f.linear for f in chosen], p)
        shift = tuple(f.a0 % p for f in chosen) + (0,) * (d - l)
    else:
        matrix = linalg.identity(d)
        shift = (0,) * d
    psi = AffineIso(matrix, shift)
    cert = TubularCertificate(params, l, psi, K, g(K), delta, tuple(chosen))
    if validate:
        ok, frac, worst = cert.validate(Y)
        assert ok, f"tubular certificate failed its own rescan (worst {worst}, {frac})"
    return Y, cert


# ---------------------------------------------------------------------------
# Decomposition into hull-thick parts
# ---------------------------------------------------------------------------


@dataclass
class Decomposition:
    """X = X_0 ∪ X_1 ∪ ... ∪ X_m with |X_0| <= eps|X|, each part at least a
    mu-fraction of X and (g(K), delta)-thick in its affine hull, K = g^l(K0).

    delta and mu are the concrete values achieved by the run; n_cap is the a
    priori bound enforced on the iterate exponent l.
    """

    params: GroupParams
    input_size: int
    x0: GroupMultiset
    parts: Tuple[GroupMultiset, ...]
    l: int
    K: int
    K0: int
    delta: Fraction
    mu: Fraction
    epsilon: Fraction
    growth: GrowthFunction
    n_cap: int

    @property
    def m(self) -> int:
        return len(self.parts)

    def hulls(self):
        return [affine_hull(part.support(), self.params.p) for part in self.parts]

    def validate(self, X: GroupMultiset) -> List[Tuple[str, bool]]:
        checks = []
        rebuilt = self.x0
        for part in self.parts:
            rebuilt = rebuilt.union(part)
        checks.append(("partition", rebuilt == X))
        checks.append(
            ("x0_bound", Fraction(len(self.x0)) <= self.epsilon * self.input_size)
        )
        checks.append(
            (
                "part_sizes",
                all(Fraction(len(pt)) >= self.mu * self.input_size for pt in self.parts),
            )
        )
        Kp = self.growth(self.K)
        ok = True
        for part in self.parts:
            frac, _worst = hull_thickness(part, Kp)
            if frac < self.delta:
                ok = False
                break
        checks.append(("hull_thickness", ok))
        return checks


def decompose(
    X: GroupMultiset,
    K0: int,
    epsilon,
    g: GrowthFunction,
    n_cap: int = 32,
) -> Decomposition:
    """Recursive decomposition into hull-thick parts.

    Each level either certifies the current piece thick inside its hull or
    slices it along a concentrating direction into fibers over [-R, R],
    dropping undersized fibers into X_0 and recursing.  The iterate exponent
    is threaded through the recursion; parts certified at an earlier, lower
    iterate are re-checked at the final one and re-sliced if the check fails,
    with a geometrically shrinking share of the X_0 allowance so the total
    stays below eps|X|.
    """
    eps = Fraction(epsilon)
    if not (0 < eps < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    if len(X) == 0:
        raise ValueError("cannot decompose an empty multiset")
    params = X.params
    p = params.p

    exponent = 0
    parts: List[GroupMultiset] = []
    removed: List[GroupMultiset] = []

    def slicer(P: GroupMultiset, eps_lvl: Fraction):
        nonlocal exponent
        if exponent >= n_cap:
            raise DecompositionBudgetError(
                f"iterate exponent exceeded n_cap={n_cap}; growth {g.describe()}"
            )
        dim, _base, basis = affine_hull(P.support(), p)
        if dim == 0:
            parts.append(P)
            return
        K_search = g.iterate(exponent + 1, K0)
        thin = find_thin_functional(P, K_search, eps_lvl / 2, hull_basis=basis)
        if thin is None:
            parts.append(P)
            return
        exponent += 1
        entry_size = len(P)
        inside = P.restrict(lambda x: in_interval(thin.evaluate(x, p), K_search, p))
        trimmed = P.minus(inside)
        if trimmed:
            removed.append(trimmed)
        # fibers over the signed slab values, smallest label first
        fibers: Dict[int, Dict[Vec, int]] = {}
        for elem, mult in inside.items():
            y = params.signed(thin.evaluate(elem, p))
            fibers.setdefault(y, {})[elem] = mult
        R = K_search
        eps_next = eps_lvl / (8 * R)
        for y in sorted(fibers):
            fiber = GroupMultiset(params, fibers[y])
            if Fraction(len(fiber)) < eps_next * entry_size:
                removed.append(fiber)
            else:
                slicer(fiber, eps_next)

    slicer(X, eps / 2)

    # Re-verification sweeps: every part must end up thick at the final
    # iterate; failures are re-sliced on a shrinking removal allowance.
    while True:
        K = g.iterate(exponent, K0)
        Kp = g(K)
        failing = []
        for i, part in enumerate(parts):
            frac, _ = hull_thickness(part, Kp)
            if frac == 0:
                failing.append(i)
        if not failing:
            break
        total_removed = sum(len(r) for r in removed)
        allowance = eps * len(X) - total_removed
        assert allowance > 0, "internal: X_0 allowance exhausted"
        redo = [parts[i] for i in failing]
        for i in sorted(failing, reverse=True):
            del parts[i]
        for piece in redo:
            eps_local = allowance / (2 * len(redo) * len(piece))
            slicer(piece, eps_local)

    K = g.iterate(exponent, K0)
    Kp = g(K)
    delta = None
    for part in parts:
        frac, _ = hull_thickness(part, Kp)
        if frac < Fraction(1):
            delta = frac if delta is None else min(delta, frac)
    if delta is None:
        delta = Fraction(1)  # every part is a single point: vacuously thick
    mu = min(Fraction(len(part), len(X)) for part in parts)

    x0 = GroupMultiset.empty(params)
    for r in removed:
        x0 = x0.union(r)
    assert Fraction(len(x0)) <= eps * len(X), "X_0 exceeded its budget"

    return Decomposition(
        params=params,
        input_size=len(X),
        x0=x0,
        parts=tuple(parts),
        l=exponent,
        K=K,
        K0=K0,
        delta=delta,
        mu=mu,
        epsilon=eps,
        growth=g if isinstance(g, GrowthFunction) else g,  # keep as given
        n_cap=n_cap,
    )


# ---------------------------------------------------------------------------
# Strong decomposition: tubular certificates for every part union
# ---------------------------------------------------------------------------


@dataclass
class SubsetCertificate:
    subset: Tuple[int, ...]          # part indices, 0-based
    cert: TubularCertificate
    delta_schedule: Fraction         # the delta_j used for the sweep
    achieved: Fraction               # outside fraction on the final union


@dataclass
class StrongDecomposition:
    params: GroupParams
    input_size: int
    x0: GroupMultiset
    parts: Tuple[GroupMultiset, ...]
    l: int                            # exponent of g at the inner decomposition
    K: int
    delta: Fraction                   # part hull-thickness after sweeps
    delta0: Fraction                  # inner decomposition thickness
    mu0: Fraction
    mu: Fraction                      # min(part fraction, tubular thickness)
    epsilon: Fraction
    growth: GrowthFunction
    subset_certs: Dict[Tuple[int, ...], SubsetCertificate]
    removed_in_sweeps: int

    @property
    def m(self) -> int:
        return len(self.parts)

    def union(self, subset: Sequence[int]) -> GroupMultiset:
        out = GroupMultiset.empty(self.params)
        for i in subset:
            out = out.union(self.parts[i])
        return out

    def validate(self, X: GroupMultiset) -> List[Tuple[str, bool]]:
        checks = []
        rebuilt = self.x0
        for part in self.parts:
            rebuilt = rebuilt.union(part)
        checks.append(("partition", rebuilt == X))
        checks.append(("x0_bound", Fraction(len(self.x0)) <= self.epsilon * self.input_size))
        gp = IteratedGrowth(self.growth, self.params.d + 1)
        ok = True
        for part in self.parts:
            frac, _ = hull_thickness(part, gp(self.K))
            if frac < self.delta:
                ok = False
        checks.append(("part_thickness", ok))
        ok = True
        for subset, sc in self.subset_certs.items():
            valid, _frac, _worst = sc.cert.validate(self.union(subset))
            if not valid:
                ok = False
        checks.append(("tubular_certs", ok))
        return checks


def strong_decompose(
    X: GroupMultiset,
    K0: int,
    epsilon,
    g: GrowthFunction,
    m_budget: int = 12,
    n_cap: int = 32,
) -> StrongDecomposition:
    """Decomposition plus a tubular certificate for every nonempty part union.

    Runs the basic decomposition with g^{d+1} and eps/2, then sweeps the
    2^m - 1 unions with tube reductions on the schedule
    delta_j = eps mu0 delta0 2^{-d-2-m} 2^{-(d+m+4) j}; the schedule shrinks
    fast enough that total removals stay below eps|X|/2, every part keeps
    half its thickness, and each union stays tubular at half its sweep delta.
    All three facts are asserted on exact integers, not assumed.
    """
    eps = Fraction(epsilon)
    params = X.params
    d = params.d
    gp = IteratedGrowth(g, d + 1)
    dec = decompose(X, K0, eps / 2, gp, n_cap=n_cap)
    m = dec.m
    if m > m_budget:
        raise SubsetSweepBudgetError(
            f"decomposition produced m={m} parts; subset sweep budget is {m_budget}",
            m,
            m_budget,
        )
    K = dec.K
    l_in_g = dec.l * (d + 1)
    delta0, mu0 = dec.delta, dec.mu

    parts = list(dec.parts)
    owner: Dict[Vec, int] = {}
    for i, part in enumerate(parts):
        for elem, _mult in part.items():
            owner[elem] = i

    sweeps: Dict[Tuple[int, ...], Tuple[TubularCertificate, Fraction]] = {}
    removed_total = 0
    removed_sets: List[GroupMultiset] = []

    for j, mask in enumerate(range(1, 2 ** m), start=1):
        subset = tuple(i for i in range(m) if (mask >> i) & 1)
        delta_j = (
            eps
            * mu0
            * delta0
            * Fraction(1, 2 ** (d + 2 + m))
            * Fraction(1, 2 ** ((d + m + 4) * j))
        )
        X_S = GroupMultiset.empty(params)
        for i in subset:
            X_S = X_S.union(parts[i])
        Y, cert = tube_decompose(X_S, K, delta_j, g, validate=False)
        dropped = X_S.minus(Y)
        if dropped:
            removed_total += len(dropped)
            removed_sets.append(dropped)
            for elem, mult in dropped.items():
                i = owner[elem]
                parts[i] = parts[i].minus(
                    GroupMultiset(params, {elem: mult})
                )
        sweeps[subset] = (cert, delta_j)

    # bullet 1: sweep removals stay below eps|X|/2
    assert Fraction(removed_total) < eps * len(X) / 2, "sweep removals exceeded eps|X|/2"

    # bullet 2: parts keep half their hull thickness at g^{d+1}(K)
    part_delta = None
    for part in parts:
        assert len(part) > 0, "a part was emptied by the sweeps"
        frac, worst = hull_thickness(part, gp(K))
        assert frac >= delta0 / 2, f"part lost thickness (worst {worst}: {frac})"
        if frac < Fraction(1):
            part_delta = frac if part_delta is None else min(part_delta, frac)
    if part_delta is None:
        part_delta = Fraction(1)

    # bullet 3: every final union is tubular at half its sweep delta
    subset_certs: Dict[Tuple[int, ...], SubsetCertificate] = {}
    tubular_min: Optional[Fraction] = None
    for subset, (cert, delta_j) in sweeps.items():
        X_S = GroupMultiset.empty(params)
        for i in subset:
            X_S = X_S.union(parts[i])
        final_cert = TubularCertificate(
            params, cert.l, cert.psi, cert.K, cert.K_prime, delta_j / 2, cert.functionals
        )
        ok, frac, worst = final_cert.validate(X_S)
        assert ok, f"union {subset} lost tubularity (worst {worst}: {frac})"
        subset_certs[subset] = SubsetCertificate(subset, final_cert, delta_j, frac)
        if cert.l < d:
            tubular_min = frac if tubular_min is None else min(tubular_min, frac)

    size_mu = min(Fraction(len(part), len(X)) for part in parts)
    mu = size_mu if tubular_min is None else min(size_mu, tubular_min)

    x0 = dec.x0
    for r in removed_sets:
        x0 = x0.union(r)
    assert Fraction(len(x0)) <= eps * len(X), "strong decomposition X_0 over budget"

    return StrongDecomposition(
        params=params,
        input_size=len(X),
        x0=x0,
        parts=tuple(parts),
        l=l_in_g,
        K=K,
        delta=part_delta,
        delta0=delta0,
        mu0=mu0,
        mu=mu,
        epsilon=eps,
        growth=g,
        subset_certs=subset_certs,
        removed_in_sweeps=removed_total,
    )
