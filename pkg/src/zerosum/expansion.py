"""Sumset expansion machinery.

Fibers are multisets X_y indexed by small integer label vectors y (the bounded
coordinates of a tube).  Differences that kill the bounded coordinates come
from two sources:

* integer relations lambda on the labels with sum(lambda) = 0 and
  sum(lambda_y * y) = 0: picking |lambda_y| elements from each fiber on the
  positive/negative side makes sigma = sum(J1) - sum(J2) vanish on the first
  l coordinates;
* pairs inside a single fiber, whose difference vanishes there trivially.
  (With l = 0 there is a single fiber and this source *is* the difference
  multiset X - X.)

The cover construction grows a reachable set by repeatedly adjoining the pair
whose difference maximises |(Y + sigma) \\ Y|, exactly the expansion growth
step; past the half-space mark each remaining target is finished by an
exhaustive search for a pair landing on it.  All pairs are disjoint, drawn
from per-fiber free lists, so the final object selects, for every target u,
sub-multisets S_y with a fixed total cardinality and prescribed sum.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .group import GroupParams, LinearFunctional, Vec, canonical_linear_parts
from .multiset import GroupMultiset
from .thickness import min_outside_fraction


class ExpansionStagnation(RuntimeError):
    """Cover construction stopped before full coverage."""

    def __init__(self, reason: str, covered: int, total: int, pairs: int):
        super().__init__(
            f"expansion stagnated ({reason}): covered {covered}/{total} after {pairs} pairs"
        )
        self.reason = reason
        self.covered = covered
        self.total = total
        self.pairs = pairs


# ---------------------------------------------------------------------------
# Relations among fiber labels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RelationVector:
    """Integer vector lambda on fiber labels with sum(lambda) = 0 and
    sum(lambda_y * y) = 0 over the integers (hence mod p)."""

    entries: Tuple[Tuple[Vec, int], ...]  # (label, coefficient), nonzero only

    def __post_init__(self):
        if not self.entries:
            raise ValueError("relation must be nonzero")
        labels = [lab for lab, _c in self.entries]
        if labels != sorted(labels):
            raise ValueError("relation entries must be sorted by label")
        if sum(c for _lab, c in self.entries) != 0:
            raise ValueError("relation coefficients must sum to zero")
        l = len(labels[0])
        for k in range(l):
            if sum(c * lab[k] for lab, c in self.entries) != 0:
                raise ValueError("relation does not annihilate the labels")

    def norm_inf(self) -> int:
        return max(abs(c) for _lab, c in self.entries)

    def positive(self):
        return [(lab, c) for lab, c in self.entries if c > 0]

    def negative(self):
        return [(lab, -c) for lab, c in self.entries if c < 0]


def enumerate_relations(
    labels: Sequence[Vec],
    T: int,
    combo_cap: int = 2_000_000,
    support_cap: int = 4,
) -> List[RelationVector]:
    """Usable relations with infinity norm at most T.

    When the kernel lattice of the (l+1) x |Y| label matrix is small enough,
    bounded integer combinations of a kernel basis are enumerated directly;
    independently, relations of support <= support_cap are found by brute
    force over label subsets, which also catches small vectors the cleared-
    denominator basis can miss.  Results are deduplicated and sorted.
    """
    labels = sorted(labels)
    ny = len(labels)
    if ny == 0:
        return []
    l = len(labels[0])
    found: Dict[Tuple[Tuple[Vec, int], ...], RelationVector] = {}

    def register(vec: Dict[Vec, int]):
        entries = tuple(sorted((lab, c) for lab, c in vec.items() if c != 0))
        if not entries:
            return
        if max(abs(c) for _lab, c in entries) > T:
            return
        if entries in found:
            return
        try:
            found[entries] = RelationVector(entries)
        except ValueError:
            pass

    matrix = [[lab[k] for lab in labels] for k in range(l)]
    matrix.append([1] * ny)
    basis = linalg.integer_kernel_basis(matrix)
    rank = len(basis)
    if rank and (2 * T + 1) ** rank <= combo_cap:
        for combo in product(range(-T, T + 1), repeat=rank):
            if all(c == 0 for c in combo):
                continue
            vec = [0] * ny
            for c, b in zip(combo, basis):
                if c:
                    for i, x in enumerate(b):
                        vec[i] += c * x
            register({labels[i]: vec[i] for i in range(ny)})

    for size in range(3, min(support_cap, ny) + 1):
        n_subsets = 1
        for k in range(size):
            n_subsets = n_subsets * (ny - k) // (k + 1)
        if n_subsets * (2 * T + 1) ** size > combo_cap:
            break
        for subset in combinations(range(ny), size):
            subs = [labels[i] for i in subset]
            for coeffs in product(range(-T, T + 1), repeat=size):
                if 0 in coeffs:
                    continue
                if sum(coeffs) != 0:
                    continue
                if any(
                    sum(c * lab[k] for c, lab in zip(coeffs, subs)) != 0
                    for k in range(l)
                ):
                    continue
                register(dict(zip(subs, coeffs)))

    return [found[key] for key in sorted(found)]


# ---------------------------------------------------------------------------
# Difference multisets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DifferenceEntry:
    sigma: Vec                      # full-length vector, first l coords zero
    j1: Tuple[Vec, ...]
    j2: Tuple[Vec, ...]
    source: str                     # "relation" | "fiber-pair"
    relation: Optional[RelationVector] = None


@dataclass
class DifferenceMultiset:
    params: GroupParams
    l: int
    entries: Tuple[DifferenceEntry, ...]
    diagnostic: Optional[str] = None

    def sigma_multiset(self) -> GroupMultiset:
        return GroupMultiset.from_points(self.params, (e.sigma for e in self.entries))

    def validate(self) -> bool:
        p = self.params.p
        for e in self.entries:
            acc = [0] * self.params.d
            for x in e.j1:
                acc = [a + c for a, c in zip(acc, x)]
            for x in e.j2:
                acc = [a - c for a, c in zip(acc, x)]
            sigma = tuple(a % p for a in acc)
            if sigma != e.sigma:
                return False
            if any(sigma[: self.l]):
                return False
        return True


def _fiber_slots(fiber: GroupMultiset) -> List[Vec]:
    return list(fiber.iter_with_multiplicity())


def _sample_distinct(slots: List[Vec], k: int, rng: random.Random) -> List[Vec]:
    pool = list(slots)
    n = len(pool)
    out = []
    for i in range(k):
        j = rng.randrange(i, n)
        pool[i], pool[j] = pool[j], pool[i]
        out.append(pool[i])
    return out


def _check_fiber_geometry(fibers: Dict[Vec, GroupMultiset], l: int, p: int):
    """Each fiber constant on the first l coordinates, offsets matching labels."""
    base_label = None
    base_coords = None
    for label in sorted(fibers):
        fib = fibers[label]
        if len(fib) == 0:
            raise ValueError(f"fiber {label} is empty")
        first = None
        for x, _m in fib.items():
            head = x[:l]
            if first is None:
                first = head
            elif head != first:
                raise ValueError(f"fiber {label} spans several label slabs")
        if base_label is None:
            base_label, base_coords = label, first
        else:
            expect = tuple(
                (bc + (lab - bl)) % p
                for bc, lab, bl in zip(base_coords, label, base_label)
            )
            if first != expect:
                raise ValueError(
                    f"fiber {label} offset does not match its label (got {first})"
                )


def _sigma(j1: Iterable[Vec], j2: Iterable[Vec], params: GroupParams) -> Vec:
    acc = [0] * params.d
    for x in j1:
        for k, c in enumerate(x):
            acc[k] += c
    for x in j2:
        for k, c in enumerate(x):
            acc[k] -= c
    return tuple(a % params.p for a in acc)


def build_difference_multiset(
    fibers: Dict[Vec, GroupMultiset],
    l: int,
    T: int = 2,
    sample_budget: int = 64,
    rng: Optional[random.Random] = None,
    include_fiber_pairs: bool = False,
) -> DifferenceMultiset:
    """Multiset of sigma = sum(J1) - sum(J2) values landing in {0} x F_p^{d-l}.

    Relations are enumerated up to infinity norm T; each feasible relation is
    sampled up to sample_budget times (full enumeration of the selections is
    exponential).  Every produced entry carries its (relation, J1, J2)
    provenance and is re-checkable.  With no usable relation the result is
    empty and carries a diagnostic; a single fiber can never produce one,
    since the coefficients must sum to zero.
    """
    if rng is None:
        rng = random.Random(0)
    if not fibers:
        raise ValueError("need at least one fiber")
    params = next(iter(fibers.values())).params
    p = params.p
    _check_fiber_geometry(fibers, l, p)

    entries: List[DifferenceEntry] = []

    labels = sorted(fibers)
    relations = enumerate_relations(labels, T) if l > 0 else []
    usable = []
    for rel in relations:
        if all(len(fibers[lab]) >= c for lab, c in rel.positive()) and all(
            len(fibers[lab]) >= c for lab, c in rel.negative()
        ):
            usable.append(rel)

    for rel in usable:
        for _ in range(sample_budget):
            j1: List[Vec] = []
            j2: List[Vec] = []
            for lab, c in rel.positive():
                j1.extend(_sample_distinct(_fiber_slots(fibers[lab]), c, rng))
            for lab, c in rel.negative():
                j2.extend(_sample_distinct(_fiber_slots(fibers[lab]), c, rng))
            sigma = _sigma(j1, j2, params)
            assert not any(sigma[:l]), "relation difference left the fiber factor"
            entries.append(
                DifferenceEntry(sigma, tuple(sorted(j1)), tuple(sorted(j2)), "relation", rel)
            )

    if include_fiber_pairs:
        for label in labels:
            support = sorted(fibers[label].support())
            for a in support:
                for b in support:
                    if a == b:
                        continue
                    entries.append(
                        DifferenceEntry(params.sub(a, b), (a,), (b,), "fiber-pair", None)
                    )

    diagnostic = None
    if not entries:
        if l == 0:
            diagnostic = "single fiber with fewer than two distinct elements"
        elif not relations:
            diagnostic = (
                "no nonzero relation exists among the fiber labels "
                f"(|Y|={len(labels)}, l={l})"
            )
        elif not usable:
            diagnostic = "relations exist but every one exceeds some fiber size"
        else:
            diagnostic = "no differences produced"
    return DifferenceMultiset(params, l, tuple(entries), diagnostic)


@dataclass
class ThicknessReport:
    passed: bool
    size: int
    worst_fraction: Optional[Fraction]
    worst_functional: Optional[LinearFunctional]

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "size": self.size,
            "worst_fraction": (
                str(self.worst_fraction) if self.worst_fraction is not None else None
            ),
            "worst_functional": (
                {
                    "a0": self.worst_functional.a0,
                    "linear": list(self.worst_functional.linear),
                }
                if self.worst_functional is not None
                else None
            ),
        }


def verify_fiber_thickness(
    A: DifferenceMultiset, k_prime: int, delta_prime: Fraction
) -> ThicknessReport:
    """Empirical thickness of the difference multiset on the fiber factor.

    Scans every canonical functional with zero constant term on
    {0} x F_p^{d-l} and reports the worst outside-fraction against the
    (k_prime, delta_prime) claim.
    """
    if not A.entries:
        return ThicknessReport(False, 0, None, None)
    params = A.params
    D = params.d - A.l
    if D == 0:
        return ThicknessReport(True, len(A.entries), Fraction(1), None)
    sub = GroupParams(params.p, D)
    projected = GroupMultiset.from_points(sub, (e.sigma[A.l :] for e in A.entries))
    parts = canonical_linear_parts(params.p, D)
    frac, worst = min_outside_fraction(projected, k_prime, parts, zero_constant_term=True)
    if worst is not None:
        worst = LinearFunctional(0, (0,) * A.l + worst.linear)
    return ThicknessReport(frac >= delta_prime, len(projected), frac, worst)


# ---------------------------------------------------------------------------
# The growth step and the cover
# ---------------------------------------------------------------------------


def alon_dubiner_step(
    A: GroupMultiset,
    ycur: Iterable[Vec],
    K: Optional[int] = None,
    delta: Optional[Fraction] = None,
) -> Tuple[Vec, int]:
    """Element of A maximising |(Y + a) \\ Y|, ties broken lexicographically.

    K and delta are the thickness parameters under which the growth bound
    max(|Y|^{(d-1)/d} / 2, K delta |Y| / (c0 p)) is guaranteed; they do not
    influence the exhaustive maximisation and are accepted only to document
    call sites.
    """
    if len(A) == 0:
        raise ValueError("empty difference multiset")
    params = A.params
    p, d = params.p, params.d
    yset = set(tuple(v) for v in ycur)
    if not yset:
        raise ValueError("Y must be nonempty")
    if 2 * len(yset) > params.order:
        raise ValueError("growth step requires |Y| <= p^d / 2")
    shape = (p,) * d
    Y = np.zeros(shape, dtype=bool)
    for v in yset:
        Y[v] = True
    axes = tuple(range(d))
    best: Optional[Tuple[int, Vec]] = None
    for a in sorted(A.support()):
        shifted = np.roll(Y, shift=a, axis=axes)
        growth = int((shifted & ~Y).sum())
        if best is None or growth > best[0]:
            best = (growth, a)
    assert best is not None
    return best[1], best[0]


@dataclass(frozen=True)
class CoverPair:
    j1: Tuple[Vec, ...]
    j2: Tuple[Vec, ...]
    sigma: Vec
    source: str
    relation: Optional[RelationVector] = None


class ExpansionCover:
    """Disjoint pair family whose branch choices hit every coset target.

    For every u in F_p^{d-l} some choice of J1 or J2 per pair sums to
    (u0, u), always with the same total cardinality k.  first_step backs the
    per-target backtracking; coverage stores one choice bitmask per target
    state so a stored cover can be re-checked offline.
    """

    def __init__(
        self,
        params: GroupParams,
        l: int,
        fibers: Dict[Vec, GroupMultiset],
        pairs: Tuple[CoverPair, ...],
        base: Vec,
        k: int,
        first_step: Tuple[int, ...],
        coverage: Tuple[int, ...] = (),
    ):
        self.params = params
        self.l = l
        self.fibers = dict(fibers)
        self.pairs = tuple(pairs)
        self.base = tuple(base)
        self.u0 = self.base[:l]
        self.k = k
        self.first_step = tuple(first_step)
        self.coverage = tuple(coverage)
        self._label_of: Dict[Vec, Vec] = {}
        for label in sorted(self.fibers):
            for x, _m in self.fibers[label].items():
                self._label_of[x] = label

    @property
    def fiber_dim(self) -> int:
        return self.params.d - self.l

    def _sub(self) -> GroupParams:
        return GroupParams(self.params.p, self.fiber_dim)

    def choices_for(self, u: Vec) -> int:
        """Choice bitmask reaching projected target u (bit i set = take J1)."""
        D = self.fiber_dim
        if D == 0:
            return 0
        if len(u) != D:
            raise ValueError(f"target must have {D} coordinates")
        p = self.params.p
        sub = self._sub()
        cur = sub.reduce(tuple((c - b) % p for c, b in zip(u, self.base[self.l :])))
        zero = sub.zero()
        mask = 0
        while cur != zero:
            t = self.first_step[sub.index(cur)]
            if t <= 0:
                raise KeyError(f"target {u} is not covered")
            mask |= 1 << (t - 1)
            sigma_proj = self.pairs[t - 1].sigma[self.l :]
            cur = sub.sub(cur, sigma_proj)
        return mask

    def select(self, u: Vec) -> Dict[Vec, List[Vec]]:
        """Per-fiber selections S_y with sum (u0, u) and total size k."""
        D = self.fiber_dim
        if D == 0:
            return {label: [] for label in self.fibers}
        if self.coverage:
            sub = self._sub()
            mask = self.coverage[sub.index(sub.reduce(u))]
        else:
            mask = self.choices_for(u)
        out: Dict[Vec, List[Vec]] = {label: [] for label in self.fibers}
        for i, pair in enumerate(self.pairs):
            branch = pair.j1 if (mask >> i) & 1 else pair.j2
            for x in branch:
                out[self._label_of[x]].append(x)
        return out

    def verify_target(self, u: Vec) -> bool:
        params = self.params
        sel = self.select(u)
        total = [0] * params.d
        count = 0
        for label, elems in sel.items():
            chosen = GroupMultiset.from_points(params, elems) if elems else None
            if chosen is not None and not self.fibers[label].contains_submultiset(chosen):
                return False
            count += len(elems)
            for x in elems:
                for kk, c in enumerate(x):
                    total[kk] += c
        if count != self.k:
            return False
        want = tuple(self.u0) + tuple(c % params.p for c in u)
        return tuple(t % params.p for t in total) == want

    def verify_all_targets(self) -> bool:
        D = self.fiber_dim
        if D == 0:
            return self.k == 0 and not self.pairs
        sub = self._sub()
        return all(self.verify_target(sub.unindex(i)) for i in range(sub.order))


class _FreePool:
    def __init__(self, fibers: Dict[Vec, GroupMultiset]):
        self.slots: Dict[Vec, List[Vec]] = {
            label: sorted(fibers[label].iter_with_multiplicity())
            for label in sorted(fibers)
        }

    def count(self, label: Vec) -> int:
        return len(self.slots[label])

    def consume(self, label: Vec, elems: Iterable[Vec]):
        for x in elems:
            self.slots[label].remove(x)


@dataclass
class ExpansionParams:
    T: int = 2
    sample_budget: int = 64
    per_step_samples: int = 8
    seed: int = 0
    combo_cap: int = 2_000_000


def expansion_cover(
    fibers: Dict[Vec, GroupMultiset],
    l: int,
    params: Optional[ExpansionParams] = None,
    rng: Optional[random.Random] = None,
) -> ExpansionCover:
    """Cover of a full coset {u0} x F_p^{d-l} by disjoint pair selections.

    Raises ExpansionStagnation when no available pair grows the reachable set
    (or, past the half-space mark, none lands on the next uncovered target).
    With l = d the target coset is a single point and the empty cover (k = 0)
    is returned.
    """
    if params is None:
        params = ExpansionParams()
    if rng is None:
        rng = random.Random(params.seed)
    if not fibers:
        raise ValueError("need at least one fiber")
    gparams = next(iter(fibers.values())).params
    p, d = gparams.p, gparams.d
    D = d - l
    _check_fiber_geometry(fibers, l, p)

    if D == 0:
        return ExpansionCover(gparams, l, fibers, (), (0,) * d, 0, ())

    label_of: Dict[Vec, Vec] = {}
    for label in sorted(fibers):
        for x, _m in fibers[label].items():
            label_of[x] = label

    labels = sorted(fibers)
    relations = enumerate_relations(labels, params.T, params.combo_cap) if l > 0 else []
    pool = _FreePool(fibers)

    shape = (p,) * D
    Y = np.zeros(shape, dtype=bool)
    zero_state = (0,) * D
    Y[zero_state] = True
    first_step = np.full(shape, -1, dtype=np.int64)
    first_step[zero_state] = 0
    axes = tuple(range(D))
    total_states = p ** D

    pairs: List[CoverPair] = []
    hard_cap = 2 * total_states + 16

    def available_candidates() -> Dict[Vec, Tuple]:
        cands: Dict[Vec, Tuple] = {}

        def offer(sigma_full, j1, j2, source, rel):
            j1s, j2s = tuple(sorted(j1)), tuple(sorted(j2))
            held = cands.get(sigma_full)
            # cheapest realization first: pairs eat free elements, and a
            # wasteful one can starve the later completion steps
            if held is None or (len(held[0]) + len(held[1]), held[0], held[1]) > (
                len(j1s) + len(j2s), j1s, j2s,
            ):
                cands[sigma_full] = (j1s, j2s, source, rel)

        for label in labels:
            support = sorted(set(pool.slots[label]))
            for a in support:
                for b in support:
                    if a != b:
                        offer(gparams.sub(a, b), (a,), (b,), "fiber-pair", None)
        for rel in relations:
            ok = all(pool.count(lab) >= c for lab, c in rel.positive()) and all(
                pool.count(lab) >= c for lab, c in rel.negative()
            )
            if not ok:
                continue
            for _ in range(params.per_step_samples):
                j1: List[Vec] = []
                j2: List[Vec] = []
                for lab, c in rel.positive():
                    j1.extend(_sample_distinct(pool.slots[lab], c, rng))
                for lab, c in rel.negative():
                    j2.extend(_sample_distinct(pool.slots[lab], c, rng))
                offer(_sigma(j1, j2, gparams), j1, j2, "relation", rel)
        return cands

    while not Y.all():
        covered = int(Y.sum())
        cands = available_candidates()
        if not cands:
            raise ExpansionStagnation("no available pairs", covered, total_states, len(pairs))
        chosen = None  # (growth, -cost, sigma, realization); maximize growth,
        # then prefer the pair consuming the fewest elements
        if 2 * covered <= total_states:
            for sigma in sorted(cands):
                sp = sigma[l:]
                shifted = np.roll(Y, shift=sp, axis=axes)
                growth = int((shifted & ~Y).sum())
                cost = len(cands[sigma][0]) + len(cands[sigma][1])
                if chosen is None or (growth, -cost) > (chosen[0], chosen[1]):
                    chosen = (growth, -cost, sigma, cands[sigma])
            if chosen is None or chosen[0] < 1:
                raise ExpansionStagnation("no growth", covered, total_states, len(pairs))
        else:
            target = tuple(int(c) for c in np.argwhere(~Y)[0])
            for sigma in sorted(cands):
                sp = sigma[l:]
                back = tuple((t - s) % p for t, s in zip(target, sp))
                if not Y[back]:
                    continue
                shifted = np.roll(Y, shift=sp, axis=axes)
                growth = int((shifted & ~Y).sum())
                cost = len(cands[sigma][0]) + len(cands[sigma][1])
                if chosen is None or (growth, -cost) > (chosen[0], chosen[1]):
                    chosen = (growth, -cost, sigma, cands[sigma])
            if chosen is None:
                raise ExpansionStagnation(
                    "completion blocked", covered, total_states, len(pairs)
                )
        _growth, _negcost, sigma, (j1, j2, source, rel) = chosen
        by_label: Dict[Vec, List[Vec]] = {}
        for x in j1 + j2:
            by_label.setdefault(label_of[x], []).append(x)
        for lab, elems in by_label.items():
            pool.consume(lab, elems)
        t = len(pairs) + 1
        shifted = np.roll(Y, shift=sigma[l:], axis=axes)
        new = shifted & ~Y
        first_step[new] = t
        Y |= new
        pairs.append(CoverPair(j1, j2, sigma, source, rel))
        if len(pairs) > hard_cap:
            raise ExpansionStagnation("pair cap", int(Y.sum()), total_states, len(pairs))

    base = [0] * d
    k = 0
    for pair in pairs:
        s1 = _sigma(pair.j1, (), gparams)
        s2 = _sigma(pair.j2, (), gparams)
        assert s1[:l] == s2[:l], "pair branches disagree on the bounded coordinates"
        assert len(pair.j1) == len(pair.j2)
        for kk in range(d):
            base[kk] += s2[kk]
        k += len(pair.j1)
    base = tuple(a % p for a in base)

    cover = ExpansionCover(
        gparams, l, fibers, tuple(pairs), base, k,
        tuple(int(x) for x in first_step.reshape(-1)),
    )
    sub = GroupParams(p, D)
    cover.coverage = tuple(cover.choices_for(sub.unindex(i)) for i in range(sub.order))
    return cover


def expansion_cover_with_escalation(
    fibers: Dict[Vec, GroupMultiset],
    l: int,
    seed: int = 0,
    escalations: int = 3,
) -> Tuple[ExpansionCover, int]:
    """Try the cover on an escalating (T, sampling) ladder.

    Returns (cover, attempts used).  Re-raises the last ExpansionStagnation
    if every rung fails.
    """
    ladder = [
        ExpansionParams(T=2, sample_budget=64, per_step_samples=8, seed=seed),
        ExpansionParams(T=4, sample_budget=128, per_step_samples=16, seed=seed + 1),
        ExpansionParams(T=4, sample_budget=256, per_step_samples=32, seed=seed + 2),
        ExpansionParams(T=6, sample_budget=256, per_step_samples=32, seed=seed + 3),
    ]
    last: Optional[ExpansionStagnation] = None
    for attempt, eparams in enumerate(ladder[: max(1, escalations + 1)], start=1):
        try:
            return expansion_cover(fibers, l, eparams), attempt
        except ExpansionStagnation as exc:
            last = exc
    assert last is not None
    raise last
