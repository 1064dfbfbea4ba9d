"""
Difference multisets and expansion covers
=========================================

To hit a prescribed sum inside a tube we build pairs (J1, J2) of disjoint
selections whose difference vanishes on the bounded coordinates, then let
the reachable set double: each pair contributes either branch, and the pair
whose difference maximises |(Y + sigma) \\ Y| is adjoined until the whole
coset is covered.  Past the half-space mark one extra pair per remaining
target finishes the job.
"""

import random
from fractions import Fraction

from zerosum import GroupParams, alon_dubiner_step, build_difference_multiset, verify_fiber_thickness
from zerosum.expansion import ExpansionParams, enumerate_relations, expansion_cover
from zerosum.multiset import GroupMultiset

# Integer relations on fiber labels: coefficients summing to zero that also
# kill the labels.  Three collinear labels admit the classic (1, -2, 1).
rels = enumerate_relations([(-1,), (0,), (1,)], T=2)
for rel in rels:
    print("relation:", dict(rel.entries))

# Sampling selections for a relation produces differences sigma that vanish
# on the first coordinate; together with same-fiber pairs they form the
# difference multiset A.
params = GroupParams(13, 2)
rng = random.Random(5)
fibers = {
    (lab,): GroupMultiset.from_points(
        params, [(lab % 13, v) for v in rng.sample(range(13), 6)]
    )
    for lab in (-1, 0, 1)
}
A = build_difference_multiset(fibers, l=1, T=2, sample_budget=16,
                              rng=random.Random(0), include_fiber_pairs=True)
print("\n|A| =", len(A.entries), "entries; provenance recomputes:", A.validate())
report = verify_fiber_thickness(A, k_prime=2, delta_prime=Fraction(1, 8))
print("empirical fiber thickness:", report.passed, "worst fraction", report.worst_fraction)

# One growth step: the exhaustive maximiser of |(Y + a) \ Y| over A.
sigma_support = A.sigma_multiset()
a, growth = alon_dubiner_step(sigma_support, [(0, 0)])
print("\nfirst growth step: shift", a, "grows Y by", growth)

# The full cover: disjoint pairs whose branch choices reach every target
# (u0, u).  Selections always have the same total cardinality k.
cover = expansion_cover(fibers, l=1, params=ExpansionParams(seed=3))
print("\ncover built:", len(cover.pairs), "pairs | k =", cover.k, "| u0 =", cover.u0)
print("covers all", 13, "targets:", cover.verify_all_targets())

sel = cover.select((4,))
print("selection for target u = 4:")
for label in sorted(sel):
    if sel[label]:
        print("  fiber", label, "->", sel[label])

# The l = 0 case degenerates to the single multiset X with A = X - X.
params11 = GroupParams(11, 1)
X = GroupMultiset.from_points(params11, [(i,) for i in range(11)])
cover0 = expansion_cover({(): X}, l=0, params=ExpansionParams(seed=1))
print("\nl = 0 over F_11:", len(cover0.pairs), "pairs, k =", cover0.k,
      "| all targets verify:", cover0.verify_all_targets())
