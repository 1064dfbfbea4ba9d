"""
Subset sums, zero-sum witnesses, and Olson constants
====================================================

The ground-truth layer: every later construction is checked against these
exact oracles.
"""

from zerosum import GroupParams, enumerate_subsums, find_zero_sum_subset, olson_constant
from zerosum.multiset import GroupMultiset
from zerosum.subsums import naive_max_zero_sum_free, naive_subsums

# The set of nonempty subset sums of A = {1, 2} inside F_5.  Three nonempty
# subsets, three sums: {1, 2, 3}.  Zero is missing, so A is zero-sum-free.
p5 = GroupParams(5, 1)
A = GroupMultiset.from_points(p5, [(1,), (2,)])
table = enumerate_subsums(A)
print("subset sums of {1,2} in F_5:", sorted(v[0] for v in table.reachable_values()))
print("zero attainable?", table.contains((0,)))

# The same table is built incrementally: new = old | (old + x) | {x}.  On a
# multidimensional grid the shift (old + x) is a cyclic roll per coordinate.
p33 = GroupParams(3, 2)
B = GroupMultiset.from_points(p33, [(1, 0), (0, 1), (2, 2)])
table = enumerate_subsums(B)
print("\n|Sigma*({(1,0),(0,1),(2,2)})| =", table.reachable_count(), "of", p33.order)
cert = find_zero_sum_subset(B)
print("zero-sum witness:", dict(cert.subset.items()))
assert cert.verify(B)

# Witness extraction walks a first-reached-round table backwards, so the
# returned subset respects multiplicities: two copies of 3 sum to 6 in F_7.
p7 = GroupParams(7, 1)
double = GroupMultiset(p7, {(3,): 2})
w = enumerate_subsums(double).witness((6,))
print("\nwitness for 6 from {3, 3} in F_7:", dict(w.items()))

# The Olson constant OL(G) is the least t such that every t-subset of G has
# a nonempty zero-sum subset; equivalently one more than the largest
# zero-sum-free set.  Exhaustive enumeration (the oracle) and the pruned
# branch-and-bound must agree.
for p in (3, 5, 7):
    params = GroupParams(p, 1)
    naive = naive_max_zero_sum_free(params)
    res = olson_constant(params)
    print(f"\nOL(F_{p}) = {res.olson} (naive oracle: {naive.size + 1})")
    print("  largest zero-sum-free set:", [v[0] for v in res.witness])
    assert res.olson == naive.size + 1

# Dimension two: OL(F_3^2) comes out of the same machinery.  The witness is a
# zero-sum-free set of size OL - 1; check it against the subsum oracle.
p32 = GroupParams(3, 2)
res = olson_constant(p32)
print(f"\nOL(F_3^2) = {res.olson}, witness {list(res.witness)}")
free = GroupMultiset.from_points(p32, res.witness)
assert find_zero_sum_subset(free) is None
print("witness re-checked: no nonempty subset sums to zero")
print("bound check: OL <= d(p-1)+1 =", p32.d * (p32.p - 1) + 1)
