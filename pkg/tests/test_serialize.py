import json
import random
from fractions import Fraction

from zerosum import serialize
from zerosum.expansion import ExpansionParams, expansion_cover
from zerosum.generators import fiber_union, random_cloud
from zerosum.group import GroupParams
from zerosum.multiset import GroupMultiset
from zerosum.subsums import find_zero_sum_subset
from zerosum.thickness import GrowthFunction, decompose, strong_decompose, tube_decompose

G1 = GrowthFunction("affine", 1, 1)


def roundtrip(obj):
    return json.loads(serialize.dumps(obj))


def test_instance_roundtrip():
    X = random_cloud(GroupParams(13, 2), 25, seed=1)
    back = serialize.instance_from_json(roundtrip(serialize.instance_to_json(X)))
    assert back == X


def test_instance_accepts_bare_element_lists():
    obj = {"p": 5, "d": 1, "entries": [[1], [2], [2]]}
    X = serialize.instance_from_json(obj)
    assert X.multiplicity((2,)) == 2


def test_certificate_roundtrip():
    params = GroupParams(7, 1)
    X = GroupMultiset.from_points(params, [(1,), (2,), (4,)])
    cert = find_zero_sum_subset(X)
    payload = roundtrip(serialize.certificate_to_json(X, cert))
    X2, cert2 = serialize.certificate_from_json(payload)
    assert X2 == X and cert2.subset == cert.subset


def test_tubular_roundtrip_and_revalidation():
    params = GroupParams(11, 2)
    slab = GroupMultiset.from_points(
        params, [((a) % 11, b) for a in (-1, 0, 1) for b in range(11)]
    )
    Y, cert = tube_decompose(slab, 0, Fraction(1, 16), G1)
    payload = roundtrip(serialize.tubular_to_json(Y, cert))
    Y2, cert2 = serialize.tubular_from_json(payload)
    assert Y2 == Y and cert2.psi == cert.psi and cert2.delta == cert.delta
    ok, _, _ = cert2.validate(Y2)
    assert ok


def test_decomposition_roundtrip():
    X = fiber_union(GroupParams(31, 2), 2, seed=0)
    dec = decompose(X, 0, Fraction(1, 2), G1)
    payload = roundtrip(serialize.decomposition_to_json(X, dec))
    X2, dec2 = serialize.decomposition_from_json(payload)
    assert X2 == X
    assert dec2.parts == dec.parts and dec2.delta == dec.delta
    assert all(ok for _, ok in dec2.validate(X2))


def test_strong_decomposition_roundtrip():
    X = fiber_union(GroupParams(31, 2), 3, seed=0, offset=1)
    sdec = strong_decompose(X, 0, Fraction(1, 4), G1)
    payload = roundtrip(serialize.strong_decomposition_to_json(X, sdec))
    X2, sdec2 = serialize.strong_decomposition_from_json(payload)
    assert X2 == X and set(sdec2.subset_certs) == set(sdec.subset_certs)
    assert all(ok for _, ok in sdec2.validate(X2))


def test_cover_roundtrip_recheck_offline():
    params = GroupParams(11, 1)
    X = GroupMultiset.from_points(params, [(i,) for i in range(11)])
    cover = expansion_cover({(): X}, 0, ExpansionParams(seed=1))
    payload = roundtrip(serialize.cover_to_json(cover))
    cover2 = serialize.cover_from_json(payload)
    assert cover2.k == cover.k and cover2.pairs == cover.pairs
    assert cover2.verify_all_targets()


def test_fraction_strings():
    assert serialize.frac_str(Fraction(3, 12)) == "1/4"
    assert serialize.parse_frac("7/2") == Fraction(7, 2)


def test_verify_payload_dispatch():
    from zerosum.verify import verify_payload

    X = fiber_union(GroupParams(31, 2), 3, seed=0, offset=1)
    sdec = strong_decompose(X, 0, Fraction(1, 4), G1)
    payload = roundtrip(serialize.strong_decomposition_to_json(X, sdec))
    assert all(ok for _name, ok in verify_payload(payload))
