"""Re-verification of stored artifacts.

Every check recomputes from the raw serialized data; nothing trusts recorded
"holds" flags.  Results come back as (check name, passed) pairs so callers
can print one line per invariant.
"""

from __future__ import annotations

from typing import List, Tuple

from . import serialize
from .group import GroupParams
from .multiset import GroupMultiset
from .pipeline import StageFailure, verify_certificate
from .subsums import ZeroSumCertificate

Checks = List[Tuple[str, bool]]


def verify_payload(obj: dict) -> Checks:
    kind = obj.get("kind")
    if kind == "instance":
        X = serialize.instance_from_json(obj)
        return [("parses", True), ("nonempty", len(X) > 0)]
    if kind == "zero_sum_certificate":
        X, cert = serialize.certificate_from_json(obj)
        return [
            ("subset_nonempty", len(cert.subset) > 0),
            ("subset_contained", X.contains_submultiset(cert.subset)),
            ("sum_vanishes", cert.subset.total() == X.params.zero()),
        ]
    if kind == "tubular_certificate":
        X, cert = serialize.tubular_from_json(obj)
        ok, frac, _worst = cert.validate(X)
        return [
            ("box_containment_and_thickness", ok),
            ("achieved_at_least_delta", frac >= cert.delta),
        ]
    if kind == "decomposition":
        X, dec = serialize.decomposition_from_json(obj)
        return dec.validate(X)
    if kind == "strong_decomposition":
        X, sdec = serialize.strong_decomposition_from_json(obj)
        return sdec.validate(X)
    if kind == "expansion_cover":
        cover = serialize.cover_from_json(obj)
        checks: Checks = []
        ok_sigma = True
        ok_disjoint = True
        used: dict = {}
        p = cover.params.p
        for pair in cover.pairs:
            acc = [0] * cover.params.d
            for x in pair.j1:
                for k, c in enumerate(x):
                    acc[k] += c
            for x in pair.j2:
                for k, c in enumerate(x):
                    acc[k] -= c
            if tuple(a % p for a in acc) != pair.sigma:
                ok_sigma = False
            if any(pair.sigma[: cover.l]):
                ok_sigma = False
            for x in pair.j1 + pair.j2:
                used[x] = used.get(x, 0) + 1
        pool = GroupMultiset.empty(cover.params)
        for fib in cover.fibers.values():
            pool = pool.union(fib)
        for x, count in used.items():
            if pool.multiplicity(x) < count:
                ok_disjoint = False
        checks.append(("sigma_provenance", ok_sigma))
        checks.append(("pairs_disjoint", ok_disjoint))
        checks.append(("covers_all_targets", cover.verify_all_targets()))
        return checks
    if kind == "pipeline_trace":
        return verify_trace(obj)
    raise ValueError(f"unknown artifact kind {kind!r}")


def verify_trace(obj: dict) -> Checks:
    X = serialize.instance_from_json(obj["instance"])
    trace = obj["trace"]
    checks: Checks = []
    result = trace.get("result", {})
    for stage in trace.get("stages", []):
        for ident in stage.get("identities", []):
            checks.append(
                (
                    f"{stage['stage']}:{ident['name']}",
                    ident["lhs"] == ident["rhs"],
                )
            )
        if stage.get("outcome") == "failure":
            ineq = stage["inequality"]
            sf = StageFailure(
                stage["stage"], ineq["name"], ineq["lhs"], ineq["op"], ineq["rhs"], ""
            )
            checks.append((f"{stage['stage']}:failure_re_violates", not sf.holds()))
    if result.get("status") == "certificate":
        subset = GroupMultiset(
            X.params,
            {X.params.reduce(e): m for e, m in (tuple(item) for item in result["subset"])},
        )
        cert = ZeroSumCertificate(X.params, subset)
        checks.append(("certificate", verify_certificate(X, cert)))
    return checks
