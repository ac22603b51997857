"""One test per acceptance criterion, each recording a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v``; the lines are repeated in the
terminal summary.  A criterion that cannot hold as written is left red.
"""

from __future__ import annotations

import time

from kondratiev.calculus import DomainSpec, SpaceParams
from kondratiev.norms import Membership, QuadSpec, membership_detect, shell_series
from kondratiev.testfuncs import CutoffPsi, RhoPower, multiply
from kondratiev.verify import run_suite


def _suite_line(rep) -> str:
    s = rep.summary
    return f"{rep.suite}: {s['passed']}/{s['total']} cases, {rep.runtime:.1f} s"


def test_criterion_1_homogeneity(record_criterion):
    rep = run_suite("homogeneity")
    ok = rep.passed and rep.summary["total"] == 96 and rep.runtime < 60
    worst = max(c["observed"]["rel_error"] for c in rep.cases)
    record_criterion(1, ok, f"{_suite_line(rep)}, worst rel error {worst:.2e}")
    assert ok


def test_criterion_2_membership_oracle(record_criterion):
    rep = run_suite("oracle")
    sampled = [c for c in rep.cases if not c["input"]["boundary"]]
    boundary = [c for c in rep.cases if c["input"]["boundary"]]
    agree = sum(c["pass"] for c in sampled)
    ok = rep.passed and len(sampled) == 50 and agree >= 48 and all(c["pass"] for c in boundary) and rep.runtime < 300
    record_criterion(2, ok, f"{agree}/{len(sampled)} sampled agree, {len(boundary)} boundary Borderline, {rep.runtime:.1f} s")
    assert ok


def test_criterion_3_closed_form(record_criterion):
    rep = run_suite("closed-form")
    ok = rep.passed and rep.summary["total"] == 10
    worst = max(c["observed"]["rel_error"] for c in rep.cases)
    record_criterion(3, ok, f"{_suite_line(rep)}, worst rel error {worst:.2e}")
    assert ok


def test_criterion_4_extremal_equivalence(record_criterion):
    rep = run_suite("equivalent-norm")
    ok = rep.passed
    worst = max(c["observed"]["ratio"] for c in rep.cases)
    record_criterion(4, ok, f"{_suite_line(rep)}, max full/extremal ratio {worst:.4f}")
    assert ok


def test_criterion_5_partition(record_criterion):
    rep = run_suite("partition")
    checks = {c["input"]["check"] for c in rep.cases}
    ok = rep.passed and {"sum_to_one", "support", "self_similarity", "derivative", "localization"} <= checks
    ok = ok and all(c["input"]["points"] == 10_000 for c in rep.cases if c["input"]["check"] == "sum_to_one")
    record_criterion(5, ok, _suite_line(rep))
    assert ok


def test_criterion_6_algebra_sharpness(record_criterion):
    # literal statement: d=3, p=2, m=2 on R^3 minus the origin, u = rho^b * psi
    dom = DomainSpec.model(3, 0)
    quad = QuadSpec(j_max=36, target_rel_error=1e-4)
    observed = {}
    for a, b in ((1.4, -0.08), (1.6, 0.05)):
        sp = SpaceParams(2, str(a), 2)
        u = multiply(RhoPower(b), CutoffPsi())
        uu = multiply(u, u)
        observed[(a, b)] = (
            membership_detect(u, sp, dom, quad),
            membership_detect(uu, sp, dom, quad),
            shell_series(u, sp, dom, quad).tail_slope,
            shell_series(uu, sp, dom, quad).tail_slope,
        )
    u1, uu1, s1, ss1 = observed[(1.4, -0.08)]
    u2, uu2, s2, ss2 = observed[(1.6, 0.05)]
    ok = (u1, uu1) == (Membership.CONVERGENT, Membership.DIVERGENT) and (u2, uu2) == (Membership.CONVERGENT,) * 2
    detail = (
        f"a=1.4,b=-0.08: u {u1.value} (slope {s1:+.3f}), u^2 {uu1.value} (slope {ss1:+.3f}); "
        f"a=1.6,b=0.05: u {u2.value} (slope {s2:+.3f}), u^2 {uu2.value} (slope {ss2:+.3f})"
    )
    record_criterion(6, ok, detail)
    assert ok, detail


def test_criterion_7_decision_consistency(record_criterion):
    t0 = time.perf_counter()
    rep = run_suite("decision-consistency")
    elapsed = time.perf_counter() - t0
    tuples = sum(c["input"]["tuples"] for c in rep.cases)
    ok = rep.passed and tuples >= 10_000 and elapsed < 10
    record_criterion(7, ok, f"{tuples} tuples, {elapsed:.1f} s")
    assert ok


def test_criterion_8_noncompact_witness(record_criterion):
    rep = run_suite("noncompact-witness")
    spreads = [c["observed"]["spread"] for c in rep.cases if c["input"]["check"] == "normalized_spread"]
    ok = rep.passed and all(c["input"]["j"] == "1..20" for c in rep.cases if c["input"]["check"] == "normalized_spread")
    record_criterion(8, ok, f"{_suite_line(rep)}, max/min normalized norm ratio {max(spreads):.4f}")
    assert ok


def test_criterion_9_product_uniformity(record_criterion):
    rep = run_suite("product-bounds")
    valid = [c for c in rep.cases if c["input"]["valid"]]
    invalid = [c for c in rep.cases if not c["input"]["valid"]]
    rules = {c["input"]["rule"] for c in rep.cases}
    ok = rep.passed and len(rules) == 3 and len(valid) == 9 and len(invalid) == 3
    worst_valid = max(c["observed"]["slope"] for c in valid)
    least_invalid = min(c["observed"]["slope"] for c in invalid)
    record_criterion(9, ok, f"{_suite_line(rep)}, valid slope <= {worst_valid:+.2e}, invalid slope >= {least_invalid:+.3f}")
    assert ok
