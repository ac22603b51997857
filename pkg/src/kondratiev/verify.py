"""Verification suites: each one checks a family of concrete cases against
exact decisions or closed forms and returns a structured report.

Empirical constants (ratios whose existence is known but whose value is not)
were measured once on the frozen families below and are asserted with a
factor-two headroom; see ``FROZEN``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable

import numpy as np

from .calculus import (
    INF,
    DomainKind,
    DomainSpec,
    Outcome,
    SpaceParams,
    embed_compact,
    embed_continuous,
    member_constant,
    member_rho_power,
    power_target,
    product_target,
)
from .errors import InvalidParams, KondratievError, MixedIntegrability, SuiteUnknown
from .geometry import (
    CriticalUnion,
    PartitionSpec,
    active_indices,
    contains,
    decompose_polyhedral_cone,
    distance,
    edge_directions,
    partition_band,
    partition_jet,
    partition_sum,
    start_shell,
    weights,
)
from .norms import (
    DELTA,
    Membership,
    QuadSpec,
    classify,
    critical_union_region,
    kondratiev_norm,
    membership_detect,
    polyhedral_region,
    shell_series,
)
from .testfuncs import (
    Ball,
    Bump,
    Constant,
    CutoffPsi,
    Localizer,
    RhoPower,
    Scale,
    Sum,
    TestFunction,
    dilate,
    multiply,
    translate,
)

# Measured maxima (or minima) over the frozen families, then widened by 2x.
# Ratio bounds that are >= 1 widen upward, lower bounds widen downward.
FROZEN: dict[str, float] = {
    "equivalent_norm_ratio": 2 * 1.0275,
    "partition_derivative_1": 2 * 11.54,
    "partition_derivative_2": 2 * 332.2,
    "partition_derivative_3": 2 * 21680.0,
    "localization_lower": 0.5 * 1.805,
    "localization_upper": 2 * 4.170,
    "moser": 2 * 0.677,
    "multiplier": 2 * 0.854,
    "multiplier_extra_derivatives": 2 * 0.00379,
    "decomposition_lower": 0.5 * 0.9445,
    "decomposition_upper": 2 * 3.188,
}

# product uniformity: slope bounds per dyadic dilation step
SLOPE_VALID = 0.01
SLOPE_INVALID = 0.1
HOMOGENEITY_TOL = 1e-6
CLOSED_FORM_TOL = 1e-6
PARTITION_SUM_TOL = 1e-12
ORACLE_MIN_AGREEMENT = 48


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Enum):
        return x.value
    return x


@dataclass
class SuiteReport:
    suite: str
    cases: list[dict]
    summary: dict
    runtime: float

    @property
    def passed(self) -> bool:
        return bool(self.summary["pass"])

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "cases": self.cases,
            "summary": self.summary,
            "runtime": self.runtime,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "input", "expected", "observed", "pass", "error"])
        for c in self.cases:
            w.writerow([
                self.suite,
                json.dumps(c["input"], sort_keys=True),
                json.dumps(c["expected"], sort_keys=True),
                json.dumps(c["observed"], sort_keys=True),
                c["pass"],
                c.get("error", ""),
            ])
        return buf.getvalue()


@dataclass
class Case:
    """One check: ``observe`` produces the observation, ``judge`` compares."""

    input: dict
    expected: Any
    observe: Callable[[], Any]
    judge: Callable[[Any, Any], bool]


@dataclass
class Suite:
    id: str
    build: Callable[[dict], list[Case]]
    # summary rule over the finished case list; default: every case passes
    verdict: Callable[[list[dict]], bool] | None = None
    description: str = ""


def _run_case(case: Case) -> dict:
    out = {"input": _jsonable(case.input), "expected": _jsonable(case.expected)}
    try:
        observed = case.observe()
    except (KondratievError, ArithmeticError) as exc:
        out.update(observed=None, error=f"{type(exc).__name__}: {exc}")
        out["pass"] = False
        return out
    out["observed"] = _jsonable(observed)
    out["pass"] = bool(case.judge(case.expected, observed))
    return out


_CFG_KEYS = {"seed": 0, "quick": False, "workers": 1}


def _config(cfg: dict | None) -> dict:
    cfg = dict(cfg or {})
    unknown = set(cfg) - set(_CFG_KEYS)
    if unknown:
        raise InvalidParams(f"unknown verify config keys {sorted(unknown)}", field=sorted(unknown)[0])
    full = dict(_CFG_KEYS)
    full.update(cfg)
    if int(full["workers"]) < 1:
        raise InvalidParams("workers must be >= 1", field="workers")
    return full


def run_suite(suite_id: str, cfg: dict | None = None) -> SuiteReport:
    """Run one registered suite; cases are evaluated concurrently, reported sorted."""
    if suite_id not in SUITES:
        raise SuiteUnknown(suite_id)
    cfg = _config(cfg)
    suite = SUITES[suite_id]
    t0 = time.perf_counter()
    cases = suite.build(cfg)
    workers = int(cfg["workers"])
    if workers == 1:
        results = [_run_case(c) for c in cases]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_case, cases))
    results.sort(key=lambda r: json.dumps(r["input"], sort_keys=True))
    npass = sum(r["pass"] for r in results)
    nerr = sum("error" in r for r in results)
    ok = suite.verdict(results) if suite.verdict else npass == len(results)
    summary = {
        "total": len(results),
        "passed": npass,
        "failed": len(results) - npass,
        "errors": nerr,
        "pass": bool(ok),
    }
    return SuiteReport(suite_id, results, summary, time.perf_counter() - t0)


def run_all(cfg: dict | None = None) -> list[SuiteReport]:
    return [run_suite(s, cfg) for s in SUITES]


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def _dom_key(dom: DomainSpec) -> dict:
    return _jsonable(dom.to_dict())


def _rel(obs: float, exp: float) -> float:
    return abs(obs / exp - 1.0)


def _slope(xs, ys) -> float:
    return float(np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)[0])


def _label(slope: float, p) -> str:
    """What the tail-slope detector must answer for an exact geometric slope."""
    if p == INF:
        return Membership.CONVERGENT.value if slope < DELTA else Membership.DIVERGENT.value
    if slope <= -DELTA:
        return Membership.CONVERGENT.value
    if slope >= DELTA:
        return Membership.DIVERGENT.value
    return Membership.BORDERLINE.value


def _detector_quad() -> QuadSpec:
    return QuadSpec(radial_panels=1, angular_order=6, gauss_order=8, j_max=36, target_rel_error=1e-4)


# ---------------------------------------------------------------------------
# homogeneity: N(lam) = lam^(a - d/p) N(1) for u(lam x)
# ---------------------------------------------------------------------------

_HOMOG_U = RhoPower(-0.3) * Bump(0.25, (0.75,))
_HOMOG_QUAD = QuadSpec(radial_panels=4, angular_order=16, target_rel_error=1e-4)


@lru_cache(maxsize=None)
def _homog_norm(d: int, l: int, p: int, m: int, lam: int):
    # For p = 1 the integrand |d^alpha u| has kinks, so refinement moves the value
    # by ~1e-3; the rule is exactly scale covariant, which is what is tested here,
    # and the estimate is reported alongside.
    sp = SpaceParams(m, Fraction(1, 2), p)
    return kondratiev_norm(dilate(_HOMOG_U, lam), sp, DomainSpec.model(d, l), _HOMOG_QUAD, check=False)


def _homogeneity(cfg: dict) -> list[Case]:
    lams = (2, 16) if cfg["quick"] else (2, 4, 8, 16)
    ms = (0, 2) if cfg["quick"] else (0, 1, 2)
    a = 0.5
    cases = []
    for d in (2, 3):
        for l in (0, 1):
            for p in (1, 2):
                for m in ms:
                    for lam in lams:
                        def observe(d=d, l=l, p=p, m=m, lam=lam):
                            n1 = _homog_norm(d, l, p, m, 1)
                            nl = _homog_norm(d, l, p, m, lam)
                            pred = lam ** (a - d / p) * n1.value
                            return {"N_lam": nl.value, "predicted": pred, "rel_error": _rel(nl.value, pred),
                                    "est_rel_error": nl.est_rel_error}

                        cases.append(Case(
                            {"d": d, "l": l, "p": p, "m": m, "a": "1/2", "lam": lam},
                            {"rel_error_below": HOMOGENEITY_TOL},
                            observe,
                            lambda e, o: o["rel_error"] < e["rel_error_below"],
                        ))
    return cases


# ---------------------------------------------------------------------------
# closed form: ||1||^p on a circular cone of opening gamma in R^3
# ---------------------------------------------------------------------------

CLOSED_FORM_CASES = (
    (Fraction(0), 1, 4), (Fraction(1), 1, 4), (Fraction(2), 1, 6), (Fraction(-1), 1, 3),
    (Fraction(0), 2, 4), (Fraction(1, 2), 2, 6), (Fraction(1), 2, 3), (Fraction(1, 2), 3, 4),
    (Fraction(2, 3), 3, 6), (Fraction(-1, 2), 2, 4),
)  # (a, p, k) with gamma = pi / k


def _closed_form(cfg: dict) -> list[Case]:
    cases = []
    for a, p, k in CLOSED_FORM_CASES:
        gamma = math.pi / k
        expected = 2 * math.pi * (1 - math.cos(gamma)) / (3 - float(a) * p)

        def observe(a=a, p=p, gamma=gamma, expected=expected):
            res = kondratiev_norm(Constant(1.0), SpaceParams(0, a, p), DomainSpec.smooth_cone(3, gamma))
            val = res.value**p
            return {"norm_p": val, "rel_error": _rel(val, expected), "est_rel_error": res.est_rel_error}

        cases.append(Case(
            {"a": str(a), "p": p, "gamma": f"pi/{k}", "d": 3},
            {"norm_p": expected, "tolerance": CLOSED_FORM_TOL},
            observe,
            lambda e, o: o["rel_error"] < e["tolerance"],
        ))
    return cases


# ---------------------------------------------------------------------------
# membership oracle
# ---------------------------------------------------------------------------

def _oracle_tuple(rng: np.random.Generator, boundary: bool = False):
    family = str(rng.choice(["rho_model", "const_cone", "rho_cone"]))
    p = int(rng.choice([1, 2, 3]))
    m = int(rng.choice([0, 1]))
    gap = Fraction(0) if boundary else Fraction(int(rng.integers(2, 13)), 20) * int(rng.choice([-1, 1]))
    if family == "rho_model":
        d = int(rng.choice([2, 3]))
        l = int(rng.choice([0, 1]))
        dom = DomainSpec.model(d, l)
        b = Fraction(int(rng.integers(-16, 17)), 20)
    else:
        dom = [DomainSpec.smooth_cone(3), DomainSpec.nonsmooth_cone(3),
               DomainSpec.dihedral_cube(3, 1), DomainSpec.dihedral_cube(3, 2)][int(rng.integers(0, 4))]
        b = Fraction(0) if family == "const_cone" else Fraction(int(rng.integers(1, 17)), 20)
    kappa = Fraction(dom.d - dom.split) if dom.kind is not DomainKind.NONSMOOTH_CONE else Fraction(dom.d - 1)
    # a - b - kappa/p = gap: negative gap means a member
    a = b + kappa / p + gap
    return family, dom, b, SpaceParams(m, a, p), gap


def _oracle_case(family, dom, b, sp, gap) -> Case:
    if family == "const_cone":
        verdict = member_constant(sp, dom)
        tf: TestFunction = Constant(1.0)
    else:
        verdict = member_rho_power(b, sp, dom)
        tf = RhoPower(float(b)) * CutoffPsi() if family == "rho_model" else RhoPower(float(b))
    if gap == 0:
        expected = Membership.BORDERLINE.value
    else:
        expected = Membership.CONVERGENT.value if verdict.outcome is Outcome.HOLDS else Membership.DIVERGENT.value
    return Case(
        {"family": family, "domain": _dom_key(dom), "b": str(b), "space": sp.to_dict(),
         "boundary": gap == 0},
        {"detector": expected, "rule": verdict.rule, "calculus": verdict.outcome.value},
        lambda tf=tf, sp=sp, dom=dom: membership_detect(tf, sp, dom, _detector_quad()).value,
        lambda e, o: o == e["detector"],
    )


def _oracle(cfg: dict) -> list[Case]:
    rng = np.random.default_rng(cfg["seed"])
    n = 10 if cfg["quick"] else 50
    cases = [_oracle_case(*_oracle_tuple(rng)) for _ in range(n)]
    cases += [_oracle_case(*_oracle_tuple(rng, boundary=True)) for _ in range(2 if cfg["quick"] else 5)]
    return cases


def _oracle_verdict(results: list[dict]) -> bool:
    sampled = [r for r in results if not r["input"]["boundary"]]
    boundary = [r for r in results if r["input"]["boundary"]]
    need = math.ceil(len(sampled) * ORACLE_MIN_AGREEMENT / 50)
    return sum(r["pass"] for r in sampled) >= need and all(r["pass"] for r in boundary)


# ---------------------------------------------------------------------------
# extremal norm equivalence
# ---------------------------------------------------------------------------

_EQUIV_U = RhoPower(0.25) * CutoffPsi()
_EQUIV_SP = SpaceParams(2, 1, 2)
_EQUIV_QUAD = QuadSpec(j_max=30)


def _equiv_domains() -> list[DomainSpec]:
    return [DomainSpec.model(3, 0), DomainSpec.model(3, 1), DomainSpec.smooth_cone(3),
            DomainSpec.nonsmooth_cone(3), DomainSpec.dihedral_cube(3, 1)]


def _equivalent_norm(cfg: dict) -> list[Case]:
    ks = (0, 5, 10) if cfg["quick"] else range(11)
    cases = []
    for dom in _equiv_domains():
        for k in ks:
            def observe(dom=dom, k=k):
                f = dilate(_EQUIV_U, 2**k)
                full = shell_series(f, _EQUIV_SP, dom, _EQUIV_QUAD)
                ext = shell_series(f, _EQUIV_SP, dom, _EQUIV_QUAD, extremal=True)
                per_shell = all(e <= g for e, g in zip(ext.s, full.s))
                return {
                    "full": full.total ** 0.5,
                    "extremal": ext.total ** 0.5,
                    "ratio": (full.total / ext.total) ** 0.5,
                    "extremal_le_full": per_shell and ext.total <= full.total,
                    "converged": full.converged and ext.converged,
                }

            cases.append(Case(
                {"domain": _dom_key(dom), "k": k, "func": f"dilate(2^{k}, {_EQUIV_U.expr()})",
                 "space": _EQUIV_SP.to_dict()},
                {"ratio_max": FROZEN["equivalent_norm_ratio"], "extremal_le_full": True},
                observe,
                lambda e, o: o["converged"] and o["extremal_le_full"] and o["ratio"] <= e["ratio_max"],
            ))
    return cases


# ---------------------------------------------------------------------------
# partition of unity
# ---------------------------------------------------------------------------

def _partition_domains() -> list[DomainSpec]:
    return [DomainSpec.model(2, 0), DomainSpec.model(3, 0), DomainSpec.model(3, 1),
            DomainSpec.smooth_cone(3), DomainSpec.nonsmooth_cone(3), DomainSpec.dihedral_cube(3, 1),
            DomainSpec.polyhedral_cone([(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)])]


def sample_domain(dom: DomainSpec, n: int, seed: int = 0, depth: int = 20) -> np.ndarray:
    """Points of D spread over every dyadic scale: uniform draws pulled toward M by 2^-k."""
    rng = np.random.default_rng(seed)
    half = 1.5 if dom.kind is DomainKind.MODEL else 1.0
    out, have = [], 0
    while have < n:
        x = rng.uniform(-half, half, size=(4 * n, dom.d))
        x = x[contains(dom, x)]
        if dom.kind is DomainKind.MODEL and dom.split:
            # pull only x' toward the singular plane
            x[:, : dom.d - dom.split] *= 2.0 ** -rng.integers(0, depth, size=(len(x), 1))
        else:
            x *= 2.0 ** -rng.integers(0, depth, size=(len(x), 1))
        x = x[contains(dom, x) & (distance(dom, x) > 0)]
        out.append(x)
        have += len(x)
    return np.concatenate(out)[:n]


def _sum_to_one(dom, pts):
    return float(np.max(np.abs(partition_sum(dom, pts) - 1.0)))


def _support_violations(dom, pts) -> int:
    spec = PartitionSpec.for_domain(dom)
    dist = distance(dom, pts)
    lo, hi = active_indices(dom, pts)
    bad = 0
    for j in range(max(0, lo - 2), hi + 3):
        val = partition_jet(spec, dom, j, pts, 0).value
        blo, bhi = partition_band(j)
        if j < start_shell(dom):
            bad += int(np.count_nonzero(val))
            continue
        bad += int(np.count_nonzero((val != 0) & ~((dist > blo) & (dist < bhi))))
    return bad


def _self_similar_mismatches(dom, pts, jmax: int) -> int:
    spec = PartitionSpec.for_domain(dom)
    bad = 0
    for j in range(1, jmax + 1):
        scaled = pts.copy()
        scaled[:, : dom.d - dom.split] *= 2.0 ** (j - 1)
        keep = distance(dom, scaled) < 1.0
        if not keep.any():
            continue
        a = partition_jet(spec, dom, j, pts[keep], 0).value
        b = partition_jet(spec, dom, 1, scaled[keep], 0).value
        bad += int(np.count_nonzero(a != b))
    return bad


def _derivative_bound(dom, pts, order: int) -> float:
    spec = PartitionSpec.for_domain(dom)
    rho = weights(dom, pts)
    lo, hi = active_indices(dom, pts)
    worst = 0.0
    for j in range(lo, hi + 1):
        jet = partition_jet(spec, dom, j, pts, order)
        der = jet.derivatives()
        rows = np.flatnonzero(jet.space.degree == order)
        worst = max(worst, float(np.max(np.abs(der[rows]) * rho[None, :] ** order)))
    return worst


_LOC_SP = SpaceParams(1, 1, 2)
_LOC_QUAD = QuadSpec(j_max=30)


def _localization_family() -> list[TestFunction]:
    base = RhoPower(0.5) * CutoffPsi()
    return [base, dilate(base, 8), CutoffPsi(), Bump(0.5, (0.75,))]


def _localization_ratio(u: TestFunction, dom: DomainSpec) -> dict:
    whole = shell_series(u, _LOC_SP, dom, _LOC_QUAD).total
    pieces = 0.0
    for j in range(start_shell(dom), _LOC_QUAD.j_max + 1):
        pieces += shell_series(multiply(Localizer(j, dom), u), _LOC_SP, dom, _LOC_QUAD).total
    return {"whole": whole, "pieces": pieces, "ratio": pieces / whole}


def _partition(cfg: dict) -> list[Case]:
    n = 2000 if cfg["quick"] else 10_000
    cases: list[Case] = []
    doms = _partition_domains()
    for idx, dom in enumerate(doms):
        seed = cfg["seed"] + idx
        key = _dom_key(dom)
        cases.append(Case(
            {"check": "sum_to_one", "domain": key, "points": n},
            {"max_deviation_below": PARTITION_SUM_TOL},
            lambda dom=dom, seed=seed: _sum_to_one(dom, sample_domain(dom, n, seed)),
            lambda e, o: o < e["max_deviation_below"],
        ))
        cases.append(Case(
            {"check": "support", "domain": key, "points": n},
            {"violations": 0},
            lambda dom=dom, seed=seed: _support_violations(dom, sample_domain(dom, n, seed)),
            lambda e, o: o == e["violations"],
        ))
        for order in (1, 2, 3):
            cases.append(Case(
                {"check": "derivative", "order": order, "domain": key, "points": n // 5},
                {"bound": FROZEN[f"partition_derivative_{order}"]},
                lambda dom=dom, seed=seed, order=order: _derivative_bound(dom, sample_domain(dom, n // 5, seed), order),
                lambda e, o: o <= e["bound"],
            ))
    for dom in (DomainSpec.model(2, 0), DomainSpec.model(3, 0), DomainSpec.model(3, 1)):
        cases.append(Case(
            {"check": "self_similarity", "domain": _dom_key(dom), "points": n, "j_max": 12},
            {"mismatches": 0},
            lambda dom=dom: _self_similar_mismatches(dom, sample_domain(dom, n, cfg["seed"]), 12),
            lambda e, o: o == e["mismatches"],
        ))
    fam = _localization_family()[:2] if cfg["quick"] else _localization_family()
    for u in fam:
        dom = DomainSpec.model(3, 0)
        cases.append(Case(
            {"check": "localization", "domain": _dom_key(dom), "func": u.expr(), "space": _LOC_SP.to_dict()},
            {"lower": FROZEN["localization_lower"], "upper": FROZEN["localization_upper"]},
            lambda u=u, dom=dom: _localization_ratio(u, dom),
            lambda e, o: e["lower"] <= o["ratio"] <= e["upper"],
        ))
    return cases


# ---------------------------------------------------------------------------
# product uniformity under dilation
# ---------------------------------------------------------------------------

_PRODUCT_QUAD = QuadSpec(radial_panels=1, angular_order=4, gauss_order=10, j_max=30, target_rel_error=1e-4)
_PRODUCT_DOM = DomainSpec.model(3, 0)
PRODUCT_EST_MAX = 1e-2
PRODUCT_RULES = {
    # rule -> (m, p) of the factors
    "Thm-5.1": (2, 2),
    "Thm-5.5": (1, 2),
    "Thm-5.8": (1, 2),
}


def _product_target(rule: str, sp: SpaceParams) -> SpaceParams:
    res = product_target(sp, sp, _PRODUCT_DOM)
    for e in res.applicable:
        if e.rule == rule:
            if e.open_bound:
                # the weight bound is exclusive; step inside it
                return SpaceParams(e.target.m, e.target.a - Fraction(1, 20), e.target.p)
            return e.target
    raise InvalidParams(f"rule {rule} does not apply to {sp}", field="rule")


def _product_slope(sp: SpaceParams, tgt: SpaceParams, steps: int) -> dict:
    b = float(sp.a) - 1.2  # a - b = 1.2 < d/p keeps the factor in the space
    u = RhoPower(b) * Bump(1.0)
    uu = multiply(u, u)
    logs, ratios, est = [], [], 0.0
    for k in range(steps + 1):
        lam = 2.0**k
        # fractional p puts kinks in |d^alpha(uu)|^p; the rule maps onto itself under
        # dilation by 2, so its error is the same at every lambda and cancels in the slope
        nu = kondratiev_norm(dilate(u, lam), sp, _PRODUCT_DOM, _PRODUCT_QUAD, check=False)
        nuv = kondratiev_norm(dilate(uu, lam), tgt, _PRODUCT_DOM, _PRODUCT_QUAD, check=False)
        est = max(est, nu.est_rel_error, nuv.est_rel_error)
        r = nuv.value / (nu.value * nu.value)
        ratios.append(r)
        logs.append(math.log2(r))
    return {"slope": _slope(range(steps + 1), logs), "ratios": ratios, "est_rel_error_max": est}


def _judge_product_valid(e: dict, o: dict) -> bool:
    return o["slope"] <= e["slope_max"] and o["est_rel_error_max"] <= e["est_rel_error_max"]


def _judge_product_invalid(e: dict, o: dict) -> bool:
    return o["slope"] >= e["slope_min"] and o["est_rel_error_max"] <= e["est_rel_error_max"]


def _product_bounds(cfg: dict) -> list[Case]:
    steps = 4 if cfg["quick"] else 10
    cases = []
    for rule, (m, p) in PRODUCT_RULES.items():
        for a, valid in ((Fraction(0), True), (Fraction(1, 2), True), (Fraction(1), True), (Fraction(1, 2), False)):
            sp = SpaceParams(m, a, p)
            tgt = _product_target(rule, sp)
            if not valid:
                tgt = SpaceParams(tgt.m, tgt.a + Fraction(1, 4), tgt.p)
            expected = {"slope_max": SLOPE_VALID} if valid else {"slope_min": SLOPE_INVALID}
            expected["est_rel_error_max"] = PRODUCT_EST_MAX
            cases.append(Case(
                {"rule": rule, "factor": sp.to_dict(), "target": tgt.to_dict(), "valid": valid,
                 "dilations": f"2^0..2^{steps}"},
                expected,
                lambda sp=sp, tgt=tgt: _product_slope(sp, tgt, steps),
                _judge_product_valid if valid else _judge_product_invalid,
            ))
    return cases


# ---------------------------------------------------------------------------
# Moser-type estimate and multipliers
# ---------------------------------------------------------------------------

_MOSER_SP = SpaceParams(2, 1, 2)
_SUP = SpaceParams(0, 0, INF)


def _bounded_family() -> list[TestFunction]:
    g = RhoPower(0.25) * CutoffPsi()
    b = Bump(0.5, (0.75,))
    return [CutoffPsi(), g, b, dilate(g, 8), dilate(b, 4)]


_CONST_QUAD = QuadSpec(target_rel_error=1e-4)


@lru_cache(maxsize=None)
def _norm_cached(tf: TestFunction, sp: SpaceParams, dom: DomainSpec) -> float:
    return kondratiev_norm(tf, sp, dom, _CONST_QUAD).value


def _moser(cfg: dict) -> list[Case]:
    fam = _bounded_family()[:3] if cfg["quick"] else _bounded_family()
    dom = DomainSpec.model(3, 0)
    cases = []
    for i in range(len(fam)):
        for j in range(i, len(fam)):
            u, v = fam[i], fam[j]

            def observe(u=u, v=v):
                nuv = _norm_cached(multiply(u, v), _MOSER_SP, dom)
                nu, nv = _norm_cached(u, _MOSER_SP, dom), _norm_cached(v, _MOSER_SP, dom)
                su, sv = _norm_cached(u, _SUP, dom), _norm_cached(v, _SUP, dom)
                return {"product": nuv, "ratio": nuv / (nu * sv + nv * su)}

            cases.append(Case(
                {"u": u.expr(), "v": v.expr(), "space": _MOSER_SP.to_dict(), "domain": _dom_key(dom)},
                {"ratio_max": FROZEN["moser"],
                 "rule_applies": any(e.rule == "Thm-5.10" for e in product_target(_MOSER_SP, _MOSER_SP, dom).applicable)},
                observe,
                lambda e, o: e["rule_applies"] and o["ratio"] <= e["ratio_max"],
            ))
    return cases


_MULT_SP = SpaceParams(1, 1, 2)
_MULT_V = SpaceParams(1, 0, INF)
_COR_N = 2
_COR_U = SpaceParams(1, 0, 2)
_COR_V = SpaceParams(1 + _COR_N, _COR_N, 2)


def _multiplier_family() -> tuple[list[TestFunction], list[TestFunction]]:
    g = RhoPower(0.25) * CutoffPsi()
    us = [g, Bump(0.5, (0.75,)), dilate(g, 8)]
    vs = [CutoffPsi(), dilate(CutoffPsi(), 4), Bump(1.0)]
    return us, vs


def _multiplier(cfg: dict) -> list[Case]:
    us, vs = _multiplier_family()
    if cfg["quick"]:
        us, vs = us[:2], vs[:2]
    dom = DomainSpec.model(3, 0)
    prop = any(e.rule == "Prop-5.12" for e in product_target(_MULT_SP, _MULT_V, dom).applicable)
    cor = any(e.rule == "Cor-5.14" for e in product_target(_COR_U, _COR_V, dom).applicable)
    cases = []
    for u in us:
        for v in vs:
            def observe(u=u, v=v):
                nuv = _norm_cached(multiply(u, v), _MULT_SP, dom)
                return {"ratio": nuv / (_norm_cached(v, _MULT_V, dom) * _norm_cached(u, _MULT_SP, dom))}

            cases.append(Case(
                {"rule": "Prop-5.12", "u": u.expr(), "v": v.expr(), "space": _MULT_SP.to_dict(),
                 "multiplier_space": _MULT_V.to_dict()},
                {"ratio_max": FROZEN["multiplier"], "rule_applies": prop},
                observe,
                lambda e, o: e["rule_applies"] and o["ratio"] <= e["ratio_max"],
            ))
            damped = multiply(RhoPower(float(_COR_N)), v)

            def observe_cor(u=u, v=damped):
                nuv = _norm_cached(multiply(u, v), _COR_U, dom)
                return {"ratio": nuv / (_norm_cached(v, _COR_V, dom) * _norm_cached(u, _COR_U, dom))}

            cases.append(Case(
                {"rule": "Cor-5.14", "n": _COR_N, "u": u.expr(), "v": damped.expr(),
                 "space": _COR_U.to_dict(), "multiplier_space": _COR_V.to_dict()},
                {"ratio_max": FROZEN["multiplier_extra_derivatives"], "rule_applies": cor},
                observe_cor,
                lambda e, o: e["rule_applies"] and o["ratio"] <= e["ratio_max"],
            ))
    return cases


# ---------------------------------------------------------------------------
# algebra sharpness: u in the space, u^2 not
# ---------------------------------------------------------------------------

SHARPNESS_CASES = (
    # (a, b); d = 3, p = 2, m = 2 on the model pair
    (Fraction(7, 5), Fraction(-2, 25)),
    (Fraction(7, 5), Fraction(-7, 100)),
    (Fraction(6, 5), Fraction(-1, 5)),
    (Fraction(8, 5), Fraction(1, 20)),
    (Fraction(8, 5), Fraction(3, 20)),
)


def _algebra_sharpness(cfg: dict) -> list[Case]:
    dom = DomainSpec.model(3, 0)
    d, p = 3, 2
    cases = []
    for a, b in SHARPNESS_CASES:
        sp = SpaceParams(2, a, p)
        for power in (1, 2):
            bb = b * power
            exact_slope = -float((bb - a) * p + d) + 0.0
            verdict = member_rho_power(bb, sp, dom)
            u = RhoPower(float(b)) * CutoffPsi()
            tf = u if power == 1 else multiply(u, u)
            cases.append(Case(
                {"d": d, "space": sp.to_dict(), "b": str(b), "power": power, "func": tf.expr()},
                {"detector": _label(exact_slope, p), "exact_slope": exact_slope,
                 "calculus": verdict.outcome.value, "rule": verdict.rule},
                lambda tf=tf, sp=sp: membership_detect(tf, sp, dom, _detector_quad()).value,
                lambda e, o: o == e["detector"],
            ))
    return cases


# ---------------------------------------------------------------------------
# non-compactness witness on the critical line
# ---------------------------------------------------------------------------

WITNESS_SRC = SpaceParams(1, 1, 2)
WITNESS_TGT = SpaceParams(0, Fraction(1, 4), 4)
_WITNESS_DOM = DomainSpec.smooth_cone(3)
_WITNESS_QUAD = QuadSpec(angular_order=24, target_rel_error=1e-4, j_max=30)


def witness(j: int) -> TestFunction:
    """2^(-j(a - d/p)) u(2^j x) with u a bump of radius 1/16 at 3/2 on the axis."""
    base = translate(Bump(1.0 / 16), (0.0, 0.0, 1.5))
    scale = 2.0 ** (-j * float(WITNESS_SRC.a - Fraction(3) / WITNESS_SRC.p))
    return Scale(scale, dilate(base, 2.0**j))


def _witness_ball(j: int) -> tuple[np.ndarray, float]:
    return np.array([0.0, 0.0, 1.5 * 2.0**-j]), 2.0 ** -(j + 4)


@dataclass(frozen=True)
class _Window(TestFunction):
    """``f`` integrated over one ball only; exact when f vanishes near the ball's edge."""

    f: TestFunction
    ball: Ball

    @property
    def support(self):
        return (self.ball,)

    @property
    def max_order(self):
        return self.f.max_order

    def jet_of(self, xs, split):
        return self.f.jet_of(xs, split)

    def expr(self):
        return self.f.expr()


def _noncompact_witness(cfg: dict) -> list[Case]:
    jmax = 8 if cfg["quick"] else 20
    dom = _WITNESS_DOM
    on_line = WITNESS_SRC.a - Fraction(3) / WITNESS_SRC.p == WITNESS_TGT.a - Fraction(3) / WITNESS_TGT.p
    cont = embed_continuous(WITNESS_SRC, WITNESS_TGT, dom).outcome.value
    comp = embed_compact(WITNESS_SRC, WITNESS_TGT, dom).outcome.value

    def spread(sp):
        vals = [kondratiev_norm(witness(j), sp, dom, _WITNESS_QUAD).value for j in range(1, jmax + 1)]
        return {"norms": vals, "spread": max(vals) / min(vals)}

    cases = [
        Case({"check": "normalized_spread", "space": sp.to_dict(), "j": f"1..{jmax}"},
             {"spread_max": 4.0, "continuous": cont, "compact": comp, "equality_line": on_line},
             lambda sp=sp: spread(sp),
             lambda e, o: e["equality_line"] and o["spread"] <= e["spread_max"])
        for sp in (WITNESS_SRC, WITNESS_TGT)
    ]
    for j in range(1, jmax, 2):
        k = j + 1

        def observe(j=j, k=k):
            cj, rj = _witness_ball(j)
            ck, rk = _witness_ball(k)
            disjoint = float(np.linalg.norm(cj - ck)) >= rj + rk
            diff = Sum((witness(j), Scale(-1.0, witness(k))))
            # one ball around both bumps is mostly empty and defeats the tensor rule, so the
            # difference is integrated over each bump's ball and the p-th powers are added
            p = float(WITNESS_TGT.p)
            parts = [
                kondratiev_norm(_Window(diff, Ball(tuple(c), r)), WITNESS_TGT, dom, _WITNESS_QUAD).value ** p
                for c, r in ((cj, rj), (ck, rk))
            ]
            nd = sum(parts) ** (1 / p)
            nj = kondratiev_norm(witness(j), WITNESS_TGT, dom, _WITNESS_QUAD).value
            nk = kondratiev_norm(witness(k), WITNESS_TGT, dom, _WITNESS_QUAD).value
            return {"disjoint": disjoint, "difference": nd, "smaller": min(nj, nk)}

        cases.append(Case(
            {"check": "pair_distance", "pair": [j, k], "space": WITNESS_TGT.to_dict()},
            {"disjoint": True, "min_fraction": 0.5},
            observe,
            lambda e, o: o["disjoint"] and o["difference"] >= e["min_fraction"] * o["smaller"],
        ))
    return cases


# ---------------------------------------------------------------------------
# decomposition of polyhedral cones and of the two-wedge union
# ---------------------------------------------------------------------------

_DEC_SP = SpaceParams(1, Fraction(1, 2), 2)
_DEC_QUAD = QuadSpec(radial_panels=1, angular_order=6, gauss_order=8, j_max=24, target_rel_error=1e-4)


def _dec_cones() -> dict[str, DomainSpec]:
    return {
        "square": DomainSpec.polyhedral_cone([(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]),
        "triangle": DomainSpec.polyhedral_cone([(-0.5, -0.4), (0.5, -0.4), (0.0, 0.5)]),
        "thin_triangle": DomainSpec.polyhedral_cone([(-0.5, -0.1), (0.5, -0.1), (0.0, 0.1)]),
    }


def _dec_functions(axes: np.ndarray) -> list[TestFunction]:
    """Ten functions: global ones, bumps at the vertex, and bumps straddling edges."""
    fam: list[TestFunction] = [
        Constant(1.0), CutoffPsi(), dilate(CutoffPsi(), 4), RhoPower(0.5) * CutoffPsi(),
        Bump(0.3), Bump(0.05),
    ]
    for i, ax in enumerate(axes[:2]):
        fam.append(translate(Bump(0.25), tuple(0.5 * ax)))
        fam.append(translate(Bump(0.02), tuple(0.1 * ax)))
    return fam[:10]


def _edge_dist(ax):
    ax = np.asarray(ax, float)

    def dist(p):
        return np.linalg.norm(p - np.outer(p @ ax, ax), axis=1)

    return dist


def _decomposition_ratio(u: TestFunction, region, pieces) -> dict:
    whole = shell_series(u, _DEC_SP, region, _DEC_QUAD).total
    parts = {}
    for name, mask, dist in pieces:
        parts[name] = shell_series(u, _DEC_SP, region.restricted(mask, dist), _DEC_QUAD).total
    total = sum(parts.values())
    return {"whole": whole, "pieces": parts, "ratio": total / whole}


def _decomposition(cfg: dict) -> list[Case]:
    cases = []
    bounds = {"lower": FROZEN["decomposition_lower"], "upper": FROZEN["decomposition_upper"]}
    cones = _dec_cones()
    for name, q in cones.items():
        dec = decompose_polyhedral_cone(q, samples=5000, seed=cfg["seed"])
        pieces = [("smooth", dec.smooth_piece.contains, lambda p: np.linalg.norm(p, axis=1))]
        pieces += [(f"edge{e.index}", e.contains, _edge_dist(e.axis)) for e in dec.edge_pieces]
        region = polyhedral_region(q)
        fam = _dec_functions(edge_directions(q))
        if cfg["quick"] or name != "square":
            fam = fam[:3] + fam[6:8]
        for u in fam:
            cases.append(Case(
                {"domain": name, "func": u.expr(), "space": _DEC_SP.to_dict()},
                bounds,
                lambda u=u, region=region, pieces=pieces: _decomposition_ratio(u, region, pieces),
                lambda e, o: e["lower"] <= o["ratio"] <= e["upper"],
            ))
    cu = CriticalUnion()
    region = critical_union_region(cu)
    axes = np.array(cu.axes)
    fam = _dec_functions(axes)
    if cfg["quick"]:
        fam = fam[:3] + fam[6:8]
    for u in fam:
        cases.append(Case(
            {"domain": "two_wedges", "func": u.expr(), "space": _DEC_SP.to_dict()},
            bounds,
            lambda u=u: _decomposition_ratio(u, region, cu.pieces()),
            lambda e, o: e["lower"] <= o["ratio"] <= e["upper"],
        ))
    return cases


# ---------------------------------------------------------------------------
# decision-engine consistency
# ---------------------------------------------------------------------------

_P_CHOICES = (Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(4), INF)


def _random_domain(rng) -> DomainSpec:
    k = int(rng.integers(0, 6))
    if k == 0:
        d = int(rng.integers(2, 5))
        return DomainSpec.model(d, int(rng.integers(0, d)))
    if k == 1:
        return DomainSpec.smooth_cone(int(rng.integers(2, 4)))
    if k == 2:
        return DomainSpec.nonsmooth_cone(3)
    if k == 3:
        return DomainSpec.dihedral_cube(3, int(rng.integers(1, 3)))
    if k == 4:
        return DomainSpec.polyhedral_cone([(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)])
    return DomainSpec.model(3, 0)


def _random_space(rng, m_min: int = 0) -> SpaceParams:
    return SpaceParams(int(rng.integers(m_min, 5)), Fraction(int(rng.integers(-8, 9)), 4),
                       _P_CHOICES[int(rng.integers(0, len(_P_CHOICES)))])


def _holds(v) -> bool:
    return v.outcome is Outcome.HOLDS


def consistency_batch(seed: int, n: int) -> dict:
    """Check implications between decisions on ``n`` random tuples."""
    rng = np.random.default_rng(seed)
    counts = {"compact_not_continuous": 0, "monotonicity": 0, "product_hypotheses": 0, "power_hypotheses": 0}
    for _ in range(n):
        dom = _random_domain(rng)
        src, tgt = _random_space(rng, 1), _random_space(rng)
        cont = embed_continuous(src, tgt, dom)
        if _holds(embed_compact(src, tgt, dom)) and not _holds(cont):
            counts["compact_not_continuous"] += 1
        if _holds(cont):
            moves = [
                (SpaceParams(src.m + 1, src.a, src.p), tgt),
                (SpaceParams(src.m, src.a + Fraction(1, 4), src.p), tgt),
            ]
            if tgt.m > 0:
                moves.append((src, SpaceParams(tgt.m - 1, tgt.a, tgt.p)))
            moves.append((src, SpaceParams(tgt.m, tgt.a - Fraction(1, 4), tgt.p)))
            for s, t in moves:
                if not _holds(embed_continuous(s, t, dom)):
                    counts["monotonicity"] += 1
        try:
            res = product_target(src, tgt, dom)
        except MixedIntegrability:
            res = None
        if res is not None and not all(e.verify() for e in res.applicable):
            counts["product_hypotheses"] += 1
        n_pow = int(rng.integers(1, 5))
        if not all(e.verify() for e in power_target(src, n_pow, dom).applicable):
            counts["power_hypotheses"] += 1
    return counts


def _decision_consistency(cfg: dict) -> list[Case]:
    batches = 2 if cfg["quick"] else 10
    size = 1000
    return [
        Case({"batch": i, "tuples": size, "seed": cfg["seed"] * 1000 + i},
             {"violations": 0},
             lambda i=i: consistency_batch(cfg["seed"] * 1000 + i, size),
             lambda e, o: sum(o.values()) == e["violations"])
        for i in range(batches)
    ]


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

SUITES: dict[str, Suite] = {
    s.id: s
    for s in (
        Suite("homogeneity", _homogeneity, description="dilation scaling of the norm"),
        Suite("closed-form", _closed_form, description="constant function on a circular cone"),
        Suite("oracle", _oracle, _oracle_verdict, "tail-slope detector vs exact membership"),
        Suite("equivalent-norm", _equivalent_norm, description="full vs extremal norm"),
        Suite("partition", _partition, description="dyadic partition of unity"),
        Suite("product-bounds", _product_bounds, description="dilation-uniform product constants"),
        Suite("moser", _moser, description="Moser-type product bound"),
        Suite("multiplier", _multiplier, description="bounded and weighted multipliers"),
        Suite("algebra-sharpness", _algebra_sharpness, description="u member, u^2 not"),
        Suite("noncompact-witness", _noncompact_witness, description="bounded sequence without convergent subsequence"),
        Suite("decomposition", _decomposition, description="splitting into edge and smooth pieces"),
        Suite("decision-consistency", _decision_consistency, description="implications between decisions"),
    )
}


__all__ = [
    "FROZEN",
    "SUITES",
    "Case",
    "Suite",
    "SuiteReport",
    "consistency_batch",
    "run_all",
    "run_suite",
    "sample_domain",
    "witness",
]
