from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from kondratiev.calculus import INF, DomainSpec, SpaceParams
from kondratiev.errors import InvalidParams, OrderExceeded, QuadratureFailure
from kondratiev.geometry import solid_angle
from kondratiev.norms import (
    DELTA,
    Membership,
    QuadSpec,
    classify,
    extremal_norm,
    kondratiev_norm,
    membership_detect,
    shell_series,
    sobolev_norm,
)
from kondratiev.testfuncs import Bump, Constant, CutoffPsi, FAlpha, RhoPower, dilate, multiply

MODEL3 = DomainSpec.model(3, 0)
CONE3 = DomainSpec.smooth_cone(3)
DETECT = QuadSpec(j_max=36, target_rel_error=1e-4)


def rho_psi(b: float):
    return multiply(RhoPower(b), CutoffPsi())


def test_constant_on_cone_matches_radial_integral():
    # value^2 = omega * int_0^1 r^(3-1-2) dr = omega
    res = kondratiev_norm(Constant(1.0), SpaceParams(0, 1, 2), CONE3)
    assert res.value**2 == pytest.approx(solid_angle(3, math.pi / 4), rel=1e-6)


@pytest.mark.parametrize("a, p", [(Fraction(0), 1), (Fraction(1, 2), 2), (Fraction(-1), 3)])
def test_constant_on_cone_general_exponent(a, p):
    res = kondratiev_norm(Constant(1.0), SpaceParams(0, a, p), CONE3)
    closed = solid_angle(3, math.pi / 4) / (3 - float(a) * p)
    assert res.value**p == pytest.approx(closed, rel=1e-6)


def test_rho_power_psi_member_is_finite_and_converged():
    # a - b = 1.4 < d/p = 1.5
    res = kondratiev_norm(rho_psi(-0.4), SpaceParams(1, 1, 2), MODEL3)
    assert math.isfinite(res.value)
    assert res.series.converged
    assert res.est_rel_error <= 1e-6


def test_dilation_scaling_is_exact():
    u = multiply(RhoPower(-0.3), Bump(0.25, (0.75,)))
    sp = SpaceParams(2, Fraction(1, 2), 2)
    base = kondratiev_norm(u, sp, MODEL3).value
    for lam in (2, 4, 8):
        val = kondratiev_norm(dilate(u, lam), sp, MODEL3).value
        assert val == pytest.approx(lam ** (0.5 - 1.5) * base, rel=1e-6)


def test_extremal_never_exceeds_full():
    # same nodes for both, so the term-subset inequality holds shell by shell
    dom = DomainSpec.model(3, 1)
    sp = SpaceParams(2, 1, 2)
    for k in (0, 3, 6):
        u = dilate(rho_psi(0.25), 2.0**k)
        ext = shell_series(u, sp, dom, QuadSpec(j_max=30), extremal=True)
        full = shell_series(u, sp, dom, QuadSpec(j_max=30))
        assert all(e <= f for e, f in zip(ext.s, full.s))
    u = rho_psi(0.25)
    assert extremal_norm(u, sp, MODEL3).value <= kondratiev_norm(u, sp, MODEL3).value


def test_extremal_equals_full_for_m0():
    u = rho_psi(0.25)
    sp = SpaceParams(0, Fraction(1, 2), 2)
    assert extremal_norm(u, sp, MODEL3).value == kondratiev_norm(u, sp, MODEL3).value


@pytest.mark.parametrize("a, expected", [(1.0, Membership.CONVERGENT), (1.2, Membership.DIVERGENT), (1.1, Membership.BORDERLINE)])
def test_membership_detect_examples(a, expected):
    # rho^(-0.4) psi queried in the space with exponent a + b, a in {1.4, 1.6, 1.5}
    sp = SpaceParams(1, Fraction(a).limit_denominator(100), 2)
    assert membership_detect(rho_psi(-0.4), sp, MODEL3, DETECT) is expected


def test_membership_detect_needs_deep_shells():
    with pytest.raises(InvalidParams):
        membership_detect(rho_psi(-0.4), SpaceParams(1, 1, 2), MODEL3, QuadSpec(j_max=20))


@pytest.mark.parametrize("b, a, l", [(-0.4, 1.0, 0), (0.3, 0.5, 0), (-0.2, 0.6, 1), (0.0, 1.25, 1)])
def test_shell_series_slope_matches_radial_exponent(b, a, l):
    dom = DomainSpec.model(3, l)
    p = 2
    s = shell_series(rho_psi(b), SpaceParams(1, Fraction(a).limit_denominator(100), p), dom, DETECT)
    exact = -((b - a) * p + (3 - l))
    js = np.array(list(s.indices()))
    tail = js >= 10
    slope = np.polyfit(js[tail], np.log2(np.asarray(s.s)[tail]), 1)[0]
    assert slope == pytest.approx(exact, abs=0.02)
    assert s.tail_slope == pytest.approx(exact, abs=0.02)


@pytest.mark.parametrize("m, threshold", [(0, 1.5), (1, 0.5)])
def test_falpha_sobolev_threshold(m, threshold):
    # f_alpha is in W^m_2(R^3) iff alpha < 3/2 - m
    quad = QuadSpec(j_max=36, target_rel_error=1e-4)
    below = sobolev_norm(FAlpha(threshold - 0.05), m, 2, (0, 0, 0), 3, quad)
    above = sobolev_norm(FAlpha(threshold + 0.05), m, 2, (0, 0, 0), 3, quad)
    assert classify(below.series) is Membership.CONVERGENT
    assert classify(above.series) is Membership.DIVERGENT


def test_divergent_norm_is_infinite():
    res = kondratiev_norm(rho_psi(-0.4), SpaceParams(1, Fraction(7, 5), 2), MODEL3, QuadSpec(j_max=40))
    assert res.value == math.inf
    assert res.series.tail_slope == pytest.approx(0.6, abs=1e-9)


def test_sup_norm_of_cutoff():
    res = kondratiev_norm(CutoffPsi(), SpaceParams(0, 0, INF), MODEL3)
    assert res.value == pytest.approx(1.0, rel=1e-9)


def test_classify_uses_delta():
    assert DELTA == 0.05


def test_unbounded_support_rejected_on_model_case():
    with pytest.raises(InvalidParams):
        kondratiev_norm(Constant(1.0), SpaceParams(0, 0, 2), MODEL3)


def test_order_limit():
    with pytest.raises(OrderExceeded):
        kondratiev_norm(CutoffPsi(), SpaceParams(7, 0, 2), MODEL3)


def test_coarse_rule_reports_failure():
    coarse = QuadSpec(radial_panels=1, angular_order=2, gauss_order=2, target_rel_error=1e-6)
    with pytest.raises(QuadratureFailure):
        kondratiev_norm(Bump(0.3, (0.6, 0.2)), SpaceParams(1, 0, 2), MODEL3, coarse)


def test_quadspec_validation():
    with pytest.raises(InvalidParams):
        QuadSpec(j_max=4)
    with pytest.raises(InvalidParams):
        QuadSpec(target_rel_error=0.1)


def test_series_csv_has_one_row_per_shell():
    s = shell_series(rho_psi(-0.4), SpaceParams(1, 1, 2), MODEL3, QuadSpec(j_max=12))
    lines = s.to_csv().splitlines()
    assert lines[0] == "j,s_j"
    assert len(lines) == 1 + len(s.s)
