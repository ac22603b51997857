from __future__ import annotations

from fractions import Fraction

import pytest

from kondratiev.calculus import (
    INF,
    DomainKind,
    DomainSpec,
    Outcome,
    SpaceParams,
    embed_compact,
    embed_continuous,
    fmt_rational,
    is_algebra,
    member_constant,
    member_rho_power,
    parse_kind,
    power_target,
    product_target,
)
from kondratiev.errors import DegeneratePolygon, InvalidParams, MixedIntegrability

S = SpaceParams.parse
MODEL3 = DomainSpec.model(3, 0)
CONE3 = DomainSpec.smooth_cone(3)
SQUARE = DomainSpec.polyhedral_cone([(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)])


def test_parse_space_params():
    sp = S("m=2,a=1/2,q=4")
    assert sp == SpaceParams(2, Fraction(1, 2), 4)
    assert S("m=0,a=0,p=inf").p == INF
    assert sp.to_dict() == {"m": 2, "a": "1/2", "p": "4/1"}


@pytest.mark.parametrize("text", ["m=1,a=0,p=0.5", "m=-1,a=0,p=2", "m=1.5,a=0,p=2", "a=0,p=2", "m=1,a=0,p=2,r=3"])
def test_parse_rejects_bad_params(text):
    with pytest.raises(InvalidParams):
        S(text)


def test_fmt_rational():
    assert fmt_rational(Fraction(1)) == "1/1"
    assert fmt_rational(Fraction(-3, 4)) == "-3/4"


def test_domain_validation():
    with pytest.raises(InvalidParams):
        DomainSpec.model(3, 3)
    with pytest.raises(InvalidParams):
        DomainSpec.dihedral_cube(3, 0)
    with pytest.raises(DegeneratePolygon):
        DomainSpec.polyhedral_cone([(0, 0), (1, 0), (2, 0)])
    assert parse_kind("model") is DomainKind.MODEL


def test_domain_dict_round_trip():
    for dom in (MODEL3, CONE3, DomainSpec.nonsmooth_cone(3), DomainSpec.dihedral_cube(3, 1), SQUARE):
        assert DomainSpec.from_dict(dom.to_dict()) == dom


# embeddings ---------------------------------------------------------------

def test_embed_example_holds():
    v = embed_continuous(S("m=2,a=1,p=2"), S("m=1,a=0,q=4"), MODEL3)
    assert v.outcome is Outcome.HOLDS
    assert v.rule == "Thm-3.3"
    assert "1/2 >= 1/4" in v.reason and "-1/2 >= -3/4" in v.reason


def test_embed_identity_holds():
    sp = S("m=2,a=1,p=2")
    assert embed_continuous(sp, sp, MODEL3).outcome is Outcome.HOLDS


def test_embed_smoothness_violation_fails():
    v = embed_continuous(S("m=1,a=0,p=2"), S("m=1,a=0,q=4"), MODEL3)
    assert v.outcome is Outcome.FAILS


def test_embed_p_above_q_is_undetermined():
    v = embed_continuous(S("m=2,a=1,p=4"), S("m=1,a=0,q=2"), MODEL3)
    assert v.outcome is Outcome.UNDETERMINED


def test_embed_requires_smooth_source():
    with pytest.raises(InvalidParams):
        embed_continuous(S("m=0,a=0,p=2"), S("m=0,a=0,p=2"), MODEL3)


def test_compact_strict_inequalities():
    src = S("m=2,a=1,p=2")
    assert embed_compact(src, S("m=1,a=0,q=4"), CONE3).outcome is Outcome.HOLDS
    on_line = S("m=1,a=1/4,q=4")
    assert embed_compact(src, on_line, CONE3).outcome is Outcome.FAILS
    assert embed_continuous(src, on_line, CONE3).outcome is Outcome.HOLDS
    assert embed_compact(src, src, CONE3).outcome is Outcome.FAILS


def test_compact_on_unbounded_model_is_undetermined():
    assert embed_compact(S("m=2,a=1,p=2"), S("m=1,a=0,q=4"), MODEL3).outcome is Outcome.UNDETERMINED


# algebra and products -------------------------------------------------------

@pytest.mark.parametrize(
    "dom, text, outcome",
    [
        (CONE3, "m=2,a=3/2,p=2", Outcome.HOLDS),
        (CONE3, "m=2,a=7/5,p=2", Outcome.FAILS),
        (SQUARE, "m=2,a=7/5,p=2", Outcome.UNDETERMINED),
        (MODEL3, "m=3,a=3,p=1", Outcome.HOLDS),
    ],
)
def test_is_algebra_examples(dom, text, outcome):
    assert is_algebra(S(text), dom).outcome is outcome


def test_is_algebra_needs_finite_p():
    with pytest.raises(InvalidParams):
        is_algebra(S("m=2,a=2,p=inf"), CONE3)


def _entry(res, rule):
    return next(e for e in res.applicable if e.rule == rule)


def test_product_high_smoothness():
    sp = S("m=2,a=2,p=2")
    res = product_target(sp, sp, MODEL3)
    e = _entry(res, "Thm-5.1")
    assert e.target == SpaceParams(2, Fraction(5, 2), 2)
    assert res.best.target == SpaceParams(2, Fraction(5, 2), 2)


def test_product_fractional_target_is_open():
    sp = S("m=1,a=1,p=2")
    e = _entry(product_target(sp, sp, MODEL3), "Thm-5.8")
    assert e.target == SpaceParams(1, 1, Fraction(3, 2))
    assert e.open_bound


def test_product_mid_smoothness_d4():
    sp = S("m=1,a=1,p=2")
    e = _entry(product_target(sp, sp, DomainSpec.model(4, 0)), "Thm-5.5")
    assert e.target == SpaceParams(0, 0, 2)


def test_product_needs_some_smoothness():
    sp = S("m=0,a=1,p=2")
    res = product_target(sp, sp, MODEL3)
    assert res.applicable == () and res.best is None


def test_product_mixed_p_raises():
    with pytest.raises(MixedIntegrability):
        product_target(S("m=2,a=2,p=2"), S("m=2,a=2,p=3"), MODEL3)


def test_every_product_entry_reverifies():
    sp = S("m=2,a=2,p=2")
    for e in product_target(sp, sp, MODEL3).applicable:
        assert e.verify()


def test_power_targets():
    res = power_target(S("m=2,a=2,p=2"), 3, MODEL3)
    assert _entry(res, "Cor-5.9(i)").target == SpaceParams(2, 3, 2)
    sp = S("m=2,a=2,p=2")
    assert power_target(sp, 1, MODEL3).best.target == sp
    e = _entry(power_target(S("m=1,a=1,p=2"), 2, MODEL3), "Cor-5.9(iii)")
    assert e.target == SpaceParams(1, 1, Fraction(3, 2)) and e.open_bound


def test_power_rejects_zero():
    with pytest.raises(InvalidParams):
        power_target(S("m=2,a=2,p=2"), 0, MODEL3)


# membership ---------------------------------------------------------------

def test_member_constant_thresholds():
    assert member_constant(S("m=1,a=1.49,p=2"), CONE3).outcome is Outcome.HOLDS
    assert member_constant(S("m=1,a=1.5,p=2"), CONE3).outcome is Outcome.FAILS
    assert member_constant(S("m=1,a=0.99,p=2"), SQUARE).outcome is Outcome.HOLDS
    for dom in (CONE3, DomainSpec.nonsmooth_cone(3), DomainSpec.dihedral_cube(3, 1), SQUARE):
        assert member_constant(S("m=1,a=0,p=inf"), dom).outcome is Outcome.HOLDS


def test_member_rho_power_shifts_exponent():
    dom = DomainSpec.model(3, 1)
    b = Fraction(-3, 10)
    # the queried space exponent is a + b
    assert member_rho_power(b, SpaceParams(1, Fraction(9, 10) + b, 2), dom).outcome is Outcome.HOLDS
    assert member_rho_power(b, SpaceParams(1, 1 + b, 2), dom).outcome is Outcome.FAILS


def test_member_rho_power_zero_matches_constant():
    for a in ("1", "3/2", "2"):
        sp = S(f"m=1,a={a},p=2")
        assert member_rho_power(0, sp, CONE3).outcome is member_constant(sp, CONE3).outcome
