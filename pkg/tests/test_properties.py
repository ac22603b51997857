from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from kondratiev.calculus import (
    INF,
    DomainSpec,
    Outcome,
    SpaceParams,
    embed_compact,
    embed_continuous,
    power_target,
    product_target,
)
from kondratiev.geometry import PartitionSpec, partition_jet, partition_sum, weights
from kondratiev.norms import QuadSpec, kondratiev_norm
from kondratiev.testfuncs import Bump, CutoffPsi, RhoPower, dilate, eval_derivative, evaluate, multiply

MODEL3 = DomainSpec.model(3, 0)
CONE3 = DomainSpec.smooth_cone(3)

rationals = st.builds(Fraction, st.integers(-12, 12), st.sampled_from([1, 2, 3, 4]))
finite_p = st.sampled_from([Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(4)])
any_p = st.one_of(finite_p, st.just(INF))


@st.composite
def spaces(draw, m_min=0, p=any_p):
    return SpaceParams(draw(st.integers(m_min, 4)), draw(rationals), draw(p))


@given(spaces(m_min=1, p=finite_p), st.integers(0, 4), rationals)
def test_embedding_monotone_in_m_and_a(src, dm, da):
    tgt = SpaceParams(max(0, src.m - dm), src.a - abs(da), src.p)
    assert embed_continuous(src, tgt, MODEL3).outcome is Outcome.HOLDS


@given(spaces(m_min=1), spaces())
@settings(max_examples=300)
def test_compact_implies_continuous(src, tgt):
    if embed_compact(src, tgt, CONE3).outcome is Outcome.HOLDS:
        assert embed_continuous(src, tgt, CONE3).outcome is Outcome.HOLDS


@given(spaces(p=finite_p), st.integers(2, 4))
def test_product_entries_reverify(sp, d):
    dom = DomainSpec.model(d, 0)
    res = product_target(sp, sp, dom)
    for e in res.applicable:
        assert e.verify()
    assert (res.best is None) == (not [e for e in res.applicable if not e.conditional])


@given(spaces(p=finite_p))
def test_square_power_agrees_with_self_product(sp):
    pw = power_target(sp, 2, MODEL3).best
    pr = product_target(sp, sp, MODEL3).best
    if pw is not None and pr is not None:
        assert (pw.target, pw.open_bound) == (pr.target, pr.open_bound)


@given(spaces(p=finite_p))
def test_first_power_is_identity(sp):
    assert power_target(sp, 1, MODEL3).best.target == sp


@given(spaces())
def test_space_dict_round_trip(sp):
    assert SpaceParams.from_dict(sp.to_dict()) == sp


points3 = st.tuples(*[st.floats(-1.4, 1.4, allow_nan=False) for _ in range(3)])


@given(points3, points3)
def test_weight_is_one_lipschitz(x, y):
    if math.hypot(*x) < 1e-6 or math.hypot(*y) < 1e-6:
        return
    w = weights(MODEL3, np.array([x, y]))
    assert abs(w[0] - w[1]) <= math.dist(x, y) + 1e-12
    assert w.max() <= 1.0


@given(st.floats(-30, 0.3), st.floats(0, 2 * math.pi), st.floats(0, math.pi))
def test_partition_sums_to_one_anywhere(log2r, phi, theta):
    r = 2.0**log2r
    x = np.array([[r * math.sin(theta) * math.cos(phi), r * math.sin(theta) * math.sin(phi), r * math.cos(theta)]])
    if not np.linalg.norm(x) > 0:
        return
    assert abs(partition_sum(MODEL3, x)[0] - 1.0) < 1e-12


@given(st.integers(0, 30), st.floats(-30, 0.3))
def test_partition_in_unit_interval(j, log2r):
    spec = PartitionSpec.for_domain(MODEL3)
    v = partition_jet(spec, MODEL3, j, np.array([[2.0**log2r, 0.0, 0.0]])).value[0]
    assert 0.0 <= v <= 1.0


@given(st.sampled_from([2.0, 0.5, 3.0, 8.0]), st.sampled_from([2.0, 4.0]))
def test_dilation_composes(l1, l2):
    g = multiply(RhoPower(0.5), CutoffPsi())
    x = np.random.default_rng(0).uniform(-0.3, 0.3, size=(20, 3))
    assert np.allclose(evaluate(dilate(dilate(g, l1), l2), x), evaluate(dilate(g, l1 * l2), x), rtol=1e-13, atol=0)


@given(points3, st.integers(0, 2))
def test_first_derivatives_match_differences(x, axis):
    f = multiply(Bump(1.0, (0.2, -0.1)), CutoffPsi())
    alpha = [0, 0, 0]
    alpha[axis] = 1
    h = 1e-5
    e = np.eye(3)[axis] * h
    v = evaluate(f, np.array([np.array(x) + e, np.array(x) - e]))
    fd = (v[0] - v[1]) / (2 * h)
    assert abs(eval_derivative(f, alpha, x) - fd) <= 1e-6 * (1 + abs(fd))


@given(st.sampled_from([-0.3, 0.0, 0.4]), st.integers(1, 3), st.sampled_from([1, 2]))
@settings(max_examples=12, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_dyadic_rescaling_is_exact(b, k, p):
    u = multiply(RhoPower(b), Bump(0.25, (0.75,)))
    sp = SpaceParams(1, Fraction(1, 2), p)
    quad = QuadSpec(radial_panels=2, angular_order=8, j_max=20, target_rel_error=1e-4)
    base = kondratiev_norm(u, sp, MODEL3, quad, check=False).value
    lam = 2.0**k
    val = kondratiev_norm(dilate(u, lam), sp, MODEL3, quad, check=False).value
    assert math.isclose(val, lam ** (0.5 - 3 / p) * base, rel_tol=1e-9)
