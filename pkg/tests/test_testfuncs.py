from __future__ import annotations

import numpy as np
import pytest

from kondratiev.errors import InvalidParams, OrderExceeded, SingularPoint
from kondratiev.testfuncs import (
    Ball,
    Bump,
    Constant,
    CutoffPsi,
    FAlpha,
    Product,
    RhoPower,
    Scale,
    Sum,
    dilate,
    eval_derivative,
    evaluate,
    jet,
    multiply,
    parse_expr,
    translate,
)


def _mixed_fd(f, x, i, j, h):
    """Central difference for d_i d_j f."""
    x = np.asarray(x, dtype=float)
    ei, ej = np.eye(len(x))[i] * h, np.eye(len(x))[j] * h
    pts = np.array([x + ei + ej, x + ei - ej, x - ei + ej, x - ei - ej])
    v = evaluate(f, pts)
    return (v[0] - v[1] - v[2] + v[3]) / (4 * h * h)


def _mixed_fd_richardson(f, x, i, j, h=2e-3):
    return (4 * _mixed_fd(f, x, i, j, h / 2) - _mixed_fd(f, x, i, j, h)) / 3


def test_constant_has_zero_gradient():
    assert eval_derivative(Constant(5.0), (1, 0, 0), (0.2, 0.3, 0.4)) == 0.0
    assert evaluate(Constant(5.0), [(0.2, 0.3, 0.4)])[0] == 5.0


def test_rho_power_radial_derivative():
    b, r = -0.3, 0.4
    assert eval_derivative(RhoPower(b), (1, 0, 0), (r, 0.0, 0.0)) == pytest.approx(b * r ** (b - 1), rel=1e-13)


def test_rho_power_uses_distance_to_edge():
    # with split=1 the last coordinate runs along the singular line
    x = (0.3, 0.4, 0.9)
    assert evaluate(RhoPower(2.0), [x], split=1)[0] == pytest.approx(0.25, rel=1e-13)


def test_falpha_times_psi_mixed_derivative_matches_finite_differences():
    u = multiply(FAlpha(0.4), CutoffPsi())
    x = (0.3, 0.2, 0.1)
    exact = eval_derivative(u, (1, 1, 0), x)
    assert exact == pytest.approx(_mixed_fd_richardson(u, x, 0, 1), rel=1e-6)


def test_falpha_singular_center():
    with pytest.raises(SingularPoint):
        evaluate(FAlpha(0.4), [(0.0, 0.0, 0.0)])


def test_square_derivative_matches_leibniz_and_differences():
    u = multiply(RhoPower(-0.3), CutoffPsi())
    uu = multiply(u, u)
    # mid-ramp of psi: near the ramp ends exp(-1/t) varies too fast for a 1e-6 difference quotient
    x = (0.9, 0.7, -0.6)
    j = jet(u, [x], 2)
    d1, d2, d12 = j.derivative((1, 0, 0))[0], j.derivative((0, 1, 0))[0], j.derivative((1, 1, 0))[0]
    leibniz = 2 * (j.value[0] * d12 + d1 * d2)
    exact = eval_derivative(uu, (1, 1, 0), x)
    assert exact == pytest.approx(leibniz, rel=1e-12)
    assert exact == pytest.approx(_mixed_fd_richardson(uu, x, 0, 1), rel=1e-6)


def test_dilate_support_and_values():
    f = dilate(Bump(1.0), 2)
    (ball,) = f.support
    assert ball.radius == 0.5
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, size=(50, 3))
    g = multiply(RhoPower(0.5), CutoffPsi())
    assert np.allclose(evaluate(dilate(g, 3.0), x), evaluate(g, 3.0 * x), rtol=1e-14, atol=0)


def test_dilate_chain_collapses():
    g = multiply(RhoPower(0.5), Bump(1.0, (0.2,)))
    rng = np.random.default_rng(1)
    x = rng.uniform(-0.2, 0.2, size=(40, 3))
    a = evaluate(dilate(dilate(g, 2), 4), x)
    b = evaluate(dilate(g, 8), x)
    assert np.array_equal(a, b)


def test_dilate_rejects_nonpositive():
    with pytest.raises(InvalidParams):
        dilate(Bump(), 0)


def test_product_normalization():
    assert multiply(RhoPower(-0.3), RhoPower(-0.3)) == RhoPower(-0.6)
    u = multiply(RhoPower(0.5), CutoffPsi())
    assert multiply(u, Constant(1.0)) == u
    assert isinstance(multiply(Constant(2.0), u), Scale)
    assert isinstance(u, Product)


def test_product_support_intersects():
    u = multiply(Bump(1.0), Bump(0.5, (0.3,)))
    assert len(u.support) == 2


def test_sum_support_encloses_terms():
    s = Sum((Bump(0.1, (0.0, 0.0, 1.0)), Bump(0.1, (0.0, 0.0, -1.0))))
    (ball,) = s.support
    assert ball == Ball((0.0, 0.0, 0.0), pytest.approx(1.1))
    x = [(0.0, 0.0, 1.0), (0.0, 0.0, -1.0), (0.0, 0.0, 0.0)]
    assert evaluate(s, x).tolist() == [1.0, 1.0, 0.0]


def test_translate_moves_bump():
    f = translate(Bump(0.5), (0.0, 0.0, 2.0))
    assert evaluate(f, [(0.0, 0.0, 2.0)])[0] == 1.0
    assert evaluate(f, [(0.0, 0.0, 0.0)])[0] == 0.0


def test_order_limit():
    with pytest.raises(OrderExceeded):
        jet(Bump(), [(0.1, 0.1, 0.1)], 7)


def test_parse_expr_round_trip():
    for text in ("rho_pow(b=-0.4)*psi()", "dilate(8,rho_pow(b=0.5)*psi())", "bump(r=0.25,c=[0.75])",
                 "translate([0,0,1.5],bump(r=0.0625))", "f_alpha(a=0.4)"):
        f = parse_expr(text)
        assert parse_expr(f.expr()) == f


def test_parse_expr_power_and_scale():
    u = parse_expr("rho_pow(b=-0.3)**2")
    assert u == RhoPower(-0.6)
    assert parse_expr("scale(2, psi())") == Scale(2.0, CutoffPsi())


@pytest.mark.parametrize("text", ["rho_pow()", "nope()", "psi(1)", "rho_pow(b=1)**0.5", "rho_pow(b="])
def test_parse_expr_errors(text):
    with pytest.raises(InvalidParams):
        parse_expr(text)
