"""Analytic test functions with exact derivatives, closed under dilation and product.

Every function is an immutable descriptor.  Evaluation goes through Taylor jets:
a function receives the jets of its (possibly transformed) coordinates and
returns the jet of its value, so chain and product rules are exact.

Expression grammar (used by the command line)::

    expr    := term ('*' term)*
    term    := number | call | term '**' integer | '(' expr ')' | '-' term
    call    := const(c=1) | rho_pow(b=-0.4) | f_alpha(a=0.4, x0=[0,0,0])
             | bump(r=1, c=[0,0,0]) | psi()
             | dilate(lam, expr) | translate([t1,..], expr) | scale(c, expr)

Centers shorter than the ambient dimension are padded with zeros.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._jets import Jet, JetSpace, sum_of_squares
from ._profiles import poly_step
from .calculus import DomainSpec
from .errors import InvalidParams, OrderExceeded, SingularPoint
from .geometry import partition_band, partition_jet_of

MAX_ORDER = 6


def _pad(c: Sequence[float], d: int) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.size > d:
        raise InvalidParams(f"center has {c.size} coordinates, dimension is {d}", field="center")
    return np.concatenate([c, np.zeros(d - c.size)])


@dataclass(frozen=True)
class Ball:
    """Open ball {|x - center| < radius}; the center is zero-padded to the dimension."""

    center: tuple[float, ...]
    radius: float

    def mask(self, pts: np.ndarray, split: int = 0) -> np.ndarray:
        c = _pad(self.center, pts.shape[1])
        return np.sum((pts - c) ** 2, axis=1) < self.radius**2

    def scaled(self, lam: float) -> "Ball":
        return Ball(tuple(x / lam for x in self.center), self.radius / lam)

    def shifted(self, t: Sequence[float]) -> "Ball":
        n = max(len(t), len(self.center))
        c = _pad(self.center, n) + _pad(t, n)
        return Ball(tuple(float(x) for x in c), self.radius)


@dataclass(frozen=True)
class Band:
    """Open band {lo < |x'| < hi}, x' being the first d - split coordinates."""

    lo: float
    hi: float

    def mask(self, pts: np.ndarray, split: int = 0) -> np.ndarray:
        r = np.linalg.norm(pts[:, : pts.shape[1] - split], axis=1)
        return (r > self.lo) & (r < self.hi)

    def scaled(self, lam: float) -> "Band":
        return Band(self.lo / lam, self.hi / lam)


Support = tuple  # tuple of Balls and Bands, intersection semantics; () is the whole space


def support_mask(support: Support, pts: np.ndarray, split: int = 0) -> np.ndarray:
    ok = np.ones(pts.shape[0], dtype=bool)
    for b in support:
        ok &= b.mask(pts, split)
    return ok


def _subset(xs: list[Jet], sel: np.ndarray) -> list[Jet]:
    return [Jet(x.space, x.c[:, sel]) for x in xs]


def _scatter(space: JetSpace, npts: int, sel: np.ndarray, part: Jet) -> Jet:
    out = Jet.constant(space, 0.0, npts)
    out.c[:, sel] = part.c
    return out


class TestFunction:
    """Base class of all test-function descriptors."""

    __test__ = False  # keep pytest from collecting the class
    max_order: int = MAX_ORDER

    @property
    def support(self) -> Support:
        return ()

    def jet_of(self, xs: list[Jet], split: int) -> Jet:
        """Jet of the function given coordinate jets; ``split`` = number of x'' variables."""
        raise NotImplementedError

    def expr(self) -> str:
        raise NotImplementedError

    def __mul__(self, other: "TestFunction") -> "TestFunction":
        return multiply(self, other)

    def __str__(self) -> str:
        return self.expr()


def _num(x: float) -> str:
    return repr(float(x)) if not float(x).is_integer() else str(int(x))


def _vec(v: Sequence[float]) -> str:
    return "[" + ",".join(_num(x) for x in v) + "]"


@dataclass(frozen=True)
class Constant(TestFunction):
    c: float = 1.0

    def jet_of(self, xs, split):
        return Jet.constant(xs[0].space, self.c, xs[0].npts)

    def expr(self):
        return f"const(c={_num(self.c)})"


@dataclass(frozen=True)
class RhoPower(TestFunction):
    """|x'|^b with x' the first d - split coordinates (no cap at 1)."""

    b: float

    def jet_of(self, xs, split):
        n = len(xs) - split
        r2 = sum_of_squares(xs[:n])
        if np.any(r2.value <= 0) and self.b != 0:
            raise SingularPoint("rho_pow evaluated on the singular set", field="x")
        return r2.pow(self.b / 2)

    def expr(self):
        return f"rho_pow(b={_num(self.b)})"


def _psi_of_r2(r2: Jet) -> Jet:
    """Cutoff as a function of |x|^2: 1 on |x| <= 1, 0 on |x| >= 3/2."""
    plateau = r2.value <= 1.0
    out = Jet.constant(r2.space, 1.0, r2.npts)
    ramp = ~plateau
    if ramp.any():
        sub = Jet(r2.space, r2.c[:, ramp])
        val = poly_step(3.0 - 2.0 * sub.sqrt())
        out.c[:, ramp] = val.c
    return out


@dataclass(frozen=True)
class CutoffPsi(TestFunction):
    """Cutoff, 1 on |x| <= 1 and supported in |x| < 3/2, of class C^7."""

    @property
    def support(self):
        return (Ball((), 1.5),)

    def jet_of(self, xs, split):
        return _psi_of_r2(sum_of_squares(xs))

    def expr(self):
        return "psi()"


@dataclass(frozen=True)
class FAlpha(TestFunction):
    """|x - x0|^(-alpha) * psi(x - x0)."""

    alpha: float
    x0: tuple[float, ...] = ()

    @property
    def support(self):
        return (Ball(self.x0, 1.5),)

    def jet_of(self, xs, split):
        c = _pad(self.x0, len(xs))
        r2 = sum_of_squares([x - c[i] for i, x in enumerate(xs)])
        if np.any(r2.value <= 0) and self.alpha != 0:
            raise SingularPoint("f_alpha evaluated at its center", field="x")
        return r2.pow(-self.alpha / 2) * _psi_of_r2(r2)

    def expr(self):
        return f"f_alpha(a={_num(self.alpha)},x0={_vec(self.x0)})"


@dataclass(frozen=True)
class Bump(TestFunction):
    """(1 - s)^8 with s = |x - center|^2 / radius^2, zero for s >= 1.

    Of class C^7, so every derivative up to MAX_ORDER is continuous; a
    polynomial profile keeps Gauss rules accurate near the support boundary.
    """

    radius: float = 1.0
    center: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidParams("bump radius must be positive", field="r")

    @property
    def support(self):
        return (Ball(self.center, self.radius),)

    def jet_of(self, xs, split):
        c = _pad(self.center, len(xs))
        s = sum_of_squares([x - c[i] for i, x in enumerate(xs)]) / self.radius**2
        inside = s.value < 1.0
        out = Jet.constant(s.space, 0.0, s.npts)
        if inside.any():
            sub = Jet(s.space, s.c[:, inside])
            v = 1.0 - sub
            v = v * v
            v = v * v
            out.c[:, inside] = (v * v).c
        return out

    def expr(self):
        return f"bump(r={_num(self.radius)},c={_vec(self.center)})"


@dataclass(frozen=True)
class Dilate(TestFunction):
    """x -> f(lam * x)."""

    lam: float
    f: TestFunction

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidParams("dilation factor must be positive", field="lam")

    @property
    def support(self):
        return tuple(b.scaled(self.lam) for b in self.f.support)

    @property
    def max_order(self):
        return self.f.max_order

    def jet_of(self, xs, split):
        return self.f.jet_of([x * self.lam for x in xs], split)

    def expr(self):
        return f"dilate({_num(self.lam)},{self.f.expr()})"


@dataclass(frozen=True)
class Translate(TestFunction):
    """x -> f(x - shift)."""

    shift: tuple[float, ...]
    f: TestFunction

    @property
    def support(self):
        # a shifted band is no longer a band; dropping it keeps a valid superset
        return tuple(b.shifted(self.shift) for b in self.f.support if isinstance(b, Ball))

    @property
    def max_order(self):
        return self.f.max_order

    def jet_of(self, xs, split):
        t = _pad(self.shift, len(xs))
        return self.f.jet_of([x - t[i] for i, x in enumerate(xs)], split)

    def expr(self):
        return f"translate({_vec(self.shift)},{self.f.expr()})"


@dataclass(frozen=True)
class Scale(TestFunction):
    c: float
    f: TestFunction

    @property
    def support(self):
        return self.f.support

    @property
    def max_order(self):
        return self.f.max_order

    def jet_of(self, xs, split):
        return self.f.jet_of(xs, split) * self.c

    def expr(self):
        return f"scale({_num(self.c)},{self.f.expr()})"


@dataclass(frozen=True)
class Product(TestFunction):
    factors: tuple[TestFunction, ...]

    @property
    def support(self):
        return tuple(b for f in self.factors for b in f.support)

    @property
    def max_order(self):
        return min(f.max_order for f in self.factors)

    def jet_of(self, xs, split):
        space, npts = xs[0].space, xs[0].npts
        pts = np.column_stack([x.value for x in xs])
        sel = support_mask(self.support, pts, split)
        if not sel.any():
            return Jet.constant(space, 0.0, npts)
        sub = _subset(xs, sel)
        acc = self.factors[0].jet_of(sub, split)
        for f in self.factors[1:]:
            acc = acc * f.jet_of(sub, split)
        return _scatter(space, npts, sel, acc)

    def expr(self):
        return "*".join(
            f"({f.expr()})" if isinstance(f, Product) else f.expr() for f in self.factors
        )


def _enclosing_ball(support: Support) -> Ball | None:
    balls = [b for b in support if isinstance(b, Ball)]
    if not balls:
        return None
    return min(balls, key=lambda b: b.radius)


@dataclass(frozen=True)
class Sum(TestFunction):
    """Pointwise sum; the support is one ball enclosing every term's ball."""

    terms: tuple[TestFunction, ...]

    @property
    def support(self):
        balls = [_enclosing_ball(t.support) for t in self.terms]
        if any(b is None for b in balls):
            return ()
        n = max(len(b.center) for b in balls)
        cs = [_pad(b.center, n) for b in balls]
        c = np.mean(cs, axis=0)
        rad = max(float(np.linalg.norm(ci - c)) + b.radius for ci, b in zip(cs, balls))
        return (Ball(tuple(float(x) for x in c), rad),)

    @property
    def max_order(self):
        return min(t.max_order for t in self.terms)

    def jet_of(self, xs, split):
        acc = self.terms[0].jet_of(xs, split)
        for t in self.terms[1:]:
            acc = acc + t.jet_of(xs, split)
        return acc

    def expr(self):
        return "sum(" + ",".join(t.expr() for t in self.terms) + ")"


@dataclass(frozen=True)
class Localizer(TestFunction):
    """The partition function phi_j of a domain (not available in expressions)."""

    j: int
    domain: "DomainSpec"

    @property
    def support(self):
        if self.domain.kind.value == "PolyhedralCone":
            return ()
        return (Band(*partition_band(self.j)),)

    def jet_of(self, xs, split):
        return partition_jet_of(self.domain, self.j, xs)

    def expr(self):
        return f"phi(j={self.j})"


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def _factors(u: TestFunction) -> list[TestFunction]:
    return list(u.factors) if isinstance(u, Product) else [u]


def multiply(u: TestFunction, v: TestFunction) -> TestFunction:
    """Product with normalization: powers of rho merge, unit constants drop."""
    coef = 1.0
    b_total = None
    rest: list[TestFunction] = []
    for f in _factors(u) + _factors(v):
        if isinstance(f, Constant):
            coef *= f.c
        elif isinstance(f, RhoPower):
            b_total = f.b if b_total is None else b_total + f.b
        else:
            rest.append(f)
    if b_total is not None:
        rest.insert(0, RhoPower(b_total))
    if not rest:
        return Constant(coef)
    core = rest[0] if len(rest) == 1 else Product(tuple(rest))
    return core if coef == 1.0 else Scale(coef, core)


def dilate(tf: TestFunction, lam: float) -> TestFunction:
    """x -> tf(lam * x); nested dilations collapse."""
    if not lam > 0:
        raise InvalidParams("dilation factor must be positive", field="lam")
    if isinstance(tf, Dilate):
        return Dilate(tf.lam * lam, tf.f)
    return Dilate(float(lam), tf)


def translate(tf: TestFunction, shift: Sequence[float]) -> TestFunction:
    return Translate(tuple(float(s) for s in shift), tf)


def jet(tf: TestFunction, points, order: int, split: int = 0) -> Jet:
    """Jets of ``tf`` at a batch of points (rows)."""
    if order > tf.max_order:
        raise OrderExceeded(f"order {order} exceeds the supported {tf.max_order}", field="order")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return tf.jet_of(Jet.coordinates(pts, order), split)


def evaluate(tf: TestFunction, points, split: int = 0) -> np.ndarray:
    return jet(tf, points, 0, split).value


def eval_derivative(tf: TestFunction, alpha: Sequence[int], x, split: int = 0) -> float:
    """Exact partial derivative d^alpha tf at a single point."""
    alpha = tuple(int(a) for a in alpha)
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if len(alpha) != pts.shape[1]:
        raise InvalidParams("multi-index length differs from the dimension", field="alpha")
    return float(jet(tf, pts, sum(alpha), split).derivative(alpha)[0])


# ---------------------------------------------------------------------------
# expression parser
# ---------------------------------------------------------------------------

_FAMILIES = {
    "const": (Constant, {"c": "c"}),
    "rho_pow": (RhoPower, {"b": "b"}),
    "f_alpha": (FAlpha, {"a": "alpha", "alpha": "alpha", "x0": "x0"}),
    "bump": (Bump, {"r": "radius", "c": "center"}),
    "psi": (CutoffPsi, {}),
}


def _literal(node: ast.AST, src: str):
    try:
        val = ast.literal_eval(node)
    except ValueError as exc:
        raise InvalidParams(f"expected a number or list in {src!r}", field="func") from exc
    if isinstance(val, (list, tuple)):
        return tuple(float(x) for x in val)
    return float(val)


def _build(node: ast.AST, src: str) -> TestFunction:
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult):
        return multiply(_build(node.left, src), _build(node.right, src))
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
        n = _literal(node.right, src)
        if not float(n).is_integer() or n < 1:
            raise InvalidParams("only positive integer powers are supported", field="func")
        base = _build(node.left, src)
        out = base
        for _ in range(int(n) - 1):
            out = multiply(out, base)
        return out
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return multiply(Constant(-1.0), _build(node.operand, src))
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return Constant(float(node.value))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
        name = node.func.id
        args = node.args
        if name in ("dilate", "translate", "scale"):
            if len(args) != 2 or node.keywords:
                raise InvalidParams(f"{name} takes two positional arguments", field="func")
            p = _literal(args[0], src)
            inner = _build(args[1], src)
            if name == "dilate":
                return dilate(inner, p)
            if name == "translate":
                return translate(inner, p)
            return multiply(Constant(p), inner)
        if name not in _FAMILIES:
            raise InvalidParams(f"unknown function {name!r}", field="func")
        cls, names = _FAMILIES[name]
        if args:
            raise InvalidParams(f"{name} takes keyword arguments only", field="func")
        kw = {}
        for k in node.keywords:
            if k.arg not in names:
                raise InvalidParams(f"{name} has no argument {k.arg!r}", field="func")
            kw[names[k.arg]] = _literal(k.value, src)
        if cls is RhoPower and "b" not in kw:
            raise InvalidParams("rho_pow needs b", field="func")
        if cls is FAlpha and "alpha" not in kw:
            raise InvalidParams("f_alpha needs a", field="func")
        return cls(**kw)
    raise InvalidParams(f"cannot parse {ast.unparse(node)!r}", field="func")


def parse_expr(text: str) -> TestFunction:
    """Parse the textual function syntax described in the module docstring."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise InvalidParams(f"malformed function expression: {exc.msg}", field="func") from exc
    return _build(tree.body, text)


__all__ = [
    "Ball",
    "Band",
    "Bump",
    "Constant",
    "CutoffPsi",
    "Dilate",
    "FAlpha",
    "Localizer",
    "MAX_ORDER",
    "Product",
    "RhoPower",
    "Scale",
    "Sum",
    "TestFunction",
    "Translate",
    "dilate",
    "eval_derivative",
    "evaluate",
    "jet",
    "multiply",
    "parse_expr",
    "support_mask",
    "translate",
]
