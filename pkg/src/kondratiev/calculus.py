"""Exact decision engine for embeddings, compactness, algebra and products.

Every threshold is compared in :class:`fractions.Fraction` arithmetic.  The
integrability ``p`` is either a rational ``>= 1`` or :data:`INF`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Sequence, Union

from .errors import DegeneratePolygon, InvalidParams, MixedIntegrability

INF = math.inf
Integrability = Union[Fraction, float]


# ---------------------------------------------------------------------------
# rationals
# ---------------------------------------------------------------------------

def as_rational(value: Any, name: str = "value") -> Fraction:
    """Convert ints, ``"3/2"``, decimal strings or floats to an exact Fraction.

    Decimal strings are read exactly (``"1.4" -> 7/5``).  Floats go through their
    shortest repr, so ``1.4`` also becomes ``7/5``.
    """
    if isinstance(value, bool):
        raise InvalidParams(f"{name}: boolean is not a number", field=name)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise InvalidParams(f"{name}: must be finite", field=name)
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidParams(f"{name}: must be finite", field=name)
        return Fraction(repr(value))
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidParams(f"{name}: cannot parse {value!r} as a rational", field=name) from exc
    raise InvalidParams(f"{name}: unsupported type {type(value).__name__}", field=name)


def as_integrability(value: Any, name: str = "p") -> Integrability:
    if isinstance(value, str) and value.strip().lower() in {"inf", "infinity", "oo"}:
        return INF
    if isinstance(value, float) and math.isinf(value) and value > 0:
        return INF
    p = as_rational(value, name)
    if p < 1:
        raise InvalidParams(f"{name} must be >= 1 or inf, got {p}", field=name)
    return p


def recip(p: Integrability) -> Fraction:
    """Exact ``1/p`` with ``1/inf = 0``."""
    return Fraction(0) if p == INF else 1 / Fraction(p)


def fmt_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def fmt_integrability(p: Integrability) -> str:
    return "inf" if p == INF else fmt_rational(Fraction(p))


def _show(x: Any) -> str:
    if x == INF:
        return "inf"
    if isinstance(x, Fraction):
        return str(x)
    return str(x)


# ---------------------------------------------------------------------------
# parameter types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpaceParams:
    """The triple (m, a, p) naming a weighted space."""

    m: int
    a: Fraction
    p: Integrability

    def __post_init__(self) -> None:
        m = self.m
        if isinstance(m, bool) or not isinstance(m, (int, Fraction)) or int(m) != m:
            raise InvalidParams(f"m must be a nonnegative integer, got {m!r}", field="m")
        if m < 0:
            raise InvalidParams(f"m must be >= 0, got {m}", field="m")
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "a", as_rational(self.a, "a"))
        object.__setattr__(self, "p", as_integrability(self.p, "p"))

    @property
    def inv_p(self) -> Fraction:
        return recip(self.p)

    def to_dict(self) -> dict[str, Any]:
        return {"m": self.m, "a": fmt_rational(self.a), "p": fmt_integrability(self.p)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SpaceParams":
        extra = set(data) - {"m", "a", "p", "q"}
        if extra:
            raise InvalidParams(f"unknown space keys: {sorted(extra)}", field=sorted(extra)[0])
        if "p" in data and "q" in data:
            raise InvalidParams("give p or q, not both", field="q")
        try:
            p = data["p"] if "p" in data else data["q"]
            return cls(m=int(as_rational(data["m"], "m")), a=data["a"], p=p)
        except KeyError as exc:
            raise InvalidParams(f"missing space key {exc.args[0]!r}", field=str(exc.args[0])) from exc

    @classmethod
    def parse(cls, text: str) -> "SpaceParams":
        """Parse ``"m=2,a=1,p=2"`` (``q`` is accepted as an alias of ``p``)."""
        fields: dict[str, str] = {}
        for part in text.split(","):
            if not part.strip():
                continue
            if "=" not in part:
                raise InvalidParams(f"expected key=value, got {part!r}")
            key, val = part.split("=", 1)
            fields[key.strip()] = val.strip()
        m = fields.get("m")
        if m is None:
            raise InvalidParams("missing m", field="m")
        mq = as_rational(m, "m")
        if mq.denominator != 1:
            raise InvalidParams(f"m must be an integer, got {m}", field="m")
        fields["m"] = int(mq)  # type: ignore[assignment]
        return cls.from_dict(fields)

    def __str__(self) -> str:
        return f"(m={self.m}, a={self.a}, p={_show(self.p)})"


class DomainKind(str, Enum):
    MODEL = "ModelCase"
    SMOOTH_CONE = "SmoothCone"
    NONSMOOTH_CONE = "NonsmoothCone"
    DIHEDRAL_CUBE = "DihedralCube"
    POLYHEDRAL_CONE = "PolyhedralCone"


_KIND_ALIASES = {
    "model": DomainKind.MODEL,
    "modelcase": DomainKind.MODEL,
    "smooth": DomainKind.SMOOTH_CONE,
    "smooth-cone": DomainKind.SMOOTH_CONE,
    "smoothcone": DomainKind.SMOOTH_CONE,
    "nonsmooth": DomainKind.NONSMOOTH_CONE,
    "nonsmooth-cone": DomainKind.NONSMOOTH_CONE,
    "nonsmoothcone": DomainKind.NONSMOOTH_CONE,
    "dihedral": DomainKind.DIHEDRAL_CUBE,
    "dihedral-cube": DomainKind.DIHEDRAL_CUBE,
    "dihedralcube": DomainKind.DIHEDRAL_CUBE,
    "polyhedral-cone": DomainKind.POLYHEDRAL_CONE,
    "polyhedralcone": DomainKind.POLYHEDRAL_CONE,
    "polyhedral": DomainKind.POLYHEDRAL_CONE,
}


def parse_kind(value: Any) -> DomainKind:
    if isinstance(value, DomainKind):
        return value
    text = str(value).strip()
    for kind in DomainKind:
        if text == kind.value:
            return kind
    try:
        return _KIND_ALIASES[text.lower().replace("_", "-")]
    except KeyError:
        raise InvalidParams(f"unknown domain kind {value!r}", field="kind") from None


def _polygon_area2(vertices: Sequence[tuple[float, float]]) -> float:
    n = len(vertices)
    return sum(
        vertices[i][0] * vertices[(i + 1) % n][1] - vertices[(i + 1) % n][0] * vertices[i][1]
        for i in range(n)
    )


@dataclass(frozen=True)
class DomainSpec:
    """A model pair (D, M).

    ``edges`` holds the polygon cut out of the plane ``x_3 = 1`` by a polyhedral
    cone; vertex ``(u, v)`` is the edge direction ``(u, v, 1)``.
    """

    kind: DomainKind
    d: int
    l: int = 0
    gamma: float | None = None
    edges: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self) -> None:
        kind = parse_kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if isinstance(self.d, bool) or int(self.d) != self.d or self.d < 2:
            raise InvalidParams(f"d must be an integer >= 2, got {self.d!r}", field="d")
        object.__setattr__(self, "d", int(self.d))
        d = self.d
        if kind in (DomainKind.MODEL, DomainKind.DIHEDRAL_CUBE):
            if int(self.l) != self.l:
                raise InvalidParams("l must be an integer", field="l")
            lo = 0 if kind is DomainKind.MODEL else 1
            if not lo <= self.l < d:
                raise InvalidParams(f"l must satisfy {lo} <= l < d, got l={self.l}", field="l")
            object.__setattr__(self, "l", int(self.l))
        elif self.l not in (0, None):
            raise InvalidParams(f"l is not used by {kind.value}", field="l")
        else:
            object.__setattr__(self, "l", 0)
        if kind in (DomainKind.SMOOTH_CONE, DomainKind.NONSMOOTH_CONE):
            if self.gamma is None:
                raise InvalidParams(f"{kind.value} needs an opening angle gamma", field="gamma")
            g = float(self.gamma)
            if not 0.0 < g < math.pi:
                raise InvalidParams(f"gamma must lie in (0, pi), got {g}", field="gamma")
            object.__setattr__(self, "gamma", g)
        elif self.gamma is not None:
            raise InvalidParams(f"gamma is not used by {kind.value}", field="gamma")
        if kind is DomainKind.POLYHEDRAL_CONE:
            if d != 3:
                raise InvalidParams("polyhedral cones live in d = 3", field="d")
            object.__setattr__(self, "edges", _normalize_polygon(self.edges))
        elif self.edges is not None:
            raise InvalidParams(f"edges are not used by {kind.value}", field="edges")

    # constructors -----------------------------------------------------
    @classmethod
    def model(cls, d: int, l: int = 0) -> "DomainSpec":
        return cls(DomainKind.MODEL, d, l)

    @classmethod
    def smooth_cone(cls, d: int, gamma: float = math.pi / 4) -> "DomainSpec":
        return cls(DomainKind.SMOOTH_CONE, d, gamma=gamma)

    @classmethod
    def nonsmooth_cone(cls, d: int, gamma: float = math.pi / 4) -> "DomainSpec":
        return cls(DomainKind.NONSMOOTH_CONE, d, gamma=gamma)

    @classmethod
    def dihedral_cube(cls, d: int, l: int) -> "DomainSpec":
        return cls(DomainKind.DIHEDRAL_CUBE, d, l)

    @classmethod
    def polyhedral_cone(cls, vertices: Iterable[Sequence[float]]) -> "DomainSpec":
        return cls(DomainKind.POLYHEDRAL_CONE, 3, edges=tuple(tuple(v) for v in vertices))

    @classmethod
    def polyhedral_from_angles(cls, angles: Iterable[float], radius: float = 0.5) -> "DomainSpec":
        """Edges through the circle of ``radius`` in the plane x_3 = 1 at polar ``angles``."""
        verts = [(radius * math.cos(t), radius * math.sin(t)) for t in angles]
        return cls.polyhedral_cone(verts)

    # views ------------------------------------------------------------
    @property
    def split(self) -> int:
        """Number of trailing coordinates not entering the distance to M."""
        if self.kind in (DomainKind.MODEL, DomainKind.DIHEDRAL_CUBE):
            return self.l
        if self.kind is DomainKind.NONSMOOTH_CONE:
            return 1
        return 0

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind.value, "d": self.d}
        if self.kind in (DomainKind.MODEL, DomainKind.DIHEDRAL_CUBE):
            out["l"] = self.l
        if self.gamma is not None:
            out["gamma"] = self.gamma
        if self.edges is not None:
            out["edges"] = [list(v) for v in self.edges]
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DomainSpec":
        extra = set(data) - {"kind", "d", "l", "gamma", "edges"}
        if extra:
            raise InvalidParams(f"unknown domain keys: {sorted(extra)}", field=sorted(extra)[0])
        if "kind" not in data or "d" not in data:
            raise InvalidParams("domain needs kind and d", field="kind")
        kind = parse_kind(data["kind"])
        edges = data.get("edges")
        if edges is not None and kind is DomainKind.POLYHEDRAL_CONE:
            if all(isinstance(e, (int, float, str)) for e in edges):
                return cls.polyhedral_from_angles([float(as_rational(e, "edges")) for e in edges])
            edges = tuple(tuple(float(c) for c in e) for e in edges)
        gamma = data.get("gamma")
        if isinstance(gamma, str):
            gamma = float(as_rational(gamma, "gamma"))
        return cls(kind, data["d"], data.get("l", 0) or 0, gamma, edges)


def _normalize_polygon(edges: Any) -> tuple[tuple[float, float], ...]:
    if edges is None:
        raise DegeneratePolygon("polyhedral cone needs edges", field="edges")
    verts = [tuple(float(c) for c in v) for v in edges]
    if len(verts) < 3 or any(len(v) != 2 for v in verts):
        raise DegeneratePolygon("need at least 3 planar vertices", field="edges")
    cx = sum(v[0] for v in verts) / len(verts)
    cy = sum(v[1] for v in verts) / len(verts)
    verts.sort(key=lambda v: math.atan2(v[1] - cy, v[0] - cx))
    n = len(verts)
    scale = max(math.hypot(*v) for v in verts) or 1.0
    if abs(_polygon_area2(verts)) < 1e-12 * scale * scale:
        raise DegeneratePolygon("polygon has zero area", field="edges")
    for i in range(n):
        (x0, y0), (x1, y1), (x2, y2) = verts[i], verts[(i + 1) % n], verts[(i + 2) % n]
        cross = (x1 - x0) * (y2 - y1) - (y1 - y0) * (x2 - x1)
        if cross <= 1e-14 * scale * scale:
            raise DegeneratePolygon("polygon is not strictly convex", field="edges")
    return tuple(verts)  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------

class Outcome(str, Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class Hypothesis:
    """A single recorded condition ``lhs op rhs`` that can be re-checked."""

    label: str
    lhs: Any
    op: str
    rhs: Any = None

    def holds(self) -> bool:
        x, y = self.lhs, self.rhs
        if self.op == "<":
            return x < y
        if self.op == "<=":
            return x <= y
        if self.op == ">":
            return x > y
        if self.op == ">=":
            return x >= y
        if self.op == "==":
            return x == y
        if self.op == "!=":
            return x != y
        if self.op == "integer":
            return x != INF and Fraction(x).denominator == 1
        raise ValueError(f"unknown operator {self.op}")

    def describe(self) -> str:
        if self.op == "integer":
            return f"{self.label}: {_show(self.lhs)} is an integer"
        return f"{self.label}: {_show(self.lhs)} {self.op} {_show(self.rhs)}"

    def to_dict(self) -> dict[str, Any]:
        return {"condition": self.describe(), "holds": self.holds()}


def _all(hyps: Sequence[Hypothesis]) -> bool:
    return all(h.holds() for h in hyps)


def _first_failure(hyps: Sequence[Hypothesis]) -> Hypothesis | None:
    for h in hyps:
        if not h.holds():
            return h
    return None


def _join(hyps: Sequence[Hypothesis]) -> str:
    return "; ".join(h.describe() for h in hyps)


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    rule: str
    citation: str
    reason: str
    target: SpaceParams | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "outcome": self.outcome.value,
            "rule": self.rule,
            "citation": self.citation,
            "reason": self.reason,
        }
        if self.target is not None:
            out["target"] = self.target.to_dict()
        return out


def _decide(hyps: Sequence[Hypothesis], rule: str, citation: str, iff: bool) -> Verdict:
    bad = _first_failure(hyps)
    if bad is None:
        return Verdict(Outcome.HOLDS, rule, citation, _join(hyps))
    outcome = Outcome.FAILS if iff else Outcome.UNDETERMINED
    note = "" if iff else " (only a sufficient condition is known here)"
    return Verdict(outcome, rule, citation, f"violated {bad.describe()}{note}")


def _scope(reason: str) -> Verdict:
    return Verdict(Outcome.UNDETERMINED, "scope", "outside the hypotheses of every implemented rule", reason)


# ---------------------------------------------------------------------------
# embeddings
# ---------------------------------------------------------------------------

def _check_src(src: SpaceParams) -> None:
    if src.m < 1:
        raise InvalidParams(f"source smoothness must be >= 1, got m={src.m}", field="src.m")


def embed_continuous(src: SpaceParams, tgt: SpaceParams, dom: DomainSpec) -> Verdict:
    """Decide whether K^m_{a,p} embeds continuously into K^{m'}_{a',q}."""
    _check_src(src)
    d = Fraction(dom.d)
    p, q = src.p, tgt.p
    if p == INF:
        return _scope("p = inf: no continuous embedding rule covers an L_inf source")
    if q != INF and p > q:
        return _scope(f"p = {_show(p)} > q = {_show(q)}")
    ip, iq = recip(p), recip(q)
    if q == INF:
        if p == 1:
            hyps = [
                Hypothesis("m-d >= m'", src.m - d, ">=", Fraction(tgt.m)),
                Hypothesis("a-d >= a'", src.a - d, ">=", tgt.a),
            ]
            return _decide(hyps, "Thm-3.4(ii)", "embedding into q = inf, p = 1", iff=True)
        hyps = [
            Hypothesis("m-d/p > m'", src.m - d * ip, ">", Fraction(tgt.m)),
            Hypothesis("a-d/p >= a'", src.a - d * ip, ">=", tgt.a),
        ]
        return _decide(hyps, "Thm-3.4(i)", "embedding into q = inf, 1 < p < inf", iff=True)
    hyps = [
        Hypothesis("m-d/p >= m'-d/q", src.m - d * ip, ">=", tgt.m - d * iq),
        Hypothesis("a-d/p >= a'-d/q", src.a - d * ip, ">=", tgt.a - d * iq),
    ]
    return _decide(hyps, "Thm-3.3", "continuous embedding, 1 <= p <= q < inf", iff=True)


def embed_compact(src: SpaceParams, tgt: SpaceParams, dom: DomainSpec) -> Verdict:
    """Decide whether the embedding is compact (both inequalities strict)."""
    _check_src(src)
    d = Fraction(dom.d)
    p, q = src.p, tgt.p
    if p == INF:
        return _scope("p = inf: no continuous embedding rule covers an L_inf source")
    if q != INF and p > q:
        return _scope(f"p = {_show(p)} > q = {_show(q)}")
    if dom.kind is DomainKind.MODEL:
        return _scope("compactness is only decided on bounded model domains")
    ip, iq = recip(p), recip(q)
    hyps = [
        Hypothesis("m-d/p > m'-d/q", src.m - d * ip, ">", tgt.m - d * iq),
        Hypothesis("a-d/p > a'-d/q", src.a - d * ip, ">", tgt.a - d * iq),
    ]
    return _decide(hyps, "Thm-4.1", "compact embedding, strict inequalities", iff=True)


# ---------------------------------------------------------------------------
# algebra property
# ---------------------------------------------------------------------------

def _algebra_hyps(m: int, p: Integrability, d: Fraction, prefix: str = "") -> list[Hypothesis]:
    if p == 1:
        return [Hypothesis(f"{prefix}p = 1", Fraction(p), "==", Fraction(1)),
                Hypothesis(f"{prefix}m >= d", Fraction(m), ">=", d)]
    return [Hypothesis(f"{prefix}p > 1", p, ">", Fraction(1)),
            Hypothesis(f"{prefix}m > d/p", Fraction(m), ">", d * recip(p))]


def is_algebra(sp: SpaceParams, dom: DomainSpec) -> Verdict:
    """Decide closedness of K^m_{a,p}(D, M) under pointwise multiplication."""
    if sp.p == INF:
        raise InvalidParams("algebra rules need p < inf", field="p")
    d = Fraction(dom.d)
    hyps = [Hypothesis("a >= d/p", sp.a, ">=", d * sp.inv_p)] + _algebra_hyps(sp.m, sp.p, d)
    if dom.kind is DomainKind.MODEL:
        if dom.l == 0:
            return _decide(hyps, "Cor-5.2(ii)", "algebra on the punctured space, iff", iff=True)
        return _decide(hyps, "Cor-5.2(i)", "algebra on the model pair, sufficient", iff=False)
    if dom.kind is DomainKind.SMOOTH_CONE:
        return _decide(hyps, "Cor-5.16", "algebra on smooth cones, iff", iff=True)
    return _decide(hyps, "Thm-5.15", "transfer of sufficient product conditions", iff=False)


# ---------------------------------------------------------------------------
# products and powers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductEntry:
    rule: str
    citation: str
    target: SpaceParams
    hypotheses: tuple[Hypothesis, ...]
    open_bound: bool = False
    side_condition: str | None = None

    def verify(self) -> bool:
        return _all(self.hypotheses)

    @property
    def conditional(self) -> bool:
        return self.side_condition is not None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "rule": self.rule,
            "citation": self.citation,
            "target": self.target.to_dict(),
            "hypotheses": [h.to_dict() for h in self.hypotheses],
        }
        if self.open_bound:
            out["target_a_bound"] = "exclusive"
        if self.side_condition:
            out["side_condition"] = self.side_condition
        return out


@dataclass(frozen=True)
class ProductResult:
    applicable: tuple[ProductEntry, ...]
    best: ProductEntry | None

    def to_dict(self) -> dict[str, Any]:
        return {
            "applicable": [e.to_dict() for e in self.applicable],
            "best": None if self.best is None else self.best.to_dict(),
        }


def dominates(s: SpaceParams, t: SpaceParams, d: int, s_open: bool = False) -> bool:
    """True when the space ``s`` embeds into ``t`` (monotonicity or the p <= q rules).

    With ``s_open`` the weight of ``s`` is an exclusive supremum, so weight
    comparisons become strict.
    """
    dq = Fraction(d)

    def a_ok(x: Fraction, y: Fraction) -> bool:
        return x > y if s_open else x >= y

    if s.p == t.p:
        return s.m >= t.m and a_ok(s.a, t.a)
    if s.p == INF or (t.p != INF and s.p > t.p) or s.m < 1:
        return False
    ip, iq = s.inv_p, t.inv_p
    if t.p == INF and s.p == 1:
        return s.m - dq >= t.m and a_ok(s.a - dq, t.a)
    if t.p == INF:
        return s.m - dq * ip > t.m and a_ok(s.a - dq * ip, t.a)
    return s.m - dq * ip >= t.m - dq * iq and a_ok(s.a - dq * ip, t.a - dq * iq)


def _pick_best(entries: Sequence[ProductEntry], d: int) -> ProductEntry | None:
    pool = [e for e in entries if not e.conditional]
    if not pool:
        return None
    dq = Fraction(d)

    def score(e: ProductEntry) -> tuple:
        # rules that reach the same target must not count as wins over each other
        others = {(o.target, o.open_bound) for o in pool} - {(e.target, e.open_bound)}
        wins = sum(dominates(e.target, t, d, e.open_bound) for t, _ in others)
        ip = e.target.inv_p
        return (wins, e.target.m - dq * ip, e.target.a - dq * ip)

    return max(pool, key=score)


def _dedupe(entries: Iterable[ProductEntry]) -> tuple[ProductEntry, ...]:
    seen: set = set()
    out = []
    for e in entries:
        key = (e.rule, e.target, e.open_bound, e.side_condition)
        if key not in seen:
            seen.add(key)
            out.append(e)
    return tuple(out)


def _floor(x: Fraction) -> int:
    return math.floor(x)


def _same_p_entries(u: SpaceParams, v: SpaceParams, d: Fraction) -> list[ProductEntry]:
    p = u.p
    ip = recip(p)
    dp = d * ip
    m = min(u.m, v.m)
    a0 = min(u.a, v.a)
    out: list[ProductEntry] = []
    base = [Hypothesis("p < inf", p, "<", INF)]

    # algebra-grade smoothness: bilinear estimate with the shifted weight
    hyps = base + [Hypothesis("min(m1,m2) >= 1", Fraction(m), ">=", Fraction(1))] + _algebra_hyps(m, p, d)
    if _all(hyps):
        out.append(ProductEntry("Thm-5.1", "product with weight 2a-d/p",
                                SpaceParams(m, 2 * a0 - dp, p), tuple(hyps)))
        out.append(ProductEntry("Cor-5.3", "product with weight a1+a2-d/p",
                                SpaceParams(m, u.a + v.a - dp, p), tuple(hyps)))

    # low smoothness: loss of derivatives
    hyps = base + [
        Hypothesis("p > 1", p, ">", Fraction(1)),
        Hypothesis("m0 >= 1", Fraction(m), ">=", Fraction(1)),
        Hypothesis("m0 >= d/(2p)", Fraction(m), ">=", dp / 2),
        Hypothesis("m0 < d/p", Fraction(m), "<", dp),
    ]
    if _all(hyps):
        m1 = _floor(2 * m - dp)
        hyps.append(Hypothesis("m1 <= 2 m0 - d/p", Fraction(m1), "<=", 2 * m - dp))
        out.append(ProductEntry("Thm-5.5", "product below the algebra threshold, smoothness loss",
                                SpaceParams(m1, 2 * (a0 - dp / 2), p), tuple(hyps)))

    hyps = base + [
        Hypothesis("p > 1", p, ">", Fraction(1)),
        Hypothesis("m0 >= 1", Fraction(u.m), ">=", Fraction(1)),
        Hypothesis("m1 >= 1", Fraction(v.m), ">=", Fraction(1)),
        Hypothesis("d/p <= m0 + m1", dp, "<=", Fraction(u.m + v.m)),
        Hypothesis("m0 < d/p", Fraction(u.m), "<", dp),
        Hypothesis("m1 < d/p", Fraction(v.m), "<", dp),
    ]
    if _all(hyps):
        m2 = _floor(u.m + v.m - dp)
        hyps.append(Hypothesis("m2 <= m0 + m1 - d/p", Fraction(m2), "<=", u.m + v.m - dp))
        out.append(ProductEntry("Prop-5.7", "product of two low-smoothness factors",
                                SpaceParams(m2, u.a + v.a - dp, p), tuple(hyps)))

    hyps = base + [
        Hypothesis("p > 1", p, ">", Fraction(1)),
        Hypothesis("m >= 1", Fraction(m), ">=", Fraction(1)),
        Hypothesis("2d(1/p - 1/2) < m", 2 * d * (ip - Fraction(1, 2)), "<", Fraction(m)),
        Hypothesis("m < d/p", Fraction(m), "<", dp),
    ]
    if _all(hyps):
        t = d / (2 * dp - m)
        out.append(ProductEntry("Thm-5.8", "product with shifted integrability t = d/(2d/p - m)",
                                SpaceParams(m, 2 * a0 - m, t), tuple(hyps), open_bound=True))

    hyps = base + [
        Hypothesis("p > 1", p, ">", Fraction(1)),
        Hypothesis("m >= 1", Fraction(m), ">=", Fraction(1)),
    ]
    if _all(hyps):
        out.append(ProductEntry("Thm-5.10", "Moser-type estimate",
                                SpaceParams(m, a0, p), tuple(hyps),
                                side_condition="both factors bounded (L_inf)"))

    for name, fac, mul in (("u", u, v), ("v", v, u)):
        hyps = base + [
            Hypothesis(f"m({name}) >= 1", Fraction(fac.m), ">=", Fraction(1)),
            Hypothesis("multiplier m >= factor m", Fraction(mul.m), ">=", Fraction(fac.m)),
        ]
        if _all(hyps):
            out.append(ProductEntry("Prop-5.12", "bounded multiplier",
                                    SpaceParams(fac.m, fac.a, p), tuple(hyps),
                                    side_condition=f"multiplier in K^{fac.m}_(0,inf)"))
        for n in range(1, mul.m - fac.m + 1):
            hyps = base + [
                Hypothesis(f"m({name}) >= 1", Fraction(fac.m), ">=", Fraction(1)),
                Hypothesis("multiplier m >= m + n", Fraction(mul.m), ">=", Fraction(fac.m + n)),
                Hypothesis("multiplier a >= a + n", mul.a, ">=", fac.a + n),
            ]
            if p == 1:
                hyps += [Hypothesis("p = 1", Fraction(p), "==", Fraction(1)),
                         Hypothesis("n >= d", Fraction(n), ">=", d),
                         Hypothesis("a >= d - n", fac.a, ">=", d - n)]
            else:
                hyps += [Hypothesis("p > max(1, d/n)", Fraction(p), ">", max(Fraction(1), d / n)),
                         Hypothesis("a >= d/p - n", fac.a, ">=", dp - n)]
            if _all(hyps):
                out.append(ProductEntry("Cor-5.14", f"multiplier with n = {n} extra derivatives",
                                        SpaceParams(fac.m, fac.a, p), tuple(hyps)))
                break
    return out


def product_target(u: SpaceParams, v: SpaceParams, dom: DomainSpec) -> ProductResult:
    """Enumerate every product rule whose hypotheses hold, with its target space."""
    d = Fraction(dom.d)
    if u.p == v.p:
        entries: list[ProductEntry] = _same_p_entries(u, v, d) if u.p != INF else []
    else:
        entries = []
        for fac, mul in ((u, v), (v, u)):
            if mul.p != INF:
                continue
            hyps = [
                Hypothesis("p < inf", fac.p, "<", INF),
                Hypothesis("m >= 1", Fraction(fac.m), ">=", Fraction(1)),
                Hypothesis("multiplier m >= m", Fraction(mul.m), ">=", Fraction(fac.m)),
                Hypothesis("multiplier a >= 0", mul.a, ">=", Fraction(0)),
            ]
            if _all(hyps):
                entries.append(ProductEntry("Prop-5.12", "multiplier from K^m_(0,inf)",
                                            SpaceParams(fac.m, fac.a, fac.p), tuple(hyps)))
        if not entries:
            raise MixedIntegrability(
                f"factors have p = {_show(u.p)} and p = {_show(v.p)}; no mixed-integrability rule applies",
                field="p",
            )
    entries_t = _dedupe(entries)
    return ProductResult(entries_t, _pick_best(entries_t, dom.d))


def power_target(sp: SpaceParams, n: int, dom: DomainSpec) -> ProductResult:
    """Target spaces for ``u**n`` with ``u`` in K^m_{a,p}."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidParams(f"n must be an integer >= 1, got {n!r}", field="n")
    n = int(n)
    if n == 1:
        e = ProductEntry("identity", "first power", sp, (Hypothesis("n = 1", n, "==", 1),))
        return ProductResult((e,), e)
    d = Fraction(dom.d)
    p, m, a = sp.p, sp.m, sp.a
    out: list[ProductEntry] = []
    if p != INF:
        dp = d * sp.inv_p
        hyps = [Hypothesis("n >= 2", n, ">=", 2), Hypothesis("m >= 1", Fraction(m), ">=", Fraction(1))]
        hyps += _algebra_hyps(m, p, d)
        if _all(hyps):
            out.append(ProductEntry("Cor-5.9(i)", "powers in the algebra regime",
                                    SpaceParams(m, n * a - (n - 1) * dp, p), tuple(hyps)))
        if n == 2:
            hyps = [
                Hypothesis("p > 1", p, ">", Fraction(1)),
                Hypothesis("m >= 1", Fraction(m), ">=", Fraction(1)),
                Hypothesis("m >= d/(2p)", Fraction(m), ">=", dp / 2),
                Hypothesis("m < d/p", Fraction(m), "<", dp),
            ]
            if _all(hyps):
                m1 = _floor(2 * m - dp)
                hyps.append(Hypothesis("m1 <= 2m - d/p", Fraction(m1), "<=", 2 * m - dp))
                out.append(ProductEntry("Cor-5.9(ii)", "square with smoothness loss",
                                        SpaceParams(m1, 2 * a - dp, p), tuple(hyps)))
            hyps = [
                Hypothesis("p > 1", p, ">", Fraction(1)),
                Hypothesis("m >= 1", Fraction(m), ">=", Fraction(1)),
                Hypothesis("2d(1/p - 1/2) < m", 2 * d * (sp.inv_p - Fraction(1, 2)), "<", Fraction(m)),
                Hypothesis("m < d/p", Fraction(m), "<", dp),
            ]
            if _all(hyps):
                t = d / (2 * dp - m)
                out.append(ProductEntry("Cor-5.9(iii)", "square with shifted integrability",
                                        SpaceParams(m, 2 * a - m, t), tuple(hyps), open_bound=True))
        hyps = [
            Hypothesis("p > 1", p, ">", Fraction(1)),
            Hypothesis("d/p integer", dp, "integer"),
            Hypothesis("d/p >= 1", dp, ">=", Fraction(1)),
            Hypothesis("d/p <= d-1", dp, "<=", d - 1),
            Hypothesis("m >= 1", Fraction(m), ">=", Fraction(1)),
            Hypothesis("m < d/p", Fraction(m), "<", dp),
            Hypothesis("(n-1)d/p <= nm", (n - 1) * dp, "<=", Fraction(n * m)),
        ]
        if _all(hyps):
            out.append(ProductEntry("Rem-5.9", "powers by induction when d/p is an integer",
                                    SpaceParams(int(n * m - (n - 1) * dp), n * a - (n - 1) * dp, p),
                                    tuple(hyps)))
    entries = _dedupe(out)
    return ProductResult(entries, _pick_best(entries, dom.d))


# ---------------------------------------------------------------------------
# membership of model functions
# ---------------------------------------------------------------------------

def _kappa(dom: DomainSpec) -> tuple[Fraction, str]:
    k = dom.kind
    if k is DomainKind.SMOOTH_CONE:
        return Fraction(dom.d), "(i)"
    if k is DomainKind.NONSMOOTH_CONE:
        return Fraction(dom.d - 1), "(ii)"
    if k is DomainKind.DIHEDRAL_CUBE:
        return Fraction(dom.d - dom.l), "(iii)"
    if k is DomainKind.POLYHEDRAL_CONE:
        return Fraction(2), "(iv)"
    return Fraction(dom.d - dom.l), ""


def _membership(a: Fraction, p: Integrability, kappa: Fraction, rule: str, citation: str) -> Verdict:
    if p == INF:
        hyp = Hypothesis("a <= 0", a, "<=", Fraction(0))
    else:
        hyp = Hypothesis("a < kappa/p", a, "<", kappa * recip(p))
    return _decide([hyp], rule, citation, iff=True)


def member_constant(sp: SpaceParams, dom: DomainSpec) -> Verdict:
    """Is the constant function 1 in K^m_{a,p}(D, M)?"""
    if dom.kind is DomainKind.MODEL:
        raise InvalidParams("constant membership is only decided on bounded cones and cubes", field="domain")
    kappa, tag = _kappa(dom)
    return _membership(sp.a, sp.p, kappa, f"Lem-6.1{tag}", f"constant function, kappa = {kappa}")


def member_rho_power(b: Any, sp: SpaceParams, dom: DomainSpec) -> Verdict:
    """Is rho~^b (times the cutoff psi in the model case) in K^m_{sp.a, p}?

    ``sp.a`` is the exponent of the queried space; the decision uses ``sp.a - b``.
    """
    bq = as_rational(b, "b")
    a = sp.a - bq
    kappa, tag = _kappa(dom)
    if dom.kind is DomainKind.MODEL:
        return _membership(a, sp.p, kappa, "Lem-6.3", f"regularized distance power times cutoff, kappa = {kappa}")
    return _membership(a, sp.p, kappa, f"Lem-6.2{tag}", f"regularized distance power, kappa = {kappa}")


__all__ = [
    "INF",
    "DomainKind",
    "DomainSpec",
    "Hypothesis",
    "Outcome",
    "ProductEntry",
    "ProductResult",
    "SpaceParams",
    "Verdict",
    "as_integrability",
    "as_rational",
    "dominates",
    "embed_compact",
    "embed_continuous",
    "fmt_rational",
    "is_algebra",
    "member_constant",
    "member_rho_power",
    "power_target",
    "product_target",
    "recip",
]
