"""Kondratiev norms by per-shell quadrature, and a tail-slope membership detector.

Shells here are disjoint in r = dist(x, M): shell j >= 1 covers
[2^(-j), 2^(-j+1)) and shell 0 covers r >= 1, where the weight is 1.  On the
cone-like domains the integral is a tensor rule in (r, direction of x', x''),
so the weight is exactly r at every node and each shell integrand is smooth.
"""

from __future__ import annotations

import io
import json
import math
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np

from ._jets import Jet
from .calculus import DomainKind, DomainSpec, SpaceParams
from .errors import InvalidParams, OrderExceeded, QuadratureFailure
from .geometry import CriticalUnion, contains, distance, sup_distance
from .testfuncs import Ball, Band, TestFunction

#: half-width of the Borderline band of the tail slope, in log2 units per shell
DELTA = 0.05
#: number of trailing shells used for the tail-slope fit
TAIL_WINDOW = 15
PROFILE_ENV = "KONDRATIEV_QUAD_PROFILE"

_CHUNK = 60000


@dataclass(frozen=True)
class QuadSpec:
    """Resolution of the per-shell tensor quadrature."""

    radial_panels: int = 2
    angular_order: int = 8
    j_max: int = 36
    target_rel_error: float = 1e-6
    gauss_order: int = 10

    def __post_init__(self):
        if self.j_max < 8:
            raise InvalidParams("j_max must be at least 8", field="j_max")
        if not 0 < self.target_rel_error <= 1e-4:
            raise InvalidParams("target_rel_error must lie in (0, 1e-4]", field="target_rel_error")
        if self.radial_panels < 1 or self.angular_order < 2 or self.gauss_order < 2:
            raise InvalidParams("quadrature orders must be positive", field="angular_order")

    def refined(self) -> "QuadSpec":
        return replace(self, radial_panels=2 * self.radial_panels, angular_order=2 * self.angular_order)

    def to_dict(self) -> dict:
        return {
            "radial_panels": self.radial_panels,
            "angular_order": self.angular_order,
            "j_max": self.j_max,
            "target_rel_error": self.target_rel_error,
            "gauss_order": self.gauss_order,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QuadSpec":
        unknown = set(data) - set(cls().to_dict())
        if unknown:
            raise InvalidParams(f"unknown quadrature keys {sorted(unknown)}", field=sorted(unknown)[0])
        return cls(**data)

    @classmethod
    def profile(cls, name: str | None = None) -> "QuadSpec":
        """Named presets; the default comes from the KONDRATIEV_QUAD_PROFILE variable."""
        name = name or os.environ.get(PROFILE_ENV, "default")
        presets = {
            "fast": cls(radial_panels=1, angular_order=6, gauss_order=8, target_rel_error=1e-4),
            "default": cls(),
            "accurate": cls(radial_panels=4, angular_order=16, target_rel_error=1e-8),
        }
        if name not in presets:
            raise InvalidParams(f"unknown quadrature profile {name!r}", field=PROFILE_ENV)
        return presets[name]


class Membership(str, Enum):
    CONVERGENT = "Convergent"
    DIVERGENT = "Divergent"
    BORDERLINE = "Borderline"


@dataclass
class ShellSeries:
    """Per-shell p-th power contributions s_j for j = j_start, ..., j_max."""

    j_start: int
    s: list[float]
    p: float
    tail_slope: float
    converged: bool
    tail: float = 0.0

    @property
    def total(self) -> float:
        if self.p == math.inf:
            return max(self.s, default=0.0)
        return float(sum(self.s)) + self.tail

    def indices(self) -> range:
        return range(self.j_start, self.j_start + len(self.s))

    def to_dict(self) -> dict:
        return {
            "j_start": self.j_start,
            "s_j": self.s,
            "total": self.total,
            "tail": self.tail,
            "tail_slope": self.tail_slope,
            "converged": self.converged,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("j,s_j\n")
        for j, v in zip(self.indices(), self.s):
            buf.write(f"{j},{v!r}\n")
        return buf.getvalue()


@dataclass
class NormResult:
    value: float
    series: ShellSeries
    est_rel_error: float
    lower_bound: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value if math.isfinite(self.value) else "inf",
            "est_rel_error": self.est_rel_error,
            "lower_bound": self.lower_bound,
            "series": self.series.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# one-dimensional rules
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _gauss(n: int, a, b) -> tuple[np.ndarray, np.ndarray]:
    x, w = _leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _panels(n_panels: int, order: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    edges = np.linspace(a, b, n_panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = _gauss(order, lo, hi)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _householder(axis: np.ndarray) -> np.ndarray:
    """Orthogonal matrix mapping e_n to ``axis``."""
    n = axis.size
    e = np.zeros(n)
    e[-1] = 1.0
    v = e - axis
    nv = np.linalg.norm(v)
    if nv < 1e-15:
        return np.eye(n)
    v /= nv
    return np.eye(n) - 2.0 * np.outer(v, v)


@lru_cache(maxsize=256)
def _sphere_rule(n: int, order: int, theta_max: float = math.pi, orthant: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on {omega in S^(n-1): angle(omega, e_n) < theta_max}.

    With ``orthant`` the rule covers the open positive orthant instead.
    Cached; callers must not modify the returned arrays.
    """
    if n == 1:
        if orthant or theta_max < math.pi / 2:
            return np.ones((1, 1)), np.ones(1)
        return np.array([[1.0], [-1.0]]), np.ones(2)
    if n == 2:
        if orthant:
            phi, w = _panels(2, order, 0.0, math.pi / 2)
        elif theta_max >= math.pi:
            m = 2 * order
            phi = 2 * math.pi * np.arange(m) / m
            w = np.full(m, 2 * math.pi / m)
        else:
            phi, w = _panels(2, order, math.pi / 2 - theta_max, math.pi / 2 + theta_max)
        return np.column_stack([np.cos(phi), np.sin(phi)]), w
    top = math.pi / 2 if orthant else theta_max
    th, wt = _panels(2, order, 0.0, top)
    sub, ws = _sphere_rule(n - 1, order, math.pi, orthant)
    sin_t, cos_t = np.sin(th), np.cos(th)
    omega = np.concatenate(
        [np.column_stack([s * sub, np.full(len(sub), c)]) for s, c in zip(sin_t, cos_t)]
    )
    w = np.concatenate([wti * s ** (n - 2) * ws for wti, s in zip(wt, sin_t)])
    return omega, w


def _cap_rule(axis: np.ndarray, theta_max: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    n = axis.size
    if n == 1:
        return np.array([[math.copysign(1.0, axis[0])]]), np.ones(1)
    if n == 2:
        phi0 = math.atan2(axis[1], axis[0])
        phi, w = _panels(2, order, phi0 - theta_max, phi0 + theta_max)
        return np.column_stack([np.cos(phi), np.sin(phi)]), w
    omega, w = _sphere_rule(n, order, theta_max)
    return omega @ _householder(axis).T, w


# ---------------------------------------------------------------------------
# tensor charts on the cone-like domains
# ---------------------------------------------------------------------------

@dataclass
class _Chart:
    """Describes D intersected with the support in (r, omega, x'') coordinates."""

    n: int  # dimension of x'
    split: int  # dimension of x''
    r_lo: float
    r_hi: float
    cap: tuple[np.ndarray, float] | None  # support cap (axis, half angle) inside D
    cone_gamma: float | None  # smooth cone opening, axis e_d
    orthant: bool  # x' restricted to the positive orthant (cube domains)
    cube_xprime: bool  # x'_i < 1 as well
    xpp_box: list[tuple[float, float]]
    xd_cone_cot: float | None  # nonsmooth cone: x_d > r * cot(gamma)


def _support_bounds(support, n: int, split: int):
    """Range of |x'|, box for x'' and the tightest excluding cap, from the support."""
    r_lo, r_hi = 0.0, math.inf
    box = [(-math.inf, math.inf)] * split
    cap = None
    for el in support:
        if isinstance(el, Band):
            r_lo, r_hi = max(r_lo, el.lo), min(r_hi, el.hi)
            continue
        d = n + split
        c = np.concatenate([np.asarray(el.center, float), np.zeros(d - len(el.center))])
        cp, cpp = c[:n], c[n:]
        nc = float(np.linalg.norm(cp))
        r_lo = max(r_lo, nc - el.radius)
        r_hi = min(r_hi, nc + el.radius)
        box = [(max(lo, v - el.radius), min(hi, v + el.radius)) for (lo, hi), v in zip(box, cpp)]
        if nc > el.radius:
            half = math.asin(el.radius / nc)
            if cap is None or half < cap[1]:
                cap = (cp / nc, half)
    return max(r_lo, 0.0), r_hi, box, cap


def _make_chart(tf: TestFunction, dom: DomainSpec) -> _Chart:
    d, k = dom.d, dom.kind
    split = dom.split
    n = d - split
    r_lo, r_hi, box, cap = _support_bounds(tf.support, n, split)
    r_dom, _ = sup_distance(dom)
    r_hi = min(r_hi, r_dom)
    gamma = None
    orthant = cube = False
    cot = None
    if k is DomainKind.SMOOTH_CONE:
        gamma = dom.gamma
        if cap is not None:
            ang = math.acos(max(-1.0, min(1.0, cap[0][-1])))
            if ang + cap[1] > gamma:
                cap = None
    elif k in (DomainKind.NONSMOOTH_CONE, DomainKind.DIHEDRAL_CUBE):
        orthant = cube = True
        if cap is not None and not np.all(cap[0] > math.sin(cap[1])):
            cap = None
        if k is DomainKind.NONSMOOTH_CONE:
            cot = math.cos(dom.gamma) / math.sin(dom.gamma)
        box = [(max(lo, 0.0), min(hi, 1.0)) for lo, hi in box]
    elif k is not DomainKind.MODEL:
        raise InvalidParams("tensor quadrature is not available for this domain", field="kind")
    if not math.isfinite(r_hi) or any(not (math.isfinite(lo) and math.isfinite(hi)) for lo, hi in box):
        raise InvalidParams("the function needs bounded support on an unbounded domain", field="func")
    return _Chart(n, split, r_lo, r_hi, cap, gamma, orthant, cube, box, cot)


def _angular_nodes(chart: _Chart, r: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    n = chart.n
    if chart.cap is not None:
        omega, w = _cap_rule(chart.cap[0], chart.cap[1], order)
    elif chart.cone_gamma is not None:
        omega, w = _sphere_rule(n, order, chart.cone_gamma)
    elif chart.orthant and n == 2:
        # exact angular limits of the square {0 < x_1, x_2 < 1} at radius r
        t = min(1.0, 1.0 / r)
        omega_lo, omega_hi = math.acos(t), math.asin(t)
        if omega_hi <= omega_lo:
            return np.zeros((0, n)), np.zeros(0)
        phi, w = _panels(2, order, omega_lo, omega_hi)
        return np.column_stack([np.cos(phi), np.sin(phi)]), w
    elif chart.orthant:
        omega, w = _sphere_rule(n, order, orthant=True)
    else:
        omega, w = _sphere_rule(n, order)
    if chart.cube_xprime and r > 1.0:
        keep = np.all(r * omega < 1.0, axis=1)
        omega, w = omega[keep], w[keep]
    return omega, w


def _xpp_nodes(chart: _Chart, r: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    if chart.split == 0:
        return np.zeros((1, 0)), np.ones(1)
    box = list(chart.xpp_box)
    if chart.xd_cone_cot is not None:
        lo, hi = box[-1]
        box[-1] = (max(lo, r * chart.xd_cone_cot), hi)
    grids, weights = [], []
    for lo, hi in box:
        if hi <= lo:
            return np.zeros((0, chart.split)), np.zeros(0)
        x, w = _panels(2, order, lo, hi)
        grids.append(x)
        weights.append(w)
    mesh = np.meshgrid(*grids, indexing="ij")
    wmesh = np.meshgrid(*weights, indexing="ij")
    pts = np.column_stack([g.ravel() for g in mesh])
    w = np.prod(np.column_stack([g.ravel() for g in wmesh]), axis=1)
    return pts, w


def _shell_range(j: int) -> tuple[float, float]:
    if j == 0:
        return 1.0, math.inf
    return math.ldexp(1.0, -j), math.ldexp(1.0, -j + 1)


def _tensor_shell_nodes(chart: _Chart, j: int, quad: QuadSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lo, hi = _shell_range(j)
    lo, hi = max(lo, chart.r_lo), min(hi, chart.r_hi)
    d = chart.n + chart.split
    if hi <= lo:
        return np.zeros((0, d)), np.zeros(0), np.zeros(0)
    if chart.orthant and chart.n == 2 and lo >= 1.0:
        # the corner of the square: angular limits behave like sqrt(r - 1)
        u, wu = _panels(quad.radial_panels, quad.gauss_order, 0.0, 1.0)
        rs = lo + (hi - lo) * u * u
        wr = 2.0 * (hi - lo) * u * wu
    else:
        rs, wr = _panels(quad.radial_panels, quad.gauss_order, lo, hi)
    blocks, wts, rvals = [], [], []
    for r, w_r in zip(rs, wr):
        omega, wo = _angular_nodes(chart, r, quad.angular_order)
        xpp, wx = _xpp_nodes(chart, r, quad.angular_order)
        if len(wo) == 0 or len(wx) == 0:
            continue
        na, nx = len(wo), len(wx)
        xp = np.repeat(r * omega, nx, axis=0)
        xq = np.tile(xpp, (na, 1))
        blocks.append(np.hstack([xp, xq]))
        wts.append(w_r * r ** (chart.n - 1) * np.outer(wo, wx).ravel())
        rvals.append(np.full(na * nx, r))
    if not blocks:
        return np.zeros((0, d)), np.zeros(0), np.zeros(0)
    return np.vstack(blocks), np.concatenate(wts), np.concatenate(rvals)


# ---------------------------------------------------------------------------
# integrand
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Integrand:
    m: int
    a: float
    p: float
    orders: frozenset[int]
    weighted: bool = True

    def terms(self, tf: TestFunction, pts: np.ndarray, rho: np.ndarray, split: int) -> np.ndarray:
        """Per-node sum over multi-indices of |rho^(|alpha|-a) d^alpha u|^p (max for p = inf)."""
        out = np.zeros(pts.shape[0])
        for s in range(0, pts.shape[0], _CHUNK):
            sl = slice(s, s + _CHUNK)
            jet = tf.jet_of(Jet.coordinates(pts[sl], self.m), split)
            der = jet.derivatives()
            deg = jet.space.degree
            rows = np.array([k for k in range(len(deg)) if deg[k] in self.orders])
            vals = np.abs(der[rows])
            if self.weighted:
                vals = vals * rho[sl][None, :] ** (deg[rows][:, None] - self.a)
            if self.p == math.inf:
                out[sl] = vals.max(axis=0)
            else:
                out[sl] = np.sum(vals**self.p, axis=0)
        return out


def _fit_slope(s: Sequence[float]) -> float:
    tail = np.asarray(s[-TAIL_WINDOW:], dtype=float)
    if tail.size == 0 or tail[-1] <= 0.0:
        return -math.inf
    j = np.arange(tail.size, dtype=float)
    pos = tail > 0
    if pos.sum() < 3:
        return -math.inf
    return float(np.polyfit(j[pos], np.log2(tail[pos]), 1)[0])


def _finish(s: list[float], j_start: int, p: float) -> ShellSeries:
    slope = _fit_slope(s)
    if p == math.inf:
        return ShellSeries(j_start, s, p, slope, slope < DELTA)
    converged = slope <= -DELTA
    tail = 0.0
    if converged and math.isfinite(slope):
        q = 2.0**slope
        tail = s[-1] * q / (1.0 - q)
    return ShellSeries(j_start, s, p, slope, converged, tail)


def _series_tensor(tf, integrand: _Integrand, dom: DomainSpec, quad: QuadSpec) -> ShellSeries:
    chart = _make_chart(tf, dom)
    s = []
    for j in range(0, quad.j_max + 1):
        pts, w, r = _tensor_shell_nodes(chart, j, quad)
        if len(w) == 0:
            s.append(0.0)
            continue
        vals = integrand.terms(tf, pts, np.minimum(1.0, r), chart.split)
        s.append(float(vals.max()) if integrand.p == math.inf else float(np.dot(w, vals)))
    return _finish(s, 0, integrand.p)


# ---------------------------------------------------------------------------
# generic graded quadrature with binning by the weight
# ---------------------------------------------------------------------------

def _dyadic(levels: int, order: int, top: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes on (0, top) with panels [2^(-k-1), 2^(-k)] * top."""
    xs, ws = [], []
    for k in range(levels):
        x, w = _gauss(order, top * 2.0 ** (-k - 1), top * 2.0**-k)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


@dataclass
class Region:
    """A bounded region given by a node generator plus the distance used as weight."""

    d: int
    node_chunks: Callable[[QuadSpec], Iterator[tuple[np.ndarray, np.ndarray]]]
    dist: Callable[[np.ndarray], np.ndarray]
    mask: Callable[[np.ndarray], np.ndarray] | None = None
    split: int = 0

    def restricted(self, mask, dist) -> "Region":
        return Region(self.d, self.node_chunks, dist, mask, self.split)


def _levels(quad: QuadSpec) -> int:
    # refinement deepens the grading as well, so truncation shows in the estimate
    return min(quad.j_max, 12 + 2 * quad.radial_panels)


def polyhedral_region(dom: DomainSpec) -> Region:
    """Graded rule on {(x3*y, x3): y in the base polygon, 0 < x3 < 1}.

    The polygon is cut into triangles with one polygon vertex each (where the
    edges of M pierce the section); those are mapped from the square with a
    collapsed side and dyadic grading toward the vertex.
    """
    verts = np.asarray(dom.edges, float)
    c = verts.mean(axis=0)
    tris = []
    n = len(verts)
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        mid = 0.5 * (a + b)
        tris.append((a, mid, c))
        tris.append((b, c, mid))

    def chunks(quad: QuadSpec):
        lev = _levels(quad)
        order = max(4, quad.gauss_order - 4)
        s, ws = _dyadic(lev, order)
        t, wt = _panels(quad.radial_panels // 2 + 1, quad.angular_order, 0.0, 1.0)
        S, T = np.meshgrid(s, t, indexing="ij")
        WS, WT = np.meshgrid(ws, wt, indexing="ij")
        S, T, W2 = S.ravel(), T.ravel(), (WS * WT * S).ravel()
        ys, wy = [], []
        for v, p0, p1 in tris:
            e0, e1 = p0 - v, p1 - v
            jac = abs(e0[0] * e1[1] - e0[1] * e1[0])
            y = v[None, :] + S[:, None] * ((1 - T)[:, None] * e0[None, :] + T[:, None] * e1[None, :])
            ys.append(y)
            wy.append(W2 * jac)
        y = np.vstack(ys)
        wy = np.concatenate(wy)
        x3, w3 = _dyadic(lev, order)
        for h, wh in zip(x3, w3):
            pts = np.column_stack([h * y, np.full(len(y), h)])
            yield pts, wh * h * h * wy

    return Region(3, chunks, lambda p: distance(dom, p))


def critical_union_region(cu: CriticalUnion | None = None) -> Region:
    """Union of four octants of (-1, 1)^3, graded toward every coordinate plane."""
    cu = cu or CriticalUnion()

    def chunks(quad: QuadSpec):
        lev = _levels(quad)
        order = max(4, quad.gauss_order - 4)
        x, w = _dyadic(lev, order)
        X, Y = np.meshgrid(x, x, indexing="ij")
        W = np.outer(w, w).ravel()
        X, Y = X.ravel(), Y.ravel()
        for signs in cu.octants:
            sg = np.asarray(signs, float)
            for z, wz in zip(x, w):
                pts = np.column_stack([X, Y, np.full(len(X), z)]) * sg
                yield pts, W * wz

    return Region(3, chunks, CriticalUnion.distance)


def _shell_index(r: np.ndarray) -> np.ndarray:
    """Disjoint shell index: 0 for r >= 1, j for r in [2^(-j), 2^(-j+1))."""
    _, e = np.frexp(r)  # r = f 2^e, f in [0.5, 1)
    return np.where(r >= 1.0, 0, 1 - e)


def _series_region(tf, integrand: _Integrand, region: Region, quad: QuadSpec) -> ShellSeries:
    nshell = quad.j_max + 1
    acc = np.zeros(nshell)
    from .testfuncs import support_mask

    for pts, w in region.node_chunks(quad):
        keep = support_mask(tf.support, pts, region.split)
        if region.mask is not None:
            keep &= region.mask(pts)
        if not keep.any():
            continue
        pts, w = pts[keep], w[keep]
        r = region.dist(pts)
        idx = _shell_index(r)
        ok = idx < nshell
        if not ok.any():
            continue
        pts, w, r, idx = pts[ok], w[ok], r[ok], idx[ok]
        vals = integrand.terms(tf, pts, np.minimum(1.0, r), region.split)
        if integrand.p == math.inf:
            np.maximum.at(acc, idx, vals)
        else:
            acc += np.bincount(idx, weights=w * vals, minlength=nshell)
    return _finish([float(v) for v in acc], 0, integrand.p)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def _check(tf: TestFunction, sp: SpaceParams) -> None:
    if sp.m > tf.max_order:
        raise OrderExceeded(f"order {sp.m} exceeds the supported {tf.max_order}", field="m")


def _series(tf, integrand, target, quad) -> ShellSeries:
    if isinstance(target, Region):
        return _series_region(tf, integrand, target, quad)
    if target.kind is DomainKind.POLYHEDRAL_CONE:
        return _series_region(tf, integrand, polyhedral_region(target), quad)
    return _series_tensor(tf, integrand, target, quad)


def _norm(tf, integrand: _Integrand, target, quad: QuadSpec, check: bool = True) -> NormResult:
    coarse = _series(tf, integrand, target, quad)
    fine = _series(tf, integrand, target, quad.refined())
    p = integrand.p
    if p == math.inf:
        denom = max(fine.total, 1e-300)
        est = abs(fine.total - coarse.total) / denom
        value = fine.total if fine.converged else math.inf
        return NormResult(value, fine, est, lower_bound=True)
    if isinstance(target, Region) or target.kind is DomainKind.POLYHEDRAL_CONE:
        # nodes are binned into shells, so only the totals are comparable
        diff = abs(sum(fine.s) - sum(coarse.s))
    else:
        diff = sum(abs(a - b) for a, b in zip(fine.s, coarse.s))
    denom = sum(fine.s)
    est = diff / denom / p if denom > 0 else 0.0
    if check and fine.converged and est > 10 * quad.target_rel_error:
        raise QuadratureFailure(
            f"refinement changed the norm by {est:.3g} (target {quad.target_rel_error:.3g})"
        )
    value = fine.total ** (1.0 / p) if fine.converged else math.inf
    return NormResult(value, fine, est)


def _integrand(sp: SpaceParams, orders=None, weighted=True) -> _Integrand:
    p = math.inf if sp.p == math.inf else float(sp.p)
    orders = frozenset(range(sp.m + 1)) if orders is None else frozenset(orders)
    return _Integrand(sp.m, float(sp.a), p, orders, weighted)


def kondratiev_norm(tf: TestFunction, sp: SpaceParams, dom, quad: QuadSpec | None = None, check: bool = True) -> NormResult:
    """Norm of ``tf`` in K^m_{a,p}(D, M); ``dom`` is a DomainSpec or a Region."""
    quad = quad or QuadSpec.profile()
    _check(tf, sp)
    return _norm(tf, _integrand(sp), dom, quad, check)


def extremal_norm(tf: TestFunction, sp: SpaceParams, dom, quad: QuadSpec | None = None, check: bool = True) -> NormResult:
    """Norm keeping only the order-0 and order-m terms.

    Computed as the p-th root of the sum of those terms, which is comparable to
    the sum of the two separate norms within a factor 2 and never exceeds the
    full norm.
    """
    quad = quad or QuadSpec.profile()
    _check(tf, sp)
    return _norm(tf, _integrand(sp, {0, sp.m}), dom, quad, check)


def sobolev_norm(tf: TestFunction, m: int, p, center: Sequence[float], d: int, quad: QuadSpec | None = None) -> NormResult:
    """Unweighted W^m_p norm on R^d, with shells centered at ``center``."""
    from .testfuncs import translate

    quad = quad or QuadSpec.profile()
    sp = SpaceParams(m, 0, p)
    _check(tf, sp)
    shifted = translate(tf, [-float(c) for c in center])
    return _norm(shifted, _integrand(sp, weighted=False), DomainSpec.model(d, 0), quad)


def classify(series: ShellSeries) -> Membership:
    slope = series.tail_slope
    if series.p == math.inf:
        return Membership.CONVERGENT if slope < DELTA else Membership.DIVERGENT
    if slope <= -DELTA:
        return Membership.CONVERGENT
    if slope >= DELTA:
        return Membership.DIVERGENT
    return Membership.BORDERLINE


def membership_detect(tf: TestFunction, sp: SpaceParams, dom, quad: QuadSpec | None = None) -> Membership:
    """Convergent / Divergent / Borderline from the tail slope of the shell series."""
    quad = quad or QuadSpec.profile()
    if quad.j_max < 30:
        raise InvalidParams("membership detection needs j_max >= 30", field="j_max")
    _check(tf, sp)
    return classify(_series(tf, _integrand(sp), dom, quad))


def shell_series(tf: TestFunction, sp: SpaceParams, dom, quad: QuadSpec | None = None, extremal: bool = False) -> ShellSeries:
    """Shell series at one resolution, without the refinement pass."""
    quad = quad or QuadSpec.profile()
    _check(tf, sp)
    return _series(tf, _integrand(sp, {0, sp.m} if extremal else None), dom, quad)


__all__ = [
    "DELTA",
    "Membership",
    "NormResult",
    "PROFILE_ENV",
    "QuadSpec",
    "Region",
    "ShellSeries",
    "classify",
    "critical_union_region",
    "extremal_norm",
    "kondratiev_norm",
    "membership_detect",
    "polyhedral_region",
    "shell_series",
    "sobolev_norm",
]
