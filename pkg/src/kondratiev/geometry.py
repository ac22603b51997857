"""Model domains: weights, dyadic shells, partition of unity, cone decomposition."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._jets import Jet, sum_of_squares
from ._profiles import smooth_step
from .calculus import DomainKind, DomainSpec
from .errors import DegeneratePolygon, InvalidParams, PointOutsideDomain, ZeroWeight

#: width of the blend between the distance and the cap 1 in the regularized weight
BLEND_WIDTH = 0.125
#: half-width of the ramps of the partition profile
RAMP = 0.125
#: supp theta is contained in (-PROFILE_RADIUS, PROFILE_RADIUS)
PROFILE_RADIUS = 0.5 + RAMP


# ---------------------------------------------------------------------------
# membership and distance
# ---------------------------------------------------------------------------

def _as_points(dom: DomainSpec, x) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.shape[1] != dom.d:
        raise InvalidParams(f"points must have {dom.d} coordinates, got {pts.shape[1]}", field="x")
    return pts


def _polygon_inside(dom: DomainSpec, y: np.ndarray) -> np.ndarray:
    verts = np.asarray(dom.edges)
    inside = np.ones(y.shape[0], dtype=bool)
    n = len(verts)
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        cross = (b[0] - a[0]) * (y[:, 1] - a[1]) - (b[1] - a[1]) * (y[:, 0] - a[0])
        inside &= cross > 0
    return inside


def contains(dom: DomainSpec, x) -> np.ndarray:
    """Boolean mask of points lying in the open domain D (off the singular set)."""
    pts = _as_points(dom, x)
    d, k = dom.d, dom.kind
    if k is DomainKind.MODEL:
        return np.linalg.norm(pts[:, : d - dom.l], axis=1) > 0
    if k is DomainKind.SMOOTH_CONE:
        r = np.linalg.norm(pts, axis=1)
        return (r < 1) & (r > 0) & (pts[:, -1] > r * math.cos(dom.gamma))
    if k is DomainKind.NONSMOOTH_CONE:
        r = np.linalg.norm(pts, axis=1)
        cube = np.all((pts > 0) & (pts < 1), axis=1)
        return cube & (pts[:, -1] > r * math.cos(dom.gamma))
    if k is DomainKind.DIHEDRAL_CUBE:
        return np.all((pts > 0) & (pts < 1), axis=1)
    x3 = pts[:, 2]
    ok = (x3 > 0) & (x3 < 1)
    y = pts[:, :2] / np.where(ok, x3, 1.0)[:, None]
    return ok & _polygon_inside(dom, y)


def edge_directions(dom: DomainSpec) -> np.ndarray:
    """Unit direction vectors of the edges of a polyhedral cone."""
    v = np.array([[u, w, 1.0] for u, w in dom.edges])
    return v / np.linalg.norm(v, axis=1)[:, None]


def _segment_distances(pts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Distances from points to the segments [0, ends[k]]; shape (npts, nseg)."""
    lens2 = np.sum(ends * ends, axis=1)
    t = np.clip(pts @ ends.T / lens2[None, :], 0.0, 1.0)
    diff = pts[:, None, :] - t[:, :, None] * ends[None, :, :]
    return np.linalg.norm(diff, axis=2)


def distance(dom: DomainSpec, x) -> np.ndarray:
    """Euclidean distance to the singular set M (no cap, no membership check)."""
    pts = _as_points(dom, x)
    k = dom.kind
    if k is DomainKind.SMOOTH_CONE:
        return np.linalg.norm(pts, axis=1)
    if k is DomainKind.POLYHEDRAL_CONE:
        ends = np.array([[u, w, 1.0] for u, w in dom.edges])
        return _segment_distances(pts, ends).min(axis=1)
    return np.linalg.norm(pts[:, : dom.d - dom.split], axis=1)


def weights(dom: DomainSpec, x) -> np.ndarray:
    """Vectorized ``min(1, dist(x, M))`` with membership check."""
    pts = _as_points(dom, x)
    inside = contains(dom, pts)
    if not inside.all():
        bad = pts[~inside][0]
        raise PointOutsideDomain(f"point {bad.tolist()} is not in the {dom.kind.value} domain", field="x")
    return np.minimum(1.0, distance(dom, pts))


def weight(dom: DomainSpec, x) -> float:
    """``min(1, dist(x, M))`` at a single point of D."""
    return float(weights(dom, x)[0])


# ---------------------------------------------------------------------------
# shells
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Shell:
    """Dyadic shell {2^(-j-1) < rho < 2^(-j+1)}."""

    j: int

    @property
    def inner(self) -> float:
        return math.ldexp(1.0, -self.j - 1)

    @property
    def outer(self) -> float:
        return math.ldexp(1.0, -self.j + 1)

    def contains_weight(self, w: float) -> bool:
        return self.inner < w < self.outer


@lru_cache(maxsize=None)
def _sup_weight_polyhedral(edges: tuple) -> float:
    dom = DomainSpec(DomainKind.POLYHEDRAL_CONE, 3, edges=edges)
    verts = np.asarray(edges)
    c = verts.mean(axis=0)
    best = 0.0
    n = len(verts)
    s = np.linspace(0.0, 1.0, 121)
    a_, b_ = np.meshgrid(s, s)
    mask = a_ + b_ <= 1.0
    a_, b_ = a_[mask], b_[mask]
    for i in range(n):
        p0, p1 = verts[i], verts[(i + 1) % n]
        y = c[None, :] + a_[:, None] * (p0 - c)[None, :] + b_[:, None] * (p1 - c)[None, :]
        pts = np.column_stack([y, np.ones(len(y))])
        best = max(best, float(distance(dom, pts).max()))
    return best


def sup_distance(dom: DomainSpec) -> tuple[float, bool]:
    """Supremum of dist(x, M) over D and whether it is attained (inf if unbounded)."""
    k, d = dom.kind, dom.d
    if k is DomainKind.MODEL:
        return math.inf, False
    if k is DomainKind.SMOOTH_CONE:
        return 1.0, False
    if k is DomainKind.NONSMOOTH_CONE:
        cap = math.sqrt(d - 1)
        g = dom.gamma
        reach = math.tan(g) if g < math.pi / 2 else math.inf
        return min(cap, reach), False
    if k is DomainKind.DIHEDRAL_CUBE:
        return math.sqrt(d - dom.l), False
    return _sup_weight_polyhedral(dom.edges), False


def sup_weight(dom: DomainSpec) -> tuple[float, bool]:
    """Supremum of rho = min(1, dist) over D and whether it is attained."""
    s, attained = sup_distance(dom)
    if s > 1.0:
        return 1.0, True
    return s, attained


def first_shell(dom: DomainSpec) -> int:
    """j0: the largest j >= 0 such that {rho >= 2^(-j+1)} does not meet D."""
    s, attained = sup_weight(dom)
    j = 0
    while True:
        thr = math.ldexp(1.0, -j + 1)
        empty = thr > s or (thr == s and not attained)
        if not empty:
            return max(j - 1, 0)
        j += 1


def start_shell(dom: DomainSpec) -> int:
    """j1: the first partition index, so that sum_{j >= j1} phi_j = 1 on D.

    theta(t - k) vanishes for t - k >= 5/8, so the indices below j1 are not
    needed as long as log2(1/rho~) >= j1 - 3/8 everywhere.
    """
    s, _ = sup_distance(dom)
    if s >= 1.0 - BLEND_WIDTH:
        # rho~ stays within [7/8, 1 + 1/16] near the cap
        return 0
    return max(0, math.floor(1.0 - PROFILE_RADIUS - math.log2(s)))


def shells_of(dom: DomainSpec, x) -> set[int]:
    """Indices j >= j1 of the shells whose open weight band contains weight(x)."""
    w = weight(dom, x)
    if w <= 0:
        raise ZeroWeight("point lies on the singular set", field="x")
    j1 = start_shell(dom)
    _, e = math.frexp(w)  # w = f * 2^e with 0.5 <= f < 1
    out = set()
    for j in range(max(j1, -e - 2), -e + 4):
        if Shell(j).contains_weight(w):
            out.add(j)
    return out


# ---------------------------------------------------------------------------
# partition of unity
# ---------------------------------------------------------------------------

def _ramp_up(s: Jet) -> Jet:
    """Smooth Heaviside with transition on [-RAMP, RAMP]."""
    return smooth_step((s + RAMP) / (2 * RAMP))


def theta(t: Jet) -> Jet:
    """Partition profile: smooth, supported in (-5/8, 5/8), integer translates sum to 1."""
    return _ramp_up(t + 0.5) - _ramp_up(t - 0.5)


@dataclass(frozen=True)
class PartitionSpec:
    """Parameters of the dyadic partition of unity phi_j = theta(log2(1/rho~) - j)."""

    j1: int = 0
    profile_radius: float = PROFILE_RADIUS
    blend_width: float = BLEND_WIDTH

    @staticmethod
    def epsilon(j: int) -> float:
        """Margin 2^(-j-4) between the support of phi_j and the shell boundary."""
        return math.ldexp(1.0, -j - 4)

    @classmethod
    def for_domain(cls, dom: DomainSpec) -> "PartitionSpec":
        return cls(j1=start_shell(dom))


def distance_jet_of(dom: DomainSpec, xs: list[Jet]) -> Jet:
    """Jet of dist(x, M) given the coordinate jets."""
    pts = np.column_stack([x.value for x in xs])
    if dom.kind is DomainKind.POLYHEDRAL_CONE:
        # distance to the nearest edge segment, differentiated on the active piece
        ends = np.array([[u, w, 1.0] for u, w in dom.edges])
        near = _segment_distances(pts, ends).argmin(axis=1)
        e = ends[near]
        lens2 = np.sum(e * e, axis=1)
        t_raw = np.sum(pts * e, axis=1) / lens2
        proj = sum(xs[i] * e[:, i] for i in range(3)) / lens2
        inner = (t_raw > 0.0) & (t_raw < 1.0)
        c = np.where(inner[None, :], proj.c, 0.0)
        c[0] = np.clip(t_raw, 0.0, 1.0)
        proj = Jet(proj.space, c)
        comps = [xs[i] - proj * e[:, i] for i in range(3)]
        return sum_of_squares(comps).sqrt()
    n = dom.d - dom.split
    return sum_of_squares(xs[:n]).sqrt()


def _blend(dist: Jet, width: float) -> Jet:
    """Smooth min(1, dist): identity below 1 - width, identically 1 above 1 + width."""
    s = smooth_step((dist - (1.0 - width)) / (2 * width))
    return dist + (1.0 - dist) * s


def regularized_distance_of(dom: DomainSpec, xs: list[Jet]) -> Jet:
    dist = distance_jet_of(dom, xs)
    if np.any(dist.value <= 0):
        raise ZeroWeight("regularized weight requested on the singular set", field="x")
    return _blend(dist, BLEND_WIDTH)


def regularized_distance(dom: DomainSpec, x, order: int = 0) -> Jet:
    """Jet of the regularized weight rho~ at the given points."""
    pts = _as_points(dom, x)
    return regularized_distance_of(dom, Jet.coordinates(pts, order))


def _log2_exact(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split log2(v) = e + log2(f) with integer e; scaling v by 2^k shifts e only."""
    f, e = np.frexp(v)
    return e.astype(np.int64), np.log2(f)


def partition_jet_of(dom: DomainSpec, j: int, xs: list[Jet]) -> Jet:
    """Jet of phi_j given the coordinate jets."""
    rt = regularized_distance_of(dom, xs)
    e, lf = _log2_exact(rt.value)
    arg = -(rt.log() / math.log(2.0)) - j
    arg.c[0] = (-e - j).astype(float) - lf
    return theta(arg)


def partition_jet(spec: PartitionSpec, dom: DomainSpec, j: int, x, order: int = 0) -> Jet:
    """Jet of phi_j = theta(log2(1/rho~) - j) at the given points."""
    if order > 6:
        raise InvalidParams("partition derivatives are provided up to order 6", field="order")
    pts = _as_points(dom, x)
    return partition_jet_of(dom, j, Jet.coordinates(pts, order))


def partition_band(j: int) -> tuple[float, float]:
    """Open interval of dist(x, M) outside of which phi_j vanishes (j >= 1 exact)."""
    lo = 2.0 ** (-j - PROFILE_RADIUS)
    hi = 2.0 ** (-j + PROFILE_RADIUS) if j >= 1 else math.inf
    return lo, hi


def partition_value(spec: PartitionSpec, dom: DomainSpec, j: int, x, order: int = 0) -> dict[tuple[int, ...], float]:
    """phi_j and all its partial derivatives up to ``order`` at one point."""
    pts = _as_points(dom, x)
    if pts.shape[0] != 1:
        raise InvalidParams("partition_value takes a single point; use partition_jet for batches", field="x")
    if not contains(dom, pts).all():
        raise PointOutsideDomain("point is not in the domain", field="x")
    jet = partition_jet(spec, dom, j, pts, order)
    der = jet.derivatives()[:, 0]
    return {alpha: float(der[i]) for i, alpha in enumerate(jet.space.indices)}


def active_indices(dom: DomainSpec, x) -> tuple[int, int]:
    """Range [lo, hi] of j for which phi_j may be nonzero at any of the points."""
    rt = regularized_distance(dom, x, 0).value
    t = -np.log2(rt)
    j1 = start_shell(dom)
    lo = max(j1, int(math.floor(t.min() - PROFILE_RADIUS)))
    hi = max(lo, int(math.ceil(t.max() + PROFILE_RADIUS)))
    return lo, hi


def partition_sum(dom: DomainSpec, x) -> np.ndarray:
    """Sum over j >= j1 of phi_j at the given points."""
    pts = _as_points(dom, x)
    spec = PartitionSpec.for_domain(dom)
    lo, hi = active_indices(dom, pts)
    total = np.zeros(pts.shape[0])
    for j in range(lo, hi + 1):
        total += partition_jet(spec, dom, j, pts, 0).value
    return total


# ---------------------------------------------------------------------------
# solid angle
# ---------------------------------------------------------------------------

def sphere_area(k: int) -> float:
    """Surface measure of the unit sphere S^k in R^(k+1)."""
    return 2 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


def solid_angle(d: int, gamma: float) -> float:
    """Measure of the cap {angle(x, e_d) < gamma} on S^(d-1), by 1-D quadrature."""
    if d == 2:
        return 2 * gamma
    # the integrand is entire, so 64-point Gauss-Legendre is exact to rounding
    x, w = np.polynomial.legendre.leggauss(64)
    t = 0.5 * gamma * (x + 1.0)
    return sphere_area(d - 2) * 0.5 * gamma * float(np.sum(w * np.sin(t) ** (d - 2)))


# ---------------------------------------------------------------------------
# polyhedral cone decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgePiece:
    """Edge cone {x in Q : angle(x, axis) < gamma} around one edge."""

    index: int
    axis: tuple[float, float, float]
    gamma: float

    def contains(self, pts: np.ndarray) -> np.ndarray:
        ax = np.asarray(self.axis)
        r = np.linalg.norm(pts, axis=1)
        return pts @ ax > r * math.cos(self.gamma)


@dataclass(frozen=True)
class SmoothPiece:
    """Q minus closed cones of half the edge-cone angles around every edge."""

    axes: tuple[tuple[float, float, float], ...]
    excluded: tuple[float, ...]

    def contains(self, pts: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(pts, axis=1)
        ok = np.ones(pts.shape[0], dtype=bool)
        for ax, g in zip(self.axes, self.excluded):
            ok &= pts @ np.asarray(ax) < r * math.cos(g)
        return ok


@dataclass(frozen=True)
class ConeDecomposition:
    smooth_piece: SmoothPiece
    edge_pieces: tuple[EdgePiece, ...]
    constants: dict = field(default_factory=dict)

    def membership(self, pts: np.ndarray) -> np.ndarray:
        """Boolean array (npts, 1 + n): smooth piece first, then edge pieces."""
        cols = [self.smooth_piece.contains(pts)] + [p.contains(pts) for p in self.edge_pieces]
        return np.column_stack(cols)


def _sample_cone(dom: DomainSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    verts = np.asarray(dom.edges)
    lo, hi = verts.min(axis=0), verts.max(axis=0)
    out = []
    while sum(len(o) for o in out) < n:
        y = rng.uniform(lo, hi, size=(4 * n, 2))
        y = y[_polygon_inside(dom, y)]
        x3 = rng.uniform(0.0, 1.0, size=len(y)) ** (1 / 3)
        out.append(np.column_stack([y * x3[:, None], x3]))
    return np.concatenate(out)[:n]


def decompose_polyhedral_cone(q: DomainSpec, samples: int = 20000, seed: int = 0) -> ConeDecomposition:
    """Split a polyhedral cone into edge cones and one remaining smooth piece.

    Each edge cone has half the angle to the nearest other edge, so edge cones
    are pairwise disjoint; the smooth piece drops cones of half that angle.
    """
    if q.kind is not DomainKind.POLYHEDRAL_CONE:
        raise InvalidParams("decomposition needs a polyhedral cone", field="kind")
    axes = edge_directions(q)
    n = len(axes)
    cosines = np.clip(axes @ axes.T, -1.0, 1.0)
    angles = np.arccos(cosines) + np.diag(np.full(n, np.inf))
    gaps = angles.min(axis=1)
    if np.any(gaps <= 1e-9):
        raise DegeneratePolygon("two edges coincide", field="edges")
    gammas = gaps / 2
    edge_pieces = tuple(EdgePiece(i, tuple(axes[i]), float(gammas[i])) for i in range(n))
    smooth = SmoothPiece(tuple(tuple(a) for a in axes), tuple(float(g / 2) for g in gammas))
    dec = ConeDecomposition(smooth, edge_pieces)

    rng = np.random.default_rng(seed)
    pts = _sample_cone(q, samples, rng)
    member = dec.membership(pts)
    counts = member.sum(axis=1)
    dist_m = distance(q, pts)
    ends = np.array([[u, w, 1.0] for u, w in q.edges])
    seg = _segment_distances(pts, ends)
    ratios_edge = []
    for i in range(n):
        sel = member[:, 1 + i]
        if sel.any():
            ratios_edge.append(float((dist_m[sel] / seg[sel, i]).min()))
    sel = member[:, 0]
    ratio_smooth = float((dist_m[sel] / np.linalg.norm(pts[sel], axis=1)).min()) if sel.any() else float("nan")
    constants = {
        "samples": int(samples),
        "min_pieces": int(counts.min()),
        "max_pieces": int(counts.max()),
        "edge_distance_ratio_min": min(ratios_edge) if ratios_edge else float("nan"),
        "smooth_distance_ratio_min": ratio_smooth,
        "edge_angles": [float(g) for g in gammas],
    }
    return ConeDecomposition(smooth, edge_pieces, constants)


__all__ = [
    "ConeDecomposition",
    "EdgePiece",
    "PartitionSpec",
    "Shell",
    "SmoothPiece",
    "contains",
    "decompose_polyhedral_cone",
    "distance",
    "first_shell",
    "partition_band",
    "partition_jet",
    "partition_jet_of",
    "partition_sum",
    "partition_value",
    "regularized_distance",
    "shells_of",
    "solid_angle",
    "start_shell",
    "sup_weight",
    "theta",
    "weight",
    "weights",
]


# ---------------------------------------------------------------------------
# two dihedral wedges meeting at a critical point
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalUnion:
    """D = {y < 0, z < 0} union {x < 0, z > 0} inside the cube (-1, 1)^3.

    The singular set is the x-axis (edge of the first wedge) and the y-axis
    (edge of the second); near the origin D is no single cone over a
    Lipschitz domain, so it is split into two smooth parts and four edge cones.
    """

    edge_angle: float = math.pi / 6
    d: int = 3

    #: octant sign patterns whose union is D (up to null sets)
    octants = ((1, -1, -1), (-1, -1, -1), (-1, 1, 1), (-1, -1, 1))
    axes = ((1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, -1.0, 0.0))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
        cube = np.all(np.abs(pts) < 1, axis=1)
        return cube & (((y < 0) & (z < 0)) | ((x < 0) & (z > 0)))

    @staticmethod
    def distance(pts: np.ndarray) -> np.ndarray:
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
        return np.minimum(np.hypot(y, z), np.hypot(x, z))

    def pieces(self) -> list[tuple[str, "callable", "callable"]]:
        """(name, membership mask, distance used as weight) for each piece."""
        g = self.edge_angle
        out = []

        def cone(axis):
            ax = np.asarray(axis)

            def mask(p):
                return p @ ax > np.linalg.norm(p, axis=1) * math.cos(g)

            def dist(p):
                return np.linalg.norm(p - np.outer(p @ ax, ax), axis=1)

            return mask, dist

        for ax in self.axes:
            m, dfun = cone(ax)
            out.append((f"edge{ax}", m, dfun))

        def away(p):
            r = np.linalg.norm(p, axis=1)
            ok = np.ones(p.shape[0], dtype=bool)
            for ax in self.axes:
                ok &= p @ np.asarray(ax) < r * math.cos(g / 2)
            return ok

        def vertex_dist(p):
            return np.linalg.norm(p, axis=1)

        out.append(("lower", lambda p: away(p) & (p[:, 2] < 0), vertex_dist))
        out.append(("upper", lambda p: away(p) & (p[:, 2] > 0), vertex_dist))
        return out
