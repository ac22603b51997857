from __future__ import annotations

import math

import numpy as np
import pytest

from kondratiev.calculus import DomainSpec
from kondratiev.errors import InvalidParams, PointOutsideDomain, ZeroWeight
from kondratiev.geometry import (
    CriticalUnion,
    PartitionSpec,
    decompose_polyhedral_cone,
    distance,
    partition_jet,
    partition_sum,
    partition_value,
    regularized_distance,
    shells_of,
    solid_angle,
    weight,
    weights,
)
from kondratiev.verify import sample_domain

MODEL3 = DomainSpec.model(3, 0)
SQUARE = DomainSpec.polyhedral_cone([(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)])
TRIANGLE = DomainSpec.polyhedral_cone([(0.0, 0.4), (-0.4, -0.3), (0.4, -0.3)])
THIN = DomainSpec.polyhedral_cone([(-0.6, 0.0), (0.6, 0.0), (0.0, 0.05)])

# measured on 4000 multiscale samples per domain: max ratio 1.0083,
# max |grad| 1.20, max rho*|hess| 15.9; asserted with 2x headroom
REG_RATIO_EXCESS = 2 * 0.0083
REG_GRAD = 2 * 1.20
REG_HESS = 2 * 15.9


def test_weight_examples():
    assert weight(MODEL3, (0.25, 0.0, 0.0)) == 0.25
    assert weight(DomainSpec.model(3, 1), (0.3, 0.4, 0.9)) == pytest.approx(0.5, abs=1e-15)
    assert weight(MODEL3, (3.0, 1.0, 0.0)) == 1.0


def test_weight_square_cone_bisector_matches_dense_edge_sampling():
    x = np.array([0.0, 0.2, 0.5])
    t = np.linspace(0.0, 1.0, 200_001)
    best = math.inf
    for u, w in SQUARE.edges:
        pts = np.outer(t, [u, w, 1.0])
        best = min(best, float(np.min(np.linalg.norm(pts - x, axis=1))))
    assert weight(SQUARE, x) == pytest.approx(best, abs=1e-9)


def test_weight_rejects_outside_points():
    with pytest.raises(PointOutsideDomain):
        weight(DomainSpec.smooth_cone(3), (1.0, 0.0, -0.5))
    with pytest.raises(InvalidParams):
        weight(MODEL3, (1.0, 0.0))


def test_shells_of_open_bands():
    # shell j is the open band 2^(-j-1) < w < 2^(-j+1), so 1/4 sits on the edge of shells 1 and 3
    assert shells_of(MODEL3, (0.25, 0.0, 0.0)) == {2}
    assert shells_of(MODEL3, (0.75, 0.0, 0.0)) == {0, 1}
    assert shells_of(MODEL3, (1.5 * 2.0**-10, 0.0, 0.0)) == {9, 10}


def test_shells_of_singular_point():
    # the singular set is not part of the model domain
    with pytest.raises((ZeroWeight, PointOutsideDomain)):
        shells_of(MODEL3, (0.0, 0.0, 0.0))


def test_solid_angle_cap_in_three_dimensions():
    for g in (0.3, math.pi / 4, 1.2):
        assert solid_angle(3, g) == pytest.approx(2 * math.pi * (1 - math.cos(g)), rel=1e-13)
    assert solid_angle(2, 0.5) == 1.0


@pytest.mark.parametrize("dom", [MODEL3, DomainSpec.model(3, 1), DomainSpec.smooth_cone(3), SQUARE])
def test_regularized_distance_is_comparable_and_smooth(dom):
    pts = sample_domain(dom, 2000, seed=3)
    rho = weights(dom, pts)
    jet = regularized_distance(dom, pts, 2)
    ratio = jet.value / rho
    assert ratio.min() >= 1.0 - 1e-12
    assert ratio.max() <= 1.0 + REG_RATIO_EXCESS
    der = np.abs(jet.derivatives())
    assert der[1:4].max() <= REG_GRAD
    assert (der[4:].max(axis=0) * rho).max() <= REG_HESS


def test_partition_shell_center():
    spec = PartitionSpec.for_domain(MODEL3)
    x = (2.0**-5, 0.0, 0.0)
    vals = [partition_value(spec, MODEL3, j, x)[(0, 0, 0)] for j in (4, 5, 6)]
    assert vals == [0.0, 1.0, 0.0]


def test_partition_sums_to_one():
    for dom in (MODEL3, DomainSpec.dihedral_cube(3, 1), SQUARE):
        pts = sample_domain(dom, 10_000, seed=7)
        assert np.max(np.abs(partition_sum(dom, pts) - 1.0)) < 1e-12


def test_partition_self_similar_in_model_case():
    spec = PartitionSpec.for_domain(MODEL3)
    pts = sample_domain(MODEL3, 2000, seed=11)
    for j in range(1, 10):
        scaled = pts * 2.0 ** (j - 1)
        keep = distance(MODEL3, scaled) < 1.0
        a = partition_jet(spec, MODEL3, j, pts[keep]).value
        b = partition_jet(spec, MODEL3, 1, scaled[keep]).value
        assert np.array_equal(a, b)


def test_partition_values_in_unit_interval():
    spec = PartitionSpec.for_domain(MODEL3)
    pts = sample_domain(MODEL3, 3000, seed=2)
    for j in range(0, 12):
        v = partition_jet(spec, MODEL3, j, pts).value
        assert v.min() >= 0.0 and v.max() <= 1.0


def test_partition_order_limit():
    spec = PartitionSpec.for_domain(MODEL3)
    with pytest.raises(InvalidParams):
        partition_value(spec, MODEL3, 1, (0.5, 0.0, 0.0), order=7)


def test_decompose_square_cone():
    dec = decompose_polyhedral_cone(SQUARE)
    assert len(dec.edge_pieces) == 4
    angles = dec.constants["edge_angles"]
    assert max(angles) - min(angles) < 1e-12
    assert dec.constants["min_pieces"] >= 1 and dec.constants["max_pieces"] <= 2


@pytest.mark.parametrize("dom", [TRIANGLE, THIN])
def test_decompose_triangles(dom):
    dec = decompose_polyhedral_cone(dom)
    assert len(dec.edge_pieces) == 3
    assert dec.constants["min_pieces"] >= 1 and dec.constants["max_pieces"] <= 2
    assert dec.constants["edge_distance_ratio_min"] > 0.0
    assert dec.constants["smooth_distance_ratio_min"] > 0.0


def test_edge_pieces_pairwise_disjoint():
    dec = decompose_polyhedral_cone(THIN, samples=5000, seed=1)
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(20_000, 3))
    cols = np.column_stack([p.contains(pts) for p in dec.edge_pieces])
    assert cols.sum(axis=1).max() <= 1


def test_decompose_needs_polyhedral_cone():
    with pytest.raises(InvalidParams):
        decompose_polyhedral_cone(MODEL3)


def test_critical_union_pieces_cover_samples():
    cu = CriticalUnion()
    rng = np.random.default_rng(5)
    pts = rng.uniform(-1, 1, size=(20_000, 3))
    pts = pts[cu.contains(pts)]
    covered = np.zeros(len(pts), dtype=bool)
    for _, mask, _ in cu.pieces():
        covered |= mask(pts)
    assert covered.all()
