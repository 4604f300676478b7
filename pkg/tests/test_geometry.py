import itertools

import numpy as np
import pytest

from reference import dense_samples, polygon_vertices
from robustmax import load_fixture
from robustmax.exceptions import CapabilityError, EmptyPolytopeError, InputError
from robustmax.functions import dominance_region
from robustmax.geometry import (Box, Halfspace, Polytope, bounding_box, enumerate_box_vertices,
                                enumerate_vertices, intersect, is_empty, rejection_sample)


def square(lo=0.0, hi=10.0):
    return Polytope([lo, lo], [hi, hi])


def random_polygon(rng, m=5):
    A = rng.normal(size=(m, 2))
    # every row passes near the center so the polygon is usually nonempty
    b = A @ rng.uniform(3, 7, 2) + rng.uniform(0.5, 4, m)
    return Polytope([0, 0], [10, 10], A, b)


def test_intersect_halfspace():
    P = intersect(square(), Halfspace([1.0, 0.0], 5.0))
    assert P.contains([5.0, 10.0])
    assert not P.contains([5.1, 1.0])
    assert P.bounding_box.hi == pytest.approx([5.0, 10.0])


def test_zero_normal_tautology_dropped():
    P = square().intersect(([0.0, 0.0], 1.0))
    assert P.A.shape[0] == 0
    assert not P.is_empty


def test_zero_normal_contradiction_is_empty():
    assert square().intersect(([0.0, 0.0], -1.0)).is_empty


def test_intersect_dimension_mismatch():
    with pytest.raises(InputError):
        square().intersect(([1.0, 0.0, 0.0], 1.0))


def test_intersect_leaves_original_unchanged():
    P = square()
    P.intersect(([1.0, 1.0], 3.0))
    assert P.A.shape[0] == 0


def test_rows_are_unit_normals():
    P = square().with_rows([[3.0, 4.0]], [10.0])
    assert np.linalg.norm(P.A[0]) == pytest.approx(1.0)
    assert P.b[0] == pytest.approx(2.0)


def test_box_validation():
    with pytest.raises(InputError):
        Box([1.0], [0.0])
    with pytest.raises(InputError):
        Polytope([0.0, 0.0], [1.0])


def test_is_empty_cases():
    P = square().with_rows([[1.0, 0.0], [-1.0, 0.0]], [0.0, -1.0])
    assert is_empty(P)
    assert not is_empty(square())


def test_instance1_second_level_node_is_empty():
    inst = load_fixture("instance1")
    f1, f2 = inst.candidates
    P = dominance_region(f2, 0, dominance_region(f1, 0, inst.feasible_set))
    assert P.is_empty


def test_instance1_first_level_node_matches_reference_inequalities():
    inst = load_fixture("instance1")
    P = dominance_region(inst.candidates[0], 0, inst.feasible_set)
    rows = [([-13.75 - 16.36, -13.75 + 7.73], 243.18 - 393.75), ([-0.5 - 16.36, 26 + 7.73], 243.18 - 142)]
    Q = inst.feasible_set
    for normal, offset in rows:
        Q = intersect(Q, Halfspace(normal, offset))
    pts = np.random.default_rng(0).uniform(0, 10, size=(5000, 2))
    assert np.array_equal(P.contains_many(pts), Q.contains_many(pts))


def test_bounding_box_simplex():
    P = Polytope([0, 0], [5, 5], [[1.0, 1.0]], [1.0])
    B = bounding_box(P)
    assert B.lo == pytest.approx([0.0, 0.0], abs=1e-9)
    assert B.hi == pytest.approx([1.0, 1.0])


def test_bounding_box_of_plain_box():
    B = square().bounding_box
    assert B.lo == pytest.approx([0, 0]) and B.hi == pytest.approx([10, 10])


def test_bounding_box_contains_samples_of_first_level_node():
    inst = load_fixture("instance1")
    P = dominance_region(inst.candidates[0], 0, inst.feasible_set)
    B = P.bounding_box
    pts = dense_samples(P, 3000, np.random.default_rng(1))
    assert len(pts) > 100
    assert all(B.contains(p) for p in pts)


def test_bounding_box_empty_raises():
    with pytest.raises(EmptyPolytopeError):
        square().with_rows([[1.0, 0.0]], [-1.0]).bounding_box


def test_box_vertices_unit_square():
    V = enumerate_box_vertices(Box([0, 0], [1, 1]))
    assert {tuple(v) for v in V} == {(0, 0), (0, 1), (1, 0), (1, 1)}


@pytest.mark.parametrize("n", [1, 3, 6])
def test_box_vertices_count(n):
    V = enumerate_box_vertices(Box(np.zeros(n), np.arange(1, n + 1)))
    assert V.shape == (2 ** n, n)
    assert len({tuple(v) for v in V}) == 2 ** n


def test_degenerate_box_keeps_duplicates():
    V = enumerate_box_vertices(Box([0, 2], [1, 2]))
    assert V.shape == (4, 2)
    assert len({tuple(v) for v in V}) == 2


def test_box_vertices_cap():
    with pytest.raises(CapabilityError):
        enumerate_box_vertices(Box(np.zeros(5), np.ones(5)), cap=4)


def test_quadratic_fixture_box_vertex_maximum():
    inst = load_fixture("instance2")
    f1, g11 = inst.candidates[0], inst.initial_planes[0]
    V = enumerate_box_vertices(inst.feasible_set.bounding_box)
    vals = f1.values(V) - g11.values(V)
    assert vals.max() == pytest.approx(905.0, abs=0.01)
    assert V[np.argmax(vals)] == pytest.approx([10, 10])


def test_vertices_of_square_and_simplex():
    assert len(enumerate_vertices(Polytope([0, 0], [1, 1]))) == 4
    V = enumerate_vertices(Polytope([0, 0], [5, 5], [[1.0, 1.0]], [1.0]))
    assert sorted(map(tuple, np.round(V, 9))) == [(0, 0), (0, 1), (1, 0)]


def test_vertices_dimension_cap():
    with pytest.raises(CapabilityError):
        enumerate_vertices(Polytope(np.zeros(5), np.ones(5)))


@pytest.mark.parametrize("seed", range(25))
def test_vertices_match_polygon_clipping(seed):
    P = random_polygon(np.random.default_rng(seed))
    V = enumerate_vertices(P)
    ref = polygon_vertices(P.lo, P.hi, P.A, P.b)
    assert len(V) == len(ref)
    for v in ref:
        assert np.min(np.linalg.norm(V - v, axis=1)) <= 1e-6
    G, h = P.constraints()
    for v in V:
        assert P.residual(v) <= 1e-7
        assert np.sum(np.abs(G @ v - h) <= 1e-7) >= 2


def test_vertices_3d_cube_with_cut():
    P = Polytope(np.zeros(3), np.ones(3), [[1.0, 1.0, 1.0]], [1.5])
    V = enumerate_vertices(P)
    # cube corners with sum <= 1.5 (4) plus the hexagonal cut face (6)
    assert len(V) == 10
    assert all(P.residual(v) <= 1e-7 for v in V)


@pytest.mark.parametrize("seed", range(20))
def test_is_empty_agrees_with_sampling(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 4))
    A = rng.normal(size=(6, n))
    b = rng.normal(size=6) * 4
    P = Polytope(-5 * np.ones(n), 5 * np.ones(n), A, b)
    pts = dense_samples(P, 1, rng, max_draws=200_000)
    if len(pts):
        assert not P.is_empty
    if P.is_empty:
        assert len(pts) == 0


def test_intersection_samples_satisfy_both():
    rng = np.random.default_rng(4)
    P = random_polygon(rng)
    h = Halfspace([1.0, -2.0], 1.0)
    Q = intersect(P, h)
    pts = dense_samples(Q, 1000, rng)
    assert len(pts) > 0
    assert all(h.holds(p) and P.contains(p) for p in pts)


def test_rejection_sample_inside():
    P = random_polygon(np.random.default_rng(9))
    pts = rejection_sample(P, 500, np.random.default_rng(0))
    assert pts.shape == (500, 2)
    assert P.contains_many(pts).all()


def test_chebyshev_center_inside():
    P = Polytope([0, 0], [5, 5], [[1.0, 1.0]], [1.0])
    c = P.chebyshev_center
    assert P.contains(c)
    assert np.all(c > 0.1)


def test_polytope_is_immutable():
    P = square().with_rows([[1.0, 0.0]], [3.0])
    with pytest.raises(ValueError):
        P.A[0, 0] = 2.0
