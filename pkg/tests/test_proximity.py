import numpy as np
import pytest

from oracles import brute_segment_distance
from packed_frechet.geometry import Curve, GeometryError
from packed_frechet.proximity import brute_force_edges, build_index, query_edges, query_pairs


def test_examples():
    idx = build_index(Curve([[0, 0], [10, 0]]), 1.0)
    assert query_edges(idx, [5, 3]) == set()
    assert query_edges(idx, [5, 1]) == {1}


def test_single_edge_registered():
    idx = build_index(Curve([[0, 0], [1, 1]]), 0.5)
    assert set(idx.edge_ids.tolist()) == {0}


def test_single_vertex_curve_is_empty():
    idx = build_index(Curve([[0.0, 0.0]]), 1.0)
    assert query_edges(idx, [0, 0]) == set()


def test_rejects_nonpositive_r():
    with pytest.raises(GeometryError):
        build_index(Curve([[0, 0], [1, 0]]), 0.0)


def test_boundary_is_closed():
    idx = build_index(Curve([[0, 0], [4, 0]]), 1.0)
    assert query_edges(idx, [2, 2.0]) == {1}


def test_last_edge_reported_even_if_short():
    K = Curve([[0, 0], [5, 0], [5.01, 0]])
    assert 2 in query_edges(build_index(K, 0.5), [5.5, 0])


def test_random_matches_brute_force(rng):
    for _ in range(40):
        d = int(rng.integers(1, 4))
        K = Curve(np.cumsum(rng.normal(size=(int(rng.integers(2, 60)), d)), axis=0))
        r = float(rng.uniform(0.05, 2))
        idx = build_index(K, r)
        for q in rng.normal(size=(50, d)) * 4:
            assert query_edges(idx, q) == brute_force_edges(K, q, 2 * r)


def test_brute_force_filter_agrees_with_sampled_distance(rng):
    K = Curve(rng.normal(size=(10, 2)))
    q = rng.normal(size=2)
    for e in range(K.n_edges):
        d = brute_segment_distance(q, K.vertices[e], K.vertices[e + 1])
        if abs(d - 1.0) > 1e-6:
            assert ((e + 1) in brute_force_edges(K, q, 1.0)) == (d <= 1.0)


def test_custom_cell_and_radius(rng):
    K = Curve(np.cumsum(rng.normal(size=(80, 2)), axis=0))
    idx = build_index(K, 1.0, cell=0.3)
    Qp = rng.normal(size=(30, 2)) * 3
    rows, edges = query_pairs(idx, Qp, 1.7)
    for i, q in enumerate(Qp):
        assert {int(e) + 1 for e in edges[rows == i]} == brute_force_edges(K, q, 1.7)


def test_bounds_clipping_exact_inside_box(rng):
    K = Curve(np.cumsum(rng.normal(size=(100, 2)), axis=0))
    lo, hi = np.array([-2.0, -2.0]), np.array([2.0, 2.0])
    idx = build_index(K, 0.5, bounds=(lo - 1.0, hi + 1.0))
    for q in rng.uniform(-2, 2, size=(40, 2)):
        assert query_edges(idx, q) == brute_force_edges(K, q, 1.0)
