import itertools

import numpy as np
import pytest

from packed_frechet.geometry import Curve, GeometryError
from packed_frechet.optimizer import approximate_distance_set, distance_values_between
from packed_frechet.wspd import wspd_pairs
from oracles import pairwise_distances


def _check_decomposition(pts, s):
    pairs = wspd_pairs(pts, s)
    seen = {}
    for A, B in pairs:
        dA = max((np.linalg.norm(pts[i] - pts[j]) for i, j in itertools.combinations(A, 2)), default=0.0)
        dB = max((np.linalg.norm(pts[i] - pts[j]) for i, j in itertools.combinations(B, 2)), default=0.0)
        gap = min(np.linalg.norm(pts[i] - pts[j]) for i in A for j in B)
        assert max(dA, dB) <= gap / s + 1e-12
        for i in A:
            for j in B:
                key = (min(i, j), max(i, j))
                seen[key] = seen.get(key, 0) + 1
    for i, j in itertools.combinations(range(len(pts)), 2):
        same = np.array_equal(pts[i], pts[j])
        assert seen.get((i, j), 0) == (0 if same else 1)


def test_two_points_one_pair():
    assert len(wspd_pairs(np.array([[0.0], [1.0]]), 2)) == 1


def test_collinear_equally_spaced():
    pts = np.arange(12, dtype=float)[:, None]
    _check_decomposition(pts, 2.0)


def test_random_coverage(rng):
    for _ in range(200):
        n, d = int(rng.integers(1, 101)), int(rng.integers(1, 4))
        pts = rng.normal(size=(n, d))
        if rng.random() < 0.2:
            pts = np.round(pts)
        _check_decomposition(pts, float(rng.choice([2.0, 8.0, 32.0])))


def test_rejects_bad_separation():
    with pytest.raises(GeometryError):
        wspd_pairs(np.zeros((3, 2)), 0.0)


def _assert_bracketed(P, eps):
    Z = approximate_distance_set(P, eps)
    assert np.all(Z.values > 0) and np.all(np.diff(Z.values) > 0)
    for y in np.unique(pairwise_distances(P.vertices)):
        if y == 0:
            continue
        x, x2 = Z.bracket(y)
        assert x <= y <= x2 <= (1 + eps) * x * (1 + 1e-12)


def test_distance_set_single_distance():
    _assert_bracketed(Curve([[0.0], [1.0]]), 0.25)


def test_distance_set_three_points():
    _assert_bracketed(Curve([[0.0], [1.0], [10.0]]), 0.5)


def test_distance_set_random(rng):
    for _ in range(30):
        P = Curve(rng.normal(size=(int(rng.integers(2, 61)), int(rng.integers(1, 4)))))
        _assert_bracketed(P, float(rng.choice([0.1, 0.5])))


def test_values_between_is_a_slice(rng):
    P = Curve(np.cumsum(rng.normal(size=(80, 2)), axis=0))
    Z = approximate_distance_set(P, 0.25).values
    a, b = np.quantile(Z, [0.3, 0.6])
    assert np.array_equal(distance_values_between(P, 0.25, a, b), Z[(Z > a) & (Z < b)])
