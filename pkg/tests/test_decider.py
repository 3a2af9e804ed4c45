import numpy as np
import pytest

from packed_frechet.alignment import replay_leash
from packed_frechet.decider import (
    EpsilonSchedule,
    IndexCache,
    Verdict,
    build_candidate_sets,
    build_layer_edges,
    bfs_path,
    candidate_count,
    complete_decide,
    explicit_fuzzy_decide,
    fuzzy_run,
)
from packed_frechet.exact import exact_frechet, segment_subcurve_frechet
from packed_frechet.geometry import Curve, GeometryError, Segment
from packed_frechet.packedness import companion_curve, generate_c_packed_curve, random_walk_curve
from packed_frechet.proximity import build_index
from packed_frechet.simplify import simplify


def _instance(rng, n_max=40):
    n, m = int(rng.integers(2, n_max)), int(rng.integers(2, n_max))
    d = int(rng.integers(1, 4))
    P = generate_c_packed_curve(n, 4.0, d, int(rng.integers(1 << 30)))
    Q = companion_curve(P, m, int(rng.integers(1 << 30))) if rng.random() < 0.7 else random_walk_curve(
        m, d, int(rng.integers(1 << 30))
    )
    return P, Q


@pytest.mark.parametrize("eps", [0.0, 0.5, -0.1, 1.0])
def test_schedule_rejects_out_of_range(eps):
    with pytest.raises(GeometryError):
        EpsilonSchedule(eps)


def test_schedule_values():
    s = EpsilonSchedule(0.3)
    assert s.eps_prime == pytest.approx(0.01) and s.delta == pytest.approx(0.005)


def test_candidate_count_on_full_chord():
    # a chord of length 4r at delta = 1/60 gets 241 points
    assert int(candidate_count(np.array([4.0]), 1.0 / 60.0)[0]) == 241
    assert int(candidate_count(np.array([0.0]), 0.1)[0]) == 1


def _layers(P, Q, r, eps):
    sched = EpsilonSchedule(eps)
    simp = simplify(P, sched.delta * r)
    return simp, build_candidate_sets(simp, Q, r, sched, build_index(simp.curve, r))


def test_same_segment_layers():
    P = Curve([[0, 0], [1, 0]])
    simp, W = _layers(P, P, 1.0, 0.3)
    assert [w.layer for w in W] == [1, 2]
    assert W[0].positions[0].param == 0.0 and W[-1].positions[-1].param == 1.0
    assert fuzzy_run(P, P, 1.0, EpsilonSchedule(0.3)).verdict is Verdict.LE


def test_far_apart_gives_empty_interior_layer():
    P = Curve([[0, 0], [1, 0]])
    Q = Curve([[0, 0], [50, 50], [1, 0]])
    _, W = _layers(P, Q, 1.0, 0.3)
    assert len(W[1]) == 0
    run = fuzzy_run(P, Q, 1.0, EpsilonSchedule(0.3))
    assert run.verdict is Verdict.GT and run.failed_layer == 1


def test_candidate_spacing_and_radius(rng):
    for _ in range(10):
        P, Q = _instance(rng)
        r = 0.8 * max(exact_frechet(P, Q), 0.1)
        simp, W = _layers(P, Q, r, 0.25)
        for w in W[1:-1]:
            q = Q.vertices[w.layer - 1]
            assert np.all(np.linalg.norm(w.points - q, axis=1) <= 2 * r * (1 + 1e-9) + 1e-9)
            assert np.all(np.diff(w.params) >= -1e-12)


def test_edges_match_segment_subcurve_oracle(rng):
    sched = EpsilonSchedule(0.25)
    checked = 0
    for _ in range(8):
        P, Q = _instance(rng, 15)
        r = max(exact_frechet(P, Q), 0.2)
        simp = simplify(P, sched.delta * r)
        W = build_candidate_sets(simp, Q, r, sched, build_index(simp.curve, r))
        G = build_layer_edges(simp, Q, r, W)
        K = simp.curve
        for i in range(len(W) - 1):
            have = {tuple(e) for e in G.edges[i].tolist()}
            seg = Segment(Q.vertices[i], Q.vertices[i + 1])
            na, nb = len(W[i]), len(W[i + 1])
            for _ in range(min(40, na * nb)):
                j, k = int(rng.integers(na)), int(rng.integers(nb))
                u, v = W[i].positions[j], W[i + 1].positions[k]
                if u.param > v.param:
                    assert (j, k) not in have
                    continue
                d = segment_subcurve_frechet(K, u, v, seg)
                if abs(d - r) > 1e-7:
                    assert ((j, k) in have) == (d <= r), (d, r)
                    checked += 1
    assert checked > 100


def test_sweep_agrees_with_explicit_graph(rng):
    sched = EpsilonSchedule(0.25)
    for _ in range(60):
        P, Q = _instance(rng, 25)
        d = exact_frechet(P, Q)
        r = max(d * float(rng.uniform(0.85, 1.15)), 1e-3)
        assert fuzzy_run(P, Q, r, sched).verdict is explicit_fuzzy_decide(P, Q, r, sched)


def test_bfs_path_is_monotone(rng):
    sched = EpsilonSchedule(0.25)
    P, Q = _instance(rng, 20)
    r = 1.05 * exact_frechet(P, Q) + 1e-3
    simp = simplify(P, sched.delta * r)
    W = build_candidate_sets(simp, Q, r, sched, build_index(simp.curve, r))
    path = bfs_path(build_layer_edges(simp, Q, r, W))
    assert path is not None
    params = [W[i].params[j] for i, j in enumerate(path)]
    assert np.all(np.diff(params) >= -1e-12)


def test_fuzzy_soundness_and_witness(rng):
    sched = EpsilonSchedule(0.25)
    ep = sched.eps_prime
    for _ in range(80):
        P, Q = _instance(rng)
        d = exact_frechet(P, Q)
        r = max(d * float(rng.uniform(0.9, 1.1)), 1e-3)
        run = fuzzy_run(P, Q, r, sched)
        if run.verdict is Verdict.LE:
            assert d <= (1 + ep / 2) * r + 1e-9
            assert replay_leash(P, Q, run.alignment(Q)) <= (1 + sched.delta) * r + 1e-9
        else:
            assert d > (1 - 2 * ep) * r - 1e-9


def test_complete_decide_examples():
    sched = EpsilonSchedule(0.25)
    P = Curve([[0, 0], [1, 0], [2, 1]])
    assert complete_decide(P, P, 0.5, sched).verdict is Verdict.LE
    A, B = Curve([[0, 0], [1, 0]]), Curve([[0, 1], [1, 1]])
    assert complete_decide(A, B, 0.01, sched).verdict is Verdict.GT
    out = complete_decide(A, B, 1.0 + 1e-6, sched)
    assert out.verdict in (Verdict.LE, Verdict.APPROX)
    if out.verdict is Verdict.APPROX:
        assert out.value < 1.0 <= (1 + 0.25) * out.value
    assert str(complete_decide(A, B, 0.01, sched)) == "GT"


def test_complete_decide_soundness(rng):
    sched = EpsilonSchedule(0.1)
    for _ in range(60):
        P, Q = _instance(rng)
        d = exact_frechet(P, Q)
        r = max(d * float(rng.uniform(0.95, 1.05)), 1e-3)
        out = complete_decide(P, Q, r, sched)
        if out.verdict is Verdict.LE:
            assert d <= r + 1e-9
        elif out.verdict is Verdict.GT:
            assert d > r - 1e-9
        else:
            assert out.value - 1e-9 <= d <= (1 + sched.eps) * out.value + 1e-9
            assert d <= out.upper + 1e-9


def test_point_curves():
    sched = EpsilonSchedule(0.2)
    P, Q = Curve([[0.0, 0.0]]), Curve([[1.0, 0.0], [0.0, 2.0]])
    assert fuzzy_run(P, Q, 2.0, sched).verdict is Verdict.LE
    assert fuzzy_run(P, Q, 1.9, sched).verdict is Verdict.GT


def test_rejects_bad_radius_and_dimension():
    sched = EpsilonSchedule(0.2)
    with pytest.raises(GeometryError):
        fuzzy_run(Curve([[0, 0], [1, 0]]), Curve([[0, 0], [1, 0]]), 0.0, sched)
    with pytest.raises(GeometryError):
        fuzzy_run(Curve([[0, 0], [1, 0]]), Curve([[0], [1]]), 1.0, sched)


def test_threads_do_not_change_result(rng):
    sched = EpsilonSchedule(0.25)
    P = generate_c_packed_curve(400, 4, 2, 3)
    Q = companion_curve(P, 400, 4)
    r = 3.0
    a, b = fuzzy_run(P, Q, r, sched, threads=1), fuzzy_run(P, Q, r, sched, threads=3)
    assert a.verdict is b.verdict
    if a.verdict is Verdict.LE:
        assert np.array_equal(a.path, b.path)


def test_index_cache_reuses_nearby_radii():
    cache = IndexCache()
    P = generate_c_packed_curve(50, 4, 2, 0)
    simp = simplify(P, 0.01)
    cache.get(simp, 1.0)
    cache.get(simp, 1.05)
    assert cache.builds == 1 and cache.hits == 1
