"""Acceptance criteria, one test each.

Every test appends a ``PASS``/``FAIL`` line that the terminal summary prints
under "acceptance criteria".
"""

import itertools
import time

import numpy as np
import pytest

import conftest
from oracles import pairwise_distances
from packed_frechet.alignment import replay_leash
from packed_frechet.decider import EpsilonSchedule, Verdict, complete_decide, fuzzy_decide
from packed_frechet.exact import exact_frechet
from packed_frechet.optimizer import approx_frechet, approximate_distance_set
from packed_frechet.packedness import companion_curve, generate_c_packed_curve, sampled_packedness
from packed_frechet.proximity import brute_force_edges, build_index, query_edges
from packed_frechet.simplify import simplify
from packed_frechet.geometry import Curve

EPSILONS = (0.1, 0.25, 0.49)


def _report(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)


def _walk_near(P: Curve, m: int, rng) -> Curve:
    """Random walk from P's start with steps on the scale of P's edges."""
    step = float(np.linalg.norm(np.diff(P.vertices, axis=0), axis=1).mean()) if len(P) > 1 else 1.0
    steps = rng.normal(scale=step, size=(m - 1, P.dim))
    return Curve(P.vertices[0] + np.vstack([np.zeros((1, P.dim)), np.cumsum(steps, axis=0)]))


def _random_pair(rng, n_max: int, c_values=(4.0, 10.0)):
    n, m = int(rng.integers(2, n_max + 1)), int(rng.integers(2, n_max + 1))
    d = int(rng.integers(1, 4))
    P = generate_c_packed_curve(n, float(rng.choice(c_values)), d, int(rng.integers(1 << 31)))
    if rng.random() < 0.5:
        Q = _walk_near(P, m, rng)
    else:
        Q = companion_curve(P, m, int(rng.integers(1 << 31)))
    return P, Q


@pytest.fixture(scope="module")
def end_to_end_runs():
    rng = np.random.default_rng(20240601)
    runs = []
    combos = list(itertools.product((4.0, 10.0), (1, 2, 3), EPSILONS))
    for k in range(300):
        c, d, eps = combos[k % len(combos)]
        n, m = int(rng.integers(2, 121)), int(rng.integers(2, 121))
        P = generate_c_packed_curve(n, c, d, int(rng.integers(1 << 31)))
        Q = _walk_near(P, m, rng)
        res = approx_frechet(P, Q, eps)
        runs.append((P, Q, eps, exact_frechet(P, Q), res))
    return runs


def test_criterion_1_end_to_end_approximation(end_to_end_runs):
    bad = [
        (eps, d, res.value)
        for P, Q, eps, d, res in end_to_end_runs
        if not (d * (1 - 1e-7) <= res.value <= (1 + eps) * d * (1 + 1e-7))
    ]
    _report(1, not bad, f"{len(end_to_end_runs)} instances, {len(bad)} violations of d <= value <= (1+eps) d")
    assert not bad, bad[:5]


def test_criterion_2_fuzzy_soundness():
    rng = np.random.default_rng(2)
    bad, counts = [], {Verdict.LE: 0, Verdict.GT: 0}
    for _ in range(500):
        P, Q = _random_pair(rng, 80)
        sched = EpsilonSchedule(float(rng.choice(EPSILONS)))
        ep = sched.eps_prime
        d = exact_frechet(P, Q)
        r = max(d * float(rng.uniform(0.9, 1.1)), 1e-6) if rng.random() < 0.8 else float(rng.uniform(0.01, 3 * d + 0.1))
        v = fuzzy_decide(P, Q, r, sched)
        counts[v] += 1
        ok = d <= (1 + ep / 2) * r * (1 + 1e-12) if v is Verdict.LE else d > (1 - 2 * ep) * r * (1 - 1e-12)
        if not ok:
            bad.append((v, d, r))
    _report(2, not bad, f"500 triples (LE {counts[Verdict.LE]}, GT {counts[Verdict.GT]}), {len(bad)} violations")
    assert not bad, bad[:5]


def test_criterion_3_complete_trichotomy():
    rng = np.random.default_rng(3)
    bad, counts = [], {v: 0 for v in Verdict}
    for _ in range(500):
        P, Q = _random_pair(rng, 80)
        sched = EpsilonSchedule(float(rng.choice(EPSILONS)))
        d = exact_frechet(P, Q)
        r = max(d * float(rng.uniform(0.97, 1.03)), 1e-6) if rng.random() < 0.8 else float(rng.uniform(0.01, 3 * d + 0.1))
        out = complete_decide(P, Q, r, sched)
        counts[out.verdict] += 1
        tol = 1e-12 * max(d, r)
        if out.verdict is Verdict.LE:
            ok = d <= r + tol
        elif out.verdict is Verdict.GT:
            ok = d > r - tol
        else:
            ok = out.value - tol < d <= (1 + sched.eps) * out.value + tol
        if not ok:
            bad.append((str(out), d, r))
    summary = ", ".join(f"{v.value} {counts[v]}" for v in Verdict)
    _report(3, not bad, f"500 triples ({summary}), {len(bad)} violations")
    assert not bad, bad[:5]


def test_criterion_4_simplification():
    rng = np.random.default_rng(4)
    bad = []
    worst = 0.0
    for k in range(200):
        n = int(rng.integers(2, 101))
        d = int(rng.integers(1, 4))
        if k % 2:
            pi = generate_c_packed_curve(n, float(rng.choice([4.0, 10.0])), d, int(rng.integers(1 << 31)))
        else:
            pi = Curve(np.cumsum(rng.normal(size=(n, d)), axis=0))
        mu = float(rng.uniform(0.05, 2.0)) * float(np.linalg.norm(np.diff(pi.vertices, axis=0), axis=1).mean())
        s = simplify(pi, mu)
        K = s.curve.vertices
        cover = np.linalg.norm(pi.vertices[:, None, :] - K[None, :, :], axis=2).min(axis=1).max()
        lens = np.linalg.norm(np.diff(K, axis=0), axis=1)
        if cover > mu + 1e-9:
            bad.append(("a", k))
        if exact_frechet(pi, s.curve) > mu + 1e-9:
            bad.append(("b", k))
        if np.any(lens[:-1] < mu - 1e-9):
            bad.append(("c", k))
        if len(K) >= 2:
            ratio = sampled_packedness(s.curve).value / sampled_packedness(pi).value
            worst = max(worst, ratio)
            if ratio > 6 + 1e-6:
                bad.append(("d", k))
    _report(4, not bad, f"200 curves, {len(bad)} violations, worst packedness ratio {worst:.3f}")
    assert not bad, bad[:5]


def test_criterion_5_proximity_exactness():
    rng = np.random.default_rng(5)
    mismatches = 0
    for _ in range(100):
        d = int(rng.integers(1, 4))
        K = Curve(np.cumsum(rng.normal(size=(int(rng.integers(2, 200)), d)), axis=0))
        r = float(rng.uniform(0.05, 2.0))
        idx = build_index(K, r)
        lo, hi = K.vertices.min(axis=0) - 3 * r, K.vertices.max(axis=0) + 3 * r
        for q in rng.uniform(lo, hi, size=(100, d)):
            if query_edges(idx, q) != brute_force_edges(K, q, 2 * r):
                mismatches += 1
    _report(5, mismatches == 0, f"100 configurations x 100 queries, {mismatches} mismatches")
    assert mismatches == 0


def test_criterion_6_distance_set_bracket():
    rng = np.random.default_rng(6)
    bad = 0
    checked = 0
    for k in range(100):
        eps = (0.1, 0.5)[k % 2]
        P = Curve(rng.normal(size=(int(rng.integers(2, 61)), int(rng.integers(1, 4)))) * 10 ** rng.uniform(-2, 2))
        Z = approximate_distance_set(P, eps)
        for y in pairwise_distances(P.vertices).ravel():
            if y <= 0:
                continue
            x, x2 = Z.bracket(y)
            checked += 1
            if not (x <= y <= x2 <= (1 + eps) * x * (1 + 1e-12)):
                bad += 1
    _report(6, bad == 0, f"100 curves, {checked} distances, {bad} violations")
    assert bad == 0


def test_criterion_7_scaling_smoke():
    eps, c, dim, seed = 0.25, 4.0, 2, 11
    P0 = generate_c_packed_curve(300, c, dim, seed)
    approx_frechet(P0, companion_curve(P0, 300, seed + 1), eps)  # compile kernels first
    times = []
    for n in (10_000, 20_000, 40_000):
        P = generate_c_packed_curve(n, c, dim, seed)
        Q = companion_curve(P, n, seed + 1)
        best = np.inf
        for _ in range(2):
            t = time.perf_counter()
            approx_frechet(P, Q, eps)
            best = min(best, time.perf_counter() - t)
        times.append(best)
    growth = [b / a for a, b in zip(times, times[1:])]
    ok = all(g <= 3.0 for g in growth)
    detail = ", ".join(f"{t:.2f}s" for t in times) + "; growth " + ", ".join(f"{g:.2f}" for g in growth)
    _report(7, ok, f"n = 1e4, 2e4, 4e4: {detail}")
    assert ok


def test_criterion_8_witness_validity(end_to_end_runs):
    bad = []
    worst = -np.inf
    for P, Q, eps, d, res in end_to_end_runs:
        leash = replay_leash(P, Q, list(res.witness.breakpoints))
        worst = max(worst, leash - res.value)
        if leash > res.value + 1e-7:
            bad.append((leash, res.value))
    _report(8, not bad, f"{len(end_to_end_runs)} witnesses, {len(bad)} violations, max leash - value {worst:.2e}")
    assert not bad, bad[:5]
