"""Monotone alignments between two curves, as parameter-space polylines.

An alignment is a list of breakpoints ``(s, t)`` of 0-based global
parameters, non-decreasing in both coordinates, from ``(0, 0)`` to the two
curve ends.  Between breakpoints both walkers move linearly in parameter
space.  Once each piece is split where it crosses a vertex of either curve,
the leash length on the piece is a convex function, so its maximum is
attained at a breakpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Curve, CurvePosition, GeometryError, points_at_params

Breakpoints = list[tuple[float, float]]


@dataclass(frozen=True)
class MatchedPair:
    p: CurvePosition
    q: CurvePosition
    distance: float


@dataclass(frozen=True)
class Witness:
    """Serializable alignment between P and Q with per-breakpoint distances."""

    pairs: tuple[MatchedPair, ...]
    breakpoints: tuple[tuple[float, float], ...]

    @property
    def leash(self) -> float:
        return max((m.distance for m in self.pairs), default=0.0)

    def to_json(self) -> list[dict]:
        return [
            {
                "p": [m.p.edge_index, m.p.fraction],
                "q": [m.q.edge_index, m.q.fraction],
                "distance": m.distance,
            }
            for m in self.pairs
        ]


def _crossings(a0: float, a1: float) -> list[float]:
    """Interpolation weights in (0, 1) where a0 -> a1 crosses an integer."""
    if a1 <= a0:
        return []
    lo, hi = math.floor(a0) + 1, math.ceil(a1) - 1
    return [(k - a0) / (a1 - a0) for k in range(lo, hi + 1)]


def refine(bps: Breakpoints) -> Breakpoints:
    """Split every piece at the vertex crossings of either coordinate."""
    out = [bps[0]]
    for (s0, t0), (s1, t1) in zip(bps, bps[1:]):
        if math.floor(s0) + 1 < s1 or math.floor(t0) + 1 < t1:
            lams = sorted(set(_crossings(s0, s1) + _crossings(t0, t1)))
            for lam in lams:
                out.append((s0 + lam * (s1 - s0), t0 + lam * (t1 - t0)))
        out.append((s1, t1))
    return out


def _distances(P: Curve, Q: Curve, pts: Breakpoints) -> np.ndarray:
    arr = np.asarray(pts, dtype=float).reshape(-1, 2)
    return np.linalg.norm(points_at_params(P, arr[:, 0]) - points_at_params(Q, arr[:, 1]), axis=1)


def check_monotone(P: Curve, Q: Curve, bps: Breakpoints, tol: float = 1e-9) -> None:
    if not bps:
        raise GeometryError("empty alignment")
    s_end, t_end = float(max(P.n_edges, 0)), float(max(Q.n_edges, 0))
    if abs(bps[0][0]) > tol or abs(bps[0][1]) > tol:
        raise GeometryError("alignment must start at both curve starts")
    if abs(bps[-1][0] - s_end) > tol or abs(bps[-1][1] - t_end) > tol:
        raise GeometryError("alignment must end at both curve ends")
    arr = np.asarray(bps, dtype=float)
    if np.any(np.diff(arr, axis=0) < -tol):
        raise GeometryError("alignment is not monotone")


def replay_leash(P: Curve, Q: Curve, bps: Breakpoints) -> float:
    """Exact leash length of the alignment ``bps`` between P and Q."""
    check_monotone(P, Q, bps)
    return float(_distances(P, Q, refine(bps)).max())


def compose(pk: Breakpoints, kq: Breakpoints) -> Breakpoints:
    """Chain an alignment P-K with an alignment K-Q into one P-Q alignment.

    Both inputs share the middle curve K and are merged in K order; at a
    K value where P waits (vertical piece of ``pk``) P moves first, then Q.
    Every output breakpoint lies on both inputs, so its leash is at most the
    sum of the two input leashes.
    """
    i = j = 0
    p, k, q = pk[0][0], pk[0][1], kq[0][1]
    out = [(p, q)]
    while True:
        ni = pk[i + 1] if i + 1 < len(pk) else None
        nj = kq[j + 1] if j + 1 < len(kq) else None
        if ni is not None and ni[1] <= k:
            i += 1
            p = ni[0]
            out.append((p, q))
            continue
        if nj is not None and nj[0] <= k:
            j += 1
            q = nj[1]
            out.append((p, q))
            continue
        if ni is None or nj is None:
            break
        kn = min(ni[1], nj[0])
        if ni[1] == kn:
            p = ni[0]
            i += 1
        else:
            a = pk[i]
            p = a[0] + (kn - a[1]) / (ni[1] - a[1]) * (ni[0] - a[0])
        if nj[0] == kn:
            q = nj[1]
            j += 1
        else:
            b = kq[j]
            q = b[1] + (kn - b[0]) / (nj[0] - b[0]) * (nj[1] - b[1])
        k = kn
        out.append((p, q))
    return out


def trivial_alignment(P: Curve, Q: Curve) -> Breakpoints:
    """P walks to its end while Q waits, then Q walks."""
    s_end, t_end = float(P.n_edges), float(Q.n_edges)
    return [(0.0, 0.0), (s_end, 0.0), (s_end, t_end)]


def make_witness(P: Curve, Q: Curve, bps: Breakpoints) -> Witness:
    check_monotone(P, Q, bps)
    pts = refine(bps)
    dist = _distances(P, Q, pts)
    pairs = [
        MatchedPair(P.position_at_param(s), Q.position_at_param(t), float(d))
        for (s, t), d in zip(pts, dist)
    ]
    return Witness(tuple(pairs), tuple((float(s), float(t)) for s, t in bps))
