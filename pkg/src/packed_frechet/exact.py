"""Exact continuous Frechet distance.

The decision procedure is the Alt--Godau free-space sweep; the value is found
by binary search over the free-space critical values (vertex--vertex,
vertex--edge and the "passage opening" events of bisectors crossing an edge).
This is the reference oracle for the approximate pipeline, so it favours
plainness over speed.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .geometry import Curve, CurvePosition, GeometryError, Segment, as_curve, subcurve

_EMPTY = 2.0
_TINY = 1e-12

# above this many passage events per curve pair, exact_frechet bisects instead
CRITICAL_VALUE_BUDGET = 5e7


@njit(cache=True)
def _free_interval(p, q, c, r2):
    """Parameters of segment p->q within sqrt(r2) of c; (1, 0) when empty."""
    aa = 0.0
    bb = 0.0
    cc = 0.0
    for k in range(p.shape[0]):
        d = q[k] - p[k]
        w = p[k] - c[k]
        aa += d * d
        bb += d * w
        cc += w * w
    cc -= r2
    if aa == 0.0:
        if cc <= 0.0:
            return 0.0, 1.0
        return 1.0, 0.0
    disc = bb * bb - aa * cc
    if disc < 0.0:
        return 1.0, 0.0
    root = math.sqrt(disc)
    lo = max((-bb - root) / aa, 0.0)
    hi = min((-bb + root) / aa, 1.0)
    if lo > hi:
        return 1.0, 0.0
    return lo, hi


@njit(cache=True)
def _dist2(p, q):
    s = 0.0
    for k in range(p.shape[0]):
        d = p[k] - q[k]
        s += d * d
    return s


@njit(cache=True)
def _decide_kernel(A, B, r):
    n = A.shape[0]
    m = B.shape[0]
    r2 = r * r
    if _dist2(A[0], B[0]) > r2 or _dist2(A[n - 1], B[m - 1]) > r2:
        return False
    if n == 1:
        for j in range(m):
            if _dist2(A[0], B[j]) > r2:
                return False
        return True
    if m == 1:
        for i in range(n):
            if _dist2(A[i], B[0]) > r2:
                return False
        return True

    # RL[j]: lowest reachable height on the left boundary of cell (i, j)
    RL = np.empty(m - 1)
    ok = True
    for j in range(m - 1):
        lo, hi = _free_interval(B[j], B[j + 1], A[0], r2)
        if ok and lo <= _TINY and lo <= hi:
            RL[j] = 0.0
            ok = hi >= 1.0 - _TINY
        else:
            RL[j] = _EMPTY
            ok = False

    bottom_ok = True
    last_top = _EMPTY
    for i in range(n - 1):
        lo, hi = _free_interval(A[i], A[i + 1], B[0], r2)
        if bottom_ok and lo <= _TINY and lo <= hi:
            rb = 0.0
            bottom_ok = hi >= 1.0 - _TINY
        else:
            rb = _EMPTY
            bottom_ok = False
        for j in range(m - 1):
            rl = RL[j]
            if rl > 1.0 and rb > 1.0:
                RL[j] = _EMPTY
                rb = _EMPTY
                continue
            rlo, rhi = _free_interval(B[j], B[j + 1], A[i + 1], r2)
            tlo, thi = _free_interval(A[i], A[i + 1], B[j + 1], r2)
            if rlo > rhi:
                nr = _EMPTY
            elif rb <= 1.0:
                nr = rlo
            else:
                x = max(rl, rlo)
                nr = x if x <= rhi else _EMPTY
            if tlo > thi:
                nt = _EMPTY
            elif rl <= 1.0:
                nt = tlo
            else:
                x = max(rb, tlo)
                nt = x if x <= thi else _EMPTY
            RL[j] = nr
            rb = nt
        last_top = rb
    return RL[m - 2] <= 1.0 or last_top <= 1.0


def _arrays(A, B) -> tuple[np.ndarray, np.ndarray]:
    A, B = as_curve(A), as_curve(B)
    if A.dim != B.dim:
        raise GeometryError(f"dimension mismatch: {A.dim} vs {B.dim}")
    return np.ascontiguousarray(A.vertices), np.ascontiguousarray(B.vertices)


def decide_frechet(A: Curve, B: Curve, r: float) -> bool:
    """True iff ``d_F(A, B) <= r`` (free-space reachability)."""
    if r < 0:
        raise GeometryError(f"r must be non-negative, got {r}")
    a, b = _arrays(A, B)
    return bool(_decide_kernel(a, b, float(r)))


def _point_to_segments(P, S, E):
    """Distances from every point in P to every segment S[j]E[j]; shape (|P|, |S|)."""
    d = E - S
    dd = np.einsum("ij,ij->i", d, d)
    w = P[:, None, :] - S[None, :, :]
    t = np.einsum("ijk,jk->ij", w, d) / np.where(dd > 0, dd, 1.0)[None, :]
    t = np.clip(t, 0.0, 1.0)
    return np.linalg.norm(w - t[..., None] * d[None, :, :], axis=2)


def _passage_values(A, B, chunk_elems=2_000_000):
    """Distances at which a bisector of two B vertices crosses an edge of A."""
    m = len(B)
    if m < 3 or len(A) < 2:
        return np.empty(0)
    k_idx, l_idx = np.triu_indices(m, 1)
    out = []
    bb = np.einsum("ij,ij->i", B, B)
    step = max(1, chunk_elems // len(k_idx))
    for s in range(0, len(A) - 1, step):
        a0 = A[s:s + step + 1][:-1]
        u = A[s + 1:s + step + 1] - a0
        uu = np.einsum("ij,ij->i", u, u)
        keep = uu > 0
        a0, u, uu = a0[keep], u[keep], uu[keep]
        if len(a0) == 0:
            continue
        ab = a0 @ B.T
        ub = u @ B.T
        ua = np.einsum("ij,ij->i", u, a0)
        aa = np.einsum("ij,ij->i", a0, a0)
        denom = 2.0 * (ub[:, l_idx] - ub[:, k_idx])
        numer = (bb[l_idx] - bb[k_idx])[None, :] - 2.0 * (ab[:, l_idx] - ab[:, k_idx])
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            t = numer / denom
            valid = (denom != 0.0) & (t >= 0.0) & (t <= 1.0)
            # |a + t u - b_k|^2 expanded
            d2 = (
                aa[:, None] - 2.0 * ab[:, k_idx] + bb[k_idx][None, :]
                + 2.0 * t * (ua[:, None] - ub[:, k_idx])
                + t * t * uu[:, None]
            )
        out.append(np.sqrt(np.maximum(d2[valid], 0.0)))
    return np.concatenate(out) if out else np.empty(0)


def critical_values(A: Curve, B: Curve) -> np.ndarray:
    """Sorted distinct free-space critical values of the pair ``(A, B)``."""
    a, b = _arrays(A, B)
    vals = [
        np.array([np.linalg.norm(a[0] - b[0]), np.linalg.norm(a[-1] - b[-1])]),
    ]
    if len(b) > 1:
        vals.append(_point_to_segments(a, b[:-1], b[1:]).ravel())
    if len(a) > 1:
        vals.append(_point_to_segments(b, a[:-1], a[1:]).ravel())
    if len(a) == 1 or len(b) == 1:
        vals.append(np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2).ravel())
    vals.append(_passage_values(a, b))
    vals.append(_passage_values(b, a))
    return np.unique(np.concatenate(vals))


def trivial_upper_bound(a: np.ndarray, b: np.ndarray) -> float:
    """Leash of the walk that finishes A while B waits at its start."""
    return float(max(
        np.linalg.norm(a - b[0], axis=1).max(),
        np.linalg.norm(b - a[-1], axis=1).max(),
    ))


def _bisect(a, b, lo, hi, rel=1e-13):
    if _decide_kernel(a, b, lo):
        return lo
    while hi - lo > rel * max(hi, 1e-300):
        mid = 0.5 * (lo + hi)
        if _decide_kernel(a, b, mid):
            hi = mid
        else:
            lo = mid
    return hi


def _slack(x: float) -> float:
    return x * (1.0 + 1e-12) + 1e-15


def exact_frechet(A: Curve, B: Curve, method: str = "auto") -> float:
    """Frechet distance ``d_F(A, B)``.

    ``method`` is ``"critical"`` (binary search over the sorted critical
    values), ``"bisect"`` (bisection to ~1e-13 relative) or ``"auto"``,
    which picks ``"critical"`` when the passage-event count is affordable.
    """
    a, b = _arrays(A, B)
    lb = float(max(np.linalg.norm(a[0] - b[0]), np.linalg.norm(a[-1] - b[-1])))
    ub = trivial_upper_bound(a, b)
    if method == "auto":
        events = (len(a) - 1) * len(b) ** 2 / 2 + (len(b) - 1) * len(a) ** 2 / 2
        method = "critical" if events <= CRITICAL_VALUE_BUDGET else "bisect"
    if method == "bisect":
        return _bisect(a, b, lb, ub)
    if method != "critical":
        raise ValueError(f"unknown method {method!r}")
    cands = critical_values(A, B)
    cands = cands[(cands >= lb) & (cands <= ub)]
    cands = np.unique(np.concatenate([[lb, ub], cands]))
    lo, hi = 0, len(cands) - 1
    if not _decide_kernel(a, b, _slack(cands[hi])):
        # numerically unreachable: fall back to plain bisection
        return _bisect(a, b, lb, ub)
    while lo < hi:
        mid = (lo + hi) // 2
        if _decide_kernel(a, b, _slack(cands[mid])):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])


# -- segment versus subcurve ------------------------------------------------


def _vertex_intervals(Z: np.ndarray, a: np.ndarray, b: np.ndarray, r: float):
    """Free intervals on segment ab (parameter t in [0, 1]) of each row of Z."""
    d = b - a
    w = a[None, :] - Z
    aa = float(d @ d)
    bb = w @ d
    cc = np.einsum("ij,ij->i", w, w) - r * r
    if aa == 0.0:
        inside = cc <= 0.0
        return np.where(inside, 0.0, 1.0), np.where(inside, 1.0, 0.0)
    disc = bb * bb - aa * cc
    ok = disc >= 0.0
    root = np.sqrt(np.where(ok, disc, 0.0))
    lo = np.maximum((-bb - root) / aa, 0.0)
    hi = np.minimum((-bb + root) / aa, 1.0)
    ok &= lo <= hi
    return np.where(ok, lo, 1.0), np.where(ok, hi, 0.0)


def segment_curve_within(Z: np.ndarray, a: np.ndarray, b: np.ndarray, r: float) -> bool:
    """True iff ``d_F(Z, ab) <= r`` for the polygonal chain with vertices Z.

    A monotone matching exists iff every interior vertex has a non-empty free
    interval on ab and the running maximum of the interval starts never
    exceeds the current interval end (greedy lowest-reachable sweep).
    """
    r2 = r * r
    if _sqdist(Z[0], a) > r2 or _sqdist(Z[-1], b) > r2:
        return False
    inner = Z[1:-1]
    if len(inner) == 0:
        return True
    lo, hi = _vertex_intervals(inner, a, b, r)
    if np.any(lo > hi):
        return False
    return bool(np.all(np.maximum.accumulate(lo) <= hi))


def _sqdist(p, q) -> float:
    d = p - q
    return float(d @ d)


def segment_curve_frechet(Z: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """``d_F(Z, ab)`` by bisection over the linear-time decision."""
    lb = max(math.sqrt(_sqdist(Z[0], a)), math.sqrt(_sqdist(Z[-1], b)))
    if len(Z) > 2:
        inner = Z[1:-1]
        seg_d = _point_to_segments(inner, a[None, :], b[None, :]).ravel()
        lb = max(lb, float(seg_d.max()))
    if segment_curve_within(Z, a, b, _slack(lb)):
        return lb
    ub = max(float(np.linalg.norm(Z[:-1] - a, axis=1).max()), math.sqrt(_sqdist(Z[-1], b)))
    lo, hi = lb, ub
    while hi - lo > 1e-13 * max(hi, 1e-300):
        mid = 0.5 * (lo + hi)
        if segment_curve_within(Z, a, b, mid):
            hi = mid
        else:
            lo = mid
    return hi


def segment_subcurve_frechet(K: Curve, u: CurvePosition, v: CurvePosition, seg: Segment) -> float:
    """``d_F(K<u, v>, seg)``, exact up to ~1e-13 relative."""
    sub = subcurve(K, u, v)  # raises on u > v
    return segment_curve_frechet(sub.vertices, seg.start, seg.end)


def segment_subcurve_within(K: Curve, u: CurvePosition, v: CurvePosition, seg: Segment, r: float) -> bool:
    sub = subcurve(K, u, v)
    return segment_curve_within(sub.vertices, seg.start, seg.end, r)


def free_space_intervals(A: Curve, B: Curve, r: float) -> dict:
    """Free intervals on the cell boundaries of the free-space diagram.

    ``a_vertices[i][j]`` is the interval on edge ``j`` of B within ``r`` of
    vertex ``i`` of A (``None`` when empty); ``b_vertices`` swaps the roles.
    """
    A, B = as_curve(A), as_curve(B)

    def grid(X: Curve, Y: Curve) -> list:
        out = []
        for p in X.vertices:
            row = []
            for a, b in zip(Y.edge_starts, Y.edge_ends):
                lo, hi = _vertex_intervals(p[None, :], a, b, r)
                row.append(None if lo[0] > hi[0] else [float(lo[0]), float(hi[0])])
            out.append(row)
        return out

    return {"r": float(r), "a_vertices": grid(A, B), "b_vertices": grid(B, A)}
