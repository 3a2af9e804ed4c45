"""Well-separated pair decomposition on a fair split tree.

The tree splits every box at the midpoint of its longest side.  Two nodes
are ``s``-well-separated when both bounding-box diagonals are at most
``1/s`` times the gap between the boxes; every unordered pair of distinct
point locations then lies in exactly one reported pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .geometry import GeometryError, as_points


@njit(cache=True)
def _build_tree(pts):
    n, d = pts.shape
    perm = np.arange(n)
    cap = 2 * n
    start = np.empty(cap, dtype=np.int64)
    stop = np.empty(cap, dtype=np.int64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    bmin = np.empty((cap, d))
    bmax = np.empty((cap, d))
    n_nodes = 1
    start[0] = 0
    stop[0] = n
    stack = [0]
    while len(stack):
        u = stack.pop()
        s, e = start[u], stop[u]
        for k in range(d):
            lo = pts[perm[s], k]
            hi = lo
            for j in range(s + 1, e):
                x = pts[perm[j], k]
                if x < lo:
                    lo = x
                if x > hi:
                    hi = x
            bmin[u, k] = lo
            bmax[u, k] = hi
        best = -1
        width = 0.0
        for k in range(d):
            w = bmax[u, k] - bmin[u, k]
            if w > width:
                width = w
                best = k
        if best < 0:
            continue  # single location: leaf
        mid = 0.5 * (bmin[u, best] + bmax[u, best])
        if mid <= bmin[u, best]:
            mid = bmax[u, best]  # adjacent floats: split off the top value
        i, j = s, e - 1
        while i <= j:
            if pts[perm[i], best] < mid:
                i += 1
            else:
                tmp = perm[i]
                perm[i] = perm[j]
                perm[j] = tmp
                j -= 1
        for side in range(2):
            c = n_nodes
            n_nodes += 1
            if side == 0:
                start[c], stop[c] = s, i
                left[u] = c
            else:
                start[c], stop[c] = i, e
                right[u] = c
            stack.append(c)
    return perm, start[:n_nodes], stop[:n_nodes], left[:n_nodes], right[:n_nodes], bmin[:n_nodes], bmax[:n_nodes]


@njit(cache=True)
def _diag(bmin, bmax, u):
    s = 0.0
    for k in range(bmin.shape[1]):
        w = bmax[u, k] - bmin[u, k]
        s += w * w
    return math.sqrt(s)


@njit(cache=True)
def _gap(bmin, bmax, a, b):
    s = 0.0
    for k in range(bmin.shape[1]):
        g = max(bmin[a, k] - bmax[b, k], bmin[b, k] - bmax[a, k], 0.0)
        s += g * g
    return math.sqrt(s)


@njit(cache=True)
def _find_pairs(bmin, bmax, left, right, s):
    n_nodes = left.shape[0]
    cap = max(16, 4 * n_nodes)
    pa = np.empty(cap, dtype=np.int64)
    pb = np.empty(cap, dtype=np.int64)
    n_pairs = 0
    stack_a = []
    stack_b = []
    for u in range(n_nodes):
        if left[u] >= 0:
            stack_a.append(left[u])
            stack_b.append(right[u])
    while len(stack_a):
        a = stack_a.pop()
        b = stack_b.pop()
        da = _diag(bmin, bmax, a)
        db = _diag(bmin, bmax, b)
        gap = _gap(bmin, bmax, a, b)
        if gap > 0.0 and max(da, db) * s <= gap:
            if n_pairs == cap:
                cap *= 2
                na = np.empty(cap, dtype=np.int64)
                nb = np.empty(cap, dtype=np.int64)
                na[:n_pairs] = pa[:n_pairs]
                nb[:n_pairs] = pb[:n_pairs]
                pa, pb = na, nb
            pa[n_pairs] = a
            pb[n_pairs] = b
            n_pairs += 1
            continue
        if da < db or (da == db and left[a] < 0):
            a, b = b, a
        # a has the larger box and is internal (distinct leaves are separated)
        stack_a.append(left[a])
        stack_b.append(b)
        stack_a.append(right[a])
        stack_b.append(b)
    return pa[:n_pairs], pb[:n_pairs]


@dataclass(frozen=True, eq=False)
class WSPD:
    points: np.ndarray
    s: float
    perm: np.ndarray
    start: np.ndarray
    stop: np.ndarray
    pair_a: np.ndarray
    pair_b: np.ndarray

    def __len__(self) -> int:
        return len(self.pair_a)

    def members(self, node: int) -> np.ndarray:
        return np.sort(self.perm[self.start[node]:self.stop[node]])

    def representative_distances(self) -> np.ndarray:
        ra = self.points[self.perm[self.start[self.pair_a]]]
        rb = self.points[self.perm[self.start[self.pair_b]]]
        return np.linalg.norm(ra - rb, axis=1)


def build_wspd(points, s: float) -> WSPD:
    if not s > 0:
        raise GeometryError(f"separation must be positive, got {s}")
    pts = np.ascontiguousarray(as_points(points))
    perm, start, stop, left, right, bmin, bmax = _build_tree(pts)
    pa, pb = _find_pairs(bmin, bmax, left, right, float(s))
    return WSPD(pts, float(s), perm, start, stop, pa, pb)


def wspd_pairs(points, s: float) -> list[tuple[np.ndarray, np.ndarray]]:
    """The pairs as sorted arrays of input row indices."""
    w = build_wspd(points, s)
    return [(w.members(a), w.members(b)) for a, b in zip(w.pair_a, w.pair_b)]
