"""Hash-grid index reporting the edges of a curve within distance 2r of a point.

Each edge is sampled at spacing at most one cell width and registered in the
3^d block of cells around every sample's cell, which covers every cell the
edge passes through.  A query at radius R scans the block of half-width
``ceil(R / cell)`` around the query cell, then filters candidates by exact
point--segment distance, so the answer is exactly ``{e : d(q, e) <= R}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .geometry import ATOL, Curve, GeometryError, as_point, point_segment_distances

_MIX = np.array(
    [0x9E3779B97F4A7C15, 0xC2B2AE3D27D4EB4F, 0x165667B19E3779F9, 0xD6E8FEB86659FD93,
     0xFF51AFD7ED558CCD, 0xC4CEB9FE1A85EC53, 0x94D049BB133111EB, 0xBF58476D1CE4E5B9],
    dtype=np.uint64,
)


def _cell_keys(cells: np.ndarray) -> np.ndarray:
    """Hash integer cell coordinates (rows) to uint64; collisions only add
    candidates that the exact filter removes."""
    d = cells.shape[1]
    mix = _MIX[np.arange(d) % len(_MIX)]
    with np.errstate(over="ignore"):
        return (cells.astype(np.int64).view(np.uint64) * mix).sum(axis=1, dtype=np.uint64)


def _offsets(dim: int, half: int) -> np.ndarray:
    rng = range(-half, half + 1)
    return np.array(list(itertools.product(rng, repeat=dim)), dtype=np.int64)


@dataclass(frozen=True, eq=False)
class SegmentIndex:
    starts: np.ndarray
    ends: np.ndarray
    r: float
    cell: float
    keys: np.ndarray
    edge_ids: np.ndarray
    last_edge_id: int

    @property
    def n_edges(self) -> int:
        return len(self.starts)

    @property
    def dim(self) -> int:
        return self.starts.shape[1]


def _clip_to_box(S, E, lo, hi):
    """Liang--Barsky clip of segments to an axis-aligned box; returns the
    clipped ends and a mask of segments that meet the box."""
    d = E - S
    t0 = np.zeros(len(S))
    t1 = np.ones(len(S))
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(S.shape[1]):
            dk = d[:, k]
            a = (lo[k] - S[:, k]) / dk
            b = (hi[k] - S[:, k]) / dk
            enter = np.minimum(a, b)
            leave = np.maximum(a, b)
            flat = dk == 0
            inside = (S[:, k] >= lo[k]) & (S[:, k] <= hi[k])
            enter = np.where(flat, np.where(inside, -np.inf, np.inf), enter)
            leave = np.where(flat, np.where(inside, np.inf, -np.inf), leave)
            t0 = np.maximum(t0, enter)
            t1 = np.minimum(t1, leave)
    keep = t0 <= t1
    return S + t0[:, None] * d, S + t1[:, None] * d, keep


def build_index(
    K: Curve,
    r: float,
    bounds: tuple[np.ndarray, np.ndarray] | None = None,
    cell: float | None = None,
) -> SegmentIndex:
    """Index the edges of ``K`` for radius-``2r`` queries (cell size ``r``).

    ``bounds`` optionally restricts registration to an axis-aligned box; the
    index is then exact only for queries whose ``2r``-ball lies in the box.
    ``cell`` overrides the cell width; queries stay exact at any radius.
    """
    if not r > 0:
        raise GeometryError(f"r must be positive, got {r}")
    if cell is not None and not cell > 0:
        raise GeometryError(f"cell must be positive, got {cell}")
    S = np.ascontiguousarray(K.edge_starts)
    E = np.ascontiguousarray(K.edge_ends)
    dim = K.dim
    cell = float(r if cell is None else cell)
    ids = np.arange(len(S))
    s_reg, e_reg = S, E
    if bounds is not None and len(S):
        lo, hi = (np.asarray(b, dtype=float) for b in bounds)
        s_reg, e_reg, keep = _clip_to_box(S, E, lo, hi)
        s_reg, e_reg, ids = s_reg[keep], e_reg[keep], ids[keep]
    if len(ids) == 0:
        empty = np.empty(0, dtype=np.uint64)
        return SegmentIndex(S, E, float(r), cell, empty, np.empty(0, dtype=np.int64), len(S))
    lens = np.linalg.norm(e_reg - s_reg, axis=1)
    counts = np.ceil(lens / cell).astype(np.int64) + 1
    owner = np.repeat(np.arange(len(ids)), counts)
    first = np.repeat(np.cumsum(counts) - counts, counts)
    t = (np.arange(counts.sum()) - first) / np.maximum(np.repeat(counts, counts) - 1, 1)
    samples = s_reg[owner] + t[:, None] * (e_reg[owner] - s_reg[owner])
    base = np.floor(samples / cell).astype(np.int64)
    # dedupe sample cells per edge before dilating
    base_key = np.unique(np.column_stack([ids[owner], base]), axis=0)
    edge_of, base = base_key[:, 0], base_key[:, 1:]
    offs = _offsets(dim, 1)
    cells = (base[:, None, :] + offs[None, :, :]).reshape(-1, dim)
    keys = _cell_keys(cells)
    edges = np.repeat(edge_of, len(offs))
    pair = np.unique(np.column_stack([keys.view(np.int64), edges]), axis=0)
    keys = pair[:, 0].view(np.uint64)
    order = np.argsort(keys, kind="stable")
    return SegmentIndex(S, E, float(r), cell, keys[order], pair[order, 1], len(S))


@njit(cache=True)
def _query_kernel(pts, keys, edge_ids, starts, ends, offs, cell, R, mix, n_edges):
    n, d = pts.shape
    cap = 1024
    out_r = np.empty(cap, dtype=np.int64)
    out_e = np.empty(cap, dtype=np.int64)
    n_out = 0
    stamp = np.full(n_edges, -1, dtype=np.int64)
    buf = np.empty(64, dtype=np.int64)
    base = np.empty(d, dtype=np.int64)
    R2 = R * R
    for row in range(n):
        for k in range(d):
            base[k] = np.int64(np.floor(pts[row, k] / cell))
        n_buf = 0
        for o in range(offs.shape[0]):
            h = np.uint64(0)
            for k in range(d):
                h += np.uint64(base[k] + offs[o, k]) * mix[k]
            lo = np.searchsorted(keys, h, side="left")
            hi = np.searchsorted(keys, h, side="right")
            for j in range(lo, hi):
                e = edge_ids[j]
                if stamp[e] == row:
                    continue
                stamp[e] = row
                # exact point-segment distance
                aa = 0.0
                bb = 0.0
                for k in range(d):
                    de = ends[e, k] - starts[e, k]
                    aa += de * de
                    bb += (pts[row, k] - starts[e, k]) * de
                t = 0.0
                if aa > 0.0:
                    t = min(max(bb / aa, 0.0), 1.0)
                dist2 = 0.0
                for k in range(d):
                    w = pts[row, k] - (starts[e, k] + t * (ends[e, k] - starts[e, k]))
                    dist2 += w * w
                if dist2 <= R2:
                    if n_buf == buf.shape[0]:
                        nb = np.empty(2 * n_buf, dtype=np.int64)
                        nb[:n_buf] = buf[:n_buf]
                        buf = nb
                    buf[n_buf] = e
                    n_buf += 1
        if n_out + n_buf > cap:
            while n_out + n_buf > cap:
                cap *= 2
            nr = np.empty(cap, dtype=np.int64)
            ne = np.empty(cap, dtype=np.int64)
            nr[:n_out] = out_r[:n_out]
            ne[:n_out] = out_e[:n_out]
            out_r, out_e = nr, ne
        srt = np.sort(buf[:n_buf])
        for j in range(n_buf):
            out_r[n_out] = row
            out_e[n_out] = srt[j]
            n_out += 1
    return out_r[:n_out], out_e[:n_out]


def query_pairs(index: SegmentIndex, points: np.ndarray, radius: float | None = None):
    """All ``(query_row, edge)`` pairs with ``d(points[row], edge) <= radius``.

    ``radius`` defaults to ``2 r``.  Edges are 0-based; output is sorted by
    query row, then edge.
    """
    pts = np.ascontiguousarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != index.dim:
        raise GeometryError(f"query points must have dimension {index.dim}")
    R = 2.0 * index.r if radius is None else float(radius)
    if len(index.keys) == 0 or len(pts) == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    half = max(1, int(math.ceil(R / index.cell - 1e-12)))
    offs = _offsets(index.dim, half)
    mix = _MIX[np.arange(index.dim) % len(_MIX)]
    return _query_kernel(
        pts, index.keys, index.edge_ids, index.starts, index.ends, offs,
        index.cell, R + ATOL, mix, index.n_edges,
    )


def query_edges(index: SegmentIndex, q, radius: float | None = None) -> set[int]:
    """1-based ids of the edges within ``2r`` (or ``radius``) of ``q``."""
    p = as_point(q)
    _, edges = query_pairs(index, p[None, :], radius)
    return {int(e) + 1 for e in edges}


def brute_force_edges(K: Curve, q, radius: float) -> set[int]:
    """Reference filter over every edge (1-based ids)."""
    p = as_point(q)
    if K.n_edges == 0:
        return set()
    d = point_segment_distances(np.broadcast_to(p, K.edge_starts.shape), K.edge_starts, K.edge_ends)
    return {int(e) + 1 for e in np.flatnonzero(d <= radius + ATOL)}
