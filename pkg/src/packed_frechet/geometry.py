"""Points, segments and polygonal curves in R^d.

A curve ``P = p_1 ... p_n`` is parameterised over ``[1, n]`` so that
``P(i + x) = (1 - x) p_i + x p_{i+1}``.  Positions on a curve are stored as
``(edge_index, fraction)`` with 1-based edge indices, matching that
convention.  Internally the fast paths use the 0-based *global parameter*
``s = (edge_index - 1) + fraction`` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ATOL = 1e-9


class GeometryError(ValueError):
    """Raised for malformed geometric input (domain errors)."""


def as_points(coords, dim: int | None = None) -> np.ndarray:
    """Convert ``coords`` to a read-only ``(n, d)`` float64 array."""
    try:
        arr = np.array(coords, dtype=np.float64)
    except ValueError:
        raise GeometryError("vertices must all have the same dimension") from None
    if arr.ndim == 1:
        # a flat list of scalars is a 1-D curve
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise GeometryError(f"expected a non-empty (n, d) array, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise GeometryError(f"expected dimension {dim}, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise GeometryError("coordinates must be finite")
    arr.setflags(write=False)
    return arr


def as_point(coords) -> np.ndarray:
    arr = np.array(coords, dtype=np.float64).reshape(-1)
    if arr.size == 0 or not np.all(np.isfinite(arr)):
        raise GeometryError("a point needs at least one finite coordinate")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, order=True)
class CurvePosition:
    """Location ``(edge_index, fraction)`` on a curve; 1-based edge index."""

    edge_index: int
    fraction: float

    def __post_init__(self):
        if self.edge_index < 1:
            raise GeometryError(f"edge index must be >= 1, got {self.edge_index}")
        if not (0.0 <= self.fraction <= 1.0):
            raise GeometryError(f"fraction must lie in [0, 1], got {self.fraction}")

    @property
    def param(self) -> float:
        """0-based global parameter ``(edge_index - 1) + fraction``."""
        return (self.edge_index - 1) + self.fraction


@dataclass(frozen=True)
class Segment:
    start: np.ndarray
    end: np.ndarray

    def __init__(self, start, end):
        a, b = as_point(start), as_point(end)
        if a.shape != b.shape:
            raise GeometryError("segment endpoints must share one dimension")
        object.__setattr__(self, "start", a)
        object.__setattr__(self, "end", b)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.end - self.start))

    def __eq__(self, other):
        if not isinstance(other, Segment):
            return NotImplemented
        return np.array_equal(self.start, other.start) and np.array_equal(self.end, other.end)

    def __repr__(self):
        return f"Segment({self.start.tolist()}, {self.end.tolist()})"


@dataclass(frozen=True, eq=False)
class Curve:
    """Immutable polygonal curve with cached arc length."""

    vertices: np.ndarray
    cumulative_length: np.ndarray = field(init=False, repr=False)

    def __init__(self, vertices, dim: int | None = None):
        pts = vertices.vertices if isinstance(vertices, Curve) else as_points(vertices, dim)
        object.__setattr__(self, "vertices", pts)
        cum = np.zeros(len(pts))
        if len(pts) > 1:
            np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1), out=cum[1:])
        cum.setflags(write=False)
        object.__setattr__(self, "cumulative_length", cum)

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other):
        if not isinstance(other, Curve):
            return NotImplemented
        return np.array_equal(self.vertices, other.vertices)

    def __repr__(self):
        return f"Curve(n={len(self)}, dim={self.dim})"

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_edges(self) -> int:
        return len(self.vertices) - 1

    @property
    def length(self) -> float:
        return float(self.cumulative_length[-1])

    @property
    def edge_starts(self) -> np.ndarray:
        return self.vertices[:-1]

    @property
    def edge_ends(self) -> np.ndarray:
        return self.vertices[1:]

    def position(self, edge_index: int, fraction: float) -> CurvePosition:
        """Validated, canonical position: ``(k, 1)`` becomes ``(k + 1, 0)``
        except on the last edge."""
        last = max(self.n_edges, 1)
        if not 1 <= edge_index <= last:
            raise GeometryError(f"edge index {edge_index} outside [1, {last}]")
        if fraction == 1.0 and edge_index < last:
            return CurvePosition(edge_index + 1, 0.0)
        return CurvePosition(edge_index, float(fraction))

    def position_at_param(self, s: float) -> CurvePosition:
        """Canonical position for the 0-based global parameter ``s``."""
        last = max(self.n_edges, 1)
        s = min(max(float(s), 0.0), float(max(self.n_edges, 0)))
        k = min(int(math.floor(s)), last - 1)
        return self.position(k + 1, min(max(s - k, 0.0), 1.0))

    def start(self) -> CurvePosition:
        return CurvePosition(1, 0.0)

    def end(self) -> CurvePosition:
        return CurvePosition(max(self.n_edges, 1), 1.0 if self.n_edges else 0.0)

    def point_at_param(self, s: float) -> np.ndarray:
        return point_at(self, self.position_at_param(s))


def points_at_params(curve: Curve, s) -> np.ndarray:
    """Vectorised :meth:`Curve.point_at_param` over 0-based global parameters."""
    s = np.asarray(s, dtype=float)
    V = curve.vertices
    if len(V) == 1:
        return np.broadcast_to(V[0], (len(s), V.shape[1])).copy()
    e = np.clip(np.floor(s).astype(np.int64), 0, len(V) - 2)
    f = np.clip(s - e, 0.0, 1.0)[:, None]
    return V[e] + f * (V[e + 1] - V[e])


def point_at(curve: Curve, pos: CurvePosition) -> np.ndarray:
    """Point of ``curve`` at ``pos`` (convex combination of the edge ends)."""
    if curve.n_edges == 0:
        if pos.edge_index != 1:
            raise GeometryError("a single-vertex curve only has edge index 1")
        return curve.vertices[0]
    if pos.edge_index > curve.n_edges:
        raise GeometryError(f"edge index {pos.edge_index} outside [1, {curve.n_edges}]")
    a = curve.vertices[pos.edge_index - 1]
    b = curve.vertices[pos.edge_index]
    x = pos.fraction
    if x == 0.0:
        return a
    if x == 1.0:
        return b
    return (1.0 - x) * a + x * b


def _canonical(curve: Curve, pos: CurvePosition) -> CurvePosition:
    return curve.position(pos.edge_index, pos.fraction)


def subcurve(curve: Curve, a: CurvePosition, b: CurvePosition) -> Curve:
    """Polygonal curve from ``point_at(a)`` to ``point_at(b)`` through every
    source vertex strictly between them."""
    a, b = _canonical(curve, a), _canonical(curve, b)
    if b < a:
        raise GeometryError(f"subcurve endpoints out of order: {a} > {b}")
    pa = point_at(curve, a)
    if a == b:
        return Curve([pa])
    # 0-based vertex j lies strictly inside iff a.param < j < b.param
    first = a.edge_index  # vertex at the end of edge a
    last = b.edge_index - 1 if b.fraction > 0.0 else b.edge_index - 2
    inner = curve.vertices[first:last + 1] if last >= first else curve.vertices[:0]
    return Curve(np.vstack([pa[None, :], inner, point_at(curve, b)[None, :]]))


def chord_clip(seg: Segment, center, radius: float) -> Segment | None:
    """Part of ``seg`` inside the closed ball ``B(center, radius)``, or ``None``."""
    if not radius > 0:
        raise GeometryError(f"radius must be positive, got {radius}")
    c = as_point(center)
    lo, hi = segment_ball_interval(seg.start, seg.end, c, radius)
    if lo > hi:
        return None
    d = seg.end - seg.start
    return Segment(seg.start + lo * d, seg.start + hi * d)


def segment_ball_interval(a, b, c, radius: float) -> tuple[float, float]:
    """Parameter interval ``[lo, hi]`` of ``a + t (b - a)``, ``t in [0, 1]``,
    inside the closed ball; ``lo > hi`` when empty."""
    lo, hi = segment_ball_intervals(
        np.asarray(a, dtype=float)[None, :],
        np.asarray(b, dtype=float)[None, :],
        np.asarray(c, dtype=float)[None, :],
        radius,
    )
    return float(lo[0]), float(hi[0])


def segment_ball_intervals(starts, ends, centers, radii):
    """Vectorised :func:`segment_ball_interval` over rows.

    Returns arrays ``lo, hi``; empty rows have ``lo = 1, hi = 0``.
    """
    d = ends - starts
    w = starts - centers
    aa = np.einsum("ij,ij->i", d, d)
    bb = np.einsum("ij,ij->i", d, w)
    cc = np.einsum("ij,ij->i", w, w) - np.square(radii)
    lo = np.ones(len(d))
    hi = np.zeros(len(d))
    degen = aa == 0.0
    inside_pt = degen & (cc <= 0.0)
    lo[inside_pt] = 0.0
    hi[inside_pt] = 1.0
    nd = ~degen
    disc = bb[nd] * bb[nd] - aa[nd] * cc[nd]
    ok = disc >= 0.0
    root = np.sqrt(np.where(ok, disc, 0.0))
    t0 = np.maximum((-bb[nd] - root) / aa[nd], 0.0)
    t1 = np.minimum((-bb[nd] + root) / aa[nd], 1.0)
    ok &= t0 <= t1
    lo[nd] = np.where(ok, t0, 1.0)
    hi[nd] = np.where(ok, t1, 0.0)
    return lo, hi


def point_segment_distances(points, starts, ends) -> np.ndarray:
    """Row-wise Euclidean distance from ``points[i]`` to segment ``i``."""
    d = ends - starts
    w = points - starts
    aa = np.einsum("ij,ij->i", d, d)
    t = np.einsum("ij,ij->i", w, d) / np.where(aa > 0.0, aa, 1.0)
    t = np.clip(t, 0.0, 1.0)
    return np.linalg.norm(w - t[:, None] * d, axis=1)


def point_segment_distance(p, seg: Segment) -> float:
    return float(
        point_segment_distances(as_point(p)[None, :], seg.start[None, :], seg.end[None, :])[0]
    )


def normalized_vertices(curve: Curve) -> np.ndarray:
    """Vertices with repeated points and straight pass-through vertices removed.

    Two curves with equal normalized vertices trace the same path in the same
    direction, so their Frechet distance is zero.
    """
    pts = [curve.vertices[0]]
    for p in curve.vertices[1:]:
        if np.array_equal(p, pts[-1]):
            continue
        if len(pts) >= 2:
            u = pts[-1] - pts[-2]
            v = p - pts[-1]
            cross = np.linalg.norm(np.outer(u, v) - np.outer(v, u))
            if cross == 0.0 and float(np.dot(u, v)) > 0.0:
                pts[-1] = p
                continue
        pts.append(p)
    return np.array(pts)


def same_path(a: Curve, b: Curve) -> bool:
    if a.dim != b.dim:
        return False
    na, nb = normalized_vertices(a), normalized_vertices(b)
    return na.shape == nb.shape and np.array_equal(na, nb)


def as_curve(obj) -> Curve:
    return obj if isinstance(obj, Curve) else Curve(obj)


def bounding_diagonal(*curves: Curve) -> float:
    pts = np.vstack([c.vertices for c in curves])
    return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))


def segments_of(curve: Curve) -> Sequence[Segment]:
    return [Segment(a, b) for a, b in zip(curve.edge_starts, curve.edge_ends)]
