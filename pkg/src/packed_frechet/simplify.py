"""Greedy mu-simplification of a polygonal curve.

Starting from the first vertex, the scan marks the first vertex that is at
least ``mu`` away from the current marked vertex, makes it current, and
repeats; the final vertex is always marked.  The result is within Frechet
distance ``mu`` of the input and all of its edges except the last have
length at least ``mu``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .geometry import Curve, GeometryError


@dataclass(frozen=True, eq=False)
class Simplification:
    curve: Curve
    mu: float
    marked: tuple[int, ...]

    @property
    def key(self) -> tuple[int, ...]:
        return self.marked

    def source_param(self, k: int) -> int:
        """0-based source vertex index of simplified vertex ``k``."""
        return self.marked[k]


@njit(cache=True)
def _marked_kernel(points, mu2):
    n, d = points.shape
    out = np.empty(n, dtype=np.int64)
    out[0] = 0
    k = 1
    cur = 0
    for i in range(1, n):
        s = 0.0
        for j in range(d):
            w = points[i, j] - points[cur, j]
            s += w * w
        if s >= mu2:
            out[k] = i
            k += 1
            cur = i
    if out[k - 1] != n - 1:
        out[k] = n - 1
        k += 1
    return out[:k]


def marked_vertices(points: np.ndarray, mu: float) -> list[int]:
    pts = np.ascontiguousarray(points, dtype=float)
    return _marked_kernel(pts, float(mu) * float(mu)).tolist()


def simplify(pi: Curve, mu: float) -> Simplification:
    """The greedy mu-simplification; a vertex at distance exactly ``mu`` is marked."""
    if not mu > 0:
        raise GeometryError(f"mu must be positive, got {mu}")
    marked = marked_vertices(pi.vertices, float(mu))
    return Simplification(Curve(pi.vertices[marked]), float(mu), tuple(marked))


def simplification_critical_values(pi: Curve) -> np.ndarray:
    """Sorted distinct pairwise vertex distances ``L(pi)``.

    The marked set of :func:`simplify` can only change when ``mu`` crosses
    one of these values.
    """
    pts = pi.vertices
    n = len(pts)
    if n < 2:
        return np.empty(0)
    i, j = np.triu_indices(n, 1)
    return np.unique(np.linalg.norm(pts[i] - pts[j], axis=1))


def simplification_alignment(simp: Simplification) -> list[tuple[float, float]]:
    """Monotone matching between the source curve and its simplification.

    Returns breakpoints ``(source_param, simplified_param)`` (0-based global
    parameters).  The source walks the skipped vertices while the simplified
    curve waits at the current marked vertex, then both traverse the closing
    edge together, so the leash never exceeds ``mu``.
    """
    marked = simp.marked
    pts: list[tuple[float, float]] = [(0.0, 0.0)]
    for e in range(len(marked) - 1):
        a, b = marked[e], marked[e + 1]
        for j in range(a + 1, b):
            pts.append((float(j), float(e)))
        pts.append((float(b), float(e + 1)))
    return pts
