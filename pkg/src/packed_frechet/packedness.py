"""Packedness estimation and generation of c-packed test curves.

A curve is c-packed when every ball of radius ``r`` contains at most ``c r``
of its length.  The estimator here is a lower bound: it takes the maximum
ratio over a finite ball family (centres at vertices and edge midpoints;
for each centre, radii at its distance to every vertex and half of that).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .geometry import Curve, GeometryError, segment_ball_intervals


@dataclass(frozen=True)
class PackednessEstimate:
    value: float
    ball_family: str
    center: tuple[float, ...] | None = None
    radius: float | None = None

    def __float__(self) -> float:
        return self.value


BALL_FAMILY = (
    "centres: all vertices and edge midpoints; radii: distance from the centre "
    "to every vertex, and half of each"
)


def ball_family(curve: Curve):
    """Yield ``(center, radii)`` for every centre of the sampled family."""
    pts = curve.vertices
    centers = np.vstack([pts, 0.5 * (pts[:-1] + pts[1:])])
    for c in centers:
        d = np.linalg.norm(pts - c, axis=1)
        radii = np.unique(np.concatenate([d, 0.5 * d]))
        yield c, radii[radii > 0]


def length_in_ball(curve: Curve, center, radius: float) -> float:
    """Total length of ``curve`` inside the closed ball (direct clipping)."""
    S, E = curve.edge_starts, curve.edge_ends
    if len(S) == 0:
        return 0.0
    c = np.broadcast_to(np.asarray(center, dtype=float), S.shape)
    lo, hi = segment_ball_intervals(S, E, c, np.full(len(S), float(radius)))
    lens = np.linalg.norm(E - S, axis=1)
    return float(np.sum(np.maximum(hi - lo, 0.0) * lens))


@njit(cache=True)
def _center_sweep(c, S, E, radii):
    """Max over sorted ``radii`` of (length inside B(c, rho)) / rho."""
    ne = S.shape[0]
    d = S.shape[1]
    lens = np.empty(ne)
    h2 = np.empty(ne)
    s0 = np.empty(ne)
    s1 = np.empty(ne)
    dmin = np.empty(ne)
    dmax = np.empty(ne)
    for e in range(ne):
        L2 = 0.0
        wS = 0.0
        wE = 0.0
        dot = 0.0
        for k in range(d):
            de = E[e, k] - S[e, k]
            w = c[k] - S[e, k]
            L2 += de * de
            wS += w * w
            dot += w * de
            v = c[k] - E[e, k]
            wE += v * v
        L = math.sqrt(L2)
        lens[e] = L
        dmax[e] = math.sqrt(max(wS, wE))
        if L == 0.0:
            h2[e] = wS
            s0[e] = 0.0
            s1[e] = 0.0
            dmin[e] = math.sqrt(wS)
            continue
        proj = dot / L
        h2[e] = max(wS - proj * proj, 0.0)
        s0[e] = -proj
        s1[e] = L - proj
        if proj <= 0.0:
            dmin[e] = math.sqrt(wS)
        elif proj >= L:
            dmin[e] = math.sqrt(wE)
        else:
            dmin[e] = math.sqrt(h2[e])
    by_min = np.argsort(dmin)
    by_max = np.argsort(dmax)
    active = np.empty(ne, dtype=np.int64)
    slot = np.full(ne, -1, dtype=np.int64)
    n_active = 0
    full = 0.0
    pa = 0
    pb = 0
    best = 0.0
    best_r = 0.0
    for rho in radii:
        while pa < ne and dmin[by_min[pa]] <= rho:
            e = by_min[pa]
            slot[e] = n_active
            active[n_active] = e
            n_active += 1
            pa += 1
        while pb < ne and dmax[by_max[pb]] <= rho:
            e = by_max[pb]
            full += lens[e]
            k = slot[e]
            last = active[n_active - 1]
            active[k] = last
            slot[last] = k
            slot[e] = -1
            n_active -= 1
            pb += 1
        part = 0.0
        for k in range(n_active):
            e = active[k]
            w2 = rho * rho - h2[e]
            if w2 <= 0.0:
                continue
            w = math.sqrt(w2)
            seg = min(s1[e], w) - max(s0[e], -w)
            if seg > 0.0:
                part += seg
        ratio = (full + part) / rho
        if ratio > best:
            best = ratio
            best_r = rho
    return best, best_r


def sampled_packedness(pi: Curve) -> PackednessEstimate:
    """Lower bound on the packedness constant of ``pi`` over the sampled family."""
    if pi.n_edges < 1:
        raise GeometryError("packedness needs at least one edge")
    S = np.ascontiguousarray(pi.edge_starts)
    E = np.ascontiguousarray(pi.edge_ends)
    best, arg_c, arg_r = 0.0, None, None
    for c, radii in ball_family(pi):
        if len(radii) == 0:
            continue
        val, rho = _center_sweep(np.ascontiguousarray(c), S, E, radii)
        if val > best:
            best, arg_c, arg_r = val, c, rho
    return PackednessEstimate(
        float(best),
        BALL_FAMILY,
        None if arg_c is None else tuple(float(x) for x in arg_c),
        arg_r,
    )


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def generate_c_packed_curve(
    n: int, c_target: float, dim: int, seed: int, *, verify: bool = False
) -> Curve:
    """Deterministic ``n``-vertex curve that is ``c_target``-packed.

    The walk drifts along a random axis and every step stays inside the cone
    of half-angle ``theta`` around it, with ``cos(theta) > 2 / c_target``.
    Progress along the axis is then strictly monotone, so any ball of radius
    ``r`` holds at most ``2 r / cos(theta) < c_target r`` of the curve.  With
    ``verify`` the sampled estimate is checked and offending steps redrawn.
    """
    if n < 2:
        raise GeometryError("n must be at least 2")
    if dim < 1:
        raise GeometryError("dim must be at least 1")
    if not c_target >= 2.0:
        raise GeometryError(f"no curve is c-packed for c < 2 (got {c_target})")
    rng = np.random.default_rng(seed)
    axis = _unit(rng.normal(size=dim)) if dim > 1 else np.ones(1)
    # 2% margin on the cone angle keeps the bound strict
    max_tan = math.tan(0.98 * math.acos(min(1.0, 2.0 / c_target))) if dim > 1 else 0.0
    for _attempt in range(16):
        steps = np.empty((n - 1, dim))
        lateral = np.zeros(dim)
        for k in range(n - 1):
            if max_tan > 0.0:
                kick = rng.normal(scale=0.6 * max_tan, size=dim)
                kick -= (kick @ axis) * axis
                lateral = 0.7 * lateral + kick
                norm = np.linalg.norm(lateral)
                if norm > 0.999 * max_tan:
                    lateral *= 0.999 * max_tan / norm
            length = rng.uniform(0.5, 1.5)
            steps[k] = length * _unit(axis + lateral)
        pts = np.vstack([np.zeros((1, dim)), np.cumsum(steps, axis=0)])
        curve = Curve(np.round(pts, 12))
        if not verify or sampled_packedness(curve).value <= c_target:
            return curve
    raise GeometryError("could not generate a curve within the packedness target")


def companion_curve(
    P: Curve, m: int, seed: int, noise: float = 0.3, backtrack: float = 0.1
) -> Curve:
    """A general (not necessarily packed) curve that loosely follows ``P``.

    Samples ``m`` arclength stations along P, lets a fraction of them step
    back by up to two mean station gaps, and adds uniform noise of at most
    ``noise`` times the mean edge length per coordinate.  Both perturbations
    are bounded, so the Frechet distance to P does not drift with ``m``.
    """
    rng = np.random.default_rng(seed)
    total = P.length
    if m < 1:
        raise GeometryError("m must be at least 1")
    stations = np.sort(rng.uniform(0.0, total, size=m))
    stations[0], stations[-1] = 0.0, total
    back = rng.random(m) < backtrack
    back[[0, -1]] = False
    stations[back] = np.maximum(stations[back] - rng.uniform(0.0, 2.0 * total / max(m, 1), back.sum()), 0.0)
    cum = P.cumulative_length
    pts = np.empty((m, P.dim))
    for k in range(P.dim):
        pts[:, k] = np.interp(stations, cum, P.vertices[:, k]) if P.n_edges else P.vertices[0, k]
    scale = noise * (total / max(P.n_edges, 1))
    pts += rng.uniform(-scale, scale, size=pts.shape)
    return Curve(np.round(pts, 12))


def random_walk_curve(m: int, dim: int, seed: int, step: float = 1.0) -> Curve:
    rng = np.random.default_rng(seed)
    pts = np.cumsum(rng.normal(scale=step, size=(m, dim)), axis=0)
    return Curve(np.round(pts, 12))
