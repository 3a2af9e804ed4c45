"""(1+eps)-approximate Frechet distance driven by the complete decider.

The search first brackets ``d_F`` between a cheap lower bound (endpoint
distances) and the leash of a cheap explicit alignment.  It then binary
searches the approximate distance set Z of P restricted to that bracket,
probing ``r = x / delta``; between two consecutive values of Z the
``delta r``-simplification of P is fixed.  A final geometric bisection
narrows the bracket until its ratio is at most ``1 + eps/3``.

Every returned value is an upper bound certified by an explicit alignment
whose leash does not exceed it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .alignment import Breakpoints, Witness, make_witness, replay_leash, trivial_alignment
from .decider import DecisionOutcome, EpsilonSchedule, FuzzyRun, IndexCache, Verdict, complete_decide
from .geometry import Curve, GeometryError, as_curve, same_path
from .simplify import Simplification, simplify
from .wspd import build_wspd


@dataclass(frozen=True, eq=False)
class DistanceSet:
    """Sorted positive values bracketing every pairwise vertex distance of P
    within a factor ``1 + eps``."""

    values: np.ndarray
    eps: float

    def __len__(self) -> int:
        return len(self.values)

    def bracket(self, y: float) -> tuple[float, float]:
        """The tightest ``x <= y <= x'`` from the set."""
        k = int(np.searchsorted(self.values, y, side="right"))
        if k == 0 or (k == len(self.values) and self.values[-1] < y):
            raise GeometryError(f"{y} is outside the distance set")
        x = float(self.values[k - 1])
        if x == y:
            return x, x
        return x, float(self.values[k])


def _ladder_parts(P: Curve, eps: float) -> tuple[np.ndarray, np.ndarray]:
    P = as_curve(P)
    if not eps > 0:
        raise GeometryError(f"eps must be positive, got {eps}")
    if len(P) < 2:
        raise GeometryError("distance set needs at least two vertices")
    s = 8.0 / eps
    rho = build_wspd(P.vertices, s).representative_distances()
    rho = np.unique(rho[rho > 0])
    lo, hi = 1.0 - 2.0 / s, 1.0 + 2.0 / s
    steps = math.ceil(math.log(hi / lo) / math.log1p(eps))
    # one extra rung at each end absorbs rounding in the products
    ladder = lo * (1.0 + eps) ** np.arange(-1, steps + 2)
    return rho, ladder


def approximate_distance_set(P: Curve, eps: float) -> DistanceSet:
    """Ladders of ratio ``1 + eps`` around the representative distance of
    every pair of an ``8/eps``-WSPD of P's vertices."""
    rho, ladder = _ladder_parts(P, eps)
    return DistanceSet(np.unique(np.outer(rho, ladder).ravel()), float(eps))


def distance_values_between(P: Curve, eps: float, a: float, b: float) -> np.ndarray:
    """The values of ``approximate_distance_set(P, eps)`` strictly inside
    ``(a, b)``, without materialising the rest of the set."""
    rho, ladder = _ladder_parts(P, eps)
    rho = rho[(rho * ladder[-1] > a) & (rho * ladder[0] < b)]
    vals = np.unique(np.outer(rho, ladder).ravel())
    return vals[(vals > a) & (vals < b)]


# -- cheap bounds -----------------------------------------------------------


def _arclength_alignment(P: Curve, Q: Curve) -> Breakpoints:
    """Both walkers move at constant relative arclength speed."""

    def fractions(c: Curve) -> np.ndarray:
        lens = np.linalg.norm(np.diff(c.vertices, axis=0), axis=1)
        # zero-length edges get a tiny weight so fractions strictly increase
        lens = np.where(lens > 0, lens, 1e-12 * (lens.max() + 1.0))
        f = np.concatenate([[0.0], np.cumsum(lens)])
        return f / f[-1]

    fp, fq = fractions(P), fractions(Q)
    f = np.unique(np.concatenate([fp, fq]))
    s = np.interp(f, fp, np.arange(len(P), dtype=float))
    t = np.interp(f, fq, np.arange(len(Q), dtype=float))
    s[-1], t[-1] = float(P.n_edges), float(Q.n_edges)
    return list(zip(s.tolist(), t.tolist()))


def lower_bound(P: Curve, Q: Curve) -> float:
    return float(max(
        np.linalg.norm(P.vertices[0] - Q.vertices[0]),
        np.linalg.norm(P.vertices[-1] - Q.vertices[-1]),
    ))


def upper_bound_alignment(P: Curve, Q: Curve) -> tuple[float, Breakpoints]:
    """The better of the trivial and the arclength alignments."""
    best = None
    for bps in (trivial_alignment(P, Q), _arclength_alignment(P, Q)):
        leash = replay_leash(P, Q, bps)
        if best is None or leash < best[0]:
            best = (leash, bps)
    return best


# -- search -----------------------------------------------------------------


@dataclass
class SearchStats:
    probes: int = 0
    fuzzy_calls: int = 0
    z_probed_range: int = 0
    refine_probes: int = 0

    def record(self, out: DecisionOutcome) -> None:
        self.probes += 1
        self.fuzzy_calls += out.fuzzy_calls


@dataclass(frozen=True, eq=False)
class SearchResult:
    """``kind`` is ``"approx"`` (``value`` is final) or ``"interval"``
    (``d_F`` lies in ``[lo, hi]`` and ``K_star`` is the simplification
    valid throughout it)."""

    kind: str
    value: float | None = None
    lo: float | None = None
    hi: float | None = None
    K_star: Simplification | None = None
    run: FuzzyRun | None = None
    alignment: Breakpoints | None = None


@dataclass
class _Context:
    P: Curve
    Q: Curve
    sched: EpsilonSchedule
    cache: IndexCache = field(default_factory=IndexCache)
    stats: SearchStats = field(default_factory=SearchStats)
    threads: int | None = None

    def probe(self, r: float) -> DecisionOutcome:
        out = complete_decide(self.P, self.Q, r, self.sched, cache=self.cache, threads=self.threads)
        self.stats.record(out)
        return out


def _search(ctx: _Context) -> SearchResult:
    P, Q, sched = ctx.P, ctx.Q, ctx.sched
    delta = sched.delta
    lo = lower_bound(P, Q)
    hi, hi_align = upper_bound_alignment(P, Q)
    hi_run = None
    if hi <= lo * (1.0 + sched.eps / 3.0):
        return SearchResult("approx", value=hi, alignment=hi_align)
    if len(P) >= 2:
        inside = distance_values_between(P, sched.eps, delta * lo, delta * hi)
        ctx.stats.z_probed_range = len(inside)
        a, b = -1, len(inside)
        while b - a > 1:
            mid = (a + b) // 2
            out = ctx.probe(inside[mid] / delta)
            if out.verdict is Verdict.APPROX:
                return SearchResult("approx", value=out.upper, run=out.run)
            if out.verdict is Verdict.LE:
                b, hi, hi_run, hi_align = mid, out.r, out.run, None
            else:
                a, lo = mid, out.r
        if 0 <= a and b < len(inside) and inside[b] <= (1.0 + sched.eps) * inside[a]:
            return SearchResult("approx", value=hi, run=hi_run)
    return SearchResult(
        "interval", lo=lo, hi=hi, K_star=simplify(P, delta * lo) if lo > 0 else None,
        run=hi_run, alignment=hi_align,
    )


def search_critical_values(P: Curve, Q: Curve, sched: EpsilonSchedule) -> SearchResult:
    P, Q = as_curve(P), as_curve(Q)
    return _search(_Context(P, Q, sched))


def _refine(ctx: _Context, res: SearchResult) -> SearchResult:
    lo, hi = res.lo, res.hi
    if lo is None or hi is None:
        raise GeometryError("refinement needs an interval")
    run, align = res.run, res.alignment
    target = 1.0 + ctx.sched.eps / 3.0
    if lo <= 0:
        # no positive lower bound: halve until a probe says GT
        floor = 1e-12 * hi
        while hi > floor:
            out = ctx.probe(hi / 2.0)
            ctx.stats.refine_probes += 1
            if out.verdict is Verdict.APPROX:
                return SearchResult("approx", value=out.upper, run=out.run)
            if out.verdict is Verdict.LE:
                hi, run, align = out.r, out.run, None
            else:
                lo = out.r
                break
        else:
            return SearchResult("approx", value=hi, run=run, alignment=align)
    while hi > lo * target:
        mid = math.sqrt(lo * hi)
        out = ctx.probe(mid)
        ctx.stats.refine_probes += 1
        if out.verdict is Verdict.APPROX:
            return SearchResult("approx", value=out.upper, run=out.run)
        if out.verdict is Verdict.LE:
            hi, run, align = mid, out.run, None
        else:
            lo = mid
    return SearchResult("approx", value=hi, lo=lo, hi=hi, run=run, alignment=align)


def refine_interval(P: Curve, Q: Curve, sched: EpsilonSchedule, interval: SearchResult) -> float:
    """Geometric bisection of ``[lo, hi]`` until ``hi / lo <= 1 + eps/3``."""
    if interval.lo is None or not interval.lo > 0:
        raise GeometryError("interval lower end must be positive")
    return _refine(_Context(as_curve(P), as_curve(Q), sched), interval).value


# -- entry point ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ApproxResult:
    """Value with ``d_F <= value <= (1+eps) d_F`` and an alignment whose leash
    is at most ``value``.  Unpacks as ``value, witness``."""

    value: float
    witness: Witness
    eps: float
    stats: SearchStats
    method: str

    def __iter__(self):
        yield self.value
        yield self.witness


def approx_frechet(P, Q, eps: float, *, threads: int | None = None) -> ApproxResult:
    sched = EpsilonSchedule(eps)
    P, Q = as_curve(P), as_curve(Q)
    if P.dim != Q.dim:
        raise GeometryError("curves must share a dimension")
    stats = SearchStats()
    if same_path(P, Q):
        return ApproxResult(0.0, make_witness(P, Q, _identity_alignment(P, Q)), eps, stats, "identity")
    if len(P) == 1 or len(Q) == 1:
        if len(P) == 1:
            d = float(np.linalg.norm(Q.vertices - P.vertices[0], axis=1).max())
        else:
            d = float(np.linalg.norm(P.vertices - Q.vertices[0], axis=1).max())
        return ApproxResult(d, make_witness(P, Q, trivial_alignment(P, Q)), eps, stats, "point")
    ctx = _Context(P, Q, sched, stats=stats, threads=threads)
    res = _search(ctx)
    method = "search"
    if res.kind == "interval":
        res = _refine(ctx, res)
        method = "refine"
    bps = res.alignment if res.alignment is not None else res.run.alignment(Q)
    return ApproxResult(float(res.value), make_witness(P, Q, bps), eps, stats, method)


def _identity_alignment(P: Curve, Q: Curve) -> Breakpoints:
    if len(P) == 1 or len(Q) == 1:
        return trivial_alignment(P, Q)
    return _arclength_alignment(P, Q)
