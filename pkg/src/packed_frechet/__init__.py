"""(1+eps)-approximate Frechet distance between a c-packed curve and a general curve."""

from .alignment import Witness, replay_leash
from .decider import (
    CandidateSet,
    DecisionOutcome,
    EpsilonSchedule,
    LayeredGraph,
    Verdict,
    build_candidate_sets,
    build_layer_edges,
    complete_decide,
    fuzzy_decide,
)
from .exact import decide_frechet, exact_frechet, segment_subcurve_frechet
from .geometry import Curve, CurvePosition, GeometryError, Segment, chord_clip, subcurve
from .optimizer import (
    DistanceSet,
    SearchResult,
    approx_frechet,
    approximate_distance_set,
    refine_interval,
    search_critical_values,
)
from .packedness import generate_c_packed_curve, sampled_packedness
from .proximity import SegmentIndex, build_index, query_edges
from .simplify import Simplification, simplify
from .wspd import wspd_pairs

__all__ = [
    "CandidateSet", "Curve", "CurvePosition", "DecisionOutcome", "DistanceSet", "EpsilonSchedule",
    "GeometryError", "LayeredGraph", "SearchResult", "Segment", "SegmentIndex", "Simplification",
    "Verdict", "Witness", "approx_frechet", "approximate_distance_set", "build_candidate_sets",
    "build_index", "build_layer_edges", "chord_clip", "complete_decide", "decide_frechet",
    "exact_frechet", "fuzzy_decide", "generate_c_packed_curve", "query_edges", "refine_interval",
    "replay_leash", "sampled_packedness", "search_critical_values", "segment_subcurve_frechet",
    "simplify", "subcurve", "wspd_pairs",
]
