"""Fat train tracks: switch combinatorics, carried weight vectors, and
geometric audits of embedded branches.

A track is a set of indexed fat branches (quadrangles), each with two
outermost tie ends addressed as (branch, side) with side 0 or 1.  Every
end belongs to exactly one switch: a triple (one big end against two
small ends) or a pair (two ends glued along a whole tie, no switch
point).  Weight vectors live per branch; exact arithmetic uses rational
multiples of pi so grafting's 2*pi bookkeeping never drowns in float
noise.

An embedded branch stores sampled rails (the long sides, following the
lamination) and sampled outermost ties.  Audits measure tie lengths,
discrete geodesic curvature of rails and ties, and corner angles.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidParams,
    NoEmbedding,
    NotCarried,
)
from .mobius import MoebiusTransform, PointH3, standardize
from .hyperbolic import PointH2, dist_h2
from .lamination import SegmentH2
from .surface import FuchsianSurface, GroupWord, word_length

RATIONAL_PI = "rational-pi"
FLOAT = "float"


# --- weight vectors ----------------------------------------------------------------

@dataclass(frozen=True)
class WeightVector:
    """Per-branch weights.  kind "rational-pi" stores exact Fractions in
    units of pi; kind "float" stores plain reals.  Difference vectors may
    carry negative entries; measures proper are nonnegative."""

    values: tuple
    kind: str

    def __post_init__(self):
        if self.kind not in (RATIONAL_PI, FLOAT):
            raise InvalidParams(f"unknown weight kind {self.kind!r}")
        if self.kind == RATIONAL_PI:
            vals = tuple(Fraction(v) for v in self.values)
        else:
            vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)

    @classmethod
    def rational_pi(cls, values) -> "WeightVector":
        return cls(tuple(values), RATIONAL_PI)

    @classmethod
    def floats(cls, values) -> "WeightVector":
        return cls(tuple(values), FLOAT)

    def __len__(self) -> int:
        return len(self.values)

    def as_floats(self):
        if self.kind == RATIONAL_PI:
            return tuple(float(v) * math.pi for v in self.values)
        return self.values

    def to_json(self):
        if self.kind == RATIONAL_PI:
            vals = [[v.numerator, v.denominator] for v in self.values]
        else:
            vals = list(self.values)
        return {"kind": self.kind, "values": vals}

    @classmethod
    def from_json(cls, data) -> "WeightVector":
        if data["kind"] == RATIONAL_PI:
            return cls.rational_pi(Fraction(n, d) for n, d in data["values"])
        return cls.floats(data["values"])


# --- the track ---------------------------------------------------------------------

@dataclass(frozen=True)
class BranchEmbedding:
    """Sampled quadrangle: rails run the length of the branch, ties run
    from rail_low to rail_high at the two ends."""

    rail_low: tuple
    rail_high: tuple
    tie_start: tuple
    tie_end: tuple

    def to_json(self):
        def dump(curve):
            return [[p.x, p.y] for p in curve]

        return {
            "rail_low": dump(self.rail_low),
            "rail_high": dump(self.rail_high),
            "tie_start": dump(self.tie_start),
            "tie_end": dump(self.tie_end),
        }

    @classmethod
    def from_json(cls, data) -> "BranchEmbedding":
        def load(curve):
            return tuple(PointH2(x, y) for x, y in curve)

        return cls(
            load(data["rail_low"]),
            load(data["rail_high"]),
            load(data["tie_start"]),
            load(data["tie_end"]),
        )


class TrainTrack:
    __slots__ = ("num_branches", "triples", "pairs", "embedding", "rail_floor")

    def __init__(self, num_branches, triples=(), pairs=(), embedding=None,
                 rail_floor=None):
        num_branches = int(num_branches)
        if num_branches < 1:
            raise InvalidParams("a track needs at least one branch")
        triples = tuple(tuple(tuple(e) for e in t) for t in triples)
        pairs = tuple(tuple(tuple(e) for e in p) for p in pairs)
        seen = set()
        for group in (*triples, *pairs):
            for end in group:
                j, s = end
                if not (0 <= j < num_branches and s in (0, 1)):
                    raise InvalidParams(f"bad branch end {end}")
                if end in seen:
                    raise InvalidParams(f"end {end} used by two switches")
                seen.add(end)
        missing = {
            (j, s) for j in range(num_branches) for s in (0, 1)
        } - seen
        if missing:
            raise InvalidParams(f"ends not attached to any switch: {sorted(missing)}")
        if embedding is not None:
            embedding = tuple(embedding)
            if len(embedding) != num_branches:
                raise InvalidParams("embedding must cover every branch")
        object.__setattr__(self, "num_branches", num_branches)
        object.__setattr__(self, "triples", triples)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "embedding", embedding)
        object.__setattr__(
            self, "rail_floor", None if rail_floor is None else float(rail_floor)
        )

    def __setattr__(self, name, value):
        raise AttributeError("TrainTrack is immutable")

    def to_json(self):
        out = {
            "branches": self.num_branches,
            "switches": {
                "triples": [list(map(list, t)) for t in self.triples],
                "pairs": [list(map(list, p)) for p in self.pairs],
            },
        }
        if self.rail_floor is not None:
            out["rail_floor"] = self.rail_floor
        if self.embedding is not None:
            out["embedding"] = [b.to_json() for b in self.embedding]
        return out

    @classmethod
    def from_json(cls, data) -> "TrainTrack":
        emb = data.get("embedding")
        if emb is not None:
            emb = [BranchEmbedding.from_json(b) for b in emb]
        return cls(
            data["branches"],
            data["switches"]["triples"],
            data["switches"]["pairs"],
            embedding=emb,
            rail_floor=data.get("rail_floor"),
        )


def switch_matrix(track: TrainTrack) -> np.ndarray:
    """One row per triple (+1 on the big branch, -1 per small branch)
    followed by one equality row per pair joining distinct branches."""
    rows = []
    for big, small1, small2 in track.triples:
        row = [0] * track.num_branches
        row[big[0]] += 1
        row[small1[0]] -= 1
        row[small2[0]] -= 1
        rows.append(row)
    for e1, e2 in track.pairs:
        if e1[0] != e2[0]:
            row = [0] * track.num_branches
            row[e1[0]] += 1
            row[e2[0]] -= 1
            rows.append(row)
    return np.array(rows, dtype=int).reshape(len(rows), track.num_branches)


def switch_residual(track: TrainTrack, w: WeightVector):
    """Per-row absolute switch defects; exact Fractions for rational-pi
    weights."""
    if len(w) != track.num_branches:
        raise DimensionMismatch(
            f"{len(w)} weights for {track.num_branches} branches"
        )
    m = switch_matrix(track)
    out = []
    for row in m:
        acc = sum(int(c) * v for c, v in zip(row, w.values) if c)
        out.append(abs(acc))
    return out


def is_carried(track: TrainTrack, w: WeightVector, fully: bool = False,
               tol: float = 1e-9) -> bool:
    """Nonnegative and switch-balanced; fully carried needs all weights
    strictly positive.  Exact for rational-pi vectors."""
    if len(w) != track.num_branches:
        raise DimensionMismatch(
            f"{len(w)} weights for {track.num_branches} branches"
        )
    if any(v < 0 for v in w.values):
        return False
    if fully and any(v == 0 for v in w.values):
        return False
    residuals = switch_residual(track, w)
    if w.kind == RATIONAL_PI:
        return all(r == 0 for r in residuals)
    return all(r <= tol for r in residuals)


def weight_difference(track: TrainTrack, w_prime: WeightVector,
                      w: WeightVector) -> WeightVector:
    """Componentwise w_prime - w; both inputs must be carried.  The
    output balances every switch (exactly in rational-pi)."""
    for v in (w_prime, w):
        if not is_carried(track, v):
            raise NotCarried(f"{v} is not carried by the track")
    if w_prime.kind == RATIONAL_PI and w.kind == RATIONAL_PI:
        return WeightVector.rational_pi(
            a - b for a, b in zip(w_prime.values, w.values)
        )
    return WeightVector.floats(
        a - b for a, b in zip(w_prime.as_floats(), w.as_floats())
    )


# --- geometry: discrete curvature and the audit -------------------------------------

def _direction_at_i(w: complex) -> np.ndarray:
    # unit tangent at i of the geodesic from i toward w
    if abs(w.real) < 1e-300:
        return np.array([0.0, math.copysign(1.0, w.imag - 1.0)])
    c = (abs(w) ** 2 - 1.0) / (2.0 * w.real)
    t = np.array([1.0, c])
    t /= np.linalg.norm(t)
    return t if w.real > 0 else -t


def _directions_from(p: PointH2, targets) -> list:
    # affine isometry z -> (z - x)/y takes p to i
    return [
        _direction_at_i((q.as_complex() - p.x) / p.y) for q in targets
    ]


def corner_angle(p: PointH2, q1: PointH2, q2: PointH2) -> float:
    """Angle at p between the geodesic segments toward q1 and q2."""
    u, v = _directions_from(p, (q1, q2))
    return math.acos(max(-1.0, min(1.0, float(u @ v))))


def polyline_length(points) -> float:
    return sum(dist_h2(a, b) for a, b in zip(points, points[1:]))


def polyline_curvatures(points) -> list:
    """Discrete geodesic curvature at interior samples: turning angle
    over mean arclength, three points at a time."""
    out = []
    for p0, p1, p2 in zip(points, points[1:], points[2:]):
        u, v = _directions_from(p1, (p0, p2))
        turn = math.acos(max(-1.0, min(1.0, -float(u @ v))))
        step = 0.5 * (dist_h2(p0, p1) + dist_h2(p1, p2))
        out.append(turn / step)
    return out


@dataclass(frozen=True)
class AuditReport:
    epsilon: float
    passed: bool
    max_tie_length: float
    max_tie_curvature: float
    max_rail_curvature: float
    max_angle_deviation: float
    min_rail_length: float
    rail_floor: float | None
    branches: tuple

    def to_json(self):
        return {
            "epsilon": self.epsilon,
            "passed": self.passed,
            "maxTieLength": self.max_tie_length,
            "maxTieCurvature": self.max_tie_curvature,
            "maxRailCurvature": self.max_rail_curvature,
            "maxAngleDeviation": self.max_angle_deviation,
            "minRailLength": self.min_rail_length,
            "railFloor": self.rail_floor,
            "branches": list(self.branches),
        }


def geometry_audit(track: TrainTrack, epsilon: float) -> AuditReport:
    """Per-branch maxima of tie length, sampled tie and rail curvature,
    and tie-rail corner deviation from a right angle; passes iff all
    stay below epsilon and the rails clear the length floor."""
    if track.embedding is None:
        raise NoEmbedding("track has no geometric embedding")
    if epsilon <= 0:
        raise InvalidParams("epsilon must be positive")
    branches = []
    for j, emb in enumerate(track.embedding):
        ties = (emb.tie_start, emb.tie_end)
        rails = (emb.rail_low, emb.rail_high)
        tie_len = max(polyline_length(t) for t in ties)
        tie_curv = max(
            (k for t in ties for k in polyline_curvatures(t)), default=0.0
        )
        rail_curv = max(
            (k for r in rails for k in polyline_curvatures(r)), default=0.0
        )
        rail_len = min(polyline_length(r) for r in rails)
        corners = (
            corner_angle(emb.tie_start[0], emb.tie_start[1], emb.rail_low[1]),
            corner_angle(emb.tie_start[-1], emb.tie_start[-2], emb.rail_high[1]),
            corner_angle(emb.tie_end[0], emb.tie_end[1], emb.rail_low[-2]),
            corner_angle(emb.tie_end[-1], emb.tie_end[-2], emb.rail_high[-2]),
        )
        angle_dev = max(abs(a - math.pi / 2.0) for a in corners)
        branches.append(
            {
                "branch": j,
                "tieLength": tie_len,
                "tieCurvature": tie_curv,
                "railCurvature": rail_curv,
                "angleDeviation": angle_dev,
                "railLength": rail_len,
            }
        )
    max_tie = max(b["tieLength"] for b in branches)
    max_tie_curv = max(b["tieCurvature"] for b in branches)
    max_rail_curv = max(b["railCurvature"] for b in branches)
    max_dev = max(b["angleDeviation"] for b in branches)
    min_rail = min(b["railLength"] for b in branches)
    floor_ok = track.rail_floor is None or min_rail >= track.rail_floor
    passed = (
        max_tie < epsilon
        and max_tie_curv < epsilon
        and max_rail_curv < epsilon
        and max_dev < epsilon
        and floor_ok
    )
    return AuditReport(
        epsilon=float(epsilon),
        passed=passed,
        max_tie_length=max_tie,
        max_tie_curvature=max_tie_curv,
        max_rail_curvature=max_rail_curv,
        max_angle_deviation=max_dev,
        min_rail_length=min_rail,
        rail_floor=track.rail_floor,
        branches=tuple(branches),
    )


# --- embedded tracks around closed geodesics ----------------------------------------

def _annulus_embedding(surface: FuchsianSurface, w: GroupWord, radius: float,
                       samples: int) -> BranchEmbedding:
    """Fat annular branch around the closed geodesic of w: rails are the
    two equidistant curves at the given radius, ties are geodesic arcs
    through the axis at the ends of one fundamental period."""
    g = surface.evaluate(w)
    axis = g.axis()
    length = g.translation_length()
    back = standardize(axis.p, axis.q).inv()
    # equidistant rays sit at polar angle phi with acosh(1/sin phi) = radius
    phi = math.asin(1.0 / math.cosh(radius))
    lo, hi = math.pi - phi, phi  # left and right of the vertical axis

    def to_surface(zs):
        # interior points ride the half-space action: a real matrix with
        # negative raw determinant would flip the half-plane as a complex map
        images = [
            back.apply_h3(PointH3(complex(z.real), float(z.imag))) for z in zs
        ]
        return tuple(PointH2(p.z.real, p.t) for p in images)

    ts = np.linspace(0.0, 1.0, samples)
    rail_low = to_surface(np.exp(length * ts) * complex(math.cos(lo), math.sin(lo)))
    rail_high = to_surface(np.exp(length * ts) * complex(math.cos(hi), math.sin(hi)))
    angles = np.linspace(lo, hi, samples)
    tie_start = to_surface(np.exp(1j * angles))
    tie_end = to_surface(math.exp(length) * np.exp(1j * angles))
    return BranchEmbedding(rail_low, rail_high, tie_start, tie_end)


def build_annular_track(surface: FuchsianSurface, w: GroupWord,
                        radius: float = 0.04, samples: int = 33) -> TrainTrack:
    """One fat branch whose two outermost ties are glued by the holonomy
    of w (a pair switch: no switch point on the shared tie)."""
    if radius <= 0 or samples < 3:
        raise InvalidParams("need radius > 0 and at least 3 samples")
    emb = _annulus_embedding(surface, w, radius, samples)
    return TrainTrack(
        1,
        pairs=[((0, 0), (0, 1))],
        embedding=[emb],
        rail_floor=word_length(surface, w) / 3.0,
    )


def build_multiannular_track(surface: FuchsianSurface, words, radius: float = 0.04,
                             samples: int = 33) -> TrainTrack:
    """Disjoint annular branches, one per loop of a multiloop."""
    words = list(words)
    if not words:
        raise InvalidParams("need at least one loop")
    if radius <= 0 or samples < 3:
        raise InvalidParams("need radius > 0 and at least 3 samples")
    embs = [_annulus_embedding(surface, w, radius, samples) for w in words]
    floor = min(word_length(surface, w) for w in words) / 3.0
    return TrainTrack(
        len(words),
        pairs=[((j, 0), (j, 1)) for j in range(len(words))],
        embedding=embs,
        rail_floor=floor,
    )


def tie_segment(track: TrainTrack, branch: int, side: int = 0):
    """Outermost tie of a branch as a geodesic segment (for reading
    weights off a lamination with transversal_measure)."""
    if track.embedding is None:
        raise NoEmbedding("track has no geometric embedding")
    emb = track.embedding[branch]
    tie = emb.tie_start if side == 0 else emb.tie_end
    return SegmentH2(tie[0], tie[-1])
