"""Bending maps from the hyperbolic plane into hyperbolic 3-space.

The plane embeds as the vertical sheet over the real axis.  Bending
along a finite measured lamination sends a point x to R(x) applied to
its embedding, where R(x) composes one elliptic rotation per leaf
crossed by the segment [basepoint, x], in crossing order, each about
the original leaf position.  Rotating about already-crossed leaves in
order is equivalent to rotating about the progressively bent images,
and crossing a leaf twice cancels, so the map only depends on the
endpoint within its complementary region.

Sign convention (handedness +1): a leaf is oriented by the canonical
order of its ideal endpoints; crossing it toward its positive side
rotates by +weight.  handedness -1 flips every rotation.
"""

import math
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from .errors import (
    EndpointOnLeaf,
    InsufficientDepth,
    InvalidParams,
    PointOnLeaf,
    TooFewSamples,
)
from .mobius import (
    Geodesic,
    MoebiusTransform,
    PointH3,
    elliptic_about,
    standardize,
)
from .hyperbolic import (
    PointH2,
    angle_between,
    dist_h2,
    dist_h3,
    dist_to_geodesic,
    geodesic_through_h3,
    h3_to_h2,
    project_to_geodesic,
)
from .lamination import (
    FiniteMeasuredLamination,
    SegmentH2,
    ordered_crossings,
)
from .surface import GENERATOR_NAMES, FuchsianSurface, GroupWord, _axis_key

BASEPOINT_CLEARANCE = 1e-9
CONCURRENCY_TOL = 1e-12


def _embed(x: PointH2) -> PointH3:
    return PointH3(complex(x.x), x.y)


def _side(leaf: Geodesic, x: PointH2) -> float:
    t = standardize(leaf.p, leaf.q)
    q = t.apply_h3(_embed(x))
    return 1.0 if q.z.real > 0.0 else -1.0


class BendingMap:
    __slots__ = ("lamination", "basepoint", "handedness", "_rotations")

    def __init__(self, lamination: FiniteMeasuredLamination,
                 basepoint: PointH2 | None = None, handedness: int = 1):
        if handedness not in (1, -1):
            raise InvalidParams("handedness must be +1 or -1")
        if basepoint is None:
            basepoint = PointH2(0.0, 1.0)
        rotations = {}
        for leaf, weight in lamination.leaves:
            if dist_to_geodesic(_embed(basepoint), leaf) < BASEPOINT_CLEARANCE:
                raise PointOnLeaf(f"basepoint within 1e-9 of leaf {leaf}")
            # crossing from the basepoint side toward the far side
            angle = -handedness * _side(leaf, basepoint) * weight
            rotations[_axis_key(leaf)] = elliptic_about(leaf, angle)
        object.__setattr__(self, "lamination", lamination)
        object.__setattr__(self, "basepoint", basepoint)
        object.__setattr__(self, "handedness", handedness)
        object.__setattr__(self, "_rotations", rotations)

    def __setattr__(self, name, value):
        raise AttributeError("BendingMap is immutable")

    def rotation_along(self, x: PointH2, strict: bool = True) -> MoebiusTransform:
        """Composite crossing rotation for the segment [basepoint, x].
        With strict off, a terminal crossing at x itself is dropped
        (the value is the limit from the basepoint side)."""
        if dist_h2(self.basepoint, x) < 1e-12:
            return MoebiusTransform.identity()
        try:
            hits = ordered_crossings(
                self.lamination,
                SegmentH2(self.basepoint, x),
                endpoint_error=strict,
            )
        except EndpointOnLeaf as exc:
            raise PointOnLeaf(str(exc)) from exc
        if not strict:
            hits = [h for h in hits if h[0] < 1.0 - CONCURRENCY_TOL]
        for (f1, _, _), (f2, _, _) in zip(hits, hits[1:]):
            if f2 - f1 < CONCURRENCY_TOL:
                raise InvalidParams("concurrent leaf crossings; perturb x")
        r = MoebiusTransform.identity()
        for _, leaf, _ in hits:
            r = r * self._rotations[_axis_key(leaf)]
        return r


def bend_point(b: BendingMap, x: PointH2) -> PointH3:
    """Image of x under the bending map; x must avoid the leaves."""
    return b.rotation_along(x).apply_h3(_embed(x))


# --- bent holonomy -----------------------------------------------------------------

@dataclass(frozen=True)
class BentHolonomy:
    """Generator images of the bent representation, with the measured
    equivariance defect of the defining bending map."""

    names: tuple
    images: tuple
    defect: float

    def __getitem__(self, name: str) -> MoebiusTransform:
        return self.images[self.names.index(name)]

    def evaluate(self, w: GroupWord) -> MoebiusTransform:
        out = MoebiusTransform.identity()
        for i in w.indices:
            g = self.images[abs(i) - 1]
            out = out * (g if i > 0 else g.inv())
        return out


def _bent_images(b: BendingMap, s: FuchsianSurface):
    return tuple(
        b.rotation_along(_gen_image(g, b.basepoint)) * g for g in s.generators
    )


def equivariance_defect(b: BendingMap, s: FuchsianSurface, samples: int = 50,
                        seed: int = 7, radius: float = 1.0,
                        max_word_length: int = 4,
                        max_reach: float = 10.0) -> float:
    """Max over random (word, point) pairs of the equivariance gap
    dist(beta(g x), rho_bent(g) beta(x)); shrinks as the lift depth of
    the lamination grows, since a gap needs a translate of a crossed
    leaf to be missing from the truncated lift.

    Samples with dist(basepoint, g x) > max_reach are redrawn: a point
    that deep sits at Euclidean height exp(-reach) where double
    precision cannot resolve hyperbolic distances below roughly
    4e-16 * exp(2 * reach), which would mask the truncation signal.
    Under the cap, only metrically short length-4 words survive, and
    their corridors are exactly the ones that reach tree depth 4 and
    so separate lift depth 3 from 4."""
    rng = np.random.default_rng(seed)
    images = _bent_images(b, s)
    worst = 0.0
    count = 0
    attempts = 0
    while count < samples:
        attempts += 1
        if attempts > 200 * samples:
            raise InvalidParams("sampler rejection rate too high")
        n = int(rng.integers(1, max_word_length + 1))
        word = GroupWord(rng.integers(1, 5, size=n) * rng.choice([-1, 1], size=n))
        if not word.indices:
            continue
        x = _random_point(rng, b.basepoint, radius)
        try:
            moved = h3_to_h2(s.evaluate(word).apply_h3(_embed(x)))
            if dist_h2(b.basepoint, moved) > max_reach:
                continue
            lhs = bend_point(b, moved)
            rho = MoebiusTransform.identity()
            for i in word.indices:
                g = images[abs(i) - 1]
                rho = rho * (g if i > 0 else g.inv())
            rhs = rho.apply_h3(bend_point(b, x))
        except (PointOnLeaf, InvalidParams):
            continue
        worst = max(worst, dist_h3(lhs, rhs))
        count += 1
    return worst


def bent_holonomy(b: BendingMap, s: FuchsianSurface, tol: float = 1e-6,
                  samples: int = 50, seed: int = 7) -> BentHolonomy:
    """rho_bent(g) = (crossing rotations along [basepoint, g basepoint])
    composed with rho(g); raises InsufficientDepth when the sampled
    equivariance defect exceeds tol.  Lift depth 3 passes the default
    gate (words up to length 3), depth 2 does not."""
    defect = equivariance_defect(b, s, samples=samples, seed=seed,
                                 max_word_length=3)
    if defect > tol:
        raise InsufficientDepth(
            f"equivariance defect {defect:.3e} exceeds {tol:.1e}; "
            "lift the lamination at greater depth"
        )
    return BentHolonomy(GENERATOR_NAMES, _bent_images(b, s), defect)


def _gen_image(g: MoebiusTransform, x: PointH2) -> PointH2:
    return h3_to_h2(g.apply_h3(_embed(x)))


def _random_point(rng, center: PointH2, radius: float) -> PointH2:
    # polar normal coordinates: spin about i, then translate i to center
    theta = rng.uniform(0.0, 2.0 * math.pi)
    r = radius * math.sqrt(rng.uniform(0.0, 1.0))
    half = 0.5 * theta
    spin = MoebiusTransform(math.cos(half), math.sin(half),
                            -math.sin(half), math.cos(half))
    z = spin.apply(complex(0.0, math.exp(r)))
    w = center.y * z + center.x
    return PointH2(w.real, w.imag)


# --- bent polylines ----------------------------------------------------------------

@dataclass(frozen=True)
class BentPolyline:
    """Samples of the bent image of a geodesic, with crossing markers.
    params hold the signed arclength along the source geodesic; the
    declared step bound caps consecutive param gaps."""

    points: tuple
    params: tuple
    crossings: tuple  # per-vertex: None or {"leafIndex", "angle", "weight"}
    step_bound: float

    def __post_init__(self):
        if not (len(self.points) == len(self.params) == len(self.crossings)):
            raise InvalidParams("mismatched polyline fields")
        gaps = [b - a for a, b in zip(self.params, self.params[1:])]
        if any(g > self.step_bound + 1e-9 for g in gaps):
            raise InvalidParams("sample gap exceeds the declared step bound")

    def to_json(self):
        return {
            "points": [[p.z.real, p.z.imag, p.t] for p in self.points],
            "params": list(self.params),
            "crossings": list(self.crossings),
            "stepBound": self.step_bound,
        }

    @classmethod
    def from_json(cls, data) -> "BentPolyline":
        pts = tuple(PointH3(complex(x, y), t) for x, y, t in data["points"])
        return cls(
            pts,
            tuple(data["params"]),
            tuple(data["crossings"]),
            data["stepBound"],
        )

    def to_csv(self) -> str:
        lines = ["x,y,t"]
        for p in self.points:
            lines.append(f"{p.z.real:.17g},{p.z.imag:.17g},{p.t:.17g}")
        return "\n".join(lines) + "\n"


def bend_geodesic(b: BendingMap, line: Geodesic, span: float,
                  steps: int) -> BentPolyline:
    """Bent image of the geodesic over arclength [-span, span] around
    the point nearest the basepoint, sampled uniformly with extra
    vertices at every leaf crossing."""
    if steps < 2 or span <= 0:
        raise InvalidParams("need steps >= 2 and span > 0")
    for leaf, _ in b.lamination.leaves:
        if leaf.same_unoriented(line):
            raise InvalidParams("geodesic coincides with a leaf")
    s_map = standardize(line.p, line.q)
    foot = s_map.apply_h3(project_to_geodesic(_embed(b.basepoint), line))
    height = foot.t
    back = s_map.inv()

    def at(s: float) -> PointH2:
        q = back.apply_h3(PointH3(0j, height * math.exp(s)))
        return h3_to_h2(q)

    lo, hi = at(-span), at(span)
    hits = ordered_crossings(
        b.lamination, SegmentH2(lo, hi), endpoint_error=False
    )
    leaf_index = {_axis_key(g): i for i, (g, _) in enumerate(b.lamination.leaves)}
    events = []
    for f, leaf, w in hits:
        events.append(
            (
                -span + f * 2.0 * span,
                {
                    "leafIndex": leaf_index[_axis_key(leaf)],
                    "angle": angle_between(line, leaf),
                    "weight": w,
                },
            )
        )
    grid = [(-span + 2.0 * span * k / steps, None) for k in range(steps + 1)]
    merged = sorted(grid + events, key=lambda e: e[0])
    samples = []
    for s, data in merged:
        if samples and abs(s - samples[-1][0]) < 1e-12:
            if data is not None:
                samples[-1] = (samples[-1][0], data)
            continue
        samples.append((s, data))
    # the rotation is constant between crossing events, so resolve it once
    # per interval; a vertex on a leaf gets the basepoint-side limit, whose
    # image agrees with both neighbours since the elliptic fixes its leaf
    bounds = [s for s, data in samples if data is not None]
    cache = {}
    points, params, crossings = [], [], []
    for s, data in samples:
        x = at(s)
        k = bisect_left(bounds, s)
        r = cache.get(k)
        if r is None:
            r = b.rotation_along(x, strict=False)
            if data is None:
                cache[k] = r
        points.append(r.apply_h3(_embed(x)))
        params.append(s)
        crossings.append(data)
    return BentPolyline(
        tuple(points), tuple(params), tuple(crossings), 2.0 * span / steps
    )


# --- bilipschitz and parallelism reports --------------------------------------------

def _initial_tangent(x: PointH3, y: PointH3) -> np.ndarray:
    """Euclidean unit tangent at x of the geodesic segment toward y."""
    dz = y.z - x.z
    sep = abs(dz)
    if sep < 1e-15:
        return np.array([0.0, 0.0, math.copysign(1.0, y.t - x.t)])
    e = dz / sep
    # 2D picture in the vertical plane through x, y
    c = (sep * sep + y.t * y.t - x.t * x.t) / (2.0 * sep)
    tang = np.array([x.t, c])
    tang /= np.linalg.norm(tang)
    return np.array([e.real * tang[0], e.imag * tang[0], tang[1]])


@dataclass(frozen=True)
class BilipschitzReport:
    max_ratio: float
    max_tangent_angle: float
    max_dist_to_axis: float
    projected_ratio: float

    def to_json(self):
        return {
            "maxRatio": self.max_ratio,
            "maxTangentAngle": self.max_tangent_angle,
            "maxDistToAxis": self.max_dist_to_axis,
            "projectedRatio": self.projected_ratio,
        }


def bilipschitz_report(poly: BentPolyline) -> BilipschitzReport:
    """Arc/chord ratios over all sample pairs, tangent deviation from
    the orthogonal-hyperplane field of the endpoint geodesic m, max
    distance to m, and the arc/chord ratio of the projection to m."""
    pts = poly.points
    if len(pts) < 3:
        raise TooFewSamples("need at least 3 samples")
    chords = [dist_h3(a, c) for a, c in zip(pts, pts[1:])]
    cum = [0.0]
    for c in chords:
        cum.append(cum[-1] + c)
    max_ratio = 1.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            chord = dist_h3(pts[i], pts[j])
            arc = cum[j] - cum[i]
            if chord < 1e-15:
                max_ratio = math.inf if arc > 1e-12 else max_ratio
            else:
                max_ratio = max(max_ratio, arc / chord)
    axis = geodesic_through_h3(pts[0], pts[-1])
    to_axis = standardize(axis.p, axis.q)
    std = [to_axis.apply_h3(p) for p in pts]
    max_angle = 0.0
    for a, c in zip(std, std[1:]):
        tangent = _initial_tangent(a, c)
        pos = np.array([a.z.real, a.z.imag, a.t])
        radial = pos / np.linalg.norm(pos)
        dot = float(np.clip(tangent @ radial, -1.0, 1.0))
        max_angle = max(max_angle, math.acos(dot))
    max_dist = max(dist_to_geodesic(p, axis) for p in pts)
    # projection to the axis tracks positions by log-height
    heights = [math.log(math.hypot(abs(p.z), p.t)) for p in std]
    parc = [0.0]
    for a, c in zip(heights, heights[1:]):
        parc.append(parc[-1] + abs(c - a))
    projected = 1.0
    for i in range(len(heights)):
        for j in range(i + 1, len(heights)):
            chord = abs(heights[j] - heights[i])
            arc = parc[j] - parc[i]
            if chord < 1e-15:
                projected = math.inf if arc > 1e-12 else projected
            else:
                projected = max(projected, arc / chord)
    return BilipschitzReport(max_ratio, max_angle, max_dist, projected)
