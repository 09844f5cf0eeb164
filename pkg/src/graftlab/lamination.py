"""Finite measured laminations in the hyperbolic plane.

A lamination is a finite set of complete geodesics (leaves) with
nonnegative weights, pairwise disjoint or equal; equal leaves merge by
adding weights.  Laminations arise here as depth-truncated equivariant
lifts of weighted multiloops on a Fuchsian surface.  Queries: leaves
crossed by a geodesic segment, the transversal measure of an arc, and
the crossing angle to a test geodesic.

Boundary combinatorics run on circle coordinates: an ideal endpoint x
of the upper half-plane maps to the angle of (x - i)/(x + i) on the
unit circle, and two geodesics cross iff their endpoint pairs link.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import CrossingDetected, EndpointOnLeaf, InvalidParams
from .mobius import (
    Geodesic,
    INFTY,
    MoebiusTransform,
    _point_sort_key,
    apply_array,
    is_infinity,
)
from .hyperbolic import (
    PointH2,
    angle_between,
    dist_h2,
    encode_endpoint,
    decode_endpoint,
    geodesic_through_h2,
    segment_standardizer,
)
from .surface import FuchsianSurface, GroupWord, _axis_key, _near_keys, lift_loop

CROSS_TOL = 1e-9    # angular tolerance for the linking test
TWO_PI = 2.0 * math.pi


def boundary_angle(x) -> float:
    """Circle coordinate of an ideal point; infinity sits at angle 0."""
    if is_infinity(x):
        return 0.0
    x = complex(x)
    return cmath.phase((x - 1j) / (x + 1j))


def leaves_cross(g1: Geodesic, g2: Geodesic, tol: float = CROSS_TOL) -> bool:
    """True iff the two geodesics meet transversally in the plane.

    Equal geodesics and pairs sharing an ideal endpoint (within tol on
    the circle) do not cross.
    """
    a = boundary_angle(g1.p)
    sb = (boundary_angle(g1.q) - a) % TWO_PI
    sc = (boundary_angle(g2.p) - a) % TWO_PI
    sd = (boundary_angle(g2.q) - a) % TWO_PI
    for s in (sc, sd):
        if min(s, TWO_PI - s, abs(s - sb)) < tol:
            return False
    return (sc < sb) != (sd < sb)


# --- segments ----------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentH2:
    """Geodesic segment between two interior points of the plane."""

    start: PointH2
    end: PointH2

    def __post_init__(self):
        if dist_h2(self.start, self.end) < 1e-12:
            raise InvalidParams("segment must have positive length")

    @property
    def length(self) -> float:
        return dist_h2(self.start, self.end)

    def carrier(self) -> Geodesic:
        return geodesic_through_h2(self.start, self.end)

    def to_json(self):
        return {
            "start": [self.start.x, self.start.y],
            "end": [self.end.x, self.end.y],
        }

    @classmethod
    def from_json(cls, data) -> "SegmentH2":
        return cls(PointH2(*data["start"]), PointH2(*data["end"]))


# --- the lamination type -----------------------------------------------------------

def _canonical(leaf: Geodesic) -> Geodesic:
    if _point_sort_key(leaf.p) <= _point_sort_key(leaf.q):
        return leaf
    return leaf.reversed()


def _check_pairwise_disjoint(leaves, tol: float):
    n = len(leaves)
    if n < 2:
        return
    ang = np.array(
        [[boundary_angle(g.p), boundary_angle(g.q)] for g, _ in leaves]
    )
    for i in range(n - 1):
        sb = (ang[i, 1] - ang[i, 0]) % TWO_PI
        sc = (ang[i + 1 :, 0] - ang[i, 0]) % TWO_PI
        sd = (ang[i + 1 :, 1] - ang[i, 0]) % TWO_PI
        shared = np.zeros(len(sc), dtype=bool)
        for s in (sc, sd):
            shared |= np.minimum(np.minimum(s, TWO_PI - s), np.abs(s - sb)) < tol
        crossing = ((sc < sb) != (sd < sb)) & ~shared
        if crossing.any():
            j = i + 1 + int(np.argmax(crossing))
            raise CrossingDetected(
                f"leaves {leaves[i][0]} and {leaves[j][0]} cross"
            )


class FiniteMeasuredLamination:
    """Weighted disjoint leaves; immutable after construction."""

    __slots__ = ("leaves", "provenance", "_ends_p", "_ends_q")

    def __init__(self, leaves, provenance=None):
        merged = {}
        for g, w in leaves:
            w = float(w)
            if w < 0.0 or not math.isfinite(w):
                raise InvalidParams(f"leaf weight {w} must be finite and >= 0")
            g = _canonical(g)
            key = _axis_key(g)
            hit = next((k for k in _near_keys(key) if k in merged), None)
            if hit is None:
                merged[key] = (g, w)
            else:
                merged[hit] = (merged[hit][0], merged[hit][1] + w)
        ordered = tuple(merged[k] for k in sorted(merged))
        _check_pairwise_disjoint(ordered, CROSS_TOL)
        object.__setattr__(self, "leaves", ordered)
        object.__setattr__(self, "provenance", provenance)
        # endpoint arrays for vectorized crossing scans (inf as complex inf)
        object.__setattr__(
            self,
            "_ends_p",
            np.array([complex(INFTY) if is_infinity(g.p) else complex(g.p)
                      for g, _ in ordered]),
        )
        object.__setattr__(
            self,
            "_ends_q",
            np.array([complex(INFTY) if is_infinity(g.q) else complex(g.q)
                      for g, _ in ordered]),
        )

    def __setattr__(self, name, value):
        raise AttributeError("FiniteMeasuredLamination is immutable")

    def __len__(self) -> int:
        return len(self.leaves)

    def __iter__(self):
        return iter(self.leaves)

    @property
    def total_mass(self) -> float:
        return sum(w for _, w in self.leaves)

    def to_json(self):
        return [
            {
                "endpoints": [encode_endpoint(g.p), encode_endpoint(g.q)],
                "weight": w,
            }
            for g, w in self.leaves
        ]

    @classmethod
    def from_json(cls, data) -> "FiniteMeasuredLamination":
        leaves = [
            (
                Geodesic(
                    decode_endpoint(e["endpoints"][0]),
                    decode_endpoint(e["endpoints"][1]),
                ),
                e["weight"],
            )
            for e in data
        ]
        return cls(leaves)


# --- multiloops and their lifts ----------------------------------------------------

class Multiloop:
    """Weighted loops on the surface, given as words in the generators.

    Validity (pairwise disjoint, non-conjugate, each loop simple) is
    certified numerically by lifting: any violation shows up as equal
    or crossing lifted axes by depth 3.
    """

    __slots__ = ("items",)

    def __init__(self, items):
        items = tuple((w, float(weight)) for w, weight in items)
        for w, weight in items:
            if not isinstance(w, GroupWord):
                raise InvalidParams(f"expected GroupWord, got {type(w).__name__}")
            if weight <= 0.0 or not math.isfinite(weight):
                raise InvalidParams(f"loop weight {weight} must be finite and > 0")
        object.__setattr__(self, "items", items)

    def __setattr__(self, name, value):
        raise AttributeError("Multiloop is immutable")

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def validate(self, surface: FuchsianSurface, depth: int = 3) -> None:
        lift_multiloop(surface, self, depth)

    def to_json(self):
        return [{"word": w.to_json(), "weight": weight} for w, weight in self.items]

    @classmethod
    def from_json(cls, data) -> "Multiloop":
        return cls([(GroupWord.from_json(e["word"]), e["weight"]) for e in data])


def lift_multiloop(
    surface: FuchsianSurface, m: Multiloop, depth: int
) -> FiniteMeasuredLamination:
    """Depth-truncated total lift: the axes of all conjugates of the
    loops by group elements of word length <= depth, with inherited
    weights.  Raises CrossingDetected if any two lifted leaves cross
    and InvalidParams if two loops share a lifted axis (conjugate or
    inverse-conjugate words)."""
    per_word = [(lift_loop(surface, w, depth), weight) for w, weight in m]
    key_sets = [{_axis_key(g) for g in axes} for axes, _ in per_word]
    for i in range(len(key_sets)):
        for j in range(i + 1, len(key_sets)):
            if key_sets[i] & key_sets[j]:
                raise InvalidParams(
                    "loops share a lifted axis; words are conjugate or "
                    "inverse-conjugate"
                )
    leaves = [(g, weight) for axes, weight in per_word for g in axes]
    words = [str(w) for w, _ in m.items]
    provenance = {"params": surface.params, "words": words, "depth": depth}
    return FiniteMeasuredLamination(leaves, provenance=provenance)


# --- queries -----------------------------------------------------------------------

def _scan_segment(lam: FiniteMeasuredLamination, seg: SegmentH2):
    """Vectorized crossing scan: per-leaf crossing flags and fractions
    plus the clearance of the two segment endpoints from each leaf.

    In standardized coordinates the segment runs up the vertical axis
    from height 1 to e^length; a leaf with real feet u, v crosses the
    axis at height sqrt(-u v), and sinh(dist from i y to the leaf) is
    |y^2 + u v| / (y |u - v|), which stays well conditioned at contact.
    """
    t = segment_standardizer(seg.start, seg.end)
    length = seg.length
    top = math.exp(length)
    u_img = apply_array(t, lam._ends_p)
    v_img = apply_array(t, lam._ends_q)
    fin_u = np.isfinite(u_img)
    fin_v = np.isfinite(v_img)
    both_fin = fin_u & fin_v
    u = np.where(fin_u, u_img.real, 0.0)
    v = np.where(fin_v, v_img.real, 0.0)

    def clearance(y):
        both = np.abs(y * y + u * v) / (y * np.abs(np.where(both_fin, u - v, 1.0)))
        one = np.abs(np.where(fin_u, u, v)) / y
        return np.arcsinh(np.where(both_fin, both, one))

    d0 = clearance(1.0)
    d1 = clearance(top)
    crossing = both_fin & (u * v < 0.0)
    prod = np.where(crossing, -u * v, 1.0)
    frac = 0.5 * np.log(prod) / length
    return d0, d1, crossing, frac


def ordered_crossings(
    lam: FiniteMeasuredLamination,
    seg: SegmentH2,
    tol: float = CROSS_TOL,
    endpoint_error: bool = True,
):
    """Leaves crossing the open segment, as (fraction, leaf, weight)
    sorted by the arclength fraction of the crossing point.

    With endpoint_error, a segment endpoint within tol (hyperbolic
    distance) of any leaf raises EndpointOnLeaf; perturb the endpoint
    and retry.
    """
    if len(lam) == 0:
        return []
    d0, d1, crossing, frac = _scan_segment(lam, seg)
    near = np.minimum(d0, d1) < tol
    if endpoint_error and near.any():
        leaf = lam.leaves[int(np.argmax(near))][0]
        raise EndpointOnLeaf(
            f"segment endpoint lies on leaf {leaf} "
            "(general position required; perturb the endpoint and retry)"
        )
    out = []
    for i in np.nonzero(crossing)[0]:
        f = float(frac[i])
        leaf, w = lam.leaves[i]
        if 0.0 < f < 1.0:
            out.append((f, leaf, w))
        elif not endpoint_error and near[i]:
            out.append((max(0.0, min(1.0, f)), leaf, w))
    out.sort(key=lambda item: item[0])
    return out


def intersect(
    lam: FiniteMeasuredLamination, seg: SegmentH2, tol: float = CROSS_TOL
) -> FiniteMeasuredLamination:
    """Minimal sublamination containing every leaf that meets the
    segment (touching an endpoint counts as meeting)."""
    if len(lam) == 0:
        return FiniteMeasuredLamination([])
    d0, d1, crossing, frac = _scan_segment(lam, seg)
    keep = (
        (np.minimum(d0, d1) < tol)
        | (crossing & (frac > 0.0) & (frac < 1.0))
    )
    return FiniteMeasuredLamination(
        [lam.leaves[i] for i in np.nonzero(keep)[0]]
    )


def transversal_measure(
    lam: FiniteMeasuredLamination, arc: SegmentH2, tol: float = CROSS_TOL
) -> float:
    """Total weight of the leaves crossed by the arc (each geodesic
    leaf meets a geodesic arc at most once)."""
    return sum(w for _, _, w in ordered_crossings(lam, arc, tol))


def angle_to(lam: FiniteMeasuredLamination, line: Geodesic) -> float:
    """Supremum of the crossing angles between the test geodesic and
    the leaves it crosses; 0 when nothing crosses."""
    best = 0.0
    for leaf, _ in lam.leaves:
        if leaves_cross(leaf, line):
            best = max(best, angle_between(leaf, line))
    return best
