"""Grafting on projective structures in Thurston coordinates.

A structure is carried as (hyperbolic surface, weighted multiloop);
grafting along an admissible multiloop inserts full annuli, adding 2 pi
per multiplicity to the lamination weight while the holonomy stays put
(a full-turn rotation about a leaf is the identity in PSL(2, C)).  The
transversal regime lives at the level of quadrangles supported on a
round cylinder: two structures over the same cylinder with matching
supporting arcs differ by an integer number of full turns, read off
from their winding lifts.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CrossingDetected,
    InvalidParams,
    NonIntegralResidual,
    NotAdmissible,
    NotLoxodromic,
    ParameterOutOfRange,
    PointOnLeaf,
    SupportMismatch,
    UnsupportedConfiguration,
)
from .mobius import Geodesic, INFTY, MobiusClass, MoebiusTransform, apply_array
from .surface import FuchsianSurface, GroupWord, _axis_key, lift_loop, word_length
from .lamination import FiniteMeasuredLamination, Multiloop, _canonical, lift_multiloop
from .hyperbolic import PointH2, RoundCircle, circle_image
from .bending import BendingMap, BentHolonomy, bent_holonomy

# default bending basepoints, tried in order; the offsets are irrational
# enough to clear any leaf a symmetric example happens to aim at i
_BASEPOINTS = (
    None,
    PointH2(0.0573, 1.0419),
    PointH2(-0.1283, 0.9241),
    PointH2(0.2117, 1.1531),
)

TWO_PI = 2.0 * math.pi
CONCENTRIC_TOL = 1e-9


# --- projective structures -----------------------------------------------------------

class ProjectiveStructureDesc:
    """Thurston coordinates: a marked hyperbolic surface plus a weighted
    multiloop.  The holonomy is derived by bending, lazily per depth."""

    __slots__ = ("surface", "lamination", "orientation", "_holonomy")

    def __init__(self, surface: FuchsianSurface, lamination: Multiloop = None,
                 orientation: bool = True):
        if lamination is None:
            lamination = Multiloop([])
        g1, g2 = surface.generators[0], surface.generators[1]
        if (g1.classify() is not MobiusClass.LOXODROMIC
                or g2.classify() is not MobiusClass.LOXODROMIC
                or _unoriented_key(g1.axis()) == _unoriented_key(g2.axis())):
            raise InvalidParams(
                "holonomy must be nonelementary: two loxodromic "
                "generators with distinct axes"
            )
        object.__setattr__(self, "surface", surface)
        object.__setattr__(self, "lamination", lamination)
        object.__setattr__(self, "orientation", bool(orientation))
        object.__setattr__(self, "_holonomy", {})

    def __setattr__(self, name, value):
        raise AttributeError("ProjectiveStructureDesc is immutable")

    def holonomy(self, depth: int = 3) -> BentHolonomy:
        if depth not in self._holonomy:
            if len(self.lamination) == 0:
                lam = FiniteMeasuredLamination([])
            else:
                lam = lift_multiloop(self.surface, self.lamination, depth)
            # symmetric laminations can run a leaf straight through i;
            # fall back to nearby asymmetric basepoints (the derived
            # representation only moves by conjugation, traces do not)
            last = None
            for base in _BASEPOINTS:
                try:
                    bend = BendingMap(lam, base)
                except PointOnLeaf as exc:
                    last = exc
                    continue
                self._holonomy[depth] = bent_holonomy(bend, self.surface)
                break
            else:
                raise last
        return self._holonomy[depth]

    def __eq__(self, other):
        if not isinstance(other, ProjectiveStructureDesc):
            return NotImplemented
        return (
            self.surface.params == other.surface.params
            and all(
                np.array_equal(a.m, b.m)
                for a, b in zip(self.surface.generators, other.surface.generators)
            )
            and len(self.lamination) == len(other.lamination)
            and all(
                a[0].indices == b[0].indices and a[1] == b[1]
                for a, b in zip(self.lamination, other.lamination)
            )
            and self.orientation == other.orientation
        )

    __hash__ = None

    def to_json(self):
        return {
            "surface": self.surface.to_json(),
            "lamination": self.lamination.to_json(),
            "orientation": self.orientation,
        }

    @classmethod
    def from_json(cls, data) -> "ProjectiveStructureDesc":
        return cls(
            FuchsianSurface.from_json(data["surface"]),
            Multiloop.from_json(data["lamination"]),
            data.get("orientation", True),
        )


def _unoriented_key(leaf: Geodesic):
    return _axis_key(_canonical(leaf))


# --- admissibility -------------------------------------------------------------------

@dataclass(frozen=True)
class Admissibility:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _cyclic_reduce(indices):
    idx = list(indices)
    while len(idx) >= 2 and idx[0] == -idx[-1]:
        idx = idx[1:-1]
    return idx


def _is_proper_power(indices) -> bool:
    n = len(indices)
    for d in range(1, n):
        if n % d == 0 and all(indices[i] == indices[i % d] for i in range(n)):
            return True
    return False


def is_admissible(c: ProjectiveStructureDesc, w: GroupWord,
                  depth: int = 3) -> Admissibility:
    """Loxodromic holonomy plus a certified embedded lift.  Simpleness
    of the geodesic representative is certified by lifting: a crossing
    pair of conjugate axes convicts the loop by depth 3."""
    if not w.indices:
        return Admissibility(False, "NotLoxodromic")
    if c.surface.evaluate(w).classify() is not MobiusClass.LOXODROMIC:
        return Admissibility(False, "NotLoxodromic")
    cyc = _cyclic_reduce(w.indices)
    if not cyc or _is_proper_power(cyc):
        return Admissibility(False, "NonPrimitive")
    try:
        lift_multiloop(c.surface, Multiloop([(w, 1.0)]), depth)
    except CrossingDetected:
        return Admissibility(False, "CrossingDetected")
    return Admissibility(True)


# --- grafting ------------------------------------------------------------------------

def graft(c: ProjectiveStructureDesc, m: Multiloop,
          depth: int = 3) -> ProjectiveStructureDesc:
    """Thurston coordinates of the structure grafted along m: weights
    gain 2 pi per multiplicity.  Multiplicities are the integer number
    of inserted annuli; m must be admissible and either disjoint from
    the existing lamination or parallel to leaves of it."""
    for w, mult in m:
        if abs(mult - round(mult)) > 1e-12 or round(mult) < 1:
            raise InvalidParams(
                f"graft multiplicity {mult} is not a positive integer"
            )
        verdict = is_admissible(c, w, depth)
        if not verdict:
            raise NotAdmissible(f"loop {w}: {verdict.reason}")
    items = [[w, weight] for w, weight in c.lamination]
    keys = [_loop_keys(c.surface, w) for w, _ in items]
    for w, mult in m:
        mine = _loop_keys(c.surface, w)
        for i, other in enumerate(keys):
            if mine & other:
                items[i][1] += TWO_PI * round(mult)
                break
        else:
            items.append([w, TWO_PI * round(mult)])
            keys.append(mine)
    # canonical order makes grafting along disjoint multiloops commute
    # on the nose, not just up to relabeling
    items.sort(key=lambda e: (len(e[0].indices), e[0].indices))
    combined = Multiloop([(w, weight) for w, weight in items])
    try:
        lift_multiloop(c.surface, combined, depth)
    except CrossingDetected as exc:
        raise UnsupportedConfiguration(
            f"multiloop crosses the existing lamination: {exc}"
        ) from exc
    return ProjectiveStructureDesc(c.surface, combined, c.orientation)


def _loop_keys(surface: FuchsianSurface, w: GroupWord):
    return {_unoriented_key(g) for g in lift_loop(surface, w, 2)}


@dataclass(frozen=True)
class TraceComparison:
    word: GroupWord
    before: complex
    after: complex
    defect: float  # min over the sign ambiguity

    def to_json(self):
        return {
            "word": self.word.to_json(),
            "before": [self.before.real, self.before.imag],
            "after": [self.after.real, self.after.imag],
            "defect": self.defect,
        }


def holonomy_trace_report(c1: ProjectiveStructureDesc,
                          c2: ProjectiveStructureDesc,
                          words, depth: int = 3):
    """Per-word trace comparison of the two derived holonomies, with
    the PSL sign ambiguity minimized away."""
    h1, h2 = c1.holonomy(depth), c2.holonomy(depth)
    rows = []
    for w in words:
        t1 = complex(np.trace(h1.evaluate(w).m))
        t2 = complex(np.trace(h2.evaluate(w).m))
        rows.append(TraceComparison(w, t1, t2, min(abs(t1 - t2), abs(t1 + t2))))
    return rows


def thurston_cylinders(c: ProjectiveStructureDesc):
    """One Euclidean cylinder per lamination loop: circumference is the
    loop's geodesic length, height its weight."""
    return [
        (w, word_length(c.surface, w), weight) for w, weight in c.lamination
    ]


def crescent_angle(weight_span: float) -> float:
    if weight_span < 0.0:
        raise InvalidParams("weight span must be >= 0")
    return weight_span % TWO_PI


# --- hopf tori -----------------------------------------------------------------------

@dataclass(frozen=True)
class HopfTorusDesc:
    generator: MoebiusTransform
    modulus: complex  # translation length + i rotation angle

    def to_json(self):
        return {
            "generator": self.generator.to_json(),
            "modulus": [self.modulus.real, self.modulus.imag],
        }


def hopf_torus(g: MoebiusTransform) -> HopfTorusDesc:
    if g.classify() is not MobiusClass.LOXODROMIC:
        raise NotLoxodromic("a Hopf torus needs a loxodromic generator")
    return HopfTorusDesc(g, complex(g.translation_length(), g.rotation_angle()))


# --- round cylinders and their foliation ---------------------------------------------

def _line_offset(line: RoundCircle, z: complex) -> float:
    # signed distance from z to the line
    n = 1j * line.direction
    return ((z - line.point) / n).real


def circles_disjoint(c1: RoundCircle, c2: RoundCircle) -> bool:
    if c1.is_line and c2.is_line:
        cross = (c1.direction.conjugate() * c2.direction).imag
        return abs(cross) < 1e-12 and abs(_line_offset(c1, c2.point)) > 0.0
    if c1.is_line or c2.is_line:
        line, circ = (c1, c2) if c1.is_line else (c2, c1)
        return abs(_line_offset(line, circ.center)) > circ.radius
    d = abs(c1.center - c2.center)
    return d > c1.radius + c2.radius or d < abs(c1.radius - c2.radius)


@dataclass(frozen=True)
class RoundCylinder:
    """Annular region between two disjoint round circles, with the
    geodesic orthogonal to both of their hyperbolic planes and the
    Moebius map to the concentric standard form (c_minus to the unit
    circle, c_plus to radius e^modulus)."""

    c_minus: RoundCircle
    c_plus: RoundCircle
    orthogonal_geodesic: Geodesic
    to_standard: MoebiusTransform
    modulus: float
    defect: float

    def leaf_radius(self, t: float) -> float:
        if not -1.0 <= t <= 1.0:
            raise ParameterOutOfRange(f"foliation parameter {t} outside [-1, 1]")
        return math.exp(self.modulus * (t + 1.0) / 2.0)


def _sample_radii(w: MoebiusTransform, circle: RoundCircle, n: int = 8):
    angles = TWO_PI * np.arange(n) / n
    pts = circle.center + circle.radius * np.exp(1j * angles)
    return np.abs(apply_array(w, pts))


def round_cylinder(c1: RoundCircle, c2: RoundCircle) -> RoundCylinder:
    """Cylinder bounded by the two circles; c1 becomes c_minus.  The
    normalizing map sends the common inverse pair of the circles to
    {0, infinity}, which makes the images concentric."""
    if c1.is_line or c2.is_line:
        raise InvalidParams("cylinder boundaries must be genuine circles")
    if not circles_disjoint(c1, c2):
        raise InvalidParams("cylinder boundary circles must be disjoint")
    d = c2.center - c1.center
    sep = abs(d)
    if sep < 1e-14:
        p, q = c1.center, INFTY
        w = MoebiusTransform(1.0, -p, 0.0, 1.0)
    else:
        u = d / sep
        s = (c1.radius**2 + sep * sep - c2.radius**2) / sep
        disc = s * s - 4.0 * c1.radius**2
        if disc <= 0.0:
            raise InvalidParams("cylinder boundary circles must be disjoint")
        t_lo = (s - math.sqrt(disc)) / 2.0
        t_hi = (s + math.sqrt(disc)) / 2.0
        p, q = c1.center + t_lo * u, c1.center + t_hi * u
        w = MoebiusTransform(1.0, -p, 1.0, -q)
    rho1 = float(np.mean(_sample_radii(w, c1)))
    rho2 = float(np.mean(_sample_radii(w, c2)))
    if rho2 >= rho1:
        w = MoebiusTransform(1.0 / rho1, 0.0, 0.0, 1.0) * w
    else:
        # invert so the c1 image stays inside
        w = MoebiusTransform(0.0, rho1, 1.0, 0.0) * w
        p, q = q, p
    r1 = _sample_radii(w, c1)
    r2 = _sample_radii(w, c2)
    defect = max(
        float(np.ptp(r1)) / float(np.mean(r1)),
        float(np.ptp(r2)) / float(np.mean(r2)),
        abs(float(np.mean(r1)) - 1.0),
    )
    modulus = math.log(float(np.mean(r2)))
    return RoundCylinder(c1, c2, Geodesic(p, q), w, modulus, defect)


def foliation_leaf(cyl: RoundCylinder, t: float) -> RoundCircle:
    """The leaf c_t in the original coordinates; t in [-1, 1].  The leaf
    whose standard radius hits the preimage of infinity comes back as
    the line variant."""
    r = cyl.leaf_radius(t)
    return circle_image(RoundCircle(0.0j, r), cyl.to_standard.inv())


# --- supported quadrangles -----------------------------------------------------------

MIN_EDGE_SAMPLES = 64


class SupportedQuadrangle:
    """Quadrangle supported on a round cylinder: two edge curves cross
    every foliation leaf exactly once (the other two edges ride the
    boundary circles).  winding_lift is the real angular width of the
    development, full turns included; the sampled edge positions pin it
    down modulo 2 pi and the stored value must agree to 1e-6."""

    __slots__ = ("support", "e2", "e4", "winding_lift", "_s_grid", "_width")

    def __init__(self, support: RoundCylinder, e2, e4, winding_lift: float):
        e2 = np.asarray(e2, dtype=complex)
        e4 = np.asarray(e4, dtype=complex)
        if len(e2) < MIN_EDGE_SAMPLES or len(e4) < MIN_EDGE_SAMPLES:
            raise InvalidParams(
                f"edge curves need at least {MIN_EDGE_SAMPLES} samples"
            )
        s2, phi2 = _edge_log_coords(support, e2)
        s4, phi4 = _edge_log_coords(support, e4)
        grid = np.linspace(0.0, support.modulus, max(MIN_EDGE_SAMPLES, len(e2)))
        raw = np.interp(grid, s2, phi2) - np.interp(grid, s4, phi4)
        turns = round((winding_lift - float(np.mean(raw))) / TWO_PI)
        width = raw + TWO_PI * turns
        if abs(winding_lift - float(np.mean(width))) > 1e-6:
            raise InvalidParams(
                "winding lift disagrees with the sampled edge positions"
            )
        if np.any(width <= 0.0):
            raise InvalidParams("quadrangle has nonpositive angular width")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "e2", e2)
        object.__setattr__(self, "e4", e4)
        object.__setattr__(self, "winding_lift", float(winding_lift))
        object.__setattr__(self, "_s_grid", grid)
        object.__setattr__(self, "_width", width)

    def __setattr__(self, name, value):
        raise AttributeError("SupportedQuadrangle is immutable")


def _edge_log_coords(support: RoundCylinder, edge):
    """Log coordinates of an edge curve in the standard annulus; the
    curve must run from c_minus to c_plus crossing each leaf once."""
    z = apply_array(support.to_standard, np.asarray(edge, dtype=complex))
    s = np.log(np.abs(z))
    phi = np.unwrap(np.angle(z))
    if s[0] > s[-1]:
        s, phi = s[::-1], phi[::-1]
    h = support.modulus
    if abs(s[0]) > 1e-9 or abs(s[-1] - h) > 1e-9:
        raise InvalidParams("edge endpoints must lie on the boundary circles")
    if np.any(np.diff(s) <= 0.0):
        raise InvalidParams("edge is not transverse to the foliation")
    if np.any(np.abs(np.diff(phi)) > math.pi / 2):
        raise InvalidParams("edge sampling too coarse to track the winding")
    return s, phi


def sector_quadrangle(support: RoundCylinder, phi0: float = 0.0,
                      width: float = math.pi / 2, turns: int = 0,
                      twist: float = 0.0,
                      samples: int = 96) -> SupportedQuadrangle:
    """Quadrangle whose edges are logarithmic spirals in the standard
    annulus: e4 starts at angle phi0 and shears by twist over the
    height, e2 runs parallel at the given angular width; turns adds
    full wraps to the development."""
    h = support.modulus
    s = np.linspace(0.0, h, samples)
    phi4 = phi0 + twist * s / h
    back = support.to_standard.inv()
    e4 = apply_array(back, np.exp(s + 1j * phi4))
    e2 = apply_array(back, np.exp(s + 1j * (phi4 + width)))
    return SupportedQuadrangle(support, e2, e4, width + TWO_PI * turns)


def insert_turns(q: SupportedQuadrangle, k: int) -> SupportedQuadrangle:
    """The quadrangle grafted by k full cylinder turns: identical edge
    images, winding lift shifted by 2 pi k."""
    return SupportedQuadrangle(q.support, q.e2, q.e4,
                               q.winding_lift + TWO_PI * k)


def _supports_match(a: RoundCylinder, b: RoundCylinder, tol: float) -> bool:
    return (
        abs(a.c_minus.center - b.c_minus.center) < tol
        and abs(a.c_minus.radius - b.c_minus.radius) < tol
        and abs(a.c_plus.center - b.c_plus.center) < tol
        and abs(a.c_plus.radius - b.c_plus.radius) < tol
    )


def compare_quadrangles(q1: SupportedQuadrangle,
                        q2: SupportedQuadrangle) -> int:
    """Signed number of full turns separating the two developments:
    positive means q2 wraps more, so q2 is the grafted one."""
    if not _supports_match(q1.support, q2.support, 1e-9):
        raise SupportMismatch("quadrangles live on different cylinders")
    if len(q1.e4) != len(q2.e4) or np.max(np.abs(q1.e4 - q2.e4)) > 1e-9:
        raise SupportMismatch("supporting arcs e4 differ")
    delta = q2.winding_lift - q1.winding_lift
    d = round(delta / TWO_PI)
    residual = abs(delta - TWO_PI * d)
    if residual > 1e-3:
        raise NonIntegralResidual(
            f"winding difference {delta:.6f} is {residual:.2e} away "
            "from a full-turn multiple"
        )
    return d


def equator_arc_length(q: SupportedQuadrangle, t: float) -> float:
    """Developed width of the quadrangle on the leaf c_t, measured in
    the round metric that makes c_t a unit-sphere equator of length
    2 pi; full turns count."""
    if not -1.0 <= t <= 1.0:
        raise ParameterOutOfRange(f"foliation parameter {t} outside [-1, 1]")
    s = q.support.modulus * (t + 1.0) / 2.0
    return float(np.interp(s, q._s_grid, q._width))
