"""Metric geometry of the hyperbolic plane, hyperbolic 3-space and the
round 2-sphere.

Upper half-plane / half-space coordinates throughout; the hyperbolic
plane sits inside half-space as the vertical plane over the real axis,
so H2 geodesics are exactly the Geodesic values with real ideal
endpoints.  Disk-model conversions are the Cayley maps TO_DISK and
FROM_DISK.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import dblquad, quad

from .errors import (
    DegenerateTriangle,
    Disjoint,
    Equal,
    InvalidParams,
    OpenBoundary,
)
from .mobius import (
    INFTY,
    Geodesic,
    MoebiusTransform,
    PointH3,
    is_infinity,
    normalize_point,
    points_equal,
    standardize,
)

GeodesicH2 = Geodesic
GeodesicH3 = Geodesic

MIN_HEIGHT = 1e-12

# Cayley map: upper half-plane to unit disk, i -> 0
TO_DISK = MoebiusTransform(1, -1j, 1, 1j)
FROM_DISK = TO_DISK.inv()


@dataclass(frozen=True)
class PointH2:
    """Point of the upper half-plane."""

    x: float
    y: float

    def __post_init__(self):
        if not self.y > MIN_HEIGHT:
            raise InvalidParams(f"upper half-plane needs y > {MIN_HEIGHT}, got {self.y}")

    def as_complex(self) -> complex:
        return complex(self.x, self.y)

    def to_h3(self) -> PointH3:
        return PointH3(complex(self.x, 0.0), self.y)

    def to_json(self):
        return [self.x, self.y]


def point_h2(z) -> PointH2:
    z = complex(z)
    return PointH2(z.real, z.imag)


def h3_to_h2(p: PointH3, tol: float = 1e-9) -> PointH2:
    if abs(p.z.imag) > tol * max(1.0, abs(p.z.real), p.t):
        raise InvalidParams(f"point off the vertical plane: {p}")
    return PointH2(p.z.real, p.t)


# --- distances ---------------------------------------------------------------

def dist_h2(p: PointH2, q: PointH2) -> float:
    arg = 1.0 + ((p.x - q.x) ** 2 + (p.y - q.y) ** 2) / (2.0 * p.y * q.y)
    return math.acosh(max(1.0, arg))


def dist_h3(p: PointH3, q: PointH3) -> float:
    arg = 1.0 + (abs(p.z - q.z) ** 2 + (p.t - q.t) ** 2) / (2.0 * p.t * q.t)
    return math.acosh(max(1.0, arg))


# --- geodesics through interior points ----------------------------------------

def geodesic_through_h3(p: PointH3, q: PointH3) -> Geodesic:
    """Oriented geodesic through two interior points, p side first."""
    sep = abs(p.z - q.z)
    if sep <= 1e-13 * max(1.0, abs(p.z), p.t, q.t):
        if abs(p.t - q.t) <= 1e-13 * max(p.t, q.t):
            raise InvalidParams("points coincide; geodesic undetermined")
        return Geodesic(p.z, INFTY) if p.t < q.t else Geodesic(INFTY, p.z)
    u = (q.z - p.z) / sep
    # plane section: p at xi=0, q at xi=sep; semicircle center c, radius r
    c = (sep * sep + q.t * q.t - p.t * p.t) / (2.0 * sep)
    r = math.hypot(c, p.t)
    lo, hi = p.z + (c - r) * u, p.z + (c + r) * u
    phi_p = math.atan2(p.t, -c)
    phi_q = math.atan2(q.t, sep - c)
    # traveling lo -> hi the section angle decreases from pi to 0
    return Geodesic(lo, hi) if phi_p > phi_q else Geodesic(hi, lo)


def geodesic_through_h2(p: PointH2, q: PointH2) -> Geodesic:
    return geodesic_through_h3(p.to_h3(), q.to_h3())


def segment_point(p: PointH3, q: PointH3, frac: float) -> PointH3:
    """Point at the given arclength fraction along the segment [p, q]."""
    g = geodesic_through_h3(p, q)
    t = standardize(g.p, g.q)
    a, b = t.apply_h3(p), t.apply_h3(q)
    h = a.t ** (1.0 - frac) * b.t ** frac
    return t.inv().apply_h3(PointH3(0j, h))


def segment_standardizer(p: PointH2, q: PointH2) -> MoebiusTransform:
    """Real Moebius transform sending p to i and q up the imaginary axis
    to i e^{dist(p, q)}."""
    g = geodesic_through_h2(p, q)
    s = standardize(g.p, g.q)
    y = s.apply(p.as_complex()).imag
    return MoebiusTransform(1, 0, 0, y) * s


# --- projection --------------------------------------------------------------

def project_to_geodesic(p: PointH3, m: Geodesic) -> PointH3:
    """Nearest point of m; the map Phi_m used by the bending reports.

    In coordinates where m is the vertical axis the projection of (z, t)
    is (0, sqrt(|z|^2 + t^2)).
    """
    t = standardize(m.p, m.q)
    q = t.apply_h3(p)
    return t.inv().apply_h3(PointH3(0j, math.hypot(abs(q.z), q.t)))


def dist_to_geodesic(p: PointH3, m: Geodesic) -> float:
    t = standardize(m.p, m.q)
    q = t.apply_h3(p)
    return math.acosh(max(1.0, math.hypot(abs(q.z), q.t) / q.t))


# --- crossing angles ----------------------------------------------------------

def angle_between(g1: Geodesic, g2: Geodesic) -> float:
    """Unoriented crossing angle of two hyperbolic-plane geodesics.

    Standardizes g1 to the vertical axis; with u, v the images of the
    endpoints of g2 the crossing angle is arccos(|u + v| / |u - v|).
    Raises Equal for the same geodesic and Disjoint when there is no
    transversal intersection (including shared ideal endpoints).
    """
    for g in (g1, g2):
        if not g.is_real():
            raise InvalidParams(f"not a hyperbolic-plane geodesic: {g}")
    if g1.same_unoriented(g2):
        raise Equal(f"{g1} and {g2} coincide")
    t = standardize(g1.p, g1.q)
    u, v = t.apply(g2.p), t.apply(g2.q)
    if is_infinity(u) or is_infinity(v) or points_equal(u, 0.0) or points_equal(v, 0.0):
        raise Disjoint("shared ideal endpoint; no transversal crossing")
    u, v = u.real, v.real
    if u * v > 0:
        raise Disjoint(f"images {u:.6g}, {v:.6g} on the same side")
    return math.acos(min(1.0, abs(u + v) / abs(u - v)))


# --- right-triangle trigonometry ----------------------------------------------

def right_triangle_gap(angle_b: float, len_ab: float, samples: int = 64):
    """Right triangle with the right angle at C, hypotenuse AB.

    Places B at i, runs the hypotenuse of length len_ab at angle angle_b
    from the leg direction, and drops C as the foot of the perpendicular
    from A.  Returns (gap, angle_bound) with

        gap = (dist(B,C) - dist(C,A)) / dist(A,B)

    and angle_bound the largest sampled angle at B subtended by points
    A' strictly between C and A on their common leg.  gap -> 1 and
    angle_bound -> 0 as angle_b -> 0.
    """
    if not 0.0 < angle_b < math.pi / 2:
        raise DegenerateTriangle(f"need 0 < angleB < pi/2, got {angle_b}")
    if not len_ab > 0:
        raise DegenerateTriangle(f"need lenAB > 0, got {len_ab}")
    if samples < 2:
        raise InvalidParams("need at least two leg samples")

    half = 0.5 * angle_b
    tilt = MoebiusTransform(math.cos(half), -math.sin(half), math.sin(half), math.cos(half))
    a_pt = point_h2(tilt.apply(1j * math.exp(len_ab)))  # hypotenuse end
    b_pt = PointH2(0.0, 1.0)
    c_pt = PointH2(0.0, abs(a_pt.as_complex()))  # foot on the vertical axis

    leg_bc = dist_h2(b_pt, c_pt)
    leg_ca = dist_h2(c_pt, a_pt)
    gap = (leg_bc - leg_ca) / len_ab

    axis = Geodesic(0.0, INFTY)
    bound = 0.0
    c3, a3 = c_pt.to_h3(), a_pt.to_h3()
    for k in range(1, samples):
        a_prime = h3_to_h2(segment_point(c3, a3, k / samples))
        bound = max(bound, angle_between(axis, geodesic_through_h2(b_pt, a_prime)))
    return gap, bound


# --- round circles on the sphere at infinity -----------------------------------

@dataclass(frozen=True)
class RoundCircle:
    """Circle or line on the Riemann sphere (a line is a circle through
    infinity, stored as point + unit direction)."""

    center: complex = None
    radius: float = None
    point: complex = None
    direction: complex = None

    def __post_init__(self):
        if self.radius is not None:
            if not self.radius > 1e-12:
                raise InvalidParams(f"radius must exceed 1e-12, got {self.radius}")
            if self.center is None:
                raise InvalidParams("circle variant needs a center")
        elif self.point is None or self.direction is None:
            raise InvalidParams("line variant needs point and direction")
        else:
            d = self.direction / abs(self.direction)
            object.__setattr__(self, "direction", d)

    @property
    def is_line(self) -> bool:
        return self.radius is None

    def three_points(self):
        if self.is_line:
            return (self.point, self.point + self.direction, INFTY)
        c, r = self.center, self.radius
        return (c + r, c - r, c + 1j * r)

    def to_json(self):
        if self.is_line:
            return {"point": [self.point.real, self.point.imag],
                    "direction": [self.direction.real, self.direction.imag]}
        return {"center": [self.center.real, self.center.imag],
                "radius": self.radius}

    @classmethod
    def from_json(cls, data) -> "RoundCircle":
        if "radius" in data:
            return cls(center=complex(*data["center"]), radius=data["radius"])
        return cls(point=complex(*data["point"]),
                   direction=complex(*data["direction"]))


def circle_through(z1, z2, z3) -> RoundCircle:
    """Round circle through three distinct sphere points."""
    pts = [normalize_point(z) for z in (z1, z2, z3)]
    for i in range(3):
        for j in range(i + 1, 3):
            if points_equal(pts[i], pts[j]):
                raise InvalidParams("need three distinct points")
    inf = [p for p in pts if is_infinity(p)]
    if inf:
        fin = [p for p in pts if not is_infinity(p)]
        return RoundCircle(point=fin[0], direction=fin[1] - fin[0])
    a, b, c = pts
    den = (a.conjugate() * (b - c) + b.conjugate() * (c - a) + c.conjugate() * (a - b))
    scale = max(abs(a - b), abs(b - c), abs(c - a))
    if abs(den) < 1e-13 * scale * scale:
        return RoundCircle(point=a, direction=b - a)
    num = abs(a) ** 2 * (b - c) + abs(b) ** 2 * (c - a) + abs(c) ** 2 * (a - b)
    center = num / den
    return RoundCircle(center=center, radius=abs(a - center))


def circle_image(circle: RoundCircle, t: MoebiusTransform) -> RoundCircle:
    return circle_through(*(t.apply(z) for z in circle.three_points()))


# --- spherical arcs and Gauss-Bonnet -------------------------------------------

def _unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < 1e-14:
        raise InvalidParams("zero vector")
    return v / n


def _axis_frame(axis):
    n = _unit(axis)
    ref = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = _unit(ref - np.dot(ref, n) * n)
    return n, e1, np.cross(n, e1)


@dataclass(frozen=True)
class SphericalArc:
    """Arc of a round circle on the unit sphere.

    The circle sits at angular radius `radius` around `axis`; the arc
    runs from azimuth `start` through a signed `sweep` (positive sweeps
    counterclockwise as seen from the axis side, which puts the axis cap
    on the left of travel).
    """

    axis: tuple
    radius: float
    start: float
    sweep: float

    def __post_init__(self):
        n = _unit(self.axis)
        object.__setattr__(self, "axis", (float(n[0]), float(n[1]), float(n[2])))
        if not 1e-9 < self.radius < math.pi - 1e-9:
            raise InvalidParams(f"angular radius out of range: {self.radius}")
        if self.sweep == 0 or abs(self.sweep) > math.tau + 1e-9:
            raise InvalidParams(f"sweep out of range: {self.sweep}")

    def frame(self):
        return _axis_frame(self.axis)

    def point_at_azimuth(self, phi: float):
        n, e1, e2 = self.frame()
        return math.cos(self.radius) * n + math.sin(self.radius) * (
            math.cos(phi) * e1 + math.sin(phi) * e2
        )

    def point_at(self, frac: float):
        return self.point_at_azimuth(self.start + frac * self.sweep)

    def tangent_at(self, frac: float):
        n, e1, e2 = self.frame()
        phi = self.start + frac * self.sweep
        t = -math.sin(phi) * e1 + math.cos(phi) * e2
        return t if self.sweep > 0 else -t

    def length(self) -> float:
        return math.sin(self.radius) * abs(self.sweep)

    def curvature_integral(self) -> float:
        # integral of geodesic curvature w.r.t. the left-of-travel normal
        return math.cos(self.radius) * self.sweep

    def contains_azimuth(self, phi: float, tol: float = 1e-12) -> bool:
        sign = 1.0 if self.sweep > 0 else -1.0
        delta = (sign * (phi - self.start)) % math.tau
        return delta <= abs(self.sweep) + tol or delta >= math.tau - tol

    def ray_hits(self, pole, direction):
        """Arc parameters s in (0, pi] where the great-circle ray
        cos(s) pole + sin(s) direction meets this arc."""
        n = np.asarray(self.axis)
        a = float(np.dot(pole, n))
        b = float(np.dot(direction, n))
        m = math.hypot(a, b)
        c = math.cos(self.radius)
        if m < abs(c) - 1e-15:
            return []
        psi = math.atan2(b, a)
        off = math.acos(max(-1.0, min(1.0, c / m)))
        _, e1, e2 = self.frame()
        hits = []
        for s in ((psi + off) % math.tau, (psi - off) % math.tau):
            if not 1e-9 < s <= math.pi:
                continue
            x = math.cos(s) * pole + math.sin(s) * direction
            phi = math.atan2(float(np.dot(x, e2)), float(np.dot(x, e1)))
            if self.contains_azimuth(phi):
                hits.append(s)
        return hits

    def to_json(self):
        return {
            "axis": list(self.axis),
            "radius": self.radius,
            "start": self.start,
            "sweep": self.sweep,
        }

    @classmethod
    def from_json(cls, data) -> "SphericalArc":
        return cls(tuple(data["axis"]), data["radius"], data["start"], data["sweep"])


CHAIN_TOL = 1e-9


class SphericalRegion:
    """Disk region of the unit sphere bounded by a closed chain of arcs.

    Arcs must be listed with the region on the left of travel; exterior
    angles at the corners are computed from the tangents when the chain
    closes up.
    """

    def __init__(self, arcs):
        if not arcs:
            raise OpenBoundary("empty boundary")
        self.arcs = tuple(arcs)
        n = len(self.arcs)
        self.exterior_angles = []
        for i, arc in enumerate(self.arcs):
            nxt = self.arcs[(i + 1) % n]
            gap = np.linalg.norm(arc.point_at(1.0) - nxt.point_at(0.0))
            if gap > CHAIN_TOL:
                raise OpenBoundary(f"arcs {i} and {(i + 1) % n} fail to chain: gap {gap:.3g}")
            t_in = arc.tangent_at(1.0)
            t_out = nxt.tangent_at(0.0)
            pos = arc.point_at(1.0)
            ang = math.atan2(float(np.dot(np.cross(t_in, t_out), pos)), float(np.dot(t_in, t_out)))
            self.exterior_angles.append(ang)

    def corner_points(self):
        return [arc.point_at(1.0) for arc in self.arcs]

    def suggest_pole(self):
        acc = np.zeros(3)
        for arc in self.arcs:
            side = np.asarray(arc.axis) * (1.0 if arc.sweep > 0 else -1.0)
            acc += side * arc.length()
        return _unit(acc)

    def radial_extent(self, pole, phi: float) -> float:
        """Distance from the pole to the boundary along azimuth phi."""
        _, e1, e2 = _axis_frame(pole)
        direction = math.cos(phi) * e1 + math.sin(phi) * e2
        best = None
        for arc in self.arcs:
            for s in arc.ray_hits(np.asarray(pole), direction):
                best = s if best is None else min(best, s)
        if best is None:
            raise InvalidParams(f"no boundary along azimuth {phi}; pole not interior "
                                "or region not star-shaped")
        return best

    def area_by_quadrature(self, pole=None, epsabs: float = 1e-10):
        """Area via radial integration of (1 - cos R) about an interior pole.

        Requires the region to be star-shaped around the pole; the
        integrand is split at the corner azimuths.
        """
        pole = self.suggest_pole() if pole is None else _unit(pole)
        _, e1, e2 = _axis_frame(pole)
        corners = sorted(
            math.atan2(float(np.dot(c, e2)), float(np.dot(c, e1))) % math.tau
            for c in self.corner_points()
        )
        val, err = quad(
            lambda phi: 1.0 - math.cos(self.radial_extent(pole, phi)),
            0.0,
            math.tau,
            points=corners,
            limit=200,
            epsabs=epsabs,
            epsrel=1e-12,
        )
        return val, err

    def to_json(self):
        return {"arcs": [a.to_json() for a in self.arcs]}

    @classmethod
    def from_json(cls, data) -> "SphericalRegion":
        return cls([SphericalArc.from_json(a) for a in data["arcs"]])


def arc_between(a, b, tilt: float = 0.0) -> SphericalArc:
    """Arc from a to b whose axis is tilted off the great-circle axis.

    tilt = 0 gives the short geodesic arc; tilting toward the midpoint
    bisector bulges the arc while keeping the unit(a x b) side on the
    left of travel.  |tilt| must stay below pi/2.
    """
    a, b = _unit(a), _unit(b)
    if abs(tilt) >= math.pi / 2 - 1e-9:
        raise InvalidParams(f"tilt out of range: {tilt}")
    n0 = _unit(np.cross(a, b))  # raises for equal or antipodal endpoints
    bis = _unit(a + b)
    u = math.cos(tilt) * n0 + math.sin(tilt) * bis
    rho = math.acos(max(-1.0, min(1.0, float(np.dot(u, a)))))
    _, e1, e2 = _axis_frame(u)
    phi_a = math.atan2(float(np.dot(a, e2)), float(np.dot(a, e1)))
    phi_b = math.atan2(float(np.dot(b, e2)), float(np.dot(b, e1)))
    sweep = (phi_b - phi_a) % math.tau
    return SphericalArc(tuple(u), rho, phi_a, sweep)


def geodesic_polygon(vertices, tilts=None) -> SphericalRegion:
    """Region bounded by arcs between consecutive vertices (listed
    counterclockwise around the interior)."""
    n = len(vertices)
    if n < 2:
        raise InvalidParams("need at least two vertices")
    tilts = [0.0] * n if tilts is None else list(tilts)
    arcs = [arc_between(vertices[i], vertices[(i + 1) % n], tilts[i]) for i in range(n)]
    return SphericalRegion(arcs)


def fan_area(arc_length: float) -> float:
    """Area of the spherical fan with vertex at the pole over an
    equatorial arc: integrating sin(theta) over [0, arc] x [0, pi/2]
    collapses to the arc length itself."""
    if arc_length < 0:
        raise InvalidParams(f"arc length must be nonnegative, got {arc_length}")
    return float(arc_length)


def fan_area_quadrature(arc_length: float, epsabs: float = 1e-8) -> float:
    """Fan area by adaptive 2D quadrature of the sphere area element
    over the fan's azimuth x colatitude rectangle; the independent route
    for checking fan_area.  (The radial region quadrature cannot serve
    here: past a half turn the fan stops being star-shaped.)"""
    if arc_length < 0:
        raise InvalidParams(f"arc length must be nonnegative, got {arc_length}")
    if arc_length == 0:
        return 0.0
    val, _ = dblquad(
        lambda theta, phi: math.sin(theta),
        0.0, arc_length,          # azimuth
        0.0, math.pi / 2,         # colatitude, pole to equator
        epsabs=epsabs,
    )
    return val


def gauss_bonnet_residual(region: SphericalRegion, pole=None) -> float:
    """|Area + curvature integral + exterior angles - 2 pi| for a disk
    region; the area comes from quadrature, the rest from the boundary."""
    area, _ = region.area_by_quadrature(pole=pole)
    k = sum(arc.curvature_integral() for arc in region.arcs)
    corners = sum(region.exterior_angles)
    return abs(area + k + corners - 2.0 * math.pi)


# --- JSON helpers ---------------------------------------------------------------

def encode_endpoint(z):
    return "inf" if is_infinity(z) else [z.real, z.imag]


def decode_endpoint(v):
    return INFTY if v == "inf" else complex(v[0], v[1])


def geodesic_to_json(g: Geodesic):
    return [encode_endpoint(g.p), encode_endpoint(g.q)]


def geodesic_from_json(data) -> Geodesic:
    return Geodesic(decode_endpoint(data[0]), decode_endpoint(data[1]))


def point_h3_to_json(p: PointH3):
    return [p.z.real, p.z.imag, p.t]


def point_h3_from_json(data) -> PointH3:
    return PointH3(complex(data[0], data[1]), float(data[2]))
