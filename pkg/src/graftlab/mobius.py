"""Moebius transformations on the Riemann sphere and upper half-space.

Matrices are kept at determinant 1; two transforms represent the same
element of PSL(2, C) when their matrices agree up to an overall sign.
The ideal point at infinity is the float INFTY so it survives equality
tests and sorting; any value of modulus above INFINITY_CUTOFF is folded
into it.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeodesic, InvalidParams, ParabolicOrIdentity

INFTY = float("inf")
INFINITY_CUTOFF = 1e15
SIGN_TOL = 1e-10      # PSL equality: sup-norm gap minimized over signs
CLASSIFY_BAND = 1e-9  # width of the parabolic / elliptic decision bands


def is_infinity(z) -> bool:
    return z == INFTY or abs(z) > INFINITY_CUTOFF


def normalize_point(z):
    """Fold huge values into INFTY, everything else into a complex."""
    if is_infinity(z):
        return INFTY
    return complex(z)


def points_equal(p, q, tol: float = 1e-13) -> bool:
    pi, qi = is_infinity(p), is_infinity(q)
    if pi or qi:
        return pi and qi
    return abs(p - q) <= tol * max(1.0, abs(p), abs(q))


def wrap_angle(theta: float) -> float:
    """Reduce an angle to the half-open interval (-pi, pi]."""
    r = math.remainder(theta, math.tau)
    if r <= -math.pi:  # remainder can land exactly on -pi
        r += math.tau
    return r


class MobiusClass(enum.Enum):
    IDENTITY = "identity"
    PARABOLIC = "parabolic"
    ELLIPTIC = "elliptic"
    LOXODROMIC = "loxodromic"


@dataclass(frozen=True)
class PointH3:
    """Point of upper half-space: horizontal coordinate z, height t > 0."""

    z: complex
    t: float

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "t", float(self.t))
        if not self.t > 1e-12:
            raise InvalidParams(f"height must exceed 1e-12, got {self.t}")

    @property
    def x(self) -> float:
        return self.z.real

    @property
    def y(self) -> float:
        return self.z.imag


@dataclass(frozen=True)
class Geodesic:
    """Oriented geodesic given by its ideal endpoints p -> q.

    Endpoints live on the Riemann sphere (complex or INFTY).  Real
    endpoints mean the geodesic lies in the upper half-plane sitting
    inside upper half-space as the vertical plane over the real axis.
    """

    p: object
    q: object

    def __post_init__(self):
        object.__setattr__(self, "p", normalize_point(self.p))
        object.__setattr__(self, "q", normalize_point(self.q))
        if points_equal(self.p, self.q):
            raise DegenerateGeodesic(f"endpoints coincide: {self.p!r}")

    def reversed(self) -> "Geodesic":
        return Geodesic(self.q, self.p)

    def is_real(self, tol: float = 1e-12) -> bool:
        for e in (self.p, self.q):
            if not is_infinity(e) and abs(e.imag) > tol:
                return False
        return True

    def same_unoriented(self, other: "Geodesic", tol: float = 1e-10) -> bool:
        return (points_equal(self.p, other.p, tol) and points_equal(self.q, other.q, tol)) or (
            points_equal(self.p, other.q, tol) and points_equal(self.q, other.p, tol)
        )


class MoebiusTransform:
    """Element of PSL(2, C) acting as z -> (a z + b) / (c z + d)."""

    __slots__ = ("m",)

    def __init__(self, a, b, c, d):
        det = a * d - b * c
        if abs(det) < 1e-30:
            raise InvalidParams(f"matrix is singular: det={det!r}")
        s = cmath.sqrt(det)
        self.m = np.array([[a / s, b / s], [c / s, d / s]], dtype=complex)

    @classmethod
    def from_matrix(cls, m) -> "MoebiusTransform":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def _raw(cls, m) -> "MoebiusTransform":
        # trusted determinant-1 input: skip the normalization, whose
        # det evaluation is ill-conditioned for large entries
        obj = object.__new__(cls)
        obj.m = np.asarray(m, dtype=complex)
        return obj

    @classmethod
    def identity(cls) -> "MoebiusTransform":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_json(cls, data) -> "MoebiusTransform":
        if len(data) != 4:
            raise InvalidParams("expected four [re, im] pairs")
        a, b, c, d = (complex(re, im) for re, im in data)
        # already normalized data roundtrips bit for bit; rescaling by
        # 1/sqrt(det) here would only inject the det's drift as noise
        if abs(a * d - b * c - 1.0) <= 1e-9:
            return cls._raw(np.array([[a, b], [c, d]], dtype=complex))
        return cls(a, b, c, d)

    def to_json(self):
        return [[w.real, w.imag] for w in (self.a, self.b, self.c, self.d)]

    @property
    def a(self) -> complex:
        return self.m[0, 0]

    @property
    def b(self) -> complex:
        return self.m[0, 1]

    @property
    def c(self) -> complex:
        return self.m[1, 0]

    @property
    def d(self) -> complex:
        return self.m[1, 1]

    @property
    def trace(self) -> complex:
        return self.m[0, 0] + self.m[1, 1]

    def __mul__(self, other: "MoebiusTransform") -> "MoebiusTransform":
        return MoebiusTransform._raw(self.m @ other.m)

    def inv(self) -> "MoebiusTransform":
        m = self.m
        return MoebiusTransform._raw([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])

    def __repr__(self) -> str:
        return f"MoebiusTransform({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"

    def close_to(self, other: "MoebiusTransform", tol: float = SIGN_TOL) -> bool:
        gap = min(np.abs(self.m - other.m).max(), np.abs(self.m + other.m).max())
        return gap <= tol

    def is_identity(self, tol: float = SIGN_TOL) -> bool:
        return self.close_to(MoebiusTransform.identity(), tol)

    def apply(self, z):
        """Act on a point of the Riemann sphere."""
        if is_infinity(z):
            num, den = self.a, self.c
        else:
            z = complex(z)
            num, den = self.a * z + self.b, self.c * z + self.d
        if abs(den) * INFINITY_CUTOFF <= abs(num):
            return INFTY
        return num / den

    def apply_h3(self, p: PointH3) -> PointH3:
        """Act on upper half-space by the Poincare extension.

        With w = c z + d the image of (z, t) is
        ((a z + b) conj(w) + a conj(c) t^2, t) / (|w|^2 + |c|^2 t^2).
        """
        a, b, c, d = self.a, self.b, self.c, self.d
        z, t = complex(p.z), float(p.t)
        w = c * z + d
        den = abs(w) ** 2 + abs(c) ** 2 * t * t
        z2 = ((a * z + b) * w.conjugate() + a * c.conjugate() * t * t) / den
        return PointH3(z2, t / den)

    def classify(self, band: float = None) -> MobiusClass:
        """Trace classification, insensitive to the PSL sign.

        tr^2 within `band` of 4 means parabolic (or the identity when
        the matrix itself is close to +-I); tr^2 real in [0, 4) means
        elliptic; everything else is loxodromic.
        """
        band = CLASSIFY_BAND if band is None else band
        tr2 = self.trace ** 2
        if abs(tr2 - 4) <= band:
            eye = np.eye(2)
            gap = min(np.abs(self.m - eye).max(), np.abs(self.m + eye).max())
            return MobiusClass.IDENTITY if gap <= band else MobiusClass.PARABOLIC
        if abs(tr2.imag) <= band and -band <= tr2.real < 4:
            return MobiusClass.ELLIPTIC
        return MobiusClass.LOXODROMIC

    def _multiplier_at(self, z) -> complex:
        # eigenvalue of the eigenvector representing the fixed point z
        if is_infinity(z):
            return self.a
        return self.c * z + self.d

    def fixed_points(self):
        """Fixed points on the sphere, attracting end last.

        Loxodromic and elliptic elements give a pair; the loxodromic
        pair is ordered (repelling, attracting), the elliptic pair by a
        fixed lexicographic rule.  Parabolics give a single point.  The
        identity raises ParabolicOrIdentity.
        """
        kind = self.classify()
        if kind is MobiusClass.IDENTITY:
            raise ParabolicOrIdentity("identity fixes every point")
        a, b, c, d = self.a, self.b, self.c, self.d
        if kind is MobiusClass.PARABOLIC:
            if abs(c) == 0:
                return (INFTY,)
            return (normalize_point((a - d) / (2 * c)),)
        if abs(c) == 0:
            # upper triangular: fixes infinity and b / (d - a)
            roots = [INFTY, normalize_point(b / (d - a))]
        else:
            u = d - a
            disc = u * u + 4 * b * c  # equals tr^2 - 4
            root = cmath.sqrt(disc)
            if (u.conjugate() * root).real < 0:
                root = -root  # avoid cancellation in u + root
            half = -0.5 * (u + root)
            roots = [normalize_point(half / c), normalize_point(-b / half)]
        m0, m1 = abs(self._multiplier_at(roots[0])), abs(self._multiplier_at(roots[1]))
        if abs(m0 - m1) <= CLASSIFY_BAND:
            roots.sort(key=_point_sort_key)  # elliptic: no dynamical order
        elif m0 > m1:
            roots.reverse()
        return tuple(roots)

    def translation_length(self) -> float:
        """2 log of the expanding multiplier; zero off the loxodromic class."""
        if self.classify() is not MobiusClass.LOXODROMIC:
            return 0.0
        lam = self._multiplier_at(self.fixed_points()[-1])
        return abs(2.0 * math.log(abs(lam)))

    def rotation_angle(self) -> float:
        """Rotation about the axis oriented toward fixed_points()[-1].

        Defined modulo 2 pi (the PSL sign shifts the eigenvalue argument
        by pi, the angle by 2 pi); wrapped to (-pi, pi].
        """
        kind = self.classify()
        if kind in (MobiusClass.IDENTITY, MobiusClass.PARABOLIC):
            return 0.0
        lam = self._multiplier_at(self.fixed_points()[-1])
        return wrap_angle(2.0 * cmath.phase(lam))

    def axis(self) -> Geodesic:
        """Invariant geodesic, oriented repelling -> attracting."""
        kind = self.classify()
        if kind in (MobiusClass.IDENTITY, MobiusClass.PARABOLIC):
            raise ParabolicOrIdentity(f"{kind.value} element has no axis")
        p, q = self.fixed_points()
        return Geodesic(p, q)


def _point_sort_key(z):
    if is_infinity(z):
        return (1, 0.0, 0.0)
    return (0, z.real, z.imag)


def standardize(p, q) -> MoebiusTransform:
    """Moebius transform sending p to 0 and q to infinity."""
    p, q = normalize_point(p), normalize_point(q)
    if points_equal(p, q):
        raise DegenerateGeodesic("cannot standardize a coincident pair")
    if is_infinity(p):
        return MoebiusTransform(0, 1, 1, -q)
    if is_infinity(q):
        return MoebiusTransform(1, -p, 0, 1)
    return MoebiusTransform(1, -p, 1, -q)


def elliptic_about(geodesic: Geodesic, angle: float) -> MoebiusTransform:
    """Rotation by `angle` about the oriented geodesic.

    Conjugates the endpoints to (0, infinity) and rotates z -> e^{i angle} z
    there, so a positive angle turns counterclockwise as seen looking down
    the axis from the q end.
    """
    t = standardize(geodesic.p, geodesic.q)
    half = 0.5 * angle
    rot = MoebiusTransform(cmath.exp(1j * half), 0, 0, cmath.exp(-1j * half))
    return t.inv() * rot * t


def loxodromic_about(geodesic: Geodesic, length: float, rotation: float = 0.0) -> MoebiusTransform:
    """Loxodromic with the given axis, translating toward the q end."""
    if length <= 0:
        raise InvalidParams(f"translation length must be positive, got {length}")
    t = standardize(geodesic.p, geodesic.q)
    lam = cmath.exp(0.5 * (length + 1j * rotation))
    lox = MoebiusTransform(lam, 0, 0, 1 / lam)
    return t.inv() * lox * t


def apply_array(t: MoebiusTransform, zs: np.ndarray) -> np.ndarray:
    """Vectorized sphere action; infinity encoded as complex inf."""
    a, b, c, d = t.a, t.b, t.c, t.d
    zs = np.asarray(zs, dtype=complex)
    finite = np.isfinite(zs)
    zz = np.where(finite, zs, 0)
    num = np.where(finite, a * zz + b, a)
    den = np.where(finite, c * zz + d, c)
    blow = np.abs(den) * INFINITY_CUTOFF <= np.abs(num)
    den = np.where(blow, 1, den)
    out = num / den
    out[blow] = complex(INFTY)
    return out
