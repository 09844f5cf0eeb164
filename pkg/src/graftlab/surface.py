"""A concrete closed genus-2 hyperbolic surface.

The surface is the quotient of the hyperbolic plane by the group
generated by side pairings of a hyperbolic octagon.  The octagon family
is parametrized by (u, psi): u biases the even/odd vertex radii, psi
staggers the vertex directions, and a global scale is solved by
bisection so the interior angles sum to 2 pi (Poincare's condition).
Side k is paired with side k+2 for k in {0, 1, 4, 5}; rewriting those
four pairings gives canonical generators a1, b1, a2, b2 satisfying the
commutator relator [a1, b1][a2, b2] = 1.  At the default parameters all
four generators have trace of modulus 2 + sqrt(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DepthTooLarge,
    EmptyLoopSet,
    InvalidParams,
    NotLoxodromic,
)
from .hyperbolic import (
    FROM_DISK,
    PointH2,
    dist_h2,
    point_h2,
    segment_standardizer,
)
from .mobius import Geodesic, MobiusClass, MoebiusTransform, is_infinity

GENERATOR_NAMES = ("a1", "b1", "a2", "b2")
MAX_LIFT_DEPTH = 6
RELATOR_TOL = 1e-8
PARAM_RANGE = {"u": 0.3, "psi": 0.15}


@dataclass(frozen=True)
class GroupWord:
    """Freely reduced word in the four surface generators.

    Stored as signed 1-based indices: +1 is a1, -1 its inverse, and so
    on through +-4 for b2.
    """

    indices: tuple

    def __init__(self, indices):
        reduced = []
        for i in indices:
            i = int(i)
            if i == 0 or abs(i) > 4:
                raise InvalidParams(f"generator index out of range: {i}")
            if reduced and reduced[-1] == -i:
                reduced.pop()
            else:
                reduced.append(i)
        object.__setattr__(self, "indices", tuple(reduced))

    @classmethod
    def from_string(cls, text: str) -> "GroupWord":
        """Parse words like "a1 b1' a2 a2" (a trailing ' inverts)."""
        out = []
        for tok in text.split():
            inv = tok.endswith("'")
            name = tok[:-1] if inv else tok
            if name not in GENERATOR_NAMES:
                raise InvalidParams(f"unknown generator {tok!r}")
            idx = GENERATOR_NAMES.index(name) + 1
            out.append(-idx if inv else idx)
        return cls(out)

    def __str__(self) -> str:
        return " ".join(
            GENERATOR_NAMES[abs(i) - 1] + ("'" if i < 0 else "") for i in self.indices
        ) or "e"

    def __len__(self) -> int:
        return len(self.indices)

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        return GroupWord(self.indices + other.indices)

    def inv(self) -> "GroupWord":
        return GroupWord(tuple(-i for i in reversed(self.indices)))

    def power(self, n: int) -> "GroupWord":
        if n < 0:
            return self.inv().power(-n)
        return GroupWord(self.indices * n)

    def conjugated_by(self, g: "GroupWord") -> "GroupWord":
        return g * self * g.inv()

    def to_json(self):
        return list(self.indices)

    @classmethod
    def from_json(cls, data) -> "GroupWord":
        return cls(data)


def word(text: str) -> GroupWord:
    return GroupWord.from_string(text)


def commutator(a: GroupWord, b: GroupWord) -> GroupWord:
    return a * b * a.inv() * b.inv()


RELATOR = word("a1 b1 a1' b1' a2 b2 a2' b2'")


# --- octagon construction ------------------------------------------------------

def _interior_angle(a: PointH2, b: PointH2, c: PointH2) -> float:
    ab, bc, ac = dist_h2(a, b), dist_h2(b, c), dist_h2(a, c)
    val = (math.cosh(ab) * math.cosh(bc) - math.cosh(ac)) / (math.sinh(ab) * math.sinh(bc))
    return math.acos(max(-1.0, min(1.0, val)))


def _octagon_vertices(u: float, psi: float, scale: float):
    pts = []
    for k in range(8):
        phi = k * math.pi / 4 + math.pi / 8 + (-1) ** k * psi
        h = scale * (1 + u) if k % 2 == 0 else scale * (1 - u)
        disk = math.tanh(h / 2) * complex(math.cos(phi), math.sin(phi))
        pts.append(point_h2(FROM_DISK.apply(disk)))
    return pts


def _angle_sum(u: float, psi: float, scale: float) -> float:
    w = _octagon_vertices(u, psi, scale)
    return sum(_interior_angle(w[k - 1], w[k], w[(k + 1) % 8]) for k in range(8))


class FuchsianSurface:
    """Genus-2 hyperbolic surface as four loxodromic generators with the
    commutator relator; read-only after construction."""

    def __init__(self, params, generators, vertices=None):
        self.params = tuple(float(x) for x in params)
        self.generators = tuple(generators)
        self.vertices = tuple(vertices) if vertices is not None else None
        if len(self.generators) != 4:
            raise InvalidParams("need exactly four generators")
        for name, g in zip(GENERATOR_NAMES, self.generators):
            if abs(g.trace.imag) > 1e-10:
                raise InvalidParams(f"{name} has non-real trace {g.trace}")
            if g.classify() is not MobiusClass.LOXODROMIC:
                raise InvalidParams(f"{name} is {g.classify().value}, not loxodromic")
        defect = self.relator_defect()
        if defect > RELATOR_TOL:
            raise InvalidParams(f"relator defect {defect:.3e} exceeds {RELATOR_TOL}")
        self._inverses = tuple(g.inv() for g in self.generators)
        self.basepoint = PointH2(0.0, 1.0)  # image of the octagon center

    def evaluate(self, w: GroupWord) -> MoebiusTransform:
        m = np.eye(2, dtype=complex)
        for i in w.indices:
            g = self.generators[i - 1] if i > 0 else self._inverses[-i - 1]
            m = m @ g.m
        return MoebiusTransform._raw(m)

    def relator_defect(self) -> float:
        m = np.eye(2, dtype=complex)
        for i in RELATOR.indices:
            g = self.generators[i - 1] if i > 0 else self.generators[-i - 1].inv()
            m = m @ g.m
        eye = np.eye(2)
        return float(min(np.abs(m - eye).max(), np.abs(m + eye).max()))

    def to_json(self):
        return {
            "params": list(self.params),
            "generators": [g.to_json() for g in self.generators],
        }

    @classmethod
    def from_json(cls, data) -> "FuchsianSurface":
        gens = [MoebiusTransform.from_json(g) for g in data["generators"]]
        return cls(tuple(data["params"]), gens)

    def __repr__(self) -> str:
        return f"FuchsianSurface(params={self.params})"


def build_octagon(params=(0.0, 0.0)) -> FuchsianSurface:
    """Surface from octagon deformation parameters (u, psi).

    u in [-0.3, 0.3] biases even against odd vertex radii, psi in
    [-0.15, 0.15] staggers the vertex directions; (0, 0) is the regular
    octagon.  The global scale solving the 2 pi angle-sum condition is
    found by bisection.
    """
    if len(tuple(params)) != 2:
        raise InvalidParams(f"expected (u, psi), got {params!r}")
    u, psi = float(params[0]), float(params[1])
    if abs(u) > PARAM_RANGE["u"] or abs(psi) > PARAM_RANGE["psi"]:
        raise InvalidParams(f"params {params} outside validity region "
                            f"|u| <= {PARAM_RANGE['u']}, |psi| <= {PARAM_RANGE['psi']}")
    lo, hi = 0.05, 6.0
    if not (_angle_sum(u, psi, lo) > 2 * math.pi > _angle_sum(u, psi, hi)):
        raise InvalidParams("angle-sum bisection bracket failed")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _angle_sum(u, psi, mid) > 2 * math.pi:
            lo = mid
        else:
            hi = mid
    verts = _octagon_vertices(u, psi, 0.5 * (lo + hi))

    # raw pairing of side k+2 onto side k, endpoints reversed
    raw = {}
    for name, k in (("p", 0), ("q", 1), ("r", 4), ("s", 5)):
        raw[name] = (
            segment_standardizer(verts[k + 1], verts[k]).inv()
            * segment_standardizer(verts[(k + 2) % 8], verts[(k + 3) % 8])
        )
    # rewrite to commutator form: [p, q] q [s', r] q' is the raw relator,
    # so conjugating the second pair by q gives [a1,b1][a2,b2] = 1
    a1, b1 = raw["p"], raw["q"]
    a2 = b1 * raw["s"].inv() * b1.inv()
    b2 = b1 * raw["r"] * b1.inv()
    return FuchsianSurface((u, psi), (a1, b1, a2, b2), vertices=verts)


# --- lengths and the asymmetric metric ------------------------------------------

def word_length(surface: FuchsianSurface, w: GroupWord) -> float:
    """Hyperbolic length of the closed geodesic in the class of w."""
    g = surface.evaluate(w)
    if g.classify() is not MobiusClass.LOXODROMIC:
        raise NotLoxodromic(f"word {w} evaluates to a {g.classify().value} element")
    return 2.0 * math.acosh(abs(g.trace) / 2.0)


def thurston_K(tau: FuchsianSurface, tau_prime: FuchsianSurface, loops) -> float:
    """max over the loop set of ln(length_tau / length_tau'); a finite
    lower bound for the supremum over all loops."""
    loops = list(loops)
    if not loops:
        raise EmptyLoopSet("need at least one loop")
    return max(
        math.log(word_length(tau, w) / word_length(tau_prime, w)) for w in loops
    )


# --- lifting loops to the plane ---------------------------------------------------

def _endpoint_units(z) -> int:
    if is_infinity(z):
        return None
    return round(z.real * 1e9)


def _axis_key(g: Geodesic):
    a, b = _endpoint_units(g.p), _endpoint_units(g.q)
    big = 1 << 62
    ka = big if a is None else a
    kb = big if b is None else b
    return (ka, kb) if ka <= kb else (kb, ka)


def _near_keys(key):
    (a, b) = key
    for da in (-1, 0, 1):
        for db in (-1, 0, 1):
            yield (a + da, b + db)


def enumerate_group(surface: FuchsianSurface, depth: int):
    """All reduced words of length <= depth as transforms, paired with
    their last letter index (identity carries 0)."""
    frontier = [(0, MoebiusTransform.identity())]
    yield frontier[0]
    for _ in range(depth):
        nxt = []
        for last, g in frontier:
            for i in (1, 2, 3, 4, -1, -2, -3, -4):
                if last == -i:
                    continue
                step = surface.generators[i - 1] if i > 0 else surface._inverses[-i - 1]
                nxt.append((i, g * step))
        yield from nxt
        frontier = nxt


def lift_loop(surface: FuchsianSurface, w: GroupWord, depth: int):
    """Axes of the conjugates of w over all group elements of word
    length <= depth, deduplicated, in a deterministic order."""
    if depth > MAX_LIFT_DEPTH:
        raise DepthTooLarge(f"depth {depth} exceeds the guard {MAX_LIFT_DEPTH}")
    if depth < 0:
        raise InvalidParams("depth must be nonnegative")
    base = surface.evaluate(w)
    if base.classify() is not MobiusClass.LOXODROMIC:
        raise NotLoxodromic(f"word {w} is not loxodromic")
    p0, q0 = base.fixed_points()
    seen = {}
    for _, g in enumerate_group(surface, depth):
        axis = Geodesic(g.apply(p0), g.apply(q0))
        key = _axis_key(axis)
        if any(k in seen for k in _near_keys(key)):
            continue
        seen[key] = axis
    return [seen[k] for k in sorted(seen)]
