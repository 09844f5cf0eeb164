"""Verification battery: the named suites behind `graftlab verify`, plus
the shared example catalog (surfaces, multiloops, probe words) they and
the figure recipes draw from.

Each suite measures a handful of named quantities against bounds that
can be overridden per run; reports are deterministic given the seed and
serialize without volatile fields, so equal configurations produce
byte-identical report files.
"""

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ConfigError, PointOnLeaf
from .mobius import Geodesic, INFTY, MoebiusTransform
from .hyperbolic import (
    PointH2,
    dist_h3,
    fan_area,
    fan_area_quadrature,
    gauss_bonnet_residual,
    geodesic_polygon,
    right_triangle_gap,
)
from .surface import build_octagon, thurston_K, word, word_length
from .lamination import FiniteMeasuredLamination, Multiloop, lift_multiloop
from .bending import (
    BendingMap,
    _random_point,
    bend_geodesic,
    bend_point,
    bilipschitz_report,
    equivariance_defect,
)
from .traintrack import (
    WeightVector,
    build_annular_track,
    build_multiannular_track,
    geometry_audit,
    is_carried,
    switch_residual,
    weight_difference,
)
from .grafting import (
    ProjectiveStructureDesc,
    RoundCircle,
    graft,
    holonomy_trace_report,
    insert_turns,
    compare_quadrangles,
    round_cylinder,
    sector_quadrangle,
)

SCHEMA = "graftlab/1"
MAX_DEPTH = 6

# --- example catalog -----------------------------------------------------------------

BASE_PARAMS = (0.0, 0.0)
DEFORMED_PARAMS = ((0.15, 0.0), (0.0, 0.08), (0.2, -0.1), (-0.25, 0.12))
CATALOG_PARAMS = (BASE_PARAMS,) + DEFORMED_PARAMS

SEPARATING = "a1 b1 a1' b1'"

# graft multiloops of one to three pairwise disjoint loops
CATALOG_GRAFTS = (
    ("a1", ("a1",)),
    ("a2", ("a2",)),
    ("a1-a2", ("a1", "a2")),
    ("sep", (SEPARATING,)),
    ("a1-a2-sep", ("a1", "a2", SEPARATING)),
)

PROBE_WORDS = (
    "a1", "b1", "a2", "b2", "a1 b1", "a2 b2", "a1 b1'", "a1 a2",
    "b1 b2", SEPARATING, "a1 a2' b2", "a1 b1 a2 b2",
)

K_LOOPS = (
    "a1", "b1", "a2", "b2", "a1 b1", "a1 b1'", "a2 b2", "a2 b2'",
    "a1 a2", "b1 b2", "a1 b1 a2", SEPARATING,
)

# the deformation pair exhibiting the metric's asymmetry
ASYMMETRY_PARAMS = (0.15, 0.0)

SMALL_ANGLE_SWEEP = (0.1, 0.05, 0.01, 0.005)

# right-triangle grid and the frozen gap table: delta'(angleB, lenAB) is
# the independent trig oracle's 1 - gap scaled by a 0.1% guard (so the
# geometric route's 1e-8 slack cannot graze the bound), not hand-tuned
TRIANGLE_ANGLES = (1e-4, 3.162e-4, 1e-3, 3.162e-3, 1e-2)
TRIANGLE_LENGTHS = (0.5, 1.0, 2.0, 5.0, 10.0)
TRIANGLE_DELTA = (
    (1.043302e-04, 3.299300e-04, 1.043822e-03, 3.304577e-03, 1.049093e-02),
    (1.176477e-04, 3.720619e-04, 1.177285e-03, 3.728763e-03, 1.185405e-02),
    (1.815595e-04, 5.743223e-04, 1.818655e-03, 5.773804e-03, 1.848940e-02),
    (1.491048e-03, 4.751970e-03, 1.539158e-02, 5.191711e-02, 1.814001e-01),
    (1.349740e-01, 3.251454e-01, 5.503000e-01, 7.802164e-01, 1.010666e+00),
)

FAN_LENGTHS = (0.1, 1.0, math.pi, 2.0 * math.pi)

# nested boundary circles shared by the quadrangle suites and figures
CYLINDER_CIRCLES = (RoundCircle(0.3 + 0.2j, 1.0), RoundCircle(-0.1 + 0.5j, 4.0))

INVISIBILITY_LEAVES = (
    (Geodesic(-1.0, 1.0), 0.5),
    (Geodesic(-2.0, 2.0), 0.7),
    (Geodesic(-3.0, 3.0), 1.1),
)


@lru_cache(maxsize=None)
def catalog_surface(params=BASE_PARAMS):
    return build_octagon(params)


def catalog_multiloop(loops) -> Multiloop:
    return Multiloop([(word(w), 1.0) for w in loops])


# --- configuration and reports -------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    command: str = "verify"
    suites: tuple = ()           # empty means every suite
    inputs: tuple = ()
    out_dir: str = ""
    tol: dict = field(default_factory=dict)
    seed: int = 7
    depth: int = 4
    sample_counts: dict = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if not isinstance(self.depth, int) or not 0 <= self.depth <= MAX_DEPTH:
            raise ConfigError(f"depth must be an integer in [0, {MAX_DEPTH}]")
        for name, value in self.tol.items():
            # 0 is allowed: an impossible bound is the documented way to
            # force a failure report
            if not (isinstance(value, (int, float)) and value >= 0.0
                    and math.isfinite(value)):
                raise ConfigError(f"tolerance {name} must be a finite real >= 0")
        for name, value in self.sample_counts.items():
            if not (isinstance(value, int) and value > 0):
                raise ConfigError(f"sample count {name} must be a positive integer")

    def samples(self, name: str, default: int) -> int:
        return self.sample_counts.get(name, default)


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    bound: float
    op: str  # the pass condition: measured <op> bound
    passed: bool

    def to_json(self):
        return {
            "name": self.name,
            "measured": self.measured,
            "bound": self.bound,
            "op": self.op,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class VerificationReport:
    suite: str
    checks: tuple
    wall_time: float
    seed: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self):
        # no wall time here: report bytes must not depend on the clock
        return {
            "schema": SCHEMA,
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [c.to_json() for c in self.checks],
        }


@dataclass(frozen=True)
class BatteryReport:
    reports: tuple
    seed: int

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def to_json(self):
        return {
            "schema": SCHEMA,
            "kind": "verification-battery",
            "seed": self.seed,
            "passed": self.passed,
            "suites": [r.to_json() for r in self.reports],
        }

    def timings(self):
        return {r.suite: r.wall_time for r in self.reports}


def canonical_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


_OPS = {
    "<": lambda m, b: m < b,
    "<=": lambda m, b: m <= b,
    ">": lambda m, b: m > b,
    ">=": lambda m, b: m >= b,
}


def _check(cfg: RunConfig, suite: str, name: str, measured, bound, op: str):
    bound = cfg.tol.get(f"{suite}.{name}", cfg.tol.get(name, bound))
    measured = float(measured)
    return CheckResult(name, measured, float(bound), op, bool(_OPS[op](measured, bound)))


# --- suites --------------------------------------------------------------------------

def _suite_holonomy_invariance(cfg: RunConfig):
    base = ProjectiveStructureDesc(catalog_surface())
    probes = [word(w) for w in PROBE_WORDS]
    checks = []
    for slug, loops in CATALOG_GRAFTS:
        grafted = graft(base, catalog_multiloop(loops), depth=3)
        rows = holonomy_trace_report(base, grafted, probes, depth=3)
        checks.append(
            _check(cfg, "holonomy-invariance", f"trace-defect-{slug}",
                   max(r.defect for r in rows), 1e-9, "<")
        )
    return checks


def _small_angle_lamination(theta: float, mass: float = 2.0 * math.pi):
    # nested leaves crossing the vertical axis at angle theta, feet at
    # heights exp(s)
    t = math.tan(theta / 2.0)
    return FiniteMeasuredLamination([
        (Geodesic(-math.exp(s) * t, math.exp(s) / t), mass / 8.0)
        for s in (-6.3, -4.5, -2.7, -0.9, 0.9, 2.7, 4.5, 6.3)
    ])


def _suite_bilipschitz_bending(cfg: RunConfig):
    ratios, tangents, projected = [], [], []
    for theta in SMALL_ANGLE_SWEEP:
        b = BendingMap(_small_angle_lamination(theta))
        rep = bilipschitz_report(
            bend_geodesic(b, Geodesic(0.0, INFTY), span=10.0, steps=200)
        )
        ratios.append(rep.max_ratio)
        tangents.append(rep.max_tangent_angle)
        projected.append(rep.projected_ratio)
    return [
        _check(cfg, "bilipschitz-bending", "ratio-monotone",
               max(b - a for a, b in zip(ratios, ratios[1:])), 0.0, "<"),
        _check(cfg, "bilipschitz-bending", "tangent-monotone",
               max(b - a for a, b in zip(tangents, tangents[1:])), 0.0, "<"),
        _check(cfg, "bilipschitz-bending", "final-ratio", ratios[-1], 1.02, "<"),
        _check(cfg, "bilipschitz-bending", "final-projected-ratio",
               projected[-1], 1.02, "<"),
    ]


def _suite_fold_counterexample(cfg: RunConfig):
    lam = FiniteMeasuredLamination([(Geodesic(0.0, INFTY), 3.0)])
    b = BendingMap(lam, basepoint=PointH2(-1.0, 1.0))
    rep = bilipschitz_report(bend_geodesic(b, Geodesic(-1.0, 1.0), span=2.5, steps=192))
    return [
        _check(cfg, "fold-counterexample", "bilipschitz-ratio",
               rep.max_ratio, 5.0, ">"),
    ]


def _oracle_gap(beta: float, c: float) -> float:
    # right-angle trig identities: tanh(BC) = tanh(AB) cos(B),
    # sinh(CA) = sinh(AB) sin(B)
    bc = math.atanh(math.tanh(c) * math.cos(beta))
    ca = math.asinh(math.sinh(c) * math.sin(beta))
    return (bc - ca) / c


def _suite_right_triangle(cfg: RunConfig):
    residual = 0.0
    margin = math.inf
    drift = -math.inf
    for i, c in enumerate(TRIANGLE_LENGTHS):
        row = []
        for j, beta in enumerate(TRIANGLE_ANGLES):
            gap, _ = right_triangle_gap(beta, c)
            row.append(1.0 - gap)
            residual = max(residual, abs(gap - _oracle_gap(beta, c)))
            margin = min(margin, gap - (1.0 - TRIANGLE_DELTA[i][j]))
        # at fixed length the defect must shrink with the angle
        drift = max(drift, max(a - b for a, b in zip(row, row[1:])))
    return [
        _check(cfg, "right-triangle", "dual-route-residual", residual, 1e-8, "<"),
        _check(cfg, "right-triangle", "gap-above-table", margin, 0.0, ">"),
        _check(cfg, "right-triangle", "gap-defect-vanishes", drift, 0.0, "<"),
    ]


def _suite_fan_area(cfg: RunConfig):
    analytic = max(abs(fan_area(a) - a) for a in FAN_LENGTHS)
    quadrature = max(abs(fan_area_quadrature(a) - a) for a in FAN_LENGTHS)
    return [
        _check(cfg, "fan-area", "analytic", analytic, 1e-8, "<"),
        _check(cfg, "fan-area", "quadrature", quadrature, 1e-6, "<"),
    ]


def _random_star_vertices(rng, n):
    while True:
        azs = np.sort(rng.uniform(0.0, math.tau, n))
        gaps = np.diff(np.concatenate([azs, [azs[0] + math.tau]]))
        if gaps.min() >= 0.3 and gaps.max() <= 2.8:
            break
    cols = rng.uniform(0.4, 1.1, n)
    return [
        np.array([math.sin(c) * math.cos(a), math.sin(c) * math.sin(a), math.cos(c)])
        for a, c in zip(azs, cols)
    ]


def _suite_gauss_bonnet(cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for k in range(cfg.samples("gauss-bonnet", 50)):
        n = int(rng.integers(3, 9))
        verts = _random_star_vertices(rng, n)
        tilts = rng.uniform(-0.25, 0.25, n) if k % 2 else None
        region = geodesic_polygon(verts, tilts)
        worst = max(worst, gauss_bonnet_residual(region, pole=(0.0, 0.0, 1.0)))
    return [_check(cfg, "gauss-bonnet", "max-residual", worst, 1e-6, "<")]


def _suite_multiarc_integrality(cfg: RunConfig):
    support = round_cylinder(*CYLINDER_CIRCLES)
    count_error = 0
    residual = 0.0
    for i in range(10):
        turns = i % 6
        q = sector_quadrangle(
            support,
            phi0=0.1 + 0.37 * i,
            width=0.7 + 0.15 * (i % 4),
            twist=0.6 * (i % 3) * (-1.0 if i % 2 else 1.0),
        )
        grafted = insert_turns(q, turns)
        count_error = max(count_error, abs(compare_quadrangles(q, grafted) - turns))
        for quad in (q, grafted):
            residual = max(
                residual, abs(quad.winding_lift - float(np.mean(quad._width)))
            )
    return [
        _check(cfg, "multiarc-integrality", "turn-count-exact",
               count_error, 0.0, "<="),
        _check(cfg, "multiarc-integrality", "winding-residual",
               residual, 1e-6, "<"),
    ]


def _pi_units(weight: float) -> Fraction:
    units = weight / math.pi
    if units != round(units):
        raise ConfigError(f"lamination weight {weight} is not a pi-multiple")
    return Fraction(int(round(units)))


def _track_weights(track_words, structure) -> WeightVector:
    by_indices = {w.indices: weight for w, weight in structure.lamination}
    return WeightVector.rational_pi(
        _pi_units(by_indices.get(w.indices, 0.0)) for w in track_words
    )


def _suite_switch_assembly(cfg: RunConfig):
    surface = catalog_surface()
    base = ProjectiveStructureDesc(surface)
    pairs = [(slug, base, catalog_multiloop(loops)) for slug, loops in CATALOG_GRAFTS]
    # one pair with a nonzero base: a second annulus along a1
    stacked = graft(base, catalog_multiloop(("a1",)), depth=3)
    pairs.append(("a1-stacked", stacked, catalog_multiloop(("a1",))))
    checks = []
    for slug, before, m in pairs:
        after = graft(before, m, depth=3)
        track_words = [w for w, _ in after.lamination]
        track = build_multiannular_track(surface, track_words)
        w_before = _track_weights(track_words, before)
        w_after = _track_weights(track_words, after)
        diff = weight_difference(track, w_after, w_before)
        mult = {w.indices: Fraction(int(round(x))) for w, x in m}
        expected = [2 * mult.get(w.indices, Fraction(0)) for w in track_words]
        defect = max(abs(d - e) for d, e in zip(diff.values, expected))
        defect = max([defect, *switch_residual(track, diff)])
        if not is_carried(track, w_after):
            defect = max(defect, Fraction(1))
        checks.append(
            _check(cfg, "switch-assembly", f"pair-{slug}", float(defect), 0.0, "<=")
        )
    return checks


def _suite_bending_equivariance(cfg: RunConfig):
    surface = catalog_surface()
    m = Multiloop([(word("a1"), 1.3)])
    samples = cfg.samples("equivariance", 1000)
    defects = []
    for depth in (2, 3, 4):
        b = BendingMap(lift_multiloop(surface, m, depth))
        defects.append(
            equivariance_defect(b, surface, samples=samples, seed=cfg.seed)
        )
    d2, d3, d4 = defects
    return [
        _check(cfg, "bending-equivariance", "depth-monotone",
               max(d3 - d2, d4 - d3), 0.0, "<"),
        _check(cfg, "bending-equivariance", "depth-4-defect", d4, 1e-6, "<"),
    ]


def _suite_two_pi_invisibility(cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed)
    # off every leaf: the leaves are concentric half-circles of radius
    # 1, 2, 3 about the origin
    basepoint = PointH2(0.0, 1.5)
    samples = cfg.samples("invisibility", 1000)
    base = BendingMap(FiniteMeasuredLamination(INVISIBILITY_LEAVES), basepoint)
    worst = 0.0
    for k in range(len(INVISIBILITY_LEAVES)):
        bumped = BendingMap(FiniteMeasuredLamination([
            (leaf, weight + (2.0 * math.pi if i == k else 0.0))
            for i, (leaf, weight) in enumerate(INVISIBILITY_LEAVES)
        ]), basepoint)
        accepted = 0
        while accepted < samples:
            x = _random_point(rng, basepoint, 2.0)
            try:
                gap = dist_h3(bend_point(base, x), bend_point(bumped, x))
            except PointOnLeaf:
                continue
            worst = max(worst, gap)
            accepted += 1
    return [
        _check(cfg, "2pi-invisibility", "max-displacement", worst, 1e-10, "<"),
    ]


def _suite_thurston_k(cfg: RunConfig):
    loops = [word(w) for w in K_LOOPS]
    self_dist = max(
        abs(thurston_K(catalog_surface(p), catalog_surface(p), loops))
        for p in CATALOG_PARAMS
    )
    rng = np.random.default_rng(cfg.seed)
    slack = math.inf
    for _ in range(10):
        x, y, z = (
            build_octagon((rng.uniform(-0.25, 0.25), rng.uniform(-0.12, 0.12)))
            for _ in range(3)
        )
        slack = min(
            slack,
            thurston_K(x, y, loops) + thurston_K(y, z, loops)
            - thurston_K(x, z, loops),
        )
    fwd = thurston_K(catalog_surface(), catalog_surface(ASYMMETRY_PARAMS), loops)
    bwd = thurston_K(catalog_surface(ASYMMETRY_PARAMS), catalog_surface(), loops)
    return [
        _check(cfg, "thurston-K", "self-distance", self_dist, 0.0, "<="),
        _check(cfg, "thurston-K", "triangle-slack", slack, -1e-9, ">="),
        _check(cfg, "thurston-K", "asymmetry", abs(fwd - bwd), 1e-3, ">"),
    ]


def _suite_traintrack_geometry(cfg: RunConfig):
    surface = catalog_surface()
    track = build_annular_track(surface, word("a1"))
    loose = geometry_audit(track, 0.1)
    tight = geometry_audit(track, 1e-4)
    floor_defect = abs(track.rail_floor - word_length(surface, word("a1")) / 3.0)
    return [
        _check(cfg, "traintrack-geometry", "passes-at-0.1",
               1.0 if loose.passed else 0.0, 0.5, ">"),
        _check(cfg, "traintrack-geometry", "fails-at-1e-4",
               0.0 if tight.passed else 1.0, 0.5, ">"),
        _check(cfg, "traintrack-geometry", "rail-floor-definition",
               floor_defect, 0.0, "<="),
        _check(cfg, "traintrack-geometry", "rails-above-floor",
               loose.min_rail_length - track.rail_floor, 0.0, ">="),
    ]


SUITES = {
    "holonomy-invariance": _suite_holonomy_invariance,
    "bilipschitz-bending": _suite_bilipschitz_bending,
    "fold-counterexample": _suite_fold_counterexample,
    "right-triangle": _suite_right_triangle,
    "fan-area": _suite_fan_area,
    "gauss-bonnet": _suite_gauss_bonnet,
    "multiarc-integrality": _suite_multiarc_integrality,
    "switch-assembly": _suite_switch_assembly,
    "bending-equivariance": _suite_bending_equivariance,
    "2pi-invisibility": _suite_two_pi_invisibility,
    "thurston-K": _suite_thurston_k,
    "traintrack-geometry": _suite_traintrack_geometry,
}


def run_suite(name: str, cfg: RunConfig) -> VerificationReport:
    if name not in SUITES:
        raise ConfigError(
            f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}"
        )
    start = time.perf_counter()
    checks = SUITES[name](cfg)
    return VerificationReport(name, tuple(checks), time.perf_counter() - start,
                              cfg.seed)


def run_verify(cfg: RunConfig) -> BatteryReport:
    """Run the requested suites (all of them by default) in parallel and
    assemble the reports sorted by suite name."""
    names = sorted(cfg.suites) if cfg.suites else sorted(SUITES)
    for name in names:
        if name not in SUITES:
            raise ConfigError(
                f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}"
            )
    with ThreadPoolExecutor(max_workers=min(8, len(names))) as pool:
        reports = list(pool.map(lambda n: run_suite(n, cfg), names))
    return BatteryReport(tuple(reports), cfg.seed)
