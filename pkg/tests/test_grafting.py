"""Grafting tests: diagonal Hopf-torus oracles, the admissibility
pipeline, weight bookkeeping and exact commutation of grafts, trace
invariance of the derived holonomy, concentric normalization of round
cylinders, and the integer winding arithmetic of supported quadrangles."""

import json
import math

import numpy as np
import pytest

from graftlab.errors import (
    InvalidParams,
    NonIntegralResidual,
    NotAdmissible,
    NotLoxodromic,
    ParameterOutOfRange,
    SupportMismatch,
    UnsupportedConfiguration,
)
from graftlab.mobius import INFTY, MoebiusTransform, apply_array, is_infinity
from graftlab.surface import FuchsianSurface, build_octagon, word, word_length
from graftlab.lamination import Multiloop
from graftlab.grafting import (
    HopfTorusDesc,
    ProjectiveStructureDesc,
    RoundCircle,
    RoundCylinder,
    SupportedQuadrangle,
    circles_disjoint,
    compare_quadrangles,
    crescent_angle,
    equator_arc_length,
    foliation_leaf,
    graft,
    holonomy_trace_report,
    hopf_torus,
    insert_turns,
    is_admissible,
    round_cylinder,
    sector_quadrangle,
    thurston_cylinders,
)

from test_mobius import random_mobius


@pytest.fixture(scope="module")
def octagon():
    return build_octagon()


@pytest.fixture(scope="module")
def fuchsian(octagon):
    return ProjectiveStructureDesc(octagon)


PROBES = [
    "a1", "b1", "a2", "b2", "a1 b1", "a2 b2'", "a1 a2",
    "b1 a2 b2", "a1 b1 a1' b1'", "a1 a1 b2",
]


# --- hopf tori -----------------------------------------------------------------


def test_hopf_torus_real_diagonal():
    # diag(2, 1/2): multiplier 4, length 2 log 2, no rotation
    h = hopf_torus(MoebiusTransform(2.0, 0.0, 0.0, 0.5))
    assert abs(h.modulus - 2.0 * math.log(2.0)) < 1e-12


def test_hopf_torus_complex_diagonal():
    lam = np.exp(1.0 + 1.0j)
    h = hopf_torus(MoebiusTransform(lam, 0.0, 0.0, 1.0 / lam))
    assert abs(h.modulus - (2.0 + 2.0j)) < 1e-12


def test_hopf_torus_rejects_elliptic():
    rot = MoebiusTransform(np.exp(0.4j), 0.0, 0.0, np.exp(-0.4j))
    with pytest.raises(NotLoxodromic):
        hopf_torus(rot)


def test_hopf_torus_conjugation_invariant():
    rng = np.random.default_rng(5)
    g = MoebiusTransform(np.exp(0.7 + 0.3j), 0.0, 0.0, np.exp(-0.7 - 0.3j))
    base = hopf_torus(g).modulus
    for _ in range(10):
        c = random_mobius(rng)
        assert abs(hopf_torus(c * g * c.inv()).modulus - base) < 1e-9


# --- admissibility ---------------------------------------------------------------


def test_admissible_generator(fuchsian):
    verdict = is_admissible(fuchsian, word("a1"))
    assert verdict
    assert verdict.reason == ""


def test_admissible_conjugate_and_separating(fuchsian):
    assert is_admissible(fuchsian, word("b2 a1 b2'"))
    assert is_admissible(fuchsian, word("a1 b1 a1' b1'"))


def test_relator_not_loxodromic(fuchsian):
    verdict = is_admissible(fuchsian, word("a1 b1 a1' b1' a2 b2 a2' b2'"))
    assert not verdict
    assert verdict.reason == "NotLoxodromic"
    assert not is_admissible(fuchsian, word("")).ok


def test_proper_power_not_primitive(fuchsian):
    # the square is loxodromic, so the power test must be the one to fire
    verdict = is_admissible(fuchsian, word("a1 a1"))
    assert verdict.reason == "NonPrimitive"
    assert is_admissible(fuchsian, word("b1 a1 a1 b1'")).reason == "NonPrimitive"


def test_cyclic_reduction_before_power_test(fuchsian):
    # reduces to a1, a primitive loop
    assert is_admissible(fuchsian, word("b1 a1 b1'"))


def test_nonsimple_loop_detected(fuchsian):
    verdict = is_admissible(fuchsian, word("a1 b1 a1 b1'"))
    assert verdict.reason == "CrossingDetected"


# --- structures and grafting -------------------------------------------------------


def test_fuchsian_structure_trivia(fuchsian):
    assert len(fuchsian.lamination) == 0
    assert thurston_cylinders(fuchsian) == []
    assert fuchsian.orientation


def test_structure_requires_nonelementary():
    # powers of one loxodromic satisfy the relator but share an axis
    g = MoebiusTransform(2.0, 0.0, 0.0, 0.5)
    cyclic = FuchsianSurface((0.0, 0.0), [g, g * g, g * g * g, g * g * g * g])
    with pytest.raises(InvalidParams):
        ProjectiveStructureDesc(cyclic)


def test_graft_adds_full_turn_weight(fuchsian):
    c = graft(fuchsian, Multiloop([(word("a1"), 1.0)]))
    ((w, weight),) = c.lamination
    assert w.indices == word("a1").indices
    assert weight == 2.0 * math.pi
    assert c.surface is fuchsian.surface


def test_graft_multiplicity_stacks(fuchsian):
    m = Multiloop([(word("a1"), 1.0)])
    twice = graft(graft(fuchsian, m), m)
    direct = graft(fuchsian, Multiloop([(word("a1"), 2.0)]))
    assert twice == direct
    ((_, weight),) = twice.lamination
    assert weight == 4.0 * math.pi


def test_graft_commutes_exactly(fuchsian):
    ma = Multiloop([(word("a1"), 1.0)])
    mb = Multiloop([(word("a2"), 2.0)])
    left = graft(graft(fuchsian, ma), mb)
    right = graft(graft(fuchsian, mb), ma)
    assert left == right
    joint = graft(fuchsian, Multiloop([(word("a1"), 1.0), (word("a2"), 2.0)]))
    assert joint == left


def test_graft_merges_conjugate_loop(fuchsian):
    c = graft(fuchsian, Multiloop([(word("a1"), 1.0)]))
    merged = graft(c, Multiloop([(word("b2 a1 b2'"), 1.0)]))
    ((w, weight),) = merged.lamination
    assert w.indices == word("a1").indices
    assert weight == 4.0 * math.pi


def test_graft_rejects_transversal_multiloop(fuchsian):
    c = graft(fuchsian, Multiloop([(word("a1"), 1.0)]))
    with pytest.raises(UnsupportedConfiguration):
        graft(c, Multiloop([(word("b1"), 1.0)]))


def test_graft_rejects_inadmissible(fuchsian):
    with pytest.raises(NotAdmissible, match="NonPrimitive"):
        graft(fuchsian, Multiloop([(word("a1 a1"), 1.0)]))
    with pytest.raises(NotAdmissible, match="CrossingDetected"):
        graft(fuchsian, Multiloop([(word("a1 b1 a1 b1'"), 1.0)]))


def test_graft_rejects_fractional_multiplicity(fuchsian):
    with pytest.raises(InvalidParams):
        graft(fuchsian, Multiloop([(word("a1"), 1.5)]))


def test_graft_preserves_holonomy_traces(fuchsian):
    c = graft(fuchsian, Multiloop([(word("a1"), 1.0), (word("a2"), 1.0)]))
    rows = holonomy_trace_report(fuchsian, c, [word(w) for w in PROBES])
    assert len(rows) == len(PROBES)
    assert max(r.defect for r in rows) < 1e-9


def test_graft_separating_loop_holonomy(fuchsian):
    # the separating commutator runs a lifted leaf through i, forcing
    # the fallback basepoint; traces must still match up to sign
    c = graft(fuchsian, Multiloop([(word("a1 b1 a1' b1'"), 1.0)]))
    rows = holonomy_trace_report(fuchsian, c, [word(w) for w in PROBES])
    assert max(r.defect for r in rows) < 1e-9


def test_grafted_holonomy_matrices_match_up_to_sign(fuchsian):
    c = graft(fuchsian, Multiloop([(word("a1"), 1.0)]))
    h0, h1 = fuchsian.holonomy(), c.holonomy()
    for name in ("a1", "b1", "a2", "b2"):
        gap = min(
            np.abs(h0[name].m - h1[name].m).max(),
            np.abs(h0[name].m + h1[name].m).max(),
        )
        assert gap < 1e-9


def test_structure_json_roundtrip(fuchsian):
    c = graft(fuchsian, Multiloop([(word("a1"), 1.0), (word("a2"), 1.0)]))
    back = ProjectiveStructureDesc.from_json(json.loads(json.dumps(c.to_json())))
    assert back == c


def test_thurston_cylinders_geometry(fuchsian, octagon):
    c = graft(fuchsian, Multiloop([(word("a1"), 1.0), (word("a2"), 2.0)]))
    cyls = thurston_cylinders(c)
    assert len(cyls) == 2
    for w, circumference, height in cyls:
        assert abs(circumference - word_length(octagon, w)) < 1e-12
        assert height in (2.0 * math.pi, 4.0 * math.pi)
    heights = {w.indices: h for w, _, h in cyls}
    assert heights[word("a1").indices] == 2.0 * math.pi
    assert heights[word("a2").indices] == 4.0 * math.pi


def test_crescent_angle_wraps():
    assert crescent_angle(2.0 * math.pi) == 0.0
    assert abs(crescent_angle(math.pi / 3) - math.pi / 3) < 1e-15
    assert abs(crescent_angle(5.0 * math.pi) - math.pi) < 1e-12
    with pytest.raises(InvalidParams):
        crescent_angle(-0.1)


# --- round cylinders ----------------------------------------------------------------


NESTED = (RoundCircle(0.3 + 0.2j, 1.0), RoundCircle(-0.1 + 0.5j, 4.0))
EXTERNAL = (RoundCircle(-3.0 + 0.0j, 1.0), RoundCircle(4.0 + 0.0j, 2.0))
CONCENTRIC = (RoundCircle(1.0 + 1.0j, 0.5), RoundCircle(1.0 + 1.0j, 2.0))


@pytest.mark.parametrize("pair", [NESTED, EXTERNAL, CONCENTRIC])
def test_cylinder_normalization_is_concentric(pair):
    cyl = round_cylinder(*pair)
    assert cyl.defect < 1e-9
    assert cyl.modulus > 0.0
    for circle, target in ((cyl.c_minus, 1.0), (cyl.c_plus, math.exp(cyl.modulus))):
        angles = 2.0 * math.pi * np.arange(12) / 12
        pts = circle.center + circle.radius * np.exp(1j * angles)
        radii = np.abs(apply_array(cyl.to_standard, pts))
        assert np.ptp(radii) < 1e-9
        assert abs(radii.mean() - target) < 1e-9


@pytest.mark.parametrize("pair", [NESTED, EXTERNAL, CONCENTRIC])
def test_cylinder_axis_maps_to_poles(pair):
    cyl = round_cylinder(*pair)
    p, q = cyl.orthogonal_geodesic.p, cyl.orthogonal_geodesic.q
    assert abs(cyl.to_standard.apply(p)) < 1e-9
    assert is_infinity(cyl.to_standard.apply(q))


def test_cylinder_rejects_overlapping_circles():
    assert not circles_disjoint(RoundCircle(0.0j, 1.0), RoundCircle(1.0 + 0.0j, 1.0))
    with pytest.raises(InvalidParams):
        round_cylinder(RoundCircle(0.0j, 1.0), RoundCircle(1.0 + 0.0j, 1.0))
    with pytest.raises(InvalidParams):
        round_cylinder(RoundCircle(0.0j, 1.0), RoundCircle(0.5 + 0.0j, 0.8))


def test_foliation_boundary_leaves():
    cyl = round_cylinder(*NESTED)
    for t, target in ((-1.0, cyl.c_minus), (1.0, cyl.c_plus)):
        leaf = foliation_leaf(cyl, t)
        assert abs(leaf.center - target.center) < 1e-9
        assert abs(leaf.radius - target.radius) < 1e-9
    with pytest.raises(ParameterOutOfRange):
        foliation_leaf(cyl, 1.0001)


def test_foliation_leaves_nested_and_disjoint():
    cyl = round_cylinder(*NESTED)
    leaves = [foliation_leaf(cyl, t) for t in np.linspace(-1.0, 1.0, 9)]
    for inner, outer in zip(leaves, leaves[1:]):
        assert circles_disjoint(inner, outer)
        assert abs(outer.center - inner.center) < outer.radius - inner.radius


def test_circle_json_roundtrip():
    c = RoundCircle(0.25 - 1.5j, 2.25)
    assert RoundCircle.from_json(json.loads(json.dumps(c.to_json()))) == c
    line = RoundCircle(point=1.0 + 0.0j, direction=1j)
    assert RoundCircle.from_json(json.loads(json.dumps(line.to_json()))) == line


def test_external_cylinder_has_line_leaf():
    # between externally disjoint circles the leaf through the image of
    # infinity must come back as the line variant, its neighbours as
    # circles
    cyl = round_cylinder(*EXTERNAL)
    r_pole = abs(cyl.to_standard.apply(INFTY))
    assert 1.0 < r_pole < math.exp(cyl.modulus)
    t_star = 2.0 * math.log(r_pole) / cyl.modulus - 1.0
    assert foliation_leaf(cyl, t_star).is_line
    assert not foliation_leaf(cyl, t_star + 0.01).is_line
    assert not foliation_leaf(cyl, t_star - 0.01).is_line


# --- supported quadrangles ----------------------------------------------------------


@pytest.fixture(scope="module")
def cylinder():
    return round_cylinder(*NESTED)


def test_full_turn_equator(cylinder):
    q = sector_quadrangle(cylinder, width=2.0 * math.pi)
    for t in (-1.0, -0.3, 0.0, 0.8, 1.0):
        assert abs(equator_arc_length(q, t) - 2.0 * math.pi) < 1e-9


def test_half_turn_equator_with_twist(cylinder):
    q = sector_quadrangle(cylinder, phi0=0.4, width=math.pi, twist=1.7)
    for t in (-1.0, 0.2, 1.0):
        assert abs(equator_arc_length(q, t) - math.pi) < 1e-9
    with pytest.raises(ParameterOutOfRange):
        equator_arc_length(q, -1.2)


def test_insert_turns_adds_full_circles(cylinder):
    q = sector_quadrangle(cylinder, width=1.1)
    for k in (1, 2, 5):
        grafted = insert_turns(q, k)
        assert np.array_equal(grafted.e2, q.e2)
        for t in (-1.0, 0.0, 0.7):
            assert abs(
                equator_arc_length(grafted, t)
                - equator_arc_length(q, t)
                - 2.0 * math.pi * k
            ) < 1e-9


def test_compare_quadrangles_integer_grid(cylinder):
    q = sector_quadrangle(cylinder, phi0=0.3, width=1.1)
    for d in range(6):
        assert compare_quadrangles(q, insert_turns(q, d)) == d
        assert compare_quadrangles(insert_turns(q, d), q) == -d
    two = insert_turns(q, 2)
    assert compare_quadrangles(two, insert_turns(two, 1)) == 1


def test_compare_quadrangles_support_mismatch(cylinder):
    q = sector_quadrangle(cylinder, phi0=0.3, width=1.1)
    other = round_cylinder(*EXTERNAL)
    with pytest.raises(SupportMismatch):
        compare_quadrangles(q, sector_quadrangle(other, width=1.1))
    with pytest.raises(SupportMismatch):
        compare_quadrangles(q, sector_quadrangle(cylinder, phi0=0.9, width=1.1))


def test_compare_quadrangles_non_integral(cylinder):
    q = sector_quadrangle(cylinder, phi0=0.3, width=1.1)
    with pytest.raises(NonIntegralResidual):
        compare_quadrangles(q, sector_quadrangle(cylinder, phi0=0.3, width=1.6))


def test_quadrangle_validates_winding_lift(cylinder):
    q = sector_quadrangle(cylinder, width=1.1)
    with pytest.raises(InvalidParams):
        SupportedQuadrangle(cylinder, q.e2, q.e4, q.winding_lift + 0.5)
    # a full-turn shift is consistent by design
    SupportedQuadrangle(cylinder, q.e2, q.e4, q.winding_lift + 2.0 * math.pi)


def test_quadrangle_validates_edges(cylinder):
    q = sector_quadrangle(cylinder, width=1.1)
    with pytest.raises(InvalidParams):
        SupportedQuadrangle(cylinder, q.e2[:32], q.e4[:32], 1.1)
    with pytest.raises(InvalidParams):
        # edge stops short of the top circle
        SupportedQuadrangle(cylinder, q.e2[:-8], q.e4, 1.1)
    h = cylinder.modulus
    s = np.concatenate([
        np.linspace(0.0, 0.7 * h, 48),
        np.linspace(0.55 * h, h, 48),  # backtracks across leaves
    ])
    back = cylinder.to_standard.inv()
    bad = apply_array(back, np.exp(s + 0.2j))
    with pytest.raises(InvalidParams):
        SupportedQuadrangle(cylinder, bad, q.e4, 0.2)
