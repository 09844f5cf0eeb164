"""Bending maps: matrix oracles, cocycle identities, and the
bilipschitz reports on bent geodesics."""

import math

import numpy as np
import pytest

from graftlab.bending import (
    BendingMap,
    BentPolyline,
    bend_geodesic,
    bend_point,
    bent_holonomy,
    bilipschitz_report,
    equivariance_defect,
)
from graftlab.errors import (
    InsufficientDepth,
    InvalidParams,
    PointOnLeaf,
    TooFewSamples,
)
from graftlab.hyperbolic import (
    PointH2,
    dist_h2,
    dist_h3,
    h3_to_h2,
    project_to_geodesic,
)
from graftlab.lamination import FiniteMeasuredLamination, Multiloop, lift_multiloop
from graftlab.mobius import INFTY, Geodesic, MoebiusTransform, PointH3, standardize
from graftlab.surface import GroupWord, build_octagon, _axis_key


def embed(x: PointH2) -> PointH3:
    return PointH3(complex(x.x), x.y)


def halfspace_apply_oracle(m, z, t):
    # textbook Poincare-extension formulas, independent of apply_h3
    a, b, c, d = m[0][0], m[0][1], m[1][0], m[1][1]
    den = abs(c * z + d) ** 2 + abs(c) ** 2 * t * t
    zz = ((a * z + b) * np.conj(c * z + d) + a * np.conj(c) * t * t) / den
    tt = abs(a * d - b * c) * t / den
    return complex(zz), float(tt)


def vertical_axis_rotation(angle):
    return [[np.exp(1j * angle / 2), 0.0], [0.0, np.exp(-1j * angle / 2)]]


NESTED = FiniteMeasuredLamination(
    [
        (Geodesic(-1.0, 1.0), 0.5),
        (Geodesic(-2.0, 2.0), 0.7),
        (Geodesic(-3.0, 3.0), 1.1),
    ]
)
OUTSIDE = PointH2(4.0, 1.0)  # beyond all three semicircles


def test_single_leaf_matrix_oracle():
    # leaf = vertical axis; the basepoint sits left of it, so crossing
    # rotates by +weight about the axis: z -> exp(i w) z on the sheet
    lam = FiniteMeasuredLamination([(Geodesic(0.0, INFTY), math.pi / 2)])
    b = BendingMap(lam, basepoint=PointH2(-1.0, 1.0))
    for x in (PointH2(1.0, 1.0), PointH2(0.5, 0.3), PointH2(2.0, 2.5)):
        got = bend_point(b, x)
        z, t = halfspace_apply_oracle(
            vertical_axis_rotation(math.pi / 2), complex(x.x), x.y
        )
        assert dist_h3(got, PointH3(z, t)) < 1e-12


def test_handedness_flips_rotation():
    lam = FiniteMeasuredLamination([(Geodesic(0.0, INFTY), math.pi / 2)])
    b = BendingMap(lam, basepoint=PointH2(-1.0, 1.0), handedness=-1)
    got = bend_point(b, PointH2(1.0, 1.0))
    z, t = halfspace_apply_oracle(vertical_axis_rotation(-math.pi / 2), 1 + 0j, 1.0)
    assert dist_h3(got, PointH3(z, t)) < 1e-12
    with pytest.raises(InvalidParams):
        BendingMap(lam, handedness=0)


def test_points_on_basepoint_side_unmoved():
    lam = FiniteMeasuredLamination([(Geodesic(0.0, INFTY), math.pi / 2)])
    b = BendingMap(lam, basepoint=PointH2(-1.0, 1.0))
    x = PointH2(-0.5, 0.7)
    assert dist_h3(bend_point(b, x), embed(x)) < 1e-15


def test_composition_follows_crossing_order():
    b = BendingMap(NESTED, basepoint=OUTSIDE)
    x = PointH2(0.0, 0.5)  # innermost region: crosses (-3,3), (-2,2), (-1,1)
    leaves = [leaf for leaf, _ in NESTED.leaves]
    by_radius = sorted(leaves, key=lambda g: -abs(g.q))
    r = MoebiusTransform.identity()
    for leaf in by_radius:
        r = r * b._rotations[_axis_key(leaf)]
    expected = r.apply_h3(embed(x))
    assert dist_h3(bend_point(b, x), expected) < 1e-12
    # reversed order lands elsewhere, so the order genuinely matters
    r_rev = MoebiusTransform.identity()
    for leaf in reversed(by_radius):
        r_rev = r_rev * b._rotations[_axis_key(leaf)]
    assert dist_h3(r_rev.apply_h3(embed(x)), expected) > 1e-3


def test_path_independence_through_intermediate_basepoint():
    # beta_b(x) = R_b(m) . beta_m(x) for any midpoint m off the leaves
    b = BendingMap(NESTED, basepoint=OUTSIDE)
    for m in (PointH2(0.0, 2.5), PointH2(0.3, 1.4), PointH2(-1.2, 0.9)):
        bm = BendingMap(NESTED, basepoint=m)
        carry = b.rotation_along(m)
        for x in (PointH2(0.0, 0.5), PointH2(1.5, 0.2), PointH2(-2.6, 0.4),
                  PointH2(5.0, 2.0)):
            lhs = bend_point(b, x)
            rhs = carry.apply_h3(bend_point(bm, x))
            assert dist_h3(lhs, rhs) < 1e-9


def test_empty_lamination_is_plain_embedding():
    lam = FiniteMeasuredLamination([])
    b = BendingMap(lam)
    for x in (PointH2(0.0, 1.0), PointH2(-3.0, 0.1), PointH2(7.0, 4.0)):
        got = bend_point(b, x)
        assert got.z == complex(x.x) and got.t == x.y
    poly = bend_geodesic(b, Geodesic(-1.0, 1.0), span=2.0, steps=50)
    rep = bilipschitz_report(poly)
    assert abs(rep.max_ratio - 1.0) < 1e-9
    assert rep.max_tangent_angle < 1e-7
    assert rep.max_dist_to_axis < 1e-9
    assert abs(rep.projected_ratio - 1.0) < 1e-9


def test_empty_lamination_holonomy_is_fuchsian():
    s = build_octagon()
    h = bent_holonomy(BendingMap(FiniteMeasuredLamination([])), s, samples=30)
    assert h.defect < 1e-12
    for img, orig in zip(h.images, s.generators):
        assert np.allclose(img.m, orig.m) or np.allclose(img.m, -orig.m)


def test_full_turn_weights_are_invisible():
    lam = FiniteMeasuredLamination(
        [(leaf, 2.0 * math.pi) for leaf, _ in NESTED.leaves]
    )
    b = BendingMap(lam, basepoint=OUTSIDE)
    for x in (PointH2(0.0, 0.5), PointH2(1.5, 0.2), PointH2(-2.6, 0.4)):
        assert dist_h3(bend_point(b, x), embed(x)) < 1e-12


def test_adding_full_turn_to_one_leaf_changes_nothing():
    bumped = FiniteMeasuredLamination(
        [
            (leaf, w + (2.0 * math.pi if abs(leaf.q - 2.0) < 1e-12 else 0.0))
            for leaf, w in NESTED.leaves
        ]
    )
    b0 = BendingMap(NESTED, basepoint=OUTSIDE)
    b1 = BendingMap(bumped, basepoint=OUTSIDE)
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 100:
        x = PointH2(rng.uniform(-4.0, 6.0), rng.uniform(0.05, 3.0))
        try:
            d = dist_h3(bend_point(b0, x), bend_point(b1, x))
        except PointOnLeaf:
            continue
        assert d < 1e-10
        checked += 1


def test_one_lipschitz():
    b = BendingMap(NESTED, basepoint=OUTSIDE)
    rng = np.random.default_rng(5)
    pts = []
    while len(pts) < 30:
        x = PointH2(rng.uniform(-4.0, 6.0), rng.uniform(0.05, 3.0))
        try:
            pts.append((x, bend_point(b, x)))
        except PointOnLeaf:
            continue
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d2 = dist_h2(pts[i][0], pts[j][0])
            d3 = dist_h3(pts[i][1], pts[j][1])
            assert d3 <= d2 + 1e-9


def test_isometry_onto_plane_per_component():
    # the region between (-2,2) and (-1,1) maps by a single rotation:
    # distances survive and images lie on one hemisphere
    b = BendingMap(NESTED, basepoint=OUTSIDE)
    region = [PointH2(0.0, 1.5), PointH2(0.3, 1.4), PointH2(-0.5, 1.3),
              PointH2(0.2, 1.6), PointH2(-0.9, 1.1), PointH2(0.7, 1.2)]
    imgs = [bend_point(b, x) for x in region]
    for i in range(len(region)):
        for j in range(i + 1, len(region)):
            d2 = dist_h2(region[i], region[j])
            d3 = dist_h3(imgs[i], imgs[j])
            assert abs(d3 - d2) < 1e-9
    # hemisphere fit: |z - c|^2 + t^2 = R^2 with c on the boundary plane
    a = np.array([[2 * p.z.real, 2 * p.z.imag, 1.0] for p in imgs])
    rhs = np.array([abs(p.z) ** 2 + p.t**2 for p in imgs])
    sol, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    assert np.max(np.abs(a @ sol - rhs)) < 1e-9


def test_bend_geodesic_matches_pointwise_values():
    b = BendingMap(NESTED, basepoint=OUTSIDE)
    line = Geodesic(0.0, INFTY)
    span, steps = 3.0, 60
    poly = bend_geodesic(b, line, span=span, steps=steps)
    s_map = standardize(line.p, line.q)
    foot = s_map.apply_h3(project_to_geodesic(embed(b.basepoint), line))
    back = s_map.inv()
    for s, data in zip(poly.params, poly.crossings):
        if data is not None:
            continue
        x = h3_to_h2(back.apply_h3(PointH3(0j, foot.t * math.exp(s))))
        k = poly.params.index(s)
        assert dist_h3(poly.points[k], bend_point(b, x)) < 1e-12


def test_bend_geodesic_records_crossings():
    b = BendingMap(NESTED, basepoint=OUTSIDE)
    poly = bend_geodesic(b, Geodesic(0.0, INFTY), span=3.0, steps=60)
    marks = [c for c in poly.crossings if c is not None]
    assert len(marks) == 3
    weights = sorted(m["weight"] for m in marks)
    assert weights == [0.5, 0.7, 1.1]
    for m in marks:
        assert abs(m["angle"] - math.pi / 2) < 1e-9  # symmetric semicircles
        leaf, w = b.lamination.leaves[m["leafIndex"]]
        assert m["weight"] == w
    # consecutive bent samples never exceed their source arclength gap
    for k in range(len(poly.points) - 1):
        gap = poly.params[k + 1] - poly.params[k]
        d = dist_h3(poly.points[k], poly.points[k + 1])
        assert d <= gap + 1e-9


def test_bend_geodesic_rejects_bad_params():
    b = BendingMap(NESTED, basepoint=OUTSIDE)
    with pytest.raises(InvalidParams):
        bend_geodesic(b, Geodesic(0.0, INFTY), span=2.0, steps=1)
    with pytest.raises(InvalidParams):
        bend_geodesic(b, Geodesic(0.0, INFTY), span=0.0, steps=10)
    with pytest.raises(InvalidParams):
        bend_geodesic(b, Geodesic(-1.0, 1.0), span=2.0, steps=10)


def test_fold_chord_matches_law_of_cosines():
    # weight-3 bend at a right-angle crossing: arms meet at pi - 3
    lam = FiniteMeasuredLamination([(Geodesic(0.0, INFTY), 3.0)])
    b = BendingMap(lam, basepoint=PointH2(-1.0, 1.0))
    line = Geodesic(-1.0, 1.0)
    back = standardize(line.p, line.q).inv()

    def at(s):
        return h3_to_h2(back.apply_h3(PointH3(0j, math.exp(s))))

    theta = math.pi - 3.0
    for h in (0.01, 0.1, 0.5):
        chord = dist_h3(bend_point(b, at(-h)), bend_point(b, at(h)))
        oracle = math.acosh(
            math.cosh(h) ** 2 - math.sinh(h) ** 2 * math.cos(theta)
        )
        assert abs(chord - oracle) < 1e-9
    # ratio near the fold approaches 1/sin(theta/2)
    chord = dist_h3(bend_point(b, at(-0.01)), bend_point(b, at(0.01)))
    assert abs(0.02 / chord - 1.0 / math.sin(theta / 2)) < 0.01 / math.sin(theta / 2)


def test_fold_breaks_bilipschitz():
    lam = FiniteMeasuredLamination([(Geodesic(0.0, INFTY), 3.0)])
    b = BendingMap(lam, basepoint=PointH2(-1.0, 1.0))
    poly = bend_geodesic(b, Geodesic(-1.0, 1.0), span=2.5, steps=192)
    rep = bilipschitz_report(poly)
    assert rep.max_ratio > 10.0
    assert rep.max_ratio < 1.0 / math.sin((math.pi - 3.0) / 2) + 1e-6


def small_angle_lamination(theta, mass=2.0 * math.pi):
    # nested leaves crossing the vertical axis at the same angle theta,
    # feet at heights exp(s): endpoints -h tan(theta/2), h cot(theta/2)
    t = math.tan(theta / 2.0)
    leaves = [
        (Geodesic(-math.exp(s) * t, math.exp(s) / t), mass / 8.0)
        for s in (-6.3, -4.5, -2.7, -0.9, 0.9, 2.7, 4.5, 6.3)
    ]
    return FiniteMeasuredLamination(leaves)


def test_small_angle_crossing_stays_bilipschitz():
    b = BendingMap(small_angle_lamination(0.01), basepoint=PointH2(0.0, 1.0))
    poly = bend_geodesic(b, Geodesic(0.0, INFTY), span=10.0, steps=200)
    assert sum(c is not None for c in poly.crossings) == 8
    rep = bilipschitz_report(poly)
    assert rep.max_ratio <= 1.05
    assert rep.projected_ratio <= 1.05


def test_tangent_angle_decreases_with_crossing_angle():
    prev = None
    for theta in (0.1, 0.05, 0.01):
        b = BendingMap(small_angle_lamination(theta), basepoint=PointH2(0.0, 1.0))
        poly = bend_geodesic(b, Geodesic(0.0, INFTY), span=10.0, steps=200)
        rep = bilipschitz_report(poly)
        if prev is not None:
            assert rep.max_tangent_angle < prev
        prev = rep.max_tangent_angle


def test_equivariance_defect_decreases_with_depth():
    s = build_octagon()
    ml = Multiloop([(GroupWord.from_string("a1"), 1.3)])
    defects = []
    for depth in (2, 3, 4):
        b = BendingMap(lift_multiloop(s, ml, depth))
        defects.append(equivariance_defect(b, s, samples=300, seed=7))
    assert defects[0] > defects[1] > defects[2]
    assert defects[2] < 1e-6


def test_bent_holonomy_depth_gate():
    s = build_octagon()
    ml = Multiloop([(GroupWord.from_string("a1"), 1.3)])
    with pytest.raises(InsufficientDepth):
        bent_holonomy(BendingMap(lift_multiloop(s, ml, 2)), s, samples=200)
    h = bent_holonomy(BendingMap(lift_multiloop(s, ml, 3)), s, samples=200)
    assert h.defect < 1e-6


def test_bent_loop_keeps_its_own_trace():
    s = build_octagon()
    ml = Multiloop([(GroupWord.from_string("a1"), 1.3)])
    h = bent_holonomy(BendingMap(lift_multiloop(s, ml, 3)), s, samples=200)
    w = GroupWord.from_string("a1")
    tr_bent = np.trace(h.evaluate(w).m)
    tr_orig = np.trace(s.evaluate(w).m)
    assert abs(abs(tr_bent) - abs(tr_orig)) < 1e-9
    # transverse loops do move: b1 picks up a genuinely complex trace
    tr_b1 = np.trace(h.evaluate(GroupWord.from_string("b1")).m)
    assert abs(tr_b1.imag) > 0.1


def test_bent_holonomy_lookup():
    s = build_octagon()
    h = bent_holonomy(BendingMap(FiniteMeasuredLamination([])), s, samples=20)
    assert h["a1"] is h.images[0]
    prod = h.evaluate(GroupWord.from_string("a1 b1"))
    assert np.allclose(prod.m, (h["a1"] * h["b1"]).m)


def test_rotation_along_strictness():
    lam = FiniteMeasuredLamination([(Geodesic(0.0, INFTY), 0.9)])
    b = BendingMap(lam, basepoint=PointH2(-1.0, 1.0))
    on_leaf = PointH2(0.0, 2.0)
    with pytest.raises(PointOnLeaf):
        b.rotation_along(on_leaf)
    with pytest.raises(PointOnLeaf):
        bend_point(b, on_leaf)
    # the relaxed value is the limit from the basepoint side: no crossing
    r = b.rotation_along(on_leaf, strict=False)
    assert np.allclose(r.m, np.eye(2))


def test_basepoint_on_leaf_rejected():
    with pytest.raises(PointOnLeaf):
        BendingMap(NESTED, basepoint=PointH2(0.0, 2.0))


def test_polyline_roundtrip_and_validation():
    b = BendingMap(NESTED, basepoint=OUTSIDE)
    poly = bend_geodesic(b, Geodesic(0.0, INFTY), span=2.0, steps=16)
    back = BentPolyline.from_json(poly.to_json())
    assert back.params == poly.params
    assert back.crossings == poly.crossings
    assert all(
        dist_h3(p, q) < 1e-15 for p, q in zip(back.points, poly.points)
    )
    csv = poly.to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == "x,y,t"
    assert len(lines) == len(poly.points) + 1
    with pytest.raises(InvalidParams):
        BentPolyline(poly.points, poly.params, poly.crossings[:-1], poly.step_bound)
    with pytest.raises(InvalidParams):
        BentPolyline(poly.points, poly.params, poly.crossings, 1e-6)


def test_report_needs_three_samples():
    p = PointH3(0j, 1.0)
    q = PointH3(0.5 + 0j, 1.0)
    with pytest.raises(TooFewSamples):
        bilipschitz_report(BentPolyline((p, q), (0.0, 1.0), (None, None), 2.0))
