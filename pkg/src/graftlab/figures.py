"""Figure recipes and their two output formats.

Figures are built from a restricted primitive set (rect, circle,
polyline, polygon) serialized as SVG; the PNG is produced by rasterizing
that same SVG text at 2x scale (1024 px minimum dimension) with a small
renderer on top of Pillow, so both files come from one source of truth.
"""

import math
import os
import xml.etree.ElementTree as ET

import numpy as np
from PIL import Image, ImageDraw

from .errors import UnknownRecipe
from .mobius import Geodesic, INFTY, MoebiusTransform, is_infinity
from .hyperbolic import PointH2
from .lamination import FiniteMeasuredLamination
from .bending import BendingMap, bend_geodesic
from .grafting import RoundCircle, foliation_leaf, hopf_torus, round_cylinder
from .surface import word
from .traintrack import build_annular_track

RECIPES = ("bent-geodesic", "hopf-development", "cylinder-foliation",
           "traintrack-embedding")

BACKGROUND = "#ffffff"
INK = "#1a1a2e"
ACCENT = "#c0392b"
SOFT = "#2980b9"
SHADE = "#f1c40f"


def _fmt(x: float) -> str:
    return f"{x:.4f}".rstrip("0").rstrip(".")


class Canvas:
    """Collects primitives in world coordinates and serializes them as
    SVG in pixel coordinates (y flipped)."""

    def __init__(self, width: int, height: int, world, margin: float = 0.05):
        self.width = int(width)
        self.height = int(height)
        x0, y0, x1, y1 = world
        # a degenerate range (straight-line content) still needs a window
        fallback = max(x1 - x0, y1 - y0, 1e-6)
        if x1 - x0 < 1e-12 * fallback:
            x0, x1 = x0 - fallback / 2.0, x1 + fallback / 2.0
        if y1 - y0 < 1e-12 * fallback:
            y0, y1 = y0 - fallback / 2.0, y1 + fallback / 2.0
        pad_x = (x1 - x0) * margin
        pad_y = (y1 - y0) * margin
        self._x0, self._x1 = x0 - pad_x, x1 + pad_x
        self._y0, self._y1 = y0 - pad_y, y1 + pad_y
        self._sx = self.width / (self._x1 - self._x0)
        self._sy = self.height / (self._y1 - self._y0)
        self.shapes = [
            ("rect", {"x": "0", "y": "0", "width": str(self.width),
                      "height": str(self.height), "fill": BACKGROUND}),
        ]

    def to_px(self, x: float, y: float):
        return ((x - self._x0) * self._sx,
                self.height - (y - self._y0) * self._sy)

    def _stroke_attrs(self, stroke, width, opacity):
        attrs = {"fill": "none", "stroke": stroke,
                 "stroke-width": _fmt(width)}
        if opacity < 1.0:
            attrs["stroke-opacity"] = _fmt(opacity)
        return attrs

    def polyline(self, pts, stroke=INK, width=1.5, opacity=1.0):
        pix = " ".join(
            f"{_fmt(px)},{_fmt(py)}"
            for px, py in (self.to_px(x, y) for x, y in pts)
        )
        attrs = self._stroke_attrs(stroke, width, opacity)
        attrs["points"] = pix
        self.shapes.append(("polyline", attrs))

    def polygon(self, pts, fill=SHADE, opacity=0.5):
        pix = " ".join(
            f"{_fmt(px)},{_fmt(py)}"
            for px, py in (self.to_px(x, y) for x, y in pts)
        )
        self.shapes.append(("polygon", {
            "points": pix, "fill": fill, "fill-opacity": _fmt(opacity),
            "stroke": "none",
        }))

    def circle(self, center, r, stroke=INK, width=1.5, fill="none",
               opacity=1.0):
        cx, cy = self.to_px(center[0], center[1])
        attrs = {"cx": _fmt(cx), "cy": _fmt(cy), "r": _fmt(r * self._sx),
                 "stroke": stroke, "stroke-width": _fmt(width), "fill": fill}
        if opacity < 1.0:
            attrs["stroke-opacity" if fill == "none" else "fill-opacity"] = \
                _fmt(opacity)
        self.shapes.append(("circle", attrs))

    def dot(self, center, r_px=4.0, fill=ACCENT):
        cx, cy = self.to_px(center[0], center[1])
        self.shapes.append(("circle", {
            "cx": _fmt(cx), "cy": _fmt(cy), "r": _fmt(r_px),
            "fill": fill, "stroke": "none",
        }))

    def to_svg(self) -> str:
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">'
        ]
        for tag, attrs in self.shapes:
            body = " ".join(f'{k}="{v}"' for k, v in attrs.items())
            parts.append(f"  <{tag} {body}/>")
        parts.append("</svg>")
        return "\n".join(parts) + "\n"


# --- rasterizer ----------------------------------------------------------------------

def _color(spec: str, opacity: float = 1.0):
    if spec == "none":
        return None
    r, g, b = (int(spec[i:i + 2], 16) for i in (1, 3, 5))
    return (r, g, b, max(0, min(255, round(255 * opacity))))


def _points_attr(text: str, scale: float):
    out = []
    for pair in text.split():
        x, y = pair.split(",")
        out.append((float(x) * scale, float(y) * scale))
    return out


def rasterize_svg(svg_text: str, scale: float = 2.0,
                  min_dim: int = 1024) -> Image.Image:
    """Render the restricted-subset SVG used by this module."""
    root = ET.fromstring(svg_text)
    w, h = float(root.get("width")), float(root.get("height"))
    scale = max(scale, min_dim / min(w, h))
    img = Image.new("RGB", (round(w * scale), round(h * scale)), BACKGROUND)
    draw = ImageDraw.Draw(img, "RGBA")
    for el in root:
        tag = el.tag.split("}")[-1]
        get = el.get
        stroke = _color(get("stroke", "none"),
                        float(get("stroke-opacity", "1")))
        fill = _color(get("fill", "none"), float(get("fill-opacity", "1")))
        sw = max(1, round(float(get("stroke-width", "1")) * scale))
        if tag == "rect":
            x, y = float(get("x")) * scale, float(get("y")) * scale
            x2 = x + float(get("width")) * scale
            y2 = y + float(get("height")) * scale
            draw.rectangle([x, y, x2, y2], fill=fill, outline=stroke)
        elif tag == "circle":
            cx, cy = float(get("cx")) * scale, float(get("cy")) * scale
            r = float(get("r")) * scale
            box = [cx - r, cy - r, cx + r, cy + r]
            draw.ellipse(box, fill=fill, outline=stroke,
                         width=sw if stroke else 0)
        elif tag == "polyline":
            draw.line(_points_attr(get("points"), scale), fill=stroke,
                      width=sw, joint="curve")
        elif tag == "polygon":
            draw.polygon(_points_attr(get("points"), scale), fill=fill,
                         outline=stroke)
        else:
            raise UnknownRecipe(f"rasterizer does not handle <{tag}>")
    return img


# --- recipes -------------------------------------------------------------------------

def _circle_points(circle, n=256):
    th = np.linspace(0.0, 2.0 * math.pi, n)
    zs = circle.center + circle.radius * np.exp(1j * th)
    return [(z.real, z.imag) for z in zs]


def polyline_side_view(poly, source: Geodesic = None) -> Canvas:
    """Side view (x, height) of a bent polyline, with crossing markers
    and, when the source geodesic has finite endpoints, its unbent trace
    for contrast."""
    xs = [p.z.real for p in poly.points]
    ts = [p.t for p in poly.points]
    c = Canvas(720, 560, (min(xs), 0.0, max(xs), max(ts) * 1.1))
    if source is not None and not (is_infinity(source.p)
                                   or is_infinity(source.q)):
        th = np.linspace(0.0, math.pi, 128)
        mid = (source.p.real + source.q.real) / 2.0
        rad = abs(source.q.real - source.p.real) / 2.0
        c.polyline(list(zip(mid + rad * np.cos(th), rad * np.sin(th))),
                   stroke=INK, width=1.0, opacity=0.35)
    c.polyline(list(zip(xs, ts)), stroke=ACCENT, width=2.5)
    for p, crossing in zip(poly.points, poly.crossings):
        if crossing is not None:
            c.dot((p.z.real, p.t))
    return c


def _figure_bent_geodesic():
    # the fold counterexample: one leaf, weight 3, crossed head-on
    lam = FiniteMeasuredLamination([(Geodesic(0.0, INFTY), 3.0)])
    b = BendingMap(lam, basepoint=PointH2(-1.0, 1.0))
    source = Geodesic(-1.0, 1.0)
    poly = bend_geodesic(b, source, span=2.5, steps=192)
    return polyline_side_view(poly, source)


def _figure_hopf_development():
    torus = hopf_torus(MoebiusTransform(2.0, 0.0, 0.0, 0.5))
    r_out = math.exp(torus.modulus.real)
    c = Canvas(640, 640, (-1.1 * r_out, -1.1 * r_out, 1.1 * r_out, 1.1 * r_out))
    # developed annulus between |z| = 1 and |z| = exp(translation length)
    for k in range(1, 8):
        r = math.exp(torus.modulus.real * k / 8.0)
        c.circle((0.0, 0.0), r, stroke=SOFT, width=1.0, opacity=0.8)
    for k in range(12):
        a = 2.0 * math.pi * (k + torus.modulus.imag) / 12.0
        c.polyline([(math.cos(a), math.sin(a)),
                    (r_out * math.cos(a), r_out * math.sin(a))],
                   stroke=INK, width=0.8, opacity=0.5)
    c.circle((0.0, 0.0), 1.0, stroke=INK, width=2.5)
    c.circle((0.0, 0.0), r_out, stroke=INK, width=2.5)
    return c


def _figure_cylinder_foliation():
    c1 = round_cylinder(RoundCircle(0.3 + 0.2j, 1.0),
                        RoundCircle(-0.1 + 0.5j, 4.0))
    outer = c1.c_plus
    r = 1.15 * outer.radius
    c = Canvas(640, 640, (outer.center.real - r, outer.center.imag - r,
                          outer.center.real + r, outer.center.imag + r))
    # inserted-annulus shading: a dense translucent bundle of leaves
    for t in np.linspace(0.15, 0.45, 30):
        leaf = foliation_leaf(c1, float(t))
        c.polyline(_circle_points(leaf), stroke=SHADE, width=6.0, opacity=0.12)
    for t in np.linspace(-0.9, 0.9, 13):
        leaf = foliation_leaf(c1, float(t))
        c.polyline(_circle_points(leaf), stroke=SOFT, width=1.0, opacity=0.9)
    c.polyline(_circle_points(c1.c_minus), stroke=INK, width=2.5)
    c.polyline(_circle_points(c1.c_plus), stroke=INK, width=2.5)
    return c


def track_figure(track, axes=()) -> Canvas:
    """Embedded track: rails in red, outermost ties in blue, optional
    carrier geodesics as a faint backdrop."""
    pts = [
        (p.x, p.y)
        for emb in track.embedding
        for curve in (emb.rail_low, emb.rail_high)
        for p in curve
    ]
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    c = Canvas(720, 560, (min(xs), min(ys) * 0.9, max(xs), max(ys) * 1.1))
    for axis in axes:
        if is_infinity(axis.p) or is_infinity(axis.q):
            continue
        th = np.linspace(0.0, math.pi, 192)
        center = (axis.p.real + axis.q.real) / 2.0
        radius = abs(axis.q.real - axis.p.real) / 2.0
        c.polyline(
            list(zip(center + radius * np.cos(th), radius * np.sin(th))),
            stroke=INK, width=1.0, opacity=0.3,
        )
    for emb in track.embedding:
        for rail in (emb.rail_low, emb.rail_high):
            c.polyline([(p.x, p.y) for p in rail], stroke=ACCENT, width=2.2)
        for tie in (emb.tie_start, emb.tie_end):
            c.polyline([(p.x, p.y) for p in tie], stroke=SOFT, width=2.2)
    return c


def _figure_traintrack_embedding():
    from .verify import catalog_surface

    surface = catalog_surface()
    track = build_annular_track(surface, word("a1"), samples=65)
    return track_figure(track, axes=[surface.evaluate(word("a1")).axis()])


_BUILDERS = {
    "bent-geodesic": _figure_bent_geodesic,
    "hopf-development": _figure_hopf_development,
    "cylinder-foliation": _figure_cylinder_foliation,
    "traintrack-embedding": _figure_traintrack_embedding,
}


def run_figure(cfg) -> list:
    """Write <recipe>.svg and <recipe>.png for the recipe named by
    cfg.command into cfg.out_dir; returns the written paths."""
    recipe = cfg.command
    if recipe not in _BUILDERS:
        raise UnknownRecipe(
            f"unknown recipe {recipe!r}; known: {', '.join(RECIPES)}"
        )
    out_dir = cfg.out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    svg_text = _BUILDERS[recipe]().to_svg()
    svg_path = os.path.join(out_dir, f"{recipe}.svg")
    png_path = os.path.join(out_dir, f"{recipe}.png")
    with open(svg_path, "w") as fh:
        fh.write(svg_text)
    rasterize_svg(svg_text).save(png_path)
    return [svg_path, png_path]
