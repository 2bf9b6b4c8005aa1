"""Static SVG views of the matrix reports and the ECDF comparisons.

Correlation matrices use slanted ellipse glyphs (blue right-slanted for
positive, red left-slanted for negative, darker and thinner the stronger
the correlation).  SIP matrices use disks with area proportional to the
value over a blue-white-red scale centered on 0.5.  Rank probability
matrices are plain sequential heatmaps.  Everything is hand-built SVG
1.1; no plotting library is involved.
"""

import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RenderSpec",
    "render_matrix",
    "render_delta_ecdf",
    "render_abs_ecdf",
]

CORR_ELLIPSE = "corr_ellipse"
SIP_DISK = "sip_disk"
RANK_HEATMAP = "rank_heatmap"
DELTA_ECDF = "delta_ecdf"
ABS_ECDF = "abs_ecdf"

_MATRIX_KINDS = (CORR_ELLIPSE, SIP_DISK, RANK_HEATMAP)

_BLUE = (5, 113, 176)
_RED = (202, 0, 32)
_DARK = (8, 48, 107)
_WHITE = (255, 255, 255)


@dataclass(frozen=True)
class RenderSpec:
    kind: str
    size_px: int = 600

    def __post_init__(self):
        if self.kind not in _MATRIX_KINDS + (DELTA_ECDF, ABS_ECDF):
            raise ValueError(f"unknown render kind {self.kind!r}")
        if self.size_px < 200:
            raise ValueError("size must be at least 200 px")


def _mix(c0, c1, t):
    t = min(1.0, max(0.0, t))
    return "#%02x%02x%02x" % tuple(round(a + (b - a) * t) for a, b in zip(c0, c1))


def _corr_color(v):
    return _mix(_WHITE, _BLUE if v >= 0 else _RED, abs(v))


def _sip_color(v):
    # Diverging blue (0) -> white (0.5) -> red (1).
    if v <= 0.5:
        return _mix(_BLUE, _WHITE, v / 0.5)
    return _mix(_WHITE, _RED, (v - 0.5) / 0.5)


def _svg_root(width, height):
    return ET.Element(
        "svg",
        {
            "xmlns": "http://www.w3.org/2000/svg",
            "version": "1.1",
            "width": str(width),
            "height": str(height),
            "viewBox": f"0 0 {width} {height}",
        },
    )


def _text(parent, x, y, s, size=12, anchor="middle", transform=None, fill="#333333"):
    attrs = {
        "x": f"{x:.2f}",
        "y": f"{y:.2f}",
        "font-size": str(size),
        "font-family": "sans-serif",
        "text-anchor": anchor,
        "fill": fill,
    }
    if transform:
        attrs["transform"] = transform
    el = ET.SubElement(parent, "text", attrs)
    el.text = s
    return el


def _validate_matrix(values, kind):
    v = np.asarray(values, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError("need a square matrix")
    if kind == CORR_ELLIPSE:
        if np.any(np.abs(v) > 1.0 + 1e-9):
            raise ValueError("correlation values must be in [-1, 1]")
    elif kind == SIP_DISK:
        if np.any(v < -1e-9) or np.any(v > 1.0 + 1e-9):
            raise ValueError("SIP values must be in [0, 1]")
        if np.any(np.abs(np.diag(v)) > 1e-9):
            raise ValueError("SIP diagonal must be zero")
    elif kind == RANK_HEATMAP:
        if np.any(v < -1e-9) or np.any(np.abs(v.sum(axis=1) - 1.0) > 1e-6):
            raise ValueError("rank probability rows must sum to 1")
    return v


def render_matrix(values, labels, spec):
    """Render a K x K matrix as SVG with one glyph per cell.

    Rows are drawn in the order given; for SIP matrices the caller passes
    values and labels already sorted by decreasing MSIP.
    """
    v = _validate_matrix(values, spec.kind)
    k = v.shape[0]
    labels = [str(s) for s in labels]
    if len(labels) != k:
        raise ValueError("label count does not match matrix size")
    margin = max(80, spec.size_px // 6)
    cell = (spec.size_px - margin) / k
    total = spec.size_px
    root = _svg_root(total, total)
    ET.SubElement(root, "rect", {"x": "0", "y": "0", "width": str(total), "height": str(total), "fill": "white"})

    for i, label in enumerate(labels):
        y = margin + (i + 0.5) * cell
        _text(root, margin - 8, y + 4, label, anchor="end")
        x = margin + (i + 0.5) * cell
        _text(root, x, margin - 8, label, transform=f"rotate(-45 {x:.2f} {margin - 8:.2f})", anchor="start")

    for i in range(k):
        for j in range(k):
            x0 = margin + j * cell
            y0 = margin + i * cell
            cx, cy = x0 + cell / 2, y0 + cell / 2
            ET.SubElement(
                root,
                "rect",
                {"x": f"{x0:.2f}", "y": f"{y0:.2f}", "width": f"{cell:.2f}", "height": f"{cell:.2f}",
                 "fill": "none", "stroke": "#cccccc", "stroke-width": "1"},
            )
            val = float(v[i, j])
            if spec.kind == CORR_ELLIPSE:
                rx = 0.42 * cell
                ry = rx * (1.0 - 0.88 * min(1.0, abs(val)))
                angle = -45 if val >= 0 else 45
                ET.SubElement(
                    root,
                    "ellipse",
                    {"class": "glyph", "cx": f"{cx:.2f}", "cy": f"{cy:.2f}",
                     "rx": f"{rx:.2f}", "ry": f"{ry:.2f}",
                     "transform": f"rotate({angle} {cx:.2f} {cy:.2f})",
                     "fill": _corr_color(val), "stroke": "#666666", "stroke-width": "0.5"},
                )
            elif spec.kind == SIP_DISK:
                r = 0.45 * cell * np.sqrt(max(0.0, val))
                ET.SubElement(
                    root,
                    "circle",
                    {"class": "glyph", "cx": f"{cx:.2f}", "cy": f"{cy:.2f}", "r": f"{r:.2f}",
                     "fill": _sip_color(val), "stroke": "#666666" if r > 0 else "none",
                     "stroke-width": "0.5"},
                )
            else:
                pad = 1.0
                ET.SubElement(
                    root,
                    "rect",
                    {"class": "glyph", "x": f"{x0 + pad:.2f}", "y": f"{y0 + pad:.2f}",
                     "width": f"{cell - 2 * pad:.2f}", "height": f"{cell - 2 * pad:.2f}",
                     "fill": _mix(_WHITE, _DARK, val)},
                )
                if val >= 0.005:
                    _text(root, cx, cy + 4, f"{val:.2f}", size=max(8, int(cell / 5)),
                          fill="#ffffff" if val > 0.55 else "#333333")
    return ET.tostring(root, encoding="unicode")


def _fmt(x):
    return "n/a" if x is None else f"{x:.3g}"


def _axes(root, box, xlim, ylim, xticks, yticks):
    x0, y0, x1, y1 = box

    def sx(x):
        return x0 + (x - xlim[0]) / (xlim[1] - xlim[0]) * (x1 - x0)

    def sy(y):
        return y1 - (y - ylim[0]) / (ylim[1] - ylim[0]) * (y1 - y0)

    ET.SubElement(root, "rect", {"x": f"{x0:.2f}", "y": f"{y0:.2f}",
                                 "width": f"{x1 - x0:.2f}", "height": f"{y1 - y0:.2f}",
                                 "fill": "none", "stroke": "#333333", "stroke-width": "1"})
    for t in xticks:
        _text(root, sx(t), y1 + 16, f"{t:.3g}", size=10)
    for t in yticks:
        _text(root, x0 - 6, sy(t) + 3, f"{t:.3g}", size=10, anchor="end")
    return sx, sy


def _step_points(sx, sy, xs, ys):
    pts = [(sx(xs[0]), sy(0.0))]
    prev = 0.0
    for x, y in zip(xs, ys):
        pts.append((sx(x), sy(prev)))
        pts.append((sx(x), sy(y)))
        prev = y
    return pts


def _polyline(parent, pts, stroke, width="1.5", dash=None, fill="none", cls=None):
    attrs = {
        "points": " ".join(f"{x:.2f},{y:.2f}" for x, y in pts),
        "fill": fill,
        "stroke": stroke,
        "stroke-width": width,
    }
    if dash:
        attrs["stroke-dasharray"] = dash
    if cls:
        attrs["class"] = cls
    return ET.SubElement(parent, "polyline", attrs)


def render_delta_ecdf(report, spec):
    """ECDF of the absolute-error differences with band and annotations."""
    if spec.kind != DELTA_ECDF:
        raise ValueError("spec kind must be delta_ecdf")
    w = spec.size_px
    h = int(spec.size_px * 0.75)
    root = _svg_root(w, h)
    ET.SubElement(root, "rect", {"x": "0", "y": "0", "width": str(w), "height": str(h), "fill": "white"})
    deltas = np.asarray(report.deltas)
    span = deltas.max() - deltas.min()
    pad = 0.05 * span if span > 0 else 1.0
    xlim = (deltas.min() - pad, deltas.max() + pad)
    box = (60, 40, w - 20, h - 40)
    sx, sy = _axes(root, box, xlim, (0, 1), xticks=(xlim[0], 0.0, xlim[1]), yticks=(0, 0.5, 1))

    band = [(sx(x), sy(y)) for x, y in zip(deltas, report.band_hi)]
    band += [(sx(x), sy(y)) for x, y in zip(deltas[::-1], report.band_lo[::-1])]
    _polyline(root, band, stroke="none", fill="#bdd7ee", cls="band")
    _polyline(root, _step_points(sx, sy, deltas, report.ecdf), stroke="#1f4e79", cls="ecdf")
    if xlim[0] < 0 < xlim[1]:
        _polyline(root, [(sx(0), sy(0)), (sx(0), sy(1))], stroke="#888888", width="1", dash="4,3")
    if report.uncertainty_bar is not None:
        for u in (-report.uncertainty_bar, report.uncertainty_bar):
            if xlim[0] < u < xlim[1]:
                _polyline(root, [(sx(u), sy(0)), (sx(u), sy(1))], stroke="#ed7d31", width="3", cls="ubar")

    lines = [
        f"{report.labels[0]} vs {report.labels[1]}",
        f"SIP = {_fmt(report.sip.value)} [{_fmt(report.sip.lo)}, {_fmt(report.sip.hi)}]",
        f"MG = {_fmt(report.mg.value)} [{_fmt(report.mg.lo)}, {_fmt(report.mg.hi)}]",
        f"ML = {_fmt(report.ml.value)} [{_fmt(report.ml.lo)}, {_fmt(report.ml.hi)}]",
        f"dMUE = {_fmt(report.delta_mue.value)} [{_fmt(report.delta_mue.lo)}, {_fmt(report.delta_mue.hi)}]",
    ]
    for i, line in enumerate(lines):
        _text(root, 70, 58 + 15 * i, line, size=11, anchor="start")
    _text(root, (box[0] + box[2]) / 2, h - 8, "difference of absolute errors", size=11)
    return ET.tostring(root, encoding="unicode")


def render_abs_ecdf(e1, e2, labels, spec, stats=None):
    """ECDFs of two absolute-error sets with MUE (dotted) and Q95 (dashed) marks.

    `stats` is an optional mapping label -> (mue, q95) to draw the
    vertical markers.
    """
    if spec.kind != ABS_ECDF:
        raise ValueError("spec kind must be abs_ecdf")
    a1 = np.sort(np.abs(np.asarray(e1, dtype=float)))
    a2 = np.sort(np.abs(np.asarray(e2, dtype=float)))
    w = spec.size_px
    h = int(spec.size_px * 0.75)
    root = _svg_root(w, h)
    ET.SubElement(root, "rect", {"x": "0", "y": "0", "width": str(w), "height": str(h), "fill": "white"})
    hi = max(a1.max(), a2.max())
    xlim = (0.0, hi * 1.05 if hi > 0 else 1.0)
    box = (60, 40, w - 20, h - 40)
    sx, sy = _axes(root, box, xlim, (0, 1), xticks=(0.0, xlim[1]), yticks=(0, 0.5, 1))
    colors = ("#1f4e79", "#c55a11")
    for arr, color, label, k in ((a1, colors[0], labels[0], 0), (a2, colors[1], labels[1], 1)):
        ecdf = np.arange(1, arr.size + 1) / arr.size
        _polyline(root, _step_points(sx, sy, arr, ecdf), stroke=color, cls="ecdf")
        _text(root, box[2] - 8, 58 + 15 * k, label, size=11, anchor="end", fill=color)
        if stats and label in stats:
            mue, q95 = stats[label]
            _polyline(root, [(sx(mue), sy(0)), (sx(mue), sy(1))], stroke=color, width="1", dash="2,3")
            _polyline(root, [(sx(q95), sy(0)), (sx(q95), sy(1))], stroke=color, width="1", dash="7,3")
    _text(root, (box[0] + box[2]) / 2, h - 8, "absolute error", size=11)
    return ET.tostring(root, encoding="unicode")
