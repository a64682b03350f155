"""Hand-rolled SVG line charts for experiment reports.

SVG is assembled from fixed-precision strings, so a given report always
produces byte-identical files (no timestamps, no generated ids).
"""
from __future__ import annotations

from pathlib import Path

from .exceptions import ValidationError
from .experiments import ExperimentReport

_W, _H = 640, 400
_ML, _MR, _MT, _MB = 70, 70, 40, 50  # margins
_PALETTE = ("#1f6fb4", "#d62728", "#7b52a3", "#2a8f5c", "#b8860b")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def _scale(lo: float, hi: float, length: float, offset: float, flip: bool):
    span = hi - lo if hi > lo else 1.0

    def to_px(v: float) -> float:
        frac = (v - lo) / span
        if flip:
            frac = 1.0 - frac
        return offset + frac * length

    return to_px


def line_chart_svg(panel: dict, title: str = "") -> str:
    """Render one panel (x, named curves, optional vertical min markers).

    Curves tagged ``axis: "right"`` get their own scale and the right-hand
    axis labels; everything else shares the left axis.
    """
    x = [float(v) for v in panel["x"]]
    if len(x) == 0:
        raise ValidationError(f"panel {panel.get('name', '?')!r} has an empty sweep")
    curves = panel["curves"]
    if any(len(c["values"]) != len(x) for c in curves):
        raise ValidationError("every curve must have one value per x point")

    def axis_of(c):
        return c.get("axis", "left")

    left_vals = [v for c in curves if axis_of(c) == "left" for v in c["values"]]
    right_vals = [v for c in curves if axis_of(c) == "right" for v in c["values"]]
    x_lo, x_hi = min(x), max(x)
    px = _scale(x_lo, x_hi, _W - _ML - _MR, _ML, flip=False)

    def y_range(vals):
        if not vals:
            return 0.0, 1.0
        lo, hi = min(vals), max(vals)
        pad = 0.05 * (hi - lo if hi > lo else max(abs(hi), 1.0))
        return lo - pad, hi + pad

    ly_lo, ly_hi = y_range(left_vals)
    ry_lo, ry_hi = y_range(right_vals)
    ply = _scale(ly_lo, ly_hi, _H - _MT - _MB, _MT, flip=True)
    pry = _scale(ry_lo, ry_hi, _H - _MT - _MB, _MT, flip=True)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="#ffffff"/>',
        f'<text x="{_W / 2:.0f}" y="22" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{title or panel.get("name", "")}</text>',
    ]
    # frame
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" height="{_H - _MT - _MB}" '
        f'fill="none" stroke="#000000" stroke-width="1"/>'
    )
    # x ticks
    for tick in _ticks(x_lo, x_hi):
        tx = px(tick)
        parts.append(
            f'<line x1="{_fmt(tx)}" y1="{_H - _MB}" x2="{_fmt(tx)}" y2="{_H - _MB + 5}" '
            f'stroke="#000000"/>'
        )
        parts.append(
            f'<text x="{_fmt(tx)}" y="{_H - _MB + 18}" text-anchor="middle" font-size="10" '
            f'font-family="sans-serif">{tick:.4g}</text>'
        )
    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2:.0f}" y="{_H - 12}" text-anchor="middle" '
        f'font-size="12" font-family="sans-serif">{panel.get("x_label", "x")}</text>'
    )
    # y ticks (left, and right if used)
    for tick in _ticks(ly_lo, ly_hi):
        ty = ply(tick)
        parts.append(
            f'<line x1="{_ML - 5}" y1="{_fmt(ty)}" x2="{_ML}" y2="{_fmt(ty)}" stroke="#000000"/>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{_fmt(ty + 3)}" text-anchor="end" font-size="10" '
            f'font-family="sans-serif">{tick:.4g}</text>'
        )
    parts.append(
        f'<text x="16" y="{(_MT + _H - _MB) / 2:.0f}" text-anchor="middle" font-size="12" '
        f'font-family="sans-serif" transform="rotate(-90 16 {(_MT + _H - _MB) / 2:.0f})">'
        f'{panel.get("y_label", "y")}</text>'
    )
    if right_vals:
        for tick in _ticks(ry_lo, ry_hi):
            ty = pry(tick)
            parts.append(
                f'<line x1="{_W - _MR}" y1="{_fmt(ty)}" x2="{_W - _MR + 5}" y2="{_fmt(ty)}" '
                f'stroke="#000000"/>'
            )
            parts.append(
                f'<text x="{_W - _MR + 8}" y="{_fmt(ty + 3)}" text-anchor="start" font-size="10" '
                f'font-family="sans-serif">{tick:.4g}</text>'
            )
        parts.append(
            f'<text x="{_W - 14}" y="{(_MT + _H - _MB) / 2:.0f}" text-anchor="middle" '
            f'font-size="12" font-family="sans-serif" '
            f'transform="rotate(90 {_W - 14} {(_MT + _H - _MB) / 2:.0f})">'
            f'{panel.get("y2_label", "y2")}</text>'
        )

    color_of = {}
    for ci, curve in enumerate(curves):
        color = _PALETTE[ci % len(_PALETTE)]
        color_of[curve["label"]] = color
        py = pry if axis_of(curve) == "right" else ply
        pts = " ".join(f"{_fmt(px(xi))},{_fmt(py(float(v)))}" for xi, v in zip(x, curve["values"]))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{_ML + 8}" y="{_MT + 14 + 13 * ci}" font-size="11" '
            f'font-family="sans-serif" fill="{color}">{curve["label"]}</text>'
        )
    for marker in panel.get("markers", []):
        color = color_of.get(marker.get("curve", ""), "#000000")
        mx = px(float(marker["x"]))
        parts.append(
            f'<line x1="{_fmt(mx)}" y1="{_MT}" x2="{_fmt(mx)}" y2="{_H - _MB}" '
            f'stroke="{color}" stroke-width="1" stroke-dasharray="4 3"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plots(report: ExperimentReport, outdir) -> list[Path]:
    """One SVG per panel in the report; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for panel in report.payload.get("panels", []):
        svg = line_chart_svg(panel, title=f"{report.preset}: {panel['name']}")
        path = outdir / f"{report.preset}_{panel['name']}.svg"
        path.write_text(svg, encoding="utf-8")
        written.append(path)
    return written
