"""
Minimal SVG renderer for curve panels, heatmaps and recalibration maps.

Output is a pure function of the inputs: fixed canvas sizes and fixed
two-decimal coordinates keep reruns byte-identical.
"""

from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
FONT = "font-family='Helvetica, Arial, sans-serif'"

Series = Tuple[str, Sequence[float], Sequence[float], bool]  # label, xs, ys, dashed


def to_path(xs: Sequence[float], ys: Sequence[float], box: Tuple[float, float, float, float]) -> str:
    """Path data for points in the unit square scaled into ``box`` (left, top, width, height)."""
    left, top, width, height = box
    points = [(left + x * width, top + height - y * height) for x, y in zip(xs, ys)]
    if not points:
        return ""
    head, *rest = points
    return " ".join([f"M {head[0]:.2f},{head[1]:.2f}"] + [f"L {x:.2f},{y:.2f}" for x, y in rest])


def _text(x: float, y: float, text: str, size: int = 14, anchor: str = "middle",
          rotate: Optional[float] = None) -> str:
    transform = f" transform='rotate({rotate:.0f} {x:.2f} {y:.2f})'" if rotate is not None else ""
    return (f"<text x='{x:.2f}' y='{y:.2f}' {FONT} font-size='{size}' "
            f"text-anchor='{anchor}'{transform}>{escape(text)}</text>")


def _axes(box: Tuple[float, float, float, float], xlabel: str, ylabel: str,
          ticks: Sequence[float] = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)) -> List[str]:
    left, top, width, height = box
    elements = [
        f"<rect x='{left:.2f}' y='{top:.2f}' width='{width:.2f}' height='{height:.2f}' "
        f"fill='none' stroke='#333333' stroke-width='1'/>"
    ]
    for t in ticks:
        x = left + t * width
        y = top + height - t * height
        elements.append(f"<line x1='{x:.2f}' y1='{top + height:.2f}' x2='{x:.2f}' "
                        f"y2='{top + height + 5:.2f}' stroke='#333333'/>")
        elements.append(_text(x, top + height + 20, f"{t:.1f}", size=12))
        elements.append(f"<line x1='{left - 5:.2f}' y1='{y:.2f}' x2='{left:.2f}' y2='{y:.2f}' stroke='#333333'/>")
        elements.append(_text(left - 8, y + 4, f"{t:.1f}", size=12, anchor="end"))
    elements.append(_text(left + width / 2, top + height + 42, xlabel))
    elements.append(_text(left - 42, top + height / 2, ylabel, rotate=-90))
    return elements


def _document(width: int, height: int, title: str, elements: Sequence[str]) -> str:
    header = [
        f"<svg xmlns='http://www.w3.org/2000/svg' width='{width}' height='{height}' "
        f"viewBox='0 0 {width} {height}'>",
        f"<rect width='{width}' height='{height}' fill='white'/>",
        _text(width / 2, 32, title, size=18),
    ]
    return "\n".join(header + list(elements) + ["</svg>"]) + "\n"


def line_panels(title: str, panels: Sequence[Tuple[str, str, Sequence[Series]]]) -> str:
    """
    Side-by-side line panels on unit axes.

    Each panel is (heading, y-axis label, series); dashed series are drawn
    as reference lines.
    """
    panel_w, panel_h = 300.0, 260.0
    margin_left, margin_top, gap = 80.0, 80.0, 90.0
    width = int(margin_left + len(panels) * panel_w + (len(panels) - 1) * gap + 40)
    height = int(margin_top + panel_h + 120)
    elements: List[str] = []
    for p, (heading, ylabel, series) in enumerate(panels):
        box = (margin_left + p * (panel_w + gap), margin_top, panel_w, panel_h)
        elements.append(_text(box[0] + panel_w / 2, margin_top - 12, heading, size=15))
        elements.extend(_axes(box, "context certainty", ylabel))
        for s, (label, xs, ys, dashed) in enumerate(series):
            colour = PALETTE[s % len(PALETTE)]
            dash = " stroke-dasharray='6 4'" if dashed else ""
            elements.append(f"<path d='{to_path(xs, ys, box)}' stroke='{colour}' stroke-width='2' "
                            f"fill='none'{dash}/>")
            legend_y = margin_top + panel_h + 64 + 16 * s
            elements.append(f"<line x1='{box[0]:.2f}' y1='{legend_y - 4:.2f}' x2='{box[0] + 24:.2f}' "
                            f"y2='{legend_y - 4:.2f}' stroke='{colour}' stroke-width='2'{dash}/>")
            elements.append(_text(box[0] + 30, legend_y, label, size=12, anchor="start"))
    height += 16 * max((len(s) for _, _, s in panels), default=0)
    return _document(width, height, title, elements)


def _shade(value: float) -> str:
    level = int(round(255 * (1.0 - max(0.0, min(1.0, value)))))
    return f"#ff{level:02x}{level:02x}"


def heatmap_grid(title: str, edges: Sequence[float], means: Sequence[Sequence[Optional[float]]],
                 counts: Sequence[Sequence[int]]) -> str:
    """Cells shaded white to red by mean deviation; empty cells hatched grey."""
    size = 360.0
    left, top = 100.0, 70.0
    box = (left, top, size, size)
    cell = size / len(means)
    elements: List[str] = []
    for i, row in enumerate(means):
        for j, value in enumerate(row):
            x = left + j * cell
            y = top + size - (i + 1) * cell
            fill = "#dddddd" if value is None else _shade(value)
            elements.append(f"<rect x='{x:.2f}' y='{y:.2f}' width='{cell:.2f}' height='{cell:.2f}' "
                            f"fill='{fill}' stroke='white'/>")
            label = "n/a" if value is None else f"{value:.2f}"
            elements.append(_text(x + cell / 2, y + cell / 2, label, size=12))
            elements.append(_text(x + cell / 2, y + cell / 2 + 15, f"n={counts[i][j]}", size=10))
    elements.extend(_axes(box, "context certainty", "self-confidence", ticks=edges))
    return _document(int(left + size + 60), int(top + size + 80), title, elements)


def step_map(title: str, targets: Sequence[float], expressed: Sequence[float]) -> str:
    """Recalibration map: expressed certainty against target, with the identity dashed."""
    box = (90.0, 70.0, 360.0, 360.0)
    elements = _axes(box, "target certainty", "expressed certainty")
    elements.append(f"<path d='{to_path((0.0, 1.0), (0.0, 1.0), box)}' stroke='#999999' "
                    f"stroke-width='1' fill='none' stroke-dasharray='6 4'/>")
    elements.append(f"<path d='{to_path(targets, expressed, box)}' stroke='{PALETTE[0]}' "
                    f"stroke-width='2' fill='none'/>")
    for x, y in zip(targets, expressed):
        cx = box[0] + x * box[2]
        cy = box[1] + box[3] - y * box[3]
        elements.append(f"<circle cx='{cx:.2f}' cy='{cy:.2f}' r='4' fill='{PALETTE[0]}'/>")
    return _document(510, 500, title, elements)
