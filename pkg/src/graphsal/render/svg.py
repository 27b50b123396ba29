from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from ..molgraph import MolecularGraph
from .layout import compute_layout

NEUTRAL = (255, 255, 255)
POSITIVE = (178, 24, 43)
NEGATIVE = (33, 102, 172)
SEQUENTIAL_HIGH = (215, 48, 31)

ELEMENT_COLORS = {"N": "#3050f8", "O": "#e00000", "S": "#b8a000", "F": "#30a030",
                  "Cl": "#30a030", "Br": "#a52a2a", "I": "#940094", "P": "#ff8000"}


@dataclass(frozen=True)
class RenderSpec:
    width: int = 400
    height: int = 300
    atom_radius: float = 0.38
    margin: float = 1.0
    show_values: bool = False


def _mix(a, b, t):
    return tuple(int(round(x + (y - x) * t)) for x, y in zip(a, b))


def _hex(rgb) -> str:
    return "#%02x%02x%02x" % rgb


def score_colors(scores, signed: bool) -> list[str]:
    """Colors scaled by the molecule's largest absolute score.

    Signed scores: red for positive, blue for negative, white for zero.
    Unsigned scores: white to red.
    """
    s = np.asarray(scores, dtype=np.float64)
    scale = np.max(np.abs(s)) if s.size else 0.0
    t = s / scale if scale > 0 else np.zeros_like(s)
    out = []
    for v in t:
        if v > 0:
            out.append(_hex(_mix(NEUTRAL, POSITIVE if signed else SEQUENTIAL_HIGH, v)))
        elif v < 0:
            out.append(_hex(_mix(NEUTRAL, NEGATIVE, -v)))
        else:
            out.append(_hex(NEUTRAL))
    return out


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_svg(
    graph: MolecularGraph,
    scores=None,
    signed: bool = False,
    spec: RenderSpec = RenderSpec(),
    title: str | None = None,
    seed: int = 0,
) -> str:
    """SVG depiction with each atom's disc colored by its score."""
    xy = compute_layout(graph, seed=seed)
    lo = xy.min(axis=0) - spec.margin
    hi = xy.max(axis=0) + spec.margin
    extent = np.maximum(hi - lo, 1e-9)
    top = 24 if title else 0
    scale = min(spec.width / extent[0], (spec.height - top) / extent[1])
    pix = (xy - lo) * scale
    pix[:, 1] = spec.height - pix[:, 1]  # y up
    off = ((spec.width - extent[0] * scale) / 2, (spec.height - top - extent[1] * scale) / 2)
    pix[:, 0] += off[0]
    pix[:, 1] -= off[1]

    n = len(graph.atoms)
    colors = score_colors(scores, signed) if scores is not None else ["#ffffff"] * n
    r = spec.atom_radius * scale
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" height="{spec.height}" '
        f'viewBox="0 0 {spec.width} {spec.height}">',
        f'<rect width="{spec.width}" height="{spec.height}" fill="#ffffff"/>',
    ]
    if title:
        parts.append(f'<text x="{spec.width / 2:.1f}" y="16" font-family="sans-serif" font-size="13" '
                     f'text-anchor="middle">{escape(title)}</text>')
    parts.append('<g class="highlights">')
    for k in range(n):
        parts.append(f'<circle cx="{_fmt(pix[k, 0])}" cy="{_fmt(pix[k, 1])}" r="{_fmt(r)}" '
                     f'fill="{colors[k]}" data-atom="{k}"/>')
    parts.append("</g>")

    parts.append('<g class="bonds" stroke="#222222" stroke-width="1.6">')
    gap = 0.12 * scale
    for b in graph.bonds:
        p, q = pix[b.i], pix[b.j]
        direction = q - p
        length = np.hypot(*direction)
        if length == 0:
            continue
        normal = np.array([-direction[1], direction[0]]) / length
        if b.order in ("double", "aromatic", "triple"):
            offsets = [-gap / 2, gap / 2] if b.order != "triple" else [-gap, 0.0, gap]
        else:
            offsets = [0.0]
        for o, shift in enumerate(offsets):
            a, c = p + normal * shift, q + normal * shift
            dash = ' stroke-dasharray="4,3"' if b.order == "aromatic" and o == 1 else ""
            parts.append(f'<line x1="{_fmt(a[0])}" y1="{_fmt(a[1])}" x2="{_fmt(c[0])}" '
                         f'y2="{_fmt(c[1])}"{dash}/>')
    parts.append("</g>")

    parts.append('<g class="labels" font-family="sans-serif" font-size="14" text-anchor="middle">')
    for k, atom in enumerate(graph.atoms):
        label = "" if atom.element == "C" else atom.element
        if atom.charge:
            sign = "+" if atom.charge > 0 else "-"
            label = atom.element + (sign if abs(atom.charge) == 1 else f"{abs(atom.charge)}{sign}")
        text = label
        if spec.show_values and scores is not None:
            text = f"{label} {scores[k]:.2f}".strip()
        if text:
            fill = ELEMENT_COLORS.get(atom.element, "#222222")
            parts.append(f'<text x="{_fmt(pix[k, 0])}" y="{_fmt(pix[k, 1] + 5)}" fill="{fill}">'
                         f'{escape(text)}</text>')
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
