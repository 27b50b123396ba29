from .layout import compute_layout, rings
from .svg import RenderSpec, render_svg, score_colors

__all__ = ["RenderSpec", "compute_layout", "render_svg", "rings", "score_colors"]
