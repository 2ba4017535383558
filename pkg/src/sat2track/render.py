"""Plan-view SVG rendering of tracks.

Two modes: "abstract" draws the pad graph (pads as circles, links as lines,
arrowheads on one-way links), "blocks" draws the laid-out block grid one cell
per square, colored by block type, optionally restricted to a single
altitude layer. Output is plain SVG text built deterministically, so equal
tracks render to byte-equal files.
"""
from __future__ import annotations

from sat2track.track import PadKind, Track

CELL = 8  # pixels per grid cell
MARGIN = 2  # cells of padding around the drawing

_BLOCK_FILL = {
    "road_straight": "#b0b0b0",
    "road_curve": "#9a9ab0",
    "platform": "#7f9f7f",
    "ramp": "#c8a468",
    "checkpoint_aerial": "#d04040",
    "start": "#3060c0",
    "finish": "#202020",
    "barrier": "#603030",
    "accelerator": "#d0d040",
}

_PAD_FILL = {
    PadKind.START: "#3060c0",
    PadKind.FINISH: "#202020",
    PadKind.ROAD: "#b0b0b0",
    PadKind.PLATFORM: "#7f9f7f",
    PadKind.LANDING: "#7f9f7f",
    PadKind.CHECKPOINT_TOUCH: "#d04040",
}

_ARROW = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}


class RenderError(ValueError):
    """Raised when the requested rendering is not possible."""


def render_svg(track: Track, mode: str = "abstract", layer: int | None = None) -> str:
    if mode == "abstract":
        if layer is not None:
            raise RenderError("layers only apply to block renderings")
        return _render_abstract(track)
    if mode == "blocks":
        return _render_blocks(track, layer)
    raise RenderError(f"unknown render mode {mode!r}")


def _bounds(points: list[tuple[int, int]]) -> tuple[int, int, int, int]:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return min(xs) - MARGIN, min(ys) - MARGIN, max(xs) + MARGIN, max(ys) + MARGIN


def _open_svg(x_lo: int, y_lo: int, x_hi: int, y_hi: int) -> tuple[list[str], int]:
    """SVG preamble; returns the line buffer and the y to flip against so
    that north points up."""
    width = (x_hi - x_lo + 1) * CELL
    height = (y_hi - y_lo + 1) * CELL
    return (
        [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        ],
        y_hi,
    )


def _render_blocks(track: Track, layer: int | None) -> str:
    if track.blocks is None:
        raise RenderError("track has no blocks; run the layout first")
    blocks = [b for b in track.blocks if layer is None or b.z == layer]
    if not blocks:
        raise RenderError(f"no blocks on layer {layer}")
    x_lo, y_lo, x_hi, y_hi = _bounds([(b.x, b.y) for b in blocks])
    lines, y_flip = _open_svg(x_lo, y_lo, x_hi, y_hi)
    z_hi = max(b.z for b in track.blocks)
    # lower layers first so upper roads overprint at crossovers
    for block in sorted(blocks, key=lambda b: (b.z, b.x, b.y)):
        px = (block.x - x_lo) * CELL
        py = (y_flip - block.y) * CELL
        fill = _BLOCK_FILL[block.block_type]
        shade = 1.0 if z_hi == 0 else 0.55 + 0.45 * block.z / z_hi
        lines.append(
            f'<rect x="{px}" y="{py}" width="{CELL}" height="{CELL}" '
            f'fill="{fill}" fill-opacity="{shade:.2f}" stroke="#404040" stroke-width="0.5"/>'
        )
        if block.block_type == "ramp":
            dx, dy = _ARROW[block.orientation]
            cx, cy = px + CELL // 2, py + CELL // 2
            lines.append(
                f'<line x1="{cx - 2 * dx}" y1="{cy + 2 * dy}" x2="{cx + 2 * dx}" '
                f'y2="{cy - 2 * dy}" stroke="#000000" stroke-width="1"/>'
            )
    for pad in track.pads:
        if layer is not None and pad.z != layer:
            continue
        px = (pad.x - x_lo) * CELL + CELL // 2
        py = (y_flip - pad.y) * CELL + CELL // 2
        lines.append(
            f'<circle cx="{px}" cy="{py}" r="2" fill="#ffffff" '
            'stroke="#000000" stroke-width="0.75"/>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _render_abstract(track: Track) -> str:
    x_lo, y_lo, x_hi, y_hi = _bounds([(p.x, p.y) for p in track.pads])
    lines, y_flip = _open_svg(x_lo, y_lo, x_hi, y_hi)

    def center(pad_id: int) -> tuple[int, int]:
        pad = track.pad(pad_id)
        return (pad.x - x_lo) * CELL + CELL // 2, (y_flip - pad.y) * CELL + CELL // 2

    lines.append(
        '<defs><marker id="arrow" markerWidth="6" markerHeight="6" refX="5" '
        'refY="3" orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="#606060"/>'
        "</marker></defs>"
    )
    for link in track.links:
        (x1, y1), (x2, y2) = center(link.src), center(link.dst)
        marker = "" if link.two_way else ' marker-end="url(#arrow)"'
        dash = "" if link.two_way else ' stroke-dasharray="3 2"'
        lines.append(
            f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
            f'stroke="#606060" stroke-width="1"{dash}{marker}/>'
        )
    for pad in track.pads:
        cx, cy = center(pad.id)
        lines.append(
            f'<circle cx="{cx}" cy="{cy}" r="3" fill="{_PAD_FILL[pad.kind]}" '
            'stroke="#000000" stroke-width="0.5"/>'
        )
        if pad.checkpoint_id is not None:
            lines.append(
                f'<text x="{cx + 4}" y="{cy - 2}" font-size="6" '
                f'font-family="monospace" fill="#d04040">c{pad.checkpoint_id}</text>'
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
