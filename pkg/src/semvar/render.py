"""Publication-style figures without a plotting dependency.

Self-contained SVG 1.1 and binary PPM (P6) writers for similarity-matrix
heatmaps, model-matrix heatmaps, and stacked successive-similarity time
series. Output is byte-deterministic: identical inputs and spec yield
identical files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .compare import ModelMatrix
from .errors import SemvarError
from .ssm import SSM, StandardizedSSM, TimeSeries

PALETTES = ("grayscale", "viridis8")

# Fixed 8-stop table, dark-to-light; luminance increases monotonically so a
# higher value can never render darker.
_VIRIDIS8_STOPS = (
    (68, 1, 84),
    (70, 50, 127),
    (54, 92, 141),
    (39, 127, 143),
    (31, 161, 135),
    (74, 194, 109),
    (159, 218, 58),
    (253, 231, 37),
)

# Per-series line colors for time-series panels.
_SERIES_COLORS = (
    (31, 119, 180),
    (214, 39, 40),
    (44, 160, 44),
    (148, 103, 189),
    (255, 127, 14),
    (23, 190, 207),
    (140, 86, 75),
    (227, 119, 194),
)


@dataclass(frozen=True)
class RenderSpec:
    palette: str = "viridis8"
    width: int = 512
    height: int = 512
    downsample: int = 512
    title: str = ""

    def __post_init__(self) -> None:
        if self.palette not in PALETTES:
            raise SemvarError(f"unknown palette: {self.palette!r}")
        if self.width < 64 or self.height < 64:
            raise SemvarError("width and height must be at least 64")
        if self.downsample < 16:
            raise SemvarError("downsample must be at least 16")


def _build_lut(stops: Sequence[tuple[int, int, int]]) -> np.ndarray:
    stops_arr = np.asarray(stops, dtype=np.float64)
    t = np.linspace(0.0, 1.0, 256) * (len(stops) - 1)
    idx = np.minimum(t.astype(np.intp), len(stops) - 2)
    frac = (t - idx)[:, None]
    lut = stops_arr[idx] * (1.0 - frac) + stops_arr[idx + 1] * frac
    return np.rint(lut).astype(np.uint8)


_LUTS = {
    "grayscale": np.repeat(np.arange(256, dtype=np.uint8)[:, None], 3, axis=1),
    "viridis8": _build_lut(_VIRIDIS8_STOPS),
}


def palette_lut(name: str) -> np.ndarray:
    """256 x 3 uint8 color table for a palette name."""
    return _LUTS[name].copy()


def _hex(rgb) -> str:
    return "#{:02x}{:02x}{:02x}".format(int(rgb[0]), int(rgb[1]), int(rgb[2]))


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _block_average(grid: np.ndarray, max_cells: int) -> np.ndarray:
    """Average rectangular blocks down to at most max_cells per axis."""
    rows, cols = grid.shape
    out_r = min(rows, max_cells)
    out_c = min(cols, max_cells)
    if out_r == rows and out_c == cols:
        return grid
    rb = np.rint(np.arange(out_r + 1) * rows / out_r).astype(np.intp)
    cb = np.rint(np.arange(out_c + 1) * cols / out_c).astype(np.intp)
    out = np.empty((out_r, out_c), dtype=np.float64)
    for i in range(out_r):
        band = grid[rb[i] : rb[i + 1]]
        for j in range(out_c):
            out[i, j] = band[:, cb[j] : cb[j + 1]].mean()
    return out


def _to_levels(grid: np.ndarray) -> np.ndarray:
    """Linear map of min..max onto palette levels 0..255; flat input maps to 128."""
    vmin = float(grid.min())
    vmax = float(grid.max())
    if vmax == vmin:
        return np.full(grid.shape, 128, dtype=np.uint8)
    return np.rint((grid - vmin) / (vmax - vmin) * 255.0).astype(np.uint8)


def _matrix_grid(matrix) -> tuple[np.ndarray, tuple[str, ...] | None]:
    if isinstance(matrix, ModelMatrix):
        return np.asarray(matrix.values, dtype=np.float64), matrix.models
    if isinstance(matrix, (SSM, StandardizedSSM)):
        return matrix.values.astype(np.float64), None
    grid = np.asarray(matrix, dtype=np.float64)
    if grid.ndim != 2:
        raise SemvarError("heatmap input must be 2-D")
    return grid, None


def render_heatmap(matrix, spec: RenderSpec, path: str | Path) -> None:
    """Write a heatmap of an SSM, standardized SSM, model matrix, or plain
    2-D array. The file format follows the path extension (.svg or .ppm)."""
    grid, labels = _matrix_grid(matrix)
    if grid.size == 0:
        raise SemvarError("empty matrix")
    grid = _block_average(grid, spec.downsample)
    levels = _to_levels(grid)
    lut = _LUTS[spec.palette]

    path = Path(path)
    if path.suffix == ".ppm":
        _write_ppm(_rasterize_cells(levels, lut, spec.width, spec.height), path)
    elif path.suffix == ".svg":
        _write_heatmap_svg(levels, lut, labels, spec, path)
    else:
        raise SemvarError(f"unsupported figure extension: {path.suffix!r}")


def render_timeseries(
    series: Sequence[tuple[str, TimeSeries | Sequence[float] | np.ndarray]],
    spec: RenderSpec,
    path: str | Path,
) -> None:
    """Stacked per-model panels of successive-sentence similarity, shared x axis."""
    if not series:
        raise SemvarError("no series to render")
    names = [name for name, _ in series]
    arrays = []
    for _, s in series:
        values = s.values if isinstance(s, TimeSeries) else s
        arrays.append(np.asarray(values, dtype=np.float64))
    lengths = {a.size for a in arrays}
    if len(lengths) != 1:
        raise SemvarError(f"series lengths differ: {sorted(lengths)}")
    if next(iter(lengths)) == 0:
        raise SemvarError("empty series")

    path = Path(path)
    if path.suffix == ".svg":
        _write_timeseries_svg(names, arrays, spec, path)
    elif path.suffix == ".ppm":
        _write_timeseries_ppm(names, arrays, spec, path)
    else:
        raise SemvarError(f"unsupported figure extension: {path.suffix!r}")


# Raster (PPM) backend.


def _rasterize_cells(levels: np.ndarray, lut: np.ndarray, w: int, h: int) -> np.ndarray:
    rows, cols = levels.shape
    ys = (np.arange(h) * rows) // h
    xs = (np.arange(w) * cols) // w
    return lut[levels[np.ix_(ys, xs)]]


def _write_ppm(image: np.ndarray, path: Path) -> None:
    h, w, _ = image.shape
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    path.write_bytes(header + image.tobytes())


def _draw_line(image: np.ndarray, x0: int, y0: int, x1: int, y1: int, color) -> None:
    """Bresenham segment, clipped to the image."""
    h, w, _ = image.shape
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        if 0 <= x0 < w and 0 <= y0 < h:
            image[y0, x0] = color
        if x0 == x1 and y0 == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


# Shared panel layout for time-series figures.


def _panel_layout(spec: RenderSpec, count: int) -> tuple[int, list[tuple[int, int]]]:
    pad = 6
    title_h = 18 if spec.title else 0
    gap = 4
    top = pad + title_h
    avail = spec.height - top - pad - gap * (count - 1)
    panel_h = max(12, avail // count)
    panels = [(top + i * (panel_h + gap), panel_h) for i in range(count)]
    return pad, panels


def _y_bounds(values: np.ndarray) -> tuple[float, float]:
    vmin = float(values.min())
    vmax = float(values.max())
    if vmin == vmax:
        return vmin - 1.0, vmax + 1.0
    margin = 0.05 * (vmax - vmin)
    return vmin - margin, vmax + margin


def _scale_points(
    values: np.ndarray, x0: int, plot_w: int, y_top: int, panel_h: int
) -> tuple[np.ndarray, np.ndarray, float]:
    lo, hi = _y_bounds(values)
    denom = max(values.size - 1, 1)
    xs = x0 + np.arange(values.size) * (plot_w - 1) / denom
    ys = y_top + (hi - values) / (hi - lo) * (panel_h - 1)
    zero_y = y_top + (hi - 0.0) / (hi - lo) * (panel_h - 1) if lo <= 0.0 <= hi else np.nan
    return xs, ys, zero_y


def _write_timeseries_ppm(names, arrays, spec: RenderSpec, path: Path) -> None:
    image = np.full((spec.height, spec.width, 3), 255, dtype=np.uint8)
    pad, panels = _panel_layout(spec, len(arrays))
    x0 = pad
    plot_w = spec.width - 2 * pad
    for idx, values in enumerate(arrays):
        y_top, panel_h = panels[idx]
        image[y_top, x0 : x0 + plot_w] = (51, 51, 51)
        image[min(y_top + panel_h - 1, spec.height - 1), x0 : x0 + plot_w] = (51, 51, 51)
        image[y_top : y_top + panel_h, x0] = (51, 51, 51)
        image[y_top : y_top + panel_h, x0 + plot_w - 1] = (51, 51, 51)
        xs, ys, zero_y = _scale_points(values, x0, plot_w, y_top, panel_h)
        if not np.isnan(zero_y):
            image[int(round(zero_y)), x0 : x0 + plot_w : 3] = (170, 170, 170)
        color = _SERIES_COLORS[idx % len(_SERIES_COLORS)]
        for t in range(values.size - 1):
            _draw_line(
                image,
                int(round(xs[t])),
                int(round(ys[t])),
                int(round(xs[t + 1])),
                int(round(ys[t + 1])),
                color,
            )
    _write_ppm(image, path)


# Vector (SVG) backend.


def _svg_open(spec: RenderSpec) -> list[str]:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" '
        f'height="{spec.height}" viewBox="0 0 {spec.width} {spec.height}">',
        f'<rect width="{spec.width}" height="{spec.height}" fill="#ffffff"/>',
    ]
    if spec.title:
        lines.append(
            f'<text x="{_fmt(spec.width / 2)}" y="14" font-family="monospace" '
            f'font-size="13" text-anchor="middle" fill="#111111">{escape(spec.title)}</text>'
        )
    return lines


def _write_heatmap_svg(
    levels: np.ndarray,
    lut: np.ndarray,
    labels: tuple[str, ...] | None,
    spec: RenderSpec,
    path: Path,
) -> None:
    rows, cols = levels.shape
    pad = 6
    title_h = 18 if spec.title else 0
    label_w = min(72, (spec.width - 2 * pad) // 3) if labels else 0
    label_h = min(48, (spec.height - 2 * pad) // 3) if labels else 0
    x0 = pad + label_w
    y0 = pad + title_h + label_h
    plot_w = spec.width - x0 - pad
    plot_h = spec.height - y0 - pad
    cell_w = plot_w / cols
    cell_h = plot_h / rows

    lines = _svg_open(spec)
    for i in range(rows):
        for j in range(cols):
            color = _hex(lut[levels[i, j]])
            lines.append(
                f'<rect x="{_fmt(x0 + j * cell_w)}" y="{_fmt(y0 + i * cell_h)}" '
                f'width="{_fmt(cell_w)}" height="{_fmt(cell_h)}" fill="{color}"/>'
            )
    if labels:
        for i, name in enumerate(labels):
            cy = y0 + (i + 0.5) * cell_h
            lines.append(
                f'<text x="{_fmt(x0 - 4)}" y="{_fmt(cy + 3)}" font-family="monospace" '
                f'font-size="10" text-anchor="end" fill="#111111">{escape(name)}</text>'
            )
        for j, name in enumerate(labels):
            cx = x0 + (j + 0.5) * cell_w
            lines.append(
                f'<text x="{_fmt(cx)}" y="{_fmt(y0 - 5)}" font-family="monospace" '
                f'font-size="10" text-anchor="middle" fill="#111111">{escape(name)}</text>'
            )
    lines.append("</svg>")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_timeseries_svg(names, arrays, spec: RenderSpec, path: Path) -> None:
    pad, panels = _panel_layout(spec, len(arrays))
    x0 = pad
    plot_w = spec.width - 2 * pad
    lines = _svg_open(spec)
    for idx, (name, values) in enumerate(zip(names, arrays)):
        y_top, panel_h = panels[idx]
        lines.append(
            f'<rect x="{x0}" y="{y_top}" width="{plot_w}" height="{panel_h}" '
            f'fill="none" stroke="#333333" stroke-width="1"/>'
        )
        xs, ys, zero_y = _scale_points(values, x0, plot_w, y_top, panel_h)
        if not np.isnan(zero_y):
            lines.append(
                f'<line x1="{x0}" y1="{_fmt(zero_y)}" x2="{x0 + plot_w}" '
                f'y2="{_fmt(zero_y)}" stroke="#aaaaaa" stroke-width="1" '
                f'stroke-dasharray="4,3"/>'
            )
        color = _hex(_SERIES_COLORS[idx % len(_SERIES_COLORS)])
        points = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(xs, ys))
        lines.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1"/>'
        )
        lines.append(
            f'<text x="{x0 + 4}" y="{y_top + 12}" font-family="monospace" '
            f'font-size="10" fill="#111111">{escape(name)}</text>'
        )
    lines.append("</svg>")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
