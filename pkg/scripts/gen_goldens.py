"""Regenerate the frozen golden files under tests/golden/.

Run only when an output format deliberately changes; commit the results.
The test suite compares against these bytes exactly.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from semvar.embedding import reference_embed
from semvar.render import RenderSpec, render_heatmap, render_timeseries

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"

REFERENCE_SENTENCES = [
    "The keeper climbed the spiral stair before dawn.",
    "Salt crusted the rail under his hand.",
    "a",
    "A",
    "repeated repeated repeated",
    "Mixed CASE tokens Stay distinct",
    "numbers 1 2 3 and punctuation !",
    "unicode été ∅ tokens",
    "",
    "the the the end",
]


def gen_reference_vectors() -> None:
    lines = []
    for text in REFERENCE_SENTENCES:
        vec = reference_embed(text, 8)
        lines.append(f"{text!r}\t{vec.astype('<f4').tobytes().hex()}")
    (GOLDEN / "reference_vectors_dim8.tsv").write_text("\n".join(lines) + "\n")


def gen_figures() -> None:
    matrix = np.array(
        [
            [0.0, 1.0, 2.0, 3.0],
            [1.0, 0.0, 1.0, 2.0],
            [2.0, 1.0, 0.0, 1.0],
            [3.0, 2.0, 1.0, 0.0],
        ]
    )
    spec = RenderSpec(palette="grayscale", width=128, height=128, downsample=16, title="fixed")
    render_heatmap(matrix, spec, GOLDEN / "heatmap_4x4_gray.svg")
    spec_v = RenderSpec(palette="viridis8", width=96, height=96, downsample=16)
    render_heatmap(matrix, spec_v, GOLDEN / "heatmap_4x4_viridis.ppm")

    t = np.arange(12, dtype=np.float64)
    series = [
        ("alpha", np.sin(t / 3.0)),
        ("beta", (t % 4) - 1.5),
    ]
    spec_ts = RenderSpec(palette="viridis8", width=200, height=120, downsample=16, title="two")
    render_timeseries(series, spec_ts, GOLDEN / "timeseries_2.svg")
    render_timeseries(series, spec_ts, GOLDEN / "timeseries_2.ppm")


if __name__ == "__main__":
    GOLDEN.mkdir(parents=True, exist_ok=True)
    gen_reference_vectors()
    gen_figures()
    print(f"goldens written to {GOLDEN}")
