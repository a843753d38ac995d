"""Figure assembly and deterministic rendering.

One figure holds any number of curves: a line per mean trace plus ten
evenly spaced confidence whiskers along it. Rendering is a pure function
of the spec and the input bytes - fixed SVG hash salt, no embedded dates -
so re-rendering an unchanged spec reproduces the file byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

import matplotlib as mpl
import matplotlib.pyplot as plt
import numpy as np

from .curves import Curve, load_curve

WHISKERS_PER_CURVE = 10

__all__ = ["FigureSpec", "build_figure", "render"]

_RC = {
    "svg.hashsalt": "threshplots",
    "svg.fonttype": "none",  # keep label text searchable in the output
    "figure.figsize": (6.4, 4.8),
    "figure.dpi": 100,
    "savefig.dpi": 100,
}


@dataclass(frozen=True)
class FigureSpec:
    """What to plot: input files, one label per file, and the output path."""

    input_files: tuple[str, ...]
    output: str
    labels: tuple[str, ...] = ()
    title: str = ""
    x_label: str = "round"
    y_label: str = "mean cumulative regret"

    def __post_init__(self):
        files = tuple(str(f) for f in self.input_files)
        if not files:
            raise ValueError("a figure needs at least one input file")
        labels = tuple(str(s) for s in self.labels)
        if not labels:
            labels = tuple(Path(f).stem for f in files)
        if len(labels) != len(files):
            raise ValueError(
                f"{len(files)} input files but {len(labels)} labels"
            )
        if not str(self.output):
            raise ValueError("output path must not be empty")
        object.__setattr__(self, "input_files", files)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "output", str(self.output))

    @classmethod
    def from_json(cls, text: str) -> "FigureSpec":
        raw = json.loads(text)
        if not isinstance(raw, dict):
            raise ValueError("figure spec must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown figure spec keys: {sorted(unknown)}")
        missing = {"input_files", "output"} - set(raw)
        if missing:
            raise ValueError(f"figure spec is missing keys: {sorted(missing)}")
        kw = dict(raw)
        kw["input_files"] = tuple(kw["input_files"])
        kw["labels"] = tuple(kw.get("labels", ()))
        return cls(**kw)

    def to_json(self) -> str:
        return json.dumps(
            {
                "input_files": list(self.input_files),
                "labels": list(self.labels),
                "output": self.output,
                "title": self.title,
                "x_label": self.x_label,
                "y_label": self.y_label,
            },
            indent=2,
            sort_keys=True,
        )


def _whisker_indices(n: int) -> np.ndarray:
    return np.unique(np.round(np.linspace(0, n - 1, WHISKERS_PER_CURVE)).astype(int))


def build_figure(spec: FigureSpec, curves: list[Curve] | None = None):
    """Assemble the matplotlib figure; returns (figure, axes).

    Curves may be passed pre-loaded; otherwise every input file is loaded
    (and validated) before any drawing starts, so a bad file cannot leave
    a half-written figure behind.
    """
    if curves is None:
        curves = [
            load_curve(f, lab) for f, lab in zip(spec.input_files, spec.labels)
        ]
    with mpl.rc_context(_RC):
        fig, ax = plt.subplots()
        for curve in curves:
            (line,) = ax.plot(curve.rounds, curve.mean, label=curve.label)
            idx = _whisker_indices(len(curve))
            yerr = np.vstack(
                [
                    (curve.mean - curve.ci_low)[idx],
                    (curve.ci_high - curve.mean)[idx],
                ]
            )
            ax.errorbar(
                curve.rounds[idx],
                curve.mean[idx],
                yerr=yerr,
                fmt="none",
                ecolor=line.get_color(),
                elinewidth=1.0,
                capsize=2.5,
            )
        ax.set_xlabel(spec.x_label)
        ax.set_ylabel(spec.y_label)
        if spec.title:
            ax.set_title(spec.title)
        ax.legend(loc="upper left")
        ax.margins(x=0.02)
    return fig, ax


def render(spec: FigureSpec) -> Path:
    """Load, draw, and write the figure; returns the output path."""
    curves = [load_curve(f, lab) for f, lab in zip(spec.input_files, spec.labels)]
    fig, _ = build_figure(spec, curves)
    out = Path(spec.output)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    try:
        with mpl.rc_context(_RC):
            if out.suffix.lower() == ".svg":
                fig.savefig(out, format="svg", metadata={"Date": None})
            else:
                fig.savefig(out)
    finally:
        plt.close(fig)
    return out
