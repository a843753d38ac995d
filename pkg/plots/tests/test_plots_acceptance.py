"""Acceptance gate for the figure package, one PASS/FAIL line per criterion.

The input files are synthesized here from the published CSV schema alone;
nothing in this suite imports or shells out to the simulation package.
"""

import matplotlib.pyplot as plt

from threshplots import FigureSpec, build_figure, render

from synth import write_trace


def report(label: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {label}: {status}{suffix}", flush=True)
    assert ok, f"{label}{suffix}"


def test_sweep_figure_renders_deterministically(tmp_path):
    files = tuple(
        str(write_trace(tmp_path / f"cap{c}.csv", scale))
        for c, scale in ((10, 9.0), (20, 6.0), (30, 3.0))
    )
    labels = ("C=10", "C=20", "C=30")
    spec = FigureSpec(
        input_files=files,
        labels=labels,
        output=str(tmp_path / "sweep.svg"),
        title="capacity sweep",
    )

    fig, ax = build_figure(spec)
    try:
        _, legend = ax.get_legend_handles_labels()
        whiskers = [len(c.lines[2][0].get_segments()) for c in ax.containers]
    finally:
        plt.close(fig)

    first = render(spec).read_bytes()
    second = render(spec).read_bytes()
    body = first.decode()

    ok = (
        legend == list(labels)
        and whiskers == [10, 10, 10]
        and all(lab in body for lab in labels)
        and first == second
    )
    report(
        "sweep figure",
        ok,
        f"3 curves labeled {legend}, whiskers per curve {whiskers}, "
        f"re-render byte-identical: {first == second}",
    )
