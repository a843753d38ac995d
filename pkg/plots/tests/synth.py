"""Synthesized trace files for the figure tests.

Built from the published CSV schema alone; nothing here touches the
simulation package.
"""

import numpy as np


def write_trace(path, scale, rows=400):
    """A schema-conforming trace: logarithmic mean, widening band."""
    t = np.arange(1, rows + 1)
    mean = scale * np.log(t + 1.0)
    half = 0.05 * scale * np.sqrt(t / rows)
    lines = ["round,mean_regret,ci_low,ci_high"]
    for i in range(rows):
        lines.append(
            f"{int(t[i])},{float(mean[i])!r},"
            f"{float(mean[i] - half[i])!r},{float(mean[i] + half[i])!r}"
        )
    path.write_text("\n".join(lines) + "\n")
    return path
