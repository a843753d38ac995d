"""Figures from regret-trace CSV files.

Input is the experiment harness's CSV interface, four columns:
``round,mean_regret,ci_low,ci_high``. Nothing here imports the simulation
package; any file with that schema plots.
"""

__version__ = "0.1.0"

import matplotlib

matplotlib.use("Agg")  # file output only, never a display

from .curves import Curve, load_curve
from .figure import FigureSpec, build_figure, render

__all__ = [
    "Curve",
    "FigureSpec",
    "__version__",
    "build_figure",
    "load_curve",
    "render",
]
