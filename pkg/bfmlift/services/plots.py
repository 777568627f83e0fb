"""
BFMLIFT — Critical-value scatter

Teleman values of critical points on T^v_C, drawn per coordinate as
(log|z_k|, arg z_k). Kernel membership shows up as points on the origin.
"""
from __future__ import annotations

import cmath
import math
from pathlib import Path
from typing import List, Tuple

import matplotlib

matplotlib.use("Agg")
from matplotlib import pyplot as plt  # noqa: E402

import structlog  # noqa: E402

from bfmlift.core.schemas import Report, SolveOut  # noqa: E402

logger = structlog.get_logger(__name__)

MARKERS = ("o", "s", "^", "D", "v", "P", "X", "*")


def _log_polar(solve: SolveOut) -> List[Tuple[float, float]]:
    out = []
    for p in solve.points:
        for re, im in p.teleman_value:
            z = complex(re, im)
            if z != 0:
                out.append((math.log(abs(z)), cmath.phase(z)))
    return out


def critical_plot(report: Report, path: Path) -> Path:
    """Write the SVG scatter; raises ValueError when the report has no verify section."""
    if report.verify is None:
        raise ValueError("no verify section: run with the verify stage to plot critical values")
    families = [report.verify.critical] + list(report.verify.constrained)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for k, solve in enumerate(families):
        points = _log_polar(solve)
        if not points:
            continue
        xs, ys = zip(*points)
        ax.scatter(xs, ys, marker=MARKERS[k % len(MARKERS)], s=28, alpha=0.8, label=solve.constraint)
    ax.axhline(0.0, color="0.7", lw=0.6)
    ax.axvline(0.0, color="0.7", lw=0.6)
    ax.set_xlabel("log |z|")
    ax.set_ylabel("arg z")
    ax.set_ylim(-math.pi - 0.2, math.pi + 0.2)
    ax.set_title("Teleman values of critical points")
    ax.legend(fontsize="small", loc="best")
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps the SVG byte-stable across runs
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("critical_plot_written", path=str(path), families=len(families))
    return path
