"""Figures for sweeps, slow-variation profiles and covariance-limit reports.

Files are written with the Agg backend; the format follows the file
extension (``.svg`` or ``.png``).  SVG output is byte-reproducible: the
date stamp is dropped and element ids use a fixed salt.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_fcond", "plot_lemma1", "plot_sweep", "save_figure"]


def save_figure(fig, path):
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in (".svg", ".png"):
        raise ValueError(f"plot files must end in .svg or .png, got {path.name!r}")
    with matplotlib.rc_context({"svg.hashsalt": "screenlab", "svg.fonttype": "none"}):
        if suffix == ".svg":
            fig.savefig(path, format="svg", metadata={"Date": None})
        else:
            fig.savefig(path, format="png", dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_sweep(sweep, path):
    """Screening ratio against eps on a log axis, with limit lines."""
    good = sweep.successful
    eps = np.array([r.epsilon for r in good])
    rho = np.array([r.ratio for r in good])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(eps, rho, "o-", color="k", ms=4, label="ratio")
    ex = sweep.extrapolation
    if ex is not None and math.isfinite(ex.limit):
        ax.axhline(ex.limit, color="tab:blue", ls="--", lw=1, label=f"extrapolated {ex.limit:.6f}")
    if sweep.reference_limit is not None:
        ax.axhline(sweep.reference_limit, color="tab:red", ls=":", lw=1, label=f"reference {sweep.reference_limit:.6f}")
    ax.set_xlabel(r"$\varepsilon$")
    ax.set_ylabel("mse(near + far) / mse(near)")
    ax.set_title(sweep.scenario)
    ax.invert_xaxis()
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return save_figure(fig, path)


def plot_fcond(profile, path, title=""):
    """``c(w)`` on log-log axes with the verdict threshold."""
    fig, ax = plt.subplots(figsize=(6, 4))
    vals = np.where(np.isfinite(profile.values), profile.values, np.nan)
    ax.loglog(profile.omegas, vals, "o-", color="k", ms=3)
    ax.axhline(profile.threshold, color="tab:red", ls=":", lw=1, label=f"threshold {profile.threshold:g}")
    for w in profile.violations:
        ax.axvline(w, color="tab:orange", lw=0.5)
    ax.set_xlabel(r"$|\omega|$")
    ax.set_ylabel(r"$\sup_{|v|<R} |f(\omega+v)/f(\omega) - 1|$")
    ax.set_title(f"{title} ({profile.verdict}, heuristic)".strip())
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return save_figure(fig, path)


def plot_lemma1(report, path):
    """Largest entrywise deviation from the target against eps."""
    steps = [s for s in report.steps if s.matrix is not None]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog([s.epsilon for s in steps], [max(s.max_abs_deviation, 1e-300) for s in steps], "o-", color="k", ms=4)
    ax.set_xlabel(r"$\varepsilon$")
    ax.set_ylabel("max |entry - target|")
    ax.set_title(f"{report.instance} ({report.verdict})")
    ax.invert_xaxis()
    fig.tight_layout()
    return save_figure(fig, path)
