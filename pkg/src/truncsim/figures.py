"""Matplotlib renderings for the CLI report paths.

Figures are written next to the delimited outputs. Rendering is kept
deterministic: fixed figure sizes, no timestamps in metadata.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .diagnostics import truncated_cdf
from .mvn import Ball, Box, ConvexRegion
from .numerics import normal_interval_prob, normal_pdf
from .univariate import UnivariateTruncationSpec, standardize

_SAVE_KWARGS = {"dpi": 150, "metadata": {"Software": None}}


def _save(fig, path: Path | str) -> None:
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def save_one_sided_table_figure(rows: list[dict], path: Path | str) -> None:
    """Acceptance probability of the optimal one-sided sampler vs truncation point."""
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [r["mu_minus"] for r in rows]
    ax.plot(xs, [r["analytic"] for r in rows], "o-", label="analytic")
    if "empirical" in rows[0]:
        ax.plot(xs, [r["empirical"] for r in rows], "s--", label="empirical")
    ax.set_xlabel(r"lower truncation point $\mu^-$")
    ax.set_ylabel("acceptance probability")
    ax.set_title("One-sided exponential accept-reject acceptance")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def save_two_sided_table_figure(rows: list[dict], path: Path | str) -> None:
    """Best-method acceptance over the two-sided grid, one line per interval width."""
    fig, ax = plt.subplots(figsize=(6, 4))
    widths = sorted({r["width"] for r in rows}, reverse=True)
    for w in widths:
        sub = [r for r in rows if r["width"] == w]
        sub.sort(key=lambda r: r["mu_minus"])
        ax.plot(
            [r["mu_minus"] for r in sub],
            [r["analytic"] for r in sub],
            "o-",
            label=f"width {w:g}",
        )
    ax.set_xlabel(r"lower truncation point $\mu^-$")
    ax.set_ylabel("acceptance probability")
    ax.set_title("Two-sided best-method acceptance")
    ax.grid(True, alpha=0.3)
    ax.legend(title="interval width")
    fig.tight_layout()
    _save(fig, path)


def save_bound_curve_figure(rows: list[dict], path: Path | str) -> None:
    """Crossover curve: smallest upper bound favoring one-sided-then-reject."""
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [r["mu_minus"] for r in rows]
    ax.plot(xs, [r["bound"] for r in rows], label="upper-bound crossover")
    ax.plot(xs, xs, ":", color="gray", label=r"$\mu^+=\mu^-$")
    ax.set_xlabel(r"lower truncation point $\mu^-$")
    ax.set_ylabel(r"upper truncation point $\mu^+$")
    ax.set_title("Method crossover for two-sided intervals")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def save_univariate_histogram(values: np.ndarray, spec: UnivariateTruncationSpec, path: Path | str) -> None:
    """Histogram of draws with the analytic truncated density overlaid."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(values, bins=80, density=True, alpha=0.55, label="draws")
    sb = standardize(spec)
    mass = normal_interval_prob(sb.a, sb.b)
    lo = spec.lower if math.isfinite(spec.lower) else float(np.min(values))
    hi = spec.upper if math.isfinite(spec.upper) else float(np.max(values))
    grid = np.linspace(lo, hi, 400)
    dens = [
        normal_pdf((x - spec.mu) / spec.sigma) / (spec.sigma * mass) for x in grid
    ]
    ax.plot(grid, dens, "r-", lw=1.5, label="analytic density")
    ax.set_xlabel("value")
    ax.set_ylabel("density")
    ax.set_title("Truncated normal draws")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def save_mvn_figure(draws: np.ndarray, region: ConvexRegion, path: Path | str) -> None:
    """Scatter of the first two coordinates with the region outline, or a trace."""
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    if draws.shape[1] >= 2:
        step = max(1, draws.shape[0] // 20000)
        ax.plot(draws[::step, 0], draws[::step, 1], ".", ms=2, alpha=0.4)
        if isinstance(region, Ball) and region.center.shape[0] == 2:
            angles = np.linspace(0.0, 2.0 * np.pi, 256)
            ax.plot(
                region.center[0] + region.radius * np.cos(angles),
                region.center[1] + region.radius * np.sin(angles),
                "r-",
                lw=1.2,
            )
        elif isinstance(region, Box) and region.lower.shape[0] == 2:
            lo, hi = region.lower, region.upper
            if np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)):
                ax.plot(
                    [lo[0], hi[0], hi[0], lo[0], lo[0]],
                    [lo[1], lo[1], hi[1], hi[1], lo[1]],
                    "r-",
                    lw=1.2,
                )
        ax.set_xlabel(r"$\theta_1$")
        ax.set_ylabel(r"$\theta_2$")
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_title("Restricted multivariate normal draws")
    else:
        ax.plot(draws[:, 0], lw=0.5)
        ax.set_xlabel("iteration")
        ax.set_ylabel(r"$\theta_1$")
        ax.set_title("Chain trace")
    fig.tight_layout()
    _save(fig, path)
