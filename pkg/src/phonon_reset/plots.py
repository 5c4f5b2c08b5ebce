"""Static figures: swap-count staircase, posterior density, reset trajectory."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np
from matplotlib.figure import Figure

from .thermometry import PosteriorResult


def sweep_staircase(n: Sequence[int], p: Sequence[float],
                    reference: Mapping[int, float] | None = None) -> Figure:
    fig = Figure(figsize=(4.5, 3.4))
    ax = fig.add_subplot()
    n = np.asarray(n)
    ax.step(n, p, where="mid", color="C0", label="simulation")
    ax.plot(n, p, "o", color="C0", ms=4)
    if reference:
        ks = sorted(k for k in reference if k in set(n.tolist()))
        ax.plot(ks, [reference[k] for k in ks], "s", color="C3", mfc="none", label="reference")
    ax.set_yscale("log")
    ax.set_xticks(n)
    ax.set_xlabel("number of swaps n")
    ax.set_ylabel("residual excited population p")
    ax.legend(frameon=False)
    fig.tight_layout()
    return fig


def posterior_density(post: PosteriorResult, n_points: int = 400) -> tuple[Figure, np.ndarray, np.ndarray]:
    """Density plot with mean and credible-interval markers; also returns the sampled curve."""
    span = post.ci_high + 4.0 * post.likelihood_sigma
    hi = min(post.prior_high, max(span, post.ci_high * 1.5))
    x = np.linspace(post.prior_low, hi, n_points)
    y = post.pdf(x)
    fig = Figure(figsize=(4.5, 3.4))
    ax = fig.add_subplot()
    ax.plot(x, y, color="C0")
    inside = (x >= post.ci_low) & (x <= post.ci_high)
    ax.fill_between(x, 0, y, where=inside, color="C0", alpha=0.25,
                    label=f"{post.ci_level:.0%} interval")
    ax.axvline(post.mean, color="C3", ls="--", label=f"mean {post.mean:.3g}")
    ax.set_xlabel("excited population p")
    ax.set_ylabel("posterior density")
    ax.set_ylim(bottom=0)
    ax.ticklabel_format(axis="x", style="sci", scilimits=(-3, 3))
    ax.legend(frameon=False)
    fig.tight_layout()
    return fig, x, y


def reset_trajectory(times: Sequence[float], qubit: Sequence[float],
                     modes: Sequence[Sequence[float]]) -> Figure:
    fig = Figure(figsize=(5.0, 3.4))
    ax = fig.add_subplot()
    ax.plot(times, qubit, color="k", label="qubit e")
    modes = np.asarray(modes)
    for i in range(modes.shape[1] if modes.ndim == 2 else 0):
        ax.plot(times, modes[:, i], lw=1, label=f"mode {i + 1} (n=1)")
    ax.set_yscale("log")
    ax.set_ylim(1e-6, 1.5)
    ax.set_xlabel("time (us)")
    ax.set_ylabel("population")
    ax.legend(frameon=False, fontsize=7)
    fig.tight_layout()
    return fig
