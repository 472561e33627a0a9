"""Matplotlib figures for the report path; written next to delimited output.

These are human-facing summaries, not part of the byte-deterministic
surface (that is the SVG renderer's job).
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path
from typing import Sequence


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_density_figure(
    curve: Sequence[tuple[int, Fraction]], path: str | Path, title: str = "density gap"
) -> None:
    plt = _pyplot()
    horizons = [h for h, _ in curve]
    gaps = [float(g) for _, g in curve]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(horizons, gaps, marker="o", color="tab:blue")
    ax.set_xlabel("horizon stage")
    ax.set_ylabel("worst gap")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_counterexample_figure(grid_n: int, path: str | Path) -> None:
    from .fans import counterexample_g

    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ys = [Fraction(i, grid_n) for i in range(grid_n + 1)]
    for x, color in ((Fraction(0), "tab:blue"), (Fraction(1, 4), "tab:green"),
                     (Fraction(1, 2), "tab:red"), (Fraction(3, 4), "tab:orange")):
        values = [float(counterexample_g(x, y)[1]) for y in ys]
        ax.plot([float(y) for y in ys], values, label=f"x={x}", color=color)
    ax.set_xlabel("y")
    ax.set_ylabel("second coordinate of the image")
    ax.set_title("end-point shear per column")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_fan_figure(fan, path: str | Path, title: str = "fan stage") -> None:
    from .render import fan_plane_point

    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 5))
    for i, ep in enumerate(fan.endpoints):
        tip = fan_plane_point(ep.address, ep.level, Fraction(1))
        color = "crimson" if fan.skeleton is not None and i in fan.skeleton else "black"
        ax.plot([0.5, float(tip[0])], [0.0, float(tip[1])], color="black", lw=0.8)
        ax.plot([float(tip[0])], [float(tip[1])], marker="o", ms=3, color=color)
    ax.set_xlim(0, 1)
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
