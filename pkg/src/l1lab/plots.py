"""Figure rendering for experiment reports.

Each experiment that writes a CSV also gets a PNG next to it. The Agg
backend is forced before pyplot loads so runs work headless; figures are
closed after saving to keep batch runs from accumulating state.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_DPI = 150


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def histogram(path, values, title: str, xlabel: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(values, bins=40, color="#4878a8", edgecolor="black", linewidth=0.4)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    _save(fig, path)


def line_plot(path, xs, ys, title: str, xlabel: str, ylabel: str, logy: bool = False) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    if logy:
        ax.semilogy(xs, ys, marker="o", markersize=3, color="#4878a8")
    else:
        ax.plot(xs, ys, marker="o", markersize=3, color="#4878a8")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def scatter(path, xs, ys, title: str, xlabel: str, ylabel: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(xs, ys, s=12, color="#a85448", alpha=0.7)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def bar_pair(path, labels, values, title: str, ylabel: str) -> None:
    fig, ax = plt.subplots(figsize=(4.5, 4))
    ax.bar(labels, values, color=["#4878a8", "#a85448"][: len(values)])
    ax.set_title(title)
    ax.set_ylabel(ylabel)
    _save(fig, path)


def step_curve(path, breakpoints, knot_values, title: str) -> None:
    """Piecewise-linear gauge curve with its breakpoints marked."""
    fig, ax = plt.subplots(figsize=(6, 4))
    top = breakpoints[-1] * 1.5 if breakpoints else 1.0
    xs = [0.0] + list(breakpoints) + [top]
    final_slope = len(breakpoints)
    ys = [0.0] + list(knot_values) + [knot_values[-1] + final_slope * (top - breakpoints[-1])]
    ax.plot(xs, ys, color="#4878a8")
    ax.plot(breakpoints, knot_values, "o", markersize=4, color="#a85448")
    ax.set_title(title)
    ax.set_xlabel("t")
    ax.set_ylabel("gauge value")
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def eps_witness_curves(path, eps, deltas, thresholds, title: str) -> None:
    """Clause witnesses against the tested scales; missing witnesses skipped."""
    fig, ax = plt.subplots(figsize=(6, 4))
    d_pts = [(e, d) for e, d in zip(eps, deltas) if d is not None]
    m_pts = [(e, m) for e, m in zip(eps, thresholds) if m is not None]
    if d_pts:
        ax.loglog([e for e, _ in d_pts], [d for _, d in d_pts], "o-", label="delta", color="#4878a8")
    if m_pts:
        ax.loglog([e for e, _ in m_pts], [max(m, 1e-12) for _, m in m_pts], "s-", label="M", color="#a85448")
    ax.set_title(title)
    ax.set_xlabel("eps")
    ax.set_ylabel("witness")
    if d_pts or m_pts:
        ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)
