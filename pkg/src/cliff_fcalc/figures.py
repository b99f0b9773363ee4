"""Plot rendering for the CLI report commands.

Each function takes the already-assembled report lines (plain dicts), writes
one PNG into the requested directory, and returns the file path. Rendering is
strictly optional; nothing here feeds back into the numerical checks.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _prepare(directory: str, name: str) -> str:
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, name)


def render_verify_residuals(lines: list[dict], directory: str) -> str:
    """Scatter of residuals per equation across trials, log scale."""
    path = _prepare(directory, "verify_residuals.png")
    by_eq: dict[str, list[tuple[int, float]]] = {}
    tols: dict[str, float] = {}
    for line in lines:
        if line.get("check") == "equation":
            key = line["equation_id"]
            by_eq.setdefault(key, []).append((line["trial"], line["residual_rel"]))
            tols[key] = line["tolerance"]
        elif line.get("check") == "lr_f_resolvent":
            key = f"lr_{line['side']}"
            by_eq.setdefault(key, []).append((line["trial"], line["residual_rel"]))
            tols[key] = line["tolerance"]
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for key in sorted(by_eq):
        pts = by_eq[key]
        ax.scatter([p[0] for p in pts], [max(p[1], 1e-18) for p in pts],
                   s=14, label=key)
    if tols:
        ax.axhline(min(tols.values()), color="grey", lw=0.8, ls="--",
                   label="tightest tolerance")
    ax.set_yscale("log")
    ax.set_xlabel("trial")
    ax.set_ylabel("relative residual")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_series_convergence(lines: list[dict], directory: str) -> str:
    """Truncation error against M, one curve per requested ratio."""
    path = _prepare(directory, "series_convergence.png")
    by_ratio: dict[float, list[tuple[int, float]]] = {}
    for line in lines:
        if line.get("check") == "series" and "M" in line:
            by_ratio.setdefault(line["ratio"], []).append((line["M"], line["abs_error"]))
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for ratio in sorted(by_ratio):
        pts = sorted(by_ratio[ratio])
        ax.semilogy([p[0] for p in pts], [max(p[1], 1e-18) for p in pts],
                    marker=".", ms=3, label=f"|x|/|s| = {ratio:g}")
    ax.set_xlabel("truncation degree M")
    ax.set_ylabel("absolute truncation error")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_projector_layout(spheres, circles, directory: str) -> str:
    """Spectral sphere traces in the slice plane with the contours used."""
    path = _prepare(directory, "projector_layout.png")
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    for sphere in spheres:
        trace = plt.Circle((sphere.center, 0.0), sphere.radius,
                           fill=False, color="tab:red", lw=1.0)
        ax.add_patch(trace)
    for c0, c1, radius in circles:
        ax.add_patch(plt.Circle((c0, c1), radius, fill=False,
                                color="tab:blue", ls="--", lw=0.9))
    reach = max(
        [abs(s.center) + s.radius for s in spheres]
        + [abs(c0) + r for c0, _, r in circles]
    )
    ax.set_xlim(-1.2 * reach, 1.2 * reach)
    ax.set_ylim(-1.2 * reach, 1.2 * reach)
    ax.set_aspect("equal")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im (slice)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
