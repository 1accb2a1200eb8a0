"""Figures rendered alongside the experiment reports.

All figures are written straight to files (Agg backend); nothing is shown
interactively.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_report_figures"]


def _save(fig, outdir, name, written):
    path = os.path.join(outdir, name)
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    written.append(path)


def _plot_residuals(rows, title):
    fig, ax = plt.subplots(figsize=(6, 3.2))
    eps_vals = sorted({r["eps"] for r in rows})
    for e in eps_vals:
        sel = [r for r in rows if r["eps"] == e]
        ax.semilogy([r["function"] for r in sel], [max(r["residual"], 1e-18) for r in sel],
                    "o-", label=f"eps={e}")
    ax.set_xlabel("test function")
    ax.set_ylabel("relative residual")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    return fig


def _plot_decay(rows):
    fig, ax = plt.subplots(figsize=(6, 3.6))
    eps_vals = sorted({r["eps"] for r in rows})
    for e in eps_vals:
        sel = [r for r in rows if r["eps"] == e and r["delta"] >= 0 and r["measurable"]]
        x = np.array([r["delta"] ** 2 for r in sel])
        y = np.array([r["norm"] for r in sel])
        ax.semilogy(x, y, "o", label=f"eps={e}")
        if len(sel) >= 3:
            m, b = np.polyfit(x[1:], np.log(y[1:]), 1)
            xs = np.linspace(x.min(), x.max(), 50)
            ax.semilogy(xs, np.exp(m * xs + b), "--", lw=1,
                        label=f"fit slope {m:.3f} (target {-1/(4*e):.3f})")
    ax.set_xlabel(r"separation$^2$")
    ax.set_ylabel("product operator norm")
    ax.set_title("norm decay vs support separation")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    return fig


def _plot_norm_sweep(rows, ykeys, title):
    fig, ax = plt.subplots(figsize=(6, 3.2))
    eps = [r["eps"] for r in rows]
    for key in ykeys:
        if rows and key in rows[0]:
            ax.plot(eps, [r[key] for r in rows], "o-", label=key)
    ax.set_xlabel("eps")
    ax.set_ylabel("operator norm")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    return fig


def render_report_figures(result: dict, outdir: str) -> list:
    """Render the figures appropriate to one experiment result; returns paths."""
    written = []
    name = result["experiment"]
    tables = result.get("tables", {})
    if name in ("fbi-isometry", "reconstruct"):
        key = "isometry" if name == "fbi-isometry" else "reconstruct"
        if tables.get(key):
            _save(_plot_residuals(tables[key], name), outdir, f"{name}.png", written)
    elif name == "identity-op":
        rows = tables.get("identity", [])
        if rows:
            fig, ax = plt.subplots(figsize=(6, 3.2))
            ax.semilogy(range(len(rows)), [max(r["residual"], 1e-18) for r in rows], "o-")
            ax.set_xticks(range(len(rows)))
            ax.set_xticklabels([f'{r["thetas"]}\n eps={r["eps"]}' for r in rows],
                               fontsize=7)
            ax.set_ylabel("relative residual")
            ax.set_title("identity operator value check")
            ax.grid(True, which="both", alpha=0.3)
            _save(fig, outdir, "identity-op.png", written)
    elif name == "norm-bounds":
        rows = tables.get("norms", [])
        if rows:
            _save(_plot_norm_sweep(rows, ["antiwick", "antiwick_bound", "corfull",
                                          "corfull_bound", "schur_bound"],
                                   "measured norms vs bounds"),
                  outdir, "norm-bounds.png", written)
    elif name == "separation-decay":
        rows = tables.get("decay", [])
        if rows:
            _save(_plot_decay(rows), outdir, "separation-decay.png", written)
    elif name == "full-theorem":
        rows = tables.get("norms", [])
        if rows:
            _save(_plot_norm_sweep(rows, ["norm"], "operator norm across eps"),
                  outdir, "full-theorem.png", written)
    elif name == "adjoint-check":
        rows = tables.get("adjoint", [])
        if rows:
            fig, ax = plt.subplots(figsize=(5, 3))
            ax.semilogy([r["eps"] for r in rows],
                        [max(r["residual"], 1e-18) for r in rows], "o-")
            ax.set_xlabel("eps")
            ax.set_ylabel("Frobenius residual after phase fit")
            ax.set_title("adjoint structure check")
            ax.grid(True, which="both", alpha=0.3)
            _save(fig, outdir, "adjoint-check.png", written)
    elif name in ("matrix-sqrt", "symplectic-check"):
        key = "sqrt" if name == "matrix-sqrt" else "maps"
        rows = tables.get(key, [])
        if rows:
            fig, ax = plt.subplots(figsize=(6, 3))
            if name == "matrix-sqrt":
                labels = [r["case"] for r in rows]
                vals = [max(r["err"], 1e-18) for r in rows]
            else:
                labels = [r["map"] for r in rows]
                vals = [max(max(r["symplectic_residual"], r["action_fd_residual"]),
                            1e-18) for r in rows]
            ax.bar(range(len(rows)), vals)
            ax.set_yscale("log")
            ax.set_xticks(range(len(rows)))
            ax.set_xticklabels(labels, fontsize=7, rotation=20)
            ax.set_ylabel("residual")
            ax.set_title(name)
            ax.grid(True, axis="y", which="both", alpha=0.3)
            _save(fig, outdir, f"{name}.png", written)
    return written
