"""The four figure kinds: energy decay, discrepancy sweep, density history, snapshot."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .readers import (SchemaError, energy_monotone_verdict, read_diagnostics,
                      read_snapshot, read_sweep, sibling_manifest)


def _run_label(path) -> str:
    man = sibling_manifest(path)
    if man and "derived" in man and "eps" in man["derived"]:
        return f"eps = {man['derived']['eps']:g}"
    return Path(path).parent.name or Path(path).stem


def plot_energy(inputs, out) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    notes = []
    for path in inputs:
        data = read_diagnostics(path)
        label = _run_label(path)
        ax.plot(data["t"], data["energy"], lw=1.5, label=label)
        mono, max_rise = energy_monotone_verdict(data)
        if mono:
            notes.append(f"{label}: non-increasing")
        else:
            notes.append(f"{label}: INCREASES (max rise {max_rise:.3e})")
    ax.set_xlabel("t")
    ax.set_ylabel("free energy")
    ax.set_title("energy decay")
    ax.legend(fontsize=8)
    ax.text(0.02, 0.02, "\n".join(notes), transform=ax.transAxes, fontsize=7,
            va="bottom", family="monospace")
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def plot_discrepancy_sweep(inputs, out) -> None:
    if len(inputs) != 1:
        raise SchemaError("discrepancy-sweep takes exactly one sweep.csv")
    rows, slope_from_file = read_sweep(inputs[0])
    ok = [r for r in rows if r["status"] == "ok"]
    if len(ok) < 3:
        raise SchemaError(f"{inputs[0]}: need at least 3 successful eps rows, "
                          f"got {len(ok)}")
    eps = np.array([float(r["eps"]) for r in ok])
    vals = np.array([float(r["xi_time_integral"]) for r in ok])
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.loglog(eps, np.maximum(vals, 1e-300), "o-", lw=1.5)
    positive = vals > 0
    if np.sum(positive) >= 2 and np.ptp(np.log(vals[positive])) > 1e-12:
        slope = float(np.polyfit(np.log(eps[positive]),
                                 np.log(vals[positive]), 1)[0])
    else:
        slope = 0.0
    shown = slope_from_file if not math.isnan(slope_from_file) else slope
    ax.set_xlabel("eps")
    ax.set_ylabel("time-integrated |xi|(Omega)")
    ax.set_title("discrepancy vanishing under eps refinement")
    ax.text(0.05, 0.9, f"fitted log-log slope: {shown:.3f}",
            transform=ax.transAxes, fontsize=9)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def plot_density(inputs, out) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for path in inputs:
        data = read_diagnostics(path)
        ax.plot(data["t"], data["density_ratio_max"], lw=1.5,
                label=_run_label(path))
    ax.set_xlabel("t")
    ax.set_ylabel("max sampled density ratio")
    ax.set_title("interface density ratio history")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


def plot_snapshot_overlay(inputs, out, manifest: dict | None = None) -> None:
    if len(inputs) != 1:
        raise SchemaError("snapshot-overlay takes exactly one snapshot")
    u, h, eps, t = read_snapshot(inputs[0])
    man = manifest if manifest is not None else sibling_manifest(inputs[0])
    ny, nx = u.shape
    domain = None
    if man:
        d = man.get("config", {}).get("domain")
        if d:
            domain = (d["x_min"], d["x_max"], d["y_min"], d["y_max"])
    if domain is None:
        domain = (0.0, nx * h, 0.0, ny * h)
    x = domain[0] + (np.arange(nx) + 0.5) * h
    y = domain[2] + (np.arange(ny) + 0.5) * h

    fig, ax = plt.subplots(figsize=(5.0, 5.0 * ny / nx))
    im = ax.contourf(x, y, u, levels=21, cmap="RdBu_r", vmin=-1, vmax=1)
    ax.contour(x, y, u, levels=[0.0], colors="k", linewidths=1.5)
    if man:
        obs = man.get("config", {}).get("obstacles", {})
        r0 = obs.get("r0", 0.0)
        delta = obs.get("delta", 0.0)
        for centers, color in ((obs.get("plus", []), "0.2"),
                               (obs.get("minus", []), "0.5")):
            for cx, cy in centers:
                ax.add_patch(plt.Circle((cx, cy), r0, fill=True,
                                        color=color, alpha=0.6))
                ax.add_patch(plt.Circle((cx, cy), r0 + delta, fill=False,
                                        color=color, ls="--", lw=1.0))
    ax.set_aspect("equal")
    ax.set_title(f"u at t = {t:g} (eps = {eps:g})")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)


KINDS = {
    "energy": plot_energy,
    "discrepancy-sweep": plot_discrepancy_sweep,
    "density": plot_density,
    "snapshot-overlay": plot_snapshot_overlay,
}
