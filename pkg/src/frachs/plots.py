"""Figure rendering for the CLI report path.

Each function reads the corresponding CSV artifact and writes a PNG next to
it, so plots always reflect exactly what was emitted.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_symbol", "plot_ground", "plot_spectrum", "plot_scan", "plot_curve"]

_DPI = 150


def _load_csv(path: Path, bool_cols: tuple[int, ...] = ()) -> np.ndarray:
    conv = {c: (lambda tok: 1.0 if tok.strip() == "true" else 0.0) for c in bool_cols}
    return np.loadtxt(path, delimiter=",", skiprows=1, converters=conv or None, ndmin=2)


def plot_symbol(csv_path: Path, png_path: Path):
    data = _load_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    for ell in np.unique(data[:, 0]).astype(int):
        sel = data[:, 0] == ell
        ax.plot(data[sel, 1], data[sel, 2], label=f"$\\ell = {ell}$")
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel(r"$\Lambda_\ell(\tau)$")
    ax.set_title("Sector multiplier")
    ax.legend()
    fig.tight_layout()
    fig.savefig(png_path, dpi=_DPI)
    plt.close(fig)


def plot_ground(profile_csv: Path, summary_json: Path, png_path: Path):
    data = _load_csv(profile_csv)
    summary = json.loads(Path(summary_json).read_text())
    n = summary["params"]["n"]
    s = summary["params"]["s"]
    zeta, v = data[:, 0], data[:, 1]
    r = np.exp(-zeta)
    z = r ** (-(n - 2.0 * s) / 2.0) * v

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].semilogy(zeta, np.abs(v))
    axes[0].set_xlabel(r"$\zeta$")
    axes[0].set_ylabel(r"$v(\zeta)$")
    axes[0].set_title("Log-radial profile")
    order = np.argsort(r)
    axes[1].loglog(r[order], z[order])
    axes[1].set_xlabel(r"$r$")
    axes[1].set_ylabel(r"$z(r)$")
    axes[1].set_title("Reconstructed radial solution")
    fig.tight_layout()
    fig.savefig(png_path, dpi=_DPI)
    plt.close(fig)


def plot_spectrum(csv_path: Path, q: float, png_path: Path):
    data = _load_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    for ell in np.unique(data[:, 0]).astype(int):
        sel = data[:, 0] == ell
        ax.plot(np.full(sel.sum(), ell), data[sel, 2], "o", label=f"$\\ell = {ell}$")
    ax.axhline(q - 1.0, color="k", linestyle="--", linewidth=1, label=r"$q-1$")
    ax.axhline(1.0, color="gray", linestyle=":", linewidth=1)
    ax.set_xlabel(r"sector $\ell$")
    ax.set_ylabel(r"$\mu$")
    ax.set_title("Linearization spectrum by sector")
    ax.legend()
    fig.tight_layout()
    fig.savefig(png_path, dpi=_DPI)
    plt.close(fig)


def plot_scan(csv_path: Path, png_path: Path, threshold: float | None = None):
    data = _load_csv(csv_path, bool_cols=(4,))
    ok = data[:, 4] > 0.5
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(data[ok, 0], data[ok, 3], "o-")
    ax.axhline(0.0, color="k", linewidth=1)
    if threshold is not None:
        ax.axvline(threshold, color="r", linestyle="--", linewidth=1,
                   label=f"$\\lambda^* \\approx {threshold:.4g}$")
        ax.legend()
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"$\nu_1(\lambda) - (q-1)$")
    ax.set_title("Degree-1 stability indicator")
    fig.tight_layout()
    fig.savefig(png_path, dpi=_DPI)
    plt.close(fig)


def plot_curve(csv_path: Path, png_path: Path):
    data = _load_csv(csv_path, bool_cols=(5,))
    ok = data[:, 5] > 0.5
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    axes[0].plot(data[ok, 0], data[ok, 1], "o-")
    axes[0].set_xlabel(r"$\log t$")
    axes[0].set_ylabel("reduced energy")
    axes[0].set_title("Reduced energy along the dilation family")
    axes[1].plot(data[ok, 0], data[ok, 2], "o-")
    axes[1].axhline(0.0, color="k", linewidth=1)
    axes[1].set_xlabel(r"$\log t$")
    axes[1].set_ylabel(r"$\gamma$")
    axes[1].set_title("Constraint multiplier")
    fig.tight_layout()
    fig.savefig(png_path, dpi=_DPI)
    plt.close(fig)
