"""Figure rendering from the emitted CSVs.

Each function reads a CSV produced by the runners and writes a PNG next to
it, returning the file name. The CSVs stay the data contract; figures are a
convenience for eyeballing runs.
"""

from __future__ import annotations

import csv
import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

DPI = 150


def _read_csv(path: str) -> dict[str, list[str]]:
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols: dict[str, list[str]] = {name: [] for name in reader.fieldnames}
        for row in reader:
            for name, val in row.items():
                cols[name].append(val)
    return cols


def _floats(cells: list[str]) -> np.ndarray:
    return np.array([float(c) if c not in ("", None) else math.nan for c in cells])


def plot_trajectory(csv_path: str) -> str:
    cols = _read_csv(csv_path)
    t = _floats(cols["t"])
    d2 = _floats(cols["D2"])
    chi = _floats(cols["chi"])
    big_l = _floats(cols["L"])
    qsl = _floats(cols["qsl_rhs"])
    ldot = _floats(cols["ldot_exact"])

    fig, axes = plt.subplots(1, 3, figsize=(12, 3.4))
    axes[0].plot(t, d2, label="$D^2$")
    axes[0].plot(t, chi, "--", label=r"$\chi$")
    axes[0].plot(t, big_l, ":", label="$L$")
    axes[0].set_xlabel("t")
    axes[0].legend(frameon=False)
    axes[1].plot(np.sqrt(np.clip(d2, 0, None)), chi)
    axes[1].set_xlabel("D")
    axes[1].set_ylabel(r"$\chi$")
    axes[2].plot(t, ldot, label=r"$\dot L$ exact")
    axes[2].plot(t, qsl, "--", label="speed-limit bound")
    axes[2].set_xlabel("t")
    axes[2].legend(frameon=False)
    fig.tight_layout()
    out = os.path.join(os.path.dirname(csv_path), "trajectory.png")
    fig.savefig(out, dpi=DPI)
    plt.close(fig)
    return os.path.basename(out)


def plot_sweep(csv_path: str) -> str:
    cols = _read_csv(csv_path)
    k = _floats(cols["k"])
    dw = _floats(cols["delta_omega"])
    d_col = "d_at_t" if "d_at_t" in cols else "d_cl_at_t"
    d = _floats(cols[d_col])
    ks = np.unique(k)
    dws = np.unique(dw)
    grid = np.full((ks.size, dws.size), math.nan)
    for kv, wv, dv in zip(k, dw, d):
        grid[np.searchsorted(ks, kv), np.searchsorted(dws, wv)] = dv

    fig, ax = plt.subplots(figsize=(5, 4))
    mesh = ax.pcolormesh(dws, ks, grid, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=f"{d_col} (t = t_obs)")
    ax.plot(dws, dws, "w--", lw=1)
    ax.plot(dws, -dws, "w--", lw=1)
    ax.set_ylim(ks.min(), ks.max())
    ax.set_xlabel(r"$\omega_2-\omega_1$")
    ax.set_ylabel("k")
    fig.tight_layout()
    out = os.path.join(os.path.dirname(csv_path), "sweep.png")
    fig.savefig(out, dpi=DPI)
    plt.close(fig)
    return os.path.basename(out)


def plot_gaussian_sample(out_dir: str) -> str:
    samples = _read_csv(os.path.join(out_dir, "samples.csv"))
    curves = _read_csv(os.path.join(out_dir, "bound_curves.csv"))

    fig, ax = plt.subplots(figsize=(5.2, 4))
    d = _floats(samples["D"])
    n_show = min(d.size, 1000)
    ax.scatter(d[:n_show], _floats(samples["chi_quantum"])[:n_show], s=6,
               alpha=0.4, label="samples (quantum $\\chi$)")
    dg = _floats(curves["D"])
    ax.plot(dg, _floats(curves["chi_min_quantum"]), "k-", label=r"$\chi_{\min}$")
    ax.plot(dg, _floats(curves["chi_min_classical"]), "k--",
            label=r"$\chi_{\min}^{(\mathrm{cl})}$")
    for name, style in (("hull_quantum.csv", "-"), ("hull_classical.csv", ":")):
        hull = _read_csv(os.path.join(out_dir, name))
        hx, hy = _floats(hull["D"]), _floats(hull["chi"])
        if hx.size >= 3:
            hx = np.append(hx, hx[0])
            hy = np.append(hy, hy[0])
            ax.plot(hx, hy, style, color="tab:red", lw=1)
    ax.set_xlim(0, 2.05)
    ax.set_ylim(-0.5, max(6.0, np.nanquantile(_floats(samples["chi_quantum"]), 0.99)
                          if d.size else 6.0))
    ax.set_xlabel("D")
    ax.set_ylabel(r"$\chi$")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    out = os.path.join(out_dir, "samples.png")
    fig.savefig(out, dpi=DPI)
    plt.close(fig)
    return os.path.basename(out)


def plot_classical(csv_path: str) -> str:
    cols = _read_csv(csv_path)
    t = _floats(cols["t"])
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.4))
    axes[0].plot(t, _floats(cols["D2_cl"]))
    axes[0].set_xlabel("t")
    axes[0].set_ylabel(r"$D^2$")
    axes[1].plot(t, _floats(cols["phase_diff_circ_var"]))
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("phase circ. var.")
    axes[1].set_ylim(-0.05, 1.05)
    axes[2].plot(t, _floats(cols["mean_r1_sq"]), label=r"$\langle r_1^2\rangle$")
    axes[2].plot(t, _floats(cols["mean_r2_sq"]), label=r"$\langle r_2^2\rangle$")
    axes[2].set_xlabel("t")
    axes[2].legend(frameon=False)
    fig.tight_layout()
    out = os.path.join(os.path.dirname(csv_path), "classical.png")
    fig.savefig(out, dpi=DPI)
    plt.close(fig)
    return os.path.basename(out)


def plot_bounds(csv_path: str) -> str:
    cols = _read_csv(csv_path)
    n = _floats(cols["n"])
    kap = _floats(cols["kappa"])
    d = _floats(cols["D"])
    bq = _floats(cols["chi_min_quantum"])
    bc = _floats(cols["chi_min_classical"])

    fig, ax = plt.subplots(figsize=(5.2, 4))
    for nv in np.unique(n[~np.isnan(n)]):
        for kv in np.unique(kap[~np.isnan(kap)]):
            sel = (n == nv) & (kap == kv)
            if not np.any(sel):
                continue
            label = f"N={int(nv)}, kappa={kv:g}"
            ax.plot(d[sel], bq[sel], label=f"{label} (quantum)")
            ax.plot(d[sel], bc[sel], "--", label=f"{label} (classical)")
    ax.set_xlabel("D")
    ax.set_ylabel(r"$\chi_{\min}$")
    ax.legend(frameon=False, fontsize=7)
    fig.tight_layout()
    out = os.path.join(os.path.dirname(csv_path), "bounds.png")
    fig.savefig(out, dpi=DPI)
    plt.close(fig)
    return os.path.basename(out)
