"""PNG figures for the CLI exports (non-interactive backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_sweep", "plot_xi_table", "plot_alpha_max", "plot_spectrum"]

# fixed metadata keeps the PNG bytes reproducible
_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)


def plot_sweep(rows, family, path):
    """Fidelity and infidelity against N."""
    n = np.array([r["N"] for r in rows])
    f = np.array([r["fidelity"] for r in rows])
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 5.5), sharex=True)
    ax1.bar(n, f, color="tab:blue")
    ax1.set_ylim(min(0.98, f.min() - 0.002), 1.0005)
    ax1.set_ylabel("fidelity")
    ax1.set_title(f"{family.upper()} state fidelity")
    inf = np.clip(1 - f, 1e-17, None)
    ax2.semilogy(n, inf, "o-", color="tab:red")
    ax2.set_ylabel("1 - fidelity")
    ax2.set_xlabel("N")
    ax2.set_xticks(n)
    _save(fig, path)


def plot_xi_table(rows, path):
    """|xi_m^n| against n, one panel per m, one curve per eta."""
    etas = sorted({r["eta"] for r in rows})
    ms = sorted({r["m"] for r in rows})
    ncol = min(len(ms), 4)
    nrow = -(-len(ms) // ncol)
    fig, axes = plt.subplots(nrow, ncol, figsize=(3.2 * ncol, 2.8 * nrow), squeeze=False)
    for ax, m in zip(axes.flat, ms):
        for eta in etas:
            pts = sorted((r["n"], abs(r["xi"])) for r in rows if r["m"] == m and r["eta"] == eta)
            x, y = map(np.array, zip(*pts))
            # exact zeros (underflow) would pin the log axis
            ax.semilogy(x, np.where(y > 0, y, np.nan), label=f"{eta:g}")
        ax.set_ylim(bottom=1e-30)
        ax.set_title(f"m = {m}")
        ax.set_xlabel("n")
    for ax in list(axes.flat)[len(ms):]:
        ax.axis("off")
    axes.flat[0].set_ylabel("|xi|")
    axes.flat[0].legend(title="eta", fontsize=7)
    _save(fig, path)


def plot_alpha_max(rows, path):
    """alpha_max over the coprime (n', m') grid; gaps are non-coprime pairs."""
    top = max(max(r["n_prime"], r["m_prime"]) for r in rows)
    grid = np.full((top, top), np.nan)
    for r in rows:
        grid[r["m_prime"] - 1, r["n_prime"] - 1] = r["alpha_max"]
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    im = ax.imshow(grid, origin="lower", extent=(0.5, top + 0.5, 0.5, top + 0.5), cmap="viridis")
    fig.colorbar(im, ax=ax, label="alpha_max")
    ax.set_xlabel("n'")
    ax.set_ylabel("m'")
    _save(fig, path)


def plot_spectrum(ks, residuals, roots, path):
    """Mode residual across the scan with the located roots marked."""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(ks, residuals, lw=0.8)
    ax.axhline(0.0, color="k", lw=0.5)
    ax.plot(roots, np.zeros(len(roots)), "rx")
    ax.set_xlabel("k")
    ax.set_ylabel("x12(k)")
    _save(fig, path)
