"""Figure rendering for experiment result tables.

Each experiment gets a small dedicated plot; anything unrecognized falls back
to plotting every numeric column against the first one.  Figures are written
next to the CSV with the same stem, using the Agg backend and scrubbed
metadata so repeated runs produce identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KWARGS = {"dpi": 150, "metadata": {"Software": None}}


def _new_axes(xlabel, ylabel, title):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.35)
    return fig, ax


def _col(table, name):
    return np.asarray(table.column(name), dtype=float)


def render(table, path) -> None:
    """Render one result table to an image file."""
    name = table.name
    if name in ("scf-tx", "scf-rx", "scf-uniform"):
        fig, ax = _new_axes("lag", "|correlation|", name)
        theory = np.hypot(_col(table, "re_theory"), _col(table, "im_theory"))
        mc = np.hypot(_col(table, "re_mc"), _col(table, "im_mc"))
        lags = _col(table, "lag")
        ax.plot(lags, theory, "-o", label="series")
        ax.plot(lags, mc, "x", ms=9, label="monte-carlo")
        ax.legend()
    elif name == "scf-2d-vs-3d":
        fig, ax = _new_axes("lag", "|correlation|", name)
        lags = _col(table, "lag")
        ax.plot(lags, _col(table, "abs_theory_3d"), "-o", label="3d series")
        ax.plot(lags, _col(table, "abs_mc_3d"), "x", ms=9, label="3d monte-carlo")
        ax.plot(lags, _col(table, "abs_theory_2d"), "-s", label="flat series")
        ax.plot(lags, _col(table, "abs_mc_2d"), "+", ms=9, label="flat monte-carlo")
        ax.legend()
    elif name == "pinhole":
        fig, ax = _new_axes("path count", "mean mutual information", name)
        rows = [r for r in table.rows if r[0] == "parametric"]
        paths = [r[1] for r in rows]
        means = [r[2] for r in rows]
        ax.plot(paths, means, "-o", label="parametric")
        kron = [r for r in table.rows if r[0] == "kronecker"]
        if kron:
            ax.axhline(kron[0][2], color="tab:red", ls="--", label="kronecker")
        ax.legend()
    elif name == "det-mi-verify":
        fig, ax = _new_axes("SNR (dB)", "mutual information per antenna", name)
        snr = _col(table, "snr_db")
        for col, style, label in (
            (table.columns[1], "-", "deterministic"),
            (table.columns[2], "o", "kronecker monte-carlo"),
            (table.columns[3], "x", "parametric monte-carlo"),
        ):
            ax.plot(snr, _col(table, col), style, label=label)
        ax.legend()
    elif name == "mi-vs-kappa":
        fig, ax = _new_axes("antennas per end", "total mutual information", name)
        ants = _col(table, "n_antennas")
        concs = _col(table, "concentration")
        totals = _col(table, table.columns[3])
        for conc in sorted(set(concs)):
            mask = concs == conc
            ax.plot(ants[mask], totals[mask], "-o", label=f"concentration {conc:g}")
        ax.legend()
    elif name in ("mi-vs-sigma", "mi-vs-sigma-bad-user"):
        fig, ax = _new_axes("elevation spread (deg)", "mutual information per antenna", name)
        spread = _col(table, "spread_deg")
        ax.plot(spread, _col(table, table.columns[3]), "-o", label="deterministic")
        twin = ax.twinx()
        twin.plot(spread, _col(table, "abs_rho_lag1"), "--s", color="tab:orange", label="|corr| lag 1")
        twin.set_ylabel("|correlation| at lag 1")
        lines, labels = ax.get_legend_handles_labels()
        lines2, labels2 = twin.get_legend_handles_labels()
        ax.legend(lines + lines2, labels + labels2, loc="center right")
    elif name == "mi-2d-vs-3d":
        fig, ax = _new_axes("SNR (dB)", "mutual information per antenna", name)
        snr = _col(table, "snr_db")
        ax.plot(snr, _col(table, table.columns[1]), "-o", label="3d")
        ax.plot(snr, _col(table, table.columns[2]), "-s", label="flat")
        ax.legend()
    elif name == "multiuser-tilt-sweep":
        fig, ax = _new_axes("boresight tilt (deg)", "mutual information per user", name)
        tilts = _col(table, "tilt_deg")
        means = _col(table, table.columns[1])
        ses = _col(table, table.columns[2])
        ax.errorbar(tilts, means, yerr=3 * ses, fmt="-o", capsize=3)
        best = tilts[int(np.argmax(means))]
        ax.axvline(best, color="tab:red", ls=":", label=f"argmax {best:g} deg")
        ax.legend()
    else:
        fig, ax = _new_axes(table.columns[0], "value", name)
        xs = _col(table, table.columns[0])
        for col in table.columns[1:]:
            try:
                ax.plot(xs, _col(table, col), "-o", label=col)
            except (TypeError, ValueError):
                continue
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
