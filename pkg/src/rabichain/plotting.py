"""Figure rendering for the command-line reports.

Everything here draws to files through the Agg backend so the tools work on
headless machines; no function ever opens a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_band_figure", "save_groundstate_figure", "save_trace_figure",
           "save_spectrum_figure", "save_linearity_figure"]

_DPI = 150


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return str(path)


def save_band_figure(path, k, epsilon, delta, energy, branch: str = "ssh"):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(k, energy, label="E_c", color="C0")
    ax.plot(k, -np.asarray(energy), label="E_v", color="C0", linestyle="--")
    ax.plot(k, epsilon, label="epsilon", color="C1", alpha=0.6)
    ax.plot(k, delta, label="delta", color="C2", alpha=0.6)
    ax.set_xlabel("k")
    ax.set_ylabel("energy")
    ax.set_title(f"quasiparticle bands ({branch} branch)")
    ax.legend(loc="best", fontsize=8)
    return _finish(fig, path)


def save_groundstate_figure(path, u, energy, minima=None):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(u, energy, color="C0")
    if minima is not None and minima.dimerized:
        ax.axvline(minima.u_plus, color="C3", linestyle=":", lw=1)
        ax.axvline(minima.u_minus, color="C3", linestyle=":", lw=1)
    ax.set_xlabel("u")
    ax.set_ylabel("E0(u)")
    ax.set_title("ground-state energy vs dimerization")
    return _finish(fig, path)


def save_trace_figure(path, trace):
    fig, ax = plt.subplots(figsize=(7.0, 3.5))
    ax.plot(trace.times, trace.total, color="C0", lw=0.8, label="total")
    n = trace.per_chain.shape[1]
    if n > 1:
        for j in range(n):
            ax.plot(trace.times, trace.per_chain[:, j], lw=0.5, alpha=0.5,
                    label=f"chain {j}")
    ax.set_xlabel("t")
    ax.set_ylabel("inversion")
    ax.legend(loc="upper right", fontsize=7)
    return _finish(fig, path)


def save_spectrum_figure(path, spectrum, peaks=(), fundamental=None):
    fig, ax = plt.subplots(figsize=(7.0, 3.5))
    ax.plot(spectrum.omega, spectrum.magnitude, color="C0", lw=0.8)
    for p in peaks:
        ax.axvline(p.omega, color="C3", linestyle=":", lw=0.8)
        ax.annotate(f"{p.omega:.4g}", xy=(p.omega, p.height),
                    fontsize=7, rotation=90, va="bottom")
    if fundamental is not None:
        ax.axvline(fundamental, color="C2", linestyle="--", lw=1,
                   label="single-site frequency")
        ax.legend(fontsize=7)
    ax.set_xlabel("omega")
    ax.set_ylabel("line magnitude")
    upper = max((p.omega for p in peaks), default=spectrum.omega[-1])
    if fundamental is not None:
        upper = max(upper, fundamental)
    ax.set_xlim(0, 3 * upper if upper > 0 else spectrum.omega[-1])
    return _finish(fig, path)


def save_linearity_figure(path, report):
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    g = np.asarray(report.g_values)
    w = np.asarray(report.omegas)
    ok = np.isfinite(w)
    ax.plot(g[ok], w[ok], "o", color="C0", label="measured")
    gg = np.linspace(g.min(), g.max(), 50)
    ax.plot(gg, report.fit.slope * gg + report.fit.intercept, "-",
            color="C1",
            label=f"fit: slope {report.fit.slope:.4f}, R^2 {report.fit.r_squared:.6f}")
    ax.set_xlabel("g")
    ax.set_ylabel("principal line frequency")
    ax.legend(fontsize=8)
    return _finish(fig, path)
