"""Figure rendering for the reproduction report.

Figures are built with the object-oriented Figure API (no pyplot state) and
saved as PNG without a Software tag, so identical inputs give identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Circle
from scipy import constants as sc

RC = {
    "font.family": "serif",
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.2,
}

MHZ = sc.h * 1e6


def _figure(width: float, height: float) -> Figure:
    import matplotlib as mpl

    with mpl.rc_context(RC):
        return Figure(figsize=(width, height), dpi=120, layout="constrained")


def _save(fig: Figure, path: Path) -> Path:
    import matplotlib as mpl

    with mpl.rc_context(RC):
        fig.savefig(path, metadata={"Software": None})
    return path


def effective_potentials(potentials, states, table, path: Path) -> Path:
    """Effective potentials with ground-state eigenfunctions, and the dispersion relation."""
    import matplotlib as mpl

    with mpl.rc_context(RC):
        fig = _figure(7.0, 5.0)
        axes = fig.subplots(2, 2).ravel()
        for ax, pot, st in zip(axes[:3], potentials, states):
            r_nm = pot.r * 1e9
            lo = pot.well.i_barrier if pot.well else 0
            hi = min(pot.grid.n_points, (pot.well.i_outer if pot.well else pot.grid.n_points) + 2000)
            sel = slice(max(lo - 400, 0), hi)
            ax.plot(r_nm[sel], pot.values[sel] / MHZ, color="tab:blue")
            ax.set_ylim(pot.values[pot.well.i_min] / MHZ - 2, pot.values[lo] / MHZ + 8)
            ax.set_xlabel("r (nm)")
            ax.set_ylabel(r"$U_\mathrm{eff}/h$ (MHz)")
            ax.set_title(f"m = {pot.m}")
            twin = ax.twinx()
            twin.plot(r_nm[sel], st.u[sel] / np.abs(st.u).max(), "--", color="tab:red")
            twin.set_yticks([])
        ms = np.array(table.bound_ms)
        axes[3].plot(ms, table.energies(ms) / MHZ, ".", ms=3, color="k")
        axes[3].set_xlabel("m")
        axes[3].set_ylabel(r"$\mathcal{E}_m/h$ (MHz)")
        axes[3].set_title("dispersion relation")
        return _save(fig, path)


def density_snapshots(snapshots, fiber_radius: float, path: Path) -> Path:
    """|psi(r, phi, t)|^2 in the transverse plane at several times."""
    import matplotlib as mpl

    with mpl.rc_context(RC):
        n = len(snapshots)
        cols = 3
        rows = int(np.ceil(n / cols))
        fig = _figure(7.0, 2.4 * rows)
        axes = np.atleast_1d(fig.subplots(rows, cols)).ravel()
        for ax, snap in zip(axes, snapshots):
            phi = np.append(snap.phi, 2 * np.pi)
            dens = np.hstack([snap.density, snap.density[:, :1]])
            rr, pp = np.meshgrid(snap.r * 1e9, phi, indexing="ij")
            ax.pcolormesh(rr * np.cos(pp), rr * np.sin(pp), dens, shading="gouraud", cmap="viridis",
                          rasterized=True)
            ax.set_facecolor(mpl.colormaps["viridis"](0.0))
            ax.add_patch(Circle((0, 0), fiber_radius * 1e9, color="0.6"))
            radial = snap.density.sum(axis=1) * snap.r
            lim = 1.15 * snap.r[np.flatnonzero(radial > 1e-3 * radial.max())[-1]] * 1e9
            ax.set_xlim(-lim, lim)
            ax.set_ylim(-lim, lim)
            ax.set_aspect("equal")
            ax.set_title(f"t = {snap.t * 1e6:.1f} µs")
            ax.set_xticks([])
            ax.set_yticks([])
        for ax in axes[n:]:
            ax.set_visible(False)
        return _save(fig, path)


def scattering_trace(tr, path: Path, windows=((0, 50e-6), (0, 1000e-6), (650e-6, 900e-6))) -> Path:
    """Probe scattering rate over several time windows."""
    import matplotlib as mpl

    with mpl.rc_context(RC):
        fig = _figure(7.0, 6.0)
        axes = fig.subplots(len(windows), 1)
        for ax, (t0, t1) in zip(np.atleast_1d(axes), windows):
            sel = (tr.times >= t0) & (tr.times <= t1)
            ax.plot(tr.times[sel] * 1e6, tr.values[sel], lw=0.6, color="k")
            ax.set_xlim(t0 * 1e6, t1 * 1e6)
            ax.set_ylabel(r"$\gamma_\mathrm{sca}$ (rel.)")
        np.atleast_1d(axes)[-1].set_xlabel("t (µs)")
        return _save(fig, path)
