"""Scattering rate of a resonant quasi-linearly polarized guided probe.

Rates are in proportional units normalized so that the static term equals 1:

    gamma(t) = 1 + sum_m c_{m-1} c_{m+1} V_m cos(2 dE_m t / hbar - 2 theta) / B

with dE_m = (E_{m+1} - E_{m-1}) / 2 and theta the probe polarization axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import constants as sc
from scipy.signal import find_peaks

from .dispersion import Timescales
from .errors import GridMismatch, InsufficientSampling
from .fibermode import FiberMode
from .wavepacket import PolarGrid, WavePacket, evolve, polar_grid


@dataclass(frozen=True)
class OverlapCoefficients:
    ms: np.ndarray  # interior m, m_min+1 .. m_max-1
    B: float
    V: np.ndarray
    dE: np.ndarray
    cc: np.ndarray  # c_{m-1} c_{m+1}
    m0: int

    @property
    def modulation_weights(self) -> np.ndarray:
        return self.cc * self.V / self.B


def coefficients(wp: WavePacket, probe_mode: FiberMode) -> OverlapCoefficients:
    """Static term B and interference overlaps V_m by trapezoid quadrature on the solver grid."""
    if wp.u.shape[1] != wp.grid.n_points:
        raise GridMismatch(f"eigenfunctions have {wp.u.shape[1]} samples, grid has {wp.grid.n_points}")
    er2, ep2, ez2 = probe_mode.profiles(wp.grid.r)
    total = er2 + ep2 + ez2
    contrast = er2 - ep2 + ez2
    dr = wp.grid.spacing
    # u vanishes at both ends of its domain, so the trapezoid rule is a plain sum
    B = float(np.sum(wp.amplitudes**2 * ((wp.u**2) @ total)) * dr)
    V = np.sum(wp.u[:-2] * wp.u[2:] * contrast, axis=1) * dr
    dE = 0.5 * (wp.energies[2:] - wp.energies[:-2])
    cc = wp.amplitudes[:-2] * wp.amplitudes[2:]
    return OverlapCoefficients(wp.ms[1:-1].copy(), B, V, dE, cc, wp.m0)


@dataclass
class TraceAnalysis:
    T_osc_measured: float
    visibility_initial: float
    T_fall_measured: float | None
    resumption_times: list[float]
    visibility_at_rev: float | None
    resumed_periods: list[float] = field(default_factory=list)
    rolling_times: np.ndarray | None = field(default=None, repr=False)
    rolling_visibility: np.ndarray | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "T_osc_measured_s": self.T_osc_measured,
            "visibility_initial": self.visibility_initial,
            "T_fall_measured_s": self.T_fall_measured,
            "resumption_times_s": list(self.resumption_times),
            "resumed_periods_s": list(self.resumed_periods),
            "visibility_at_rev": self.visibility_at_rev,
        }


@dataclass
class ScatterTrace:
    times: np.ndarray
    values: np.ndarray
    axis_angle: float = 0.0
    analysis: TraceAnalysis | None = None


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be sorted and non-negative")
    return times


def trace(coeff: OverlapCoefficients, times, axis_angle: float = 0.0) -> ScatterTrace:
    """Series evaluation with the exact energy differences."""
    times = _check_times(times)
    w = coeff.modulation_weights
    phase = 2 * np.multiply.outer(times, coeff.dE) / sc.hbar - 2 * axis_angle
    return ScatterTrace(times, 1.0 + np.cos(phase) @ w, axis_angle)


def trace_linearized(coeff: OverlapCoefficients, E1: float, E2: float, times,
                     axis_angle: float = 0.0) -> ScatterTrace:
    """Series evaluation with dE_m replaced by E1 + E2 (m - m0)."""
    times = _check_times(times)
    dE = E1 + E2 * (coeff.ms - coeff.m0)
    phase = 2 * np.multiply.outer(times, dE) / sc.hbar - 2 * axis_angle
    return ScatterTrace(times, 1.0 + np.cos(phase) @ coeff.modulation_weights, axis_angle)


def trace_direct(wp: WavePacket, probe_mode: FiberMode, times, axis_angle: float = 0.0,
                 grid: PolarGrid | None = None) -> ScatterTrace:
    """Brute-force 2D quadrature of |psi|^2 |E_p|^2 over the transverse plane.

    Normalized by the same overlap with the quasi-circular intensity, which
    is time independent and equals the static term.
    """
    times = _check_times(times)
    grid = grid or polar_grid(wp)
    er2, ep2, ez2 = probe_mode.profiles(grid.r)
    c2 = np.cos(grid.phi - axis_angle) ** 2
    lin = 2 * (ep2[:, None] + (er2 - ep2 + ez2)[:, None] * c2[None, :])
    circ = (er2 + ep2 + ez2)[:, None]
    weight = grid.r[:, None]
    out = np.empty(times.size)
    for k, t in enumerate(times):
        rho = evolve(wp, t, grid).density * weight
        num = np.trapezoid(rho * lin, grid.r, axis=0).sum()
        den = np.trapezoid(rho * circ, grid.r, axis=0).sum()
        out[k] = num / den
    return ScatterTrace(times, out, axis_angle)


def visibility(values: np.ndarray) -> float:
    hi, lo = float(np.max(values)), float(np.min(values))
    return (hi - lo) / (hi + lo)


def modulation_amplitude(tr: ScatterTrace, center: float, width: float) -> float:
    """Half peak-to-peak of the trace in [center - width/2, center + width/2]."""
    sel = np.abs(tr.times - center) <= width / 2
    if np.count_nonzero(sel) < 3:
        raise InsufficientSampling("fewer than 3 samples in the modulation window")
    v = tr.values[sel]
    return 0.5 * float(v.max() - v.min())


def rolling_visibility(tr: ScatterTrace, window: float) -> tuple[np.ndarray, np.ndarray]:
    """(max - min)/(max + min) over a sliding window; times are window centres."""
    dt = tr.times[1] - tr.times[0]
    n = max(2, int(round(window / dt)) + 1)
    if n > tr.times.size:
        raise InsufficientSampling("trace shorter than the rolling window")
    win = sliding_window_view(tr.values, n)
    hi, lo = win.max(axis=1), win.min(axis=1)
    centres = tr.times[: win.shape[0]] + 0.5 * (n - 1) * dt
    return centres, (hi - lo) / (hi + lo)


def _peak_times(t: np.ndarray, y: np.ndarray, min_separation: float,
                include_start: bool = False) -> np.ndarray:
    """Local maxima at least ``min_separation`` apart, parabolically refined.

    With ``include_start`` a maximum at the first sample counts too (the
    trace starts on a crest at t = 0).
    """
    dt = t[1] - t[0]
    padded = np.concatenate(([-np.inf], y))
    idx, _ = find_peaks(padded, distance=max(1, int(min_separation / dt)))
    idx = idx - 1
    out = []
    for i in idx:
        if 0 < i < y.size - 1:
            y0, y1, y2 = y[i - 1], y[i], y[i + 1]
            denom = y0 - 2 * y1 + y2
            out.append(t[i] + (0.5 * (y0 - y2) / denom if denom != 0 else 0.0) * dt)
        elif i == 0 and include_start:
            out.append(t[0])
    return np.array(out)


def _mean_spacing(peaks: np.ndarray) -> float | None:
    if peaks.size < 2:
        return None
    return float((peaks[-1] - peaks[0]) / (peaks.size - 1))


def analyze(tr: ScatterTrace, ts: Timescales, resume_fraction: float = 0.25) -> TraceAnalysis:
    """Oscillation period, visibilities, falloff and resumption times of a trace."""
    t, y = tr.times, tr.values
    if t.size < 3:
        raise InsufficientSampling("trace has fewer than 3 samples")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-6, atol=0):
        raise InsufficientSampling("analysis needs uniformly sampled times")
    t_osc = ts.T_osc_sca
    if dt[0] > t_osc / 20:
        raise InsufficientSampling(f"dt = {dt[0]:.3g} s exceeds T_osc/20 = {t_osc / 20:.3g} s")
    if t[-1] - t[0] < 3 * t_osc:
        raise InsufficientSampling("trace shorter than three oscillation periods")

    early = t <= t[0] + 3 * t_osc * 1.02
    period = _mean_spacing(_peak_times(t[early], y[early], 0.6 * t_osc, include_start=True))
    if period is None:
        raise InsufficientSampling("no oscillation resolved in the first three periods")
    first = t <= t[0] + period
    vis0 = visibility(y[first])

    centres, vis = rolling_visibility(tr, 2 * t_osc)
    below = np.flatnonzero(vis < vis0 / np.e)
    t_fall = float(centres[below[0]]) if below.size else None

    resumptions, periods, region_peaks = [], [], []
    # resumptions only count once the collapsed signal has dropped below the resume level
    quiet = np.flatnonzero(vis < resume_fraction * vis0)
    if quiet.size:
        start = quiet[0]
        above = vis[start:] > resume_fraction * vis0
        edges = np.diff(above.astype(int))
        on = list(np.flatnonzero(edges == 1) + 1)
        off = list(np.flatnonzero(edges == -1) + 1)
        if above[0]:
            on.insert(0, 0)
        if above[-1]:
            off.append(above.size)
        merge_gap = ts.T_fall_sca if ts.T_fall_sca is not None else t_osc
        regions = []
        for a, b in zip(on, off):
            a, b = a + start, b + start - 1
            if regions and centres[a] - centres[regions[-1][1]] < merge_gap:
                regions[-1][1] = b
            else:
                regions.append([a, b])
        for a, b in regions:
            centre = 0.5 * (centres[a] + centres[b])
            resumptions.append(float(centre))
            region_peaks.append(float(vis[a:b + 1].max()))
            sel = np.abs(t - centre) <= 3 * t_osc
            p = _mean_spacing(_peak_times(t[sel], y[sel], 0.6 * t_osc))
            if p is not None:
                periods.append(p)

    vis_rev = None
    if ts.T_rev is not None:
        near = [k for k, c in enumerate(resumptions) if abs(c - ts.T_rev) <= ts.T_rev / 8]
        if near:
            k = min(near, key=lambda k: abs(resumptions[k] - ts.T_rev))
            vis_rev = region_peaks[k]
        else:
            sel = np.abs(centres - ts.T_rev) <= ts.T_rev / 16
            if np.any(sel):
                vis_rev = float(vis[sel].max())

    analysis = TraceAnalysis(period, vis0, t_fall, resumptions, vis_rev, periods, centres, vis)
    tr.analysis = analysis
    return analysis
