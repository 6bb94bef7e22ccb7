"""Superpositions of orbital ground states and their free evolution.

psi(r, phi, t) = sum_m c_m exp(-i E_m t / hbar) u_m(r) exp(i m phi) / sqrt(2 pi r)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import constants as sc

from .dispersion import DispersionTable
from .errors import WindowOutsideTable
from .potentials import RadialGrid


def gaussian_amplitudes(ms, m0: float, delta_m: float) -> np.ndarray:
    """Untruncated (2 pi dm^2)^(-1/4) exp(-(m - m0)^2 / (4 dm^2))."""
    ms = np.asarray(ms, dtype=float)
    return (2 * np.pi * delta_m**2) ** -0.25 * np.exp(-((ms - m0) ** 2) / (4 * delta_m**2))


@dataclass(frozen=True, eq=False)
class WavePacket:
    m0: int
    delta_m: float
    m_min: int
    m_max: int
    ms: np.ndarray
    amplitudes: np.ndarray
    energies: np.ndarray
    u: np.ndarray
    grid: RadialGrid

    @cached_property
    def overlaps(self) -> np.ndarray:
        """Radial overlap matrix S_mm' = int u_m u_m' dr on the solver grid."""
        return (self.u @ self.u.T) * self.grid.spacing

    @cached_property
    def support(self) -> tuple[int, int]:
        env = np.abs(self.u).max(axis=0)
        idx = np.flatnonzero(env > 1e-12 * env.max())
        return int(idx[0]), int(idx[-1])

    def phased(self, t: float) -> np.ndarray:
        # energies relative to E_{m0}: a global phase, keeps the arguments small
        e_ref = self.energies[np.searchsorted(self.ms, self.m0)]
        return self.amplitudes * np.exp(-1j * (self.energies - e_ref) * t / sc.hbar)


def build(table: DispersionTable, m0: int = 468, delta_m: float = 6.0, m_min: int = 446,
          m_max: int = 510) -> WavePacket:
    """Truncated, renormalized Gaussian packet centred at phi = 0."""
    if not m_min <= m0 <= m_max:
        raise ValueError("need m_min <= m0 <= m_max")
    if not delta_m > 0:
        raise ValueError("delta_m must be positive")
    ms = np.arange(m_min, m_max + 1)
    missing = [int(m) for m in ms if m not in table or not table.entries[int(m)].bound]
    if missing:
        raise WindowOutsideTable(f"no bound ground state for m = {missing[:5]}{'...' if len(missing) > 5 else ''}")
    c = gaussian_amplitudes(ms, m0, delta_m)
    c = c / np.sqrt(np.sum(c**2))
    return WavePacket(int(m0), float(delta_m), int(m_min), int(m_max), ms, c,
                      table.energies(ms), table.u_matrix(ms), table.grid)


@dataclass(frozen=True)
class PolarGrid:
    """Radial nodes are a uniform subset of the solver grid (indices ``r_index``)."""

    r_index: np.ndarray
    r: np.ndarray
    phi: np.ndarray

    @property
    def dphi(self) -> float:
        return 2 * np.pi / self.phi.size


def polar_grid(wp: WavePacket, n_r: int = 400, n_phi: int = 720) -> PolarGrid:
    lo, hi = wp.support
    lo, hi = max(lo - 1, 0), min(hi + 1, wp.grid.n_points - 1)
    stride = max(1, int(np.ceil((hi - lo) / (n_r - 1))))
    idx = lo + stride * np.arange(n_r)
    idx = idx[idx < wp.grid.n_points]
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    return PolarGrid(idx, wp.grid.r[idx], phi)


@dataclass(frozen=True)
class DensitySnapshot:
    t: float
    r: np.ndarray
    phi: np.ndarray
    density: np.ndarray  # (n_r, n_phi), 1/m^2
    marginal: np.ndarray  # P(phi), 1/rad

    def norm(self) -> float:
        radial = np.trapezoid(self.density * self.r[:, None], self.r, axis=0)
        return float(radial.sum() * 2 * np.pi / self.phi.size)

    def marginal_from_density(self) -> np.ndarray:
        return np.trapezoid(self.density * self.r[:, None], self.r, axis=0)

    def marginal_norm(self) -> float:
        return float(self.marginal.sum() * 2 * np.pi / self.phi.size)

    def circular_mean(self) -> float:
        return circular_mean(self.phi, self.marginal)


def circular_mean(phi: np.ndarray, weights: np.ndarray) -> float:
    return float(np.angle(np.sum(weights * np.exp(1j * phi))))


def azimuthal_marginal(wp: WavePacket, t: float, n_phi: int = 720) -> tuple[np.ndarray, np.ndarray]:
    """P(phi, t) = int |psi|^2 r dr, exact in r via the overlap matrix."""
    a = wp.phased(t)
    mat = np.outer(a, np.conj(a)) * wp.overlaps
    n = len(a)
    diffs = np.arange(-(n - 1), n)
    g = np.array([np.trace(mat, offset=-d) for d in diffs])  # sum over m - m' = d
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    p = np.real(np.exp(1j * np.outer(phi, diffs)) @ g) / (2 * np.pi)
    return phi, p


def evolve(wp: WavePacket, t: float, grid: PolarGrid | None = None) -> DensitySnapshot:
    if t < 0:
        raise ValueError("t must be non-negative")
    grid = grid or polar_grid(wp)
    a = wp.phased(t)
    radial = wp.u[:, grid.r_index].T * a  # (n_r, n_m)
    psi = radial @ np.exp(1j * np.outer(wp.ms, grid.phi))
    density = np.abs(psi) ** 2 / (2 * np.pi * grid.r[:, None])
    _, marg = azimuthal_marginal(wp, t, grid.phi.size)
    return DensitySnapshot(float(t), grid.r, grid.phi, density, marg)


def autocorrelation(wp: WavePacket, t):
    """|<psi(0)|psi(t)>|^2 = |sum c_m^2 exp(-i E_m t / hbar)|^2."""
    t = np.asarray(t, dtype=float)
    e = wp.energies - wp.energies[np.searchsorted(wp.ms, wp.m0)]
    amp = np.exp(-1j * np.multiply.outer(t, e) / sc.hbar) @ wp.amplitudes**2
    out = np.abs(amp) ** 2
    return out if out.ndim else float(out)


def count_peaks(p: np.ndarray, threshold: float = 0.5) -> int:
    """Local maxima of a periodic sequence exceeding ``threshold * max``."""
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    left, right = np.roll(p, 1), np.roll(p, -1)
    # plateaus count once: strict on the left, non-strict on the right
    peaks = (p > left) & (p >= right) & (p > threshold * p.max())
    return int(np.count_nonzero(peaks))


def count_azimuthal_peaks(snapshot: DensitySnapshot, threshold: float = 0.5) -> int:
    return count_peaks(snapshot.marginal, threshold)
