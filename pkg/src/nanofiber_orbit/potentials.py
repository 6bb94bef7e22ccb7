"""Optical, van der Waals and centrifugal potentials on a radial grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants as sc

from .errors import DomainError
from .fibermode import FiberMode
from .materials import AtomSpec, FiberSpec


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid on (r_min, r_max].

    Nodes are r_min + i*dr for i = 1..n_points; the left end is excluded
    because the surface potential diverges at r = a.
    """

    r_min: float
    r_max: float
    n_points: int = 16000

    def __post_init__(self):
        if not self.r_max > self.r_min > 0:
            raise ValueError("need 0 < r_min < r_max")
        if self.n_points < 2000:
            raise ValueError("n_points must be >= 2000")

    @classmethod
    def for_fiber(cls, fiber: FiberSpec, span: float = 2e-6, n_points: int = 16000) -> "RadialGrid":
        return cls(fiber.radius, fiber.radius + span, n_points)

    @property
    def spacing(self) -> float:
        return (self.r_max - self.r_min) / self.n_points

    @property
    def r(self) -> np.ndarray:
        return self.r_min + self.spacing * np.arange(1, self.n_points + 1)


@dataclass(frozen=True)
class Well:
    """Indices and values of the trap structure of one effective potential.

    ``i_outer`` is the outer barrier top (local maximum beyond the trap
    minimum) or the last grid index when the potential keeps rising.
    """

    i_barrier: int
    i_min: int
    i_outer: int
    r_barrier: float
    r_min_trap: float
    r_outer: float
    depth: float


@dataclass(frozen=True)
class EffectivePotential:
    m: int
    grid: RadialGrid
    values: np.ndarray
    centrifugal: np.ndarray
    optical: np.ndarray
    vdw: np.ndarray
    well: Well | None
    mass: float

    @property
    def r(self) -> np.ndarray:
        return self.grid.r


def centrifugal(m: int, mass: float, r):
    """hbar^2 (m^2 - 1/4) / (2 M r^2)."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("centrifugal potential needs r > 0")
    out = sc.hbar**2 * (m * m - 0.25) / (2 * mass * r**2)
    return out if out.ndim else float(out)


def optical_potential(mode: FiberMode, atom: AtomSpec, power: float, r):
    """-alpha |E|^2 / 4 for the quasi-circularly polarized trap field at ``power``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < mode.radius):
        raise DomainError("optical potential is evaluated outside the fiber")
    er2, ep2, ez2 = mode.profiles(r)
    scale = power / mode.power
    out = -atom.polarizability_at(mode.wavelength) * scale * (er2 + ep2 + ez2) / 4
    return out if r.ndim else float(out[0])


def vdw_potential(atom: AtomSpec, fiber: FiberSpec, r):
    """-C3 / (r - a)^3, the flat-surface van der Waals form."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= fiber.radius):
        raise DomainError("van der Waals potential needs r > a")
    out = -atom.vdw_C3 / (r - fiber.radius) ** 3
    return out if out.ndim else float(out)


def trap_potential(grid: RadialGrid, mode: FiberMode, atom: AtomSpec, fiber: FiberSpec, power: float):
    """m-independent part (U_opt, U_vdW) on the grid nodes."""
    r = grid.r
    return optical_potential(mode, atom, power, r), vdw_potential(atom, fiber, r)


def _slope_signs(values: np.ndarray) -> np.ndarray:
    d = np.diff(values)
    # 3-point moving average guards against single-step noise in the flat tail
    smooth = np.convolve(d, np.ones(3) / 3, mode="same")
    smooth[0], smooth[-1] = d[0], d[-1]
    return np.sign(smooth)


def find_well(values: np.ndarray, r: np.ndarray) -> Well | None:
    """First local maximum followed by a local minimum, plus the next maximum."""
    s = _slope_signs(values)
    maxima = np.flatnonzero((s[:-1] > 0) & (s[1:] < 0)) + 1
    minima = np.flatnonzero((s[:-1] < 0) & (s[1:] > 0)) + 1
    for ib in maxima:
        later = minima[minima > ib]
        if not later.size:
            return None
        imin = int(later[0])
        ib = int(np.argmax(values[ib:imin + 1])) + ib
        outer = maxima[maxima > imin]
        iout = int(outer[0]) if outer.size else len(values) - 1
        if outer.size:
            # refine to the true top between the minimum and the next minimum
            nxt = minima[minima > iout]
            stop = int(nxt[0]) if nxt.size else len(values) - 1
            iout = int(np.argmax(values[imin:stop + 1])) + imin
        imin = int(np.argmin(values[ib:iout + 1])) + ib
        if not (values[ib] > values[imin] and values[iout] > values[imin]):
            continue
        depth = min(values[ib], values[iout]) - values[imin]
        return Well(ib, imin, iout, float(r[ib]), float(r[imin]), float(r[iout]), float(depth))
    return None


def build_effective(m: int, grid: RadialGrid, mode: FiberMode, atom: AtomSpec,
                    fiber: FiberSpec, power: float, base=None) -> EffectivePotential:
    """U_eff^(m) = U_cf^(m) + U_opt + U_vdW on ``grid``.

    ``base`` may carry a precomputed ``trap_potential`` tuple to avoid
    re-evaluating the m-independent part during sweeps.
    """
    opt, vdw = base if base is not None else trap_potential(grid, mode, atom, fiber, power)
    cf = centrifugal(m, atom.mass, grid.r)
    values = cf + opt + vdw
    return EffectivePotential(int(m), grid, values, cf, opt, vdw, find_well(values, grid.r), atom.mass)


@dataclass(frozen=True)
class TrapModel:
    """Everything needed to build U_eff^(m) for any m, with the m-independent part cached."""

    fiber: FiberSpec
    atom: AtomSpec
    mode: FiberMode
    power: float
    grid: RadialGrid
    optical: np.ndarray
    vdw: np.ndarray

    @classmethod
    def build(cls, fiber: FiberSpec, atom: AtomSpec, mode: FiberMode, power: float,
              grid: RadialGrid) -> "TrapModel":
        opt, vdw = trap_potential(grid, mode, atom, fiber, power)
        return cls(fiber, atom, mode, power, grid, opt, vdw)

    def effective(self, m: int) -> EffectivePotential:
        return build_effective(m, self.grid, self.mode, self.atom, self.fiber, self.power,
                               base=(self.optical, self.vdw))
