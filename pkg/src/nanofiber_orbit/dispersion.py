"""Dispersion relation E_m of the orbital ground states and derived timescales."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import constants as sc

from .errors import MissingEntry
from .potentials import RadialGrid, TrapModel
from .radialsolver import RadialState, solve_ground

M_LIMITS = (1, 2000)


@dataclass
class DispersionTable:
    """Ground-state energies and eigenfunctions keyed by azimuthal number m.

    ``entries`` holds every scanned m whose effective potential has a well.
    ``well_window`` spans the m with a well; ``m_window`` spans the m whose
    ground state is bound below both barrier tops.
    """

    entries: dict[int, RadialState]
    grid: RadialGrid
    well_window: tuple[int, int] | None
    m_window: tuple[int, int] | None
    scanned: tuple[int, int]
    failures: dict[int, str] = field(default_factory=dict)

    def __contains__(self, m: int) -> bool:
        return m in self.entries

    def energy(self, m: int) -> float:
        try:
            return self.entries[m].energy
        except KeyError:
            raise MissingEntry(f"m = {m} not in dispersion table") from None

    def energies(self, ms) -> np.ndarray:
        return np.array([self.energy(int(m)) for m in ms])

    def u_matrix(self, ms) -> np.ndarray:
        """Eigenfunctions stacked as rows, all on the shared grid."""
        return np.array([self.entries[int(m)].u for m in ms])

    @property
    def ms(self) -> list[int]:
        return sorted(self.entries)

    @property
    def bound_ms(self) -> list[int]:
        return [m for m in self.ms if self.entries[m].bound]

    def well_window_contiguous(self) -> bool:
        if self.well_window is None:
            return False
        lo, hi = self.well_window
        return all(m in self.entries for m in range(lo, hi + 1))

    def save(self, path: str | Path) -> None:
        ms = self.ms
        st = [self.entries[m] for m in ms]
        np.savez_compressed(
            path,
            version=np.array(1),
            ms=np.array(ms, dtype=np.int64),
            energies=np.array([s.energy for s in st]),
            u=np.array([s.u for s in st]).reshape(len(st), self.grid.n_points),
            i_lo=np.array([s.i_lo for s in st], dtype=np.int64),
            i_hi=np.array([s.i_hi for s in st], dtype=np.int64),
            bound=np.array([s.bound for s in st]),
            grid=np.array([self.grid.r_min, self.grid.r_max, self.grid.n_points], dtype=float),
            well_window=np.array(self.well_window or (-1, -1), dtype=np.int64),
            m_window=np.array(self.m_window or (-1, -1), dtype=np.int64),
            scanned=np.array(self.scanned, dtype=np.int64),
        )

    @classmethod
    def load(cls, path: str | Path) -> "DispersionTable":
        with np.load(path) as z:
            z = {k: z[k] for k in z.files}  # each access decompresses, so read once
        g = z["grid"]
        grid = RadialGrid(float(g[0]), float(g[1]), int(g[2]))
        entries = {}
        for k, m in enumerate(z["ms"]):
            entries[int(m)] = RadialState(int(m), 1, float(z["energies"][k]), z["u"][k], grid,
                                          int(z["i_lo"][k]), int(z["i_hi"][k]), bool(z["bound"][k]))
        ww, mw = tuple(int(x) for x in z["well_window"]), tuple(int(x) for x in z["m_window"])
        return cls(entries, grid, None if ww[0] < 0 else ww, None if mw[0] < 0 else mw,
                   tuple(int(x) for x in z["scanned"]))


def _solve_one(trap: TrapModel, m: int):
    pot = trap.effective(m)
    if pot.well is None:
        return m, None
    return m, solve_ground(pot)


def sweep(trap: TrapModel, m_range: tuple[int, int], threads: int = 1) -> DispersionTable:
    """Solve the ground state for every m in the inclusive ``m_range`` that has a well."""
    lo, hi = int(m_range[0]), int(m_range[1])
    if not (M_LIMITS[0] <= lo <= hi <= M_LIMITS[1]):
        raise ValueError(f"m range must lie within {M_LIMITS}, got {m_range}")
    ms = range(lo, hi + 1)
    failures = {}

    def job(m):
        try:
            return _solve_one(trap, m)
        except Exception as exc:  # per-m failures become recorded gaps
            failures[m] = f"{type(exc).__name__}: {exc}"
            return m, None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, ms))
    else:
        results = [job(m) for m in ms]

    entries = {m: st for m, st in results if st is not None}
    well_window = (min(entries), max(entries)) if entries else None
    bound = [m for m in sorted(entries) if entries[m].bound]
    m_window = (bound[0], bound[-1]) if bound else None
    return DispersionTable(entries, trap.grid, well_window, m_window, (lo, hi),
                           dict(sorted(failures.items())))


def derivatives_at(table: DispersionTable, m0: int) -> tuple[float, float]:
    """Unit-step central differences dE/dm and d^2E/dm^2 at ``m0``."""
    em, e0, ep = (table.energy(m) for m in (m0 - 1, m0, m0 + 1))
    return 0.5 * (ep - em), ep - 2.0 * e0 + em


@dataclass(frozen=True)
class Timescales:
    """Rotation, collapse and revival times of the packet and of the probe signal.

    Entries that depend on 1/|E2| are None for a flat dispersion (E2 = 0).
    """

    E1: float
    E2: float
    delta_m: float
    T_rot: float
    T_coll: float | None
    T_rev: float | None
    T_osc_sca: float
    T_fall_sca: float | None
    T_resume_sca: float | None

    def as_dict(self) -> dict:
        return {
            "E1_J": self.E1, "E2_J": self.E2,
            "E1_over_h_Hz": self.E1 / sc.h, "E2_over_h_Hz": self.E2 / sc.h,
            "delta_m": self.delta_m,
            "T_rot_s": self.T_rot, "T_coll_s": self.T_coll, "T_rev_s": self.T_rev,
            "T_osc_sca_s": self.T_osc_sca, "T_fall_sca_s": self.T_fall_sca,
            "T_resume_sca_s": self.T_resume_sca,
        }


def timescales(E1: float, E2: float, delta_m: float) -> Timescales:
    if not E1 > 0:
        raise ValueError("E1 must be positive")
    if not delta_m > 0:
        raise ValueError("delta_m must be positive")
    hbar = sc.hbar
    T_rot = 2 * math.pi * hbar / E1
    T_osc = math.pi * hbar / E1
    if E2 == 0:
        return Timescales(E1, E2, delta_m, T_rot, None, None, T_osc, None, None)
    a2 = abs(E2)
    T_coll = 2 * math.sqrt(math.pi) * hbar / (a2 * delta_m)
    return Timescales(
        E1, E2, delta_m,
        T_rot=T_rot,
        T_coll=T_coll,
        T_rev=4 * math.pi * hbar / a2,
        T_osc_sca=T_osc,
        T_fall_sca=math.pi * hbar / (2 * a2 * delta_m),
        T_resume_sca=math.pi * hbar / a2,
    )
