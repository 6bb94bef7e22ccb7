"""Finite-difference solution of the radial equation

    [-(hbar^2 / 2M) d^2/dr^2 + U_eff(r)] u(r) = E u(r)

with Dirichlet walls, as a symmetric tridiagonal eigenproblem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants as sc
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import ConvergenceFailure, NoWell
from .potentials import EffectivePotential, RadialGrid


@dataclass(frozen=True)
class RadialState:
    """Eigenfunction on the full potential grid (zero outside the solver domain).

    ``bound`` records whether the energy lies below both barrier tops that
    delimit the domain, i.e. whether the state is a genuine trap state rather
    than one held in place only by the hard walls.
    """

    m: int
    nu: int
    energy: float
    u: np.ndarray
    grid: RadialGrid
    i_lo: int
    i_hi: int
    bound: bool = True

    @property
    def r(self) -> np.ndarray:
        return self.grid.r

    def norm(self) -> float:
        return float(np.sum(self.u**2) * self.grid.spacing)

    def nodes(self, rel_tol: float = 1e-9) -> int:
        inner = self.u[self.i_lo + 1:self.i_hi]
        inner = inner[np.abs(inner) > rel_tol * np.abs(inner).max()]
        return int(np.count_nonzero(np.diff(np.sign(inner))))


def solve_dirichlet(values: np.ndarray, dr: float, mass: float, count: int = 1):
    """Lowest ``count`` eigenpairs of the 3-point Hamiltonian on interior nodes.

    ``values`` holds the potential at the interior nodes; the wavefunction is
    zero one step beyond either end. Returns energies (J) and eigenvectors as
    columns normalized to sum(u^2) dr = 1.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    if count < 1 or count > n:
        raise ValueError(f"count must be in [1, {n}]")
    t = sc.hbar**2 / (2 * mass * dr**2)
    # work in units of the hopping energy so the matrix entries are O(1)
    try:
        # tiny absolute tolerance: bisection then stops at ~2 ulp of each eigenvalue,
        # which matters because the low levels sit far below the band width 4t
        lam, vec = eigh_tridiagonal(2.0 + values / t, -np.ones(n - 1), select="i",
                                    select_range=(0, count - 1), tol=1e-300)
    except LinAlgError as exc:
        raise ConvergenceFailure(f"tridiagonal eigensolver failed: {exc}") from exc
    vec = vec / np.sqrt(dr)
    for j in range(vec.shape[1]):
        if vec[np.argmax(np.abs(vec[:, j])), j] < 0:
            vec[:, j] = -vec[:, j]
    return lam * t, vec


def solve_spectrum(pot: EffectivePotential, count: int = 1) -> list[RadialState]:
    """Lowest ``count`` states between the inner and outer barrier tops."""
    if count < 1:
        raise ValueError("count must be >= 1")
    well = pot.well
    if well is None:
        raise NoWell(f"m = {pot.m}: effective potential has no trap outside the fiber")
    lo, hi = well.i_barrier, well.i_outer
    energies, vecs = solve_dirichlet(pot.values[lo + 1:hi], pot.grid.spacing, pot.mass, count)
    rim = min(pot.values[lo], pot.values[hi])
    states = []
    for nu, (energy, vec) in enumerate(zip(energies, vecs.T), start=1):
        u = np.zeros(pot.grid.n_points)
        u[lo + 1:hi] = vec
        states.append(RadialState(pot.m, nu, float(energy), u, pot.grid, lo, hi, bool(energy < rim)))
    return states


def solve_ground(pot: EffectivePotential) -> RadialState:
    """Ground vibrational state (nu = 1) of one effective potential."""
    return solve_spectrum(pot, 1)[0]
