"""Atomic and material data for a cesium atom near a fused-silica nanofiber."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants as sc

from .errors import DomainError

ATOMIC_MASS_CS = 132.905451933  # u
AU_POLARIZABILITY = sc.physical_constants["atomic unit of electric polarizability"][0]  # C m^2 / V

# Ground-state scalar polarizability at 1064 nm, 1163 a.u.
ALPHA_CS_1064 = 1163.0 * AU_POLARIZABILITY

# Effective flat-surface C3 for Cs near a 200 nm silica fiber: the half-space
# value h * 1.56 kHz um^3 times 0.54, the pairwise-summed cylinder/half-space
# ratio at atom-surface distance d = a, where the trap minimum sits.
C3_CS_SILICA_HALFSPACE = sc.h * 1.56e3 * 1e-18  # J m^3
C3_CS_SILICA = sc.h * 0.84e3 * 1e-18  # J m^3

CS_D2_WAVELENGTH = 852.34727582e-9  # m, vacuum
CS_D1_WAVELENGTH = 894.59295986e-9  # m, vacuum
TRAP_WAVELENGTH = 1064e-9

# (vacuum wavelength [m], absorption oscillator strength) for the D lines
_CS_LINES = ((CS_D1_WAVELENGTH, 0.3449), (CS_D2_WAVELENGTH, 0.7174))
_CS_CORE_AU = 15.8

# Malitson fused silica, wavelengths in micrometres
_SELLMEIER_B = (0.6961663, 0.4079426, 0.8974794)
_SELLMEIER_C = (0.0684043, 0.1162414, 9.896161)
SELLMEIER_RANGE = (0.2e-6, 2.0e-6)


def _d_line_model(omega: float) -> float:
    """Two-line oscillator model of the Cs ground-state polarizability (SI)."""
    alpha = _CS_CORE_AU * AU_POLARIZABILITY
    for lam, f in _CS_LINES:
        w0 = 2 * np.pi * sc.c / lam
        alpha += f * sc.e**2 / (sc.m_e * (w0**2 - omega**2))
    return alpha


def silica_index(wavelength: float) -> float:
    """Refractive index of fused silica from the three-term Sellmeier formula."""
    wavelength = np.asarray(wavelength, dtype=float)
    if np.any(wavelength < SELLMEIER_RANGE[0]) or np.any(wavelength > SELLMEIER_RANGE[1]):
        raise DomainError(f"Sellmeier formula valid for 0.2-2 um, got {wavelength} m")
    l2 = (wavelength * 1e6) ** 2
    n2 = 1.0 + sum(b * l2 / (l2 - c * c) for b, c in zip(_SELLMEIER_B, _SELLMEIER_C))
    n = np.sqrt(n2)
    return n if n.ndim else float(n)


@dataclass(frozen=True)
class AtomSpec:
    """Center-of-mass and response data of the trapped atom.

    ``alpha_1064`` calibrates the oscillator model: ``polarizability`` returns
    the model rescaled so that its 1064 nm value equals ``alpha_1064``.
    """

    mass: float = ATOMIC_MASS_CS * sc.atomic_mass
    alpha_1064: float = ALPHA_CS_1064
    vdw_C3: float = C3_CS_SILICA
    probe_wavelength: float = CS_D2_WAVELENGTH

    def __post_init__(self):
        for name in ("mass", "alpha_1064", "vdw_C3", "probe_wavelength"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def polarizability(self, omega: float) -> float:
        w_ref = 2 * np.pi * sc.c / TRAP_WAVELENGTH
        return self.alpha_1064 * _d_line_model(omega) / _d_line_model(w_ref)

    def polarizability_at(self, wavelength: float) -> float:
        return self.polarizability(2 * np.pi * sc.c / wavelength)


@dataclass(frozen=True)
class FiberSpec:
    radius: float = 200e-9
    index_clad: float = 1.0
    core_index: callable = field(default=silica_index, compare=False, repr=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("fiber radius must be positive")
        if self.index_clad < 1:
            raise ValueError("cladding index must be >= 1")

    def index_core(self, wavelength: float) -> float:
        n = self.core_index(wavelength)
        if n <= self.index_clad:
            raise ValueError("core index must exceed cladding index")
        return n


def default_cesium(**overrides) -> AtomSpec:
    """Cesium in its electronic ground state; keyword overrides replace fields."""
    return replace(AtomSpec(), **overrides)
