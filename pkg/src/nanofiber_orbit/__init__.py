"""Quantum dynamics of a cold cesium atom orbiting an optical nanofiber.

The package follows the computation from the guided-mode fields of the
nanofiber through the effective radial potentials and the dispersion
relation of the orbital ground states to wave-packet collapse/revival and
the scattering signal of a nanofiber-guided probe.
"""

from .config import Config
from .dispersion import DispersionTable, Timescales, derivatives_at, sweep, timescales
from .fibermode import FiberMode, Polarization, solve_he11
from .materials import AtomSpec, FiberSpec, default_cesium, silica_index
from .potentials import EffectivePotential, RadialGrid, build_effective
from .probe import OverlapCoefficients, ScatterTrace, analyze, coefficients, trace, trace_direct
from .radialsolver import RadialState, solve_ground, solve_spectrum
from .wavepacket import DensitySnapshot, WavePacket

__version__ = "0.1.0"

__all__ = [
    "AtomSpec",
    "Config",
    "DensitySnapshot",
    "DispersionTable",
    "EffectivePotential",
    "FiberMode",
    "FiberSpec",
    "OverlapCoefficients",
    "Polarization",
    "RadialGrid",
    "RadialState",
    "ScatterTrace",
    "Timescales",
    "WavePacket",
    "analyze",
    "build_effective",
    "coefficients",
    "default_cesium",
    "derivatives_at",
    "silica_index",
    "solve_ground",
    "solve_he11",
    "solve_spectrum",
    "sweep",
    "timescales",
    "trace",
    "trace_direct",
]
