"""Fundamental HE11 mode of a step-index nanofiber.

Field components for the circularly polarized mode with azimuthal phase
e^{+i phi}; the quasi-linear mode is the equal-weight superposition of the
two circular ones. Only magnitudes are exposed, since phases drop out of every
intensity used downstream.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants as sc
from scipy.optimize import brentq

from .errors import ConvergenceFailure, DomainError, NoGuidedMode
from .materials import FiberSpec
from .specfun import J, Jp, K, Kp

SINGLE_MODE_CUTOFF = 2.404825557695773  # first zero of J0
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class Polarization:
    kind: str = "quasi-circular"
    axis_angle: float = 0.0

    def __post_init__(self):
        if self.kind not in ("quasi-circular", "quasi-linear"):
            raise ValueError(f"unknown polarization {self.kind!r}")
        object.__setattr__(self, "axis_angle", float(self.axis_angle) % (2 * np.pi))

    @classmethod
    def circular(cls) -> "Polarization":
        return cls("quasi-circular")

    @classmethod
    def linear(cls, axis_angle: float = 0.0) -> "Polarization":
        return cls("quasi-linear", axis_angle)


def v_number(fiber: FiberSpec, wavelength: float) -> float:
    k = 2 * np.pi / wavelength
    n1 = fiber.index_core(wavelength)
    return k * fiber.radius * np.sqrt(n1**2 - fiber.index_clad**2)


def _log_derivs(u, w):
    jt = Jp(1, u) / (u * J(1, u))
    kt = Kp(1, w) / (w * K(1, w))
    return jt, kt


def dispersion_function(fiber: FiberSpec, wavelength: float, beta: float) -> float:
    """Normalized residual of the exact HE11 eigenvalue equation.

    Zero at a guided-mode propagation constant; the left and right hand sides
    are divided by the right hand side so the value is dimensionless and O(1).
    """
    k = 2 * np.pi / wavelength
    n1, n2, a = fiber.index_core(wavelength), fiber.index_clad, fiber.radius
    u = a * np.sqrt(n1**2 * k**2 - beta**2)
    w = a * np.sqrt(beta**2 - n2**2 * k**2)
    jt, kt = _log_derivs(u, w)
    rhs = (beta / k) ** 2 * (1 / u**2 + 1 / w**2) ** 2
    return (jt + kt) * (n1**2 * jt + n2**2 * kt) / rhs - 1.0


@dataclass(frozen=True)
class FiberMode:
    wavelength: float
    radius: float
    n_core: float
    n_clad: float
    beta: float
    h: float
    q: float
    s: float
    amplitude: float = 1.0
    power: float = float("nan")
    warnings: tuple = field(default=(), compare=False)

    @property
    def k(self) -> float:
        return 2 * np.pi / self.wavelength

    @property
    def omega(self) -> float:
        return sc.c * self.k

    @property
    def v_number(self) -> float:
        return self.k * self.radius * np.sqrt(self.n_core**2 - self.n_clad**2)

    def signed_fields(self, r):
        """Unit-amplitude (f_r, f_phi, f_z, df_z/dr) with E_r = i f_r, E_phi = f_phi, E_z = f_z."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r <= 0):
            raise DomainError("field evaluation needs r > 0")
        a, b, s, h, q = self.radius, self.beta, self.s, self.h, self.q
        fr, fp, fz, dfz = (np.empty_like(r) for _ in range(4))
        inside = r < a
        if np.any(inside):
            x = h * r[inside]
            j0, j1, j2 = J(0, x), J(1, x), J(2, x)
            fr[inside] = b / (2 * h) * ((1 - s) * j0 - (1 + s) * j2)
            fp[inside] = -b / (2 * h) * ((1 - s) * j0 + (1 + s) * j2)
            fz[inside] = j1
            dfz[inside] = h * Jp(1, x)
        out = ~inside
        if np.any(out):
            x = q * r[out]
            ratio = J(1, h * a) / K(1, q * a)
            k0, k1, k2 = K(0, x), K(1, x), K(2, x)
            fr[out] = b / (2 * q) * ratio * ((1 - s) * k0 + (1 + s) * k2)
            fp[out] = -b / (2 * q) * ratio * ((1 - s) * k0 - (1 + s) * k2)
            fz[out] = ratio * k1
            dfz[out] = ratio * q * Kp(1, x)
        return fr, fp, fz, dfz

    def _magnitude(self, r, index):
        vals = self.amplitude * np.abs(self.signed_fields(r)[index])
        return vals if np.ndim(r) else float(vals[0])

    def e_r(self, r):
        return self._magnitude(r, 0)

    def e_phi(self, r):
        return self._magnitude(r, 1)

    def e_z(self, r):
        return self._magnitude(r, 2)

    def profiles(self, r):
        """Squared magnitudes (|e_r|^2, |e_phi|^2, |e_z|^2) in V^2/m^2 at the mode's power."""
        fr, fp, fz, _ = self.signed_fields(r)
        a2 = self.amplitude**2
        return a2 * fr**2, a2 * fp**2, a2 * fz**2

    def poynting_z(self, r):
        """Cycle-averaged axial Poynting component, W/m^2."""
        fr, fp, fz, dfz = self.signed_fields(r)
        r = np.atleast_1d(np.asarray(r, dtype=float))
        sz = (self.beta * (fr**2 + fp**2) + fr * dfz - fp * fz / r) / (2 * self.omega * sc.mu_0)
        return self.amplitude**2 * sz

    def power_integral(self, n_points: int = 4000) -> float:
        """Axial power through the whole cross section by trapezoid + Richardson.

        Interior and exterior are integrated separately (the integrand has a
        kink at r = a); the exterior is cut where e^{-2qr} has dropped by e^-80.
        """
        total = 0.0
        for lo, hi in ((0.0, self.radius), (self.radius, self.radius + 40.0 / self.q)):
            fine = self._trapz_region(lo, hi, n_points)
            coarse = self._trapz_region(lo, hi, n_points // 2)
            total += fine + (fine - coarse) / 3.0
        return total

    def _trapz_region(self, lo, hi, n):
        r = np.linspace(lo, hi, n + 1)
        f = np.zeros_like(r)
        pos = r > 0
        f[pos] = 2 * np.pi * r[pos] * self.poynting_z(r[pos])
        if hi == self.radius:
            # evaluate the interior limit at r = a from inside
            f[-1] = 2 * np.pi * hi * self.poynting_z(hi * (1 - 1e-15))[0]
        return np.trapezoid(f, r)

    def intensity(self, pol: Polarization, r, phi=0.0):
        """|E|^2 (V^2/m^2) of the guided field at the mode's power.

        Quasi-circular: |e_r|^2 + |e_phi|^2 + |e_z|^2.
        Quasi-linear with axis at phi0: 2[|e_phi|^2 + (|e_r|^2 - |e_phi|^2 + |e_z|^2) cos^2(phi - phi0)];
        the factor 2 keeps both polarizations at the same power.
        """
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr < self.radius):
            raise DomainError("intensity is defined outside the fiber, r >= a")
        er2, ep2, ez2 = self.profiles(r_arr)
        if pol.kind == "quasi-circular":
            out = (er2 + ep2 + ez2) * np.ones(np.broadcast(r_arr, np.asarray(phi)).shape)
        else:
            c2 = np.cos(np.asarray(phi) - pol.axis_angle) ** 2
            out = 2 * (ep2 + (er2 - ep2 + ez2) * c2)
        out = np.asarray(out).reshape(np.broadcast(r_arr, np.asarray(phi)).shape)
        return out if out.ndim else float(out)


def _bracket(fiber: FiberSpec, wavelength: float, n_samples: int = 4000):
    k = 2 * np.pi / wavelength
    n1, n2 = fiber.index_core(wavelength), fiber.index_clad
    lo, hi = n2 * k, n1 * k
    # sample from the core line downwards: HE11 is the largest root
    betas = hi - (hi - lo) * np.linspace(1e-9, 1 - 1e-9, n_samples)
    with np.errstate(all="ignore"):
        vals = np.array([dispersion_function(fiber, wavelength, b) for b in betas])
    for i in range(n_samples - 1):
        f0, f1 = vals[i], vals[i + 1]
        if np.isfinite(f0) and np.isfinite(f1) and np.sign(f0) != np.sign(f1):
            # discard sign flips across the poles J1(ha) = 0
            mid = 0.5 * (betas[i] + betas[i + 1])
            u = fiber.radius * np.sqrt(hi**2 - mid**2)
            if J(1, u) > 0 or u < 3.8:
                return betas[i + 1], betas[i]
    raise NoGuidedMode(f"no HE11 root between {lo:.6g} and {hi:.6g} 1/m")


def solve_he11(fiber: FiberSpec, wavelength: float, power: float = 1.0) -> FiberMode:
    """Solve the HE11 propagation constant and return the mode carrying ``power``."""
    k = 2 * np.pi / wavelength
    n1, n2, a = fiber.index_core(wavelength), fiber.index_clad, fiber.radius
    notes = []
    V = v_number(fiber, wavelength)
    if V >= SINGLE_MODE_CUTOFF:
        notes.append(f"V = {V:.4f} >= {SINGLE_MODE_CUTOFF:.4f}: fiber is not single mode")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)

    lo, hi = _bracket(fiber, wavelength)
    f = lambda b: dispersion_function(fiber, wavelength, b)  # noqa: E731
    try:
        beta, info = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                            maxiter=500, full_output=True)
    except (RuntimeError, ValueError) as exc:
        raise ConvergenceFailure(str(exc)) from exc
    if not info.converged:
        raise ConvergenceFailure(f"root refinement stalled after {info.iterations} iterations")
    # secant polish on the bracketed root
    b0, b1 = beta, beta * (1 + 1e-12)
    for _ in range(4):
        f0, f1 = f(b0), f(b1)
        if f1 == f0:
            break
        b2 = b1 - f1 * (b1 - b0) / (f1 - f0)
        if not lo <= b2 <= hi or abs(f(b2)) >= abs(f(beta)):
            break
        beta, b0, b1 = b2, b1, b2
    if abs(f(beta)) > RESIDUAL_TOL:
        raise ConvergenceFailure(f"dispersion residual {f(beta):.3e} above {RESIDUAL_TOL}")

    h = np.sqrt(n1**2 * k**2 - beta**2)
    q = np.sqrt(beta**2 - n2**2 * k**2)
    jt, kt = _log_derivs(h * a, q * a)
    s = (1 / (h * a) ** 2 + 1 / (q * a) ** 2) / (jt + kt)
    mode = FiberMode(wavelength, a, n1, n2, float(beta), float(h), float(q), float(s),
                     warnings=tuple(notes))
    return power_normalize(mode, power)


def power_normalize(mode: FiberMode, power: float) -> FiberMode:
    """Return a copy of ``mode`` whose axial power flux equals ``power`` (W)."""
    if not power > 0:
        raise ValueError("power must be positive")
    unit = replace(mode, amplitude=1.0)
    p1 = unit.power_integral()
    return replace(mode, amplitude=float(np.sqrt(power / p1)), power=float(power))


def intensity(mode: FiberMode, pol: Polarization, power: float, r, phi=0.0):
    """Intensity of ``mode`` rescaled to ``power``."""
    if mode.power == power:
        return mode.intensity(pol, r, phi)
    return power_normalize(mode, power).intensity(pol, r, phi)


def dispersion_residual(mode: FiberMode) -> float:
    fiber = FiberSpec(radius=mode.radius, index_clad=mode.n_clad,
                      core_index=lambda _lam, n=mode.n_core: n)
    return abs(dispersion_function(fiber, mode.wavelength, mode.beta))
