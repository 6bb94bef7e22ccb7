"""Bessel functions J_n, K_n, I_n (orders 0-2) and their derivatives.

Values come from the Cephes/AMOS kernels in :mod:`scipy.special`; this module
only pins the supported orders, enforces the positive-argument domain and
builds first derivatives from the standard three-term recurrences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError

_KERNELS = {"J": special.jv, "K": special.kv, "I": special.iv}


@dataclass(frozen=True)
class BesselKind:
    kind: str
    order: int

    def __post_init__(self):
        if self.kind not in _KERNELS:
            raise ValueError(f"unknown Bessel kind {self.kind!r}; expected J, K or I")
        if self.order not in (0, 1, 2):
            raise ValueError(f"order must be 0, 1 or 2, got {self.order}")


def _check_domain(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("Bessel argument must be strictly positive")
    return x


def _raw(kind: str, order: int, x):
    # order -1 enters the n = 0 recurrences: J_{-1} = -J_1, K_{-1} = K_1, I_{-1} = I_1
    if order == -1:
        return -special.jv(1, x) if kind == "J" else _KERNELS[kind](1, x)
    return _KERNELS[kind](order, x)


def evaluate(kind: BesselKind, x):
    """Value of the Bessel function ``kind`` at ``x > 0`` (scalar or array)."""
    x = _check_domain(x)
    out = _raw(kind.kind, kind.order, x)
    return out if out.ndim else float(out)


def evaluate_derivative(kind: BesselKind, x):
    """First derivative with respect to the argument.

    J_n' = (J_{n-1} - J_{n+1})/2, I_n' = (I_{n-1} + I_{n+1})/2 and
    K_n' = -(K_{n-1} + K_{n+1})/2.
    """
    x = _check_domain(x)
    n, k = kind.order, kind.kind
    lo, hi = _raw(k, n - 1, x), _raw(k, n + 1, x)
    if k == "J":
        out = 0.5 * (lo - hi)
    elif k == "I":
        out = 0.5 * (lo + hi)
    else:
        out = -0.5 * (lo + hi)
    return out if out.ndim else float(out)


def J(n: int, x):
    return evaluate(BesselKind("J", n), x)


def K(n: int, x):
    return evaluate(BesselKind("K", n), x)


def I(n: int, x):  # noqa: E743
    return evaluate(BesselKind("I", n), x)


def Jp(n: int, x):
    return evaluate_derivative(BesselKind("J", n), x)


def Kp(n: int, x):
    return evaluate_derivative(BesselKind("K", n), x)


def Ip(n: int, x):
    return evaluate_derivative(BesselKind("I", n), x)
