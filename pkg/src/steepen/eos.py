"""Polytropic ideal-gas thermodynamics in the (z, m) coordinate frame.

The whole diagnostic machinery works in the rescaled variables

    z = (2*sqrt(K*gamma)/(gamma-1)) * tau**(-(gamma-1)/2)
    m = exp(S / (2*c_v))

in which specific volume, pressure and the Lagrangian sound speed become
pure power laws::

    tau = K_tau * z**(-2/(gamma-1))
    p   = K_p * m**2 * z**(2*gamma/(gamma-1))
    c   = K_c * m * z**((gamma+1)/(gamma-1))

(tau, S) appear only at ingestion and report boundaries; everything else in
the package consumes (z, m).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Positive floor for the metric-density variable z.  Values at or below the
#: floor count as vacuum, which the smooth-solution machinery excludes.
Z_FLOOR = 1e-10


class VacuumError(ValueError):
    """A state touched the vacuum guard (z or tau at/below the floor)."""


@dataclass(frozen=True)
class GasConstants:
    """Gas law parameters plus the derived power-law coefficients.

    K_tau, K_p, K_c are fixed by (gamma, K); they always satisfy
    K_p = (gamma-1)/(2*gamma) * K_c.
    """

    gamma: float
    K: float
    c_v: float
    K_tau: float
    K_p: float
    K_c: float


def make_constants(gamma: float, K: float, c_v: float) -> GasConstants:
    """Build a :class:`GasConstants` record, deriving K_tau, K_p, K_c.

    Raises ValueError unless gamma > 1, K > 0 and c_v > 0.
    """
    if not gamma > 1.0:
        raise ValueError(f"adiabatic exponent must exceed 1, got gamma={gamma}")
    if not K > 0.0:
        raise ValueError(f"pressure-law constant must be positive, got K={K}")
    if not c_v > 0.0:
        raise ValueError(f"specific heat must be positive, got c_v={c_v}")
    K_tau = (2.0 * np.sqrt(K * gamma) / (gamma - 1.0)) ** (2.0 / (gamma - 1.0))
    K_p = K * K_tau ** (-gamma)
    K_c = np.sqrt(K * gamma) * K_tau ** (-(gamma + 1.0) / 2.0)
    return GasConstants(gamma=gamma, K=K, c_v=c_v, K_tau=K_tau, K_p=K_p, K_c=K_c)


def z_of_tau(tau, gc: GasConstants):
    """Metric-density variable z from specific volume tau (tau > 0)."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0.0) or not np.all(np.isfinite(tau)):
        raise VacuumError("specific volume must be positive and finite")
    g = gc.gamma
    z = (2.0 * np.sqrt(gc.K * g) / (g - 1.0)) * tau ** (-(g - 1.0) / 2.0)
    return z if z.ndim else float(z)


def tau_of_z(z, gc: GasConstants, z_floor: float = Z_FLOOR):
    """Specific volume from z; inverse of :func:`z_of_tau`."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= z_floor) or not np.all(np.isfinite(z)):
        raise VacuumError(f"z must exceed the vacuum floor {z_floor:g}")
    tau = gc.K_tau * z ** (-2.0 / (gc.gamma - 1.0))
    return tau if tau.ndim else float(tau)


def thermo(z, m, gc: GasConstants, z_floor: float = Z_FLOOR):
    """Pressure and Lagrangian sound speed at (z, m).

    Returns the pair (p, c); both are strictly positive for valid inputs.
    """
    z = np.asarray(z, dtype=float)
    m = np.asarray(m, dtype=float)
    if np.any(z <= z_floor) or not np.all(np.isfinite(z)):
        raise VacuumError(f"z must exceed the vacuum floor {z_floor:g}")
    if np.any(m <= 0.0):
        raise ValueError("entropy variable m must be positive")
    g = gc.gamma
    p = gc.K_p * m**2 * z ** (2.0 * g / (g - 1.0))
    c = gc.K_c * m * z ** ((g + 1.0) / (g - 1.0))
    if p.ndim:
        return p, c
    return float(p), float(c)


def m_of_entropy(S, gc: GasConstants):
    """Entropy variable m = exp(S / (2 c_v)); positive for any real S."""
    m = np.exp(np.asarray(S, dtype=float) / (2.0 * gc.c_v))
    return m if m.ndim else float(m)


def entropy_of_m(m, gc: GasConstants):
    """Inverse of :func:`m_of_entropy` (ingestion/report boundary only)."""
    m = np.asarray(m, dtype=float)
    if np.any(m <= 0.0):
        raise ValueError("entropy variable m must be positive")
    S = 2.0 * gc.c_v * np.log(m)
    return S if S.ndim else float(S)


def pressure_tau_S(tau, S, gc: GasConstants):
    """Pressure in the original (tau, S) variables: K e^(S/c_v) tau^(-gamma).

    Report-boundary helper; the rest of the package uses :func:`thermo`.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0.0):
        raise VacuumError("specific volume must be positive")
    p = gc.K * np.exp(np.asarray(S, dtype=float) / gc.c_v) * tau ** (-gc.gamma)
    return p if p.ndim else float(p)
