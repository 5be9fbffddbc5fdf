"""Closed-form observables of the linearized optomechanical system.

Rates are ordinary frequencies in Hz. Formulas that mix powers in watts
with rates convert through :mod:`snailopto.units`, so each expression
below reads as the textbook formula in angular units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import units


@dataclass(frozen=True)
class DriveCondition:
    """Mean drive photon number and detuning ``omega_m - omega_d`` (Hz)."""

    n_d: float
    detuning: float = 0.0
    red_sideband: bool = True

    def __post_init__(self):
        if self.n_d < 0:
            raise ValueError("n_d must be non-negative")


@dataclass(frozen=True)
class CalibrationInputs:
    """Line attenuations (linear power ratios), generator powers (W) and phonon number."""

    a_m: float
    a_s: float
    p_m: float = 0.0
    p_s: float = 0.0
    n_s: float = 0.0

    def __post_init__(self):
        for name in ("a_m", "a_s"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v!r}")
        if self.p_m < 0 or self.p_s < 0:
            raise ValueError("generator powers must be non-negative")

    @classmethod
    def from_db(cls, a_m_db: float, a_s_db: float, **kw) -> "CalibrationInputs":
        return cls(units.db_to_ratio(a_m_db), units.db_to_ratio(a_s_db), **kw)


def _nonneg(name, value):
    if np.any(np.asarray(value) < 0):
        raise ValueError(f"{name} must be non-negative")


def linearized_coupling(g0, n_d):
    """Beam-splitter coupling ``g0 sqrt(n_d)`` under a red-sideband drive."""
    _nonneg("n_d", n_d)
    return g0 * np.sqrt(n_d) if np.ndim(n_d) else g0 * math.sqrt(n_d)


def cooperativity(g0, kappa, gamma, n_d=1.0):
    """Single-photon cooperativity ``C0 = 4 g0^2/(kappa Gamma)`` and ``C = C0 n_d``."""
    if kappa <= 0 or gamma <= 0:
        raise ValueError("kappa and gamma must be positive")
    _nonneg("n_d", n_d)
    c0 = 4.0 * g0**2 / (kappa * gamma)
    return c0, c0 * n_d


def conversion_output_power(n_s, n_d, c0, kappa_ex, omega_m):
    """Converted microwave output power in watts.

    ``P_out = hbar omega_m kappa_ex n_s 4 C0 n_d / (1 + C0 n_d)^2`` with
    ``kappa_ex`` and ``omega_m`` taken as angular rates.
    """
    for name, v in (("n_s", n_s), ("n_d", n_d), ("c0", c0), ("kappa_ex", kappa_ex), ("omega_m", omega_m)):
        _nonneg(name, v)
    c = c0 * np.asarray(n_d, dtype=float)
    p = units.photon_energy(omega_m) * units.angular(kappa_ex) * n_s * 4.0 * c / (1.0 + c) ** 2
    return float(p) if np.ndim(p) == 0 else p


def total_linewidth(gamma, c0, n_d):
    """Mechanical linewidth broadened by optomechanical damping, ``(1 + C0 n_d) Gamma``."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    _nonneg("n_d", n_d)
    out = (1.0 + c0 * np.asarray(n_d, dtype=float)) * gamma
    return float(out) if np.ndim(out) == 0 else out


STARK_NOTE = (
    "stark shift evaluated as 2 g^2 alpha0 / delta^2; with g = 6.4 MHz, alpha0 = -13.0 MHz "
    "and delta = 5.195 GHz this gives about 39 Hz in magnitude while the device analysis "
    "quotes 22 Hz; the formula is applied literally"
)


def stark_shift_per_phonon(g, alpha0, delta):
    """Frequency pull of the MW resonator per SAW phonon, ``2 g^2 alpha0 / delta^2``."""
    if delta == 0:
        raise ValueError("delta must be non-zero")
    return 2.0 * g**2 * alpha0 / delta**2


def phonon_number(p_s, a_s, omega_s, gamma):
    """Intracavity phonon number ``4 A_s P_s / (hbar omega_s Gamma)`` (angular rates)."""
    _nonneg("p_s", p_s)
    if a_s <= 0 or omega_s <= 0 or gamma <= 0:
        raise ValueError("a_s, omega_s and gamma must be positive")
    out = 4.0 * a_s * np.asarray(p_s, dtype=float) / (units.photon_energy(omega_s) * units.angular(gamma))
    return float(out) if np.ndim(out) == 0 else out


def attenuation_from_phonon_number(n_s, p_s, omega_s, gamma):
    """Invert :func:`phonon_number` for the line attenuation (linear ratio)."""
    if p_s <= 0:
        raise ValueError("p_s must be positive")
    return n_s * units.photon_energy(omega_s) * units.angular(gamma) / (4.0 * p_s)


def drive_amplitude(p_m, a_m, kappa_ex, omega_m):
    """Drive amplitude in Hz, ``sqrt(4 A_m P_m kappa_ex / (hbar omega_m))`` divided by 2 pi."""
    _nonneg("p_m", p_m)
    if a_m <= 0 or kappa_ex < 0 or omega_m <= 0:
        raise ValueError("a_m and omega_m must be positive, kappa_ex non-negative")
    rate = 4.0 * a_m * np.asarray(p_m, dtype=float) * units.angular(kappa_ex) / units.photon_energy(omega_m)
    return units.ordinary(np.sqrt(rate)) if np.ndim(p_m) else units.ordinary(math.sqrt(float(rate)))


def linear_photon_number(drive, detuning, kappa):
    """Photons in a linear driven resonator, ``drive^2 / (detuning^2 + kappa^2/4)``."""
    return drive**2 / (detuning**2 + 0.25 * kappa**2)


RESPONSE_HEADER = ("n_d", "c", "gamma_all_hz", "p_out_w")


def response_rows(n_d: Sequence[float], c0, gamma, n_s, kappa_ex, omega_m):
    for n in n_d:
        n = float(n)
        yield (
            n,
            c0 * n,
            total_linewidth(gamma, c0, n),
            conversion_output_power(n_s, n, c0, kappa_ex, omega_m),
        )
