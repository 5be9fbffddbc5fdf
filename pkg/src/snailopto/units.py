"""Unit conversions.

Every rate and energy in the package is an ordinary frequency in Hz
(``X/h`` for energies, ``X/2pi`` for angular rates). Formulas that mix
powers in watts with rates need angular frequencies; they go through the
helpers here so the 2*pi factors live in exactly one place.
"""

import math

import numpy as np
from scipy import constants

HBAR = constants.hbar
TWO_PI = 2.0 * math.pi


def _like(x, value):
    # keep python floats for scalar input, arrays otherwise
    return float(value) if np.ndim(x) == 0 else value


def angular(f_hz):
    """Ordinary frequency (Hz) to angular frequency (rad/s)."""
    return _like(f_hz, TWO_PI * np.asarray(f_hz, dtype=float))


def ordinary(w_rad):
    """Angular frequency (rad/s) to ordinary frequency (Hz)."""
    return _like(w_rad, np.asarray(w_rad, dtype=float) / TWO_PI)


def photon_energy(f_hz):
    """Energy of one quantum, hbar*omega, in joules."""
    return _like(f_hz, HBAR * TWO_PI * np.asarray(f_hz, dtype=float))


def db_to_ratio(db):
    """Power ratio from decibels; -3.0103 dB halves the power."""
    return _like(db, 10.0 ** (np.asarray(db, dtype=float) / 10.0))


def ratio_to_db(ratio):
    r = np.asarray(ratio, dtype=float)
    if np.any(r <= 0):
        raise ValueError("power ratio must be positive")
    return _like(ratio, 10.0 * np.log10(r))


def dbm_to_watts(dbm):
    return _like(dbm, 1e-3 * 10.0 ** (np.asarray(dbm, dtype=float) / 10.0))


def watts_to_dbm(watts):
    return _like(watts, ratio_to_db(np.asarray(watts, dtype=float) / 1e-3))
