"""SNAIL potential, its minimum, Taylor coefficients and quantization.

Energies are frequency-equivalents in Hz (``E/h``). The potential of the
loop, as a function of the phase ``theta`` across the small junction, is

    U(theta) = -E_J' cos(theta) - 2 E_J cos((phi - theta) / 2)

with ``phi = 2 pi Phi/Phi_0``. Its theta-period is 4 pi.

Sign convention for the expansion coefficients ``chi``: around the
minimum ``theta0``,

    U(theta0 + t) / E_J = const + chi[2] t**2 - sum_{i>=3} chi[i] t**i

so ``chi[2]`` is the (positive) curvature coefficient and the higher
coefficients carry the sign of ``-U``. With this choice the quantized
coefficients below have their physical signs (a transmon-like well gives
``alpha0 < 0``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateMinimum, InvalidCurvature

GRID_POINTS = 4096
# two minima whose depths differ by less than this (in units of E_J) are degenerate
DEGENERACY_TOL = 1e-9
GRADIENT_TOL = 1e-12
TRANSMON_RATIO_WARN = 50.0


class TransmonLimitWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SnailParams:
    """Circuit energies in Hz: large-junction E_J, small-junction E_J', charging E_C."""

    ej_large: float
    ej_small: float
    ec: float

    def __post_init__(self):
        for name in ("ej_large", "ej_small", "ec"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if self.ej_large / self.ec < TRANSMON_RATIO_WARN:
            warnings.warn(
                f"E_J/E_C = {self.ej_large / self.ec:.3g} < {TRANSMON_RATIO_WARN:g}; "
                "the transmon-limit expansion is unreliable",
                TransmonLimitWarning,
                stacklevel=3,
            )

    @property
    def junction_ratio(self) -> float:
        """E_J / E_J'; the loop has several wells when this is <= 2."""
        return self.ej_large / self.ej_small


@dataclass(frozen=True)
class FluxBias:
    """External flux in flux quanta."""

    phi_frac: float

    @property
    def phi(self) -> float:
        return 2.0 * math.pi * self.phi_frac


@dataclass(frozen=True)
class PotentialExpansion:
    theta0: float
    chi: Mapping[int, float] = field(default_factory=dict)
    multiwell: bool = False

    @property
    def order(self) -> int:
        return max(self.chi)


@dataclass(frozen=True)
class ModeSpectrum:
    """Resonator frequency, bare self-Kerr and Pockels coefficients (Hz)."""

    omega_m: float
    alpha0: float
    beta: float


@dataclass(frozen=True)
class SweepPoint:
    phi_frac: float
    spectrum: ModeSpectrum | None
    expansion: PotentialExpansion | None
    multiwell: bool
    error: str | None = None


def _as_flux(f) -> FluxBias:
    return f if isinstance(f, FluxBias) else FluxBias(float(f))


def inductive_energy(p: SnailParams, f, theta):
    """Potential energy of the loop in Hz; vectorized over ``theta``."""
    phi = _as_flux(f).phi
    theta = np.asarray(theta, dtype=float)
    u = -p.ej_small * np.cos(theta) - 2.0 * p.ej_large * np.cos((phi - theta) / 2.0)
    return float(u) if u.ndim == 0 else u


def potential_derivative(p: SnailParams, f, theta, n: int):
    """Closed-form ``n``-th theta-derivative of :func:`inductive_energy`."""
    phi = _as_flux(f).phi
    theta = np.asarray(theta, dtype=float)
    cyc = _COS_DERIVATIVES[n % 4]
    d = -p.ej_small * cyc(theta) - 2.0 * p.ej_large * (-0.5) ** n * cyc((phi - theta) / 2.0)
    return float(d) if d.ndim == 0 else d


# d^n/dx^n cos(x), written without phase shifts so that symmetric points stay exact
_COS_DERIVATIVES = (
    np.cos,
    lambda x: -np.sin(x),
    lambda x: -np.cos(x),
    np.sin,
)


def _refine_minimum(p, f, lo, hi):
    du = lambda t: potential_derivative(p, f, t, 1)
    theta = brentq(du, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    # Newton polish; brentq stops on the bracket width, not on |U'|
    for _ in range(3):
        d1 = potential_derivative(p, f, theta, 1)
        if abs(d1) < GRADIENT_TOL * p.ej_large:
            break
        theta -= d1 / potential_derivative(p, f, theta, 2)
    return theta


def _wrap(theta):
    # into [-2 pi, 2 pi)
    return (theta + 2.0 * math.pi) % (4.0 * math.pi) - 2.0 * math.pi


def local_minima(p: SnailParams, f, points: int = GRID_POINTS):
    """All distinct local minima of the potential over one 4 pi period.

    Returns a list of ``(theta, U(theta))`` sorted by depth.
    """
    f = _as_flux(f)
    h = 4.0 * math.pi / points
    grid = -2.0 * math.pi + h * np.arange(points)
    u = inductive_energy(p, f, grid)
    left = np.roll(u, 1)
    right = np.roll(u, -1)
    candidates = np.flatnonzero((u < left) & (u <= right))
    found = []
    for k in candidates:
        t = grid[k]
        lo, hi = t - h, t + h
        if potential_derivative(p, f, lo, 1) >= 0 or potential_derivative(p, f, hi, 1) <= 0:
            continue
        theta = _wrap(_refine_minimum(p, f, lo, hi))
        if potential_derivative(p, f, theta, 2) <= 0:
            continue
        if any(abs(_wrap(theta - other)) < 1e-9 for other, _ in found):
            continue
        found.append((theta, inductive_energy(p, f, theta)))
    found.sort(key=lambda item: item[1])
    return found


def find_potential_minimum(p: SnailParams, f) -> tuple[float, bool]:
    """Global minimum ``theta0`` over one period and a multi-well flag.

    Raises
    ------
    DegenerateMinimum
        If two minima are equally deep to within ``1e-9 E_J``.
    """
    minima = local_minima(p, f)
    if not minima:
        raise DegenerateMinimum("no local minimum found on the search grid", multiwell=False)
    multiwell = len(minima) > 1
    if multiwell and minima[1][1] - minima[0][1] < DEGENERACY_TOL * p.ej_large:
        raise DegenerateMinimum(
            f"degenerate wells at theta = {minima[0][0]:.6g}, {minima[1][0]:.6g}",
            minima=[m[0] for m in minima],
        )
    return minima[0][0], multiwell


def taylor_coefficients(p: SnailParams, f, order: int = 5) -> PotentialExpansion:
    """Expansion of the potential around its global minimum up to ``order``."""
    if order < 4:
        raise ValueError("order must be at least 4")
    theta0, multiwell = find_potential_minimum(p, f)
    chi = {2: potential_derivative(p, f, theta0, 2) / (2.0 * p.ej_large)}
    for i in range(3, order + 1):
        chi[i] = -potential_derivative(p, f, theta0, i) / (math.factorial(i) * p.ej_large)
    return PotentialExpansion(theta0=theta0, chi=chi, multiwell=multiwell)


def quantize(x: PotentialExpansion, p: SnailParams) -> ModeSpectrum:
    """Harmonic frequency plus the cubic and quartic corrections of the well."""
    chi2, chi3, chi4 = x.chi[2], x.chi[3], x.chi[4]
    if not chi2 > 0:
        raise InvalidCurvature(f"chi2 = {chi2!r} is not positive")
    ec, ej = p.ec, p.ej_large
    omega_m = math.sqrt(16.0 * ec * ej * chi2) - 12.0 * ec * chi4 / chi2
    beta = -3.0 * ec * (chi2 * ej / ec) ** 0.25 * chi3 / chi2
    alpha0 = -6.0 * ec * chi4 / chi2
    return ModeSpectrum(omega_m=omega_m, alpha0=alpha0, beta=beta)


def mode_spectrum(p: SnailParams, f, order: int = 5) -> ModeSpectrum:
    return quantize(taylor_coefficients(p, f, order), p)


def sweep_flux(p: SnailParams, grid: Sequence) -> list[SweepPoint]:
    """Evaluate the quantization chain at every flux point.

    Points in a degenerate double well are kept with ``spectrum=None``.
    """
    if len(grid) == 0:
        raise ValueError("empty flux grid")
    out = []
    for f in grid:
        f = _as_flux(f)
        try:
            x = taylor_coefficients(p, f)
            out.append(SweepPoint(f.phi_frac, quantize(x, p), x, x.multiwell))
        except (DegenerateMinimum, InvalidCurvature) as exc:
            out.append(SweepPoint(f.phi_frac, None, None, True, error=type(exc).__name__))
    return out


def is_multiwell(p: SnailParams) -> bool:
    """True when the loop potential has several wells at some flux.

    Half a flux quantum is the worst case, so checking there suffices.
    """
    return len(local_minima(p, 0.5)) > 1


SPECTRUM_HEADER = ("phi_frac", "omega_m_hz", "alpha0_hz", "beta_hz", "multiwell")


def spectrum_rows(points: Sequence[SweepPoint]):
    for pt in points:
        s = pt.spectrum
        if s is None:
            yield (pt.phi_frac, None, None, None, int(pt.multiwell))
        else:
            yield (pt.phi_frac, s.omega_m, s.alpha0, s.beta, int(pt.multiwell))
