"""Second-order elimination of the Pockels and piezoelectric terms.

Given the resonator spectrum (omega_m, alpha0, beta) and the SAW mode
(omega_s, coupling g), the effective Hamiltonian keeps a renormalized
self-Kerr term and an artificial radiation-pressure term
``g0 a^dag a (b^dag + b)`` plus five smaller terms, all reported here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import circuit
from .circuit import ModeSpectrum, SnailParams
from .errors import DegenerateDetuning, DegenerateMinimum, InvalidCurvature, NoZeroCrossing

VALIDITY_THRESHOLD = 0.1
# perturbation theory is refused when |delta| < DETUNING_FACTOR * max(|g|, |beta|)
DETUNING_FACTOR = 10.0
ZERO_KERR_GRID = 2001
ZERO_KERR_TOL = 1e-9


@dataclass(frozen=True)
class LossBudget:
    """Decomposition of the MW internal loss; stored, never computed."""

    kappa_e: float
    kappa_a: float
    kappa_cross: float
    kappa_rad: float


@dataclass(frozen=True)
class HybridParams:
    """Flux-independent hybrid constants (Hz), optionally with a resonator spectrum.

    ``kappa`` is derived as ``kappa_ex + kappa_in``.
    """

    g: float
    omega_s: float
    kappa_ex: float
    kappa_in: float
    gamma: float
    gamma_ex: float
    spectrum: ModeSpectrum | None = None
    loss_budget: LossBudget | None = None

    def __post_init__(self):
        if self.kappa_ex < 0 or self.kappa_in < 0:
            raise ValueError("MW loss rates must be non-negative")
        if not self.gamma >= self.gamma_ex >= 0:
            raise ValueError("need gamma >= gamma_ex >= 0")
        if self.omega_s <= 0:
            raise ValueError("omega_s must be positive")
        if self.spectrum is not None and self.omega_s >= self.spectrum.omega_m:
            raise ValueError("the SAW mode must lie below the MW resonance")

    @property
    def kappa(self) -> float:
        return self.kappa_ex + self.kappa_in

    def with_spectrum(self, spectrum: ModeSpectrum) -> "HybridParams":
        return replace(self, spectrum=spectrum)


@dataclass(frozen=True)
class ValidityReport:
    ratio: float
    threshold: float = VALIDITY_THRESHOLD

    @property
    def passed(self) -> bool:
        return self.ratio < self.threshold


@dataclass(frozen=True)
class EffectiveParams:
    """Coefficients of the effective Hamiltonian, in Hz.

    ``g0`` is the radiation-pressure coupling in its large-detuning form
    ``-2 g beta / delta``; ``g0_exact`` is the full second-order coefficient
    ``-(g beta / delta + g beta / omega_m)``. The remaining fields are the
    prefactors of

    * ``two_photon_conversion``: ``a^dag a^dag b + h.c.``
    * ``casimir``: ``a^dag a^dag b^dag + h.c.``
    * ``kerr_assisted_sum``: ``a^dag a a b + h.c.``
    * ``kerr_assisted_diff``: ``a^dag a a b^dag + h.c.``
    * ``fifth_order``: ``a^dag a^dag a a a + h.c.``
    """

    alpha: float
    g0: float
    g0_exact: float
    delta: float
    two_photon_conversion: float
    casimir: float
    kerr_assisted_sum: float
    kerr_assisted_diff: float
    fifth_order: float
    validity: ValidityReport

    def terms(self) -> dict:
        return {
            "alpha": self.alpha,
            "g0_exact": self.g0_exact,
            "two_photon_conversion": self.two_photon_conversion,
            "casimir": self.casimir,
            "kerr_assisted_sum": self.kerr_assisted_sum,
            "kerr_assisted_diff": self.kerr_assisted_diff,
            "fifth_order": self.fifth_order,
        }


def validity_report(h: HybridParams, threshold: float = VALIDITY_THRESHOLD) -> ValidityReport:
    s = h.spectrum
    delta = s.omega_m - h.omega_s
    small = max(abs(s.alpha0), abs(s.beta), abs(h.g))
    large = min(s.omega_m, h.omega_s, delta)
    ratio = math.inf if large <= 0 else small / large
    return ValidityReport(ratio=ratio, threshold=threshold)


def effective_kerr(s: ModeSpectrum) -> float:
    return s.alpha0 - 3.0 * s.beta**2 / s.omega_m


def effective_coefficients(
    h: HybridParams, threshold: float = VALIDITY_THRESHOLD, strict: bool = True
) -> EffectiveParams:
    """Effective self-Kerr, radiation-pressure coupling and auxiliary terms.

    With ``strict=False`` the small-detuning guard is skipped, which lets
    the oracle comparison evaluate the formulas outside their domain.
    """
    s = h.spectrum
    if s is None:
        raise ValueError("HybridParams has no resonator spectrum")
    wm, ws, g = s.omega_m, h.omega_s, h.g
    a0, b = s.alpha0, s.beta
    delta = wm - ws
    if delta <= 0 or (strict and abs(delta) < DETUNING_FACTOR * max(abs(g), abs(b))):
        raise DegenerateDetuning(
            f"detuning {delta:.6g} Hz too small against g = {g:.3g} Hz, beta = {b:.3g} Hz"
        )
    return EffectiveParams(
        alpha=effective_kerr(s),
        g0=-2.0 * g * b / delta,
        g0_exact=-(g * b / delta + g * b / wm),
        delta=delta,
        two_photon_conversion=-g * b * ws / (2.0 * wm * delta),
        casimir=g * b * ws / (2.0 * wm * (wm + ws)),
        kerr_assisted_sum=-2.0 * g * a0 / (wm + ws),
        kerr_assisted_diff=-2.0 * g * a0 / (wm - ws),
        fifth_order=-2.0 * a0 * b / wm,
        validity=validity_report(h, threshold),
    )


def _alpha_at(p: SnailParams, phi_frac: float) -> float:
    try:
        return effective_kerr(circuit.mode_spectrum(p, phi_frac))
    except (DegenerateMinimum, InvalidCurvature):
        return math.nan


@dataclass(frozen=True)
class ZeroKerrPoint:
    phi_frac: float
    spectrum: ModeSpectrum
    effective: EffectiveParams


def find_zero_kerr_flux(
    p: SnailParams,
    h: HybridParams,
    window: Sequence[float] = (0.0, 0.5),
    points: int = ZERO_KERR_GRID,
    tol: float = ZERO_KERR_TOL,
) -> list[ZeroKerrPoint]:
    """Flux biases in ``window`` where the effective self-Kerr vanishes.

    Sign changes of the effective Kerr on a uniform grid are refined by
    bisection to ``tol`` flux quanta.

    Raises
    ------
    NoZeroCrossing
        If the effective Kerr keeps one sign over the window.
    """
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise ValueError("empty flux window")
    grid = np.linspace(lo, hi, points)
    alpha = np.array([_alpha_at(p, x) for x in grid])
    roots = []
    for i in range(points - 1):
        a, b = alpha[i], alpha[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0.0:
            roots.append(grid[i])
            continue
        if a * b < 0:
            roots.append(_bisect(p, grid[i], grid[i + 1], a, tol))
    if points and alpha[-1] == 0.0:
        roots.append(grid[-1])
    if not roots:
        raise NoZeroCrossing(f"effective Kerr keeps one sign on [{lo}, {hi}]")
    out = []
    for x in roots:
        s = circuit.mode_spectrum(p, x)
        out.append(ZeroKerrPoint(float(x), s, effective_coefficients(h.with_spectrum(s))))
    return out


def _bisect(p, x0, x1, a0, tol):
    while x1 - x0 > tol:
        mid = 0.5 * (x0 + x1)
        am = _alpha_at(p, mid)
        if am == 0.0:
            return mid
        if (am < 0) == (a0 < 0):
            x0, a0 = mid, am
        else:
            x1 = mid
    return 0.5 * (x0 + x1)


@dataclass(frozen=True)
class DesignPoint:
    varied: str
    value: float
    g0: float | None
    c0: float | None
    phi_frac: float | None = None
    status: str = "ok"


def cooperativity_c0(g0: float, kappa: float, gamma: float) -> float:
    return 4.0 * g0**2 / (kappa * gamma)


def design_sweep(
    vary: str,
    values: Sequence[float],
    p: SnailParams,
    h: HybridParams,
    window: Sequence[float] = (0.0, 0.5),
) -> list[DesignPoint]:
    """g0 and C0 at the zero-Kerr flux while one design parameter is swept.

    ``vary`` is ``"ej_large"`` or ``"omega_s"``. Points where the loop has
    several wells, or where no zero-Kerr flux exists, carry a status and no
    values.
    """
    if vary not in ("ej_large", "omega_s"):
        raise ValueError(f"cannot sweep {vary!r}; choose ej_large or omega_s")
    out = []
    for v in values:
        v = float(v)
        pp, hh = (replace(p, ej_large=v), h) if vary == "ej_large" else (p, replace(h, omega_s=v, spectrum=None))
        if vary == "ej_large" and circuit.is_multiwell(pp):
            out.append(DesignPoint(vary, v, None, None, status="multiwell"))
            continue
        try:
            root = find_zero_kerr_flux(pp, hh, window)[0]
        except NoZeroCrossing:
            out.append(DesignPoint(vary, v, None, None, status="no-zero-crossing"))
            continue
        except (DegenerateMinimum, DegenerateDetuning, ValueError) as exc:
            out.append(DesignPoint(vary, v, None, None, status=type(exc).__name__))
            continue
        g0 = root.effective.g0
        out.append(DesignPoint(vary, v, g0, cooperativity_c0(g0, hh.kappa, hh.gamma), root.phi_frac))
    return out


EFFECTIVE_HEADER = ("phi_frac", "alpha_hz", "g0_hz", "g0_exact_hz", "valid")
DESIGN_HEADER = ("varied", "value", "g0_hz", "c0")


def effective_rows(p: SnailParams, h: HybridParams, grid: Sequence[float]):
    for x in grid:
        x = float(x)
        try:
            s = circuit.mode_spectrum(p, x)
            e = effective_coefficients(h.with_spectrum(s), strict=False)
        except (DegenerateMinimum, InvalidCurvature, DegenerateDetuning, ValueError):
            yield (x, None, None, None, 0)
            continue
        valid = e.validity.passed and abs(e.delta) >= DETUNING_FACTOR * max(abs(h.g), abs(s.beta))
        yield (x, e.alpha, e.g0, e.g0_exact, int(valid))


def design_rows(points: Sequence[DesignPoint]):
    for pt in points:
        yield (pt.varied, pt.value, pt.g0, pt.c0)
