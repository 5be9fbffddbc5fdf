"""Data reduction: a damped least-squares engine and the three fits built on it.

* :func:`least_squares` is a Levenberg-Marquardt solver with Marquardt
  scaling and a gain-ratio damping update.
* :func:`fit_complex_lorentzians` fits a sum of Lorentzians with one shared
  complex baseline in the complex plane.
* :func:`fit_kerr_saturation` fits the self-Kerr coefficient and the input
  line attenuation to the power dependence of a driven Kerr resonator,
  using the Lindblad steady state as the forward model.
* :func:`fit_linear_cooperativity` fits ``C = C0 n_d`` on a low-power subset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import fock, units
from .errors import (
    InsufficientLowPowerPoints,
    NonConvergence,
    NumericalError,
    OracleFailure,
    SingularJacobian,
    TruncationTooSmall,
)
from .response import drive_amplitude

GTOL = 1e-10
XTOL = 1e-14
MAX_ITER = 500
RANK_TOL = 1e-12


@dataclass
class FitResult:
    """Fitted parameters with 1-sigma uncertainties from the linearized covariance."""

    names: tuple
    values: np.ndarray
    sigma: np.ndarray
    residual_norm: float
    converged: bool
    iterations: int
    covariance: np.ndarray | None = None
    cost_history: list = field(default_factory=list)
    message: str = ""
    flags: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def sigma_of(self, name: str) -> float:
        return float(self.sigma[self.names.index(name)])

    def rows(self):
        """``(name, value, sigma)`` triples for report output."""
        return [(n, float(v), float(s)) for n, v, s in zip(self.names, self.values, self.sigma)]


REPORT_HEADER = ("name", "value", "sigma")


def _as_real(r) -> np.ndarray:
    r = np.asarray(r)
    if np.iscomplexobj(r):
        return np.concatenate([r.real.ravel(), r.imag.ravel()])
    return r.astype(float).ravel()


def numerical_jacobian(fun: Callable, x: np.ndarray, diff_step: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian with steps relative to ``|x|``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        h = diff_step * max(abs(x[j]), 1.0)
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        cols.append((_as_real(fun(xp)) - _as_real(fun(xm))) / (2.0 * h))
    return np.column_stack(cols)


def _covariance(J: np.ndarray, cost: float):
    m, n = J.shape
    _, s, vt = np.linalg.svd(J, full_matrices=False)
    dof = m - n
    s2 = 2.0 * cost / dof if dof > 0 else 1.0
    if s.size == 0 or s[0] == 0 or s[-1] <= RANK_TOL * s[0]:
        return None
    cov = (vt.T / s**2) @ vt * s2
    return cov


def least_squares(
    fun: Callable,
    x0: Sequence[float],
    jac: Callable | None = None,
    names: Sequence[str] | None = None,
    gtol: float = GTOL,
    xtol: float = XTOL,
    max_iter: int = MAX_ITER,
    diff_step: float = 1e-6,
    raise_on_failure: bool = True,
) -> FitResult:
    """Minimize ``0.5 ||fun(x)||^2`` by Levenberg-Marquardt.

    ``fun`` may return real or complex residuals; complex ones are split
    into real and imaginary parts. Convergence is declared when the
    relative gradient ``||J^T r|| / (||J|| ||r||)`` drops below ``gtol``,
    when the residual vanishes, or when an accepted step is below
    ``xtol`` relative to ``x``. The accepted cost never increases. A trial
    step whose evaluation raises :class:`OracleFailure` is rejected like a
    step that increases the cost.

    Raises
    ------
    NonConvergence
        After ``max_iter`` iterations without convergence (the best point
        is attached as ``.result``).
    SingularJacobian
        If the Jacobian at the solution is rank deficient, so that the
        covariance does not exist (the solution is attached).
    """
    x = np.array(x0, dtype=float)
    n = x.size
    names = tuple(names) if names is not None else tuple(f"p{i}" for i in range(n))
    f = lambda p: _as_real(fun(p))
    J_of = (lambda p: np.asarray(jac(p), dtype=float)) if jac is not None else (lambda p: numerical_jacobian(fun, p, diff_step))
    r = f(x)
    if not np.all(np.isfinite(r)):
        raise ValueError("residual is not finite at the initial guess")
    cost = 0.5 * float(r @ r)
    history = [cost]
    J = J_of(x)
    diag = np.zeros(n)
    lam = None
    nu = 2.0
    converged = False
    message = "maximum number of iterations reached"
    it = 0
    for it in range(1, max_iter + 1):
        g = J.T @ r
        jnorm = np.linalg.norm(J)
        rnorm = math.sqrt(2.0 * cost)
        if rnorm == 0.0:
            converged, message = True, "zero residual"
            break
        if jnorm == 0.0 or np.linalg.norm(g) <= gtol * jnorm * rnorm:
            converged, message = True, "relative gradient below tolerance"
            break
        A = J.T @ J
        diag = np.maximum(diag, np.diag(A))
        d = np.maximum(diag, 1e-14 * diag.max())
        if lam is None:
            lam = 1e-3
        accepted = False
        while not accepted:
            try:
                step = np.linalg.solve(A + lam * np.diag(d), -g)
            except np.linalg.LinAlgError:
                lam *= nu
                nu *= 2.0
                continue
            x_new = x + step
            try:
                r_new = f(x_new)
            except OracleFailure:
                # the forward model cannot be evaluated there: treat as a rejected step
                r_new = np.full_like(r, math.inf)
            cost_new = 0.5 * float(r_new @ r_new) if np.all(np.isfinite(r_new)) else math.inf
            predicted = -(step @ g) - 0.5 * step @ A @ step
            rho = (cost - cost_new) / predicted if predicted > 0 else -1.0
            if cost_new < cost and rho > 0:
                accepted = True
                lam *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
                nu = 2.0
            else:
                lam *= nu
                nu *= 2.0
                if lam > 1e32:
                    break
        if not accepted:
            # no descent possible at machine precision: the point is stationary
            converged, message = True, "no further decrease possible"
            break
        small_step = np.linalg.norm(step) <= xtol * (np.linalg.norm(x) + xtol)
        x, r, cost = x_new, r_new, cost_new
        history.append(cost)
        J = J_of(x)
        if small_step:
            converged, message = True, "step below tolerance"
            break
    cov = _covariance(J, cost)
    sigma = np.sqrt(np.abs(np.diag(cov))) if cov is not None else np.full(n, math.inf)
    result = FitResult(
        names=names,
        values=x,
        sigma=sigma,
        residual_norm=math.sqrt(2.0 * cost),
        converged=converged,
        iterations=it,
        covariance=cov,
        cost_history=history,
        message=message,
    )
    if raise_on_failure:
        if not converged:
            raise NonConvergence(f"least squares did not converge in {max_iter} iterations", result=result)
        if cov is None:
            raise SingularJacobian("Jacobian is rank deficient at the solution", result=result)
    return result


# -- complex Lorentzians ----------------------------------------------------


@dataclass(frozen=True)
class ComplexSpectrum:
    """Complex response sampled at strictly increasing frequencies (Hz)."""

    freq: np.ndarray
    response: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.freq, dtype=float)
        y = np.asarray(self.response, dtype=complex)
        if f.ndim != 1 or f.shape != y.shape:
            raise ValueError("frequency and response must be 1-D arrays of equal length")
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        object.__setattr__(self, "freq", f)
        object.__setattr__(self, "response", y)


def lorentzian_sum(freq, centers, widths, amplitudes, baseline) -> np.ndarray:
    """``sum_j A_j / (i (f - f_j) + w_j / 2) + B``."""
    f = np.asarray(freq, dtype=float)[:, None]
    den = 1j * (f - np.asarray(centers)[None, :]) + 0.5 * np.asarray(widths)[None, :]
    return (np.asarray(amplitudes)[None, :] / den).sum(axis=1) + baseline


def _unpack_lorentzians(p, k: int):
    q = np.asarray(p[: 4 * k], dtype=float).reshape(k, 4)
    return q[:, 0], q[:, 1], q[:, 2] + 1j * q[:, 3], p[4 * k] + 1j * p[4 * k + 1]


def lorentzian_jacobian(freq, p, k: int) -> np.ndarray:
    """Analytic Jacobian of :func:`lorentzian_sum` with respect to the packed parameters.

    ``p`` holds ``(center, width, amp_re, amp_im)`` per peak followed by
    ``(baseline_re, baseline_im)``. Rows are the real parts of the
    residual followed by the imaginary parts.
    """
    u = np.asarray(freq, dtype=float)
    c, w, a, _ = _unpack_lorentzians(p, k)
    den = 1j * (u[:, None] - c[None, :]) + 0.5 * w[None, :]
    cols = []
    for j in range(k):
        d = den[:, j]
        cols += [a[j] * 1j / d**2, -0.5 * a[j] / d**2, 1.0 / d, 1j / d]
    cols += [np.ones_like(u, dtype=complex), 1j * np.ones_like(u, dtype=complex)]
    Jc = np.column_stack(cols)
    return np.vstack([Jc.real, Jc.imag])


def _half_max_width(f, m, c):
    half = 0.5 * m[c]
    left = c
    while left > 0 and m[left] > half:
        left -= 1
    right = c
    while right < len(m) - 1 and m[right] > half:
        right += 1

    def cross(i, j):
        # linear interpolation of the half-max crossing between samples i and j
        if m[i] == m[j]:
            return f[i]
        return f[i] + (half - m[i]) * (f[j] - f[i]) / (m[j] - m[i])

    fl = cross(left, left + 1) if m[left] <= half else f[0]
    fr = cross(right, right - 1) if m[right] <= half else f[-1]
    df = f[1] - f[0] if len(f) > 1 else 1.0
    return max(fr - fl, 2.0 * df)


def lorentzian_initial_guess(s: ComplexSpectrum, k: int):
    """Centers at the k largest local maxima of ``|response - median|``, widths at half maximum."""
    f, y = s.freq, s.response
    base = complex(np.median(y.real), np.median(y.imag))
    m = np.abs(y - base)
    interior = np.flatnonzero((m[1:-1] >= m[:-2]) & (m[1:-1] > m[2:])) + 1
    order = interior[np.argsort(m[interior])[::-1]]
    picks = list(order[:k])
    widths = [_half_max_width(f, m, c) for c in picks]
    # fewer local maxima than peaks: add the largest samples away from the chosen ones
    for idx in np.argsort(m)[::-1]:
        if len(picks) >= k:
            break
        if all(abs(f[idx] - f[c]) > 0.5 * w for c, w in zip(picks, widths)):
            picks.append(idx)
            widths.append(_half_max_width(f, m, idx))
    if len(picks) < k:
        raise NonConvergence(f"could not place {k} initial peaks")
    centers = f[np.array(picks)]
    amps = (y[np.array(picks)] - base) * np.array(widths) / 2.0
    return centers, np.array(widths), amps, base


def fit_complex_lorentzians(s: ComplexSpectrum, k: int, **options) -> FitResult:
    """Fit ``k`` Lorentzians plus a shared complex baseline in the complex plane.

    Parameters are returned per peak as ``center_j``, ``width_j``,
    ``amp_re_j``, ``amp_im_j`` (peaks ordered by center) followed by
    ``baseline_re`` and ``baseline_im``.

    Raises
    ------
    NonConvergence
        If the fit does not converge or is degenerate (no resolvable peak).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if len(s.freq) < 4 * k + 2:
        raise ValueError(f"need at least {4 * k + 2} points for {k} peaks")
    f, y = s.freq, s.response
    f0 = 0.5 * (f[0] + f[-1])
    span = f[-1] - f[0]
    u = (f - f0) / span
    centers, widths, amps, base = lorentzian_initial_guess(s, k)
    x0 = []
    for c, w, a in zip(centers, widths, amps):
        x0 += [(c - f0) / span, w / span, a.real / span, a.imag / span]
    x0 += [base.real, base.imag]

    try:
        res = least_squares(
            lambda p: lorentzian_sum(u, *_unpack_lorentzians(p, k)) - y,
            x0,
            jac=lambda p: lorentzian_jacobian(u, p, k),
            **options,
        )
    except SingularJacobian as exc:
        raise NonConvergence("Lorentzian fit is degenerate: no resolvable peak", result=exc.result) from exc
    p, cov = res.values, res.covariance
    scale = np.array([span, span, span, span] * k + [1.0, 1.0])
    shift = np.array([f0, 0.0, 0.0, 0.0] * k + [0.0, 0.0])
    values = p * scale + shift
    cov = cov * np.outer(scale, scale)
    order = np.argsort(values[: 4 * k : 4])
    perm = np.concatenate([np.arange(4 * j, 4 * j + 4) for j in order] + [np.array([4 * k, 4 * k + 1])])
    values, cov = values[perm], cov[np.ix_(perm, perm)]
    names = []
    for j in range(1, k + 1):
        names += [f"center_{j}", f"width_{j}", f"amp_re_{j}", f"amp_im_{j}"]
    names += ["baseline_re", "baseline_im"]
    for j in range(k):
        values[4 * j + 1] = abs(values[4 * j + 1])
    return FitResult(
        names=tuple(names),
        values=values,
        sigma=np.sqrt(np.abs(np.diag(cov))),
        residual_norm=res.residual_norm,
        converged=res.converged,
        iterations=res.iterations,
        covariance=cov,
        cost_history=res.cost_history,
        message=res.message,
    )


def peak_parameters(result: FitResult, k: int):
    """``(centers, widths, complex amplitudes, baseline)`` from a Lorentzian fit."""
    c = np.array([result[f"center_{j}"] for j in range(1, k + 1)])
    w = np.array([result[f"width_{j}"] for j in range(1, k + 1)])
    a = np.array([result[f"amp_re_{j}"] + 1j * result[f"amp_im_{j}"] for j in range(1, k + 1)])
    return c, w, a, result["baseline_re"] + 1j * result["baseline_im"]


# -- Kerr saturation --------------------------------------------------------


@dataclass
class KerrData:
    """Measured resonance shift (Hz) and minimum |S21| against generator power (dBm)."""

    power_dbm: np.ndarray
    shift: np.ndarray
    s21_min: np.ndarray

    def __post_init__(self):
        self.power_dbm = np.asarray(self.power_dbm, dtype=float)
        self.shift = np.asarray(self.shift, dtype=float)
        self.s21_min = np.asarray(self.s21_min, dtype=float)
        if not (self.power_dbm.shape == self.shift.shape == self.s21_min.shape):
            raise ValueError("power, shift and s21 arrays must have equal length")
        order = np.argsort(self.power_dbm)
        self.power_dbm, self.shift, self.s21_min = self.power_dbm[order], self.shift[order], self.s21_min[order]

    def normalized_depth(self) -> np.ndarray:
        depth = 1.0 - self.s21_min
        return depth / depth[0]


class KerrForwardModel:
    """Shift and dip depth of the driven Kerr resonator for given (alpha, A_m).

    Resonances found in the previous evaluation seed the next one, so a
    fit only pays for a full probe-grid scan once per power. When a trial
    point populates the top Fock level at some power, the truncation for
    that power grows in steps of ``dim_step`` up to ``max_dim`` and stays
    there after a successful evaluation, so the model remains a smooth
    function of the parameters.
    """

    def __init__(self, power_dbm, kappa, kappa_ex, omega_m, dim=fock.LINDBLAD_DIM, probe=None, max_dim=45, dim_step=10):
        self.power_w = units.dbm_to_watts(np.asarray(power_dbm, dtype=float))
        self.kappa, self.kappa_ex, self.omega_m = kappa, kappa_ex, omega_m
        self.dims = [dim] * self.power_w.size
        self.max_dim, self.dim_step = max(max_dim, dim), dim_step
        self.probe = probe
        self._last = None

    def _point(self, i: int, alpha: float, e: float, probe):
        while True:
            solver = fock.kerr_solver(self.dims[i])
            try:
                found = None
                if self._last is not None:
                    found = solver.resonance_near(alpha, e, self.kappa, self._last[i])
                if found is None:
                    found = solver.resonance(alpha, e, self.kappa, probe)
                return found
            except TruncationTooSmall:
                if self.dims[i] >= self.max_dim:
                    raise
                self.dims[i] = min(self.dims[i] + self.dim_step, self.max_dim)

    def __call__(self, alpha: float, a_m_db: float):
        dims = list(self.dims)
        try:
            return self._evaluate(alpha, a_m_db)
        except OracleFailure:
            # a failed trial point must not leave larger truncations behind
            self.dims = dims
            raise

    def _evaluate(self, alpha: float, a_m_db: float):
        eps = drive_amplitude(self.power_w, units.db_to_ratio(a_m_db), self.kappa_ex, self.omega_m)
        probe = self.probe if self.probe is not None else fock.default_probe_grid(alpha, self.kappa, 61)
        shifts, s21, dets = [], [], []
        try:
            for i, e in enumerate(eps):
                det, _, mean_a = self._point(i, alpha, e, probe)
                dets.append(det)
                shifts.append(-det)
                s21.append(abs(fock.transmission(mean_a, e, self.kappa_ex)))
        except (NumericalError, ValueError) as exc:
            raise OracleFailure(f"forward model failed at alpha={alpha:.6g}, A_m={a_m_db:.6g} dB: {exc}") from exc
        self._last = dets
        return np.array(shifts), np.array(s21)


def fit_kerr_saturation(
    data: KerrData,
    kappa: float,
    kappa_ex: float,
    omega_m: float,
    a_m_db_guess: float = -60.0,
    alpha_guess: float | None = None,
    dim: int = fock.LINDBLAD_DIM,
    **options,
) -> FitResult:
    """Fit the self-Kerr coefficient and the drive-line attenuation.

    Residuals are the shift in units of ``kappa`` and the dip depth
    ``1 - |S21|`` normalized to the lowest power. The normalization
    removes most of the dependence of the dip on ``kappa_ex``, so the
    external coupling enters mainly through the drive amplitude; the
    removal is exact only where the resonant response is real. When the Kerr
    coefficient is consistent with zero the attenuation cannot be
    identified and the result carries the flag ``a_m_unidentifiable``.
    """
    if len(data.power_dbm) < 5:
        raise ValueError("need at least 5 power points")
    model = KerrForwardModel(data.power_dbm, kappa, kappa_ex, omega_m, dim)
    depth = data.normalized_depth()
    if alpha_guess is None:
        # mean-field slope of the shift against the resonant photon number on the low-power half
        low = slice(0, max(2, len(data.power_dbm) // 2))
        eps = drive_amplitude(units.dbm_to_watts(data.power_dbm[low]), units.db_to_ratio(a_m_db_guess), kappa_ex, omega_m)
        n = eps**2 / (0.25 * kappa**2)
        alpha_guess = float(n @ data.shift[low] / (2.0 * (n @ n)))

    # alpha is fitted in units of kappa so that finite-difference steps are
    # meaningful even when it starts at zero
    def resid(p):
        sh, s21 = model(p[0] * kappa, p[1])
        d = 1.0 - s21
        return np.concatenate([(sh - data.shift) / kappa, d / d[0] - depth])

    options.setdefault("diff_step", 1e-5)
    flags = []
    try:
        res = least_squares(resid, [alpha_guess / kappa, a_m_db_guess], names=("alpha_hz", "a_m_db"), **options)
    except SingularJacobian as exc:
        res = exc.result
        flags.append("a_m_unidentifiable")
    scale = np.array([kappa, 1.0])
    res.values = res.values * scale
    res.sigma = res.sigma * scale
    if res.covariance is not None:
        res.covariance = res.covariance * np.outer(scale, scale)
    if "a_m_unidentifiable" not in flags and abs(res["alpha_hz"]) < 2.0 * res.sigma_of("alpha_hz"):
        flags.append("a_m_unidentifiable")
    res.flags = flags
    return res


# -- cooperativity ----------------------------------------------------------


def fit_linear_cooperativity(n_d, c, threshold: float = 0.1, max_n_d: float | None = None) -> FitResult:
    """Zero-intercept fit ``C = C0 n_d`` on a low-power subset.

    The subset starts as the lowest third of the points in ``n_d`` (at
    least two) and is trimmed from the high-power end until every kept
    point deviates from the fitted line by less than ``threshold``
    (relative). ``max_n_d`` optionally excludes points above a drive
    level before the selection.

    Raises
    ------
    InsufficientLowPowerPoints
        If fewer than two points survive the selection.
    """
    n_d = np.asarray(n_d, dtype=float)
    c = np.asarray(c, dtype=float)
    if n_d.shape != c.shape or n_d.size < 3:
        raise ValueError("need at least 3 (n_d, C) points")
    order = np.argsort(n_d)
    idx = order[n_d[order] > 0]
    if max_n_d is not None:
        idx = idx[n_d[idx] <= max_n_d]
    idx = list(idx[: max(2, math.ceil(len(order) / 3))])
    while len(idx) >= 2:
        x, y = n_d[idx], c[idx]
        slope = float(x @ y / (x @ x))
        dev = np.abs(y - slope * x) / np.abs(slope * x)
        if np.all(dev < threshold):
            break
        idx.pop()
    if len(idx) < 2:
        raise InsufficientLowPowerPoints("fewer than two points in the low-power region")
    x, y = n_d[idx], c[idx]
    slope = float(x @ y / (x @ x))
    r = y - slope * x
    dof = len(idx) - 1
    sigma = math.sqrt(float(r @ r) / dof / float(x @ x))
    return FitResult(
        names=("c0",),
        values=np.array([slope]),
        sigma=np.array([sigma]),
        residual_norm=float(np.linalg.norm(r)),
        converged=True,
        iterations=1,
        covariance=np.array([[sigma**2]]),
        meta={"selected": [int(i) for i in idx]},
    )
