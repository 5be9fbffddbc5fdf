"""Brute-force Fock-space models used to check the perturbative chain.

All matrices are dense numpy arrays in the number basis; energies and
rates are in Hz. Because the Lindblad steady-state condition is
homogeneous in (H, rates), it can be solved with Hz-valued Hamiltonians
and rates directly, without 2*pi factors.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.optimize import brentq

from .circuit import PotentialExpansion, SnailParams
from .effective import HybridParams, effective_coefficients, validity_report
from .errors import SingularGenerator, TruncationTooSmall

SINGLE_MODE_DIM = 40
TWO_MODE_DIMS = (20, 6)
LINDBLAD_DIM = 15
# population allowed in the top two levels of a truncated eigenvector
LEAK_TOL = 1e-8
# relative LU pivot size below which the stationarity system counts as singular
PIVOT_TOL = 1e-12
# population allowed in the top level of a driven-resonator steady state
TOP_LEVEL_TOL = 1e-6


def destroy(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def number(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def dag(m: np.ndarray) -> np.ndarray:
    return m.conj().T


@dataclass
class FockOperator:
    """A dense operator on a (tensor product of) truncated Fock space(s)."""

    dims: tuple
    matrix: np.ndarray

    def hermiticity_residual(self) -> float:
        norm = np.linalg.norm(self.matrix)
        return float(np.linalg.norm(self.matrix - dag(self.matrix)) / norm) if norm else 0.0

    def eigh(self):
        return np.linalg.eigh(0.5 * (self.matrix + dag(self.matrix)))


def _check_leak(vectors, dim, states):
    top = slice(dim - 2, dim)
    for k in states:
        v = vectors[:, k]
        leak = float(np.sum(np.abs(v[top]) ** 2))
        if leak > LEAK_TOL:
            raise TruncationTooSmall(
                f"eigenstate {k} has population {leak:.2e} in the top levels; increase the truncation"
            )


def build_single_mode(x: PotentialExpansion, p: SnailParams, dim: int = SINGLE_MODE_DIM) -> FockOperator:
    """Charging term plus the expanded potential, in the harmonic basis of the well.

    Phase and charge operators are formed in a padded basis and truncated
    afterwards, so the powers of the phase operator are exact on the kept
    block.

    Raises
    ------
    TruncationTooSmall
        If any of the three lowest eigenstates leaks into the top levels.
    """
    if dim < 10:
        raise ValueError("single-mode truncation must be at least 10")
    ec, ej = p.ec, p.ej_large
    chi2 = x.chi[2]
    big = dim + x.order + 2
    a = destroy(big)
    theta_zpf = (ec / (ej * chi2)) ** 0.25
    n_zpf = 0.5 / theta_zpf
    theta = theta_zpf * (a + dag(a))
    charge = 1j * n_zpf * (dag(a) - a)
    h = 4.0 * ec * charge @ charge + ej * chi2 * theta @ theta
    power = theta @ theta
    for i in range(3, x.order + 1):
        power = power @ theta
        h = h - ej * x.chi[i] * power
    op = FockOperator((dim,), h[:dim, :dim])
    _, vecs = op.eigh()
    _check_leak(vecs, dim, range(3))
    return op


def single_mode_levels(x: PotentialExpansion, p: SnailParams, dim: int = SINGLE_MODE_DIM, count: int = 3):
    evals, _ = build_single_mode(x, p, dim).eigh()
    return evals[:count]


def anharmonicity(levels: Sequence[float]) -> float:
    """(E2 - E1) - (E1 - E0); equals twice the Kerr coefficient."""
    return (levels[2] - levels[1]) - (levels[1] - levels[0])


def two_mode_operators(dims: Sequence[int]):
    na, nb = dims
    a = np.kron(destroy(na), np.eye(nb))
    b = np.kron(np.eye(na), destroy(nb))
    return a, b


def build_two_mode(h: HybridParams, dims: Sequence[int] = TWO_MODE_DIMS, coupling: str = "full") -> FockOperator:
    """MW resonator with its Kerr and Pockels terms, coupled to the SAW mode.

    ``coupling="full"`` uses ``g (a + a^dag)(b + b^dag)``; ``"rwa"`` keeps
    only the beam-splitter part ``g (a^dag b + a b^dag)``.
    """
    na, nb = dims
    if na < 15 or nb < 4:
        raise TruncationTooSmall(f"two-mode truncation {tuple(dims)} below the minimum (15, 4)")
    s = h.spectrum
    a, b = two_mode_operators(dims)
    ad, bd = dag(a), dag(b)
    H = s.omega_m * ad @ a + h.omega_s * bd @ b + s.alpha0 * ad @ ad @ a @ a + s.beta * (ad @ ad @ a + ad @ a @ a)
    if coupling == "full":
        H = H + h.g * (ad + a) @ (bd + b)
    elif coupling == "rwa":
        H = H + h.g * (ad @ b + a @ bd)
    else:
        raise ValueError(f"unknown coupling {coupling!r}")
    return FockOperator((na, nb), H)


@dataclass
class TwoModeSpectrum:
    dims: tuple
    energies: np.ndarray
    vectors: np.ndarray

    def index(self, n_a: int, n_b: int) -> int:
        """Eigenstate with the largest overlap on the bare state |n_a, n_b>."""
        return int(np.argmax(np.abs(self.vectors[n_a * self.dims[1] + n_b, :])))

    def energy(self, n_a: int, n_b: int) -> float:
        return float(self.energies[self.index(n_a, n_b)])

    def expect(self, op: np.ndarray, n_a: int, n_b: int) -> complex:
        v = self.vectors[:, self.index(n_a, n_b)]
        return complex(v.conj() @ op @ v)


def diagonalize_two_mode(op: FockOperator, check_states=((0, 0), (1, 0), (2, 0))) -> TwoModeSpectrum:
    evals, vecs = op.eigh()
    dressed = TwoModeSpectrum(tuple(op.dims), evals, vecs)
    na, nb = op.dims
    for n_a, n_b in check_states:
        v = vecs[:, dressed.index(n_a, n_b)].reshape(na, nb)
        leak = float(np.sum(np.abs(v[na - 2 :, :]) ** 2) + np.sum(np.abs(v[:, nb - 1]) ** 2))
        if leak > 1e-6:
            raise TruncationTooSmall(f"dressed state |{n_a},{n_b}> leaks {leak:.2e} into the truncation edge")
    return dressed


def block_effective_hamiltonian(op: FockOperator, sector: int) -> np.ndarray:
    """Exact effective Hamiltonian of one MW-photon-number sector.

    Eigenstates are assigned to the sector carrying most of their weight;
    the sector block is then obtained from the orthogonalized projection
    of those eigenstates (polar decomposition), i.e. the minimal-rotation
    block diagonalization. Rows and columns are indexed by the SAW number.
    """
    na, nb = op.dims
    evals, vecs = op.eigh()
    weights = (np.abs(vecs) ** 2).reshape(na, nb, -1).sum(axis=1)
    owner = np.argmax(weights, axis=0)
    chosen = np.flatnonzero(owner == sector)
    if len(chosen) != nb:
        raise TruncationTooSmall(f"sector {sector} holds {len(chosen)} eigenstates, expected {nb}")
    m = vecs[sector * nb : (sector + 1) * nb, chosen]
    u, _, vh = np.linalg.svd(m)
    w = u @ vh
    return w @ np.diag(evals[chosen]) @ dag(w)


@dataclass(frozen=True)
class ComparisonRow:
    name: str
    exact: float
    predicted: float
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)


@dataclass
class OracleReport:
    rows: list
    validity_ratio: float
    valid: bool

    @property
    def breakdown(self) -> bool:
        return (not self.valid) or any(not r.passed for r in self.rows)

    def row(self, name: str) -> ComparisonRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def names(self):
        return [r.name for r in self.rows]


def _rel(exact, predicted, scale=None):
    scale = abs(predicted) if scale is None else scale
    if scale == 0:
        return 0.0 if exact == predicted else math.inf
    return abs(exact - predicted) / scale


def oracle_g0(op: FockOperator, dressed: TwoModeSpectrum, omega_s: float) -> float:
    """g0 implied by the static SAW displacement of the one-photon dressed state."""
    _, b = two_mode_operators(op.dims)
    x = b + dag(b)
    shift = dressed.expect(x, 1, 0).real - dressed.expect(x, 0, 0).real
    return -0.5 * omega_s * shift


def oracle_g0_block(op: FockOperator) -> float:
    """g0 read off the exactly block-diagonalized one- and zero-photon sectors."""
    h1 = block_effective_hamiltonian(op, 1)
    h0 = block_effective_hamiltonian(op, 0)
    return float((h1[1, 0] - h0[1, 0]).real)


def compare_effective_vs_exact(
    h: HybridParams,
    dims: Sequence[int] = TWO_MODE_DIMS,
    coupling: str = "full",
    alpha_tol: float = 0.15,
    g0_tol: float = 0.30,
    frequency_tol: float = 0.01,
) -> OracleReport:
    """Check the effective Hamiltonian against exact two-mode diagonalization.

    The Kerr deviation is measured in units of the Kerr scale
    ``max(|alpha0|, 3 beta^2/omega_m)`` because the effective Kerr is
    driven through zero on purpose; the g0 deviations are relative to the
    predicted value. g0 rows are omitted when g or beta vanishes.
    """
    s = h.spectrum
    eff = effective_coefficients(h, strict=False)
    validity = validity_report(h)
    strict_ok = abs(eff.delta) >= 10.0 * max(abs(h.g), abs(s.beta))
    op = build_two_mode(h, dims, coupling)
    dressed = diagonalize_two_mode(op)
    e00, e10, e20 = dressed.energy(0, 0), dressed.energy(1, 0), dressed.energy(2, 0)
    rows = [
        ComparisonRow("omega_m_dressed", e10 - e00, s.omega_m, _rel(e10 - e00, s.omega_m), frequency_tol),
    ]
    alpha_exact = 0.5 * ((e20 - e10) - (e10 - e00))
    kerr_scale = max(abs(s.alpha0), 3.0 * s.beta**2 / s.omega_m)
    rows.append(ComparisonRow("alpha", alpha_exact, eff.alpha, _rel(alpha_exact, eff.alpha, kerr_scale), alpha_tol))
    if h.g != 0 and s.beta != 0:
        g0_disp = oracle_g0(op, dressed, h.omega_s)
        rows.append(ComparisonRow("g0", g0_disp, eff.g0, _rel(g0_disp, eff.g0), g0_tol))
        rows.append(ComparisonRow("g0_exact", g0_disp, eff.g0_exact, _rel(g0_disp, eff.g0_exact), g0_tol))
        try:
            g0_blk = oracle_g0_block(op)
        except TruncationTooSmall:
            g0_blk = math.nan
        rows.append(ComparisonRow("g0_block", g0_blk, eff.g0_exact, _rel(g0_blk, eff.g0_exact), g0_tol))
    return OracleReport(rows=rows, validity_ratio=validity.ratio, valid=validity.passed and strict_ok)


def g0_full_coupling_estimate(h: HybridParams) -> float:
    """Second-order radiation-pressure coefficient when counter-rotating coupling is kept.

    With ``g (a + a^dag)(b + b^dag)`` the one-photon sector acquires, besides
    ``g beta / delta + g beta / omega_m``, the paths through ``a^dag b^dag``
    and ``a b``, which add ``g beta / omega_m + g beta / (omega_m + omega_s)``.
    This is the value :func:`oracle_g0_block` converges to for full coupling.
    """
    s = h.spectrum
    wm, ws = s.omega_m, h.omega_s
    return -h.g * s.beta * (1.0 / (wm - ws) + 2.0 / wm + 1.0 / (wm + ws))


def dispersive_shift(h: HybridParams, dims: Sequence[int] = TWO_MODE_DIMS) -> float:
    """Exact shift of the MW transition caused by the SAW coupling."""
    dressed = diagonalize_two_mode(build_two_mode(h, dims))
    return dressed.energy(1, 0) - dressed.energy(0, 0) - h.spectrum.omega_m


def dispersive_shift_estimate(h: HybridParams) -> float:
    """Second-order estimate including the counter-rotating contribution."""
    s = h.spectrum
    return h.g**2 / (s.omega_m - h.omega_s) - h.g**2 / (s.omega_m + h.omega_s)


# -- Lindblad ---------------------------------------------------------------


@dataclass
class LindbladProblem:
    """Hamiltonian plus (collapse operator, rate) channels, all in Hz.

    ``drive`` and ``detuning`` record how a driven-Kerr Hamiltonian was
    built; they are metadata for input-output post-processing.
    """

    hamiltonian: np.ndarray
    collapse: list = field(default_factory=list)
    drive: float = 0.0
    detuning: float = 0.0

    def __post_init__(self):
        self.hamiltonian = np.asarray(self.hamiltonian, dtype=complex)
        for _, rate in self.collapse:
            if rate < 0:
                raise ValueError("decay rates must be non-negative")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def kerr_problem(dim: int, detuning: float, alpha: float, drive: float, kappa: float) -> LindbladProblem:
    """Driven Kerr resonator in the frame of the probe; detuning is omega_m - omega_probe."""
    a = destroy(dim)
    ad = dag(a)
    H = detuning * ad @ a + alpha * ad @ ad @ a @ a + drive * (ad + a)
    return LindbladProblem(H, [(a, kappa)], drive=drive, detuning=detuning)


def lindblad_generator(H: np.ndarray, collapse) -> np.ndarray:
    """Superoperator acting on row-major vec(rho)."""
    d = H.shape[0]
    eye = np.eye(d)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for c, rate in collapse:
        if rate == 0:
            continue
        cdc = dag(c) @ c
        L = L + rate * (np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T))
    return L


def apply_lindblad(H: np.ndarray, collapse, rho: np.ndarray) -> np.ndarray:
    out = -1j * (H @ rho - rho @ H)
    for c, rate in collapse:
        cd = dag(c)
        cdc = cd @ c
        out = out + rate * (c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc))
    return out


@dataclass
class SteadyState:
    rho: np.ndarray
    residual: float = 0.0

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def mean_a(self) -> complex:
        return complex(np.trace(destroy(self.dim) @ self.rho))

    @property
    def photon_number(self) -> float:
        return float(np.trace(number(self.dim) @ self.rho).real)


def lindblad_steady_state(lp: LindbladProblem, tol: float = 1e-9) -> SteadyState:
    """Stationary density matrix from a dense linear solve.

    One stationarity row is replaced by the trace condition.

    Raises
    ------
    SingularGenerator
        If the steady state is not unique.
    """
    if not any(rate > 0 for _, rate in lp.collapse):
        raise ValueError("at least one decay rate must be positive")
    H = lp.hamiltonian
    d = lp.dim
    scale = max(np.linalg.norm(H, 2), max(rate for _, rate in lp.collapse))
    L = lindblad_generator(H / scale, [(c, r / scale) for c, r in lp.collapse])
    A = L.copy()
    A[0, :] = np.eye(d).reshape(-1)
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= PIVOT_TOL * pivots.max():
        raise SingularGenerator("steady state is not unique")
    vec = lu_solve((lu, piv), rhs, check_finite=False)
    if not np.all(np.isfinite(vec)):
        raise SingularGenerator("steady-state solve produced non-finite values")
    rho = vec.reshape(d, d)
    rho = 0.5 * (rho + dag(rho))
    rho = rho / np.trace(rho).real
    residual = float(np.linalg.norm(apply_lindblad(H, lp.collapse, rho)))
    if residual > tol * scale:
        raise SingularGenerator(f"steady-state residual {residual:.3e} above {tol:g} x {scale:.3e}")
    return SteadyState(rho, residual)


def integrate_lindblad(lp: LindbladProblem, rho0: np.ndarray, t_final: float, steps: int) -> np.ndarray:
    """Classical fourth-order Runge-Kutta propagation of the master equation."""
    H, jumps = lp.hamiltonian, lp.collapse
    rho = np.array(rho0, dtype=complex)
    dt = t_final / steps
    f = lambda r: apply_lindblad(H, jumps, r)
    for _ in range(steps):
        k1 = f(rho)
        k2 = f(rho + 0.5 * dt * k1)
        k3 = f(rho + 0.5 * dt * k2)
        k4 = f(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return rho


# -- driven Kerr response ---------------------------------------------------


def transmission(mean_a: complex, drive: float, kappa_ex: float) -> complex:
    """Side-coupled resonator: S21 = 1 - (kappa_ex/2) i<a>/drive.

    Reduces to ``1 - (kappa_ex/2) / (kappa/2 + i Delta)`` for a linear
    resonator.
    """
    return 1.0 - 0.5 * kappa_ex * 1j * mean_a / drive


class KerrSolver:
    """Steady states of the driven Kerr resonator for many parameter sets.

    The generator is linear in (detuning, alpha, drive, kappa), so the four
    unit superoperators are built once per truncation and combined per
    call. The detuning derivative of the photon number comes from the same
    LU factorization, which lets the resonance be located by root finding
    on an exact derivative.
    """

    def __init__(self, dim: int = LINDBLAD_DIM):
        self.dim = dim
        a = destroy(dim)
        ad = dag(a)
        n = ad @ a
        self._n = n
        self._a = a
        self._parts = (
            lindblad_generator(n, []),
            lindblad_generator(ad @ ad @ a @ a, []),
            lindblad_generator(ad + a, []),
            lindblad_generator(np.zeros((dim, dim)), [(a, 1.0)]),
        )
        self._trace = np.eye(dim).reshape(-1)
        self._n_row = n.T.reshape(-1)  # tr(N rho) = n_row . vec(rho)
        self._a_row = a.T.reshape(-1)

    def _factor(self, detuning, alpha, drive, kappa):
        if kappa <= 0:
            raise ValueError("kappa must be positive")
        scale = max(abs(detuning), abs(alpha), abs(drive), kappa)
        c = np.array([detuning, alpha, drive, kappa]) / scale
        L = sum(ci * part for ci, part in zip(c, self._parts))
        A = L.copy()
        A[0, :] = self._trace
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)
            lu = lu_factor(A, check_finite=False)
        pivots = np.abs(np.diag(lu[0]))
        if pivots.min() <= PIVOT_TOL * pivots.max():
            raise SingularGenerator("steady state is not unique")
        return L, lu, scale

    def solve(self, detuning, alpha, drive, kappa, derivative=False):
        """Return ``(photon_number, <a>, d photon_number / d detuning)``."""
        L, lu, scale = self._factor(detuning, alpha, drive, kappa)
        rhs = np.zeros(self.dim**2, dtype=complex)
        rhs[0] = 1.0
        vec = lu_solve(lu, rhs, check_finite=False)
        residual = np.linalg.norm(L @ vec)
        if not np.isfinite(residual) or residual > 1e-9:
            raise SingularGenerator(f"steady-state residual {residual:.3e} too large")
        top = float(vec[-1].real)
        if top > TOP_LEVEL_TOL:
            raise TruncationTooSmall(
                f"top Fock level holds population {top:.2e}; increase the truncation above {self.dim}"
            )
        n = float((self._n_row @ vec).real)
        mean_a = complex(self._a_row @ vec)
        dn = math.nan
        if derivative:
            b = -(self._parts[0] @ vec) / scale
            b[0] = 0.0
            dn = float((self._n_row @ lu_solve(lu, b, check_finite=False)).real)
        return n, mean_a, dn

    def resonance(self, alpha, drive, kappa, probe):
        """Detuning of maximal photon number; see :func:`kerr_resonance`."""
        probe = np.sort(np.asarray(probe, dtype=float))
        pops = np.array([self.solve(d, alpha, drive, kappa)[0] for d in probe])
        k = int(np.argmax(pops))
        best = float(probe[k])
        if 0 < k < len(probe) - 1:
            slope = lambda d: self.solve(d, alpha, drive, kappa, derivative=True)[2]
            lo, hi = probe[k - 1], probe[k + 1]
            s_lo, s_hi = slope(lo), slope(hi)
            if s_lo > 0 > s_hi:
                best = brentq(slope, lo, hi, xtol=1e-12 * kappa, rtol=1e-14)
            else:
                s_mid = slope(best)
                # the maximum sits on the side whose slope points away from the grid point
                lo, hi = (best, hi) if s_mid > 0 else (lo, best)
                if slope(lo) > 0 > slope(hi):
                    best = brentq(slope, lo, hi, xtol=1e-12 * kappa, rtol=1e-14)
        n, mean_a, _ = self.solve(best, alpha, drive, kappa)
        return best, n, mean_a

    def resonance_near(self, alpha, drive, kappa, guess, step=None, max_expand=60):
        """Refine the resonance starting from a nearby detuning, without a grid scan.

        The bracket grows geometrically from ``guess`` until the photon-number
        slope changes sign. Returns None when no bracket is found.
        """
        slope = lambda d: self.solve(d, alpha, drive, kappa, derivative=True)[2]
        step = 0.02 * kappa if step is None else step
        s0 = slope(guess)
        direction = 1.0 if s0 > 0 else -1.0
        lo = hi = guess
        for _ in range(max_expand):
            nxt = (hi if direction > 0 else lo) + direction * step
            s = slope(nxt)
            if direction > 0:
                lo, hi = hi, nxt
                if s < 0:
                    break
            else:
                hi, lo = lo, nxt
                if s > 0:
                    break
            step *= 1.6
        else:
            return None
        best = brentq(slope, lo, hi, xtol=1e-12 * kappa, rtol=1e-14)
        n, mean_a, _ = self.solve(best, alpha, drive, kappa)
        return best, n, mean_a


_SOLVERS: dict = {}


def kerr_solver(dim: int = LINDBLAD_DIM) -> KerrSolver:
    if dim not in _SOLVERS:
        _SOLVERS[dim] = KerrSolver(dim)
    return _SOLVERS[dim]


@dataclass(frozen=True)
class KerrResponsePoint:
    power_dbm: float
    photon_number: float
    shift: float
    s21_min: float
    detuning: float
    drive: float
    s21: complex = 0j


def kerr_resonance(alpha, drive, kappa, kappa_ex, probe, dim: int = LINDBLAD_DIM):
    """Locate the driven resonance on a detuning grid and refine it.

    The resonance is the detuning of maximal intracavity population; the
    grid maximum is refined by bracketing the zero of the exact derivative.
    Returns ``(detuning, photon_number, S21)``.
    """
    if len(probe) == 0:
        raise ValueError("probe grid must be non-empty")
    if drive == 0:
        return 0.0, 0.0, complex(1.0 - kappa_ex / kappa)
    det, n, mean_a = kerr_solver(dim).resonance(alpha, drive, kappa, probe)
    return det, n, transmission(mean_a, drive, kappa_ex)


def default_probe_grid(alpha: float, kappa: float, points: int = 81) -> np.ndarray:
    """Symmetric detuning grid wide enough for the shifts reached at a few photons."""
    half = 1.5 * kappa + 12.0 * abs(alpha)
    return np.linspace(-half, half, points)


def driven_kerr_response(
    h: HybridParams,
    alpha: float,
    powers_dbm: Sequence[float],
    probe: Sequence[float] | None,
    attenuation_db: float,
    dim: int = LINDBLAD_DIM,
) -> list[KerrResponsePoint]:
    """Resonance shift and transmission dip of the driven Kerr resonator vs power.

    ``probe`` is the detuning grid ``omega_m - omega_probe`` in Hz (None
    picks :func:`default_probe_grid`). The drive amplitude follows from the
    generator power through the line attenuation and the external coupling. The
    shift is ``-detuning`` of the resonance, i.e. the change of the probe
    frequency at which the dip sits.
    """
    from .response import drive_amplitude
    from .units import db_to_ratio, dbm_to_watts

    if len(powers_dbm) == 0:
        raise ValueError("power grid must be non-empty")
    if probe is None:
        probe = default_probe_grid(alpha, h.kappa)
    out = []
    for pw in powers_dbm:
        eps = drive_amplitude(dbm_to_watts(pw), db_to_ratio(attenuation_db), h.kappa_ex, h.spectrum.omega_m)
        det, n, s21 = kerr_resonance(alpha, eps, h.kappa, h.kappa_ex, probe, dim)
        out.append(KerrResponsePoint(float(pw), n, -det, abs(s21), det, eps, s21))
    return out


KERR_HEADER = ("power_dbm", "photon_number", "shift_hz", "s21_min")


def kerr_rows(points: Sequence[KerrResponsePoint]):
    for pt in points:
        yield (pt.power_dbm, pt.photon_number, pt.shift, pt.s21_min)
