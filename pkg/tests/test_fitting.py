import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snailopto import fitting, fock
from snailopto.circuit import ModeSpectrum
from snailopto.effective import HybridParams
from snailopto.errors import InsufficientLowPowerPoints, NonConvergence, SingularJacobian
from snailopto.fitting import ComplexSpectrum, KerrData

# -- least squares engine ---------------------------------------------------


def test_linear_model_exact():
    x = np.linspace(-3, 5, 17)
    y = 2 * x + 1
    r = fitting.least_squares(lambda p: p[0] * x + p[1] - y, [0.3, -4.0], names=("slope", "intercept"))
    assert r.converged
    assert r["slope"] == pytest.approx(2.0, abs=1e-12)
    assert r["intercept"] == pytest.approx(1.0, abs=1e-12)


def test_rosenbrock_valley():
    r = fitting.least_squares(lambda p: np.array([10 * (p[1] - p[0] ** 2), 1 - p[0]]), [-1.2, 1.0])
    assert r.converged
    assert np.allclose(r.values, [1.0, 1.0], atol=1e-10)


def test_cost_never_increases():
    r = fitting.least_squares(lambda p: np.array([10 * (p[1] - p[0] ** 2), 1 - p[0]]), [-1.2, 1.0])
    assert np.all(np.diff(r.cost_history) <= 0)
    assert len(r.cost_history) > 3


def test_nonconvergence_returns_best_point():
    f = lambda p: np.array([10 * (p[1] - p[0] ** 2), 1 - p[0]])
    with pytest.raises(NonConvergence) as info:
        fitting.least_squares(f, [-1.2, 1.0], max_iter=2)
    best = info.value.result
    assert best is not None and not best.converged
    assert best.cost_history[-1] < best.cost_history[0]


def test_singular_jacobian():
    x = np.linspace(0, 1, 10)
    # only the sum of the parameters enters the model
    with pytest.raises(SingularJacobian) as info:
        fitting.least_squares(lambda p: (p[0] + p[1]) * x - 3 * x, [0.0, 0.0])
    assert info.value.result.values.sum() == pytest.approx(3.0)


def test_initial_guess_must_be_finite():
    with pytest.raises(ValueError):
        fitting.least_squares(lambda p: np.array([math.inf, p[0]]), [1.0])


def test_complex_residuals_are_split():
    x = np.linspace(0, 1, 9)
    y = (1.5 - 0.5j) * x
    r = fitting.least_squares(lambda p: (p[0] + 1j * p[1]) * x - y, [0.0, 0.0])
    assert np.allclose(r.values, [1.5, -0.5], atol=1e-12)


def test_covariance_matches_linear_regression():
    rng = np.random.default_rng(11)
    x = np.linspace(0, 1, 40)
    y = 3 * x - 1 + 0.05 * rng.normal(size=x.size)
    r = fitting.least_squares(lambda p: p[0] * x + p[1] - y, [0.0, 0.0])
    A = np.column_stack([x, np.ones_like(x)])
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    s2 = res[0] / (x.size - 2)
    cov = s2 * np.linalg.inv(A.T @ A)
    assert np.allclose(r.values, coef, rtol=1e-10)
    assert np.allclose(r.covariance, cov, rtol=1e-8)


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.floats(-0.4, 0.4), min_size=3, max_size=3),
    st.lists(st.floats(0.02, 0.3), min_size=3, max_size=3),
    st.lists(st.floats(-1, 1), min_size=6, max_size=6),
)
def test_lorentzian_jacobian_matches_finite_difference(centers, widths, amps):
    k = 3
    u = np.linspace(-0.5, 0.5, 31)
    p = []
    for j in range(k):
        p += [centers[j], widths[j], amps[2 * j], amps[2 * j + 1]]
    p = np.array(p + [0.2, -0.1])
    model = lambda q: fitting.lorentzian_sum(u, *fitting._unpack_lorentzians(q, k))
    analytic = fitting.lorentzian_jacobian(u, p, k)
    numeric = fitting.numerical_jacobian(model, p, diff_step=1e-7)
    scale = np.abs(analytic).max()
    assert np.abs(analytic - numeric).max() / scale < 1e-6


# -- complex Lorentzians ----------------------------------------------------


def spectrum(freq, centers, widths, amps, baseline, noise=0.0, rng=None):
    y = fitting.lorentzian_sum(freq, centers, widths, amps, baseline)
    if noise:
        y = y + noise * (rng.normal(size=freq.size) + 1j * rng.normal(size=freq.size))
    return ComplexSpectrum(freq, y)


def test_single_lorentzian_exact_recovery():
    f = np.linspace(5.90e9, 5.94e9, 201)
    truth = dict(centers=[5.9213e9], widths=[3.1e6], amps=[(1.2 - 0.4j) * 1e6], baseline=0.3 + 0.1j)
    r = fitting.fit_complex_lorentzians(spectrum(f, **truth), 1)
    c, w, a, b = fitting.peak_parameters(r, 1)
    assert c[0] == pytest.approx(truth["centers"][0], rel=1e-9)
    assert w[0] == pytest.approx(truth["widths"][0], rel=1e-9)
    assert abs(a[0] - truth["amps"][0]) <= 1e-9 * abs(truth["amps"][0])
    assert abs(b - truth["baseline"]) <= 1e-9


def test_three_overlapping_lorentzians_with_noise():
    rng = np.random.default_rng(2024)
    f = np.linspace(-40e6, 40e6, 401)
    w = 8e6
    centers = np.array([-16e6, 0.0, 16e6])
    amps = np.array([1.0, 0.7 - 0.5j, 0.4j]) * w / 2
    clean = fitting.lorentzian_sum(f, centers, [w] * 3, amps, 0.1)
    noise = 0.01 * np.abs(clean).max()
    r = fitting.fit_complex_lorentzians(spectrum(f, centers, [w] * 3, amps, 0.1, noise, rng), 3)
    c, widths, _, _ = fitting.peak_parameters(r, 3)
    assert np.all(np.abs(c - centers) < 0.05 * w)
    assert np.all(np.diff(c) > 0)
    assert np.all(r.sigma >= 0)


def test_pure_baseline_is_degenerate_or_zero_amplitude():
    rng = np.random.default_rng(5)
    f = np.linspace(0.0, 1e6, 101)
    y = (0.5 + 0.2j) + 1e-3 * (rng.normal(size=f.size) + 1j * rng.normal(size=f.size))
    try:
        r = fitting.fit_complex_lorentzians(ComplexSpectrum(f, y), 1)
    except NonConvergence:
        return
    amp = math.hypot(r["amp_re_1"], r["amp_im_1"])
    sig = math.hypot(r.sigma_of("amp_re_1"), r.sigma_of("amp_im_1"))
    assert amp <= 2 * sig


def test_spectrum_validation():
    with pytest.raises(ValueError):
        ComplexSpectrum([1.0, 1.0, 2.0], [0, 0, 0])
    with pytest.raises(ValueError):
        ComplexSpectrum([1.0, 2.0], [0, 0, 0])
    with pytest.raises(ValueError):
        fitting.fit_complex_lorentzians(ComplexSpectrum(np.arange(9.0), np.ones(9)), 2)
    with pytest.raises(ValueError):
        fitting.fit_complex_lorentzians(ComplexSpectrum(np.arange(9.0), np.ones(9)), 0)


def test_estimator_error_scales_as_inverse_root_n():
    # 50 seeds at N and 4N points over the same span: the scatter of the
    # fitted center must halve, within the 2-sigma band of the estimate
    seeds = 50
    truth = dict(centers=[0.1e6], widths=[0.4e6], amps=[0.2e6 + 0j], baseline=0.0 + 0j)

    def scatter(n):
        f = np.linspace(-2e6, 2e6, n)
        errs = []
        for seed in range(seeds):
            rng = np.random.default_rng(seed)
            r = fitting.fit_complex_lorentzians(spectrum(f, noise=0.02, rng=rng, **truth), 1)
            errs.append(r["center_1"] - truth["centers"][0])
        return np.std(errs, ddof=1), r.sigma_of("center_1")

    s1, sig1 = scatter(100)
    s4, sig4 = scatter(400)
    band = 2 * math.sqrt(2) * math.sqrt(1 / (2 * (seeds - 1)))
    assert abs((s1 / s4) / 2 - 1) < band
    # reported sigma agrees with the observed scatter
    assert abs(sig1 / s1 - 1) < 2 * math.sqrt(1 / (2 * (seeds - 1)))
    assert abs(sig4 / s4 - 1) < 2 * math.sqrt(1 / (2 * (seeds - 1)))


# -- Kerr saturation --------------------------------------------------------

KAPPA_EX, KAPPA_IN, OMEGA_M = 45e6, 10e6, 5.98e9
POWERS = np.arange(-95.0, -67.0, 3.0)


def kerr_data(alpha, a_m_db=-57.3, dim=fock.LINDBLAD_DIM):
    s = ModeSpectrum(OMEGA_M, alpha, 0.0)
    h = HybridParams(6.4e6, 785.25e6, KAPPA_EX, KAPPA_IN, 4.4e3, 0.6e3, spectrum=s)
    pts = fock.driven_kerr_response(h, alpha, POWERS, None, a_m_db, dim)
    return KerrData(POWERS, [p.shift for p in pts], [p.s21_min for p in pts])


@pytest.fixture(scope="module")
def device_kerr_data():
    return kerr_data(-13.0e6)


def test_kerr_round_trip(device_kerr_data):
    r = fitting.fit_kerr_saturation(device_kerr_data, KAPPA_EX + KAPPA_IN, KAPPA_EX, OMEGA_M)
    assert r.converged and not r.flags
    assert r["alpha_hz"] == pytest.approx(-13.0e6, rel=1e-6)
    assert r["a_m_db"] == pytest.approx(-57.3, rel=1e-6)


def test_kerr_fit_survives_truncation_overflow(device_kerr_data):
    # this starting point drives the dim-15 oracle past its top level at high power
    r = fitting.fit_kerr_saturation(device_kerr_data, KAPPA_EX + KAPPA_IN, KAPPA_EX, OMEGA_M, a_m_db_guess=-55.0)
    assert r["alpha_hz"] == pytest.approx(-13.0e6, rel=1e-6)
    assert r["a_m_db"] == pytest.approx(-57.3, rel=1e-6)


def test_kerr_zero_alpha_flags_attenuation():
    # without saturation the top power populates more Fock levels
    d = kerr_data(0.0, dim=20)
    r = fitting.fit_kerr_saturation(d, KAPPA_EX + KAPPA_IN, KAPPA_EX, OMEGA_M, a_m_db_guess=-62.0)
    assert "a_m_unidentifiable" in r.flags
    assert abs(r["alpha_hz"]) < 1e-3 * (KAPPA_EX + KAPPA_IN)


def test_kerr_kappa_ex_halving(device_kerr_data):
    # the external coupling enters the drive amplitude as A_m kappa_ex; the
    # normalized dip adds a small quantum correction, so A_m moves by close
    # to 10 log10(2) and alpha stays within the combined uncertainty
    rng = np.random.default_rng(3)
    d = device_kerr_data
    noisy = KerrData(
        d.power_dbm,
        d.shift * (1 + 0.01 * rng.normal(size=d.shift.size)),
        d.s21_min * (1 + 0.01 * rng.normal(size=d.shift.size)),
    )
    full = fitting.fit_kerr_saturation(noisy, KAPPA_EX + KAPPA_IN, KAPPA_EX, OMEGA_M)
    half = fitting.fit_kerr_saturation(noisy, KAPPA_EX + KAPPA_IN, KAPPA_EX / 2, OMEGA_M)
    assert half["a_m_db"] - full["a_m_db"] == pytest.approx(10 * math.log10(2), abs=0.2)
    combined = math.hypot(full.sigma_of("alpha_hz"), half.sigma_of("alpha_hz"))
    assert abs(half["alpha_hz"] - full["alpha_hz"]) < 3 * combined


def test_kerr_needs_five_points(device_kerr_data):
    d = device_kerr_data
    short = KerrData(d.power_dbm[:4], d.shift[:4], d.s21_min[:4])
    with pytest.raises(ValueError):
        fitting.fit_kerr_saturation(short, KAPPA_EX + KAPPA_IN, KAPPA_EX, OMEGA_M)


# -- cooperativity ----------------------------------------------------------


def test_cooperativity_exact_line():
    n = np.linspace(0.05, 3, 12)
    r = fitting.fit_linear_cooperativity(n, 1.7 * n)
    assert r["c0"] == pytest.approx(1.7, rel=1e-12)


def test_cooperativity_saturating_data():
    n = np.linspace(0.05, 6, 30)
    c = 5 * (1 - np.exp(-0.34 * n))
    r = fitting.fit_linear_cooperativity(n, c)
    assert r["c0"] == pytest.approx(1.7, rel=0.10)
    low = fitting.fit_linear_cooperativity(n, c, max_n_d=1.0)
    assert max(n[i] for i in low.meta["selected"]) < 1.0
    assert low["c0"] == pytest.approx(1.7, rel=0.10)


def test_cooperativity_no_low_power_points():
    n = np.linspace(2, 6, 10)
    with pytest.raises(InsufficientLowPowerPoints):
        fitting.fit_linear_cooperativity(n, 1.7 * n, max_n_d=1.0)
