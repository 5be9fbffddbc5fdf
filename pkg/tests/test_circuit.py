import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from snailopto import circuit
from snailopto.circuit import FluxBias, PotentialExpansion, SnailParams, TransmonLimitWarning
from snailopto.errors import DegenerateMinimum, InvalidCurvature

from conftest import quiet_snail


def test_inductive_energy_all_cosines_one(device_snail):
    assert circuit.inductive_energy(device_snail, 0.0, 0.0) == pytest.approx(-374.5e9, rel=1e-15)


@given(st.floats(-10, 10), st.floats(-3, 3))
def test_inductive_energy_parity(theta, phi_frac):
    p = SnailParams(163.5e9, 47.5e9, 35e6)
    a = circuit.inductive_energy(p, -phi_frac, -theta)
    b = circuit.inductive_energy(p, phi_frac, theta)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-3)


def test_params_validation():
    with pytest.raises(ValueError):
        SnailParams(0.0, 1e9, 1e6)
    with pytest.raises(ValueError):
        SnailParams(1e9, -1.0, 1e6)
    with pytest.warns(TransmonLimitWarning):
        SnailParams(1e9, 0.3e9, 1e8)


def test_flux_bias_phase():
    assert FluxBias(0.25).phi == pytest.approx(math.pi / 2)


def test_minimum_against_dense_scan(device_snail):
    # independent oracle: 1e6-point scan over one period, then bounded refinement
    f = 0.445
    grid = np.linspace(-2 * math.pi, 2 * math.pi, 1_000_001)
    u = circuit.inductive_energy(device_snail, f, grid)
    k = int(np.argmin(u))
    res = minimize_scalar(
        lambda t: circuit.inductive_energy(device_snail, f, t),
        bounds=(grid[k - 1], grid[k + 1]),
        method="bounded",
        options={"xatol": 1e-12},
    )
    theta0, multiwell = circuit.find_potential_minimum(device_snail, f)
    assert not multiwell
    assert theta0 == pytest.approx(res.x, abs=1e-6)
    assert abs(circuit.potential_derivative(device_snail, f, theta0, 1)) < 1e-12 * device_snail.ej_large


def test_symmetric_single_well(device_snail):
    theta0, multiwell = circuit.find_potential_minimum(device_snail, 0.0)
    assert theta0 == 0.0 or abs(theta0) < 1e-15
    assert not multiwell


def test_degenerate_double_well_raises():
    p = quiet_snail(47.5e9, 47.5e9, 35e6)
    with pytest.raises(DegenerateMinimum) as info:
        circuit.find_potential_minimum(p, 0.5)
    assert info.value.multiwell
    assert len(info.value.minima) >= 2


def test_multiwell_flag_off_degeneracy():
    p = quiet_snail(47.5e9, 47.5e9, 35e6)
    _, multiwell = circuit.find_potential_minimum(p, 0.48)
    assert multiwell


def test_device_params_single_well_everywhere(device_snail):
    for f in np.linspace(0, 1, 101, endpoint=False):
        assert len(circuit.local_minima(device_snail, f)) == 1


def test_multiwell_boundary():
    assert not circuit.is_multiwell(SnailParams(163.5e9, 47.5e9, 35e6))
    assert circuit.is_multiwell(SnailParams(1.9 * 47.5e9, 47.5e9, 35e6))
    assert not circuit.is_multiwell(SnailParams(2.05 * 47.5e9, 47.5e9, 35e6))


def test_chi3_vanishes_at_zero_flux(device_snail):
    x = circuit.taylor_coefficients(device_snail, 0.0)
    assert x.chi[3] == 0.0
    assert x.chi[5] == 0.0


def test_chi2_closed_form_at_zero_flux(device_snail):
    x = circuit.taylor_coefficients(device_snail, 0.0)
    p = device_snail
    # second derivative E_J' + E_J/2, divided by 2 E_J for the chi2 t^2 convention
    assert x.chi[2] == pytest.approx((p.ej_small + p.ej_large / 2) / (2 * p.ej_large), rel=1e-14)
    assert x.chi[4] == pytest.approx((p.ej_small + p.ej_large / 8) / (24 * p.ej_large), rel=1e-14)


def _mp_derivative(p, f, theta0, n):
    mpmath.mp.dps = 50
    phi = 2 * mpmath.pi * mpmath.mpf(f)
    u = lambda t: -p.ej_small * mpmath.cos(t) - 2 * p.ej_large * mpmath.cos((phi - t) / 2)
    return float(mpmath.diff(u, mpmath.mpf(theta0), n, h=mpmath.mpf("1e-4"), method="step"))


@pytest.mark.parametrize("f", [0.1, 0.3, 0.445, 0.7])
def test_chi_matches_finite_difference(device_snail, f):
    # central differences with step 1e-4 rad, in high precision so that only truncation error remains
    x = circuit.taylor_coefficients(device_snail, f)
    for i in range(2, 6):
        d = _mp_derivative(device_snail, f, x.theta0, i)
        expected = d / (2 * device_snail.ej_large) if i == 2 else -d / (math.factorial(i) * device_snail.ej_large)
        assert x.chi[i] == pytest.approx(expected, rel=1e-6)


def test_chi3_at_zero_kerr_bias_to_1e8(device_snail):
    x = circuit.taylor_coefficients(device_snail, 0.445)
    mpmath.mp.dps = 50
    phi = 2 * mpmath.pi * mpmath.mpf(0.445)
    u = lambda t: -device_snail.ej_small * mpmath.cos(t) - 2 * device_snail.ej_large * mpmath.cos((phi - t) / 2)
    d3 = float(mpmath.diff(u, mpmath.mpf(x.theta0), 3, h=mpmath.mpf("1e-6"), method="step"))
    assert x.chi[3] == pytest.approx(-d3 / (6 * device_snail.ej_large), rel=1e-8)


def test_order_validation(device_snail):
    with pytest.raises(ValueError):
        circuit.taylor_coefficients(device_snail, 0.1, order=3)
    assert circuit.taylor_coefficients(device_snail, 0.1, order=7).order == 7


def test_quantize_zero_chi3_gives_zero_beta(device_snail):
    x = PotentialExpansion(theta0=0.0, chi={2: 0.6, 3: 0.0, 4: -0.05, 5: 0.0})
    assert circuit.quantize(x, device_snail).beta == 0.0


def test_quantize_rejects_bad_curvature(device_snail):
    x = PotentialExpansion(theta0=0.0, chi={2: 0.0, 3: 0.0, 4: 0.0})
    with pytest.raises(InvalidCurvature):
        circuit.quantize(x, device_snail)


def test_quantize_harmonic_limit(device_snail):
    chi2 = 0.6
    x = PotentialExpansion(theta0=0.0, chi={2: chi2, 3: 0.0, 4: 0.0})
    s = circuit.quantize(x, device_snail)
    assert s.omega_m == pytest.approx(math.sqrt(16 * device_snail.ec * device_snail.ej_large * chi2), rel=1e-15)
    assert s.alpha0 == 0.0


def test_transmon_sign_of_kerr(device_snail):
    # a positive quartic chi (softening cosine) gives a negative Kerr
    assert circuit.taylor_coefficients(device_snail, 0.0).chi[4] > 0
    assert circuit.mode_spectrum(device_snail, 0.0).alpha0 < 0


def test_sweep_periodicity_and_parity(device_snail):
    pts = circuit.sweep_flux(device_snail, [0.0, 1.0])
    assert pts[0].spectrum.omega_m == pytest.approx(pts[1].spectrum.omega_m, rel=1e-12)
    pts = circuit.sweep_flux(device_snail, [0.23, -0.23])
    a, b = pts[0].spectrum, pts[1].spectrum
    assert a.omega_m == pytest.approx(b.omega_m, rel=1e-12)
    assert a.alpha0 == pytest.approx(b.alpha0, rel=1e-10)
    assert a.beta == pytest.approx(-b.beta, rel=1e-10)


def test_sweep_marks_degenerate_rows():
    p = quiet_snail(47.5e9, 47.5e9, 35e6)
    pts = circuit.sweep_flux(p, [0.3, 0.5])
    assert pts[0].spectrum is not None
    assert pts[1].spectrum is None and pts[1].error == "DegenerateMinimum"
    rows = list(circuit.spectrum_rows(pts))
    assert rows[1][1] is None and rows[1][4] == 1


def test_sweep_rejects_empty_grid(device_snail):
    with pytest.raises(ValueError):
        circuit.sweep_flux(device_snail, [])


def test_sweep_shape(device_snail):
    grid = np.linspace(-0.5, 0.5, 201)
    pts = circuit.sweep_flux(device_snail, grid)
    beta = np.array([p.spectrum.beta for p in pts])
    k = int(np.argmax(np.abs(beta)))
    assert 0.35 <= abs(grid[k]) <= 0.5
    from snailopto.effective import effective_kerr

    alpha = np.array([effective_kerr(p.spectrum) for p in pts])
    crossings = np.flatnonzero(np.sign(alpha[:-1]) != np.sign(alpha[1:]))
    assert len(crossings) == 2


def test_beta_sign_constant_for_small_positive_flux(device_snail):
    signs = {np.sign(circuit.mode_spectrum(device_snail, f).beta) for f in np.linspace(0.01, 0.45, 30)}
    assert len(signs) == 1


@settings(max_examples=50, deadline=None)
@given(st.floats(-3.0, 3.0))
def test_periodicity_property(f):
    p = SnailParams(163.5e9, 47.5e9, 35e6)
    a, b = circuit.mode_spectrum(p, f), circuit.mode_spectrum(p, f + 1.0)
    for name in ("omega_m", "alpha0", "beta"):
        x, y = getattr(a, name), getattr(b, name)
        assert abs(x - y) <= 1e-10 * max(abs(x), 1e6)
