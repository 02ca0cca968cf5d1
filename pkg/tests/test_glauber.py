import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wehrl_lab.concave import STANDARD_FAMILY, ConcaveSpec
from wehrl_lab.glauber import (FockDensity, bloch_limit_curve, bloch_limit_value,
                               bloch_stereo_ket, domination_constant, glauber_concave_integral,
                               glauber_ket, glauber_overlap, glauber_scan, glauber_vacuum_value,
                               husimi, phase_grid, sample_fock_density, scaled_bloch_symbol,
                               tail_radius)
from wehrl_lab.spin import coherent_ket

XLOGX = ConcaveSpec.parse("xlogx")


def test_vacuum_closed_forms():
    # int_0^1 f(t)/t dt
    assert glauber_vacuum_value(XLOGX) == pytest.approx(1.0, abs=1e-12)
    assert glauber_vacuum_value("power:0.5") == pytest.approx(2.0, abs=1e-12)
    assert glauber_vacuum_value("negpower:2") == pytest.approx(-0.5, abs=1e-12)
    assert glauber_vacuum_value("linear") == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        glauber_vacuum_value(lambda t: 1 + 0 * t)


def test_vacuum_on_grid_matches_closed_form():
    vac = FockDensity.vacuum(3)
    for f in STANDARD_FAMILY:
        assert glauber_concave_integral(vac, f) == pytest.approx(glauber_vacuum_value(f), abs=1e-8)


@given(st.complex_numbers(max_magnitude=3.0), st.complex_numbers(max_magnitude=3.0))
def test_coherent_overlap(z, w):
    a = glauber_ket(z, 60)
    b = glauber_ket(w, 60)
    assert abs(np.vdot(a, b)) ** 2 == pytest.approx(np.exp(-abs(z - w) ** 2), abs=1e-12)


def test_overlap_large_n_is_finite():
    vals = glauber_overlap(np.arange(400), 15.0)
    assert np.all(np.isfinite(vals))
    assert np.sum(np.abs(vals) ** 2) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("z0", [0.5, 1j, -0.7 + 0.4j, 1.1 - 0.9j, -1.3j])
def test_translation_covariance(z0):
    # a displaced vacuum has the vacuum's value; cut at N = 40 the state is exact to ~1e-16
    rho = FockDensity.coherent(z0, 40)
    grid = phase_grid(40)
    for f in STANDARD_FAMILY:
        assert glauber_concave_integral(rho, f, grid) == pytest.approx(glauber_vacuum_value(f),
                                                                       abs=1e-8)


def test_husimi_is_a_probability_density():
    rho = sample_fock_density(5, None, 3)
    grid = phase_grid(5)
    q = husimi(rho, grid.points)
    assert grid.integrate(q) == pytest.approx(1.0, abs=1e-10)
    assert q.max() <= 1.0


def test_tail_radius_grows_with_cutoff():
    assert tail_radius(0) < tail_radius(4) < tail_radius(8)


def test_f_must_vanish_at_zero():
    with pytest.raises(ValueError):
        glauber_concave_integral(FockDensity.vacuum(), lambda t: 1 + t)


def test_fock_density_validation():
    with pytest.raises(ValueError):
        FockDensity(np.eye(2))
    vac = FockDensity.vacuum(1)
    assert vac.padded(4).shape == (4, 4)
    with pytest.raises(ValueError):
        vac.padded(1)


def test_stereographic_ket_matches_coherent_ket():
    two_j, theta, phi = 6, 1.1, 0.7
    z = 2 * np.tan(theta / 2) * np.exp(-1j * phi)
    stereo = bloch_stereo_ket(two_j, z)
    # basis n counts down-steps from the top
    ours = coherent_ket(two_j, theta, phi)[::-1]
    assert abs(np.vdot(stereo, ours)) == pytest.approx(1.0, abs=1e-12)


def test_scaled_symbol_approaches_husimi():
    rho = sample_fock_density(3, None, 1)
    pts = np.array([0.0, 0.8 + 0.3j, -1.5j])
    gaps = [np.max(np.abs(scaled_bloch_symbol(rho, tj, pts) - husimi(rho, pts)))
            for tj in (16, 64, 256)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-2


def test_domination_constant_small_case():
    assert domination_constant(0) == 1.0
    assert domination_constant(1) == pytest.approx(1 + 6)


def test_bloch_value_for_linear_f():
    # (1/pi) int symbol dmu = J/(2 pi) int s dw = 2J/(2J+1) for the top state
    for tj in (8, 32):
        val = bloch_limit_value(FockDensity.vacuum(0), "linear", tj)
        assert val == pytest.approx(tj / (tj + 1), abs=1e-10)


def test_bloch_xlogx_vacuum_value():
    for tj in (8, 32):
        val = bloch_limit_value(FockDensity.vacuum(0), XLOGX, tj)
        assert val == pytest.approx((tj / (tj + 1)) ** 2, abs=1e-10)


def test_bloch_curve():
    curve = bloch_limit_curve(FockDensity.vacuum(0), XLOGX, [32, 64, 128])
    assert curve.monotone
    assert np.all(np.diff(curve.symbol_gaps) < 0)
    assert np.all(curve.bound_margins >= 0)
    with pytest.raises(ValueError):
        bloch_limit_curve(FockDensity.vacuum(2), XLOGX, [4, 8])


@settings(max_examples=10)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4))
def test_random_states_exceed_vacuum(seed, n_max):
    rho = sample_fock_density(n_max, None, seed)
    grid = phase_grid(n_max)
    for f in STANDARD_FAMILY:
        slack = glauber_concave_integral(rho, f, grid, resolve_kinks=False) - glauber_vacuum_value(f)
        if slack < 1e-3:
            slack = glauber_concave_integral(rho, f, grid) - glauber_vacuum_value(f)
        assert slack >= -1e-6


def test_small_scan_is_deterministic():
    a = glauber_scan(3, trials=8, seed=2)
    b = glauber_scan(3, trials=8, seed=2)
    assert a.passed and a.min_slack == b.min_slack
