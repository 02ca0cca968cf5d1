import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wehrl_lab.concave import STANDARD_FAMILY, ConcaveSpec
from wehrl_lab.entropy import (aligned_quadrature, berezin_lieb_gap, classical_concave_average,
                               classical_limit_curve, coherent_classical_average,
                               coherent_scaled_average, converged_average, fit_decay_exponent,
                               meridian_average, meridian_averages, sandwich,
                               scaled_channel_average, von_neumann_entropy, wehrl_entropy)
from wehrl_lab.majorization import trace_concave
from wehrl_lab.optimizer import sample_density
from wehrl_lab.spin import coherent_ket, sphere_quadrature

XLOGX = ConcaveSpec.parse("xlogx")
PL = ConcaveSpec.parse("pl:0.1,0.35,0.7")


def _coherent(two_j, theta=0.0, phi=0.0):
    psi = coherent_ket(two_j, theta, phi)
    return np.outer(psi, psi.conj())


def test_von_neumann():
    assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(np.log(4))
    assert von_neumann_entropy(_coherent(3)) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("two_j", [1, 2, 3, 6])
def test_coherent_wehrl_value(two_j):
    expected = two_j / (two_j + 1)
    assert wehrl_entropy(_coherent(two_j, 0.9, 2.0)) == pytest.approx(expected, abs=1e-9)
    assert coherent_classical_average(two_j, XLOGX) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("two_j", [1, 4])
def test_maximally_mixed_symbol_is_flat(two_j):
    # symbol is 1/(2J+1) everywhere, so the average is (2J+1) f(1/(2J+1))
    rho = np.eye(two_j + 1) / (two_j + 1)
    for f in STANDARD_FAMILY:
        exact = (two_j + 1) * float(f(np.array([1 / (two_j + 1)]))[0])
        assert meridian_average(rho, f, 4) == pytest.approx(exact, abs=1e-12)
        assert classical_concave_average(rho, f, sphere_quadrature(2)) == pytest.approx(exact,
                                                                                         abs=1e-12)


def test_polynomial_integrand_agrees_everywhere():
    # f(t) = t gives (2J+1)/(4 pi) int symbol = Tr rho = 1 on any exact rule
    rho = sample_density(5, None, 2)
    lin = ConcaveSpec.parse("linear")
    assert classical_concave_average(rho, lin, sphere_quadrature(1)) == pytest.approx(1.0, abs=1e-13)
    # the circle rule is Gauss-Legendre in arc length, so not polynomial-exact
    assert meridian_average(rho, lin, 8) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("tag", ["xlogx", "power:0.5", "negpower:2", "pl:0.1,0.35,0.7"])
@pytest.mark.parametrize("two_j", [1, 2, 4])
def test_meridian_sweep_on_coherent_states(tag, two_j):
    f = ConcaveSpec.parse(tag)
    exact = coherent_classical_average(two_j, f)
    got = meridian_average(_coherent(two_j, 2.2, 0.3), f, 32, adaptive=bool(f.breakpoints))
    assert got == pytest.approx(exact, abs=1e-12)


def test_converged_average_beats_fixed_rule():
    rho = _coherent(1, 1.0, 1.0)
    exact = coherent_classical_average(1, XLOGX)
    plain = classical_concave_average(rho, XLOGX, sphere_quadrature(8))
    value, level = converged_average(rho, XLOGX)
    assert abs(value - exact) < 1e-10 < abs(plain - exact)


def test_converged_average_reports_failure():
    with pytest.raises(RuntimeError):
        converged_average(sample_density(3, 1, 0), XLOGX, tol=1e-30, max_level=4)


def test_multi_zero_pure_state_consistent():
    psi = np.array([1, 0, 0, 0, 1], dtype=complex) / np.sqrt(2)   # symbol zeros on a ring
    rho = np.outer(psi, psi.conj())
    a = meridian_averages(rho, [XLOGX, "power:0.5"], 16)
    b = meridian_averages(rho, [XLOGX, "power:0.5"], 32)
    assert np.max(np.abs(a - b)) < 1e-9


@settings(max_examples=15)
@given(st.integers(1, 5), st.integers(0, 2 ** 32 - 1), st.booleans())
def test_classical_average_bounds(two_j, seed, pure):
    rho = sample_density(two_j, 1 if pure else None, seed)
    quad = sphere_quadrature(12)
    for f in STANDARD_FAMILY[:3]:
        assert berezin_lieb_gap(rho, f, quad) >= -1e-6
    avg = meridian_average(rho, XLOGX, 8)
    assert avg >= two_j / (two_j + 1) - 1e-8
    assert avg >= trace_concave(rho, XLOGX) - 1e-9


def test_aligned_rule_puts_pole_at_zero():
    rho = _coherent(3, 0.4, 1.0)
    base = sphere_quadrature(2, polar="theta")
    q = aligned_quadrature(rho, base)
    # the symbol zero (antipode of the coherent direction) becomes the pole
    anti = np.array([-np.sin(0.4) * np.cos(1.0), -np.sin(0.4) * np.sin(1.0), -np.cos(0.4)])
    nodes = np.stack([np.sin(q.theta) * np.cos(q.phi), np.sin(q.theta) * np.sin(q.phi),
                      np.cos(q.theta)])
    first_ring = np.argmin(base.theta)
    # a coherent symbol has one triple zero, which root finding resolves to ~eps^(1/3)
    assert anti @ nodes[:, first_ring] == pytest.approx(np.cos(base.theta.min()), abs=1e-5)
    assert aligned_quadrature(np.ones((1, 1)), q) is q


@pytest.mark.parametrize("two_j,k", [(1, 1), (2, 5), (4, 3)])
def test_scaled_average_closed_form(two_j, k):
    rho = _coherent(two_j)
    for f in STANDARD_FAMILY:
        assert scaled_channel_average(two_j, k, rho, f) == pytest.approx(
            coherent_scaled_average(two_j, k, f), abs=1e-12)


def test_sandwich_ordering():
    rho = sample_density(3, None, 7)
    quad = sphere_quadrature(8)
    for f in STANDARD_FAMILY[:3]:
        low, mid, high = sandwich(3, 4, rho, f, quad)
        assert low <= mid + 1e-12 and mid <= high + 1e-9


def test_limit_curve_shape():
    curve = classical_limit_curve(2, XLOGX, [4, 12, 52, 202])
    assert curve.monotone
    assert curve.errors[-1] < 5e-3
    assert 0.5 < curve.exponent < 1.5
    assert len(curve.rows()) == 4
    with pytest.raises(ValueError):
        classical_limit_curve(2, XLOGX, [10, 5])


def test_decay_exponent_fit():
    xs = np.array([1.0, 2.0, 4.0, 8.0])
    assert fit_decay_exponent(xs, 3.0 / xs ** 1.5) == pytest.approx(1.5)
    assert np.isnan(fit_decay_exponent(xs, np.zeros(4)))
