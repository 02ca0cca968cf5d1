import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from wehrl_lab.channel import (apply_channel, channel_output, coherent_eigenbasis,
                               coherent_eigenvalues_exact, coherent_output_spectrum,
                               gamma_coherent_closed_form, gamma_operator, kraus_set,
                               kraus_strings, ladder_ops, output_spectra)
from wehrl_lab.coupling import channel_via_partial_trace, tilde_channel_via_partial_trace
from wehrl_lab.optimizer import sample_density
from wehrl_lab.spin import coherent_ket, spin_operators

small = st.integers(0, 6)
seeds = st.integers(0, 2 ** 32 - 1)


@pytest.mark.parametrize("two_j", [0, 1, 2, 5])
def test_schwinger_realization(two_j):
    lad = ladder_ops(two_j)
    assert np.allclose(lad.number(), two_j * np.eye(two_j + 1))
    assert np.allclose(lad.anti_number(), (two_j + 2) * np.eye(two_j + 1))
    for a, b in zip(lad.spin_operators(), spin_operators(two_j)):
        assert np.allclose(a, b, atol=1e-12)


@given(small, st.integers(-6, 6))
def test_completeness(two_j, k):
    if two_j + k < 0:
        with pytest.raises(ValueError):
            kraus_set(two_j, k)
        return
    assert kraus_set(two_j, k).completeness_residual() < 1e-12


@pytest.mark.parametrize("two_j,k", [(1, 3), (2, -2), (3, 2), (4, -3), (0, 4)])
def test_collapsed_kraus_matches_ladder_strings(two_j, k):
    rho = sample_density(two_j, None, 5)
    ks = kraus_set(two_j, k)
    slow = sum(b @ rho @ b.T for b in kraus_strings(two_j, k))
    assert np.allclose(apply_channel(ks, rho), slow, atol=1e-13)


@given(small, small, seeds)
def test_kraus_agrees_with_partial_trace(two_j, two_k, seed):
    rho = sample_density(two_j, None, seed)
    k = two_k - two_j
    ours = channel_output(two_j, k, rho)
    assert np.allclose(ours, channel_via_partial_trace(two_j, two_k, rho), atol=1e-10)
    tilde = apply_channel(kraus_set(two_j, k), rho)
    assert np.allclose(tilde, tilde_channel_via_partial_trace(two_j, two_k, rho), atol=1e-10)


@given(st.integers(0, 5), st.integers(0, 4), st.integers(0, 4), seeds)
def test_tilde_semigroup(two_j, k1, k2, seed):
    rho = sample_density(two_j, None, seed)
    step = apply_channel(kraus_set(two_j + k1, k2), apply_channel(kraus_set(two_j, k1), rho))
    assert np.allclose(step, apply_channel(kraus_set(two_j, k1 + k2), rho), atol=1e-10)


@given(st.integers(1, 5), st.integers(1, 4), seeds)
def test_rotation_covariance(two_j, k, seed):
    r = np.random.default_rng(seed)
    axis = r.standard_normal(3)
    angle = r.uniform(0, 2 * np.pi)
    rot = [expm(-1j * angle * sum(a * s for a, s in zip(axis, spin_operators(n))))
           for n in (two_j, two_j + k)]
    rho = sample_density(two_j, None, r)
    ks = kraus_set(two_j, k)
    lhs = apply_channel(ks, rot[0] @ rho @ rot[0].conj().T)
    rhs = rot[1] @ apply_channel(ks, rho) @ rot[1].conj().T
    assert np.allclose(lhs, rhs, atol=1e-10)


@given(st.integers(0, 8), st.integers(0, 8))
def test_coherent_spectrum_matches_eigvalsh(two_j, k):
    spec = coherent_output_spectrum(two_j, k)
    numeric = np.linalg.eigvalsh(apply_channel(kraus_set(two_j, k), coherent_ket(two_j, 0.0)
                                               [:, None] * coherent_ket(two_j, 0.0).conj()))
    assert np.allclose(np.sort(numeric)[::-1], spec.eigenvalues, atol=1e-12)
    assert sum(spec.exact) == 1
    assert np.all(np.diff(spec.eigenvalues) <= 0)


def test_coherent_eigenvectors():
    two_j, k = 3, 4
    spec = coherent_output_spectrum(two_j, k)
    up = np.zeros((4, 4))
    up[-1, -1] = 1
    out = apply_channel(kraus_set(two_j, k), up)
    basis = coherent_eigenbasis(two_j, k)
    assert np.allclose(basis.T @ out @ basis, np.diag(spec.eigenvalues), atol=1e-12)


def test_any_direction_has_the_same_spectrum():
    psi = coherent_ket(4, 1.2, 0.4)
    rho = np.outer(psi, psi.conj())
    for k in (1, 3):
        out = channel_output(4, k, rho)
        assert np.allclose(np.linalg.eigvalsh(out)[::-1], coherent_output_spectrum(4, k).eigenvalues,
                           atol=1e-12)


def test_exact_eigenvalues_small_case():
    # spin 1/2 to spin 1: lambda = (2/3, 1/3)
    from fractions import Fraction
    assert coherent_eigenvalues_exact(1, 1) == (Fraction(2, 3), Fraction(1, 3))


@pytest.mark.parametrize("two_j,k", [(0, 2), (2, 3), (5, 1)])
def test_gamma_identity(two_j, k):
    basis = coherent_eigenbasis(two_j, k + 1)
    for m in range(k + 1):
        g = gamma_operator(two_j, k, m, basis)
        closed = gamma_coherent_closed_form(two_j, k, m)
        assert np.allclose(g, closed, atol=1e-12)
        assert np.trace(g).real == pytest.approx((m + 1) * (two_j + k + 1), abs=1e-12)
        vals = np.linalg.eigvalsh(g)
        assert vals[0] > -1e-12 and vals[-1] < two_j + k + 2 + 1e-12
    with pytest.raises(ValueError):
        gamma_operator(two_j, k, k + 1, basis)


def test_output_spectra_batch():
    ks = kraus_set(2, 2)
    rhos = np.stack([sample_density(2, None, s) for s in range(4)])
    spec = output_spectra(ks, rhos)
    assert spec.shape == (4, 5)
    assert np.allclose(spec.sum(axis=1), 1.0)


def test_rejects_wrong_dimension():
    with pytest.raises(ValueError):
        apply_channel(kraus_set(2, 1), np.eye(4) / 4)


def test_gamma_smallest_case():
    g = gamma_operator(1, 0, 0, coherent_eigenbasis(1, 1))
    assert np.allclose(g, np.diag([0.0, 2.0]))
