"""Input validation helpers shared by the library and the estimators."""

import numbers

import numpy as np

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-12


def check_two_j(two_j, name="two_j"):
    """Return ``two_j`` as a Python int, rejecting negatives and non-integers."""
    if isinstance(two_j, (bool, np.bool_)) or not isinstance(two_j, numbers.Integral):
        raise TypeError(f"{name} must be an integer (twice the spin), got {two_j!r}")
    two_j = int(two_j)
    if two_j < 0:
        raise ValueError(f"{name} must be non-negative, got {two_j}")
    return two_j


def dim(two_j):
    return check_two_j(two_j) + 1


def check_state(psi, dimension=None, normalized=False, tol=1e-12):
    """Validate a state vector and return it as a 1-D complex array."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError(f"state vector must be 1-D, got shape {psi.shape}")
    if dimension is not None and psi.shape[0] != dimension:
        raise ValueError(f"state has dimension {psi.shape[0]}, expected {dimension}")
    if normalized and abs(np.vdot(psi, psi).real - 1.0) > tol:
        raise ValueError("state vector is not normalized")
    return psi


def check_density_matrix(rho, dimension=None, tol=None):
    """Validate a density matrix and return it as a complex 2-D array.

    Checks Hermiticity, unit trace and positive semi-definiteness within
    ``tol`` (default 1e-12 for each). The returned array is not symmetrized.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if dimension is not None and rho.shape[0] != dimension:
        raise ValueError(
            f"density matrix has dimension {rho.shape[0]}, expected {dimension}")
    h_tol = HERMITIAN_TOL if tol is None else tol
    t_tol = TRACE_TOL if tol is None else tol
    p_tol = PSD_TOL if tol is None else tol
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > h_tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > t_tol:
        raise ValueError(f"density matrix trace is {np.trace(rho).real!r}, not 1")
    if np.linalg.eigvalsh(hermitize(rho))[0] < -p_tol:
        raise ValueError("density matrix is not positive semi-definite")
    return rho


def check_density_batch(rhos, dimension=None):
    """Accept a single density matrix or a stack of them; return a 3-D array."""
    rhos = np.asarray(rhos, dtype=complex)
    if rhos.ndim == 2:
        rhos = rhos[np.newaxis]
    if rhos.ndim != 3 or rhos.shape[1] != rhos.shape[2]:
        raise ValueError(f"expected (n, d, d) density matrices, got shape {rhos.shape}")
    if dimension is not None and rhos.shape[1] != dimension:
        raise ValueError(
            f"density matrices have dimension {rhos.shape[1]}, expected {dimension}")
    return rhos


def hermitize(a):
    """(A + A^dagger) / 2 on the last two axes."""
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def projector(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())
