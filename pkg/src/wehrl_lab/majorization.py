"""Majorization of spectra and concave trace functionals."""

from dataclasses import dataclass

import numpy as np

from ._validation import check_density_matrix, hermitize
from .concave import as_function

MAJORIZATION_TOL = 1e-10
KARAMATA_TOL = 1e-9
EIG_FLOOR = 1e-14


@dataclass(frozen=True)
class SpectrumSeq:
    """A descending sequence of (near-)non-negative reals."""

    values: np.ndarray
    tolerance: float = 1e-12

    def __post_init__(self):
        vals = np.sort(np.asarray(self.values, dtype=float).ravel())[::-1]
        if vals.size and vals[-1] < -self.tolerance:
            raise ValueError(f"spectrum has negative entry {vals[-1]!r}")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def spectrum(rho, renormalize=True):
    """Descending eigenvalues of a Hermitian matrix, clamped at zero.

    Values below 1e-14 are set to 0 and, with ``renormalize``, the result is
    rescaled to unit sum so solver noise cannot flip a majorization verdict.
    """
    vals = np.linalg.eigvalsh(hermitize(np.asarray(rho, dtype=complex)))[::-1]
    vals = np.where(vals < EIG_FLOOR, 0.0, vals)
    if renormalize:
        vals = vals / vals.sum()
    return vals


def _pad(a, b):
    a = np.sort(np.asarray(a, dtype=float).ravel())[::-1]
    b = np.sort(np.asarray(b, dtype=float).ravel())[::-1]
    n = max(a.size, b.size)
    return np.pad(a, (0, n - a.size)), np.pad(b, (0, n - b.size))


def majorization_slack(a, b, tol=MAJORIZATION_TOL):
    """min_m (sum_{i<=m} a_i - sum_{i<=m} b_i) over the leading partial sums.

    Raises ``ValueError`` when the totals differ by more than ``tol``. The
    final (total) partial sum is excluded since it is constrained to agree.
    """
    a, b = _pad(a, b)
    ca, cb = np.cumsum(a), np.cumsum(b)
    if abs(ca[-1] - cb[-1]) > tol:
        raise ValueError(f"totals differ: {ca[-1]!r} vs {cb[-1]!r}")
    if a.size < 2:
        return 0.0
    return float(np.min(ca[:-1] - cb[:-1]))


def majorizes(a, b, tol=MAJORIZATION_TOL):
    """True iff ``a`` majorizes ``b`` (shorter sequence zero-padded)."""
    return majorization_slack(a, b, tol) >= -tol


def concave_sum(values, f):
    f = as_function(f)
    return float(np.sum(f(np.clip(np.asarray(values, dtype=float), 0.0, None))))


def karamata_equivalent(a, b, fs, tol=KARAMATA_TOL):
    """True iff sum f(a) <= sum f(b) + tol for every f in ``fs``.

    This is the direction implied by ``a`` majorizing ``b``; a finite family
    of f cannot certify the converse.
    """
    a, b = _pad(a, b)
    if abs(a.sum() - b.sum()) > MAJORIZATION_TOL:
        raise ValueError(f"totals differ: {a.sum()!r} vs {b.sum()!r}")
    return all(concave_sum(a, f) <= concave_sum(b, f) + tol for f in fs)


def mixture_check(a_mat, b_mat, c_mat, lam, tol=MAJORIZATION_TOL):
    """Check A > lam B + (1-lam) C given A > B and A > C.

    Returns ``None`` (skipped) when a hypothesis fails, otherwise the
    verdict for the mixture.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lam must lie in [0, 1], got {lam!r}")
    sa = spectrum(a_mat, renormalize=False)
    sb = spectrum(b_mat, renormalize=False)
    sc = spectrum(c_mat, renormalize=False)
    if not (majorizes(sa, sb, tol) and majorizes(sa, sc, tol)):
        return None
    mixed = lam * np.asarray(b_mat) + (1 - lam) * np.asarray(c_mat)
    return majorizes(sa, spectrum(mixed, renormalize=False), tol)


def trace_concave(rho, f):
    """Tr f(rho) from clamped eigenvalues."""
    rho = check_density_matrix(rho)
    return concave_sum(spectrum(rho), f)
