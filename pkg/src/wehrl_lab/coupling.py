"""Angular momentum coupling: exact Clebsch-Gordan numbers and the projector P-.

All spin and magnetic quantum numbers are given doubled (``two_j``,
``two_m``) so half-integers stay exact. Product spaces use Kronecker
ordering with the first factor's index slow.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial, isqrt

import numpy as np

from ._validation import check_density_matrix, check_state, check_two_j
from .spin import antiunitary_U, conjugate_by_U, spin_operators


@dataclass(frozen=True)
class ExactCoeff:
    """The real number ``sign * sqrt(radicand)`` with a rational radicand."""

    sign: int
    radicand: Fraction

    def __float__(self):
        if self.sign == 0:
            return 0.0
        p, q = self.radicand.numerator, self.radicand.denominator
        # scale so the integer square root carries > 53 significant bits
        shift = max(0, 120 - (p.bit_length() - q.bit_length()))
        shift += shift % 2
        root = isqrt((p << shift) // q)
        return self.sign * float(Fraction(root, 1 << (shift // 2)))

    def __mul__(self, other):
        if isinstance(other, ExactCoeff):
            return ExactCoeff(self.sign * other.sign, self.radicand * other.radicand)
        return NotImplemented

    @property
    def square(self):
        return self.radicand if self.sign else Fraction(0)


ZERO = ExactCoeff(0, Fraction(0))


def _check_pair(two_j, two_m, name):
    if abs(two_m) > two_j:
        raise ValueError(f"|{name}| exceeds its spin: two_m={two_m}, two_j={two_j}")
    if (two_j + two_m) % 2:
        raise ValueError(f"parity mismatch between two_j={two_j} and two_m={two_m} ({name})")


@lru_cache(maxsize=None)
def clebsch_gordan(two_j1, two_j2, two_j3, two_m1, two_m2, two_m3):
    """Exact ``<j1 m1; j2 m2 | j3 m3>`` in the Condon-Shortley convention.

    Evaluated with the Racah single-sum formula in rational arithmetic.
    Raises ``ValueError`` on an m/j parity mismatch or |m| > j; returns an
    exact zero when the triangle rule or m-conservation fails.
    """
    for tj, tm, name in ((two_j1, two_m1, "m1"), (two_j2, two_m2, "m2"), (two_j3, two_m3, "m3")):
        check_two_j(tj)
        _check_pair(tj, tm, name)
    if two_m1 + two_m2 != two_m3:
        return ZERO
    if not abs(two_j1 - two_j2) <= two_j3 <= two_j1 + two_j2 or (two_j1 + two_j2 + two_j3) % 2:
        return ZERO

    # integer arguments of the factorials
    a = (two_j1 + two_j2 - two_j3) // 2
    b = (two_j1 - two_m1) // 2
    c = (two_j2 + two_m2) // 2
    d = (two_j3 - two_j2 + two_m1) // 2
    e = (two_j3 - two_j1 - two_m2) // 2
    pre = Fraction(
        (two_j3 + 1)
        * factorial((two_j3 + two_j1 - two_j2) // 2)
        * factorial((two_j3 - two_j1 + two_j2) // 2)
        * factorial(a),
        factorial((two_j1 + two_j2 + two_j3) // 2 + 1),
    )
    pre *= (factorial((two_j3 + two_m3) // 2) * factorial((two_j3 - two_m3) // 2)
            * factorial((two_j1 - two_m1) // 2) * factorial((two_j1 + two_m1) // 2)
            * factorial((two_j2 - two_m2) // 2) * factorial((two_j2 + two_m2) // 2))
    total = Fraction(0)
    for k in range(max(0, -d, -e), min(a, b, c) + 1):
        den = (factorial(k) * factorial(a - k) * factorial(b - k) * factorial(c - k)
               * factorial(d + k) * factorial(e + k))
        total += Fraction((-1) ** k, den)
    if total == 0:
        return ZERO
    return ExactCoeff(1 if total > 0 else -1, pre * total * total)


def coupling_isometry(two_j1, two_j2, two_l):
    """Isometry ``H_L -> H_j1 (x) H_j2`` onto the total-spin-L multiplet.

    Column ``c`` is the state ``|L, M = c - L>``; rows use Kronecker
    ordering with the j1 index slow.
    """
    two_j1, two_j2, two_l = (check_two_j(x) for x in (two_j1, two_j2, two_l))
    if not abs(two_j1 - two_j2) <= two_l <= two_j1 + two_j2 or (two_j1 + two_j2 + two_l) % 2:
        raise ValueError(f"spin {two_l}/2 does not occur in {two_j1}/2 x {two_j2}/2")
    d1, d2 = two_j1 + 1, two_j2 + 1
    v = np.zeros((d1 * d2, two_l + 1))
    for c in range(two_l + 1):
        two_m = 2 * c - two_l
        for a in range(d1):
            two_m1 = 2 * a - two_j1
            two_m2 = two_m - two_m1
            if abs(two_m2) > two_j2:
                continue
            b = (two_m2 + two_j2) // 2
            v[a * d2 + b, c] = float(clebsch_gordan(two_j1, two_j2, two_l, two_m1, two_m2, two_m))
    return v


@dataclass(frozen=True)
class CouplingIsometry:
    two_j: int
    two_k: int
    matrix: np.ndarray

    @property
    def projector(self):
        """P- = V V^dagger on H_J (x) H_K."""
        return self.matrix @ self.matrix.T

    @property
    def two_l(self):
        return self.matrix.shape[1] - 1


def min_spin_isometry(two_j, two_k):
    """Embedding of ``H_|K-J|`` in ``H_J (x) H_K`` (minimal total spin)."""
    two_j, two_k = check_two_j(two_j), check_two_j(two_k)
    return CouplingIsometry(two_j, two_k, coupling_isometry(two_j, two_k, abs(two_k - two_j)))


def total_spin(two_j1, two_j2):
    """Total spin operators ``S_j1 (x) I + I (x) S_j2``."""
    ops1, ops2 = spin_operators(two_j1), spin_operators(two_j2)
    i1, i2 = np.eye(two_j1 + 1), np.eye(two_j2 + 1)
    return tuple(np.kron(a, i2) + np.kron(i1, b) for a, b in zip(ops1, ops2))


def partial_inner(two_j, two_k, psi, phi):
    """Partial inner product ``<psi||phi>`` in ``H_(K-J)`` for K >= J.

    ``phi`` in H_K is embedded in ``H_(K-J) (x) H_J`` (maximal total spin)
    and contracted against ``psi`` on the second factor, so that
    ``<eta|<psi||phi>> = <eta (x) psi|phi>``.
    """
    two_j, two_k = check_two_j(two_j), check_two_j(two_k, "two_k")
    if two_k < two_j:
        raise ValueError(f"partial inner product needs K >= J, got 2J={two_j}, 2K={two_k}")
    psi = check_state(psi, two_j + 1)
    phi = check_state(phi, two_k + 1)
    two_l = two_k - two_j
    w = coupling_isometry(two_l, two_j, two_k)
    embedded = (w @ phi).reshape(two_l + 1, two_j + 1)
    return embedded @ psi.conj()


@dataclass(frozen=True)
class PminusReport:
    """Outcome of checking ``P-(psi (x) phi) = mu <U psi||phi>``.

    ``mu`` is the fitted proportionality constant for this pair,
    ``residual`` the distance between the two sides after fitting, and
    ``norm_residual`` the error in the squared-norm relation with the
    expected ``|mu|^2``.
    """

    two_j: int
    two_k: int
    mu: complex
    mu_abs2_expected: float
    residual: float
    norm_residual: float

    @property
    def mu_abs2_error(self):
        return abs(abs(self.mu) ** 2 - self.mu_abs2_expected)

    @property
    def max_residual(self):
        return max(self.residual, self.norm_residual, self.mu_abs2_error)


def pminus_formula_check(two_j, two_k, psi, phi):
    """Compare both sides of the P- formula for one pair of vectors.

    For K >= J the right-hand side is ``<U_J psi||phi>`` with
    ``|mu|^2 = (2(K-J)+1)/(2K+1)``; for K < J the mirrored form
    ``<U_K phi||psi>`` with ``|mu'|^2 = (2(J-K)+1)/(2J+1)`` is used.
    Both sides are compared as coordinates in ``H_|K-J|`` through the
    min-spin isometry, whose phase is fixed by the Clebsch-Gordan convention.
    """
    two_j, two_k = check_two_j(two_j), check_two_j(two_k, "two_k")
    psi = check_state(psi, two_j + 1)
    phi = check_state(phi, two_k + 1)
    iso = min_spin_isometry(two_j, two_k).matrix
    lhs = iso.T @ np.kron(psi, phi)
    if two_k >= two_j:
        rhs = partial_inner(two_j, two_k, antiunitary_U(two_j, psi), phi)
        expected = (two_k - two_j + 1) / (two_k + 1)
    else:
        rhs = partial_inner(two_k, two_j, antiunitary_U(two_k, phi), psi)
        expected = (two_j - two_k + 1) / (two_j + 1)
    rhs_norm2 = float(np.vdot(rhs, rhs).real)
    if rhs_norm2 == 0.0:
        mu = complex(np.nan)
        residual = float(np.linalg.norm(lhs))
    else:
        mu = complex(np.vdot(rhs, lhs) / rhs_norm2)
        residual = float(np.linalg.norm(lhs - mu * rhs))
    norm_residual = abs(float(np.vdot(lhs, lhs).real) - expected * rhs_norm2)
    return PminusReport(two_j, two_k, mu, expected, residual, norm_residual)


def channel_via_partial_trace(two_j, two_k, rho):
    """Phi^k(rho) = (2J+1)/(2|K-J|+1) Tr_J[P- (rho (x) I_K)], k = 2K - 2J.

    Direct definition through the exact projector; serves as the reference
    for the Kraus construction in :mod:`wehrl_lab.channel`.
    """
    two_j, two_k = check_two_j(two_j), check_two_j(two_k, "two_k")
    rho = check_density_matrix(rho, two_j + 1)
    iso = min_spin_isometry(two_j, two_k)
    dj, dk = two_j + 1, two_k + 1
    p = iso.projector.reshape(dj, dk, dj, dk)
    out = np.einsum("abed,ea->bd", p, rho)
    return (two_j + 1) / (iso.two_l + 1) * out


def tilde_channel_via_partial_trace(two_j, two_k, rho):
    """The U-conjugated channel: Phi^k(U rho U^-1) for K >= J, U^-1 Phi^k(rho) U otherwise."""
    if two_k >= two_j:
        return channel_via_partial_trace(two_j, two_k, conjugate_by_U(rho))
    return conjugate_by_U(channel_via_partial_trace(two_j, two_k, rho))
