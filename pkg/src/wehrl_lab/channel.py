"""Schwinger-boson realization of the coherent-operator channels.

The spin-J space is the sector of ``N = 2J`` bosons in two modes; basis
index ``i`` is the number of up-bosons (so ``i = J + M``) and the down
occupation is ``N - i``. The channel implemented here is the
U-conjugated map (``Phi~^k``); :func:`channel_output` converts back.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import comb, perm, sqrt

import numpy as np

from ._validation import check_density_batch, check_two_j, hermitize
from .spin import conjugate_by_U


def creation_ops(n_particles):
    """``(a_up*, a_dn*)`` from the N-boson sector to the (N+1)-boson sector."""
    n = check_two_j(n_particles, "n_particles")
    up = np.zeros((n + 2, n + 1))
    dn = np.zeros((n + 2, n + 1))
    for i in range(n + 1):
        up[i + 1, i] = sqrt(i + 1)
        dn[i, i] = sqrt(n - i + 1)
    return up, dn


def annihilation_ops(n_particles):
    """``(a_up, a_dn)`` from the N-boson sector to the (N-1)-boson sector."""
    n = check_two_j(n_particles, "n_particles")
    if n == 0:
        return np.zeros((0, 1)), np.zeros((0, 1))
    up, dn = creation_ops(n - 1)
    return up.T.copy(), dn.T.copy()


@dataclass(frozen=True)
class LadderOps:
    """Ladder operators acting on the ``two_j``-boson sector.

    ``a_up``/``a_dn`` lower to the ``two_j - 1`` sector and ``a_up_dag``/
    ``a_dn_dag`` raise to the ``two_j + 1`` sector.
    """

    two_j: int
    a_up: np.ndarray
    a_dn: np.ndarray
    a_up_dag: np.ndarray
    a_dn_dag: np.ndarray

    def number(self):
        """a_up* a_up + a_dn* a_dn on the sector (equals 2J I)."""
        return self.a_up.T @ self.a_up + self.a_dn.T @ self.a_dn

    def anti_number(self):
        """a_up a_up* + a_dn a_dn* on the sector (equals (2J+2) I)."""
        return self.a_up_dag.T @ self.a_up_dag + self.a_dn_dag.T @ self.a_dn_dag

    def spin_operators(self):
        """Spin matrices rebuilt from boson bilinears."""
        up, dn = self.a_up, self.a_dn
        sx = 0.5 * (up.T @ dn + dn.T @ up)
        sy = (up.T @ dn - dn.T @ up) / 2j
        sz = 0.5 * (up.T @ up - dn.T @ dn)
        return sx.astype(complex), sy, sz.astype(complex)


def ladder_ops(two_j):
    two_j = check_two_j(two_j)
    a_up, a_dn = annihilation_ops(two_j)
    up_dag, dn_dag = creation_ops(two_j)
    return LadderOps(two_j, a_up, a_dn, up_dag, dn_dag)


@dataclass(frozen=True)
class KrausSet:
    """Collapsed Kraus operators of ``Phi~^k`` from spin ``two_j/2``.

    ``ops[j]`` carries ``j`` down-mode ladder factors and ``|k| - j`` up-mode
    ones; ``multiplicity[j] = binom(|k|, j)`` counts the ladder strings
    merged into it.
    """

    two_j: int
    k: int
    ops: tuple
    multiplicity: tuple

    @property
    def two_k(self):
        return self.two_j + self.k

    @property
    def stacked(self):
        return np.stack(self.ops)

    def completeness_residual(self):
        total = sum(b.T @ b for b in self.ops)
        return float(np.max(np.abs(total - np.eye(self.two_j + 1))))


def kraus_set(two_j, k):
    """Kraus operators of the channel from spin J to spin K = J + k/2.

    For ``k >= 0`` they are ``sqrt((2J+1)!/(2K+1)! binom(k, j))
    (a_dn*)^j (a_up*)^(k-j)``; for ``k < 0`` the annihilation form with
    prefactor ``(2K)!/(2J)!``. Matrix elements are evaluated from exact
    integer ratios before the final square root.
    """
    two_j = check_two_j(two_j)
    k = int(k)
    two_k = two_j + k
    if two_k < 0:
        raise ValueError(f"target spin would be negative: 2J={two_j}, k={k}")
    q = abs(k)
    ops = []
    for j in range(q + 1):
        b = np.zeros((two_k + 1, two_j + 1))
        for i in range(two_j + 1):
            if k >= 0:
                out = i + k - j
                num = comb(k, j) * perm(i + k - j, k - j) * perm(two_j - i + j, j)
                den = perm(two_k + 1, k)
            else:
                if i < q - j or two_j - i < j:
                    continue
                out = i - q + j
                num = comb(q, j) * perm(i, q - j) * perm(two_j - i, j)
                den = perm(two_j, q)
            b[out, i] = sqrt(Fraction(num, den))
        ops.append(b)
    return KrausSet(two_j, k, tuple(ops), tuple(comb(q, j) for j in range(q + 1)))


def kraus_strings(two_j, k):
    """Uncollapsed Kraus form: one operator per ladder string ``i_1 ... i_|k|``.

    Exponential in ``|k|``; intended only for cross-checking the collapsed
    form.
    """
    two_j = check_two_j(two_j)
    k = int(k)
    q = abs(k)
    if two_j + k < 0:
        raise ValueError(f"target spin would be negative: 2J={two_j}, k={k}")
    if k >= 0:
        pref = 1.0 / perm(two_j + k + 1, k)
    else:
        pref = 1.0 / perm(two_j, q)
    ops = []
    for code in range(2 ** q):
        mat = np.eye(two_j + 1)
        n = two_j
        for pos in range(q):
            down = (code >> pos) & 1
            if k >= 0:
                step = creation_ops(n)[down]
                n += 1
            else:
                step = annihilation_ops(n)[down]
                n -= 1
            mat = step @ mat
        ops.append(sqrt(pref) * mat)
    return ops


def apply_channel(ks, rho):
    """``sum_j B_j rho B_j^dagger`` for one matrix or a stack ``(n, d, d)``."""
    single = np.ndim(rho) == 2
    rhos = check_density_batch(rho, ks.two_j + 1)
    b = ks.stacked
    out = np.einsum("jai,nik,jbk->nab", b, rhos, b)
    return out[0] if single else out


def channel_output(two_j, k, rho, ks=None):
    """Phi^k(rho) itself, obtained from the Kraus form by U-conjugation."""
    ks = kraus_set(two_j, k) if ks is None else ks
    if ks.k >= 0:
        return apply_channel(ks, conjugate_by_U(np.asarray(rho, dtype=complex)))
    return conjugate_by_U(apply_channel(ks, rho))


def output_spectra(ks, rhos):
    """Descending eigenvalues of the channel outputs of a stack of inputs."""
    out = apply_channel(ks, check_density_batch(rhos, ks.two_j + 1))
    return np.linalg.eigvalsh(hermitize(out))[:, ::-1]


@dataclass(frozen=True)
class CoherentSpectrum:
    """Output spectrum of a coherent input.

    ``eigenvalues`` has length ``2K + 1`` in decreasing order (zeros after
    index k); ``exact`` holds the k+1 non-zero values as fractions and
    column j of ``eigenvectors`` is ``phi_j^{C,k}``.
    """

    two_j: int
    k: int
    eigenvalues: np.ndarray
    exact: tuple
    eigenvectors: np.ndarray

    @property
    def two_k(self):
        return self.two_j + self.k


def coherent_eigenvalues_exact(two_j, k):
    """lambda_j = (2J+1)/(2K+1) * prod_{i<j} (k-i)/(2K-i), j = 0..k, as fractions."""
    two_j = check_two_j(two_j)
    two_k = two_j + k
    lam = Fraction(two_j + 1, two_k + 1)
    vals = [lam]
    for i in range(k):
        lam = lam * Fraction(k - i, two_k - i)
        vals.append(lam)
    return tuple(vals)


def coherent_eigenbasis(two_j, k):
    """Columns ``phi_j^{C,k}`` for j = 0..2K; ``phi_j`` has j down-bosons."""
    two_k = check_two_j(two_j) + k
    basis = np.zeros((two_k + 1, two_k + 1))
    for j in range(two_k + 1):
        basis[two_k - j, j] = 1.0
    return basis


def coherent_output_spectrum(two_j, k):
    """Spectrum and eigenvectors of ``Phi~^k(|up><up|)`` in closed form."""
    two_j = check_two_j(two_j)
    k = int(k)
    if k < 0:
        raise ValueError("coherent_output_spectrum requires k >= 0")
    exact = coherent_eigenvalues_exact(two_j, k)
    vals = np.zeros(two_j + k + 1)
    vals[: k + 1] = [float(x) for x in exact]
    return CoherentSpectrum(two_j, k, vals, exact, coherent_eigenbasis(two_j, k))


def gamma_operator(two_j, k, m, basis):
    """``sum_{j<=m} a_up|phi_j><phi_j|a_up* + a_dn|phi_j><phi_j|a_dn*``.

    ``basis`` holds orthonormal vectors of the ``2J+k+1`` sector as columns
    (or a sequence of vectors); only the first ``m + 1`` are used. The
    result acts on the ``2J+k`` sector.
    """
    two_j = check_two_j(two_j)
    n_top = two_j + k + 1
    if not 0 <= m <= k:
        raise ValueError(f"need 0 <= m <= k, got m={m}, k={k}")
    basis = np.asarray(basis, dtype=complex)
    if basis.ndim == 2 and basis.shape[0] != n_top + 1 and basis.shape[1] == n_top + 1:
        basis = basis.T
    if basis.shape[0] != n_top + 1 or basis.shape[1] < m + 1:
        raise ValueError(f"basis must have {m + 1} vectors of dimension {n_top + 1}")
    a_up, a_dn = annihilation_ops(n_top)
    phis = basis[:, : m + 1]
    up, dn = a_up @ phis, a_dn @ phis
    return up @ up.conj().T + dn @ dn.conj().T


def gamma_coherent_closed_form(two_j, k, m):
    """sum_{j<m} (2J+k+2) P_j + (2J+k+1-m) P_m with P_j onto phi_j^{C,k}."""
    basis = coherent_eigenbasis(two_j, k)
    weights = np.zeros(basis.shape[1])
    weights[:m] = two_j + k + 2
    weights[m] = two_j + k + 1 - m
    return (basis * weights) @ basis.T
