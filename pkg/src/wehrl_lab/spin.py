"""Spin representation spaces, Bloch coherent states and sphere quadrature.

Spins are passed around as the integer ``two_j = 2J``. Vectors on the spin-J
space are indexed by ``m_idx = M + J`` so index 0 is ``M = -J`` and the last
index is ``M = J`` (the north pole state).
"""

from dataclasses import dataclass
from math import comb
from typing import NamedTuple

import numpy as np

from ._validation import check_density_matrix, check_state, check_two_j


class SphPoint(NamedTuple):
    theta: float
    phi: float


def spin_operators(two_j):
    """Return ``(Sx, Sy, Sz)`` on the spin ``two_j / 2`` space.

    Standard basis: Sz diagonal with ascending M, Sx real and Sy purely
    imaginary.
    """
    two_j = check_two_j(two_j)
    j = two_j / 2
    m = np.arange(two_j + 1) - j
    # <M+1| S+ |M> = sqrt(J(J+1) - M(M+1))
    raising = np.diag(np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1)), -1)
    sx = (raising + raising.T) / 2
    sy = (raising - raising.T) / 2j
    sz = np.diag(m)
    return sx.astype(complex), sy, sz.astype(complex)


def _ket_amplitudes(two_j, theta, phi):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    n_up = np.arange(two_j + 1)               # J + M
    m = n_up - two_j / 2
    binom = np.sqrt(np.array([float(comb(two_j, n)) for n in n_up]))
    c = np.cos(theta / 2)[..., None]
    s = np.sin(theta / 2)[..., None]
    amp = binom * c ** n_up * s ** (two_j - n_up)
    return amp * np.exp(-1j * m * phi[..., None])


def coherent_ket(two_j, theta, phi=0.0):
    """Bloch coherent state ``|omega>_J`` for ``omega = (theta, phi)``.

    Phase convention: ``exp(-i phi Sz) exp(-i theta Sy)|M=J>``, i.e.
    amplitude(M) = binom(2J, J+M)^(1/2) cos^(J+M)(theta/2) sin^(J-M)(theta/2)
    exp(-i M phi). The poles return exact basis vectors.
    """
    two_j = check_two_j(two_j)
    if theta == 0.0:
        psi = np.zeros(two_j + 1, dtype=complex)
        psi[-1] = np.exp(-1j * (two_j / 2) * phi)
        return psi
    if theta == np.pi:
        psi = np.zeros(two_j + 1, dtype=complex)
        psi[0] = np.exp(1j * (two_j / 2) * phi)
        return psi
    return _ket_amplitudes(two_j, theta, phi)


def coherent_kets(two_j, theta, phi):
    """Vectorized :func:`coherent_ket`; returns shape ``theta.shape + (2J+1,)``."""
    return _ket_amplitudes(check_two_j(two_j), theta, phi)


def spin_along(two_j, theta, phi):
    """The operator omega . S for the unit vector with angles (theta, phi)."""
    sx, sy, sz = spin_operators(two_j)
    return (np.sin(theta) * np.cos(phi) * sx + np.sin(theta) * np.sin(phi) * sy
            + np.cos(theta) * sz)


def lower_symbol(rho, theta, phi=0.0):
    """``<omega|rho|omega>_J`` clamped to [0, 1]; vectorized over angles."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"rho must be a square matrix, got shape {rho.shape}")
    two_j = rho.shape[0] - 1
    kets = coherent_kets(two_j, theta, phi)
    vals = np.einsum("...i,ij,...j->...", kets.conj(), rho, kets).real
    return np.clip(vals, 0.0, 1.0)


def lower_symbols(rhos, kets):
    """Symbols of a stack of matrices ``(n, d, d)`` at kets ``(p, d)`` -> ``(n, p)``."""
    tmp = np.einsum("nij,pj->npi", rhos, kets)
    vals = np.einsum("pi,npi->np", kets.conj(), tmp).real
    return np.clip(vals, 0.0, 1.0)


def antiunitary_matrix(two_j):
    """Real matrix W with ``U psi = W conj(psi)``."""
    two_j = check_two_j(two_j)
    w = np.zeros((two_j + 1, two_j + 1))
    for i in range(two_j + 1):
        # U sends alpha_M |M> to (-1)^(L-M) conj(alpha_M) |-M>; L - M = two_j - i
        w[two_j - i, i] = (-1) ** (two_j - i)
    return w


def antiunitary_U(two_j, psi):
    """Apply the time-reversal map U_L (antilinear) to ``psi``."""
    two_j = check_two_j(two_j)
    psi = check_state(psi, two_j + 1)
    return antiunitary_matrix(two_j) @ psi.conj()


def conjugate_by_U(rho):
    """``U rho U^-1``; equal to ``U^-1 rho U`` since U^2 is a sign."""
    rho = np.asarray(rho, dtype=complex)
    w = antiunitary_matrix(rho.shape[-1] - 1)
    return w @ rho.conj() @ w.T


@dataclass(frozen=True)
class SphereQuadrature:
    """Product rule on S^2: Gauss-Legendre in cos(theta) times uniform phi.

    ``degree`` is the largest total degree of spherical polynomials
    integrated exactly (None for rules without such a guarantee).
    """

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    degree: int
    level: int

    @property
    def nodes(self):
        return [SphPoint(float(t), float(p)) for t, p in zip(self.theta, self.phi)]

    def __len__(self):
        return self.weights.shape[0]

    def integrate(self, values):
        """Sum of ``weights * values`` along the last axis."""
        return np.asarray(values) @ self.weights

    def kets(self, two_j):
        return coherent_kets(two_j, self.theta, self.phi)

    def rotated(self, theta, phi):
        """Same rule with its north pole moved to direction (theta, phi)."""
        rot = rotation_to(theta, phi)
        st = np.sin(self.theta)
        vec = np.stack([st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)])
        x, y, z = rot @ vec
        return SphereQuadrature(theta=np.arccos(np.clip(z, -1.0, 1.0)),
                                phi=np.mod(np.arctan2(y, x), 2 * np.pi),
                                weights=self.weights, degree=self.degree, level=self.level)


def rotation_to(theta, phi):
    """3x3 rotation Rz(phi) Ry(theta), taking the north pole to (theta, phi)."""
    ct, st, cp, sp = np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)
    ry = np.array([[ct, 0.0, st], [0.0, 1.0, 0.0], [-st, 0.0, ct]])
    rz = np.array([[cp, -sp, 0.0], [sp, cp, 0.0], [0.0, 0.0, 1.0]])
    return rz @ ry


def symbol_zeros(psi):
    """Directions where ``<omega|psi>`` vanishes.

    Up to a non-vanishing factor, <omega|psi> is the polynomial
    sum_n binom(2J, n)^(1/2) psi_n w^n in w = cot(theta/2) e^(i phi); a
    degree drop puts the missing roots at theta = 0.
    """
    psi = check_state(psi)
    two_j = psi.shape[0] - 1
    coeffs = np.sqrt([float(comb(two_j, n)) for n in range(two_j + 1)]) * psi
    nz = np.nonzero(np.abs(coeffs) > 1e-14 * np.abs(coeffs).max())[0]
    top = nz[-1] if nz.size else 0
    roots = np.roots(coeffs[: top + 1][::-1]) if top > 0 else np.array([])
    zeros = [SphPoint(float(2 * np.arctan2(1.0, abs(w))), float(np.mod(np.angle(w), 2 * np.pi)))
             for w in roots]
    zeros += [SphPoint(0.0, 0.0)] * (two_j - top)
    return zeros


POINTS_PER_LEVEL = 4


def sphere_quadrature(level, polar="cos"):
    """Product quadrature with ``4 * level`` Gauss-Legendre nodes in the polar variable.

    Uses twice as many equispaced phi nodes. With ``polar="cos"`` the nodes
    are in cos(theta) and the rule is exact for spherical polynomials up to
    degree ``8 * level - 1``. ``polar="theta"`` places them in theta itself
    (weight sin(theta)); it is not polynomial-exact (``degree`` is None) but
    converges much faster for integrands with a log or square-root
    singularity at a pole, e.g. f of a pure-state symbol after
    :meth:`SphereQuadrature.rotated` moves a zero there.
    """
    if int(level) != level or level < 1:
        raise ValueError(f"quadrature level must be a positive integer, got {level!r}")
    if polar not in ("cos", "theta"):
        raise ValueError(f"polar must be 'cos' or 'theta', got {polar!r}")
    level = int(level)
    n_theta = POINTS_PER_LEVEL * level
    n_phi = 2 * n_theta
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    if polar == "cos":
        theta, degree = np.arccos(x), 2 * n_theta - 1
    else:
        theta = (x + 1) * np.pi / 2
        wx = wx * np.pi / 2 * np.sin(theta)
        degree = None
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    ww = np.outer(wx, np.full(n_phi, 2 * np.pi / n_phi))
    return SphereQuadrature(theta=tt.ravel(), phi=pp.ravel(), weights=ww.ravel(),
                            degree=degree, level=level)


def quadrature_for_degree(degree):
    """Smallest-level rule whose exactness degree is at least ``degree``."""
    level = max(1, -(-(int(degree) + 1) // (2 * POINTS_PER_LEVEL)))
    return sphere_quadrature(level)


def identity_resolution_residual(two_j, quad):
    """max |(2J+1)/(4 pi) sum_i w_i |w_i><w_i| - I|."""
    kets = quad.kets(two_j)
    res = (two_j + 1) / (4 * np.pi) * np.einsum("p,pi,pj->ij", quad.weights, kets, kets.conj())
    return float(np.max(np.abs(res - np.eye(two_j + 1))))


def symbol_on_quadrature(rho, quad):
    """Lower symbol of a validated density matrix at every quadrature node."""
    rho = check_density_matrix(rho)
    return lower_symbols(rho[np.newaxis], quad.kets(rho.shape[0] - 1))[0]
