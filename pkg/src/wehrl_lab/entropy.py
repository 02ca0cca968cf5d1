"""Quantum and classical (Wehrl-type) entropies and concave averages."""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from ._validation import check_density_matrix, check_two_j, hermitize
from .channel import channel_output, coherent_eigenvalues_exact, kraus_set
from .concave import as_function, value_at_zero
from .majorization import concave_sum, spectrum, trace_concave
from .spin import (POINTS_PER_LEVEL, coherent_kets, lower_symbols, rotation_to,
                   sphere_quadrature, symbol_zeros)

XLOGX = "xlogx"
QUAD_TOL = 1e-9
AZIMUTH_TOL = 1e-11


def von_neumann_entropy(rho):
    """-Tr rho ln rho with 0 ln 0 = 0."""
    rho = check_density_matrix(rho)
    return concave_sum(spectrum(rho), XLOGX)


def _alignment_point(rho, probe):
    """Pole for an aligned rule: an exact symbol zero for pure states,
    otherwise the symbol minimum, polished from the best node of ``probe``."""
    two_j = rho.shape[0] - 1
    vals, vecs = np.linalg.eigh(hermitize(rho))
    if vals[-2] < 1e-13:
        return symbol_zeros(vecs[:, -1])[0]
    sym = lower_symbols(rho[np.newaxis], probe.kets(two_j))[0]
    i = int(np.argmin(sym))

    def symbol_at(x):
        ket = coherent_kets(two_j, np.array(x[0]), np.array(x[1]))
        return float(np.vdot(ket, rho @ ket).real)

    res = optimize.minimize(symbol_at, [probe.theta[i], probe.phi[i]], method="Nelder-Mead",
                            options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 2000})
    return float(res.x[0]), float(res.x[1])


def aligned_quadrature(rho, quad):
    """Rotate ``quad`` so its north pole sits where the lower symbol is smallest.

    f(symbol) is least smooth where the symbol vanishes and a product rule
    clusters nodes at its poles; pair this with ``polar="theta"`` rules.
    Pure states use an exact symbol zero, mixed states the smallest symbol
    on the rule's own nodes.
    """
    if rho.shape[0] == 1:
        return quad
    return quad.rotated(*_alignment_point(rho, quad))


def _unit(theta, phi):
    st = np.sin(theta)
    return np.array([st * np.cos(phi), st * np.sin(phi), np.cos(theta)])


def _zero_clusters(psi, merge=0.2):
    """Directions of the symbol zeros of ``psi``, merging those within ``merge`` radians."""
    centers = []
    for z in symbol_zeros(psi):
        v = _unit(*z)
        for c in centers:
            if np.arccos(np.clip(v @ c[0] / np.linalg.norm(c[0]), -1.0, 1.0)) < merge:
                c[0] = c[0] + v
                break
        else:
            centers.append([v])
    return [c[0] / np.linalg.norm(c[0]) for c in centers]


class _Partition:
    """Smooth partition of unity on S^2 concentrated near given centers.

    chi_i is proportional to prod_{j != i} (1 - n . c_j)^p, so it equals 1
    at c_i and vanishes to order p at every other center.
    """

    def __init__(self, centers, power=2):
        self.centers = np.array(centers)
        self.power = power

    def __call__(self, i, xyz):
        d = np.clip(1.0 - np.tensordot(self.centers, xyz, axes=1), 0.0, None) ** self.power
        prods = np.stack([np.prod(np.delete(d, l, axis=0), axis=0) for l in range(len(d))])
        return prods[i] / prods.sum(axis=0)


class _GreatCircles:
    """Functions ``fs`` of the lower symbol of ``rho`` on great circles through a pole.

    The circle at azimuth ``phi`` (in the frame of rotation ``rot``) is
    parametrized by ``t`` in [0, 2 pi) with t = 0 at the pole and t = pi
    at its antipode. ``weight`` optionally multiplies the integrand.
    """

    def __init__(self, rho, rot, fs, weight=None):
        self.rho = rho
        self.rot = rot
        self.fs = fs
        self.weight = weight
        self.two_j = rho.shape[0] - 1

    def points(self, t, phi):
        t, phi = np.broadcast_arrays(np.asarray(t, dtype=float), phi)
        vec = np.stack([np.sin(t) * np.cos(phi), np.sin(t) * np.sin(phi), np.cos(t)])
        return np.tensordot(self.rot, vec, axes=1)

    def symbol(self, xyz):
        x, y, z = xyz
        kets = coherent_kets(self.two_j, np.arccos(np.clip(z, -1.0, 1.0)), np.arctan2(y, x))
        vals = np.einsum("...i,ij,...j->...", kets.conj(), self.rho, kets).real
        return np.clip(vals, 0.0, 1.0)

    def crossings(self, phis, levels):
        """Per circle, sorted angles t where the symbol equals one of ``levels``.

        On a great circle the symbol is a trigonometric polynomial of degree
        2J, so the crossings are unit-modulus roots of a polynomial of
        degree 4J, found as eigenvalues of its companion matrix.
        """
        phis = np.asarray(phis, dtype=float)
        deg = 2 * self.two_j
        t = 2 * np.pi * np.arange(deg + 1) / (deg + 1)
        vals = self.symbol(self.points(t[None, :], phis[:, None]))
        c = np.fft.fft(vals, axis=1) / (deg + 1)
        # c[m] for m = 0..2J, c[-m] for negative m; z^2J * sum c_m z^m, highest power first
        coeffs = np.concatenate([c[:, self.two_j + 1:], c[:, : self.two_j + 1]], axis=1)[:, ::-1]
        lead = coeffs[:, 0]
        regular = np.abs(lead) > 1e-12 * np.abs(coeffs).max(axis=1)
        found = [[] for _ in phis]
        for level in levels:
            shifted = coeffs.copy()
            shifted[:, self.two_j] -= level
            roots = np.full((len(phis), deg), np.nan, dtype=complex)
            if regular.any():
                comp = np.zeros((int(regular.sum()), deg, deg), dtype=complex)
                comp[:, 0, :] = -shifted[regular, 1:] / shifted[regular, :1]
                comp[:, np.arange(1, deg), np.arange(deg - 1)] = 1.0
                roots[regular] = np.linalg.eigvals(comp)
            for i in np.nonzero(~regular)[0]:
                r = np.roots(shifted[i])
                roots[i, : r.size] = r
            hit = np.abs(np.abs(roots) - 1.0) < 1e-6
            for i, j in zip(*np.nonzero(hit)):
                found[i].append(np.mod(np.angle(roots[i, j]), 2 * np.pi))
        return [np.sort(np.array(f)) for f in found]

    def integrals(self, phis, x, wx):
        """int_0^2pi f(symbol) |sin t| dt per f and circle, split at kinks of any f."""
        breaks = sorted({b for f in self.fs for b in getattr(f, "breakpoints", ())})
        ts, ws, ps, owner = [], [], [], []
        kinks = self.crossings(phis, breaks) if breaks else [()] * len(phis)
        for i, phi in enumerate(phis):
            edges = np.unique(np.array([0.0, np.pi, 2 * np.pi, *kinks[i]]))
            a, c = edges[:-1, None], edges[1:, None]
            t = (a + (c - a) * (x + 1) / 2).ravel()
            ts.append(t)
            ws.append(((c - a) / 2 * wx).ravel() * np.abs(np.sin(t)))
            ps.append(np.full(t.shape, phi))
            owner.append(np.full(t.shape, i))
        t, w, ph = np.concatenate(ts), np.concatenate(ws), np.concatenate(ps)
        vec = np.stack([np.sin(t) * np.cos(ph), np.sin(t) * np.sin(ph), np.cos(t)])
        xyz = np.tensordot(self.rot, vec, axes=1)
        sym = self.symbol(xyz)
        if self.weight is not None:
            w = w * self.weight(xyz)
        owner = np.concatenate(owner)
        return np.array([np.bincount(owner, weights=w * f(sym), minlength=len(phis))
                         for f in self.fs])


def _frames(rho, level):
    """Rotations and partition weights for :func:`meridian_average`."""
    vals, vecs = np.linalg.eigh(hermitize(rho))
    if vals[-2] < 1e-13:
        centers = _zero_clusters(vecs[:, -1])
        if len(centers) > 1:
            part = _Partition(centers)
            return [(rotation_to(np.arccos(np.clip(c[2], -1.0, 1.0)), np.arctan2(c[1], c[0])),
                     (lambda xyz, i=i: part(i, xyz))) for i, c in enumerate(centers)]
        c = centers[0]
        return [(rotation_to(np.arccos(np.clip(c[2], -1.0, 1.0)), np.arctan2(c[1], c[0])), None)]
    theta0, phi0 = _alignment_point(rho, sphere_quadrature(max(2, int(level) // 2)))
    return [(rotation_to(theta0, phi0), None)]


def meridian_average(rho, f, level, align=True, adaptive=False):
    """Classical concave average integrated circle by circle.

    The sphere is swept by great circles through a pole where the symbol
    is smallest. For a pure state with zeros in several places the
    integrand is split by a smooth partition of unity, one piece per zero
    cluster, each swept about its own zero. Circles are cut at the pole,
    its antipode and wherever the symbol crosses a breakpoint of a
    piecewise-linear f; every piece gets ``4 * level`` Gauss-Legendre
    nodes. The azimuth uses ``4 * level`` equispaced circles or, with
    ``adaptive``, scipy's QAGS, which copes with the algebraic
    singularities that appear where a kink curve touches a circle.
    """
    return float(meridian_averages(rho, [f], level, align, adaptive)[0])


def meridian_averages(rho, fs, level, align=True, adaptive=False):
    """:func:`meridian_average` for several functions from one sweep."""
    rho = check_density_matrix(rho)
    fs = [as_function(f) for f in fs]
    two_j = rho.shape[0] - 1
    if two_j == 0:
        return np.array([float(f(np.array([1.0]))[0]) for f in fs])
    n = POINTS_PER_LEVEL * int(level)
    frames = _frames(rho, level) if align else [(np.eye(3), None)]
    x, wx = np.polynomial.legendre.leggauss(n)
    total = np.zeros(len(fs))
    for rot, weight in frames:
        if adaptive:
            for j, f in enumerate(fs):
                circles = _GreatCircles(rho, rot, [f], weight)
                # QAGS flags roundoff once the circle rule's own error
                # dominates; callers check convergence by refining ``level``
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", integrate.IntegrationWarning)
                    part, _ = integrate.quad(lambda ph: circles.integrals([ph], x, wx)[0, 0],
                                             0.0, np.pi, epsabs=AZIMUTH_TOL, epsrel=0.0, limit=500)
                total[j] += part
        else:
            phis = np.pi * np.arange(n) / n
            total += np.pi / n * _GreatCircles(rho, rot, fs, weight).integrals(phis, x, wx).sum(axis=1)
    return (two_j + 1) / (4 * np.pi) * total


def classical_concave_average(rho, f, quad, align=False):
    """(2J+1)/(4 pi) * integral of f(<w|rho|w>) over the sphere, on ``quad``.

    With ``align`` the rule is first rotated by :func:`aligned_quadrature`.
    """
    rho = check_density_matrix(rho)
    f = as_function(f)
    two_j = rho.shape[0] - 1
    if align:
        quad = aligned_quadrature(rho, quad)
    sym = lower_symbols(rho[np.newaxis], quad.kets(two_j))[0]
    return float((two_j + 1) / (4 * np.pi) * quad.integrate(f(sym)))


def converged_average(rho, f, tol=QUAD_TOL, start_level=2, max_level=128, align=True):
    """Classical concave average with quadrature level doubling.

    With ``align`` each level is evaluated by :func:`meridian_average`,
    adaptively in azimuth when f has breakpoints.
    Stops once two successive levels agree within ``tol``; returns
    ``(value, level)``. Raises ``RuntimeError`` if ``max_level`` is reached
    first.
    """
    kinked = bool(getattr(as_function(f), "breakpoints", ()))

    def at(level):
        if align:
            return meridian_average(rho, f, level, adaptive=kinked)
        return classical_concave_average(rho, f, sphere_quadrature(level))

    level = max(start_level, 4) if kinked and align else start_level
    prev = at(level)
    while level < max_level:
        level *= 2
        cur = at(level)
        if abs(cur - prev) < tol:
            return cur, level
        prev = cur
    raise RuntimeError(f"quadrature did not reach tolerance {tol} by level {max_level}")


def wehrl_entropy(rho, quad=None, tol=QUAD_TOL):
    """Classical entropy of the lower symbol.

    Uses ``quad`` when given, otherwise level doubling to ``tol``.
    """
    if quad is not None:
        return classical_concave_average(rho, XLOGX, quad)
    return converged_average(rho, XLOGX, tol)[0]


def berezin_lieb_gap(rho, f, quad):
    """Classical average minus Tr f(rho); non-negative for concave f."""
    return classical_concave_average(rho, f, quad) - trace_concave(rho, f)


def coherent_classical_average(two_j, f):
    """(2J+1) * int_0^1 f(t^(2J)) dt by adaptive Gauss-Kronrod quadrature."""
    two_j = check_two_j(two_j)
    f = as_function(f)

    def integrand(t):
        return float(np.asarray(f(np.array([t ** two_j])))[0])

    # kinks of piecewise-linear f sit at t = b^(1/2J)
    kinks = [b ** (1.0 / two_j) for b in getattr(f, "breakpoints", ())] if two_j else []
    val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=400,
                            points=kinks or None)
    return (two_j + 1) * val


def scaled_channel_average(two_j, k, rho, f, ks=None):
    """(2J+1)/(2K+1) Tr f((2K+1)/(2J+1) Phi^k(rho)) for k >= 0."""
    two_j = check_two_j(two_j)
    if k < 0:
        raise ValueError("scaled_channel_average requires k >= 0")
    rho = check_density_matrix(rho, two_j + 1)
    f = as_function(f)
    two_k = two_j + k
    scale = (two_k + 1) / (two_j + 1)
    lam = spectrum(channel_output(two_j, k, rho, ks))
    return float(np.sum(f(np.clip(scale * lam, 0.0, 1.0))) / scale)


def coherent_scaled_average(two_j, k, f):
    """Closed form of :func:`scaled_channel_average` on a coherent input.

    Sums f over the k+1 scaled coherent eigenvalues plus ``2K - k`` copies
    of f(0).
    """
    two_j = check_two_j(two_j)
    f = as_function(f)
    two_k = two_j + k
    scale_vals = np.array([float(x * (two_k + 1) / (two_j + 1))
                           for x in coherent_eigenvalues_exact(two_j, k)])
    total = np.sum(f(scale_vals)) + (two_k - k) * value_at_zero(f)
    return float((two_j + 1) / (two_k + 1) * total)


@dataclass
class LimitCurve:
    """Values along an increasing ``ladder`` of twice-spins approaching ``target``."""

    ladder: np.ndarray
    values: np.ndarray
    target: float
    exponent: float = field(default=float("nan"))

    @property
    def errors(self):
        return np.abs(self.values - self.target)

    def rows(self):
        return [(int(x), float(v), float(e)) for x, v, e in zip(self.ladder, self.values, self.errors)]

    @property
    def monotone(self):
        return bool(np.all(np.diff(self.errors) <= 0))


def fit_decay_exponent(xs, errors):
    """Slope p of log(error) ~ -p log(x) by least squares."""
    xs = np.asarray(xs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = errors > 0
    if keep.sum() < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(xs[keep]), np.log(errors[keep]), 1)
    return float(-slope)


def classical_limit_curve(two_j, f, two_ks):
    """Scaled coherent-output averages for increasing K against the sphere integral."""
    two_j = check_two_j(two_j)
    two_ks = np.array([check_two_j(tk, "two_k") for tk in two_ks])
    if np.any(np.diff(two_ks) <= 0) or np.any(two_ks < two_j):
        raise ValueError("two_ks must be increasing and at least two_j")
    values = np.array([coherent_scaled_average(two_j, int(tk) - two_j, f) for tk in two_ks])
    target = coherent_classical_average(two_j, f)
    curve = LimitCurve(two_ks, values, target)
    curve.exponent = fit_decay_exponent(two_ks / 2, curve.errors)
    return curve


def sandwich(two_j, k, rho, f, quad, ks=None):
    """The three quantities of the chain coherent <= rho <= classical.

    Returns ``(coherent scaled average, scaled average of rho, classical
    average of rho)``.
    """
    ks = kraus_set(two_j, k) if ks is None else ks
    return (coherent_scaled_average(two_j, k, f),
            scaled_channel_average(two_j, k, rho, f, ks),
            classical_concave_average(rho, f, quad))

