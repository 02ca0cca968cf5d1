"""Glauber coherent states of one bosonic mode and the large-spin limit of Bloch states.

Phase-space integrals use the measure d^2z / pi. A density matrix on the
truncated Fock space spanned by |0>, ..., |N> is a :class:`FockDensity`.
"""

import warnings
from dataclasses import dataclass, field
from math import lgamma

import numpy as np
from scipy import integrate, optimize, special

from ._validation import check_density_matrix, check_two_j
from .concave import STANDARD_FAMILY, as_function, value_at_zero
from .entropy import LimitCurve, fit_decay_exponent
from .optimizer import sample_density, trial_rng

TAIL_EPS = 1e-10


@dataclass(frozen=True)
class FockDensity:
    """Density matrix supported on |0>, ..., |n_max>."""

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", check_density_matrix(self.entries))

    @property
    def n_max(self):
        return self.entries.shape[0] - 1

    @classmethod
    def from_state(cls, psi):
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def vacuum(cls, n_max=0):
        psi = np.zeros(n_max + 1, dtype=complex)
        psi[0] = 1.0
        return cls.from_state(psi)

    @classmethod
    def coherent(cls, z0, n_max):
        """|z0><z0| cut at n_max and renormalized."""
        return cls.from_state(glauber_ket(z0, n_max))

    def padded(self, dim):
        """The same operator inside a ``dim``-dimensional space."""
        if dim <= self.n_max:
            raise ValueError(f"cannot embed n_max={self.n_max} into dimension {dim}")
        out = np.zeros((dim, dim), dtype=complex)
        out[: self.n_max + 1, : self.n_max + 1] = self.entries
        return out


def sample_fock_density(n_max, rank=None, seed=None):
    """Random band-limited density (Hilbert-Schmidt ensemble, or ``rank``-induced)."""
    return FockDensity(sample_density(n_max, rank, seed))


def glauber_overlap(n, z):
    """<n|z> = exp(-|z|^2/2) z^n / sqrt(n!), evaluated in log space; broadcasts."""
    n = np.asarray(n)
    z = np.asarray(z, dtype=complex)
    if np.any(n < 0):
        raise ValueError("occupation numbers must be non-negative")
    r = np.abs(z)
    lg = special.gammaln(n + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_mod = -r ** 2 / 2 + n * np.log(r) - lg / 2
    log_mod = np.where(n == 0, -r ** 2 / 2, log_mod)
    return np.exp(log_mod) * np.exp(1j * n * np.angle(z))


def glauber_ket(z, n_max):
    """Coherent state |z> restricted to |0>, ..., |n_max>."""
    return glauber_overlap(np.arange(n_max + 1), complex(z))


def husimi(rho, z):
    """<z|rho|z> clamped to [0, 1]; ``z`` may be an array."""
    rho = rho.entries if isinstance(rho, FockDensity) else check_density_matrix(rho)
    z = np.asarray(z, dtype=complex)
    amps = glauber_overlap(np.arange(rho.shape[0]), z[..., None])
    vals = np.einsum("...i,ij,...j->...", amps.conj(), rho, amps).real
    return np.clip(vals, 0.0, 1.0)


def _tail_bound(n_max, u_cut):
    # Q(z) <= P(Poisson(|z|^2) <= N), and every test function obeys
    # |f(t)| <= sqrt(t) near 0, so bound the tail of sqrt of that envelope
    val, _ = integrate.quad(lambda u: np.sqrt(special.gammaincc(n_max + 1, u)), u_cut, np.inf)
    return val


def tail_radius(n_max, eps=TAIL_EPS):
    """Smallest R (on a 0.5 grid in R^2) whose neglected phase-space tail is below ``eps``."""
    u_cut = max(2 * np.log(1 / eps), n_max + 1.0)
    while _tail_bound(n_max, u_cut) > eps:
        u_cut += 0.5
    return float(np.sqrt(u_cut))


@dataclass(frozen=True)
class PhaseGrid:
    """Gauss-Legendre in u = |z|^2 on [0, R^2] times uniform angles.

    ``weights`` integrate against d^2z / pi: since d^2z = du dalpha / 2, a
    node gets its radial weight divided by the number of angles.
    """

    radius: float
    u: np.ndarray
    u_weights: np.ndarray
    angles: np.ndarray

    @property
    def points(self):
        return (np.sqrt(self.u)[:, None] * np.exp(1j * self.angles)[None, :]).ravel()

    @property
    def weights(self):
        return np.repeat(self.u_weights / len(self.angles), len(self.angles))

    def integrate(self, values):
        return float(np.asarray(values) @ self.weights)


def phase_grid(n_max=0, eps=TAIL_EPS, n_radial=None, n_angular=None):
    """Grid for band-limited states with cutoff ``n_max`` and tail below ``eps``."""
    radius = tail_radius(n_max, eps)
    u_max = radius ** 2
    n_radial = n_radial or int(2 * u_max) + 64
    n_angular = n_angular or 8 * (n_max + 1) + 32
    x, w = np.polynomial.legendre.leggauss(n_radial)
    return PhaseGrid(radius=radius, u=(x + 1) * u_max / 2, u_weights=w * u_max / 2,
                     angles=2 * np.pi * np.arange(n_angular) / n_angular)


def _ray_crossings(rho, center, radius, angles, levels, samples=400, iters=60):
    """Per angle, the u values where Q(center + sqrt(u) e^{i angle}) crosses a level."""
    angles = np.atleast_1d(angles)
    u = np.linspace(0.0, radius ** 2, samples)
    phase = np.exp(1j * angles)
    vals = husimi(rho, center + np.sqrt(u)[None, :] * phase[:, None])
    found = [[] for _ in angles]
    for b in levels:
        sv = np.sign(vals - b)
        m_idx, g_idx = np.nonzero(sv[:, :-1] * sv[:, 1:] < 0)
        if m_idx.size == 0:
            continue
        lo, hi, s_lo = u[g_idx], u[g_idx + 1], sv[m_idx, g_idx]
        for _ in range(iters):
            mid = (lo + hi) / 2
            same = np.sign(husimi(rho, center + np.sqrt(mid) * phase[m_idx]) - b) == s_lo
            lo, hi = np.where(same, mid, lo), np.where(same, hi, mid)
        for m, c in zip(m_idx, (lo + hi) / 2):
            found[m].append(float(c))
    return found


def _ray_integral(rho, f, center, radius, alpha, x, w):
    """int_0^{R^2} f(Q(center + sqrt(u) e^{i alpha})) du, split where Q crosses a breakpoint."""
    kinks = _ray_crossings(rho, center, radius, alpha, f.breakpoints)[0]
    edges = np.unique([0.0, *kinks, radius ** 2])
    a, c = edges[:-1, None], edges[1:, None]
    u = (a + (c - a) * (x + 1) / 2).ravel()
    wu = ((c - a) / 2 * w).ravel()
    return float(wu @ f(husimi(rho, center + np.sqrt(u) * np.exp(1j * alpha))))


def _husimi_peak(rho, grid):
    pts = grid.points
    start = pts[int(np.argmax(husimi(rho, pts)))]
    res = optimize.minimize(lambda v: -husimi(rho, complex(v[0], v[1])), [start.real, start.imag],
                            method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-16})
    return complex(res.x[0], res.x[1])


def glauber_concave_integral(rho, f, grid=None, resolve_kinks=True):
    """(1/pi) * integral of f(<z|rho|z>) d^2z; needs f(0) = 0.

    Smooth f (or ``resolve_kinks=False``) uses the grid as is. For
    piecewise-linear f the plane is otherwise swept
    by rays from the Husimi maximum out to distance R + |maximum| (a disk
    containing the grid's). Each ray is split where the Husimi function
    crosses a breakpoint, with the grid's radial order on every piece, and
    the angle is integrated adaptively, since the angular profile is only
    piecewise smooth where a kink curve touches a ray.
    """
    rho = rho if isinstance(rho, FockDensity) else FockDensity(rho)
    f = as_function(f)
    if abs(value_at_zero(f)) > 0:
        raise ValueError("f(0) must vanish, otherwise the phase-space integral diverges")
    grid = phase_grid(rho.n_max) if grid is None else grid
    if not (resolve_kinks and getattr(f, "breakpoints", ())):
        return grid.integrate(f(husimi(rho, grid.points)))
    x, w = np.polynomial.legendre.leggauss(len(grid.u))
    center = _husimi_peak(rho, grid)
    radius = grid.radius + abs(center)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        total, _ = integrate.quad(lambda al: _ray_integral(rho, f, center, radius, al, x, w),
                                  0.0, 2 * np.pi, epsabs=1e-11, epsrel=0.0, limit=500)
    return float(total / (2 * np.pi))


def glauber_vacuum_value(f):
    """Closed form for the vacuum: (1/pi) int f(e^{-|z|^2}) d^2z = int_0^1 f(t)/t dt."""
    f = as_function(f)
    if abs(value_at_zero(f)) > 0:
        raise ValueError("f(0) must vanish, otherwise the phase-space integral diverges")
    val, _ = integrate.quad(lambda t: float(f(np.array([t]))[0]) / t, 0.0, 1.0,
                            epsabs=1e-13, epsrel=1e-12, limit=400,
                            points=getattr(f, "breakpoints", None) or None)
    return val


def bloch_stereo_ket(two_j, z, n_max=None):
    """Bloch coherent state in stereographic coordinate ``z`` (basis n = 0..2J).

    z = 0 gives |n=0>; with ``n_max`` only the first n_max + 1 amplitudes
    are returned.
    """
    two_j = check_two_j(two_j)
    z = np.asarray(z, dtype=complex)
    top = two_j if n_max is None else min(n_max, two_j)
    n = np.arange(top + 1)
    log_binom = np.array([lgamma(two_j + 1) - lgamma(k + 1) - lgamma(two_j - k + 1) for k in n])
    r = np.abs(z)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_mod = log_binom / 2 - (two_j / 2) * np.log1p(r ** 2 / 4) + n * np.log(r / 2)
    log_mod = np.where(n == 0, log_binom[0] / 2 - (two_j / 2) * np.log1p(r ** 2 / 4), log_mod)
    return np.exp(log_mod) * np.exp(-1j * n * np.angle(z)[..., None])


def scaled_bloch_symbol(rho, two_j, w):
    """<(2/J)^(1/2) conj(w)| rho |(2/J)^(1/2) conj(w)>_J for band-limited rho."""
    rho = rho if isinstance(rho, FockDensity) else FockDensity(rho)
    two_j = check_two_j(two_j)
    if two_j < rho.n_max:
        raise ValueError(f"2J={two_j} is below the band limit N={rho.n_max}")
    z = np.sqrt(4.0 / two_j) * np.conj(np.asarray(w, dtype=complex))
    amps = bloch_stereo_ket(two_j, z, rho.n_max)
    vals = np.einsum("...i,ij,...j->...", amps.conj(), rho.entries, amps).real
    return np.clip(vals, 0.0, 1.0)


def domination_constant(n_max):
    """C with scaled Bloch symbol <= C (1 + |w|^2 / (2(N+2)))^-2 whenever 2J >= 2(N+2)."""
    a = 2 * (n_max + 2)
    return float(sum(a ** n / np.exp(lgamma(n + 1)) for n in range(n_max + 1)))


def bloch_limit_value(rho, f, two_j, n_theta=512, n_phi=None):
    """(1/pi) int f(scaled Bloch symbol)(1 + |w|^2/(2J))^-2 d^2w.

    Evaluated after the substitution w = (J/2)^(1/2) cot(theta/2) e^{i phi},
    which turns it into J/(2 pi) times the sphere integral of f(<omega|rho|omega>);
    the theta rule is Gauss-Legendre, whose nodes crowd the endpoint where
    the symbol of a band-limited state concentrates.
    """
    rho = rho if isinstance(rho, FockDensity) else FockDensity(rho)
    f = as_function(f)
    two_j = check_two_j(two_j)
    if two_j < rho.n_max:
        raise ValueError(f"2J={two_j} is below the band limit N={rho.n_max}")
    n_phi = n_phi or 8 * (rho.n_max + 1) + 32
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    theta = (x + 1) * np.pi / 2
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    n = np.arange(rho.n_max + 1)
    log_binom = np.array([lgamma(two_j + 1) - lgamma(k + 1) - lgamma(two_j - k + 1) for k in n])
    with np.errstate(divide="ignore"):
        log_amp = (log_binom / 2 + n * np.log(np.cos(theta / 2))[:, None]
                   + (two_j - n) * np.log(np.sin(theta / 2))[:, None])
    amps = np.exp(log_amp)[:, None, :] * np.exp(-1j * np.outer(phi, n))[None, :, :]
    sym = np.clip(np.einsum("tpi,ij,tpj->tp", amps.conj(), rho.entries, amps).real, 0.0, 1.0)
    radial = (wx * np.pi / 2 * np.sin(theta)) @ f(sym)
    return float(two_j / 2 / (2 * np.pi) * radial.sum() * (2 * np.pi / n_phi))


@dataclass
class BlochLimitCurve(LimitCurve):
    """Bloch limit values plus the pointwise diagnostics along the ladder.

    ``symbol_gaps`` holds max |scaled Bloch symbol - Husimi| on the grid
    and ``bound_margins`` min of (domination bound - scaled symbol).
    """

    symbol_gaps: np.ndarray = field(default=None)
    bound_margins: np.ndarray = field(default=None)


def bloch_limit_curve(rho, f, two_js, grid=None):
    """Tabulate :func:`bloch_limit_value` over ``two_js`` against the Glauber integral."""
    rho = rho if isinstance(rho, FockDensity) else FockDensity(rho)
    f = as_function(f)
    two_js = np.array([check_two_j(t) for t in two_js])
    if np.any(np.diff(two_js) <= 0):
        raise ValueError("two_js must be increasing")
    if np.any(two_js < 2 * (rho.n_max + 2)):
        raise ValueError(f"every 2J must be at least 2(N+2) = {2 * (rho.n_max + 2)}")
    grid = phase_grid(rho.n_max) if grid is None else grid
    pts = grid.points
    q = husimi(rho, pts)
    envelope = domination_constant(rho.n_max) * (1 + np.abs(pts) ** 2 / (2 * (rho.n_max + 2))) ** -2
    values, gaps, margins = [], [], []
    for tj in two_js:
        s = scaled_bloch_symbol(rho, int(tj), pts)
        gaps.append(float(np.max(np.abs(s - q))))
        margins.append(float(np.min(envelope - s)))
        values.append(bloch_limit_value(rho, f, int(tj)))
    curve = BlochLimitCurve(two_js, np.array(values), glauber_concave_integral(rho, f, grid),
                            symbol_gaps=np.array(gaps), bound_margins=np.array(margins))
    curve.exponent = fit_decay_exponent(two_js / 2, curve.errors)
    return curve


# integrals with slack below this are recomputed with kinks resolved
REFINE_BELOW = 1e-3


@dataclass
class GlauberScan:
    """Minimum over sampled states of integral(rho) - integral(vacuum), per f."""

    n_max: int
    trials: int
    seed: int
    functions: tuple
    min_slack: dict
    violations: list

    @property
    def passed(self):
        return not self.violations


def glauber_scan(n_max, trials=200, seed=0, fs=None, tol=1e-6, max_violations=5):
    """Check the phase-space inequality on random band-limited states.

    Trial t draws a state of rank 1 + (t mod (n_max + 1)) from the seed
    stream (seed, t). Values within ``REFINE_BELOW`` of the vacuum are
    recomputed with kinks resolved.
    """
    fs = STANDARD_FAMILY if fs is None else tuple(as_function(f) for f in fs)
    grid = phase_grid(n_max)
    targets = [glauber_vacuum_value(f) for f in fs]
    min_slack = {str(f): np.inf for f in fs}
    violations = []
    for t in range(trials):
        rho = sample_fock_density(n_max, 1 + t % (n_max + 1), trial_rng(seed, t))
        for f, target in zip(fs, targets):
            slack = glauber_concave_integral(rho, f, grid, resolve_kinks=False) - target
            if slack < REFINE_BELOW:
                slack = glauber_concave_integral(rho, f, grid) - target
            min_slack[str(f)] = min(min_slack[str(f)], float(slack))
            if slack < -tol and len(violations) < max_violations:
                violations.append({"trial": t, "function": str(f), "slack": float(slack),
                                   "rho_real": rho.entries.real.tolist(),
                                   "rho_imag": rho.entries.imag.tolist()})
    return GlauberScan(n_max, trials, seed, fs, min_slack, violations)
