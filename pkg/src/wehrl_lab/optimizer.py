"""Random states, output-entropy minimization and randomized inequality scans."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ._validation import check_state, check_two_j, hermitize
from .channel import apply_channel, coherent_output_spectrum, kraus_set
from .concave import STANDARD_FAMILY, ConcaveSpec, as_function
from .entropy import coherent_classical_average, meridian_averages
from .majorization import concave_sum
from .spin import antiunitary_U, coherent_kets, conjugate_by_U, lower_symbols

EIG_FLOOR = 1e-14

# tolerances of the scan checks (slack below -tol is a violation)
SCAN_TOLERANCES = {
    "majorization": 1e-10,
    "norm_bound": 1e-12,
    "concave_trace": 1e-9,
    "berezin_lieb": 1e-9,
    "classical": 1e-8,
}
# classical averages with slack below this are recomputed precisely
REFINE_BELOW = 1e-3


def trial_rng(seed, index):
    """Generator for trial ``index`` of a run seeded with ``seed``.

    The stream depends only on ``(seed, index)``, so results do not depend
    on how trials are scheduled across workers.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(index),)))


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_density(two_j, rank=None, seed=None):
    """G G^dagger / Tr(G G^dagger) for a (2J+1) x rank complex Gaussian G.

    ``rank = 2J+1`` (the default) gives the Hilbert-Schmidt ensemble and
    ``rank = 1`` Haar-random pure states.
    """
    d = check_two_j(two_j) + 1
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise ValueError(f"rank must lie in [1, {d}], got {rank}")
    rng = _as_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def sample_pure_state(two_j, seed=None):
    d = check_two_j(two_j) + 1
    rng = _as_rng(seed)
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return psi / np.linalg.norm(psi)


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 8
    max_iters: int = 2000
    step_init: float = 0.1
    tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass
class SearchResult:
    best_state: np.ndarray
    best_value: float
    coherent_fidelity: float
    iterations_used: int
    converged: bool
    restart_values: list = field(default_factory=list)


def _objective(ks, f, x):
    """Tr f(Phi~(|u><u|)) at u = v/|v| and its gradient in (Re v, Im v)."""
    d = ks.two_j + 1
    v = x[:d] + 1j * x[d:]
    nv = np.linalg.norm(v)
    u = v / nv
    b = ks.stacked
    y = b @ u                                    # (k+1, 2K+1)
    out = hermitize(y.T @ y.conj())
    lam, vecs = np.linalg.eigh(out)
    live = lam > EIG_FLOOR
    value = concave_sum(np.where(live, lam, 0.0), f)
    fprime = np.zeros_like(lam)
    fprime[live] = f.derivative(lam[live])
    fx = (vecs * fprime) @ vecs.conj().T
    g = np.einsum("jai,ab,jb->i", b, fx, y)     # sum_j B_j^T f'(X) B_j u
    grad = 2.0 / nv * (g - np.vdot(u, g).real * u)
    return value, np.concatenate([grad.real, grad.imag])


def minimize_output_concave(two_j, k, f, cfg=None):
    """Minimize Tr f(Phi^k(|psi><psi|)) over unit vectors psi.

    Multistart BFGS with the analytic gradient on the unnormalized vector.
    Pure inputs suffice because a concave objective of a linear map attains
    its minimum at an extreme point.
    """
    two_j = check_two_j(two_j)
    cfg = SearchConfig() if cfg is None else cfg
    f = as_function(f)
    if not isinstance(f, ConcaveSpec):
        raise TypeError("minimize_output_concave needs a ConcaveSpec (for its derivative)")
    if k < 1:
        raise ValueError("k must be >= 1; for k <= 0 every pure state is optimal")
    ks = kraus_set(two_j, k)
    d = two_j + 1
    best = None
    values = []
    iters = 0
    converged = False
    for r in range(cfg.restarts):
        rng = trial_rng(cfg.seed, r)
        x0 = cfg.step_init * 10 * rng.standard_normal(2 * d)
        res = optimize.minimize(lambda x: _objective(ks, f, x), x0, jac=True, method="BFGS",
                                options={"gtol": cfg.tol, "maxiter": cfg.max_iters})
        iters += int(res.nit)
        values.append(float(res.fun))
        if best is None or res.fun < best.fun:
            best = res
            converged = bool(res.success) or np.linalg.norm(res.jac) < 1e3 * cfg.tol
    v = best.x[:d] + 1j * best.x[d:]
    phi = v / np.linalg.norm(v)
    # the search ran on Phi~(rho) = Phi(U rho U^-1); map back to an input of Phi
    psi = antiunitary_U(two_j, phi)
    return SearchResult(psi, float(best.fun), coherent_fidelity(psi), iters, converged, values)


def coherent_fidelity(psi, grid=None):
    """max over the sphere of |<omega|psi>|^2.

    Coarse (theta, phi) grid search followed by Nelder-Mead refinement of
    the best few grid points.
    """
    psi = check_state(psi)
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-10:
        raise ValueError("coherent_fidelity expects a normalized state")
    two_j = psi.shape[0] - 1
    if two_j == 0:
        return 1.0
    n = grid or max(16, 4 * two_j)
    th = (np.arange(n) + 0.5) * np.pi / n
    ph = np.arange(2 * n) * np.pi / n
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    kets = coherent_kets(two_j, tt.ravel(), pp.ravel())
    vals = np.abs(kets.conj() @ psi) ** 2

    def neg(x):
        ket = coherent_kets(two_j, np.array([x[0]]), np.array([x[1]]))[0]
        return -abs(np.vdot(ket, psi)) ** 2

    best = float(vals.max())
    for idx in np.argsort(vals)[::-1][:3]:
        res = optimize.minimize(neg, [tt.ravel()[idx], pp.ravel()[idx]], method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
        best = max(best, -float(res.fun))
    return min(1.0, best)


@dataclass
class ScanReport:
    """Minimum slack of every check over all sampled inputs.

    ``violations`` lists offending samples with enough data to reproduce
    them: trial index, ensemble, input matrix, spectra and slack.
    """

    two_j: int
    k: int
    trials: int
    seed: int
    functions: tuple
    min_slack: dict
    violations: list
    argmin: dict = field(default_factory=dict)

    @property
    def passed(self):
        return not self.violations

    def to_dict(self):
        return {
            "two_j": self.two_j, "k": self.k, "trials": self.trials, "seed": self.seed,
            "functions": [str(f) for f in self.functions],
            "min_slack": dict(self.min_slack),
            "argmin": dict(self.argmin),
            "violations": self.violations,
        }


def _sample_batch(two_j, indices, seed):
    d = two_j + 1
    mixed, pure = [], []
    for t in indices:
        rng = trial_rng(seed, t)
        mixed.append(sample_density(two_j, d, rng))
        pure.append(sample_density(two_j, 1, rng))
    return np.array(mixed), np.array(pure)


def _scan_chunk(two_j, k, fs, indices, seed, ks, coh, quad, quad_kets, classical_targets):
    mixed, pure = _sample_batch(two_j, indices, seed)
    out = {}
    for ensemble, rhos in (("hilbert_schmidt", mixed), ("pure", pure)):
        outputs = apply_channel(ks, conjugate_by_U(rhos))     # Phi^k for k >= 1
        spec = np.linalg.eigvalsh(hermitize(outputs))[:, ::-1]
        spec = np.where(spec < EIG_FLOOR, 0.0, spec)
        spec /= spec.sum(axis=1, keepdims=True)
        n = coh.shape[0]
        slack = {
            "majorization": np.min(np.cumsum(coh)[:-1] - np.cumsum(spec[:, :n], axis=1)[:, :-1], axis=1)
            if n > 1 else np.zeros(len(spec)),
            "norm_bound": coh[0] - spec[:, 0],
        }
        cor = np.full(len(spec), np.inf)
        for f in fs:
            cor = np.minimum(cor, f(spec).sum(axis=1) - f(coh).sum())
        slack["concave_trace"] = cor
        if quad is not None:
            sym = lower_symbols(rhos, quad_kets)
            avgs = np.array([(two_j + 1) / (4 * np.pi) * (f(sym) @ quad.weights) for f in fs])
            in_spec = np.linalg.eigvalsh(hermitize(rhos))
            in_spec = np.where(in_spec < EIG_FLOOR, 0.0, in_spec)
            tr_f = np.array([f(in_spec).sum(axis=1) for f in fs])
            targets = np.array(classical_targets)[:, None]
            # near-tight samples are redone with the singularity-aware integrator
            close = np.min(np.minimum(avgs - tr_f, avgs - targets), axis=0) < REFINE_BELOW
            for i in np.nonzero(close)[0]:
                avgs[:, i] = meridian_averages(rhos[i], fs, max(quad.level, 8))
            slack["berezin_lieb"] = np.min(avgs - tr_f, axis=0)
            slack["classical"] = np.min(avgs - targets, axis=0)
        out[ensemble] = (rhos, spec, slack)
    return indices, out


def conjecture_scan(two_j, k, fs=None, trials=1000, seed=0, quad=None, n_jobs=1, chunk=250,
                    max_violations=5):
    """Randomized check that coherent inputs give the most ordered output spectrum.

    Each trial draws one Hilbert-Schmidt and one Haar-pure input. Checked:
    coherent spectrum majorizes the output spectrum, the operator-norm bound
    and the concave trace inequality for every f. When ``quad`` is given the
    classical average is also compared with Tr f(rho) and with its coherent
    value. Classical averages come from ``quad``; any sample within
    ``REFINE_BELOW`` of failing either check is recomputed with
    :func:`meridian_average`.
    """
    two_j = check_two_j(two_j)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if k < 1:
        raise ValueError("conjecture_scan needs k >= 1")
    fs = STANDARD_FAMILY if fs is None else tuple(as_function(f) for f in fs)
    ks = kraus_set(two_j, k)
    coh = coherent_output_spectrum(two_j, k).eigenvalues
    quad_kets = quad.kets(two_j) if quad is not None else None
    targets = [coherent_classical_average(two_j, f) for f in fs] if quad is not None else None
    chunks = [range(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]

    def run(idx):
        return _scan_chunk(two_j, k, fs, idx, seed, ks, coh, quad, quad_kets, targets)

    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(c) for c in chunks]

    min_slack, argmin, violations = {}, {}, []
    for indices, per_ensemble in results:
        for ensemble, (rhos, spec, slack) in per_ensemble.items():
            for name, vals in slack.items():
                i = int(np.argmin(vals))
                if name not in min_slack or vals[i] < min_slack[name]:
                    min_slack[name] = float(vals[i])
                    argmin[name] = {"trial": int(indices[i]), "ensemble": ensemble}
                bad = np.nonzero(vals < -SCAN_TOLERANCES[name])[0]
                for b in bad[: max(0, max_violations - len(violations))]:
                    violations.append({
                        "check": name, "trial": int(indices[b]), "ensemble": ensemble,
                        "slack": float(vals[b]),
                        "rho_real": rhos[b].real.tolist(), "rho_imag": rhos[b].imag.tolist(),
                        "output_spectrum": spec[b].tolist(), "coherent_spectrum": coh.tolist(),
                    })
    return ScanReport(two_j, k, trials, seed, fs, min_slack, violations, argmin)
