"""scikit-learn style wrappers.

Only two pieces of the library have a natural fit/transform shape: a
channel (fit builds the Kraus operators, transform maps density matrices)
and the output-entropy search (fit runs the optimizer). Everything else is
a plain function.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_density_batch, check_two_j
from .channel import apply_channel, coherent_output_spectrum, kraus_set
from .concave import ConcaveSpec, as_function
from .majorization import concave_sum
from .optimizer import SearchConfig, minimize_output_concave
from .spin import conjugate_by_U


class CoherentChannel(TransformerMixin, BaseEstimator):
    """The channel from spin ``two_j / 2`` to spin ``(two_j + k) / 2``.

    ``transform`` takes one density matrix or a stack ``(n, d, d)`` and
    returns outputs of the same rank. With ``tilde=True`` the bare Kraus
    map (no U conjugation) is applied.
    """

    def __init__(self, two_j=1, k=1, tilde=False):
        self.two_j = two_j
        self.k = k
        self.tilde = tilde

    def fit(self, X=None, y=None):
        two_j = check_two_j(self.two_j)
        if two_j + self.k < 0:
            raise ValueError(f"k={self.k} would give a negative output spin for two_j={two_j}")
        self.kraus_ = kraus_set(two_j, int(self.k))
        self.two_k_ = self.kraus_.two_k
        self.n_features_in_ = two_j + 1
        return self

    def transform(self, X):
        check_is_fitted(self, "kraus_")
        X = np.asarray(X, dtype=complex)
        single = X.ndim == 2
        rhos = check_density_batch(X[np.newaxis] if single else X, self.n_features_in_)
        if self.tilde:
            out = apply_channel(self.kraus_, rhos)
        elif self.k >= 0:
            out = apply_channel(self.kraus_, conjugate_by_U(rhos))
        else:
            out = conjugate_by_U(apply_channel(self.kraus_, rhos))
        return out[0] if single else out

    def coherent_spectrum(self):
        """Output spectrum of a coherent input (k >= 0)."""
        check_is_fitted(self, "kraus_")
        return coherent_output_spectrum(self.two_j, self.k).eigenvalues


class MinimalOutputEntropySearch(BaseEstimator):
    """Multistart search for the input minimizing Tr f(Phi^k(|psi><psi|)).

    ``fit`` ignores its arguments. Fitted attributes: ``best_state_``,
    ``best_value_``, ``coherent_value_`` (the value on a coherent input),
    ``gap_`` (their difference), ``coherent_fidelity_``, ``converged_`` and
    ``n_iter_``.
    """

    def __init__(self, two_j=1, k=1, f="xlogx", restarts=8, max_iters=2000, tol=1e-10, seed=0):
        self.two_j = two_j
        self.k = k
        self.f = f
        self.restarts = restarts
        self.max_iters = max_iters
        self.tol = tol
        self.seed = seed

    def fit(self, X=None, y=None):
        f = as_function(self.f)
        if not isinstance(f, ConcaveSpec):
            raise TypeError("f must be a tag or ConcaveSpec")
        cfg = SearchConfig(restarts=self.restarts, max_iters=self.max_iters, tol=self.tol,
                           seed=self.seed)
        res = minimize_output_concave(self.two_j, self.k, f, cfg)
        self.best_state_ = res.best_state
        self.best_value_ = res.best_value
        self.coherent_value_ = concave_sum(coherent_output_spectrum(self.two_j, self.k).eigenvalues, f)
        self.gap_ = self.best_value_ - self.coherent_value_
        self.coherent_fidelity_ = res.coherent_fidelity
        self.converged_ = res.converged
        self.n_iter_ = res.iterations_used
        return self
