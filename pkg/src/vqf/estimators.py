"""scikit-learn style facade over the encode -> simplify -> optimize pipeline.

Targets m play the role of samples: ``X`` is a scalar, a 1-D sequence or a
single column of odd integers.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .analysis import decode_state
from .encoding import build_clauses, build_instance
from .errors import AlreadySolved
from .hamiltonian import grad_variance, haar_mean, haar_variance, quantize, trace, trace_sq
from .optimizer import BFGSConfig, multistart
from .preprocess import reduce
from .resources import true_factors
from .simulator import CX, QAOA, T, build_cx_ansatz, build_qaoa_ansatz, build_t_ansatz, run
from .validation import check_positive_int, check_seed, check_targets, resolve_layers

FEATURES = ("n_qubits", "trace", "trace_sq", "haar_mean", "haar_variance", "grad_variance")


def _reduce_target(m: int, prior: bool, preprocess: bool):
    bits = None
    if prior:
        p, q = true_factors(m)
        bits = (p.bit_length(), q.bit_length())
    return reduce(build_clauses(build_instance(m, bits, preprocess)))


class ClauseEncoder(TransformerMixin, BaseEstimator):
    """Map targets to Hamiltonian summary features.

    Columns follow ``FEATURES``; instances solved outright by preprocessing
    have ``n_qubits = 0`` and NaN elsewhere.
    """

    def __init__(self, prior: bool = False, preprocess: bool = True):
        self.prior = prior
        self.preprocess = preprocess

    def fit(self, X, y=None):
        targets = check_targets(X)
        self.systems_ = {int(m): _reduce_target(int(m), self.prior, self.preprocess) for m in targets}
        self.n_features_in_ = 1
        return self

    def reduced_system(self, m: int):
        check_is_fitted(self, "systems_")
        return self.systems_[int(m)]

    def transform(self, X):
        check_is_fitted(self, "systems_")
        rows = []
        for m in check_targets(X):
            r = self.systems_.get(int(m)) or _reduce_target(int(m), self.prior, self.preprocess)
            if r.qubit_count == 0:
                rows.append([0.0] + [np.nan] * (len(FEATURES) - 1))
                continue
            H = quantize(r)
            rows.append([H.n, trace(H), trace_sq(H), haar_mean(H), haar_variance(H), grad_variance(H)])
        return np.array(rows, dtype=np.float64)

    def get_feature_names_out(self, input_features=None):
        return np.array(FEATURES, dtype=object)


class VQEFactorizer(BaseEstimator):
    """Multistart variational factoring of each target.

    ``fit`` runs ``restarts`` BFGS optimizations per target; ``predict``
    returns the factor pair read off the most probable basis state of the
    lowest-energy run (zeros when it does not factor m).
    """

    def __init__(self, ansatz: str = CX, layers="n", restarts: int = 10, random_state: int = 0,
                 prior: bool = False, preprocess: bool = True, grad_tol: float = 1e-5,
                 max_iter: int = 1000, n_jobs: int = 1):
        self.ansatz = ansatz
        self.layers = layers
        self.restarts = restarts
        self.random_state = random_state
        self.prior = prior
        self.preprocess = preprocess
        self.grad_tol = grad_tol
        self.max_iter = max_iter
        self.n_jobs = n_jobs

    def _circuit(self, H):
        if self.ansatz == QAOA:
            return build_qaoa_ansatz(H, max(1, resolve_layers(self.layers, H.n)))
        L = resolve_layers(self.layers, H.n)
        if self.ansatz == CX:
            return build_cx_ansatz(H.n, L)
        if self.ansatz == T:
            return build_t_ansatz(H.n, L)
        raise ValueError(f"unknown ansatz {self.ansatz!r}")

    def fit(self, X, y=None):
        targets = check_targets(X)
        restarts = check_positive_int("restarts", self.restarts)
        seed = check_seed(self.random_state)
        config = BFGSConfig(grad_tol=self.grad_tol, max_iters=self.max_iter)
        self.results_ = {}
        for m in targets:
            m = int(m)
            reduced = _reduce_target(m, self.prior, self.preprocess)
            try:
                H = quantize(reduced)
            except AlreadySolved as done:
                self.results_[m] = {"reduced": reduced, "factors": done.factors, "stats": None}
                continue
            circuit = self._circuit(H)
            stats = multistart(circuit, H, restarts, seed, config, jobs=self.n_jobs)
            best = min(stats.records, key=lambda r: (r.final_energy, r.seed))
            top = int(np.argmax(run(circuit, best.final_params).probabilities()))
            self.results_[m] = {"reduced": reduced, "hamiltonian": H, "circuit": circuit,
                                "stats": stats, "best": best, "factors": decode_state(reduced, top)}
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "results_")
        out = []
        for m in check_targets(X):
            if int(m) not in self.results_:
                raise ValueError(f"target {int(m)} was not seen during fit")
            f = self.results_[int(m)]["factors"]
            out.append(f if f is not None else (0, 0))
        return np.array(out, dtype=np.int64)

    def score(self, X, y=None):
        """Fraction of restarts that reached the zero-energy ground state."""
        check_is_fitted(self, "results_")
        fractions = []
        for m in check_targets(X):
            stats = self.results_[int(m)]["stats"]
            fractions.append(1.0 if stats is None else float(np.mean(stats.energies < 1e-6)))
        return float(np.mean(fractions))
