"""BFGS with a strong-Wolfe line search, and seeded multistart ensembles."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import Empty, NonFiniteValue
from .hamiltonian import DiagonalHamiltonian
from .simulator import AnsatzCircuit, energy_at, value_and_gradient


@dataclass(frozen=True)
class BFGSConfig:
    grad_tol: float = 1e-5
    max_iters: int = 1000
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    max_line_search_steps: int = 40

    def __post_init__(self):
        if not 0 < self.wolfe_c1 < self.wolfe_c2 < 1:
            raise ValueError("need 0 < c1 < c2 < 1")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iters < 0 or self.max_line_search_steps < 1:
            raise ValueError("iteration limits must be positive")


@dataclass
class RunRecord:
    final_energy: float
    final_params: np.ndarray
    gradient_evals: int
    converged: bool
    seed: int = 0
    iterations: int = 0
    initial_energy: float = math.nan
    message: str = ""


@dataclass
class EnsembleStats:
    mean: float
    q05: float
    q95: float
    records: list = field(default_factory=list)

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.final_energy for r in self.records])

    @property
    def mean_grad_evals(self) -> float:
        return float(np.mean([r.gradient_evals for r in self.records]))

    @classmethod
    def from_records(cls, records: Sequence[RunRecord]) -> "EnsembleStats":
        records = sorted(records, key=lambda r: r.seed)
        e = [r.final_energy for r in records]
        return cls(float(np.mean(e)), quantile(e, 0.05), quantile(e, 0.95), list(records))


def quantile(values, q: float) -> float:
    """Linear interpolation at position (n - 1) * q of the sorted values."""
    xs = sorted(float(v) for v in values)
    if not xs:
        raise Empty("quantile of no values")
    if not 0 <= q <= 1:
        raise ValueError("q must lie in [0, 1]")
    pos = (len(xs) - 1) * q
    lo = math.floor(pos)
    hi = min(lo + 1, len(xs) - 1)
    return xs[lo] + (pos - lo) * (xs[hi] - xs[lo])


class _Counted:
    def __init__(self, fun, grad):
        self.fun, self.grad = fun, grad
        self.grad_calls = 0

    def f(self, x):
        v = float(self.fun(x))
        if not math.isfinite(v):
            raise NonFiniteValue(f"objective returned {v}")
        return v

    def g(self, x):
        self.grad_calls += 1
        g = np.asarray(self.grad(x), dtype=np.float64)
        if not np.all(np.isfinite(g)):
            raise NonFiniteValue("gradient returned a non-finite entry")
        return g


def _quadratic_min(lo, flo, glo, hi, fhi):
    """Minimiser of the parabola matching f(lo), f'(lo) and f(hi), or None."""
    d = hi - lo
    curv = fhi - flo - glo * d
    if curv <= 0:
        return None
    return lo - glo * d * d / (2 * curv)


def _line_search(ev: _Counted, x, fx, gx, p, alpha0, cfg: BFGSConfig):
    """Strong-Wolfe search; returns (alpha, f, g) or None on failure."""
    c1, c2 = cfg.wolfe_c1, cfg.wolfe_c2
    d0 = float(gx @ p)
    budget = cfg.max_line_search_steps

    def probe(a):
        xa = x + a * p
        fa = ev.f(xa)
        return xa, fa

    def zoom(lo, flo, glo, hi, fhi, steps):
        while steps < budget:
            steps += 1
            a = _quadratic_min(lo, flo, glo, hi, fhi)
            span = abs(hi - lo)
            # safeguard: stay well inside the bracket, else bisect
            if a is None or not (min(lo, hi) + 0.1 * span <= a <= max(lo, hi) - 0.1 * span):
                a = 0.5 * (lo + hi)
            xa, fa = probe(a)
            if fa > fx + c1 * a * d0 or fa >= flo:
                hi, fhi = a, fa
                continue
            ga_vec = ev.g(xa)
            ga = float(ga_vec @ p)
            if abs(ga) <= -c2 * d0:
                return a, fa, ga_vec
            if ga * (hi - lo) >= 0:
                hi, fhi = lo, flo
            lo, flo, glo = a, fa, ga
        return None

    a_prev, f_prev, g_prev = 0.0, fx, d0
    a = alpha0
    for step in range(1, budget + 1):
        xa, fa = probe(a)
        if fa > fx + c1 * a * d0 or (step > 1 and fa >= f_prev):
            return zoom(a_prev, f_prev, g_prev, a, fa, step)
        ga_vec = ev.g(xa)
        ga = float(ga_vec @ p)
        if abs(ga) <= -c2 * d0:
            return a, fa, ga_vec
        if ga >= 0:
            return zoom(a, fa, ga, a_prev, f_prev, step)
        a_prev, f_prev, g_prev = a, fa, ga
        a *= 2.0
    return None


def minimize(objective: Callable, gradient: Callable, theta0, config: BFGSConfig = BFGSConfig(),
             seed: int = 0) -> RunRecord:
    """BFGS on the inverse Hessian; every gradient call is counted."""
    ev = _Counted(objective, gradient)
    x = np.array(theta0, dtype=np.float64).reshape(-1)
    fx = ev.f(x)
    f0 = fx
    gx = ev.g(x)
    n = x.size
    Hinv = np.eye(n)
    first = True
    it = 0
    converged = bool(np.max(np.abs(gx), initial=0.0) < config.grad_tol)
    message = "gradient tolerance" if converged else ""
    while not converged and it < config.max_iters:
        p = -Hinv @ gx
        if not float(gx @ p) < 0:
            Hinv = np.eye(n)
            p = -gx
        alpha0 = min(1.0, 1.0 / max(np.max(np.abs(gx)), 1e-300)) if first else 1.0
        found = _line_search(ev, x, fx, gx, p, alpha0, config)
        if found is None:
            message = "line search failed"
            break
        alpha, f_new, g_new = found
        s = alpha * p
        y = g_new - gx
        x, fx, gx = x + s, f_new, g_new
        it += 1
        sy = float(s @ y)
        if sy > 1e-12:
            if first:
                Hinv = np.eye(n) * (sy / float(y @ y))
            rho = 1.0 / sy
            Hy = Hinv @ y
            Hinv = (Hinv - rho * (np.outer(s, Hy) + np.outer(Hy, s))
                    + (rho * rho * float(y @ Hy) + rho) * np.outer(s, s))
            first = False
        if np.max(np.abs(gx)) < config.grad_tol:
            converged = True
            message = "gradient tolerance"
    if not message:
        message = "iteration limit"
    return RunRecord(fx, x, ev.grad_calls, converged, seed, it, f0, message)


class CircuitObjective:
    """Energy and gradient callbacks for one (circuit, H) pair.

    The gradient call also caches the energy at the same point, so a line
    search that asks for f and then g does not repeat the forward pass twice.
    """

    def __init__(self, circuit: AnsatzCircuit, H: DiagonalHamiltonian, method: str = "auto"):
        self.circuit, self.H, self.method = circuit, H, method
        self._key = None
        self._val = None

    def value(self, theta) -> float:
        key = np.asarray(theta, dtype=np.float64).tobytes()
        if key == self._key:
            return self._val
        return energy_at(self.circuit, theta, self.H)

    def gradient(self, theta) -> np.ndarray:
        v, g = value_and_gradient(self.circuit, theta, self.H, self.method)
        self._key, self._val = np.asarray(theta, dtype=np.float64).tobytes(), v
        return g


def initial_params(base_seed: int, index: int, size: int) -> np.ndarray:
    """Uniform [0, 2 pi) draws from a Philox stream keyed by (base_seed, index)."""
    ss = np.random.SeedSequence([int(base_seed), int(index)])
    rng = np.random.Generator(np.random.Philox(ss))
    return rng.uniform(0.0, 2 * np.pi, size)


_WORKER: dict = {}


def _init_worker(circuit, H, base_seed, config, method):
    _WORKER.update(circuit=circuit, H=H, base_seed=base_seed, config=config, method=method)


def _run_one(index: int) -> RunRecord:
    w = _WORKER
    obj = CircuitObjective(w["circuit"], w["H"], w["method"])
    theta0 = initial_params(w["base_seed"], index, w["circuit"].param_count)
    return minimize(obj.value, obj.gradient, theta0, w["config"], seed=index)


def multistart(circuit: AnsatzCircuit, H: DiagonalHamiltonian, restarts: int, base_seed: int = 0,
               config: BFGSConfig = BFGSConfig(), jobs: int = 1, method: str = "auto") -> EnsembleStats:
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    init = (circuit, H, base_seed, config, method)
    if jobs > 1 and restarts > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=init) as pool:
            records = list(pool.map(_run_one, range(restarts), chunksize=max(1, restarts // (4 * jobs))))
    else:
        _init_worker(*init)
        records = [_run_one(i) for i in range(restarts)]
    return EnsembleStats.from_records(records)


def with_overrides(config: BFGSConfig, **kw) -> BFGSConfig:
    return replace(config, **{k: v for k, v in kw.items() if v is not None})
