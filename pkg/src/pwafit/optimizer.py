"""Annealed quasi-Newton fitting of piecewise-affine regression models.

The target smoothing level ``mu`` is reached by halving from an initial
value above one; each stage's BFGS run is warm-started from the previous
optimum.  Non-convergence or numerical trouble restarts the whole
schedule from a fresh random initial point.  A gradient-free Nelder-Mead
baseline on the unsmoothed criterion is provided for comparisons.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .model import PwaModel, pack, unpack
from .objective import Dataset, empirical_norm, least_squares, least_squares_gradient
from .smoothing import Prox, SmoothingSpec

__all__ = [
    "FitConfig",
    "FitResult",
    "anneal_schedule",
    "fit",
    "fit_pool",
    "nelder_mead_fit",
]

_BOX_LIMIT = 1e4  # parameters beyond this magnitude count as a numerical runaway


@dataclass(frozen=True)
class FitConfig:
    mu_target: float = 0.1
    tolerance: float = 1e-5
    init_radius: float = 1.0
    max_newton_steps: int = 200
    max_restarts: int = 50
    restarts_pool: int = 10
    seed: int = 0
    dof_correction: bool = False  # forwarded by callers that estimate sigma^2

    def __post_init__(self) -> None:
        if self.mu_target <= 0 or self.tolerance <= 0 or self.init_radius <= 0:
            raise ValueError("mu_target, tolerance and init_radius must be positive")
        if self.max_newton_steps < 1 or self.max_restarts < 0 or self.restarts_pool < 1:
            raise ValueError("invalid iteration/restart configuration")


@dataclass
class FitResult:
    theta_hat: np.ndarray
    model: PwaModel
    objective_value: float
    empirical_norm: float
    anneal_trace: list[tuple[float, float, int]] = field(default_factory=list)
    restarts_used: int = 0
    converged: bool = True


def anneal_schedule(mu: float) -> list[float]:
    """Stage values ``2^(m0-m) * mu`` for ``m = 0..m0``, ending at ``mu``.

    ``m0`` is the smallest integer with ``2^m0 * mu > 1``.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    m0 = 0
    while (2.0**m0) * mu <= 1.0:
        m0 += 1
    return [(2.0 ** (m0 - m)) * mu for m in range(m0 + 1)]


def _bfgs(fun_grad, x0, tol, max_steps):
    """Minimize with a self-contained BFGS (inverse-Hessian update, Armijo
    backtracking).

    Returns ``(x, f, status, steps, history)`` with status one of
    ``"converged"``, ``"maxiter"``, ``"instability"``.  ``history`` is the
    sequence of accepted objective values (non-increasing).
    """
    x = np.array(x0, dtype=float)
    f, g = fun_grad(x)
    history = [f]
    if not (np.isfinite(f) and np.all(np.isfinite(g))):
        return x, f, "instability", 0, history
    n = x.size
    H = np.eye(n)
    eye = np.eye(n)
    for step in range(1, max_steps + 1):
        if np.max(np.abs(g)) < tol:
            return x, f, "converged", step - 1, history
        p = -H @ g
        gp = float(g @ p)
        if not np.isfinite(gp) or gp >= 0.0:
            H = np.eye(n)
            p = -g
            gp = -float(g @ g)
        t = 1.0
        accepted = False
        for _ in range(60):
            xn = x + t * p
            fn, gn = fun_grad(xn)
            if np.isfinite(fn) and fn <= f + 1e-4 * t * gp:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            # no descent possible along p; a near-zero gradient means we are done
            if np.max(np.abs(g)) < math.sqrt(tol):
                return x, f, "converged", step, history
            return x, f, "instability", step, history
        if np.max(np.abs(xn)) > _BOX_LIMIT or not np.all(np.isfinite(gn)):
            return xn, fn, "instability", step, history
        s = t * p
        y = gn - g
        sy = float(s @ y)
        if sy > 1e-12 * (np.linalg.norm(s) * np.linalg.norm(y) + 1e-300):
            rho = 1.0 / sy
            Hy = H @ y
            # BFGS inverse update: H <- (I - rho s y')H(I - rho y s') + rho s s'
            H = H - rho * (np.outer(s, Hy) + np.outer(Hy, s)) + rho * (
                rho * float(y @ Hy) + 1.0
            ) * np.outer(s, s)
        history.append(fn)
        if max(np.max(np.abs(gn)), np.max(np.abs(s))) < tol:
            return xn, fn, "converged", step, history
        x, f, g = xn, fn, gn
    return x, f, "maxiter", max_steps, history


def _default_rng(seed: int, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=(int(seed), int(index))))


class _Problem:
    """Maps between the optimizer vector and the model.

    For ``k2 = 0`` the trivial zero part is pinned and only part1's
    coefficients are optimized.
    """

    def __init__(self, data: Dataset, k1: int, k2: int, prox: Prox):
        if k1 < 1 or k2 < 0:
            raise ValueError("k1 must be >= 1 and k2 >= 0")
        self.data = data
        self.k1 = k1
        self.k2_eff = max(k2, 1)
        self.pin_part2 = k2 == 0
        self.prox = Prox(prox)
        d = data.d
        self.n_full = (k1 + self.k2_eff) * (d + 1)
        self.n_free = k1 * (d + 1) if self.pin_part2 else self.n_full

    def to_model(self, v_free: np.ndarray) -> PwaModel:
        if self.pin_part2:
            full = np.concatenate([v_free, np.zeros(self.d_plus_1)])
        else:
            full = v_free
        return unpack(full, self.k1, self.k2_eff, self.data.d)

    @property
    def d_plus_1(self) -> int:
        return self.data.d + 1

    def fun_grad(self, mu: float):
        spec = SmoothingSpec(self.prox, mu)
        data = self.data

        def fg(v):
            model = self.to_model(v)
            val = least_squares(model, spec, data)
            grad = least_squares_gradient(model, spec, data)
            if self.pin_part2:
                grad = grad[: self.n_free]
            return val, grad

        return fg


def _make_result(problem: _Problem, v_free, trace, restarts, converged, mu_target) -> FitResult:
    model = problem.to_model(np.asarray(v_free, dtype=float)).normalize()
    spec = SmoothingSpec(problem.prox, mu_target)
    return FitResult(
        theta_hat=pack(model),
        model=model,
        objective_value=least_squares(model, spec, problem.data),
        empirical_norm=empirical_norm(model, problem.data),
        anneal_trace=list(trace),
        restarts_used=restarts,
        converged=converged,
    )


def fit(
    data: Dataset,
    k1: int,
    k2: int,
    prox: Prox | str,
    config: FitConfig,
    rng: np.random.Generator | None = None,
) -> FitResult:
    """Annealed quasi-Newton least-squares fit.

    On non-convergence or numerical failure the whole annealing schedule
    restarts from a fresh random point, up to ``config.max_restarts``
    times; if all attempts fail the best incumbent is returned with
    ``converged=False``.
    """
    problem = _Problem(data, k1, k2, Prox(prox))
    if rng is None:
        rng = _default_rng(config.seed)
    stages = anneal_schedule(config.mu_target)
    r = config.init_radius
    best: FitResult | None = None
    for attempt in range(config.max_restarts + 1):
        v = rng.uniform(-r, r, problem.n_free)
        trace: list[tuple[float, float, int]] = []
        failed = False
        for mu_m in stages:
            v_new, f_new, status, steps, _ = _bfgs(
                problem.fun_grad(mu_m), v, config.tolerance, config.max_newton_steps
            )
            if status != "converged":
                failed = True
                v = v_new if np.all(np.isfinite(v_new)) else v
                break
            v = v_new
            trace.append((mu_m, f_new, steps))
        if not failed:
            return _make_result(problem, v, trace, attempt, True, config.mu_target)
        if np.all(np.isfinite(v)) and np.max(np.abs(v)) <= _BOX_LIMIT:
            candidate = _make_result(problem, v, trace, attempt, False, config.mu_target)
            if best is None or candidate.empirical_norm < best.empirical_norm:
                best = candidate
    if best is None:
        zero = np.zeros(problem.n_free)
        best = _make_result(problem, zero, [], config.max_restarts, False, config.mu_target)
    best.restarts_used = config.max_restarts
    return best


def fit_pool(
    data: Dataset,
    k1: int,
    k2: int,
    prox: Prox | str,
    config: FitConfig,
    method: str = "anneal",
) -> FitResult:
    """Best-of-pool fit: run ``restarts_pool`` independent fits and keep the
    one with the smallest empirical norm.

    Pool members use seeds derived from ``config.seed``; a pool of one is
    identical to a single :func:`fit`.
    """
    results = []
    for i in range(config.restarts_pool):
        rng = _default_rng(config.seed, i)
        if method == "anneal":
            results.append(fit(data, k1, k2, prox, config, rng=rng))
        elif method == "nelder-mead":
            results.append(nelder_mead_fit(data, k1, k2, config, rng=rng))
        else:
            raise ValueError(f"unknown method {method!r}")
    converged = [res for res in results if res.converged]
    candidates = converged if converged else results
    return min(candidates, key=lambda res: res.empirical_norm)


def nelder_mead_fit(
    data: Dataset,
    k1: int,
    k2: int,
    config: FitConfig,
    rng: np.random.Generator | None = None,
) -> FitResult:
    """Gradient-free baseline: Nelder-Mead on the unsmoothed criterion."""
    problem = _Problem(data, k1, k2, Prox.SQUARED_ERROR)
    if rng is None:
        rng = _default_rng(config.seed)
    r = config.init_radius
    x0 = rng.uniform(-r, r, problem.n_free)
    simplex = np.vstack([x0, x0 + 0.1 * r * np.eye(problem.n_free)])

    def fun(v):
        return least_squares(problem.to_model(v), None, data)

    res = minimize(
        fun,
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "maxiter": 400 * problem.n_free,
            "maxfev": 400 * problem.n_free,
            "xatol": config.tolerance,
            "fatol": config.tolerance**2,
        },
    )
    result = _make_result(problem, res.x, [], 0, bool(res.success), config.mu_target)
    result.objective_value = result.empirical_norm
    return result
