"""Drivers for the simulation studies: method comparison, smoothing-parameter
sweep, restart success, confidence-interval coverage, and the three-plane fit.

Each driver returns plain dict/list structures so the CLI can dump them to
CSV/JSON and tests can assert on them directly.
"""
from __future__ import annotations

import itertools
import time

import numpy as np

from .inference import confidence_intervals, line_parameters, plugin_covariance
from .model import convex_model, param_distance
from .objective import Dataset
from .optimizer import FitConfig, fit, fit_pool, _default_rng
from .simulate import Scenario, generate, preset

__all__ = [
    "compare_methods",
    "mu_sweep",
    "restart_ecdf",
    "coverage_study",
    "three_planes",
    "THREE_PLANE_MODEL",
]

# Fixed three-plane convex model in two dimensions; every piece attains the
# max on part of the [-1, 1]^2 box.
THREE_PLANE_MODEL = convex_model(
    np.array([[1.0, 0.2, 0.0], [-0.8, 0.5, 0.1], [0.1, -1.0, 0.05]])
)


def _rep_seed(seed: int, rep: int) -> int:
    return int(seed) * 1_000_003 + rep


def compare_methods(
    preset_name: str,
    reps: int = 100,
    mu: float = 0.1,
    pool: int = 10,
    seed: int = 0,
    prox: str = "sqerr",
) -> list[dict]:
    """Mean empirical norm and wall time of the smoothed fit vs Nelder-Mead
    on freshly generated datasets from a preset."""
    base = preset(preset_name, seed=seed)
    k1 = base.model.k1
    k2 = 0
    stats = {"smoothed": ([], []), "nelder-mead": ([], [])}
    for rep in range(reps):
        rep_seed = _rep_seed(seed, rep)
        data = generate(
            Scenario(base.model, n=base.n, noise_sd=base.noise_sd, box=base.box, seed=rep_seed)
        )
        cfg = FitConfig(mu_target=mu, restarts_pool=pool, seed=rep_seed)
        for method in ("smoothed", "nelder-mead"):
            t0 = time.perf_counter()
            res = fit_pool(data, k1, k2, prox, cfg, method="anneal" if method == "smoothed" else method)
            elapsed = time.perf_counter() - t0
            stats[method][0].append(res.empirical_norm)
            stats[method][1].append(elapsed)
    return [
        {
            "method": method,
            "R_mean": float(np.mean(Rs)),
            "time_mean_s": float(np.mean(ts)),
            "reps": reps,
        }
        for method, (Rs, ts) in stats.items()
    ]


def mu_sweep(
    reps: int = 10,
    pool: int = 5,
    n: int = 1000,
    seed: int = 0,
    exponents: tuple[float, ...] = tuple(round(0.1 * i, 1) for i in range(1, 11)),
    prox: str = "sqerr",
) -> list[dict]:
    """Mean parameter deviation and fit time as ``mu = n^-e`` shrinks.

    Each replication reuses one dataset across all exponents so the trend
    reflects the smoothing level, not sampling noise.
    """
    truth = preset("mu-study").model
    deviations = {e: [] for e in exponents}
    times = {e: [] for e in exponents}
    for rep in range(reps):
        rep_seed = _rep_seed(seed, rep)
        data = generate(Scenario(truth, n=n, noise_sd=0.1, seed=rep_seed))
        for e in exponents:
            cfg = FitConfig(mu_target=float(n) ** (-e), restarts_pool=pool, seed=rep_seed)
            t0 = time.perf_counter()
            res = fit_pool(data, truth.k1, 0, prox, cfg)
            times[e].append(time.perf_counter() - t0)
            deviations[e].append(param_distance(res.model, truth))
    return [
        {
            "e": e,
            "mu": float(n) ** (-e),
            "deviation_mean": float(np.mean(deviations[e])),
            "time_mean_s": float(np.mean(times[e])),
            "reps": reps,
        }
        for e in exponents
    ]


def restart_ecdf(
    n_fits: int = 200,
    seed: int = 0,
    mu: float = 0.1,
    threshold: float = 0.1,
    prox: str = "sqerr",
) -> dict:
    """Deviation of single fits (no pooling) on the broken-stick scenario."""
    truth = preset("broken-stick-200").model
    deviations = []
    for i in range(n_fits):
        rep_seed = _rep_seed(seed, i)
        data = generate(Scenario(truth, n=200, noise_sd=0.1, seed=rep_seed))
        cfg = FitConfig(mu_target=mu, restarts_pool=1, seed=rep_seed)
        res = fit(data, truth.k1, 0, prox, cfg)
        deviations.append(param_distance(res.model, truth))
    deviations = np.asarray(deviations)
    return {
        "deviations": deviations.tolist(),
        "threshold": threshold,
        "success_fraction": float(np.mean(deviations < threshold)),
        "n_fits": n_fits,
    }


def _match_to_truth(est_theta: np.ndarray, true_theta: np.ndarray, block: int) -> np.ndarray:
    """Permutation of estimated line blocks best matching the truth."""
    k = est_theta.size // block
    blocks = est_theta.reshape(k, block)
    best_perm = min(
        itertools.permutations(range(k)),
        key=lambda perm: float(
            np.linalg.norm(blocks[list(perm)].ravel() - true_theta)
        ),
    )
    return np.array(best_perm)


def coverage_study(
    reps: int = 200,
    n: int = 200,
    mu: float = 0.01,
    pool: int = 10,
    level: float = 0.95,
    seed: int = 0,
    prox: str = "sqerr",
) -> dict:
    """Coverage probabilities and mean lengths of the plug-in confidence
    intervals for the two-line model."""
    truth = preset("broken-stick-200").model
    true_theta = line_parameters(truth)
    p = true_theta.size
    block = p // 2
    covered = np.zeros((reps, p), dtype=bool)
    simultaneous = np.zeros(reps, dtype=bool)
    lengths = np.full((reps, p), np.nan)
    failures = 0
    for rep in range(reps):
        rep_seed = _rep_seed(seed, rep)
        data = generate(Scenario(truth, n=n, noise_sd=0.1, seed=rep_seed))
        cfg = FitConfig(mu_target=mu, restarts_pool=pool, seed=rep_seed)
        res = fit_pool(data, 2, 0, prox, cfg)
        try:
            cov = plugin_covariance(res.model, data)
            ci = confidence_intervals(res, cov, level=level)
        except ValueError:
            failures += 1
            continue
        est_theta = line_parameters(res.model)
        perm = _match_to_truth(est_theta, true_theta, block)
        idx = np.concatenate([np.arange(block) + j * block for j in perm])
        lower, upper = ci.lower[idx], ci.upper[idx]
        covered[rep] = (lower <= true_theta) & (true_theta <= upper)
        simultaneous[rep] = covered[rep].all()
        lengths[rep] = upper - lower
    return {
        "parameters": ["a1", "b1", "a2", "b2"] if block == 2 else [f"p{i}" for i in range(p)],
        "coverage": np.mean(covered, axis=0).tolist(),
        "simultaneous_coverage": float(np.mean(simultaneous)),
        "length_mean": np.nanmean(lengths, axis=0).tolist(),
        "reps": reps,
        "failures": failures,
        "level": level,
    }


def three_planes(
    n: int = 1000,
    mu: float = 0.1,
    pool: int = 10,
    seed: int = 0,
    prox: str = "sqerr",
) -> dict:
    """Fit a three-piece convex model to data from the fixed three-plane PWA."""
    truth = THREE_PLANE_MODEL
    data = generate(Scenario(truth, n=n, noise_sd=0.1, seed=_rep_seed(seed, 0)))
    cfg = FitConfig(mu_target=mu, restarts_pool=pool, seed=seed)
    res = fit_pool(data, 3, 0, prox, cfg)
    return {
        "empirical_norm": res.empirical_norm,
        "deviation": param_distance(res.model, truth),
        "converged": res.converged,
        "n": n,
    }
