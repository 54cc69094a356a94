"""Plug-in covariance matrices, normal confidence intervals, and the
grid-search hinge baseline used in the coverage study.

The covariance machinery targets the two-piece convex model (two
intersecting lines/planes).  Parameters are ordered piece by piece:
``(a_1, b_1, a_2, b_2)`` with each slope block of length ``d``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .model import PwaModel
from .objective import Dataset
from .optimizer import FitResult
from .smoothing import SmoothingSpec, _batch_values_weights

__all__ = [
    "CovarianceEstimate",
    "ConfidenceIntervals",
    "Hinge1D",
    "Hinge2D",
    "line_parameters",
    "piece_assignment",
    "plugin_covariance",
    "smoothed_covariance",
    "confidence_intervals",
    "hinge_fit_1d",
    "hinge_eval_2d",
]

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class CovarianceEstimate:
    V: np.ndarray
    W: np.ndarray
    C: np.ndarray  # sandwich V^-1 W V^-1
    sigma2_hat: float
    segment_counts: np.ndarray


@dataclass(frozen=True)
class ConfidenceIntervals:
    lower: np.ndarray
    upper: np.ndarray
    level: float


def _two_piece_lines(model: PwaModel) -> np.ndarray:
    """Rows (a_j, b_j) of the two effective lines of a convex k1=2 model."""
    m = model.normalize()
    if m.k1 != 2 or m.k2 != 1:
        raise ValueError("a two-piece convex model (k1=2, trivial part2) is required")
    return m.part1.coeffs


def line_parameters(model: PwaModel) -> np.ndarray:
    """Flat parameter vector (a_1, b_1, a_2, b_2) of the two-piece model."""
    return _two_piece_lines(model).ravel()


def piece_assignment(model: PwaModel, data: Dataset) -> np.ndarray:
    """Index of the affine piece attaining the max at each point.

    Ties go to the lower-indexed piece.
    """
    m = model.normalize()
    return np.argmax(m.part1.piece_values(data.X), axis=1)


def _sigma2(model: PwaModel, data: Dataset, dof_correction: bool, p: int) -> float:
    r = data.Y - model.evaluate(data.X)
    denom = data.n - p if dof_correction else data.n
    if denom <= 0:
        raise ValueError("too few points for the requested dof correction")
    return float(np.sum(r * r) / denom)


def _block_inverse(S: np.ndarray, label: str) -> np.ndarray:
    if np.linalg.cond(S) > _COND_LIMIT:
        warnings.warn(f"singular moment block for {label}; using pseudo-inverse")
        return np.linalg.pinv(S)
    return np.linalg.inv(S)


def _assemble(moments: list[np.ndarray], sigma2: float, counts: np.ndarray) -> CovarianceEstimate:
    from scipy.linalg import block_diag

    M = block_diag(*moments)
    V = 2.0 * M
    W = 2.0 * sigma2 * V
    Cinv_blocks = [_block_inverse(S, f"piece {j + 1}") for j, S in enumerate(moments)]
    C = sigma2 * block_diag(*Cinv_blocks)
    return CovarianceEstimate(V=V, W=W, C=C, sigma2_hat=sigma2, segment_counts=counts)


def plugin_covariance(
    model: PwaModel, data: Dataset, dof_correction: bool = False
) -> CovarianceEstimate:
    """Sandwich covariance for the two-piece convex model via hard piece
    assignment.

    Empirical moment blocks are the per-piece sums of ``[x,1][x,1]'``
    scaled by ``1/n``; ``V = W / (2 sigma^2)`` and ``C = 2 sigma^2 V^-1``.
    """
    lines = _two_piece_lines(model)
    assign = piece_assignment(model, data)
    counts = np.bincount(assign, minlength=2)
    if np.any(counts == 0):
        raise ValueError("a piece has no assigned data points")
    d = data.d
    if np.any(counts < d + 1):
        warnings.warn("a piece has fewer than d+1 points; moment block is singular")
    Xaug = np.column_stack([data.X, np.ones(data.n)])
    moments = [
        Xaug[assign == j].T @ Xaug[assign == j] / data.n for j in range(lines.shape[0])
    ]
    sigma2 = _sigma2(model, data, dof_correction, lines.size)
    return _assemble(moments, sigma2, counts)


def smoothed_covariance(
    model: PwaModel, spec: SmoothingSpec, data: Dataset, dof_correction: bool = False
) -> CovarianceEstimate:
    """Covariance with per-point smoothing weights instead of hard piece
    assignment; converges entrywise to :func:`plugin_covariance` as mu -> 0.
    """
    lines = _two_piece_lines(model)
    m = model.normalize()
    _, Wts = _batch_values_weights(m.part1, spec, data.X)
    counts = np.bincount(np.argmax(Wts, axis=1), minlength=2)
    Xaug = np.column_stack([data.X, np.ones(data.n)])
    # G rows are (w_1 x, w_1, w_2 x, w_2); M = G'G/n is the weighted moment matrix
    G = np.hstack([Wts[:, j : j + 1] * Xaug for j in range(lines.shape[0])])
    M = G.T @ G / data.n
    sigma2 = _sigma2(model, data, dof_correction, lines.size)
    V = 2.0 * M
    W = 2.0 * sigma2 * V
    C = sigma2 * _block_inverse(M, "weighted moments")
    return CovarianceEstimate(V=V, W=W, C=C, sigma2_hat=sigma2, segment_counts=counts)


def confidence_intervals(
    estimate: FitResult | np.ndarray, cov: CovarianceEstimate, level: float = 0.95
) -> ConfidenceIntervals:
    """Per-parameter normal intervals ``theta_i +/- z sqrt(C_ii / N_i)``.

    ``N_i`` is the number of points assigned to the piece owning
    parameter ``i``.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    theta = (
        line_parameters(estimate.model)
        if isinstance(estimate, FitResult)
        else np.asarray(estimate, dtype=float)
    )
    p = cov.C.shape[0]
    if theta.size != p:
        raise ValueError("estimate length does not match the covariance matrix")
    block = p // len(cov.segment_counts)
    z = float(norm.ppf(0.5 + level / 2.0))
    half = np.empty(p)
    for i in range(p):
        N = int(cov.segment_counts[i // block])
        if N == 0:
            raise ValueError(f"no data points on the piece owning parameter {i}")
        half[i] = z * np.sqrt(max(cov.C[i, i], 0.0) / N)
    return ConfidenceIntervals(lower=theta - half, upper=theta + half, level=level)


# ---------------------------------------------------------------------------
# Hinge-model baseline (grid search over the change point)


@dataclass(frozen=True)
class Hinge1D:
    """Broken stick ``y = alpha1 x + alpha2 + beta1 (x - theta)^+``."""

    alpha1: float
    alpha2: float
    beta1: float
    theta: float

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return self.alpha1 * x + self.alpha2 + self.beta1 * np.maximum(x - self.theta, 0.0)


@dataclass(frozen=True)
class Hinge2D:
    """Two-plane hinge gated by the side of the projected boundary line.

    ``z = alpha1 x + alpha2 y + alpha3 + beta2 (y - f(x))^+`` where the
    boundary line passes through ``p`` and ``q``; the positive part is
    taken on the side where ``sign(det(q-p, (x,y)-p)) >= 0``.  Vertical
    boundaries (``p_x == q_x``) use the ``x - p_x`` parameterization.
    """

    alpha1: float
    alpha2: float
    alpha3: float
    beta2: float
    p: tuple[float, float]
    q: tuple[float, float]

    def __post_init__(self) -> None:
        if tuple(self.p) == tuple(self.q):
            raise ValueError("boundary points p and q must differ")

    def evaluate(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        px, py = self.p
        qx, qy = self.q
        side = (qx - px) * (y - py) - (qy - py) * (x - px)
        gate = side >= 0.0
        if px != qx:
            offset = y - ((x - px) * (qy - py) / (qx - px) + py)
        else:
            offset = x - px
        base = self.alpha1 * x + self.alpha2 * y + self.alpha3
        return base + self.beta2 * np.where(gate, offset, 0.0)


def hinge_eval_2d(model: Hinge2D, x, y):
    return model.evaluate(x, y)


def hinge_fit_1d(
    data: Dataset, grid: int, bounds: tuple[float, float] = (-1.0, 1.0)
) -> Hinge1D:
    """Grid-search hinge fit: linear least squares in (alpha1, alpha2, beta1)
    at each candidate change point on an equidistant grid.

    Candidates with a rank-deficient design (all data on one side) are
    skipped; ties are broken towards the smallest change point.
    """
    if data.d != 1:
        raise ValueError("hinge_fit_1d requires one-dimensional predictors")
    if grid < 2:
        raise ValueError("grid must have at least two points")
    xs = data.X[:, 0]
    ones = np.ones_like(xs)
    best: tuple[float, np.ndarray, float] | None = None  # (sse, coef, theta)
    for theta in np.linspace(bounds[0], bounds[1], grid):
        D = np.column_stack([xs, ones, np.maximum(xs - theta, 0.0)])
        if np.linalg.matrix_rank(D) < 3:
            continue
        coef, *_ = np.linalg.lstsq(D, data.Y, rcond=None)
        r = data.Y - D @ coef
        sse = float(r @ r)
        if best is None or sse < best[0] - 1e-12 * (1.0 + best[0]):
            best = (sse, coef, float(theta))
    if best is None:
        raise ValueError("no valid change-point candidate (data on one side everywhere)")
    _, coef, theta = best
    return Hinge1D(alpha1=float(coef[0]), alpha2=float(coef[1]), beta1=float(coef[2]), theta=theta)
