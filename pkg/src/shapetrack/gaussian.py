"""Gaussian state containers, sigma points, and the statistical-linearization update.

Everything downstream (shape estimators, trackers, the simulation harness)
manipulates Gaussian densities through the small set of primitives in this
module: `GaussianState`, deterministic sigma-point generation, a generic
measurement update based on statistical linearization of a (pseudo-)
measurement function, and the linear Kalman time update.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConditioningError",
    "DegenerateInnovationWarning",
    "GaussianState",
    "UnscentedSpread",
    "SigmaPointSet",
    "DEFAULT_SPREAD",
    "symmetrize",
    "psd_repair",
    "cholesky_factor",
    "draw_sigma_points",
    "statistical_linearization_update",
    "kalman_predict",
]


class ConditioningError(RuntimeError):
    """Covariance could not be factorized even after jitter repair."""


class DegenerateInnovationWarning(UserWarning):
    """Innovation covariance fell below tolerance; the update was skipped."""


# Repair thresholds. A covariance is accepted as PSD when its smallest
# eigenvalue is >= -PSD_TOL; anything worse gets a single jitter retry.
PSD_TOL = 1e-9
JITTER_FLOOR = 1e-12
INNOVATION_TOL = 1e-12


def symmetrize(cov: np.ndarray) -> np.ndarray:
    """Return the symmetric part (C + C^T) / 2."""
    return 0.5 * (cov + cov.T)


def psd_repair(cov: np.ndarray) -> np.ndarray:
    """Symmetrize and, if needed, jitter a covariance back to PSD.

    Args:
        cov: square matrix, approximately symmetric PSD.

    Returns:
        Symmetrized matrix, with eps * I added when the smallest eigenvalue
        is below -1e-9 (eps = |min eigenvalue| + 1e-12).

    Raises:
        ConditioningError: still indefinite after one jitter attempt.
    """
    sym = symmetrize(np.asarray(cov, dtype=float))
    w_min = float(np.linalg.eigvalsh(sym)[0])
    if w_min >= -PSD_TOL:
        return sym
    repaired = sym + (abs(w_min) + JITTER_FLOOR) * np.eye(sym.shape[0])
    if float(np.linalg.eigvalsh(repaired)[0]) < -PSD_TOL:
        raise ConditioningError(
            f"covariance indefinite after jitter (min eigenvalue {w_min:.3e})"
        )
    return repaired


def cholesky_factor(cov: np.ndarray) -> np.ndarray:
    """Lower-triangular Cholesky factor with a single jitter retry.

    Deterministic (no randomized pivoting), so repeated runs of a seeded
    simulation factorize identically.
    """
    sym = symmetrize(np.asarray(cov, dtype=float))
    try:
        return np.linalg.cholesky(sym)
    except np.linalg.LinAlgError:
        pass
    w_min = float(np.linalg.eigvalsh(sym)[0])
    eps = max(abs(min(w_min, 0.0)) + JITTER_FLOOR, JITTER_FLOOR)
    try:
        return np.linalg.cholesky(sym + eps * np.eye(sym.shape[0]))
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(
            f"Cholesky failed after jitter retry (min eigenvalue {w_min:.3e})"
        ) from exc


@dataclass
class GaussianState:
    """Mean vector and covariance matrix of a Gaussian density.

    The covariance is symmetrized on construction. Positive
    semi-definiteness (smallest eigenvalue >= -1e-9) is maintained by the
    operations in this module, which route every emitted covariance
    through `psd_repair`.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        self.cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        d = self.mean.shape[0]
        if self.mean.ndim != 1:
            raise ValueError("mean must be a vector")
        if self.cov.shape != (d, d):
            raise ValueError(
                f"cov shape {self.cov.shape} does not match mean dimension {d}"
            )
        if not (np.all(np.isfinite(self.mean)) and np.all(np.isfinite(self.cov))):
            raise ValueError("mean and cov must be finite")
        self.cov = symmetrize(self.cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def copy(self) -> "GaussianState":
        return GaussianState(self.mean.copy(), self.cov.copy())


def joint_state(*parts: GaussianState) -> GaussianState:
    """Stack independent Gaussians into one block-diagonal joint state."""
    means = [p.mean for p in parts]
    dims = [p.dim for p in parts]
    cov = np.zeros((sum(dims), sum(dims)))
    at = 0
    for p in parts:
        cov[at : at + p.dim, at : at + p.dim] = p.cov
        at += p.dim
    return GaussianState(np.concatenate(means), cov)


@dataclass(frozen=True)
class UnscentedSpread:
    """Scaled unscented-transform parameters (alpha, beta, kappa).

    kappa=None resolves to 3 - d at draw time, which makes d + lambda = 3
    for alpha = 1 and matches fourth moments of a Gaussian for quadratic
    nonlinearities.
    """

    alpha: float = 1.0
    beta: float = 0.0
    kappa: float | None = None

    def resolved_kappa(self, dim: int) -> float:
        return 3.0 - dim if self.kappa is None else float(self.kappa)


DEFAULT_SPREAD = UnscentedSpread()


@dataclass
class SigmaPointSet:
    """2d+1 deterministic sample points with recombination weights."""

    points: np.ndarray  # (2d+1, d)
    mean_weights: np.ndarray  # (2d+1,)
    cov_weights: np.ndarray  # (2d+1,)

    def recombine(self) -> tuple[np.ndarray, np.ndarray]:
        """Weighted mean and covariance recomputed from the points."""
        mean = self.mean_weights @ self.points
        diff = self.points - mean
        cov = symmetrize((self.cov_weights * diff.T) @ diff)
        return mean, cov


def draw_sigma_points(
    state: GaussianState, spread: UnscentedSpread = DEFAULT_SPREAD
) -> SigmaPointSet:
    """Draw the 2d+1 scaled symmetric sigma points of a Gaussian.

    Args:
        state: source density, dimension d >= 1.
        spread: unscented parameters; the default keeps d + lambda = 3.

    Returns:
        SigmaPointSet whose weighted mean/covariance reproduce the input
        moments (exactly in exact arithmetic).

    Raises:
        ValueError: spread yields d + lambda <= 0.
        ConditioningError: covariance cannot be factorized.
    """
    d = state.dim
    kappa = spread.resolved_kappa(d)
    lam = spread.alpha**2 * (d + kappa) - d
    scale = d + lam
    if scale <= 0:
        raise ValueError(f"d + lambda = {scale} must be positive")

    root = cholesky_factor(state.cov) * np.sqrt(scale)
    points = np.empty((2 * d + 1, d))
    points[0] = state.mean
    points[1 : d + 1] = state.mean + root.T
    points[d + 1 :] = state.mean - root.T

    w_mean = np.full(2 * d + 1, 1.0 / (2.0 * scale))
    w_mean[0] = lam / scale
    w_cov = w_mean.copy()
    w_cov[0] += 1.0 - spread.alpha**2 + spread.beta
    return SigmaPointSet(points, w_mean, w_cov)


def statistical_linearization_update(
    prior: GaussianState,
    h,
    noise_aug: GaussianState,
    measurement: np.ndarray | None = None,
    spread: UnscentedSpread = DEFAULT_SPREAD,
) -> GaussianState:
    """Condition a Gaussian prior on h(state, noise; measurement) = 0.

    Joint sigma points are drawn over the stacked vector [state; noise],
    propagated through h, and the resulting cross- and innovation
    covariances feed a Kalman-style update against the constant
    pseudo-measurement 0.

    Args:
        prior: state density to be updated.
        noise_aug: density of the stacked noise variables appended to the
            state (measurement noise, scaling variables, ...).
        h: callable h(aug_points, measurement) -> values. aug_points has
            one row per sigma point, laid out [state, noise]; values has
            shape (n_points,) for a scalar pseudo-measurement or
            (n_points, m) for a stacked batch.
        measurement: constant forwarded to h untouched.
        spread: unscented parameters for the joint density.

    Returns:
        Posterior GaussianState; the prior (unchanged) if the innovation
        covariance is degenerate, in which case a
        DegenerateInnovationWarning is emitted.
    """
    d = prior.dim
    sigma = draw_sigma_points(joint_state(prior, noise_aug), spread)

    values = np.asarray(h(sigma.points, measurement), dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] != sigma.points.shape[0]:
        raise ValueError("h must return one value (or row) per sigma point")

    w_m, w_c = sigma.mean_weights, sigma.cov_weights
    x_pts = sigma.points[:, :d]
    mean_h = w_m @ values
    mean_x = w_m @ x_pts
    dh = values - mean_h
    dx = x_pts - mean_x
    cov_hh = symmetrize((w_c * dh.T) @ dh)
    cov_xh = (w_c * dx.T) @ dh

    if float(np.linalg.eigvalsh(cov_hh)[0]) < INNOVATION_TOL:
        warnings.warn(
            "innovation covariance is degenerate; returning the prior",
            DegenerateInnovationWarning,
            stacklevel=2,
        )
        return prior.copy()

    gain = np.linalg.solve(cov_hh, cov_xh.T).T
    mean_post = prior.mean + gain @ (0.0 - mean_h)
    cov_post = psd_repair(prior.cov - gain @ cov_hh @ gain.T)
    return GaussianState(mean_post, cov_post)


def kalman_predict(
    state: GaussianState, system_matrix: np.ndarray, process_noise_cov: np.ndarray
) -> GaussianState:
    """Linear time update: mean -> A mean, cov -> A cov A^T + Q."""
    a = np.asarray(system_matrix, dtype=float)
    q = np.asarray(process_noise_cov, dtype=float)
    d = state.dim
    if a.shape != (d, d) or q.shape != (d, d):
        raise ValueError(
            f"system matrix {a.shape} / noise {q.shape} do not match state dim {d}"
        )
    return GaussianState(a @ state.mean, symmetrize(a @ state.cov @ a.T + q))
