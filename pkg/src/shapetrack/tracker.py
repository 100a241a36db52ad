"""Recursive extended-object tracker for randomly scaled shape boundaries.

Measurements y = z + v are noisy observations of sources z drawn from a
randomly scaled version of the target boundary. Substituting the source
into the scaled implicit shape function yields a polynomial
pseudo-measurement in the state, the measurement noise v, and the scaling
variable; conditioning on pseudo-measurement = 0 with a Gaussian
statistical linearization gives the measurement update. Both the elliptic
(Cholesky triple) and star-convex (Fourier radius) families are handled.

State layout is fixed as [center(2); velocity(2, only with the
constant-velocity dynamics); shape parameters].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .ellipse import EllipseParams, clamp_chol, ellipse_closest_point
from .gaussian import (
    DEFAULT_SPREAD,
    DegenerateInnovationWarning,
    GaussianState,
    UnscentedSpread,
    joint_state,
    kalman_predict,
    statistical_linearization_update,
)
from .starconvex import FourierShapeParams, angle_point_estimate, fourier_basis

__all__ = [
    "ScalingModel",
    "DynamicsSpec",
    "TrackerConfig",
    "Tracker",
    "scaling_noise_gaussian",
    "ellipse_pseudo_measurement",
    "sc_pseudo_measurement",
    "measurement_update",
    "batch_update",
    "time_update",
]

TRACE_FLOOR = 1e-12


@dataclass(frozen=True)
class ScalingModel:
    """Gaussian model of the boundary scaling variable.

    variable selects what the scalar in the augmented state represents:
    "squared_scale" treats it as s^2 (the elliptic family, where uniform
    sources over the extent make s^2 uniform on [0, 1]), "scale" as s
    itself (the star-convex family).
    """

    variable: str
    mean: float
    variance: float

    def __post_init__(self):
        if self.variable not in ("squared_scale", "scale"):
            raise ValueError(f"unknown scaling variable {self.variable!r}")
        if not self.variance > 0:
            raise ValueError("scaling variance must be positive")

    @classmethod
    def squared_scale_uniform(cls) -> "ScalingModel":
        """Moments of s^2 for s^2 ~ U[0, 1]: mean 1/2, variance 1/12."""
        return cls("squared_scale", 0.5, 1.0 / 12.0)

    @classmethod
    def scale_default(cls) -> "ScalingModel":
        """Default Gaussian scale for star-convex boundaries."""
        return cls("scale", 0.7, 0.06)


def scaling_noise_gaussian(model: ScalingModel) -> GaussianState:
    """Scalar Gaussian of the scaling variable, ready for state augmentation."""
    return GaussianState([model.mean], [[model.variance]])


@dataclass(frozen=True)
class DynamicsSpec:
    """Temporal model: static with a random walk, or constant velocity.

    q1 is the shape (random-walk) noise intensity, q2 the kinematic noise
    intensity of the constant-velocity block.
    """

    model: str = "static_random_walk"
    step: float = 1.0
    q1: float = 0.0
    q2: float = 0.0

    def __post_init__(self):
        if self.model not in ("static_random_walk", "constant_velocity_plus_random_walk"):
            raise ValueError(f"unknown dynamics model {self.model!r}")
        if not self.step > 0:
            raise ValueError("time step must be positive")
        if self.q1 < 0 or self.q2 < 0:
            raise ValueError("noise intensities must be non-negative")

    @property
    def has_velocity(self) -> bool:
        return self.model == "constant_velocity_plus_random_walk"


@dataclass(frozen=True)
class TrackerConfig:
    """Shape family, noise models, and update options of one tracker."""

    shape_family: str = "ellipse"
    n_fourier: int = 7
    scaling: ScalingModel | None = None
    trace_normalize: bool = True
    batch_mode: bool = False
    unscented: UnscentedSpread = DEFAULT_SPREAD
    dynamics: DynamicsSpec = field(default_factory=DynamicsSpec)

    def __post_init__(self):
        if self.shape_family not in ("ellipse", "star_convex"):
            raise ValueError(f"unknown shape family {self.shape_family!r}")
        if self.shape_family == "star_convex" and self.n_fourier < 1:
            raise ValueError("star-convex tracking needs at least one harmonic")
        if self.scaling is None:
            default = (
                ScalingModel.squared_scale_uniform()
                if self.shape_family == "ellipse"
                else ScalingModel.scale_default()
            )
            object.__setattr__(self, "scaling", default)
        expected = "squared_scale" if self.shape_family == "ellipse" else "scale"
        if self.scaling.variable != expected:
            raise ValueError(
                f"{self.shape_family} tracking requires scaling variable {expected!r}, "
                f"got {self.scaling.variable!r}"
            )

    @property
    def shape_dim(self) -> int:
        return 3 if self.shape_family == "ellipse" else 2 * self.n_fourier + 1

    def state_dim(self) -> int:
        return 2 + (2 if self.dynamics.has_velocity else 0) + self.shape_dim

    def check_layout(self, dim: int) -> None:
        if dim != self.state_dim():
            raise ValueError(
                f"state dimension {dim} does not match layout "
                f"[center(2); velocity({2 if self.dynamics.has_velocity else 0}); "
                f"shape({self.shape_dim})]"
            )


# ---------------------------------------------------------------------------
# Pseudo-measurement functions


def ellipse_pseudo_measurement(
    state, measurement, source_offset, trace_normalize: bool = True
):
    """Elliptic pseudo-measurement; zero when measurement, state, and noise agree.

    Args:
        state: augmented vector(s) [x; v; u] of shape (d,) or (n, d); the
            last three entries are the measurement noise v (2) and the
            squared scaling factor u (1); the state part ends with the
            Cholesky triple (a, b, c) and starts with the center.
        measurement: observed 2-vector y.
        source_offset: fixed estimate of (source - center), taken from the
            closest point on the prior-mean ellipse to y.
        trace_normalize: divide by the trace of L L^T (computed per state
            vector), which levels the innovation scale across shape sizes.

    Returns:
        Scalar for a single vector, else array of shape (n,).
    """
    aug = np.atleast_2d(np.asarray(state, dtype=float))
    y = np.asarray(measurement, dtype=float).reshape(2)
    r_hat = np.asarray(source_offset, dtype=float).reshape(2)

    u = aug[:, -1]
    v = aug[:, -3:-1]
    x = aug[:, :-3]
    m = x[:, :2]
    a, b, c = x[:, -3], x[:, -2], x[:, -1]

    # L L^T entries for L = [[a, 0], [c, b]]
    q11 = a * a
    q12 = a * c
    q22 = b * b + c * c

    w = y - m
    quad = q11 * w[:, 0] ** 2 + 2.0 * q12 * w[:, 0] * w[:, 1] + q22 * w[:, 1] ** 2
    cross = (
        q11 * r_hat[0] * v[:, 0]
        + q12 * (r_hat[0] * v[:, 1] + r_hat[1] * v[:, 0])
        + q22 * r_hat[1] * v[:, 1]
    )
    noise_quad = q11 * v[:, 0] ** 2 + 2.0 * q12 * v[:, 0] * v[:, 1] + q22 * v[:, 1] ** 2

    vals = quad - 2.0 * cross - noise_quad - u
    if trace_normalize:
        vals = vals / np.maximum(q11 + q22, TRACE_FLOOR)
    return float(vals[0]) if np.ndim(state) == 1 else vals


def sc_pseudo_measurement(state, measurement, phi_hat: float, n_coeffs: int):
    """Star-convex pseudo-measurement with the source angle frozen at phi_hat.

    Args:
        state: augmented vector(s) [x; v; s], shape (d,) or (n, d); the
            state part ends with the n_coeffs Fourier coefficients.
        measurement: observed 2-vector y.
        phi_hat: point estimate of the source angle (from the prior center).
        n_coeffs: length of the coefficient block.

    Returns:
        s^2 r^2 + 2 s r e(phi)^T v + |v|^2 - |y - m|^2 per vector.
    """
    aug = np.atleast_2d(np.asarray(state, dtype=float))
    y = np.asarray(measurement, dtype=float).reshape(2)

    s = aug[:, -1]
    v = aug[:, -3:-1]
    x = aug[:, :-3]
    m = x[:, :2]
    coeffs = x[:, -n_coeffs:]

    r = coeffs @ fourier_basis(phi_hat, n_coeffs)
    e = np.array([np.cos(phi_hat), np.sin(phi_hat)])
    w = y - m
    vals = (
        (s * r) ** 2
        + 2.0 * s * r * (v @ e)
        + np.sum(v * v, axis=1)
        - np.sum(w * w, axis=1)
    )
    return float(vals[0]) if np.ndim(state) == 1 else vals


# ---------------------------------------------------------------------------
# Updates


def _prior_shape_views(prior: GaussianState, config: TrackerConfig):
    mean = prior.mean
    if config.shape_family == "ellipse":
        ell, _ = clamp_chol(mean[:2], mean[-3:])
        return ell
    return FourierShapeParams(mean[:2], mean[-config.shape_dim :])


def _measurement_h(prior: GaussianState, measurement, config: TrackerConfig):
    """Build the single-measurement h closure over augmented sigma points."""
    y = np.asarray(measurement, dtype=float).reshape(2)
    if config.shape_family == "ellipse":
        ell = _prior_shape_views(prior, config)
        offset = ellipse_closest_point(ell, y) - prior.mean[:2]

        def h(points, _y):
            return ellipse_pseudo_measurement(points, y, offset, config.trace_normalize)

    else:
        phi = angle_point_estimate(y, prior.mean[:2])
        n_coeffs = config.shape_dim

        def h(points, _y):
            return sc_pseudo_measurement(points, y, phi, n_coeffs)

    return h


def measurement_update(
    prior: GaussianState, measurement, noise_cov, config: TrackerConfig
) -> GaussianState:
    """Condition the state on one measurement via the pseudo-measurement.

    The augmented density [prior; v; scaling] is propagated through the
    family's pseudo-measurement function and linearized statistically
    against the target 0. The source estimate (closest boundary point or
    angle) is computed from the prior mean and held fixed.

    Returns the posterior; on a degenerate innovation the prior is
    returned unchanged (a DegenerateInnovationWarning is emitted by the
    underlying update).
    """
    config.check_layout(prior.dim)
    noise_cov = np.asarray(noise_cov, dtype=float).reshape(2, 2)
    noise_aug = joint_state(
        GaussianState(np.zeros(2), noise_cov),
        scaling_noise_gaussian(config.scaling),
    )
    h = _measurement_h(prior, measurement, config)
    return statistical_linearization_update(
        prior, h, noise_aug, measurement=None, spread=config.unscented
    )


def batch_update(
    prior: GaussianState, measurements, noise_covs, config: TrackerConfig
) -> GaussianState:
    """Process several measurements in one stacked update.

    The augmented state carries an independent (v, scaling) block per
    measurement; the pseudo-measurement vector stacks the per-measurement
    functions, all with source estimates from the same prior mean.
    """
    config.check_layout(prior.dim)
    measurements = [np.asarray(y, dtype=float).reshape(2) for y in measurements]
    if len(measurements) == 0:
        raise ValueError("batch_update needs at least one measurement")
    noise_covs = [np.asarray(r, dtype=float).reshape(2, 2) for r in noise_covs]
    if len(noise_covs) != len(measurements):
        raise ValueError("one noise covariance per measurement required")

    d = prior.dim
    parts = []
    hs = []
    for y, r in zip(measurements, noise_covs):
        parts.append(GaussianState(np.zeros(2), r))
        parts.append(scaling_noise_gaussian(config.scaling))
        hs.append(_measurement_h(prior, y, config))
    noise_aug = joint_state(*parts)

    def h(points, _y):
        cols = []
        for l, hl in enumerate(hs):
            block = points[:, d + 3 * l : d + 3 * l + 3]
            cols.append(hl(np.hstack([points[:, :d], block]), None))
        return np.column_stack(cols)

    return statistical_linearization_update(
        prior, h, noise_aug, measurement=None, spread=config.unscented
    )


def time_update(state: GaussianState, dyn: DynamicsSpec, shape_dim: int) -> GaussianState:
    """Predict the state forward one step.

    Static mode applies a pure random walk (A = I, Q = q1 I) to the
    [center; shape] state. Constant-velocity mode applies the standard CV
    block to [center; velocity] with white-acceleration noise of intensity
    q2, and a q1 random walk to the shape block.
    """
    if not dyn.has_velocity:
        if state.dim != 2 + shape_dim:
            raise ValueError(
                f"static layout [center(2); shape({shape_dim})] expects dimension "
                f"{2 + shape_dim}, got {state.dim}"
            )
        return kalman_predict(state, np.eye(state.dim), dyn.q1 * np.eye(state.dim))

    if state.dim != 4 + shape_dim:
        raise ValueError(
            f"constant-velocity layout [center(2); velocity(2); shape({shape_dim})] "
            f"expects dimension {4 + shape_dim}, got {state.dim}"
        )
    t = dyn.step
    eye2 = np.eye(2)
    a = np.eye(state.dim)
    a[:2, 2:4] = t * eye2
    q = np.zeros((state.dim, state.dim))
    q[:2, :2] = dyn.q2 * t**3 / 3.0 * eye2
    q[:2, 2:4] = dyn.q2 * t**2 / 2.0 * eye2
    q[2:4, :2] = dyn.q2 * t**2 / 2.0 * eye2
    q[2:4, 2:4] = dyn.q2 * t * eye2
    q[4:, 4:] = dyn.q1 * np.eye(shape_dim)
    return kalman_predict(state, a, q)


# ---------------------------------------------------------------------------
# Stateful wrapper


class Tracker:
    """One target's recursive estimator: holds the state, counts anomalies.

    All heavy lifting is delegated to the pure functions above; this class
    adds the predict/update loop plumbing and diagnostics (Cholesky-triple
    clamp repairs, skipped degenerate updates).
    """

    def __init__(self, config: TrackerConfig, prior: GaussianState):
        config.check_layout(prior.dim)
        self.config = config
        self.state = prior.copy()
        self.clamp_repairs = 0
        self.degenerate_updates = 0

    def predict(self) -> None:
        self.state = time_update(self.state, self.config.dynamics, self.config.shape_dim)

    def update(self, measurements, noise_covs) -> None:
        """Apply one step's measurements (batch or sequential per config)."""
        measurements = list(measurements)
        noise_covs = list(noise_covs)
        if not measurements:
            return
        if self.config.shape_family == "ellipse":
            _, clamped = clamp_chol(self.state.mean[:2], self.state.mean[-3:])
            self.clamp_repairs += int(clamped)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if self.config.batch_mode:
                self.state = batch_update(
                    self.state, measurements, noise_covs, self.config
                )
            else:
                for y, r in zip(measurements, noise_covs):
                    self.state = measurement_update(self.state, y, r, self.config)
        self.degenerate_updates += sum(
            issubclass(w.category, DegenerateInnovationWarning) for w in caught
        )

    @property
    def center(self) -> np.ndarray:
        return self.state.mean[:2]

    def ellipse_estimate(self) -> EllipseParams:
        if self.config.shape_family != "ellipse":
            raise ValueError("not an ellipse tracker")
        ell, _ = clamp_chol(self.state.mean[:2], self.state.mean[-3:])
        return ell

    def contour_estimate(self) -> FourierShapeParams:
        if self.config.shape_family != "star_convex":
            raise ValueError("not a star-convex tracker")
        return FourierShapeParams(
            self.state.mean[:2], self.state.mean[-self.config.shape_dim :]
        )
