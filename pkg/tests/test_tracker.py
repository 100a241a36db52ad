"""Tests for the pseudo-measurement functions and the recursive tracker."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from shapetrack.ellipse import (
    EllipseParams,
    ellipse_boundary_point,
    ellipse_scaled_implicit,
    from_semi_axes,
)
from shapetrack.gaussian import GaussianState
from shapetrack.starconvex import FourierShapeParams, sc_scaled_implicit
from shapetrack.tracker import (
    DynamicsSpec,
    ScalingModel,
    Tracker,
    TrackerConfig,
    batch_update,
    ellipse_pseudo_measurement,
    measurement_update,
    sc_pseudo_measurement,
    scaling_noise_gaussian,
    time_update,
)

ELL_CONFIG = TrackerConfig(shape_family="ellipse")
SC_CONFIG = TrackerConfig(shape_family="star_convex", n_fourier=7)


def ellipse_prior(mean=(0.5, 0.5, 1.6, 1.6, 0.6), cov_diag=(3, 3, 0.5, 0.5, 0.5)):
    return GaussianState(np.array(mean, dtype=float), np.diag(cov_diag).astype(float))


def circle_prior(radius=1.5, n_coeffs=15):
    mean = np.zeros(2 + n_coeffs)
    mean[2] = 2.0 * radius
    cov = np.diag([0.7, 0.7] + [0.1] * n_coeffs)
    return GaussianState(mean, cov)


# ---------------------------------------------------------------------------
# Models


def test_scaling_model_defaults():
    sq = ScalingModel.squared_scale_uniform()
    assert (sq.mean, sq.variance) == (0.5, pytest.approx(1 / 12))
    sc = ScalingModel.scale_default()
    assert (sc.mean, sc.variance) == (0.7, 0.06)


def test_scaling_model_rejects_zero_variance():
    with pytest.raises(ValueError):
        ScalingModel("scale", 0.7, 0.0)


def test_scaling_noise_gaussian():
    g = scaling_noise_gaussian(ScalingModel.squared_scale_uniform())
    assert_allclose(g.mean, [0.5])
    assert_allclose(g.cov, [[1 / 12]])


def test_config_family_scaling_consistency():
    with pytest.raises(ValueError):
        TrackerConfig(shape_family="ellipse", scaling=ScalingModel.scale_default())
    with pytest.raises(ValueError):
        TrackerConfig(shape_family="star_convex", n_fourier=0)


def test_dynamics_validation():
    with pytest.raises(ValueError):
        DynamicsSpec(step=0.0)
    with pytest.raises(ValueError):
        DynamicsSpec(q1=-1.0)


# ---------------------------------------------------------------------------
# Ellipse pseudo-measurement


def test_ellipse_pseudo_unit_circle_zero():
    # unit circle, measurement halfway out, squared scale 0.25, no noise
    aug = np.array([0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.25])
    assert ellipse_pseudo_measurement(
        aug, [0.5, 0.0], [0.5, 0.0], trace_normalize=False
    ) == pytest.approx(0.0)
    assert ellipse_pseudo_measurement(
        aug, [0.5, 0.0], [0.5, 0.0], trace_normalize=True
    ) == pytest.approx(0.0)


def test_ellipse_pseudo_exact_model_consistency():
    # measurement on the true scaled boundary, v = 0, u = s^2 -> exactly 0
    rng = np.random.default_rng(21)
    for _ in range(20):
        p = EllipseParams(
            rng.uniform(-2, 2, size=2),
            [rng.uniform(0.5, 2), rng.uniform(0.5, 2), rng.uniform(-1, 1)],
        )
        s = rng.uniform(0.05, 1.0)
        z = p.center + s * (
            ellipse_boundary_point(p, rng.uniform(0, 2 * np.pi)) - p.center
        )
        aug = np.concatenate([p.center, p.chol, [0.0, 0.0], [s**2]])
        val = ellipse_pseudo_measurement(aug, z, z - p.center, trace_normalize=False)
        assert abs(val) < 1e-12


def test_ellipse_pseudo_identity_oracle():
    # With the source offset substituted by its true value (y - v) - m, the
    # pseudo-measurement is an exact rewrite of the scaled implicit
    # function evaluated at the noise-free source.
    rng = np.random.default_rng(22)
    for _ in range(200):
        center = rng.uniform(-3, 3, size=2)
        chol = np.array([rng.uniform(0.3, 2.5), rng.uniform(0.3, 2.5), rng.uniform(-1.5, 1.5)])
        p = EllipseParams(center, chol)
        v = rng.normal(0, 0.5, size=2)
        u = rng.uniform(0.0, 1.0)
        y = center + rng.uniform(-3, 3, size=2)
        aug = np.concatenate([center, chol, v, [u]])
        direct = ellipse_pseudo_measurement(aug, y, (y - v) - center, trace_normalize=False)
        via_implicit = ellipse_scaled_implicit(p, y - v, np.sqrt(u))
        assert abs(direct - via_implicit) < 1e-10
        # trace normalization only rescales by the same positive constant
        scaled = ellipse_pseudo_measurement(aug, y, (y - v) - center, trace_normalize=True)
        assert abs(scaled * np.sum(chol**2) - direct) < 1e-10


def test_ellipse_pseudo_trace_normalization_pointwise():
    rng = np.random.default_rng(23)
    mean = np.array([0.5, 0.5, 1.6, 1.6, 0.6])
    trace = 1.6**2 + 1.6**2 + 0.6**2
    for _ in range(50):
        aug = np.concatenate([mean, rng.normal(size=2), rng.uniform(0, 1, size=1)])
        y = rng.uniform(-3, 3, size=2)
        offset = rng.uniform(-1, 1, size=2)
        on = ellipse_pseudo_measurement(aug, y, offset, trace_normalize=True)
        off = ellipse_pseudo_measurement(aug, y, offset, trace_normalize=False)
        assert abs(on - off / trace) < 1e-12


def test_ellipse_pseudo_batch_rows_match_scalar():
    rng = np.random.default_rng(24)
    augs = rng.normal(size=(7, 8)) + np.array([0, 0, 2, 2, 0, 0, 0, 0.5])
    y, offset = [1.0, -0.5], [0.3, 0.2]
    batch = ellipse_pseudo_measurement(augs, y, offset)
    singles = [ellipse_pseudo_measurement(a, y, offset) for a in augs]
    assert_allclose(batch, singles, rtol=0, atol=0)


# ---------------------------------------------------------------------------
# Star-convex pseudo-measurement


def test_sc_pseudo_circle_zero():
    coeffs = np.zeros(15)
    coeffs[0] = 3.0
    aug = np.concatenate([[0.0, 0.0], coeffs, [0.0, 0.0], [0.5]])
    val = sc_pseudo_measurement(aug, [0.75, 0.0], 0.0, n_coeffs=15)
    assert val == pytest.approx(0.0)


def test_sc_pseudo_noise_free_reduction():
    rng = np.random.default_rng(31)
    coeffs = np.zeros(11)
    coeffs[0] = 4.0
    coeffs[1:] = rng.normal(0, 0.2, size=10)
    p = FourierShapeParams(rng.uniform(-1, 1, size=2), coeffs)
    y = rng.uniform(-2, 2, size=2)
    s = rng.uniform(0.2, 1.0)
    phi = float(np.arctan2(y[1] - p.center[1], y[0] - p.center[0]))
    aug = np.concatenate([p.center, coeffs, [0.0, 0.0], [s]])
    val = sc_pseudo_measurement(aug, y, phi, n_coeffs=11)
    # equals the scaled implicit with the angle frozen at the true direction
    assert val == pytest.approx(-sc_scaled_implicit(p, y, s), abs=1e-12)


def test_sc_pseudo_identity_oracle():
    # h must match the expansion |s r e(phi) + v|^2 - |y - m|^2 exactly,
    # for arbitrary frozen angles.
    rng = np.random.default_rng(32)
    for _ in range(200):
        n_coeffs = 11
        center = rng.uniform(-3, 3, size=2)
        coeffs = rng.normal(0, 1, size=n_coeffs)
        v = rng.normal(0, 0.5, size=2)
        s = rng.normal(0.7, 0.25)
        y = rng.uniform(-4, 4, size=2)
        phi = rng.uniform(-np.pi, np.pi)
        aug = np.concatenate([center, coeffs, v, [s]])
        direct = sc_pseudo_measurement(aug, y, phi, n_coeffs)
        from shapetrack.starconvex import fourier_basis

        r = fourier_basis(phi, n_coeffs) @ coeffs
        e = np.array([np.cos(phi), np.sin(phi)])
        expansion = np.sum((s * r * e + v) ** 2) - np.sum((y - center) ** 2)
        assert abs(direct - expansion) < 1e-10


# ---------------------------------------------------------------------------
# Measurement update


def test_update_layout_mismatch_rejected():
    with pytest.raises(ValueError):
        measurement_update(circle_prior(), [0.0, 0.0], np.eye(2), ELL_CONFIG)


def test_update_center_measurement_moves_little():
    prior = GaussianState([0, 0, 1, 1, 0], np.diag([0.01, 0.01, 1e-4, 1e-4, 1e-4]))
    post = measurement_update(prior, [0.0, 0.0], 0.04 * np.eye(2), ELL_CONFIG)
    assert np.linalg.norm(post.mean[:2]) < 0.2


def test_update_posterior_is_valid_gaussian():
    prior = ellipse_prior()
    post = measurement_update(prior, [1.0, 0.5], np.eye(2), ELL_CONFIG)
    assert_allclose(post.cov, post.cov.T, atol=0)
    assert np.linalg.eigvalsh(post.cov)[0] >= -1e-9
    assert np.all(np.isfinite(post.mean))


def test_update_small_noise_innovation_reduction_ellipse():
    # With vanishing noise and scaling uncertainty, one update must shrink
    # the scaled-implicit residual of the measurement on a mismatched prior.
    config = TrackerConfig(
        shape_family="ellipse", scaling=ScalingModel("squared_scale", 0.5, 1e-12)
    )
    prior = GaussianState([0, 0, 1, 1, 0], np.diag([0.5, 0.5, 0.3, 0.3, 0.3]))
    y = np.array([2.0, 0.0])
    post = measurement_update(prior, y, 1e-12 * np.eye(2), config)
    s_bar = np.sqrt(0.5)
    before = ellipse_scaled_implicit(EllipseParams([0, 0], [1, 1, 0]), y, s_bar)
    p_post = EllipseParams(post.mean[:2], post.mean[-3:])
    after = ellipse_scaled_implicit(p_post, y, s_bar)
    assert abs(after) < abs(before)


def test_update_small_noise_innovation_reduction_sc():
    config = TrackerConfig(
        shape_family="star_convex", n_fourier=7, scaling=ScalingModel("scale", 0.7, 1e-12)
    )
    prior = circle_prior()
    y = np.array([2.5, 0.0])
    post = measurement_update(prior, y, 1e-12 * np.eye(2), config)
    before = sc_scaled_implicit(FourierShapeParams(prior.mean[:2], prior.mean[2:]), y, 0.7)
    after = sc_scaled_implicit(FourierShapeParams(post.mean[:2], post.mean[2:]), y, 0.7)
    assert abs(after) < abs(before)


def test_update_repeated_shrinks_shape_covariance():
    # 300 low-noise measurements of a fixed ellipse: the shape-parameter
    # covariance trace should fall in at least 95% of the steps.
    rng = np.random.default_rng(404)
    truth = EllipseParams([1.0, 1.0], [1.0, 0.5, 0.2])
    state = ellipse_prior(mean=(0.5, 0.5, 1.6, 1.6, 0.6))
    noise_cov = 0.01 * np.eye(2)
    drops = 0
    for _ in range(300):
        theta = rng.uniform(0, 2 * np.pi)
        s = np.sqrt(rng.uniform(0, 1))
        z = truth.center + s * (ellipse_boundary_point(truth, theta) - truth.center)
        y = z + rng.multivariate_normal(np.zeros(2), noise_cov)
        before = np.trace(state.cov[-3:, -3:])
        state = measurement_update(state, y, noise_cov, ELL_CONFIG)
        drops += np.trace(state.cov[-3:, -3:]) < before
    assert drops >= 0.95 * 300


# ---------------------------------------------------------------------------
# Batch update


def test_batch_single_equals_sequential_exactly():
    prior = ellipse_prior()
    y = [1.2, 0.3]
    r = 0.5 * np.eye(2)
    a = measurement_update(prior, y, r, ELL_CONFIG)
    b = batch_update(prior, [y], [r], ELL_CONFIG)
    assert_allclose(a.mean, b.mean, rtol=0, atol=0)
    assert_allclose(a.cov, b.cov, rtol=0, atol=0)


def test_batch_empty_rejected():
    with pytest.raises(ValueError):
        batch_update(ellipse_prior(), [], [], ELL_CONFIG)
    with pytest.raises(ValueError):
        batch_update(ellipse_prior(), [[1.0, 0.0]], [], ELL_CONFIG)


def test_batch_order_insensitive_sanity():
    # Batch and both sequential orders land near each other; the tight
    # calibrated bound lives in the acceptance suite.
    prior = ellipse_prior()
    ys = [np.array([1.0, 0.2]), np.array([-0.3, 1.1])]
    r = 0.5 * np.eye(2)
    stacked = batch_update(prior, ys, [r, r], ELL_CONFIG)
    fwd = measurement_update(
        measurement_update(prior, ys[0], r, ELL_CONFIG), ys[1], r, ELL_CONFIG
    )
    rev = measurement_update(
        measurement_update(prior, ys[1], r, ELL_CONFIG), ys[0], r, ELL_CONFIG
    )
    scale = np.sqrt(np.diag(stacked.cov))
    assert np.all(np.abs(fwd.mean - rev.mean) < scale)
    assert np.all(np.abs(stacked.mean - fwd.mean) < scale)


def test_batch_runs_with_three_measurements():
    prior = circle_prior()
    ys = [[1.5, 0.0], [0.0, 1.4], [-1.2, 0.1]]
    rs = [0.09 * np.eye(2)] * 3
    post = batch_update(prior, ys, rs, SC_CONFIG)
    assert post.dim == prior.dim
    assert not np.allclose(post.mean, prior.mean)


# ---------------------------------------------------------------------------
# Time update


def test_time_update_static_random_walk():
    state = GaussianState([0, 0, 1, 1, 0], np.eye(5))
    out = time_update(state, DynamicsSpec(model="static_random_walk", q1=0.1), 3)
    assert_allclose(out.mean, state.mean)
    assert_allclose(out.cov, np.eye(5) + 0.1 * np.eye(5))


def test_time_update_static_noise_free_identity():
    state = GaussianState([0, 0, 1, 1, 0], np.diag([1, 2, 3, 4, 5.0]))
    out = time_update(state, DynamicsSpec(), 3)
    assert_allclose(out.mean, state.mean)
    assert_allclose(out.cov, state.cov)


def test_time_update_constant_velocity_moves_center():
    dyn = DynamicsSpec(model="constant_velocity_plus_random_walk", step=1.0)
    mean = np.array([0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0])
    state = GaussianState(mean, np.eye(7))
    out = time_update(state, dyn, 3)
    assert_allclose(out.mean[:2], [1.0, 0.0])
    assert_allclose(out.mean[2:], mean[2:])


def test_time_update_cv_noise_blocks():
    dyn = DynamicsSpec(
        model="constant_velocity_plus_random_walk", step=2.0, q1=0.1, q2=0.5
    )
    state = GaussianState(np.zeros(7), np.zeros((7, 7)))
    out = time_update(state, dyn, 3)
    t = 2.0
    assert_allclose(out.cov[0, 0], 0.5 * t**3 / 3)
    assert_allclose(out.cov[0, 2], 0.5 * t**2 / 2)
    assert_allclose(out.cov[2, 2], 0.5 * t)
    assert_allclose(out.cov[4:, 4:], 0.1 * np.eye(3))
    assert_allclose(out.cov[:4, 4:], 0.0)


def test_time_update_layout_mismatch():
    with pytest.raises(ValueError):
        time_update(GaussianState(np.zeros(5), np.eye(5)),
                    DynamicsSpec(model="constant_velocity_plus_random_walk"), 3)
    with pytest.raises(ValueError):
        time_update(GaussianState(np.zeros(7), np.eye(7)), DynamicsSpec(), 3)


# ---------------------------------------------------------------------------
# Tracker wrapper


def test_tracker_runs_and_estimates():
    # sequential single-point updates at sensor noise comparable to the
    # extent, the regime the quadratic linearization is built for
    rng = np.random.default_rng(50)
    truth = from_semi_axes([1.0, 1.0], [2.0, 1.0], angle=0.5)
    tracker = Tracker(ELL_CONFIG, ellipse_prior())
    for _ in range(300):
        tracker.predict()
        theta = rng.uniform(0, 2 * np.pi)
        s = np.sqrt(rng.uniform(0, 1))
        z = truth.center + s * (ellipse_boundary_point(truth, theta) - truth.center)
        tracker.update([z + rng.normal(0, 0.6, size=2)], [0.36 * np.eye(2)])
    est = tracker.ellipse_estimate()
    assert np.linalg.norm(est.center - truth.center) < 0.3
    assert_allclose(est.semi_axes, truth.semi_axes, atol=0.5)
    assert tracker.degenerate_updates == 0


def test_tracker_counts_clamp_repairs():
    # a collapsed diagonal entry (not a flipped sign) is a genuine repair
    prior = GaussianState([0, 0, 1e-9, 1.0, 0.0], np.diag([1, 1, 0.5, 0.5, 0.5]))
    tracker = Tracker(ELL_CONFIG, prior)
    tracker.update([[1.0, 0.0]], [np.eye(2)])
    assert tracker.clamp_repairs == 1


def test_tracker_ignores_sign_flips():
    prior = GaussianState([0, 0, -1.0, 1.0, 0.0], np.diag([1, 1, 0.5, 0.5, 0.5]))
    tracker = Tracker(ELL_CONFIG, prior)
    tracker.update([[1.0, 0.0]], [np.eye(2)])
    assert tracker.clamp_repairs == 0


def test_tracker_counts_degenerate_updates():
    config = TrackerConfig(
        shape_family="ellipse", scaling=ScalingModel("squared_scale", 0.5, 1e-18)
    )
    prior = GaussianState([0, 0, 1, 1, 0], 1e-18 * np.eye(5))
    tracker = Tracker(config, prior)
    tracker.update([[0.0, 0.0]], [1e-18 * np.eye(2)])
    assert tracker.degenerate_updates == 1
    assert_allclose(tracker.state.mean, prior.mean)


def test_tracker_estimate_family_guard():
    tracker = Tracker(ELL_CONFIG, ellipse_prior())
    with pytest.raises(ValueError):
        tracker.contour_estimate()
