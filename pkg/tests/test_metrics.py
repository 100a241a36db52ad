import numpy as np
import pytest
from numpy.testing import assert_allclose

from shapetrack.ellipse import EllipseParams, from_semi_axes
from shapetrack.metrics import shape_iou, shape_polyline
from shapetrack.starconvex import FourierShapeParams
from shapetrack.targets import (
    builtin_data_path,
    ellipse_target,
    group_target,
    load_geometry,
    polygon_target,
)

UNIT_CIRCLE = EllipseParams([0.0, 0.0], [1.0, 1.0, 0.0])
SQUARE = polygon_target([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


def circle_params(radius, center=(0.0, 0.0)):
    return EllipseParams(center, [1.0 / radius, 1.0 / radius, 0.0])


def fourier_circle(radius, center=(0.0, 0.0), n=7):
    coeffs = np.zeros(n)
    coeffs[0] = 2.0 * radius
    return FourierShapeParams(center, coeffs)


def test_identical_shapes_score_one():
    assert shape_iou(UNIT_CIRCLE, UNIT_CIRCLE) == 1.0
    air = load_geometry(builtin_data_path("aircraft.txt"))
    assert shape_iou(air, air) == 1.0


def test_disjoint_shapes_score_zero():
    far = circle_params(1.0, center=(10.0, 0.0))
    assert shape_iou(UNIT_CIRCLE, far) == 0.0


def test_concentric_circles_area_ratio():
    outer = circle_params(np.sqrt(2.0))
    assert shape_iou(UNIT_CIRCLE, outer) == pytest.approx(0.5, abs=0.005)


def test_symmetry():
    ell = from_semi_axes([0.3, -0.2], [2.0, 0.8], 0.7)
    assert shape_iou(UNIT_CIRCLE, ell) == shape_iou(ell, UNIT_CIRCLE)


def test_fourier_circle_matches_ellipse_circle():
    v = shape_iou(fourier_circle(1.0), UNIT_CIRCLE)
    assert v == pytest.approx(1.0, abs=0.01)


def test_half_overlapping_squares():
    a = polygon_target([[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]])
    b = polygon_target([[1.0, 0.0], [3.0, 0.0], [3.0, 2.0], [1.0, 2.0]])
    # overlap 2 of union 6
    assert shape_iou(a, b) == pytest.approx(1.0 / 3.0, abs=0.005)


def test_square_inscribed_circle():
    # circle radius 1 inside the 2x2 square: pi/4
    assert shape_iou(SQUARE, UNIT_CIRCLE) == pytest.approx(np.pi / 4.0, abs=0.005)


def test_group_scored_via_hull():
    grp = group_target([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    assert shape_iou(grp, SQUARE) == pytest.approx(1.0, abs=0.005)


def test_degenerate_group_rejected():
    grp = group_target([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(ValueError, match="no area"):
        shape_iou(grp, UNIT_CIRCLE)


def test_negative_fourier_radius_clamped():
    # strongly negative mean radius zone: contour must stay finite and the
    # polyline must not cross to the far side of the center
    coeffs = np.zeros(5)
    coeffs[0] = 1.0  # mean radius 0.5
    coeffs[1] = 1.2  # cos term drives the radius negative near phi=pi
    shape = FourierShapeParams([0.0, 0.0], coeffs)
    poly = shape_polyline(shape)
    r = np.linalg.norm(poly, axis=1)
    assert np.isfinite(poly).all()
    assert r.min() >= 0.0
    v = shape_iou(shape, UNIT_CIRCLE)
    assert 0.0 < v < 1.0


def test_polyline_kinds():
    air = load_geometry(builtin_data_path("aircraft.txt"))
    assert shape_polyline(air).shape == (12, 2)
    assert shape_polyline(ellipse_target(UNIT_CIRCLE), n=64).shape == (64, 2)
    r = np.linalg.norm(shape_polyline(UNIT_CIRCLE, n=128), axis=1)
    assert_allclose(r, 1.0, rtol=1e-12)


def test_polyline_rejects_unknown_type():
    with pytest.raises(TypeError):
        shape_polyline("circle")


def test_resolution_validation():
    with pytest.raises(ValueError):
        shape_iou(UNIT_CIRCLE, UNIT_CIRCLE, resolution=1)


def test_low_resolution_still_close():
    outer = circle_params(np.sqrt(2.0))
    coarse = shape_iou(UNIT_CIRCLE, outer, resolution=256)
    assert coarse == pytest.approx(0.5, abs=0.02)
