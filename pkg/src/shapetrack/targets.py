"""Ground-truth targets: elliptic regions, star-convex polygons, point groups.

Targets produce measurement sources drawn uniformly over their extent
(uniformly among members for groups). For star-convex geometries the
radius function along a ray from the star center is exposed, which both
drives the rejection sampling and lets tests extract the radial scaling
fraction of each sample.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .ellipse import EllipseParams, ellipse_implicit

__all__ = [
    "RejectionBudgetError",
    "GroundTruthTarget",
    "ellipse_target",
    "polygon_target",
    "group_target",
    "polygon_radius",
    "polygon_centroid",
    "boundary_radius",
    "radial_fraction",
    "sample_measurement_source",
    "sample_measurement_sources",
    "generate_measurement",
    "psd_root",
    "load_geometry",
    "load_waypoints",
    "builtin_data_path",
]

STAR_CHECK_GRID = 3600
MAX_REJECTION_ATTEMPTS = 10**6


class RejectionBudgetError(RuntimeError):
    """Rejection sampling exhausted its draw budget (malformed geometry)."""


# ---------------------------------------------------------------------------
# Polygon geometry


def polygon_centroid(vertices: np.ndarray) -> np.ndarray:
    """Area centroid of a simple polygon."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * np.sum(cross)
    if abs(area) < 1e-12:
        raise ValueError("degenerate polygon with zero area")
    cx = np.sum((x + xn) * cross) / (6.0 * area)
    cy = np.sum((y + yn) * cross) / (6.0 * area)
    return np.array([cx, cy])


def _ray_crossings(vertices: np.ndarray, center: np.ndarray, phi: np.ndarray):
    """Distances t >= 0 where rays center + t e(phi) cross polygon edges.

    Returns (t, hits): t of shape (len(phi),) holding the positive crossing
    distance per angle (nan where none), hits the number of crossings.
    Edge endpoints are treated half-open so shared vertices count once.
    """
    v = np.asarray(vertices, dtype=float)
    p = v
    u = np.roll(v, -1, axis=0) - v  # edge vectors
    w = p - center  # (E, 2)

    d = np.stack([np.cos(phi), np.sin(phi)], axis=-1)  # (A, 2)
    # Solve t d = w + tau u per (angle, edge) pair via 2D cross products.
    denom = d[:, None, 0] * u[None, :, 1] - d[:, None, 1] * u[None, :, 0]
    cross_wu = w[None, :, 0] * u[None, :, 1] - w[None, :, 1] * u[None, :, 0]
    cross_wd = w[None, :, 0] * d[:, None, 1] - w[None, :, 1] * d[:, None, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross_wu / denom
        tau = cross_wd / denom
    # small slack on the half-open edge interval so a ray through a shared
    # vertex still counts exactly once despite roundoff in tau
    slack = 1e-12
    valid = (
        (np.abs(denom) > 1e-14)
        & (tau >= -slack)
        & (tau < 1.0 - slack)
        & (t > 0.0)
    )
    hits = valid.sum(axis=1)
    t = np.where(valid, t, np.nan)
    t_first = np.where(hits > 0, np.nanmin(np.where(valid, t, np.inf), axis=1), np.nan)
    return t_first, hits


def polygon_radius(vertices: np.ndarray, center: np.ndarray, phi) -> np.ndarray:
    """Boundary distance from `center` along angle(s) phi for a star-convex polygon."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    t, hits = _ray_crossings(vertices, np.asarray(center, dtype=float), phi)
    if np.any(hits < 1):
        raise ValueError("ray misses the polygon boundary; geometry not star-convex")
    return t


def _segments_intersect(a0, a1, b0, b1) -> bool:
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    d1, d2 = orient(b0, b1, a0), orient(b0, b1, a1)
    d3, d4 = orient(a0, a1, b0), orient(a0, a1, b1)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _check_simple(vertices: np.ndarray) -> None:
    n = len(vertices)
    edges = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue  # adjacent around the wrap
            if _segments_intersect(*edges[i], *edges[j]):
                raise ValueError(f"polygon self-intersects (edges {i} and {j})")


def _check_star_convex(vertices: np.ndarray, center: np.ndarray) -> None:
    phi = np.linspace(0.0, 2 * np.pi, STAR_CHECK_GRID, endpoint=False)
    _, hits = _ray_crossings(vertices, center, phi)
    if np.any(hits != 1):
        bad = int(np.count_nonzero(hits != 1))
        raise ValueError(
            f"polygon is not star-convex about {center}: radius multi-valued or "
            f"undefined at {bad} of {STAR_CHECK_GRID} angles"
        )


# ---------------------------------------------------------------------------
# Targets


@dataclass(frozen=True)
class GroundTruthTarget:
    """One simulated extended object.

    kind selects the payload: "ellipse" uses `ellipse`, "polygon" uses
    `vertices` (simple, star-convex about its centroid), "point_group"
    uses `members`. Construct through the ellipse_target / polygon_target /
    group_target helpers, which validate the geometry.
    """

    kind: str
    ellipse: EllipseParams | None = None
    vertices: np.ndarray | None = None
    members: np.ndarray | None = None

    @property
    def anchor(self) -> np.ndarray:
        """Reference point: ellipse center, polygon centroid, member mean."""
        if self.kind == "ellipse":
            return self.ellipse.center
        if self.kind == "polygon":
            return polygon_centroid(self.vertices)
        return np.mean(self.members, axis=0)

    def transformed(self, rotation: float = 0.0, translation=(0.0, 0.0)) -> "GroundTruthTarget":
        """Rigidly move the target: rotate about its anchor, then translate."""
        rot = np.array(
            [
                [np.cos(rotation), -np.sin(rotation)],
                [np.sin(rotation), np.cos(rotation)],
            ]
        )
        shift = np.asarray(translation, dtype=float)
        anchor = self.anchor
        if self.kind == "ellipse":
            quad = rot @ self.ellipse.quad_form @ rot.T
            low = np.linalg.cholesky(quad)
            moved = EllipseParams(
                anchor + shift, [low[0, 0], low[1, 1], low[1, 0]]
            )
            return GroundTruthTarget("ellipse", ellipse=moved)
        if self.kind == "polygon":
            verts = (self.vertices - anchor) @ rot.T + anchor + shift
            return GroundTruthTarget("polygon", vertices=verts)
        members = (self.members - anchor) @ rot.T + anchor + shift
        return GroundTruthTarget("point_group", members=members)


def ellipse_target(params: EllipseParams) -> GroundTruthTarget:
    return GroundTruthTarget("ellipse", ellipse=params)


def polygon_target(vertices) -> GroundTruthTarget:
    vertices = np.asarray(vertices, dtype=float)
    if vertices.ndim != 2 or vertices.shape[1] != 2 or vertices.shape[0] < 3:
        raise ValueError("polygon needs at least 3 (x, y) vertices")
    _check_simple(vertices)
    _check_star_convex(vertices, polygon_centroid(vertices))
    return GroundTruthTarget("polygon", vertices=vertices)


def group_target(members) -> GroundTruthTarget:
    members = np.atleast_2d(np.asarray(members, dtype=float))
    if members.shape[0] < 1 or members.shape[1] != 2:
        raise ValueError("point group needs at least one (x, y) member")
    return GroundTruthTarget("point_group", members=members)


# ---------------------------------------------------------------------------
# Radius helpers (rejection sampling, scaling-fraction extraction, metrics)


def boundary_radius(target: GroundTruthTarget, phi) -> np.ndarray:
    """Boundary distance from the anchor along angle(s) phi (not for groups)."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if target.kind == "ellipse":
        e = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        quad = np.einsum("...i,ij,...j->...", e, target.ellipse.quad_form, e)
        return 1.0 / np.sqrt(quad)
    if target.kind == "polygon":
        return polygon_radius(target.vertices, target.anchor, phi)
    raise ValueError("point groups have no boundary radius")


def radial_fraction(target: GroundTruthTarget, points) -> np.ndarray:
    """Fraction of the boundary distance at which each point sits (0 at anchor, 1 on the boundary)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    offsets = pts - target.anchor
    rho = np.linalg.norm(offsets, axis=1)
    phi = np.arctan2(offsets[:, 1], offsets[:, 0])
    return rho / boundary_radius(target, phi)


def _bounding_box(target: GroundTruthTarget) -> tuple[np.ndarray, np.ndarray]:
    if target.kind == "ellipse":
        # extremes of {w^T Q w = 1} along the axes: sqrt of diag(Q^{-1})
        quad = target.ellipse.quad_form
        inv = np.linalg.inv(quad)
        half = np.sqrt(np.diag(inv))
        return target.ellipse.center - half, target.ellipse.center + half
    pts = target.vertices if target.kind == "polygon" else target.members
    return pts.min(axis=0), pts.max(axis=0)


def sample_measurement_sources(
    target: GroundTruthTarget, n: int, rng: np.random.Generator
) -> np.ndarray:
    """n measurement sources, uniform over the extent / among group members.

    Interior points come from rejection sampling in the bounding box; a
    call that burns through MAX_REJECTION_ATTEMPTS box draws without
    filling its quota raises RejectionBudgetError.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if target.kind == "point_group":
        return target.members[rng.integers(target.members.shape[0], size=n)].copy()

    lo, hi = _bounding_box(target)
    out = np.empty((n, 2))
    filled = 0
    attempts = 0
    while filled < n:
        if attempts >= MAX_REJECTION_ATTEMPTS:
            raise RejectionBudgetError(
                f"only {filled} of {n} interior points found in {attempts} draws"
            )
        chunk = min(max(4 * (n - filled), 64), 1 << 17)
        draws = rng.uniform(lo, hi, size=(chunk, 2))
        attempts += chunk
        if target.kind == "ellipse":
            inside = ellipse_implicit(target.ellipse, draws) <= 0.0
        else:
            inside = radial_fraction(target, draws) <= 1.0
        accepted = draws[inside]
        take = min(accepted.shape[0], n - filled)
        out[filled : filled + take] = accepted[:take]
        filled += take
    return out


def sample_measurement_source(
    target: GroundTruthTarget, rng: np.random.Generator
) -> np.ndarray:
    """One measurement source (see sample_measurement_sources)."""
    return sample_measurement_sources(target, 1, rng)[0]


def psd_root(cov) -> np.ndarray:
    """A square root F with F Fᵀ = cov, accepting singular PSD matrices."""
    cov = np.asarray(cov, dtype=float)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
        return vecs * np.sqrt(np.clip(vals, 0.0, None))


def generate_measurement(source, noise_cov, rng: np.random.Generator) -> np.ndarray:
    """Measurement = source + zero-mean Gaussian noise (noise_cov may be singular)."""
    source = np.asarray(source, dtype=float).reshape(2)
    factor = psd_root(np.asarray(noise_cov, dtype=float).reshape(2, 2))
    return source + factor @ rng.standard_normal(2)


# ---------------------------------------------------------------------------
# Geometry files


def load_geometry(path) -> GroundTruthTarget:
    """Read a polygon or point-group file.

    Format: one "x y" pair per line; blank lines and "#" comments are
    ignored. A file whose first meaningful line is the word "group" holds
    point-group members; otherwise the pairs are polygon vertices in
    boundary order.
    """
    lines = Path(path).read_text().splitlines()
    rows, is_group = [], False
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not rows and line.lower() == "group":
            is_group = True
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"expected 'x y' per line, got {raw!r}")
        rows.append([float(parts[0]), float(parts[1])])
    if not rows:
        raise ValueError(f"no coordinates in {path}")
    coords = np.array(rows)
    return group_target(coords) if is_group else polygon_target(coords)


def load_waypoints(path) -> np.ndarray:
    """Read an ordered "x y" waypoint list (same comment rules as load_geometry)."""
    rows = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"expected 'x y' per line, got {raw!r}")
        rows.append([float(parts[0]), float(parts[1])])
    if len(rows) < 2:
        raise ValueError(f"need at least two waypoints in {path}")
    return np.array(rows)


def builtin_data_path(name: str) -> Path:
    """Path of a bundled data file (e.g. 'aircraft.txt')."""
    candidate = resources.files("shapetrack").joinpath("data", name)
    with resources.as_file(candidate) as concrete:
        return Path(concrete)
