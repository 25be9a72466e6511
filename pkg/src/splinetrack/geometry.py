"""Polygonal shape vectors: validity, integral properties, partitions, frames.

Shapes are closed linear splines through ``n >= 3`` planar vertices.  The
barycentric frame puts the area barycenter at the origin with the
longitudinal axis along +x; the world frame is reached through a pose
``(g, h)`` by the dewhitener ``V -> U(h) V + g``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BARYCENTRIC = "barycentric"
WORLD = "world"
_FRAMES = (BARYCENTRIC, WORLD)

# tolerances; the geometry-dependent ones are scaled by the shape diameter
COLLINEAR_RTOL = 1e-9
BARYCENTER_ATOL = 1e-6
AREA_ATOL = 1e-12
SYMMETRY_RTOL = 1e-6


class GeometryError(ValueError):
    """Base class for geometry failures."""


class InvalidShapeError(GeometryError):
    """The vertex list does not describe a valid polygon for the operation."""


class DegenerateShapeError(GeometryError):
    """Zero (or numerically zero) enclosed area."""


class DecimationError(GeometryError):
    """Decimation produced an invalid shape."""


@dataclass(frozen=True)
class ShapeVector:
    """Ordered vertex list of a closed polygonal contour.

    Construction only checks array shape and finiteness; use :func:`validate`
    for the full set of shape-vector properties.
    """

    vertices: np.ndarray
    frame: str = WORLD

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise InvalidShapeError(f"expected an (n>=3, 2) vertex array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidShapeError("vertices must be finite")
        if self.frame not in _FRAMES:
            raise ValueError(f"unknown frame {self.frame!r}")
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)

    @property
    def n(self) -> int:
        return self.vertices.shape[0]

    def __len__(self) -> int:
        return self.n

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge start and end points, with wrap V_{n+1} = V_1."""
        return self.vertices, np.roll(self.vertices, -1, axis=0)

    def oriented(self) -> ShapeVector:
        """Counter-clockwise copy, keeping V_1 as the first vertex."""
        if signed_area(self.vertices) >= 0:
            return self
        order = np.r_[0, np.arange(self.n - 1, 0, -1)]
        return ShapeVector(self.vertices[order], self.frame)

    def scaled(self, c: float) -> ShapeVector:
        return ShapeVector(c * self.vertices, self.frame)

    def diameter(self) -> float:
        d = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())


@dataclass(frozen=True)
class Pose:
    """Planar position and heading; heading is stored reduced to [0, 2pi)."""

    g: np.ndarray
    h: float

    def __post_init__(self):
        g = np.array(self.g, dtype=float).reshape(2)
        g.flags.writeable = False
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", float(np.mod(self.h, 2 * np.pi)))


@dataclass(frozen=True)
class EdgePartition:
    """Edges of a polygonal chain with their uniform-mixture weights."""

    starts: np.ndarray
    ends: np.ndarray
    lengths: np.ndarray
    weights: np.ndarray
    cumulative: np.ndarray

    @property
    def n(self) -> int:
        return self.lengths.shape[0]

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())


@dataclass(frozen=True)
class Triangulation:
    """Ear-clipping triangulation: ``triangles[i]`` holds three shape vertices."""

    triangles: np.ndarray
    indices: np.ndarray
    areas: np.ndarray
    weights: np.ndarray
    cumulative: np.ndarray

    @property
    def n(self) -> int:
        return self.areas.shape[0]

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())


@dataclass(frozen=True)
class Check:
    passed: bool
    defect: float


@dataclass(frozen=True)
class ValidityReport:
    """Per-property pass/fail with the measured defect of each property."""

    checks: dict[str, Check] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> dict[str, Check]:
        return {k: c for k, c in self.checks.items() if not c.passed}

    def __getitem__(self, name: str) -> Check:
        return self.checks[name]

    def describe(self) -> str:
        bad = self.failures()
        if not bad:
            return "valid"
        return ", ".join(f"{k} (defect {c.defect:.3g})" for k, c in bad.items())


def rotation(h: float) -> np.ndarray:
    c, s = np.cos(h), np.sin(h)
    return np.array([[c, -s], [s, c]])


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def signed_area(vertices: np.ndarray) -> float:
    v = np.asarray(vertices, dtype=float)
    return float(_cross(v, np.roll(v, -1, axis=0)).sum() / 2)


def interpolate(alpha: float, shape: ShapeVector) -> np.ndarray:
    """Evaluate the closed linear spline at ``alpha`` in [0, 1].

    On ``[(i-1)/n, i/n]`` the point moves linearly from ``V_i`` to
    ``V_{i+1}``; both ends of the parameter range map to ``V_1``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    n = shape.n
    t = alpha * n
    i = min(int(np.floor(t)), n - 1)
    frac = t - i
    v0 = shape.vertices[i]
    v1 = shape.vertices[(i + 1) % n]
    if frac == 0.0:
        return v0.copy()
    return (1.0 - frac) * v0 + frac * v1


def barycenter_area(shape: ShapeVector) -> tuple[np.ndarray, float]:
    """Area barycenter and signed area by the shoelace formula.

    Each edge contributes the triangle it forms with the origin: signed area
    ``det[V_i V_{i+1}] / 2`` and centroid ``(V_i + V_{i+1}) / 3``.
    """
    v0, v1 = shape.edges()
    tri_areas = _cross(v0, v1) / 2
    area = float(tri_areas.sum())
    if abs(area) < AREA_ATOL:
        raise DegenerateShapeError(f"enclosed area {area:.3g} is below {AREA_ATOL}")
    g = (tri_areas[:, None] * (v0 + v1) / 3).sum(axis=0) / area
    return g, area


def contour_length(shape: ShapeVector) -> float:
    v0, v1 = shape.edges()
    return float(np.linalg.norm(v1 - v0, axis=1).sum())


def edge_partition(shape: ShapeVector) -> EdgePartition:
    v0, v1 = shape.edges()
    lengths = np.linalg.norm(v1 - v0, axis=1)
    if np.any(lengths <= 0):
        bad = int(np.argmin(lengths))
        raise InvalidShapeError(f"edge {bad} has zero length")
    weights = lengths / lengths.sum()
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    return EdgePartition(v0.copy(), v1.copy(), lengths, weights, cumulative)


def _segments_intersect(p1, p2, q1, q2, eps):
    """Vectorised closed-segment intersection test (touching counts)."""
    d1 = _cross(q2 - q1, p1 - q1)
    d2 = _cross(q2 - q1, p2 - q1)
    d3 = _cross(p2 - p1, q1 - p1)
    d4 = _cross(p2 - p1, q2 - p1)
    proper = (((d1 > eps) & (d2 < -eps)) | ((d1 < -eps) & (d2 > eps))) & (
        ((d3 > eps) & (d4 < -eps)) | ((d3 < -eps) & (d4 > eps))
    )

    def on_segment(a, b, c, d):
        # c collinear with a-b and inside its bounding box
        return (np.abs(d) <= eps) & (
            (np.minimum(a[..., 0], b[..., 0]) - eps <= c[..., 0])
            & (c[..., 0] <= np.maximum(a[..., 0], b[..., 0]) + eps)
            & (np.minimum(a[..., 1], b[..., 1]) - eps <= c[..., 1])
            & (c[..., 1] <= np.maximum(a[..., 1], b[..., 1]) + eps)
        )

    touching = (
        on_segment(q1, q2, p1, d1)
        | on_segment(q1, q2, p2, d2)
        | on_segment(p1, p2, q1, d3)
        | on_segment(p1, p2, q2, d4)
    )
    return proper | touching


def self_intersections(vertices: np.ndarray) -> int:
    """Number of intersecting pairs of non-adjacent edges."""
    v = np.asarray(vertices, dtype=float)
    n = v.shape[0]
    if n < 4:
        return 0
    a, b = v, np.roll(v, -1, axis=0)
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    scale = max(float(np.abs(v).max()), 1.0)
    eps = 1e-12 * scale * scale
    hits = _segments_intersect(a[i], b[i], a[j], b[j], eps)
    return int(hits.sum())


def _collinearity_defects(v: np.ndarray) -> np.ndarray:
    """Distance of each V_{i+1} from the line through V_i and V_{i+2}."""
    prev, mid, nxt = v, np.roll(v, -1, axis=0), np.roll(v, -2, axis=0)
    chord = nxt - prev
    chord_len = np.linalg.norm(chord, axis=1)
    dist = np.abs(_cross(chord, mid - prev)) / np.where(chord_len > 0, chord_len, 1.0)
    # a zero chord means the middle vertex is a spike folding back on itself
    return np.where(chord_len > 0, dist, 0.0)


def reflection_defect(vertices: np.ndarray) -> float:
    """Mismatch between a contour and its mirror image across the x axis.

    The mirror condition pairs ``V_{1+i}`` with the reflection of
    ``V_{1-i}`` (indices mod n); the pairing is allowed any cyclic offset so
    the check does not depend on which vertex is listed first.
    """
    v = np.asarray(vertices, dtype=float)
    n = v.shape[0]
    mirrored = v * np.array([1.0, -1.0])
    idx = np.arange(n)
    best = np.inf
    for s in range(n):
        partner = mirrored[(s - idx) % n]
        best = min(best, float(np.linalg.norm(v - partner, axis=1).max()))
    return best


def validate(shape: ShapeVector) -> ValidityReport:
    """Check every shape-vector property and report the measured defects."""
    v = shape.vertices
    n = shape.n
    diam = shape.diameter()
    checks: dict[str, Check] = {}

    d = np.sqrt(((v[:, None, :] - v[None, :, :]) ** 2).sum(-1))
    d[np.diag_indices(n)] = np.inf
    min_sep = float(d.min())
    checks["distinct_vertices"] = Check(min_sep > 0.0, min_sep)

    col = _collinearity_defects(v)
    worst = float(col.min())
    checks["non_collinear"] = Check(worst > COLLINEAR_RTOL * diam, worst)

    crossings = self_intersections(v)
    checks["simple"] = Check(crossings == 0, float(crossings))

    area = signed_area(v)
    checks["counter_clockwise"] = Check(area > AREA_ATOL, area)

    if shape.frame == BARYCENTRIC:
        try:
            g, _ = barycenter_area(shape)
            off = float(np.linalg.norm(g))
        except DegenerateShapeError:
            off = np.inf
        checks["barycenter_at_origin"] = Check(off <= BARYCENTER_ATOL, off)
        sym = reflection_defect(v)
        checks["reflection_symmetry"] = Check(sym <= SYMMETRY_RTOL * diam, sym)
    return ValidityReport(checks)


def _point_in_triangle(p, a, b, c, eps):
    d1 = _cross(b - a, p - a)
    d2 = _cross(c - b, p - b)
    d3 = _cross(a - c, p - c)
    return (d1 >= -eps) & (d2 >= -eps) & (d3 >= -eps)


def triangulate(shape: ShapeVector) -> Triangulation:
    """Split a simple polygon into ``n - 2`` triangles by ear clipping.

    Worst case O(n^3); meant to run once per dictionary entry.
    """
    if self_intersections(shape.vertices):
        raise InvalidShapeError("cannot triangulate a self-intersecting contour")
    v = shape.vertices
    ccw = signed_area(v) > 0
    remaining = list(range(shape.n)) if ccw else list(range(shape.n))[::-1]
    scale = max(float(np.abs(v).max()), 1.0)
    eps = 1e-12 * scale * scale

    out: list[tuple[int, int, int]] = []
    while len(remaining) > 3:
        m = len(remaining)
        for k in range(m):
            i0, i1, i2 = remaining[k - 1], remaining[k], remaining[(k + 1) % m]
            a, b, c = v[i0], v[i1], v[i2]
            if _cross(b - a, c - b) <= eps:
                continue  # reflex or flat corner
            others = [r for r in remaining if r not in (i0, i1, i2)]
            if others and np.any(_point_in_triangle(v[others], a, b, c, eps)):
                continue
            out.append((i0, i1, i2))
            del remaining[k]
            break
        else:
            raise InvalidShapeError("ear clipping found no ear; polygon is not simple")
    out.append(tuple(remaining))

    indices = np.array(out, dtype=int)
    triangles = v[indices]
    a, b, c = triangles[:, 0], triangles[:, 1], triangles[:, 2]
    areas = np.abs(_cross(b - a, c - a)) / 2
    weights = areas / areas.sum()
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    return Triangulation(triangles, indices, areas, weights, cumulative)


def dewhiten(shape: ShapeVector, pose: Pose) -> ShapeVector:
    """Place a barycentric shape at a world pose: ``V_i -> U(h) V_i + g``."""
    return ShapeVector(shape.vertices @ rotation(pose.h).T + pose.g, WORLD)


def whiten(shape: ShapeVector, pose: Pose) -> ShapeVector:
    """Inverse of :func:`dewhiten`."""
    return ShapeVector(whiten_points(shape.vertices, pose), BARYCENTRIC)


def whiten_points(points: np.ndarray, pose: Pose) -> np.ndarray:
    """Map world points into the frame of ``pose``: ``U(h)^T (y - g)``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    return (pts - pose.g) @ rotation(pose.h)


def dewhiten_points(points: np.ndarray, pose: Pose) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    return pts @ rotation(pose.h).T + pose.g


def point_in_polygon(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Even-odd crossing test, vectorised over points."""
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    v = np.asarray(vertices, dtype=float)
    x, y = p[:, 0:1], p[:, 1:2]
    x0, y0 = v[:, 0], v[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    straddle = (y0 <= y) != (y1 <= y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    crossings = straddle & (x < xc)
    return (crossings.sum(axis=1) % 2).astype(bool)


def point_segment_distance(points: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Distances from each point to each segment, shape (points, segments)."""
    p = np.asarray(points, dtype=float).reshape(-1, 2)[:, None, :]
    a, b = starts[None, :, :], ends[None, :, :]
    ab = b - a
    denom = (ab**2).sum(-1)
    t = np.clip(((p - a) * ab).sum(-1) / np.where(denom > 0, denom, 1.0), 0.0, 1.0)
    return np.linalg.norm(p - (a + t[..., None] * ab), axis=-1)


def _rdp_keep(points: np.ndarray, tol: float) -> np.ndarray:
    """Ramer-Douglas-Peucker on an open chain; endpoints always kept."""
    keep = np.zeros(len(points), dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, len(points) - 1)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        d = point_segment_distance(points[lo + 1 : hi], points[lo : lo + 1], points[hi : hi + 1])[:, 0]
        k = int(np.argmax(d))
        if d[k] > tol:
            mid = lo + 1 + k
            keep[mid] = True
            stack.append((lo, mid))
            stack.append((mid, hi))
    return keep


def decimate(shape: ShapeVector, tol: float) -> ShapeVector:
    """Drop vertices whose removal moves the contour by at most ``tol``.

    Mirror-symmetric shapes are simplified on one half and the result is
    mirrored, so the symmetry survives decimation.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    v = shape.vertices
    n = shape.n
    keep = np.zeros(n, dtype=bool)

    sym_pairs = None
    if shape.frame == BARYCENTRIC and reflection_defect(v) <= SYMMETRY_RTOL * shape.diameter():
        mirrored = v * np.array([1.0, -1.0])
        idx = np.arange(n)
        offsets = [np.linalg.norm(v - mirrored[(s - idx) % n], axis=1).max() for s in range(n)]
        s = int(np.argmin(offsets))
        sym_pairs = (s - idx) % n

    if sym_pairs is not None:
        # walk from a vertex fixed by the mirror (or a mirrored pair) to its antipode
        start = next((i for i in range(n) if sym_pairs[i] == i), None)
        if start is None:
            start = next(i for i in range(n) if sym_pairs[i] == (i - 1) % n)
        half = n // 2
        chain = [(start + j) % n for j in range(half + 1)]
        sub = _rdp_keep(v[chain], tol)
        for j, i in enumerate(chain):
            if sub[j]:
                keep[i] = True
                keep[sym_pairs[i]] = True
    else:
        far = int(np.argmax(np.linalg.norm(v - v[0], axis=1)))
        first = list(range(0, far + 1))
        second = list(range(far, n)) + [0]
        keep[first] = _rdp_keep(v[first], tol)
        keep[second[:-1]] |= _rdp_keep(v[second], tol)[:-1]

    out = v[keep]
    if out.shape[0] < 3:
        raise DecimationError(f"only {out.shape[0]} vertices survive tol={tol}")
    result = ShapeVector(out, shape.frame)
    if self_intersections(out):
        raise DecimationError("decimated contour intersects itself")
    if sym_pairs is not None and reflection_defect(out) > SYMMETRY_RTOL * shape.diameter():
        raise DecimationError("decimation broke the mirror symmetry")
    return result
