"""Position, overlap and contour-distance scores for shape estimates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ShapeVector, point_segment_distance

IOU_CELLS = 512
CHAMFER_SAMPLES = 1024


@dataclass(frozen=True)
class ScanScore:
    k: int
    npe: float
    iou: float
    chd: float


def npe(g_true, g_est, rho_min: float) -> float:
    """Position error normalised by the object's inner radius."""
    if rho_min <= 0:
        raise ValueError("rho_min must be positive")
    return float(np.linalg.norm(np.asarray(g_true, float) - np.asarray(g_est, float)) / rho_min)


def inner_radius(shape: ShapeVector, center=(0.0, 0.0)) -> float:
    """Distance from ``center`` to the nearest contour point."""
    v0, v1 = shape.edges()
    return float(point_segment_distance(np.asarray(center, float), v0, v1).min())


def outer_radius(shape: ShapeVector, center=(0.0, 0.0)) -> float:
    return float(np.linalg.norm(shape.vertices - np.asarray(center, float), axis=1).max())


def iou(a: ShapeVector, b: ShapeVector, cell: float | None = None) -> float:
    """Intersection over union of two polygon interiors by rasterisation.

    Cell centres on a regular grid over the joint bounding box are tested
    against both polygons.  The default cell is the smaller diameter / 512.
    """
    if cell is None:
        cell = min(a.diameter(), b.diameter()) / IOU_CELLS
    if cell <= 0:
        raise ValueError("cell size must be positive")
    lo = np.minimum(a.vertices.min(0), b.vertices.min(0))
    hi = np.maximum(a.vertices.max(0), b.vertices.max(0))
    nx, ny = (np.ceil((hi - lo) / cell).astype(int) + 1).tolist()
    ina = raster_mask(a.vertices, lo, cell, nx, ny)
    inb = raster_mask(b.vertices, lo, cell, nx, ny)
    union = np.count_nonzero(ina | inb)
    if union == 0:
        raise ValueError("both shapes have zero rasterised area")
    return np.count_nonzero(ina & inb) / union


def raster_mask(vertices: np.ndarray, lo: np.ndarray, cell: float, nx: int, ny: int) -> np.ndarray:
    """Even-odd inside test of every cell centre, one scanline per grid row.

    Cell ``(r, c)`` has centre ``lo + ((c, r) + 1/2) * cell``.  An edge
    crossing a row at ``xc`` flips the parity of every cell centre left of
    ``xc``, which is accumulated with a running sum.
    """
    v = np.asarray(vertices, dtype=float)
    x0, y0 = v[:, 0], v[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    yc = lo[1] + (np.arange(ny) + 0.5) * cell
    Y = yc[:, None]
    straddle = (y0 <= Y) != (y1 <= Y)
    rows, edges = np.nonzero(straddle)
    t = (yc[rows] - y0[edges]) / (y1[edges] - y0[edges])
    xc = x0[edges] + t * (x1[edges] - x0[edges])
    J = np.clip(np.ceil((xc - lo[0]) / cell - 0.5), 0, nx).astype(int)
    flips = np.zeros((ny, nx + 1), dtype=np.int32)
    np.add.at(flips, (rows, np.zeros_like(rows)), 1)
    np.add.at(flips, (rows, J), -1)
    return (np.cumsum(flips, axis=1)[:, :nx] % 2).astype(bool)


def contour_samples(shape: ShapeVector, K: int) -> np.ndarray:
    """``K`` points at arc-length midpoints ``(j + 1/2) L / K`` along the contour."""
    v0, v1 = shape.edges()
    lengths = np.linalg.norm(v1 - v0, axis=1)
    cum = np.r_[0.0, np.cumsum(lengths)]
    s = (np.arange(K) + 0.5) * cum[-1] / K
    idx = np.minimum(np.searchsorted(cum, s, side="right") - 1, shape.n - 1)
    t = ((s - cum[idx]) / lengths[idx])[:, None]
    return (1 - t) * v0[idx] + t * v1[idx]


def one_sided_chamfer(a: ShapeVector, b: ShapeVector, K: int = CHAMFER_SAMPLES) -> float:
    """Arc-length mean over ``a`` of the distance to the nearest point of ``b``."""
    pts = contour_samples(a, K)
    v0, v1 = b.edges()
    return float(point_segment_distance(pts, v0, v1).min(axis=1).mean())


def chamfer(a: ShapeVector, b: ShapeVector, K: int = CHAMFER_SAMPLES) -> float:
    if K < 16:
        raise ValueError("K must be at least 16")
    return 0.5 * (one_sided_chamfer(a, b, K) + one_sided_chamfer(b, a, K))
