"""Scattering-point sampling, binomial cardinality and sensor scan simulation."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .geometry import (
    EdgePartition,
    ShapeVector,
    Triangulation,
    contour_length,
    edge_partition,
    signed_area,
    triangulate,
)

log = logging.getLogger(__name__)

CONTOUR = "contour"
SURFACE = "surface"
SENSOR_KINDS = (CONTOUR, SURFACE)


@dataclass(frozen=True)
class SensorConfig:
    """A contour or surface sensor.

    ``resolution`` is in metres for contour sensors and square metres for
    surface sensors; ``eta`` is the lighting power in [0, 1].
    """

    kind: str
    R: np.ndarray
    resolution: float
    eta: float = 0.9
    period: float = 0.1

    def __post_init__(self):
        if self.kind not in SENSOR_KINDS:
            raise ValueError(f"sensor kind must be one of {SENSOR_KINDS}, got {self.kind!r}")
        R = np.array(self.R, dtype=float).reshape(2, 2)
        if not np.allclose(R, R.T) or np.any(np.linalg.eigvalsh(R) <= 0):
            raise ValueError("noise covariance R must be symmetric positive definite")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.period <= 0:
            raise ValueError("scan period must be positive")
        R.flags.writeable = False
        object.__setattr__(self, "R", R)

    @classmethod
    def isotropic(cls, kind: str, sigma: float, resolution: float, eta: float = 0.9, period: float = 0.1):
        return cls(kind, sigma**2 * np.eye(2), resolution, eta, period)

    @classmethod
    def from_dict(cls, d: dict) -> SensorConfig:
        if "R" in d:
            R = np.asarray(d["R"], dtype=float)
        else:
            sigma = float(d["sigma"])
            if not sigma > 0:
                raise ValueError(f"sigma must be positive, got {sigma}")
            R = sigma**2 * np.eye(2)
        return cls(
            kind=d["kind"],
            R=R,
            resolution=float(d["resolution"]),
            eta=float(d.get("eta", 0.9)),
            period=float(d.get("period", 0.1)),
        )


@dataclass(frozen=True)
class CardinalityParams:
    """Binomial cardinality: ``mu`` trials with success probability ``pi``."""

    mu: int
    pi: float

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")
        if not 0.0 <= self.pi <= 1.0:
            raise ValueError("pi must lie in [0, 1]")

    @property
    def mean(self) -> float:
        return self.mu * self.pi

    @property
    def variance(self) -> float:
        return self.mu * self.pi * (1 - self.pi)


@dataclass(frozen=True)
class Dataset:
    """Measurements collected in one sensor scan (possibly none)."""

    points: np.ndarray
    k: int = 0

    def __post_init__(self):
        p = np.array(self.points, dtype=float).reshape(-1, 2)
        p.flags.writeable = False
        object.__setattr__(self, "points", p)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.m


def cardinality_params(shape: ShapeVector, sensor: SensorConfig, reflectivity: float = 1.0) -> CardinalityParams:
    """Trials from object size over sensor resolution, success from reflectivity times lighting."""
    if not 0.0 <= reflectivity <= 1.0:
        raise ValueError("reflectivity must lie in [0, 1]")
    if sensor.kind == CONTOUR:
        measure = contour_length(shape)
    else:
        measure = abs(signed_area(shape.vertices))
    # round half up, matching the nearest-integer bracket for positive sizes
    mu = int(np.floor(measure / sensor.resolution + 0.5))
    if mu == 0:
        log.warning("object (%s %.3g) is below sensor resolution %.3g", sensor.kind, measure, sensor.resolution)
    return CardinalityParams(mu, reflectivity * sensor.eta)


def sample_cardinality(params: CardinalityParams, rng: np.random.Generator) -> int:
    return int(rng.binomial(params.mu, params.pi))


def contour_points(partition: EdgePartition, edge_u: np.ndarray, along: np.ndarray) -> np.ndarray:
    """Map uniforms to contour points by inverse-transform edge selection."""
    idx = np.minimum(np.searchsorted(partition.cumulative, edge_u, side="right"), partition.n - 1)
    t = np.asarray(along)[..., None]
    return (1 - t) * partition.starts[idx] + t * partition.ends[idx]


def sample_contour_points(partition: EdgePartition, size: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random((size, 2))
    return contour_points(partition, u[:, 0], u[:, 1])


def sample_contour_point(partition: EdgePartition, rng: np.random.Generator) -> np.ndarray:
    return sample_contour_points(partition, 1, rng)[0]


def triangle_point(tri: np.ndarray, a1, a2) -> np.ndarray:
    """Barycentric combination ``(1-sqrt a1) V1 + sqrt a1 (1-a2) V2 + sqrt a1 a2 V3``.

    Uniform on the triangle when ``a1, a2`` are independent U(0, 1).
    """
    tri = np.asarray(tri, dtype=float)
    r = np.sqrt(np.asarray(a1, dtype=float))[..., None]
    a2 = np.asarray(a2, dtype=float)[..., None]
    v1, v2, v3 = tri[..., 0, :], tri[..., 1, :], tri[..., 2, :]
    return (1 - r) * v1 + r * (1 - a2) * v2 + r * a2 * v3


def sample_triangle_point(tri: np.ndarray, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    if size is None:
        a1, a2 = rng.random(2)
    else:
        u = rng.random((size, 2))
        a1, a2 = u[:, 0], u[:, 1]
    return triangle_point(tri, a1, a2)


def sample_surface_points(tri: Triangulation, size: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random((size, 3))
    idx = np.minimum(np.searchsorted(tri.cumulative, u[:, 0], side="right"), tri.n - 1)
    return triangle_point(tri.triangles[idx], u[:, 1], u[:, 2])


def sample_surface_point(tri: Triangulation, rng: np.random.Generator) -> np.ndarray:
    return sample_surface_points(tri, 1, rng)[0]


def sample_scattering(kind: str, partition: EdgePartition | None, tri: Triangulation | None, size: int, rng):
    if kind == CONTOUR:
        return sample_contour_points(partition, size, rng)
    return sample_surface_points(tri, size, rng)


def noise(R: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    L = np.linalg.cholesky(np.asarray(R, dtype=float))
    return rng.standard_normal((size, 2)) @ L.T


def generate_scan(
    shape_world: ShapeVector,
    sensor: SensorConfig,
    params: CardinalityParams,
    rng: np.random.Generator,
    k: int = 0,
    *,
    partition: EdgePartition | None = None,
    triangulation: Triangulation | None = None,
) -> Dataset:
    """Simulate one scan: binomial count, uniform scatterers, Gaussian noise.

    Precomputed ``partition``/``triangulation`` of ``shape_world`` may be
    passed to skip rebuilding them.
    """
    m = sample_cardinality(params, rng)
    if m == 0:
        return Dataset(np.empty((0, 2)), k)
    if sensor.kind == CONTOUR:
        partition = partition or edge_partition(shape_world)
    else:
        triangulation = triangulation or triangulate(shape_world)
    z = sample_scattering(sensor.kind, partition, triangulation, m, rng)
    return Dataset(z + noise(sensor.R, m, rng), k)
