"""Measurement likelihoods for polygonal contours and surfaces, in log space.

The contour likelihood is exact: each edge contributes the Gaussian kernel
integrated along the segment, which after completing the square is a
difference of normal CDFs.  The surface likelihood is a Monte Carlo average
of Gaussian kernels centred on particles drawn uniformly inside the polygon.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import erf, gammaln, log_ndtr, xlog1py, xlogy

from .geometry import EdgePartition, ShapeVector, Triangulation
from .scattering import CONTOUR, SURFACE, CardinalityParams, Dataset, sample_surface_points

if TYPE_CHECKING:
    from .shaper import DictionaryEntry

LOG_2PI = float(np.log(2 * np.pi))
EDGE_RTOL = 1e-9
# rows of measurements processed per block in the particle kernel
_MC_BLOCK = 1 << 20
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


class ParameterError(ValueError):
    """Invalid likelihood parameter (e.g. a covariance that is not SPD)."""


class PreconditionError(RuntimeError):
    """A class entry lacks the precomputation a likelihood needs."""


@dataclass(frozen=True)
class NoiseModel:
    """Cholesky factorisation of a 2x2 SPD covariance, reused across calls."""

    R: np.ndarray
    inv_chol_T: np.ndarray
    half_logdet: float

    @classmethod
    def of(cls, R) -> NoiseModel:
        if isinstance(R, NoiseModel):
            return R
        R = np.asarray(R, dtype=float)
        if R.shape != (2, 2) or not np.all(np.isfinite(R)) or abs(R[0, 1] - R[1, 0]) > 1e-12 * abs(R).max():
            raise ParameterError("R must be a finite symmetric 2x2 matrix")
        try:
            L = np.linalg.cholesky(R)
        except np.linalg.LinAlgError as exc:
            raise ParameterError("R is not positive definite") from exc
        Linv = np.linalg.inv(L)
        return cls(R, Linv.T, float(np.log(np.diag(L)).sum()))

    def whiten(self, x: np.ndarray) -> np.ndarray:
        return x @ self.inv_chol_T

    def log_norm(self) -> float:
        """Log normaliser of the bivariate Gaussian density."""
        return -LOG_2PI - self.half_logdet


@dataclass(frozen=True)
class ParticleSet:
    particles: np.ndarray
    source: str
    seed: int

    @property
    def N(self) -> int:
        return self.particles.shape[0]


def log_delta_phi(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """``log(Phi(hi) - Phi(lo))`` for ``lo <= hi`` without underflow.

    Narrow intervals, where the normal density changes by less than a factor
    of ``e`` across ``[lo, hi]``, are integrated by Gauss-Legendre quadrature
    to avoid cancellation.  Wider intervals entirely in one tail use that
    tail's log-CDF; wider intervals straddling zero add two ``erf`` terms.
    """
    lo, hi = np.broadcast_arrays(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
    out = np.empty(lo.shape)
    width = hi - lo
    narrow = (width * np.maximum(np.maximum(np.abs(lo), np.abs(hi)), 1.0) < 1.0) & (width > 0)
    right = (lo > 0) & ~narrow
    left = (hi < 0) & ~narrow
    mid = ~(right | left | narrow)
    with np.errstate(divide="ignore"):
        if np.any(narrow):
            w, a = width[narrow], lo[narrow]
            x = a[:, None] + 0.5 * w[:, None] * (_GL_NODES[None, :] + 1.0)
            e = -0.5 * x**2
            top = e.max(axis=1)
            out[narrow] = np.log(0.5 * w) - 0.5 * LOG_2PI + top + np.log(np.exp(e - top[:, None]) @ _GL_WEIGHTS)
        if np.any(right):
            a, b = log_ndtr(-lo[right]), log_ndtr(-hi[right])
            out[right] = a + np.log(-np.expm1(b - a))
        if np.any(left):
            a, b = log_ndtr(hi[left]), log_ndtr(lo[left])
            out[left] = a + np.log(-np.expm1(b - a))
        if np.any(mid):
            s = np.sqrt(0.5)
            out[mid] = np.log(0.5 * (erf(hi[mid] * s) + erf(-lo[mid] * s)))
    return out


def edge_loglik_matrix(Y: np.ndarray, starts: np.ndarray, ends: np.ndarray, R) -> np.ndarray:
    """Log single-edge likelihoods for every (measurement, edge) pair.

    Returns an ``(m, n)`` array.  In whitened coordinates the edge is
    ``A alpha + B`` with ``A = V_i - V_{i+1}``, ``B = y - V_i``; the result is
    ``-log 2pi - log|L| - d^2/2 + log(sqrt(2pi/a)) + log dPhi`` where ``d`` is
    the distance from ``y`` to the supporting line and ``a = |A|^2``.
    """
    nm = NoiseModel.of(R)
    Y = np.asarray(Y, dtype=float).reshape(-1, 2)
    starts = np.asarray(starts, dtype=float).reshape(-1, 2)
    ends = np.asarray(ends, dtype=float).reshape(-1, 2)

    A = nm.whiten(starts - ends)  # (n, 2)
    B = nm.whiten(Y[:, None, :] - starts[None, :, :])  # (m, n, 2)
    sqrt_a = np.linalg.norm(A, axis=1)

    scale = np.maximum(np.maximum(np.linalg.norm(starts, axis=1), np.linalg.norm(ends, axis=1)), 1.0)
    degenerate = np.linalg.norm(ends - starts, axis=1) < EDGE_RTOL * scale

    point_term = nm.log_norm() - 0.5 * (B**2).sum(-1)
    if np.all(degenerate):
        return point_term

    safe = np.where(degenerate, 1.0, sqrt_a)
    unit = A / safe[:, None]
    lo = (B * unit[None]).sum(-1)  # b / sqrt(a)
    hi = lo + safe[None, :]
    perp = B - lo[..., None] * unit[None]
    d2 = (perp**2).sum(-1)
    line_term = nm.log_norm() - 0.5 * d2 + 0.5 * LOG_2PI - np.log(safe)[None, :] + log_delta_phi(lo, hi)
    return np.where(degenerate[None, :], point_term, line_term)


def edge_loglik(y, v0, v1, R) -> float:
    """Log-likelihood of one measurement for scatterers uniform on one segment."""
    return float(edge_loglik_matrix(np.reshape(y, (1, 2)), np.reshape(v0, (1, 2)), np.reshape(v1, (1, 2)), R)[0, 0])


def contour_loglik(Y: np.ndarray, partition: EdgePartition, R) -> np.ndarray:
    """Per-measurement log-likelihoods under uniform contour scattering."""
    M = edge_loglik_matrix(Y, partition.starts, partition.ends, R)
    with np.errstate(divide="ignore"):
        M += np.log(partition.weights)[None, :]
    return _row_logsumexp(M)


def _row_logsumexp(M: np.ndarray) -> np.ndarray:
    """Row-wise log-sum-exp; rows that are entirely ``-inf`` give ``-inf``."""
    top = M.max(axis=1)
    safe = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(divide="ignore"):
        return safe + np.log(np.exp(M - safe[:, None]).sum(axis=1))


def build_particles(shape: ShapeVector, tri: Triangulation, N: int, seed: int, source: str = "") -> ParticleSet:
    if N < 1:
        raise ValueError("N must be at least 1")
    rng = np.random.default_rng(seed)
    pts = sample_surface_points(tri, N, rng)
    pts.flags.writeable = False
    return ParticleSet(pts, source, seed)


def mc_loglik(Y: np.ndarray, particles: ParticleSet | np.ndarray, R) -> np.ndarray:
    """Per-measurement log of the particle average of Gaussian kernels."""
    nm = NoiseModel.of(R)
    Z = particles.particles if isinstance(particles, ParticleSet) else np.asarray(particles, dtype=float)
    if Z.shape[0] < 1:
        raise ValueError("empty particle set")
    Y = np.asarray(Y, dtype=float).reshape(-1, 2)
    Yw, Zw = nm.whiten(Y), nm.whiten(Z)
    N = Zw.shape[0]
    out = np.empty(Y.shape[0])
    step = max(1, _MC_BLOCK // N)
    for s in range(0, Y.shape[0], step):
        d = Yw[s : s + step, None, :] - Zw[None, :, :]
        out[s : s + step] = _row_logsumexp(-0.5 * (d**2).sum(-1))
    return out - np.log(N) + nm.log_norm()


def binomial_logpmf(m: int, params: CardinalityParams) -> float:
    """``log[C(mu, m) pi^m (1 - pi)^(mu - m)]``; ``-inf`` outside the support."""
    mu, pi = params.mu, params.pi
    if m < 0 or m > mu:
        return -np.inf
    return float(gammaln(mu + 1) - gammaln(m + 1) - gammaln(mu - m + 1) + xlogy(m, pi) + xlog1py(mu - m, -pi))


def spatial_loglik(Y: np.ndarray, entry: DictionaryEntry, kind: str, R) -> np.ndarray:
    if kind == CONTOUR:
        return contour_loglik(Y, entry.partition, R)
    if kind == SURFACE:
        if entry.particles is None:
            raise PreconditionError(f"class {entry.name!r} has no particle set for the surface likelihood")
        return mc_loglik(Y, entry.particles, R)
    raise ValueError(f"unknown sensor kind {kind!r}")


def dataset_loglik(Y: Dataset | np.ndarray, entry: DictionaryEntry, kind: str, R_plus) -> float:
    """Cardinality log-probability plus the sum of per-measurement log-likelihoods."""
    pts = Y.points if isinstance(Y, Dataset) else np.asarray(Y, dtype=float).reshape(-1, 2)
    params = entry.cardinality.get(kind)
    if params is None:
        raise PreconditionError(f"class {entry.name!r} has no cardinality model for {kind!r} sensors")
    card = binomial_logpmf(pts.shape[0], params)
    if pts.shape[0] == 0 or card == -np.inf:
        return card
    return card + float(spatial_loglik(pts, entry, kind, R_plus).sum())
