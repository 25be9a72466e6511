"""Extended Kalman tracker driven by static pose estimates from each scan."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import motion
from .motion import GX, GY, H
from .scattering import Dataset

HEADING_EPS = 1e-3


class FilterDivergence(RuntimeError):
    pass


def _sym(P: np.ndarray) -> np.ndarray:
    return 0.5 * (P + P.T)


@dataclass(frozen=True)
class TrackerState:
    """Estimate ``x``, covariance ``P``, process noise ``Q`` and virtual-measurement noise ``E``."""

    x: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        for name, shape in (("x", (6,)), ("P", (6, 6)), ("Q", (6, 6)), ("E", (3, 3))):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            object.__setattr__(self, name, arr)

    @property
    def position(self) -> np.ndarray:
        return self.x[GX : GY + 1].copy()

    @property
    def heading(self) -> float:
        return float(np.mod(self.x[H], 2 * np.pi))


def predict(state: TrackerState, T: float) -> TrackerState:
    """EKF time update: ``x+ = x + T F(x, 0)``, ``P+ = Jx P Jx' + Jw Q Jw'``."""
    Jx, Jw = motion.jacobians(state.x, T)
    x = motion.step(state.x, None, T)
    P = _sym(Jx @ state.P @ Jx.T + Jw @ state.Q @ Jw.T)
    return replace(state, x=x, P=P)


def static_estimates(Y: Dataset | np.ndarray, g_prev, eps: float = HEADING_EPS):
    """Dataset mean and the heading of its displacement from ``g_prev``.

    Returns ``None`` for an empty scan.  The heading is ``None`` when the
    displacement is shorter than ``eps`` and therefore carries no direction.
    """
    pts = Y.points if isinstance(Y, Dataset) else np.asarray(Y, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        return None
    g_hat = pts.mean(axis=0)
    d = g_hat - np.asarray(g_prev, dtype=float)
    if np.hypot(d[0], d[1]) <= eps:
        return g_hat, None
    return g_hat, float(np.mod(np.arctan2(d[1], d[0]), 2 * np.pi))


def correct(state: TrackerState, yv) -> TrackerState:
    """Kalman update on the virtual measurement ``(g_hat, h_hat)``.

    A 2-vector ``yv`` corrects position only.  The heading innovation is
    wrapped to (-pi, pi] before the gain is applied.
    """
    yv = np.asarray(yv, dtype=float)
    p = yv.shape[0]
    if p not in (2, 3):
        raise ValueError("virtual measurement must be (gx, gy) or (gx, gy, h)")
    C = np.eye(6)[:p]
    E = state.E[:p, :p]
    S = C @ state.P @ C.T + E
    try:
        L = np.linalg.solve(S, C @ state.P).T
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("singular innovation covariance") from exc
    innov = yv - C @ state.x
    if p == 3:
        innov[2] = motion.wrap_angle(innov[2])
    x = motion.wrap_heading(state.x + L @ innov)
    P = _sym((np.eye(6) - L @ C) @ state.P)
    return replace(state, x=x, P=P)


class Tracker:
    """Single-target tracker owning its state between scans.

    Several datasets may arrive at one scan instant (e.g. a contour and a
    surface sensor); they share one prediction and are applied as sequential
    corrections, each taking its heading from the displacement with respect
    to the position estimate of the previous instant.
    """

    def __init__(self, state: TrackerState, eps: float = HEADING_EPS):
        self.state = state
        self.eps = eps

    def step(self, datasets, T: float) -> TrackerState:
        g_prev = self.state.position
        st = predict(self.state, T)
        for Y in datasets:
            est = static_estimates(Y, g_prev, self.eps)
            if est is None:
                continue
            g_hat, h_hat = est
            yv = g_hat if h_hat is None else np.r_[g_hat, h_hat]
            st = correct(st, yv)
        if not (np.all(np.isfinite(st.x)) and np.all(np.isfinite(st.P))):
            raise FilterDivergence(f"non-finite tracker state {st.x}")
        self.state = st
        return st
