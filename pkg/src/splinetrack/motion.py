"""Kinematic 2:1 motion model with a Tustin position step.

State layout: ``[gx, gy, h, s, sdot, omega]`` (position, heading, speed,
speed rate, turn rate).  Process noise has the same layout and enters both
inside the Tustin average (through the next heading and speed) and
additively.
"""

from __future__ import annotations

import numpy as np

GX, GY, H, S, SDOT, OMEGA = range(6)
STATE_DIM = 6


def make_state(g=(0.0, 0.0), h=0.0, s=0.0, sdot=0.0, omega=0.0) -> np.ndarray:
    return np.array([g[0], g[1], h, s, sdot, omega], dtype=float)


def wrap_angle(a):
    """Reduce to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2 * np.pi)


def wrap_heading(x: np.ndarray) -> np.ndarray:
    out = np.array(x, dtype=float)
    out[H] = np.mod(out[H], 2 * np.pi)
    return out


def tustin_velocity(x: np.ndarray, w: np.ndarray, T: float) -> np.ndarray:
    """Average of the velocity vectors at the current and next (h, s)."""
    h1 = x[H] + T * x[OMEGA] + w[H]
    s1 = x[S] + T * x[SDOT] + w[S]
    return 0.5 * (s1 * np.array([np.cos(h1), np.sin(h1)]) + x[S] * np.array([np.cos(x[H]), np.sin(x[H])]))


def drift(x: np.ndarray, w: np.ndarray, T: float) -> np.ndarray:
    """``F(x, w) = [f', omega, sdot, 0]'`` with its zero last row covering sdot and omega."""
    F = np.zeros(STATE_DIM)
    F[GX:H] = tustin_velocity(x, w, T)
    F[H] = x[OMEGA]
    F[S] = x[SDOT]
    return F


def step(x: np.ndarray, w: np.ndarray | None, T: float, wrap: bool = True) -> np.ndarray:
    """``x_{k+1} = x_k + T F(x_k, w_k) + w_k``."""
    if T <= 0:
        raise ValueError("T must be positive")
    x = np.asarray(x, dtype=float)
    w = np.zeros(STATE_DIM) if w is None else np.asarray(w, dtype=float)
    nxt = x + T * drift(x, w, T) + w
    return wrap_heading(nxt) if wrap else nxt


def jacobians(x: np.ndarray, T: float) -> tuple[np.ndarray, np.ndarray]:
    """Partials of :func:`step` at ``(x, w=0)``.

    ``J_x = I + T dF/dx``.  The noise Jacobian includes the additive path as
    well as the Tustin term: ``J_w = I + T dF/dw``.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    x = np.asarray(x, dtype=float)
    h, s, sdot, om = x[H], x[S], x[SDOT], x[OMEGA]
    h1, s1 = h + T * om, s + T * sdot
    c0, n0 = np.cos(h), np.sin(h)
    c1, n1 = np.cos(h1), np.sin(h1)

    # df/dh1 and df/ds1, the sensitivities to the next heading and speed
    df_dh1 = 0.5 * s1 * np.array([-n1, c1])
    df_ds1 = 0.5 * np.array([c1, n1])

    dF_dx = np.zeros((STATE_DIM, STATE_DIM))
    dF_dx[GX:H, H] = df_dh1 + 0.5 * s * np.array([-n0, c0])
    dF_dx[GX:H, S] = df_ds1 + 0.5 * np.array([c0, n0])
    dF_dx[GX:H, SDOT] = T * df_ds1
    dF_dx[GX:H, OMEGA] = T * df_dh1
    dF_dx[H, OMEGA] = 1.0
    dF_dx[S, SDOT] = 1.0

    dF_dw = np.zeros((STATE_DIM, STATE_DIM))
    dF_dw[GX:H, H] = df_dh1
    dF_dw[GX:H, S] = df_ds1

    eye = np.eye(STATE_DIM)
    return eye + T * dF_dx, eye + T * dF_dw


def propagate_schedule(x0: np.ndarray, segments, T: float, n_steps: int) -> np.ndarray:
    """Noise-free trajectory driven by piecewise-constant ``(sdot, omega)``.

    ``segments`` is a sequence of ``(duration, sdot, omega)``; each segment
    overrides the state's speed rate and turn rate while it is active, and
    the last one stays active past its end.  Returns ``(n_steps, 6)`` states
    at ``t = k T``.
    """
    x = np.array(x0, dtype=float)
    bounds = np.cumsum([seg[0] for seg in segments]) if segments else np.array([])
    out = np.empty((n_steps, STATE_DIM))
    for k in range(n_steps):
        t = k * T
        if len(bounds):
            j = min(int(np.searchsorted(bounds, t + 1e-9 * T, side="right")), len(segments) - 1)
            x[SDOT], x[OMEGA] = segments[j][1], segments[j][2]
        out[k] = x
        x = step(x, None, T)
    return out
