"""Fixed-step explicit integrators for ``y' = f(t, y)`` on numpy state vectors."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import BadDuration, Diverged


def rk4_step(f, t, y, dt):
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + (0.5 * dt) * k1)
    k3 = f(t + 0.5 * dt, y + (0.5 * dt) * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def euler_step(f, t, y, dt):
    return y + dt * f(t, y)


STEPPERS = {"rk4": rk4_step, "euler": euler_step}


def integrate_fixed(f: Callable, y0, dt: float, t_end: float, *, t0: float = 0.0,
                    method: str = "rk4", record_every: int = 1, bound: float = np.inf):
    """Integrate from ``t0`` to ``t_end`` with a constant step.

    The step is adjusted to ``span / round(span / dt)`` so the last sample
    lands on ``t_end``. Returns ``(t, Y)``; ``Y[k]`` is the state at ``t[k]``. Raises ``Diverged``
    when any component becomes non-finite or exceeds ``bound`` in magnitude.
    """
    if not (dt > 0 and t_end - t0 > dt):
        raise BadDuration(f"need dt > 0 and a span longer than dt (dt={dt}, span={t_end - t0})")
    step = STEPPERS[method]
    n_steps = int(round((t_end - t0) / dt))
    dt = (t_end - t0) / n_steps
    y = np.array(y0, dtype=float)
    n_rec = n_steps // record_every + 1
    T = np.empty(n_rec)
    Y = np.empty((n_rec,) + y.shape)
    T[0], Y[0] = t0, y
    r = 1
    for k in range(n_steps):
        t = t0 + k * dt
        y = step(f, t, y, dt)
        if not np.max(np.abs(y)) <= bound:
            raise Diverged(t + dt)
        if (k + 1) % record_every == 0:
            T[r], Y[r] = t0 + (k + 1) * dt, y
            r += 1
    return T[:r], Y[:r]
