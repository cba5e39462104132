"""Circuit-level transient simulation of the memristor relaxation oscillator.

Each oscillator is a source ``vdc`` feeding node ``v`` through ``rs``; the node
carries ``cp`` to ground in parallel with the memristor::

    cp * dv/dt = (vdc - v)/rs - i_m(x, v) + i_inj(t) + i_couple(t)
         dx/dt = f(x, v)

All integrators here are fixed-step and vectorised over a batch of
oscillators, so N coupled circuits (or M independent PRC experiments) advance
in lockstep with elementwise arithmetic only. That keeps every member's result
bit-identical to integrating it alone.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BadDuration, Diverged, NoOscillation
from .memristor import MemristorParams, _current, _dxdt

log = logging.getLogger(__name__)

STEPS_PER_PERIOD = 2000


@dataclass(frozen=True)
class CircuitParams:
    vdc: float = 3.3
    rs: float = 810.0
    cp: float = 800e-12

    def __post_init__(self):
        if not (self.rs > 0 and self.cp > 0):
            raise ValueError("rs and cp must be positive")

    @property
    def tau_rc(self) -> float:
        return self.rs * self.cp


@dataclass
class Trajectory:
    t: np.ndarray
    v: np.ndarray
    x: np.ndarray
    im: np.ndarray

    def __len__(self):
        return len(self.t)

    def to_csv(self, path, header_lines=()) -> None:
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("t,v,x,im\n")
            for row in zip(self.t, self.v, self.x, self.im):
                fh.write(",".join(repr(float(a)) for a in row) + "\n")


@dataclass(frozen=True)
class InjectionSignal:
    """Piecewise-constant current into the output node: (t_start, t_end, amp) segments."""

    segments: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        segs = sorted(tuple(map(float, s)) for s in self.segments)
        for a, b, amp in segs:
            if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(amp)) or b < a:
                raise ValueError(f"bad injection segment {(a, b, amp)}")
        for (a0, b0, _), (a1, _, _) in zip(segs, segs[1:]):
            if a1 < b0:
                raise ValueError("injection segments overlap")
        object.__setattr__(self, "segments", tuple(segs))

    @classmethod
    def pulse(cls, t_start: float, width: float, amplitude: float) -> "InjectionSignal":
        return cls(((t_start, t_start + width, amplitude),))

    def __call__(self, t: float) -> float:
        for a, b, amp in self.segments:
            if a <= t < b:
                return amp
        return 0.0

    def mean(self, t0: float, t1: float) -> float:
        """Average current over [t0, t1]; integrates the segments exactly."""
        q = 0.0
        for a, b, amp in self.segments:
            lo, hi = max(a, t0), min(b, t1)
            if hi > lo:
                q += amp * (hi - lo)
        return q / (t1 - t0)

    @property
    def span(self) -> tuple[float, float]:
        if not self.segments:
            return (math.inf, -math.inf)
        return (self.segments[0][0], max(s[1] for s in self.segments))


NO_INJECTION = InjectionSignal()


@dataclass
class LimitCycle:
    period: float
    omega0: float
    one_cycle: Trajectory
    threshold: float
    crossings: np.ndarray = field(repr=False)
    stable: bool = True

    def to_csv(self, path, header_lines=()) -> None:
        meta = [f"T={self.period!r} omega0={self.omega0!r} threshold={self.threshold!r}"]
        self.one_cycle.to_csv(path, list(header_lines) + meta)

    def state_at(self, theta) -> tuple[np.ndarray, np.ndarray]:
        """(v, x) on the cycle at phase ``theta`` (rad after the reference crossing)."""
        oc = self.one_cycle
        n = len(oc.t)
        th = np.mod(np.asarray(theta, dtype=float), 2 * np.pi)
        grid = 2 * np.pi * np.arange(n + 1) / n
        v = np.interp(th, grid, np.append(oc.v, oc.v[0]))
        x = np.interp(th, grid, np.append(oc.x, oc.x[0]))
        return v, x


# ---------------------------------------------------------------------------
# integration core


def _sign(u):
    # sign(0) = +1 for the behavioural coupler
    return np.where(u >= 0.0, 1.0, -1.0)


def integrate_circuits(
    cp: CircuitParams,
    mp: MemristorParams,
    v0,
    x0,
    dt: float,
    n_steps: int,
    *,
    t0: float = 0.0,
    injections: Sequence[InjectionSignal] | None = None,
    coupling: np.ndarray | None = None,
    v_threshold: float = 0.0,
    method: str = "rk4",
    record_every: int = 1,
    v_bound: float = 1e3,
    x_bound: float = 1e4,
):
    """Advance a batch of oscillator circuits with a fixed step.

    ``coupling`` is an n-by-n matrix of currents (A); oscillator n receives
    ``sum_j coupling[n, j] * sign(v_j - v_threshold)``. External injections are
    averaged over each step so the injected charge is exact regardless of
    where pulse edges fall relative to the grid.

    Returns ``(t, V, X)`` with V and X of shape (n_records, n).
    """
    if not dt > 0:
        raise BadDuration("dt must be positive")
    if method not in ("rk4", "euler"):
        raise ValueError(f"unknown integration method {method!r}")
    v = np.array(v0, dtype=float, ndmin=1).copy()
    x = np.array(x0, dtype=float, ndmin=1).copy()
    n = v.shape[0]
    if x.shape != v.shape:
        raise ValueError("v0 and x0 must have the same shape")
    if injections is not None and len(injections) != n:
        raise ValueError("one injection signal per oscillator required")
    if coupling is not None:
        coupling = np.asarray(coupling, dtype=float)
        if coupling.shape != (n, n):
            raise ValueError("coupling must be n x n")
        if not np.all(coupling == 0):
            vth = float(v_threshold)
        else:
            coupling = None

    vdc, g_s, inv_c = cp.vdc, 1.0 / cp.rs, 1.0 / cp.cp

    def rhs(v, x, i_ext):
        i_tot = (vdc - v) * g_s - _current(x, v, mp) + i_ext
        if coupling is not None:
            i_tot = i_tot + coupling @ _sign(v - vth)
        return i_tot * inv_c, _dxdt(x, v, mp)

    active = []
    if injections is not None:
        active = [(k, s) for k, s in enumerate(injections) if s.segments]
    zero = np.zeros(n)

    n_rec = n_steps // record_every + 1
    T = np.empty(n_rec)
    V = np.empty((n_rec, n))
    X = np.empty((n_rec, n))
    T[0], V[0], X[0] = t0, v, x
    r = 1
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(n_steps):
        t = t0 + step * dt
        i_ext = zero
        if active:
            t1 = t + dt
            cur = None
            for k, s in active:
                lo, hi = s.span
                if hi > t and lo < t1:
                    if cur is None:
                        cur = zero.copy()
                    cur[k] = s.mean(t, t1)
            if cur is not None:
                i_ext = cur
        if method == "rk4":
            k1v, k1x = rhs(v, x, i_ext)
            k2v, k2x = rhs(v + half * k1v, x + half * k1x, i_ext)
            k3v, k3x = rhs(v + half * k2v, x + half * k2x, i_ext)
            k4v, k4x = rhs(v + dt * k3v, x + dt * k3x, i_ext)
            v = v + sixth * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            x = x + sixth * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        else:
            kv, kx = rhs(v, x, i_ext)
            v = v + dt * kv
            x = x + dt * kx
        if step % 16 == 15 or step == n_steps - 1:
            if not (np.max(np.abs(v)) < v_bound and np.max(np.abs(x)) < x_bound):
                raise Diverged(t + dt)
        if (step + 1) % record_every == 0:
            T[r], V[r], X[r] = t0 + (step + 1) * dt, v, x
            r += 1
    return T[:r], V[:r], X[:r]


def _steps(dt: float, t_end: float) -> int:
    if not (dt > 0 and t_end > dt):
        raise BadDuration(f"need dt > 0 and t_end > dt (dt={dt}, t_end={t_end})")
    return int(round(t_end / dt))


def simulate_circuit(cp: CircuitParams, mp: MemristorParams, init=(0.0, 0.0),
                     inj: InjectionSignal = NO_INJECTION, dt: float = 1e-10,
                     t_end: float = 1e-6, method: str = "rk4", record_every: int = 1,
                     **bounds) -> Trajectory:
    """Integrate one oscillator from ``init = (v0, x0)`` over [0, t_end]."""
    t, V, X = integrate_circuits(cp, mp, [init[0]], [init[1]], dt, _steps(dt, t_end),
                                 injections=[inj], method=method,
                                 record_every=record_every, **bounds)
    v, x = V[:, 0], X[:, 0]
    return Trajectory(t, v, x, _current(x, v, mp))


def simulate_full_network(n: int, cp: CircuitParams, mp: MemristorParams, coupling, i0: float,
                          init=None, dt: float = 1e-10, t_end: float = 1e-6,
                          v_threshold: float = 0.0, method: str = "rk4",
                          record_every: int = 1, injections=None, **bounds) -> list[Trajectory]:
    """Co-integrate ``n`` full circuits coupled by behavioural inverter chains.

    ``coupling`` holds integer strengths s_nj; oscillator n receives
    ``sum_j s_nj * i0 * sign(v_j - v_threshold)``, sign(0) = +1. The inverter
    switching threshold ``v_threshold`` plays the role of the zero level of
    V_out (use the mid-range of the free-running waveform).
    """
    s = np.asarray(coupling, dtype=float)
    if s.shape != (n, n):
        raise ValueError(f"coupling must be {n}x{n}")
    if np.any(np.diag(s) != 0):
        raise ValueError("coupling must have a zero diagonal")
    if init is None:
        init = [(0.0, 0.0)] * n
    v0 = [a for a, _ in init]
    x0 = [b for _, b in init]
    t, V, X = integrate_circuits(cp, mp, v0, x0, dt, _steps(dt, t_end),
                                 injections=injections, coupling=s * i0,
                                 v_threshold=v_threshold, method=method,
                                 record_every=record_every, **bounds)
    return [Trajectory(t, V[:, k], X[:, k], _current(X[:, k], V[:, k], mp)) for k in range(n)]


# ---------------------------------------------------------------------------
# limit-cycle analysis


def rising_crossings(t: np.ndarray, v: np.ndarray, threshold: float) -> np.ndarray:
    """Times where v rises through ``threshold``, linearly interpolated."""
    below = v[:-1] < threshold
    above = v[1:] >= threshold
    k = np.flatnonzero(below & above)
    w = (threshold - v[k]) / (v[k + 1] - v[k])
    return t[k] + w * (t[k + 1] - t[k])


def crossing_phase_differences(t: np.ndarray, V: np.ndarray, threshold: float,
                               omega0: float, ref: int = 0) -> np.ndarray:
    """Phase of each column relative to column ``ref`` from the last rising crossings.

    An oscillator that crosses later lags, so ``dtheta_n = omega0 * (t_ref - t_n)``
    with the crossing of n taken nearest to the reference crossing. Wrapped to
    (-pi, pi].
    """
    V = np.asarray(V)
    c_ref = rising_crossings(t, V[:, ref], threshold)
    if len(c_ref) < 2:
        raise NoOscillation("reference oscillator has too few crossings")
    t_ref = c_ref[-2]  # leave room for lagging neighbours to cross after it
    out = np.empty(V.shape[1])
    for k in range(V.shape[1]):
        c = rising_crossings(t, V[:, k], threshold)
        if len(c) == 0:
            raise NoOscillation(f"oscillator {k} never crosses {threshold:.4g} V")
        tk = c[np.argmin(np.abs(c - t_ref))]
        out[k] = omega0 * (t_ref - tk)
    return np.pi - np.mod(np.pi - out, 2 * np.pi)


def detect_limit_cycle(traj: Trajectory, threshold_v: float | None = None,
                       settle_cycles: int = 5, n_samples: int = 1000) -> LimitCycle:
    """Period and one resampled cycle from rising threshold crossings.

    Crossings in the first 20% of the record and the first ``settle_cycles``
    crossings are discarded, whichever reaches later. At least 11 crossings
    must remain so the last ten cycle lengths can be compared. The default
    threshold is the mid-range of the second half of the record.
    """
    t, v = traj.t, traj.v
    if threshold_v is None:
        tail = v[len(v) // 2:]
        threshold_v = 0.5 * (float(tail.max()) + float(tail.min()))
    c = rising_crossings(t, v, threshold_v)
    t_cut = t[0] + 0.2 * (t[-1] - t[0])
    c = c[settle_cycles:]
    c = c[c >= t_cut]
    if len(c) < 11 or (np.ptp(v[len(v) // 2:]) == 0):
        raise NoOscillation(f"only {len(c)} usable rising crossings of {threshold_v:.4g} V")
    periods = np.diff(c)
    period = float(periods.mean())
    last = periods[-10:]
    stable = bool((last.max() - last.min()) <= 1e-3 * last.mean())

    a, b = c[-2], c[-1]
    ts = np.linspace(0.0, b - a, n_samples, endpoint=False)
    vs = np.interp(a + ts, t, v)
    xs = np.interp(a + ts, t, traj.x)
    ims = np.interp(a + ts, t, traj.im)
    return LimitCycle(period, 2 * math.pi / period, Trajectory(ts, vs, xs, ims),
                      float(threshold_v), c, stable)


# ---------------------------------------------------------------------------
# settled oscillator setup


@dataclass
class Oscillator:
    """A free-running oscillator parked exactly at its phase reference.

    ``state`` is the sample just before a rising reference crossing and
    ``t0`` (<= 0) its time, so that the crossing itself sits at t = 0.
    """

    circuit: CircuitParams
    memristor: MemristorParams
    dt: float
    cycle: LimitCycle
    state: tuple[float, float]
    t0: float
    method: str = "rk4"

    @property
    def period(self) -> float:
        return self.cycle.period

    @property
    def omega0(self) -> float:
        return self.cycle.omega0

    @property
    def threshold(self) -> float:
        return self.cycle.threshold

    def run(self, injections: Sequence[InjectionSignal], t_end: float, record_every: int = 1):
        """Integrate one copy per injection signal from the reference state."""
        n = len(injections)
        n_steps = int(math.ceil((t_end - self.t0) / self.dt))
        return integrate_circuits(self.circuit, self.memristor, [self.state[0]] * n,
                                  [self.state[1]] * n, self.dt, n_steps, t0=self.t0,
                                  injections=injections, method=self.method,
                                  record_every=record_every)


def estimate_period(cp: CircuitParams, mp: MemristorParams, init=(0.0, 0.0)) -> float:
    """Coarse bootstrap period from a short, coarse-step run."""
    dt = cp.tau_rc / 400
    t_end = 80 * cp.tau_rc
    traj = simulate_circuit(cp, mp, init, dt=dt, t_end=t_end)
    return detect_limit_cycle(traj, settle_cycles=3).period


def prepare_oscillator(cp: CircuitParams, mp: MemristorParams,
                       steps_per_period: int = STEPS_PER_PERIOD, settle_periods: int = 30,
                       init=(0.0, 0.0), method: str = "rk4", presettle_periods: int = 400,
                       presettle_steps: int = 100) -> Oscillator:
    """Settle onto the limit cycle, then park at a reference crossing.

    A coarse pre-settle (``presettle_steps`` per period) carries the state
    through the slow amplitude transient, which can take hundreds of periods
    when the cycle is weakly attracting. The final ``settle_periods`` run uses
    dt = T_estimate / steps_per_period and defines the limit cycle.
    """
    t_coarse = estimate_period(cp, mp, init)
    if presettle_periods:
        dt0 = t_coarse / presettle_steps
        t, V, X = integrate_circuits(cp, mp, [init[0]], [init[1]], dt0,
                                     presettle_periods * presettle_steps,
                                     method=method, record_every=presettle_steps)
        init = (float(V[-1, 0]), float(X[-1, 0]))
    dt = t_coarse / steps_per_period
    traj = simulate_circuit(cp, mp, init, dt=dt, t_end=settle_periods * t_coarse, method=method)
    cycle = detect_limit_cycle(traj, settle_cycles=3)
    th = cycle.threshold
    k = int(np.flatnonzero((traj.v[:-1] < th) & (traj.v[1:] >= th))[-1])
    tc = float(cycle.crossings[-1])
    if not cycle.stable:
        log.warning("limit cycle not yet stable after settling")
    return Oscillator(cp, mp, dt, cycle, (float(traj.v[k]), float(traj.x[k])),
                      float(traj.t[k]) - tc, method)


def waveform_sign_duty(cycle: LimitCycle) -> float:
    """Fraction of the period the output sits above the reference threshold."""
    return float(np.mean(cycle.one_cycle.v >= cycle.threshold))


def charging_fraction(cycle: LimitCycle) -> float:
    """Fraction of the period with dv/dt > 0 (1/2 for a symmetric waveform)."""
    v = cycle.one_cycle.v
    return float(np.mean(np.diff(np.append(v, v[0])) > 0))
