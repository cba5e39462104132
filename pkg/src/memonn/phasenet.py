"""Phase-domain macromodels of coupled memristor oscillators.

Three levels of description, each cheaper than the last:

* ``simulate_direct``: every oscillator carries a time shift alpha_n and
  ``alpha_n' = Gamma(theta_n) * sum_j I_nj * sign(V(theta_j))`` with
  ``theta_n = omega_n * (t + alpha_n)``. ``simulate_pair`` is the two-oscillator
  case. The step must resolve the oscillation period.
* ``simulate_averaged``: the fast phase is averaged out, leaving the
  Kuramoto-like ``theta_n' = omega_n + sum_j s_nj * H(theta_j - theta_n)``.
  Its step only has to resolve the slow locking dynamics.
* ``connection_h`` and ``sign_series`` are the building blocks of the
  averaged model.

Phases are measured in the frame of the PPV samples: theta = 0 at the rising
reference crossing of the output. The averaged model assumes the coupler
output is a 50%-duty square wave even about theta = 0. It therefore rotates
the PPV series by the centre of the positive half-wave of V_out before use.
Only phase differences enter its right-hand side, so the rotation does not
change the reported trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .integrate import integrate_fixed
from .ppv import PpvFourier
from .transient import LimitCycle

FOUR_OVER_PI = 4.0 / math.pi


def wrap(a):
    """Wrap angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(a, dtype=float), 2 * np.pi)


@dataclass
class OutputWaveform:
    """One period of V_out, sampled uniformly from the reference crossing.

    ``threshold`` is the coupler switching level; sign(V_out) means
    sign(v - threshold) with sign(0) = +1.
    """

    v: np.ndarray
    threshold: float = 0.0

    @classmethod
    def from_cycle(cls, cycle: LimitCycle) -> "OutputWaveform":
        return cls(np.asarray(cycle.one_cycle.v, dtype=float).copy(), cycle.threshold)

    @classmethod
    def sinusoid(cls, n: int = 1000) -> "OutputWaveform":
        """sin(theta): rising zero crossing at theta = 0."""
        return cls(np.sin(2 * np.pi * np.arange(n) / n), 0.0)

    @property
    def centred(self) -> np.ndarray:
        return self.v - self.threshold

    def value(self, theta):
        th = np.mod(np.asarray(theta, dtype=float), 2 * np.pi)
        n = len(self.v)
        grid = 2 * np.pi * np.arange(n + 1) / n
        return np.interp(th, grid, np.append(self.centred, self.centred[0]))

    def sign(self, theta):
        return np.where(self.value(theta) >= 0.0, 1.0, -1.0)

    @property
    def duty(self) -> float:
        return float(np.mean(self.centred >= 0))

    @property
    def centre(self) -> float:
        """Phase of the square wave's fundamental (centre of the high half)."""
        n = len(self.v)
        th = 2 * np.pi * np.arange(n) / n
        s = np.where(self.centred >= 0, 1.0, -1.0)
        return float(np.angle(np.sum(s * np.exp(1j * th))))


@dataclass
class PhaseNetConfig:
    n: int
    omega: np.ndarray
    ppv: PpvFourier
    i_currents: np.ndarray
    vout: OutputWaveform
    q_order: int = 1
    m_order: int | None = None
    normalized: bool = True

    def __post_init__(self):
        self.omega = np.broadcast_to(np.asarray(self.omega, dtype=float), (self.n,)).copy()
        self.i_currents = np.asarray(self.i_currents, dtype=float)
        if self.i_currents.shape != (self.n, self.n):
            raise ValueError(f"i_currents must be {self.n}x{self.n}")
        if np.any(np.diag(self.i_currents) != 0):
            raise ValueError("i_currents must have a zero diagonal")
        if np.any(self.omega <= 0):
            raise ValueError("all angular frequencies must be positive")
        if self.q_order < 1:
            raise ValueError("q_order must be >= 1")

    @property
    def m(self) -> int:
        return self.m_order if self.m_order is not None else min(self.ppv.order, self.q_order)


@dataclass
class PhaseTrace:
    t: np.ndarray
    alpha: np.ndarray  # (n_rec, n) time shifts, s
    theta: np.ndarray  # (n_rec, n) unwrapped total phases, rad
    omega: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.theta.shape[1]

    def phase_differences(self, ref: int = 0) -> np.ndarray:
        """theta_n - theta_ref wrapped to (-pi, pi], per record."""
        return wrap(self.theta - self.theta[:, [ref]])

    def steady_differences(self, frac: float = 0.05, ref: int = 0) -> np.ndarray:
        """Circular mean of the wrapped differences over the final ``frac`` of the run."""
        k = max(1, int(round(len(self.t) * frac)))
        d = self.theta[-k:] - self.theta[-k:, [ref]]
        return np.angle(np.mean(np.exp(1j * d), axis=0))

    def drift(self, frac: float = 0.05, ref: int = 0) -> float:
        """Max |d/dt (theta_n - theta_ref)| over the final ``frac``, by least-squares slope."""
        k = max(3, int(round(len(self.t) * frac)))
        t = self.t[-k:]
        d = self.theta[-k:] - self.theta[-k:, [ref]]
        tc = t - t.mean()
        slope = (tc @ (d - d.mean(axis=0))) / (tc @ tc)
        return float(np.max(np.abs(slope)))

    def to_csv(self, path, kind: str = "alpha", header_lines=()) -> None:
        data = {"alpha": self.alpha, "theta": self.theta,
                "dtheta": self.phase_differences()}[kind]
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("t," + ",".join(f"{kind}_{k + 1}" for k in range(self.n)) + "\n")
            for t, row in zip(self.t, data):
                fh.write(repr(float(t)) + "," + ",".join(repr(float(a)) for a in row) + "\n")

    def summary_csv(self, path, frac: float = 0.05, header_lines=()) -> None:
        d = self.steady_differences(frac)
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("oscillator,dtheta\n")
            for k, v in enumerate(d):
                fh.write(f"{k + 1},{float(v)!r}\n")


# ---------------------------------------------------------------------------
# direct time-shift model


def simulate_direct(cfg: PhaseNetConfig, init_alpha=None, dt: float | None = None,
                    t_end: float = 1e-5, record_every: int = 1,
                    alpha_bound: float = 1.0, t0: float = 0.0) -> PhaseTrace:
    """Integrate the time shifts of N oscillators driven through their PPV.

    The default step is 1/200 of the fastest period.
    """
    omega = cfg.omega
    if dt is None:
        dt = 2 * np.pi / omega.max() / 200
    I = cfg.i_currents
    gam, vout = cfg.ppv, cfg.vout
    a0 = np.zeros(cfg.n) if init_alpha is None else np.asarray(init_alpha, dtype=float)

    def rhs(t, a):
        th = omega * (t + a)
        return gam(th) * (I @ vout.sign(th))

    t, A = integrate_fixed(rhs, a0, dt, t_end, t0=t0, record_every=record_every,
                           bound=alpha_bound)
    return PhaseTrace(t, A, omega * (t[:, None] + A), omega)


def simulate_pair(gamma: PpvFourier, vout: OutputWaveform, i12: float, i21: float,
                  init=(0.0, 0.0), dt: float | None = None, t_end: float = 1e-5,
                  record_every: int = 1) -> PhaseTrace:
    """Two identical oscillators, bidirectionally coupled with currents i12, i21."""
    cfg = PhaseNetConfig(2, gamma.omega0, gamma, np.array([[0.0, i12], [i21, 0.0]]), vout)
    return simulate_direct(cfg, init, dt, t_end, record_every)


# ---------------------------------------------------------------------------
# averaged model


def sign_series(theta, q: int, normalized: bool = True):
    """Odd-harmonic cosine series of a square wave, truncated at Q terms.

    ``normalized`` multiplies by 4/pi so the series tends to sign(cos(theta)).
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    theta = np.asarray(theta, dtype=float)
    i = np.arange(1, q + 1)
    h = 2 * i - 1
    w = (-1.0) ** (i + 1) / h
    out = np.tensordot(np.cos(np.multiply.outer(theta, h)), w, axes=([-1], [0]))
    return out * FOUR_OVER_PI if normalized else out


def _h_weights(m: int, normalized: bool):
    i = np.arange(1, m + 1)
    w = (-1.0) ** (i + 1) / (2.0 * (2 * i - 1))
    return w * FOUR_OVER_PI if normalized else w


def connection_h(delta, omega_n: float, i0: float, A, B, m_order: int,
                 normalized: bool = True, literal_index: bool = False):
    """Averaged connection function H(theta_j - theta_n), ``delta = theta_j - theta_n``.

    ``H = omega_n * i0 * sum_{i=1..M} w_i * [A_k cos((2i-1)(theta_n - theta_j))
    + B_k sin((2i-1)(theta_n - theta_j))]`` with ``w_i = (-1)^(i+1) / (2(2i-1))``
    (times 4/pi when normalized). ``k = 2i-1`` pairs each harmonic of the sign
    series with the same harmonic of the PPV; ``literal_index=True`` uses k = i.
    """
    d = -np.asarray(delta, dtype=float)
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    w = _h_weights(m_order, normalized)
    out = np.zeros_like(d)
    for i in range(1, m_order + 1):
        h = 2 * i - 1
        k = i if literal_index else h
        a = A[k] if k < len(A) else 0.0
        b = B[k] if k < len(B) else 0.0
        out = out + w[i - 1] * (a * np.cos(h * d) + b * np.sin(h * d))
    return omega_n * i0 * out


def averaged_coefficients(cfg: PhaseNetConfig) -> PpvFourier:
    """PPV series rotated into the frame where sign(V_out) is even about zero."""
    return cfg.ppv.rotate(cfg.vout.centre)


def averaged_rhs(cfg: PhaseNetConfig, s, i0: float, literal_index: bool = False):
    """Right-hand side ``theta' = omega + sum_j s_nj H(theta_j - theta_n)``.

    With ``z = exp(i*h*theta)`` the pairwise sums collapse to
    ``sum_j s_nj exp(i*h*(theta_n - theta_j)) = z_n * conj((s @ z)_n)`` with
    one complex matrix-vector product per harmonic.
    """
    s = np.asarray(s, dtype=float)
    omega = cfg.omega
    g = averaged_coefficients(cfg)
    m = cfg.m
    w = _h_weights(m, cfg.normalized)
    terms = []
    for i in range(1, m + 1):
        h = 2 * i - 1
        a, b = g.coeff(i if literal_index else h)
        if a or b:
            terms.append((h, w[i - 1] * a, w[i - 1] * b))
    gain = omega * i0
    sc = s.astype(complex)  # avoids a per-call cast in the product below

    def rhs(t, th):
        acc = 0.0
        for h, wa, wb in terms:
            z = np.exp(1j * h * th)
            e = z * np.conj(sc @ z)  # real: sum cos(h(th_n - th_j)), imag: sum sin(...)
            acc = acc + wa * e.real + wb * e.imag
        return omega + gain * acc

    return rhs


def simulate_averaged(cfg: PhaseNetConfig, s, i0: float, init_theta=None,
                      dt: float | None = None, t_end: float = 1e-5, t0: float = 0.0,
                      record_every: int = 1, literal_index: bool = False) -> PhaseTrace:
    """Integrate the averaged total-phase model.

    The default step is 1/20 of the fastest period: the free rotation is
    integrated exactly by RK4 and the coupling terms vary slowly.
    """
    s = np.asarray(s, dtype=float)
    if s.shape != (cfg.n, cfg.n):
        raise ValueError(f"s must be {cfg.n}x{cfg.n}")
    if dt is None:
        dt = 2 * np.pi / cfg.omega.max() / 20
    th0 = np.zeros(cfg.n) if init_theta is None else np.asarray(init_theta, dtype=float)
    rhs = averaged_rhs(cfg, s, i0, literal_index)
    t, TH = integrate_fixed(rhs, th0, dt, t_end, t0=t0, record_every=record_every,
                            bound=1e6 * (1 + cfg.omega.max() * t_end))
    alpha = TH / cfg.omega - t[:, None]
    return PhaseTrace(t, alpha, TH, cfg.omega)
