"""Phase sensitivity of the oscillator: PRC by pulse injection, PPV, Fourier fit.

The PRC is measured the direct way. A settled oscillator receives a short
rectangular current pulse at phase ``t_pulse``. The asymptotic phase shift is
read off by comparing the k-th rising reference crossing against an
unperturbed copy. Dividing by the injected charge and the angular frequency
gives the PPV sample ``gamma = P / (b * h * omega0)`` (seconds of time shift
per coulomb).

Every phase sample is an independent experiment, so ``extract_prc`` runs all
of them as one vectorised batch together with the unperturbed reference.
"""

from __future__ import annotations

import logging
import math
from dataclasses import InitVar, dataclass, field

import numpy as np

from .errors import FitFailed, NoOscillation
from .transient import NO_INJECTION, InjectionSignal, Oscillator, rising_crossings

log = logging.getLogger(__name__)

DEFAULT_SAMPLES = 64
DEFAULT_K_PERIODS = 20
MAX_WIDTH_FRACTION = 1 / 50


@dataclass(frozen=True)
class PulseSpec:
    """Rectangular current pulse: height ``b`` (A), width ``h`` (s)."""

    b: float = 1e-3
    h: float = 6e-9
    strict: InitVar[bool] = True

    def __post_init__(self, strict):
        if not self.h > 0:
            raise ValueError("pulse width must be positive")
        if strict and self.b == 0:
            raise ValueError("pulse height must be non-zero")

    @property
    def charge(self) -> float:
        return self.b * self.h

    def fitted_to(self, period: float) -> "PulseSpec":
        """Shrink the width if it is not well below the period."""
        if self.h < MAX_WIDTH_FRACTION * period:
            return self
        h = period / 64
        log.warning("pulse width %.3g s >= T/50 (T=%.3g s); reduced to %.3g s", self.h, period, h)
        return PulseSpec(self.b, h, strict=self.b != 0)


@dataclass
class PrcCurve:
    phases: np.ndarray  # s, relative to the reference crossing
    shifts: np.ndarray  # rad, positive = advance
    pulse: PulseSpec
    period: float

    @property
    def phase_rad(self) -> np.ndarray:
        return 2 * np.pi * self.phases / self.period

    def to_csv(self, path, header_lines=()) -> None:
        meta = [f"b={self.pulse.b!r} h={self.pulse.h!r} T={self.period!r}"]
        _curve_csv(path, self.phases, self.phase_rad, self.shifts, list(header_lines) + meta)

    @classmethod
    def from_csv(cls, path) -> "PrcCurve":
        meta, rows = _read_curve(path)
        pulse = PulseSpec(float(meta["b"]), float(meta["h"]), strict=False)
        return cls(rows[:, 0].copy(), rows[:, 2].copy(), pulse, float(meta["T"]))


@dataclass
class PpvCurve:
    phases: np.ndarray
    gamma: np.ndarray  # s/C (time shift per injected charge), i.e. 1/A
    period: float

    @property
    def phase_rad(self) -> np.ndarray:
        return 2 * np.pi * self.phases / self.period

    @property
    def omega0(self) -> float:
        return 2 * np.pi / self.period

    def to_csv(self, path, header_lines=()) -> None:
        _curve_csv(path, self.phases, self.phase_rad, self.gamma, header_lines)


def _curve_csv(path, ts, th, vals, header_lines):
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("phase_s,phase_rad,value\n")
        for a, b, c in zip(ts, th, vals):
            fh.write(f"{float(a)!r},{float(b)!r},{float(c)!r}\n")


def _read_curve(path):
    meta, rows = {}, []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                for tok in line[1:].split():
                    if "=" in tok:
                        k, v = tok.split("=", 1)
                        meta[k] = v
            elif line and not line.startswith("phase_s"):
                rows.append([float(v) for v in line.split(",")])
    return meta, np.array(rows, dtype=float).reshape(-1, 3)


@dataclass
class PpvFourier:
    """Truncated series ``sum_i A[i] cos(i*theta) + B[i] sin(i*theta)``, i = 0..order.

    ``B[0]`` is always zero and kept only so both arrays share indices.
    ``theta = omega0 * t`` with t measured from the phase reference.
    """

    order: int
    A: np.ndarray
    B: np.ndarray
    omega0: float
    residual: float = 0.0
    shift: float = field(default=0.0)  # rad the origin has been rotated by

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.full(theta.shape, self.A[0])
        for i in range(1, self.order + 1):
            out = out + self.A[i] * np.cos(i * theta) + self.B[i] * np.sin(i * theta)
        return out

    def at_time(self, t):
        return self(self.omega0 * np.asarray(t, dtype=float))

    def coeff(self, i: int) -> tuple[float, float]:
        """(A_i, B_i), zero beyond the fitted order."""
        if i > self.order:
            return 0.0, 0.0
        return float(self.A[i]), float(self.B[i])

    def rotate(self, phi: float) -> "PpvFourier":
        """Series of ``theta -> self(theta + phi)``."""
        i = np.arange(self.order + 1)
        c, s = np.cos(i * phi), np.sin(i * phi)
        A = self.A * c + self.B * s
        B = self.B * c - self.A * s
        B[0] = 0.0
        return PpvFourier(self.order, A, B, self.omega0, self.residual, self.shift + phi)

    def odd_aligned(self) -> "PpvFourier":
        """Rotate the origin so the fundamental is a pure, positive sine."""
        a1, b1 = self.coeff(1)
        return self.rotate(math.atan2(-a1, b1))

    def to_csv(self, path, header_lines=()) -> None:
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write(f"# residual={self.residual!r} omega0={self.omega0!r} shift={self.shift!r}\n")
            fh.write("i,A_i,B_i\n")
            for i in range(self.order + 1):
                fh.write(f"{i},{float(self.A[i])!r},{float(self.B[i])!r}\n")

    @classmethod
    def from_csv(cls, path) -> "PpvFourier":
        meta = {}
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line.startswith("#"):
                    for tok in line[1:].split():
                        if "=" in tok:
                            k, v = tok.split("=", 1)
                            meta[k] = v
                elif line and not line.startswith("i,"):
                    rows.append([float(v) for v in line.split(",")])
        arr = np.array(rows)
        return cls(len(arr) - 1, arr[:, 1].copy(), arr[:, 2].copy(), float(meta["omega0"]),
                   float(meta.get("residual", 0.0)), float(meta.get("shift", 0.0)))


# ---------------------------------------------------------------------------
# measurement


def _kth_crossings(osc: Oscillator, injections, k: int) -> np.ndarray:
    t, V, _ = osc.run(injections, (k + 0.5) * osc.period)
    out = np.empty(V.shape[1])
    for m in range(V.shape[1]):
        c = rising_crossings(t, V[:, m], osc.threshold)
        c = c[c > -0.5 * osc.period]
        if len(c) <= k:
            raise NoOscillation(f"run {m} reached only {len(c)} reference crossings")
        out[m] = c[k]
    return out


def _check_window(osc: Oscillator, t_pulse: float):
    if not (0.0 <= t_pulse < osc.period):
        raise ValueError("t_pulse must lie within one period after the reference crossing")


def measure_phase_shift(osc: Oscillator, pulse: PulseSpec, t_pulse: float,
                        k_periods: int = DEFAULT_K_PERIODS) -> float:
    """Asymptotic phase shift (rad, advance positive) caused by one pulse at ``t_pulse``."""
    _check_window(osc, t_pulse)
    inj = InjectionSignal.pulse(t_pulse, pulse.h, pulse.b)
    tu, tp = _kth_crossings(osc, [NO_INJECTION, inj], k_periods)
    return osc.omega0 * (tu - tp)


def extract_prc(osc: Oscillator, pulse: PulseSpec = PulseSpec(),
                m_samples: int = DEFAULT_SAMPLES, k_periods: int = DEFAULT_K_PERIODS) -> PrcCurve:
    """PRC sampled at ``m_samples`` uniform phases over one period."""
    if m_samples < 16:
        raise ValueError("need at least 16 phase samples")
    pulse = pulse.fitted_to(osc.period)
    phases = np.arange(m_samples) * (osc.period / m_samples)
    injs = [NO_INJECTION] + [InjectionSignal.pulse(float(tp), pulse.h, pulse.b) for tp in phases]
    c = _kth_crossings(osc, injs, k_periods)
    shifts = osc.omega0 * (c[0] - c[1:])
    return PrcCurve(phases, shifts, pulse, osc.period)


def prc_to_ppv(prc: PrcCurve, omega0: float | None = None) -> PpvCurve:
    """Pointwise ``gamma = P / (b * h * omega0)``."""
    if omega0 is None:
        omega0 = 2 * np.pi / prc.period
    if not omega0 > 0:
        raise ValueError("omega0 must be positive")
    gamma = np.asarray(prc.shifts, dtype=float) / (prc.pulse.b * prc.pulse.h * omega0)
    return PpvCurve(np.asarray(prc.phases, dtype=float).copy(), gamma, prc.period)


def fit_fourier(ppv: PpvCurve, order: int, max_cond: float = 1e8) -> PpvFourier:
    """Least-squares truncated Fourier series on the PPV sample grid."""
    theta = ppv.phase_rad
    n = len(theta)
    if order < 1 or 2 * order + 1 > n:
        raise ValueError(f"order must satisfy 1 <= P and 2P+1 <= {n}")
    cols = [np.ones(n)]
    for i in range(1, order + 1):
        cols += [np.cos(i * theta), np.sin(i * theta)]
    M = np.column_stack(cols)
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] > max_cond:
        raise FitFailed("Fourier design matrix is ill-conditioned")
    coef, *_ = np.linalg.lstsq(M, ppv.gamma, rcond=None)
    A = np.zeros(order + 1)
    B = np.zeros(order + 1)
    A[0] = coef[0]
    A[1:] = coef[1::2]
    B[1:] = coef[2::2]
    resid = float(np.sqrt(np.mean((M @ coef - ppv.gamma) ** 2)))
    return PpvFourier(order, A, B, ppv.omega0, resid)


# ---------------------------------------------------------------------------
# shape diagnostics


def lobe_ratio(values) -> float:
    """|max| / |min| of a curve; ``inf`` when it never goes negative."""
    v = np.asarray(values, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    if lo >= 0:
        return math.inf
    if hi <= 0:
        return 0.0
    return abs(hi) / abs(lo)


def odd_dominance(f: PpvFourier) -> float:
    """sum|A_i| / sum|B_i| after odd alignment (small means odd-dominated)."""
    g = f.odd_aligned()
    return float(np.sum(np.abs(g.A)) / np.sum(np.abs(g.B)))
