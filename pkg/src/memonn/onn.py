"""Oscillatory associative memory built from coupled memristor oscillators.

Stored images become integer Hebbian coupling strengths. A test image is
presented as initial phases (0 for a +1 pixel, pi for a -1 pixel, plus seeded
jitter), the phase network relaxes, and pixels are read back from the phase
of each oscillator relative to oscillator 1. Patterns are only defined up to
a global sign flip, so matching treats a pattern and its inverse as one
memory.

Two waveform groups are modelled, each with its own circuit and unit coupler
current:

* ``"A"`` (sawtooth): rs = 1 kohm, cp = 3500 pF, i0 = 212 uA
* ``"B"`` (sinusoid): rs = 810 ohm, cp = 800 pF, i0 = 5.33 uA
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadDimensions, ConfigError, NotConverged
from .memristor import MemristorParams, surrogate
from .phasenet import (OutputWaveform, PhaseNetConfig, PhaseTrace, simulate_averaged,
                       simulate_direct, wrap)
from .ppv import DEFAULT_SAMPLES, PpvFourier, PulseSpec, extract_prc, fit_fourier, prc_to_ppv
from .transient import CircuitParams, prepare_oscillator

log = logging.getLogger(__name__)

PATTERNS_PATH = Path(__file__).with_name("data") / "patterns.txt"

GROUP_CIRCUITS = {
    "A": CircuitParams(3.3, 1000.0, 3500e-12),
    "B": CircuitParams(3.3, 810.0, 800e-12),
}
GROUP_I0 = {"A": 212e-6, "B": 5.33e-6}
GROUP_NAMES = {"A": "sawtooth", "B": "sinusoid"}

CONVERGENCE_TOL = 1e-3  # max |d(dtheta)/dt| / omega0 over the final 5%


# ---------------------------------------------------------------------------
# patterns and weights


@dataclass(frozen=True)
class PatternSet:
    rows: int
    cols: int
    patterns: np.ndarray  # (p, rows*cols) of +/-1

    def __post_init__(self):
        pats = np.atleast_2d(np.asarray(self.patterns))
        if pats.shape[1] != self.rows * self.cols:
            raise BadDimensions(f"patterns have {pats.shape[1]} pixels, expected "
                                f"{self.rows}x{self.cols}")
        if pats.shape[0] < 1:
            raise ConfigError("a PatternSet needs at least one pattern")
        if not np.all(np.abs(pats) == 1):
            raise ConfigError("pattern entries must be +1 or -1")
        object.__setattr__(self, "patterns", pats.astype(np.int64))

    @property
    def n(self) -> int:
        return self.rows * self.cols

    @property
    def p(self) -> int:
        return self.patterns.shape[0]

    @classmethod
    def from_text(cls, text: str) -> "PatternSet":
        """Parse blank-line separated grids of 0/1 characters (1 -> +1, 0 -> -1)."""
        blocks, cur = [], []
        for raw in text.splitlines():
            line = raw.strip()
            if line.startswith("#"):
                continue
            if not line:
                if cur:
                    blocks.append(cur)
                    cur = []
                continue
            if set(line) - {"0", "1"}:
                raise ConfigError(f"pattern rows may only contain 0 and 1: {line!r}")
            cur.append(line)
        if cur:
            blocks.append(cur)
        if not blocks:
            raise ConfigError("no patterns found")
        rows, cols = len(blocks[0]), len(blocks[0][0])
        for b in blocks:
            if len(b) != rows or any(len(r) != cols for r in b):
                raise BadDimensions("all patterns must share one rows x cols grid")
        pats = np.array([[1 if c == "1" else -1 for c in "".join(b)] for b in blocks])
        return cls(rows, cols, pats)

    @classmethod
    def load(cls, path) -> "PatternSet":
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        out = []
        for pat in self.patterns:
            grid = pat.reshape(self.rows, self.cols)
            out.append("\n".join("".join("1" if v > 0 else "0" for v in r) for r in grid))
        return "\n\n".join(out) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())


def shipped_patterns() -> PatternSet:
    return PatternSet.load(PATTERNS_PATH)


@dataclass(frozen=True)
class CouplingMatrix:
    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise BadDimensions("coupling matrix must be square")
        if not np.all(s == np.round(s)):
            raise ConfigError("coupling strengths must be integers")
        s = s.astype(np.int64)
        if not np.array_equal(s, s.T):
            raise ConfigError("coupling matrix must be symmetric")
        if np.any(np.diag(s) != 0):
            raise ConfigError("coupling matrix must have a zero diagonal")
        object.__setattr__(self, "s", s)

    @property
    def n(self) -> int:
        return self.s.shape[0]


def hebbian_weights(ps: PatternSet) -> CouplingMatrix:
    """s_nj = sum_k xi_n^k xi_j^k off the diagonal, 0 on it."""
    s = ps.patterns.T @ ps.patterns
    np.fill_diagonal(s, 0)
    return CouplingMatrix(s)


def corrupt(pattern, k: int, seed: int) -> np.ndarray:
    """Copy of ``pattern`` with ``k`` distinct pixels flipped, chosen by ``seed``."""
    pattern = np.asarray(pattern)
    if not 0 <= k <= pattern.size:
        raise ConfigError(f"cannot flip {k} of {pattern.size} pixels")
    out = pattern.copy()
    idx = np.random.default_rng(seed).choice(pattern.size, size=k, replace=False)
    out[idx] = -out[idx]
    return out


def init_phases(test_input, rng_seed: int, jitter: float = 0.3) -> np.ndarray:
    """0 for +1 pixels, pi for -1 pixels, plus uniform jitter in [-jitter, jitter]."""
    if jitter < 0:
        raise ConfigError("jitter must be non-negative")
    x = np.asarray(test_input)
    base = np.where(x > 0, 0.0, np.pi)
    if jitter == 0:
        return base
    return base + np.random.default_rng(rng_seed).uniform(-jitter, jitter, x.size)


def readout_pattern(thetas, phase0_pixel: int = 1) -> np.ndarray:
    """Pixels from phases relative to oscillator 1.

    ``|wrap(theta_n - theta_1)| < pi/2`` gives ``phase0_pixel``, anything
    else its negation.
    """
    if phase0_pixel not in (1, -1):
        raise ConfigError("phase0_pixel must be +1 or -1")
    th = np.asarray(thetas, dtype=float)
    d = wrap(th - th[0])
    return np.where(np.abs(d) < np.pi / 2, phase0_pixel, -phase0_pixel).astype(np.int64)


def hamming(a, b) -> tuple[int, bool]:
    """Distance between two +/-1 patterns with inversion equivalence.

    Returns ``(distance, inverted)`` where ``inverted`` says the match was
    against ``-b``.
    """
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise BadDimensions("patterns differ in size")
    d = int(np.count_nonzero(a != b))
    return (a.size - d, True) if a.size - d < d else (d, False)


def best_match(pixels, ps: PatternSet) -> tuple[int, int, bool]:
    """(index, distance, inverted) of the nearest stored pattern."""
    scored = [hamming(pixels, pat) + (k,) for k, pat in enumerate(ps.patterns)]
    d, inv, k = min(scored, key=lambda r: (r[0], r[2]))
    return k, d, inv


# ---------------------------------------------------------------------------
# waveform groups


@dataclass
class WaveformGroup:
    """Phase macromodel of one oscillator type: PPV series and output waveform."""

    name: str
    ppv: PpvFourier
    vout: OutputWaveform
    i0: float

    @property
    def omega0(self) -> float:
        return self.ppv.omega0


def build_group(group: str, mp: MemristorParams | None = None, circuit: CircuitParams | None = None,
                m_samples: int = DEFAULT_SAMPLES, order: int = 10,
                pulse: PulseSpec | None = None, i0: float | None = None) -> WaveformGroup:
    """Settle the group's circuit, extract its PRC and fit the PPV series."""
    if group not in GROUP_CIRCUITS:
        raise ConfigError(f"unknown waveform group {group!r} (expected A or B)")
    mp = mp if mp is not None else surrogate()
    cp = circuit if circuit is not None else GROUP_CIRCUITS[group]
    osc = prepare_oscillator(cp, mp)
    prc = extract_prc(osc, pulse if pulse is not None else PulseSpec(), m_samples)
    fit = fit_fourier(prc_to_ppv(prc), order)
    return WaveformGroup(group, fit, OutputWaveform.from_cycle(osc.cycle),
                         GROUP_I0[group] if i0 is None else i0)


# ---------------------------------------------------------------------------
# recognition


@dataclass
class OnnExperiment:
    patterns: PatternSet
    test_input: np.ndarray
    i0: float | None = None  # None -> the group default
    waveform_group: str = "B"
    freq_deviation: float = 0.0
    rng_seed: int = 0
    t_init: float = 0.0
    t_end: float = 30e-6
    jitter: float = 0.3
    target: int | None = None  # stored pattern the input was derived from
    phase0_pixel: int = 1
    engine: str = "averaged"
    q_order: int = 1
    dt: float | None = None

    def __post_init__(self):
        self.test_input = np.asarray(self.test_input).astype(np.int64)
        if self.test_input.size != self.patterns.n:
            raise BadDimensions(f"test input has {self.test_input.size} pixels, "
                                f"patterns have {self.patterns.n}")
        if self.waveform_group not in GROUP_CIRCUITS:
            raise ConfigError(f"unknown waveform group {self.waveform_group!r}")
        if not 0 <= self.t_init < self.t_end:
            raise ConfigError("need 0 <= t_init < t_end")
        if not 0 <= self.freq_deviation < 1:
            raise ConfigError("freq_deviation must lie in [0, 1)")
        if self.engine not in ("averaged", "direct"):
            raise ConfigError(f"unknown engine {self.engine!r}")


@dataclass
class RecognitionResult:
    dtheta: np.ndarray  # wrapped, relative to oscillator 1
    pixels: np.ndarray
    match: int | None  # stored pattern recovered exactly, else None
    hamming: int  # distance to the nearest stored pattern
    inverted: bool
    converged: bool
    drift: float  # rad/s
    pixel_errors: int | None  # distance to the target pattern, if one was given
    omega: np.ndarray = field(repr=False)
    trace: PhaseTrace | None = field(default=None, repr=False)


def frequencies(omega0: float, n: int, deviation: float, seed: int) -> np.ndarray:
    """omega0 * (1 + delta_n), delta_n uniform in [-deviation, deviation]."""
    if deviation == 0:
        return np.full(n, float(omega0))
    delta = np.random.default_rng([seed, 1]).uniform(-deviation, deviation, n)
    return omega0 * (1.0 + delta)


def _concat(a: PhaseTrace, b: PhaseTrace) -> PhaseTrace:
    return PhaseTrace(np.concatenate([a.t, b.t[1:]]), np.vstack([a.alpha, b.alpha[1:]]),
                      np.vstack([a.theta, b.theta[1:]]), a.omega)


def _stage(exp: OnnExperiment, cfg: PhaseNetConfig, s, i0, theta0, t0, t1, dt):
    if exp.engine == "averaged":
        return simulate_averaged(cfg, s, i0, theta0, dt=dt, t_end=t1, t0=t0)
    cfg = PhaseNetConfig(cfg.n, cfg.omega, cfg.ppv, np.asarray(s, float) * i0, cfg.vout,
                         cfg.q_order)
    alpha0 = theta0 / cfg.omega - t0
    return simulate_direct(cfg, alpha0, dt=dt, t_end=t1, t0=t0)


def run_recognition(exp: OnnExperiment, group: WaveformGroup, strict: bool = False,
                    keep_trace: bool = True) -> RecognitionResult:
    """Present ``exp.test_input`` to the network and read back the settled pattern.

    With ``t_init > 0`` the network first runs for ``t_init`` with the input
    pattern alone imprinted as coupling (s = x x^T, zero diagonal), then
    switches to the Hebbian weights. A run still drifting at ``t_end`` is
    reported with ``converged=False``; ``strict=True`` raises NotConverged
    instead, with the result attached as ``err.result``.
    """
    ps = exp.patterns
    n = ps.n
    i0 = group.i0 if exp.i0 is None else exp.i0
    omega = frequencies(group.omega0, n, exp.freq_deviation, exp.rng_seed)
    cfg = PhaseNetConfig(n, omega, group.ppv, np.zeros((n, n)), group.vout, exp.q_order)
    weights = hebbian_weights(ps).s
    theta0 = init_phases(exp.test_input, exp.rng_seed, exp.jitter)
    dt = exp.dt  # None: each engine's own default step

    t0 = 0.0
    first = None
    if exp.t_init > 0:
        imprint = np.outer(exp.test_input, exp.test_input)
        np.fill_diagonal(imprint, 0)
        first = _stage(exp, cfg, imprint, i0, theta0, 0.0, exp.t_init, dt)
        theta0 = first.theta[-1]
        t0 = exp.t_init
    trace = _stage(exp, cfg, weights, i0, theta0, t0, exp.t_end, dt)
    if first is not None:
        trace = _concat(first, trace)

    final = trace.theta[-1]
    drift = trace.drift(0.05)
    converged = bool(drift < CONVERGENCE_TOL * group.omega0)
    pixels = readout_pattern(final, exp.phase0_pixel)
    k, d, inv = best_match(pixels, ps)
    errors = None if exp.target is None else hamming(pixels, ps.patterns[exp.target])[0]
    res = RecognitionResult(wrap(final - final[0]), pixels, k if d == 0 else None, d, inv,
                            converged, drift, errors, omega, trace if keep_trace else None)
    if not converged:
        log.info("phase differences still drifting at t_end (%.3g rad/s)", drift)
        if strict:
            err = NotConverged(f"max phase-difference drift {drift:.3g} rad/s at t_end")
            err.result = res
            raise err
    return res


# ---------------------------------------------------------------------------
# images


def pattern_to_image(pixels, rows: int, cols: int, path, plus_is_black: bool = True) -> None:
    """Write a plain P2 graymap: header ``P2``, ``cols rows``, ``255``, then one
    text line per pixel row with 0 (black) or 255 (white) separated by spaces."""
    px = np.asarray(pixels).ravel()
    if px.size != rows * cols:
        raise BadDimensions(f"{px.size} pixels do not fill {rows}x{cols}")
    black = px > 0 if plus_is_black else px < 0
    grid = np.where(black, 0, 255).reshape(rows, cols)
    lines = ["P2", f"{cols} {rows}", "255"] + [" ".join(str(int(v)) for v in r) for r in grid]
    Path(path).write_text("\n".join(lines) + "\n")


def image_to_pattern(path, plus_is_black: bool = True) -> tuple[np.ndarray, int, int]:
    """Inverse of ``pattern_to_image``: (pixels, rows, cols). Mid-grey and
    darker counts as black."""
    toks = []
    for line in Path(path).read_text().splitlines():
        toks.extend(line.split("#", 1)[0].split())
    if not toks or toks[0] != "P2":
        raise ConfigError(f"{path}: not a plain P2 graymap")
    cols, rows, maxval = int(toks[1]), int(toks[2]), int(toks[3])
    vals = np.array([int(v) for v in toks[4:]])
    if vals.size != rows * cols:
        raise BadDimensions(f"{path}: {vals.size} values for {rows}x{cols}")
    black = vals <= maxval // 2
    px = np.where(black, 1, -1) if plus_is_black else np.where(black, -1, 1)
    return px.astype(np.int64), rows, cols
