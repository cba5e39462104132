"""Unfolding-polynomial memristor model and its DC (I-V) analysis.

State equation and conductance law::

    dx/dt = a0 + a1*x + b2*v**2 + v**2 * (c2*x + c4*x**2 + ... + c10*x**5)
    i     = v * (d0 + d1*x + ... + d5*x**5)

The DC curve is traced by solving dx/dt = 0 for x at each voltage. Roots are
found by bracketing sign changes of f on a grid over a finite x interval and
refining each bracket by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import yaml
from scipy.optimize import bisect

from .errors import ConfigError, NoEquilibrium, NoNdr, NoOperatingPoint, NumericOverflow

STATE_KEYS = ("a0", "a1", "b2", "c2", "c4", "c6", "c8", "c10")
CONDUCTANCE_KEYS = ("d0", "d1", "d2", "d3", "d4", "d5")
PARAM_KEYS = STATE_KEYS + CONDUCTANCE_KEYS

DEFAULT_X_RANGE = (-10.0, 10.0)
ROOT_RTOL = 1e-9


@dataclass(frozen=True)
class MemristorParams:
    """Polynomial coefficients.

    a0, a1 in 1/s; b2 and c2..c10 in 1/(s*V^2); d0..d5 in siemens.
    Absent higher-order terms are zero.
    """

    a0: float = 0.0
    a1: float = 0.0
    b2: float = 0.0
    c2: float = 0.0
    c4: float = 0.0
    c6: float = 0.0
    c8: float = 0.0
    c10: float = 0.0
    d0: float = 0.0
    d1: float = 0.0
    d2: float = 0.0
    d3: float = 0.0
    d4: float = 0.0
    d5: float = 0.0

    def __post_init__(self):
        for k in PARAM_KEYS:
            val = getattr(self, k)
            if not math.isfinite(val):
                raise ConfigError(f"coefficient {k} is not finite: {val!r}")

    @cached_property
    def voltage_poly(self) -> tuple[float, ...]:
        """Coefficients of the v**2 factor in powers of x, trailing zeros trimmed."""
        return _trim((self.b2, self.c2, self.c4, self.c6, self.c8, self.c10))

    @cached_property
    def conductance_poly(self) -> tuple[float, ...]:
        return _trim((self.d0, self.d1, self.d2, self.d3, self.d4, self.d5))

    def to_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in PARAM_KEYS}


def _trim(coeffs):
    k = len(coeffs)
    while k > 1 and coeffs[k - 1] == 0.0:
        k -= 1
    return tuple(float(c) for c in coeffs[:k])


def _horner(coeffs, x):
    if len(coeffs) == 1:
        return coeffs[0] + 0.0 * x
    acc = coeffs[-1] * x + coeffs[-2]
    for c in coeffs[-3::-1]:
        acc = acc * x + c
    return acc


def _dxdt(x, vm, p: MemristorParams):
    # Unchecked kernel used inside integrators.
    v2 = vm * vm
    return p.a0 + p.a1 * x + v2 * _horner(p.voltage_poly, x)


def _current(x, vm, p: MemristorParams):
    return vm * _horner(p.conductance_poly, x)


def _checked(val, what):
    if not np.all(np.isfinite(val)):
        raise NumericOverflow(f"{what} evaluated to a non-finite value")
    return val


def eval_dxdt(x, vm, p: MemristorParams):
    """State rate dx/dt in 1/s. Accepts scalars or numpy arrays."""
    with np.errstate(over="ignore", invalid="ignore"):
        return _checked(_dxdt(x, vm, p), "dx/dt")


def eval_current(x, vm, p: MemristorParams):
    """Memristor current in amperes."""
    with np.errstate(over="ignore", invalid="ignore"):
        return _checked(_current(x, vm, p), "current")


# ---------------------------------------------------------------------------
# DC analysis


@dataclass(frozen=True)
class DcPoint:
    vm: float
    im: float
    x_eq: float
    branch: int = 0
    status: str = "ok"  # "ok" | "degenerate" | "no_equilibrium"


@dataclass(frozen=True)
class LoadLine:
    vdc: float
    rs: float

    def __post_init__(self):
        if not self.rs > 0:
            raise ValueError("series resistance must be positive")

    def current(self, vm):
        return (self.vdc - vm) / self.rs


@dataclass(frozen=True)
class OperatingPoint:
    point: DcPoint
    unique: bool
    in_ndr: bool
    candidates: tuple[DcPoint, ...] = field(default=())


def equilibria(p: MemristorParams, vm: float, x_range=DEFAULT_X_RANGE, n_grid: int = 4001,
               rtol: float = ROOT_RTOL) -> list[float]:
    """All roots of f(x, vm) = 0 found by bracketing on a uniform grid plus bisection.

    Returns an empty list when no sign change exists. A polynomial that is
    identically zero in x yields ``[nan]`` (every x is an equilibrium).
    """
    xs = np.linspace(x_range[0], x_range[1], n_grid)
    with np.errstate(over="ignore", invalid="ignore"):
        fs = _dxdt(xs, vm, p)
    if not np.all(np.isfinite(fs)):
        raise NumericOverflow(f"dx/dt not finite on the search grid at vm={vm}")
    if not np.any(fs):
        return [math.nan]
    roots = []
    exact = np.flatnonzero(fs == 0.0)
    roots.extend(float(xs[i]) for i in exact)
    s = np.sign(fs)
    brackets = np.flatnonzero(s[:-1] * s[1:] < 0)
    for i in brackets:
        r = bisect(lambda xx: _dxdt(xx, vm, p), xs[i], xs[i + 1],
                   xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps), maxiter=400)
        roots.append(float(r))
    return sorted(roots)


def dc_sweep(p: MemristorParams, v_range, tol: float = ROOT_RTOL,
             x_range=DEFAULT_X_RANGE) -> list[DcPoint]:
    """Equilibrium I-V points for each voltage in ``v_range``.

    Multiple equilibria at one voltage are reported as separate branches,
    numbered by increasing x. Voltages with no equilibrium in ``x_range`` are
    kept as ``status="no_equilibrium"`` points with NaN current.
    """
    v = np.asarray(v_range, dtype=float)
    if v.ndim != 1 or np.any(np.diff(v) <= 0):
        raise ValueError("v_range must be strictly increasing")
    out = []
    for vm in v:
        roots = equilibria(p, float(vm), x_range=x_range, rtol=tol)
        if not roots:
            out.append(DcPoint(float(vm), math.nan, math.nan, 0, "no_equilibrium"))
            continue
        if len(roots) == 1 and math.isnan(roots[0]):
            out.append(DcPoint(float(vm), float(_current(0.0, vm, p)), 0.0, 0, "degenerate"))
            continue
        for b, x in enumerate(roots):
            out.append(DcPoint(float(vm), float(eval_current(x, vm, p)), x, b))
    return out


def _ordered(curve):
    """Valid points ordered along the curve (by equilibrium state, then voltage)."""
    pts = [c for c in curve if c.status != "no_equilibrium"]
    pts.sort(key=lambda c: (c.x_eq, c.vm))
    return pts


def ndr_intervals(curve: list[DcPoint]) -> list[tuple[float, float]]:
    """Voltage intervals where dV/dI < 0 along the traced curve.

    Adjacent negative-slope segments are merged, so a single contiguous NDR
    region comes back as one interval.
    """
    pts = _ordered(curve)
    if len(pts) < 2:
        return []
    v = np.array([c.vm for c in pts])
    i = np.array([c.im for c in pts])
    dv, di = np.diff(v), np.diff(i)
    neg = (dv * di) < 0
    intervals = []
    k = 0
    while k < len(neg):
        if neg[k]:
            j = k
            while j + 1 < len(neg) and neg[j + 1]:
                j += 1
            seg = v[k:j + 2]
            intervals.append((float(seg.min()), float(seg.max())))
            k = j + 1
        else:
            k += 1
    return intervals


def has_ndr(p: MemristorParams, v_max: float = 5.0, n: int = 501,
            x_range=DEFAULT_X_RANGE) -> bool:
    curve = dc_sweep(p, np.linspace(0.0, v_max, n), x_range=x_range)
    return bool(ndr_intervals(curve))


def find_operating_point(curve: list[DcPoint], ll: LoadLine) -> OperatingPoint:
    """Intersect the load line i = (vdc - v)/rs with the traced I-V curve.

    Intersections are located by sign changes of i_curve - i_load between
    consecutive curve points and refined by linear interpolation.
    """
    if not curve:
        raise ValueError("empty I-V curve")
    pts = _ordered(curve)
    if not pts:
        raise NoOperatingPoint("curve has no valid equilibrium points")
    v = np.array([c.vm for c in pts])
    i = np.array([c.im for c in pts])
    x = np.array([c.x_eq for c in pts])
    r = i - ll.current(v)
    hits = []
    for k in np.flatnonzero(r == 0.0):
        hits.append((float(v[k]), float(i[k]), float(x[k])))
    for k in np.flatnonzero(r[:-1] * r[1:] < 0):
        w = r[k] / (r[k] - r[k + 1])
        vv = v[k] + w * (v[k + 1] - v[k])
        xx = x[k] + w * (x[k + 1] - x[k])
        hits.append((float(vv), float(ll.current(vv)), float(xx)))
    if not hits:
        raise NoOperatingPoint(f"load line vdc={ll.vdc} V, rs={ll.rs} ohm misses the I-V curve")
    hits.sort(key=lambda h: h[2])
    cands = tuple(DcPoint(vv, ii, xx, b) for b, (vv, ii, xx) in enumerate(hits))
    q = cands[0]
    in_ndr = _in_ndr(pts, q)
    return OperatingPoint(q, len(cands) == 1, in_ndr, cands)


def _in_ndr(pts, q: DcPoint) -> bool:
    xs = np.array([c.x_eq for c in pts])
    k = int(np.searchsorted(xs, q.x_eq))
    k = min(max(k, 1), len(pts) - 1)
    a, b = pts[k - 1], pts[k]
    return (b.vm - a.vm) * (b.im - a.im) < 0


def curve_to_csv(curve: list[DcPoint], path, header_lines=()) -> None:
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("vm,im,x_eq,branch\n")
        for c in curve:
            fh.write(f"{c.vm!r},{c.im!r},{c.x_eq!r},{c.branch}\n")


# ---------------------------------------------------------------------------
# Parameter files


def params_from_mapping(data: dict) -> MemristorParams:
    unknown = set(data) - set(PARAM_KEYS)
    if unknown:
        raise ConfigError(f"unknown memristor coefficient(s): {', '.join(sorted(unknown))}")
    vals = {}
    for k, v in data.items():
        try:
            vals[k] = float(v)
        except (TypeError, ValueError):
            raise ConfigError(f"coefficient {k} is not a number: {v!r}") from None
    return MemristorParams(**vals)


def load_params(path, require_ndr: bool = True) -> MemristorParams:
    """Read a YAML coefficient file (keys a0..c10, d0..d5; missing keys are zero).

    Sets without an NDR region are rejected unless ``require_ndr`` is False.
    """
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping of coefficients")
    p = params_from_mapping(data)
    if require_ndr and not has_ndr(p):
        raise NoNdr(f"{path}: coefficient set has no NDR region")
    return p


def save_params(p: MemristorParams, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(p.to_dict(), fh, sort_keys=False)


SURROGATE_PATH = Path(__file__).with_name("data") / "surrogate.yaml"


def surrogate() -> MemristorParams:
    """The shipped surrogate coefficient set (see data/surrogate.yaml)."""
    return load_params(SURROGATE_PATH, require_ndr=False)
