import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memonn.errors import ConfigError, NoNdr, NoOperatingPoint, NumericOverflow
from memonn.memristor import (PARAM_KEYS, LoadLine, MemristorParams, curve_to_csv, dc_sweep,
                              equilibria, eval_current, eval_dxdt, find_operating_point,
                              has_ndr, load_params, ndr_intervals, save_params, surrogate)

finite = st.floats(-3.0, 3.0, allow_nan=False, allow_subnormal=False)
coef = st.floats(-1e3, 1e3, allow_nan=False)


def naive_dxdt(x, v, p):
    # term-by-term power sum, independent of the Horner kernel
    c = [p.c2, p.c4, p.c6, p.c8, p.c10]
    return p.a0 + p.a1 * x + p.b2 * v ** 2 + sum(c[i - 1] * v ** 2 * x ** i for i in range(1, 6))


def naive_current(x, v, p):
    d = [p.d0, p.d1, p.d2, p.d3, p.d4, p.d5]
    return v * sum(d[i] * x ** i for i in range(6))


params = st.builds(MemristorParams, **{k: coef for k in PARAM_KEYS})


def test_zero_polynomial_rate_is_zero():
    assert eval_dxdt(1.7, -2.2, MemristorParams()) == 0.0


def test_constant_term_only():
    assert eval_dxdt(0.0, 0.0, MemristorParams(a0=7.0)) == 7.0


def test_constant_conductance_current():
    assert eval_current(0.0, 2.0, MemristorParams(d0=1e-3)) == pytest.approx(0.002, abs=0)


def test_current_vanishes_at_zero_voltage():
    assert eval_current(4.2, 0.0, surrogate()) == 0.0


@pytest.mark.parametrize("x,v", [(0.5, 1.0), (0.3, 1.5), (-2.0, 0.7)])
def test_surrogate_matches_power_sum(x, v):
    p = surrogate()
    assert eval_dxdt(x, v, p) == pytest.approx(naive_dxdt(x, v, p), rel=1e-12)
    assert eval_current(x, v, p) == pytest.approx(naive_current(x, v, p), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(params, finite, finite)
def test_evaluation_matches_power_sum(p, x, v):
    scale = 1 + abs(naive_dxdt(abs(x), abs(v), MemristorParams(**{k: abs(getattr(p, k)) for k in PARAM_KEYS})))
    assert abs(eval_dxdt(x, v, p) - naive_dxdt(x, v, p)) <= 1e-12 * scale
    gscale = 1 + abs(v) * sum(abs(getattr(p, f"d{i}")) * abs(x) ** i for i in range(6))
    assert abs(eval_current(x, v, p) - naive_current(x, v, p)) <= 1e-12 * gscale


@settings(max_examples=200, deadline=None)
@given(params, finite, finite)
def test_rate_even_in_voltage(p, x, v):
    assert eval_dxdt(x, v, p) == eval_dxdt(x, -v, p)


@settings(max_examples=200, deadline=None)
@given(params, finite, finite)
def test_current_linear_in_voltage(p, x, v):
    assert eval_current(x, 2 * v, p) == 2 * eval_current(x, v, p)


def test_array_inputs():
    p = surrogate()
    x = np.linspace(-1, 1, 5)
    np.testing.assert_allclose(eval_dxdt(x, 0.8, p), [naive_dxdt(xx, 0.8, p) for xx in x], rtol=1e-12)


def test_overflow_raises():
    with pytest.raises(NumericOverflow):
        eval_dxdt(1e200, 1.0, MemristorParams(c10=1e10))
    with pytest.raises(NumericOverflow):
        eval_current(1e300, 1e10, MemristorParams(d5=1.0))


def test_non_finite_coefficient_rejected():
    with pytest.raises(ConfigError):
        MemristorParams(a1=math.inf)


def test_degenerate_polynomial_reports_zero_branch():
    curve = dc_sweep(MemristorParams(d0=1e-3), [0.5, 1.0])
    assert [c.status for c in curve] == ["degenerate", "degenerate"]
    assert all(c.x_eq == 0.0 for c in curve)
    assert curve[1].im == pytest.approx(1e-3)


def test_missing_equilibrium_recorded():
    # dx/dt = 1 + v^2 > 0 everywhere: no root, recorded not raised
    curve = dc_sweep(MemristorParams(a0=1.0, b2=1.0, d0=1e-3), [0.0, 1.0])
    assert all(c.status == "no_equilibrium" and math.isnan(c.im) for c in curve)


def test_multiple_roots_become_branches():
    p = MemristorParams(a0=-1.0, c4=1.0)  # v^2 x^2 - 1, roots at x = -1/v, +1/v
    roots = equilibria(p, 1.0)
    assert roots == pytest.approx([-1.0, 1.0], rel=1e-9)
    curve = dc_sweep(p, [1.0])
    assert [c.branch for c in curve] == [0, 1]


def test_equilibria_satisfy_root_tolerance():
    p = surrogate()
    pts = [c for c in dc_sweep(p, np.linspace(0.05, 3.3, 60)) if c.status == "ok"]
    assert pts
    for c in pts:
        scale = abs(p.a1 * c.x_eq) + 1.0
        assert abs(eval_dxdt(c.x_eq, c.vm, p)) < 1e-8 * scale


def test_ohmic_has_no_ndr():
    curve = dc_sweep(MemristorParams(d0=1e-3), np.linspace(0, 3, 31))
    assert ndr_intervals(curve) == []
    assert not has_ndr(MemristorParams(a1=-1.0, d0=1e-3))


def test_ohmic_divider_operating_point():
    d0, vdc, rs = 2e-3, 3.3, 810.0
    curve = dc_sweep(MemristorParams(d0=d0), np.linspace(0, 3.3, 331))
    op = find_operating_point(curve, LoadLine(vdc, rs))
    assert op.point.vm == pytest.approx(vdc / (1 + rs * d0), rel=1e-9)
    assert op.unique and not op.in_ndr


def test_load_line_below_curve():
    curve = dc_sweep(MemristorParams(d0=1.0), np.linspace(0.5, 3.0, 26))
    with pytest.raises(NoOperatingPoint):
        find_operating_point(curve, LoadLine(0.1, 1e6))


def test_load_line_needs_positive_resistance():
    with pytest.raises(ValueError):
        LoadLine(3.3, 0.0)


def test_sweep_needs_increasing_voltages():
    with pytest.raises(ValueError):
        dc_sweep(surrogate(), [1.0, 0.5])


def test_surrogate_single_ndr_interval():
    spans = ndr_intervals(dc_sweep(surrogate(), np.linspace(0, 3.3, 331)))
    assert len(spans) == 1
    lo, hi = spans[0]
    assert 0 < lo < hi < 3.3


def test_params_file_roundtrip(tmp_path):
    p = surrogate()
    save_params(p, tmp_path / "p.yaml")
    assert load_params(tmp_path / "p.yaml") == p


def test_params_file_without_ndr_rejected(tmp_path):
    (tmp_path / "ohm.yaml").write_text("d0: 1.0e-3\n")
    with pytest.raises(NoNdr):
        load_params(tmp_path / "ohm.yaml")
    assert load_params(tmp_path / "ohm.yaml", require_ndr=False).d0 == 1e-3


def test_params_file_unknown_key(tmp_path):
    (tmp_path / "bad.yaml").write_text("d9: 1.0\n")
    with pytest.raises(ConfigError, match="d9"):
        load_params(tmp_path / "bad.yaml")


def test_curve_csv_roundtrip(tmp_path):
    curve = dc_sweep(surrogate(), np.linspace(0, 3.3, 34))
    curve_to_csv(curve, tmp_path / "iv.csv", ["meta"])
    lines = (tmp_path / "iv.csv").read_text().splitlines()
    assert lines[:2] == ["# meta", "vm,im,x_eq,branch"]
    back = np.array([[float(v) for v in l.split(",")] for l in lines[2:]])
    np.testing.assert_array_equal(back[:, 1], [c.im for c in curve])
