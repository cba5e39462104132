import math

import numpy as np
import pytest

from memonn.errors import BadDuration, Diverged
from memonn.integrate import integrate_fixed


def decay(t, y):
    return -y


def test_rk4_exponential_decay():
    t, y = integrate_fixed(decay, [1.0], 0.01, 1.0)
    assert t[-1] == pytest.approx(1.0)
    assert y[-1, 0] == pytest.approx(math.exp(-1.0), abs=1e-9)


def test_rk4_fourth_order():
    errs = []
    for dt in (0.1, 0.05):
        _, y = integrate_fixed(decay, [1.0], dt, 2.0)
        errs.append(abs(y[-1, 0] - math.exp(-2.0)))
    assert 14 < errs[0] / errs[1] < 18


def test_euler_first_order():
    errs = []
    for dt in (0.01, 0.005):
        _, y = integrate_fixed(decay, [1.0], dt, 1.0, method="euler")
        errs.append(abs(y[-1, 0] - math.exp(-1.0)))
    assert 1.9 < errs[0] / errs[1] < 2.1


def test_time_dependent_rhs_with_offset_start():
    # y' = 2t from t0 = 1: y(3) = y(1) + 9 - 1; RK4 is exact for this polynomial
    t, y = integrate_fixed(lambda t, y: np.array([2 * t]), [0.0], 0.1, 3.0, t0=1.0)
    assert t[0] == 1.0
    assert y[-1, 0] == pytest.approx(8.0, abs=1e-12)


def test_record_every_decimates():
    t, y = integrate_fixed(decay, [1.0, 2.0], 0.1, 1.0, record_every=5)
    np.testing.assert_allclose(t, [0.0, 0.5, 1.0])
    assert y.shape == (3, 2)


@pytest.mark.parametrize("dt,t_end", [(0.1, 0.1), (0.1, 0.05), (0.0, 1.0), (-0.1, 1.0)])
def test_bad_duration(dt, t_end):
    with pytest.raises(BadDuration):
        integrate_fixed(decay, [1.0], dt, t_end)


def test_divergence_reports_time():
    with pytest.raises(Diverged) as exc:
        integrate_fixed(lambda t, y: y, [1.0], 0.01, 10.0, bound=10.0)
    # e^t exceeds 10 near t = ln 10
    assert exc.value.t == pytest.approx(math.log(10.0), abs=0.02)


def test_nan_counts_as_divergence():
    with pytest.raises(Diverged):
        integrate_fixed(lambda t, y: np.array([math.nan]), [1.0], 0.1, 1.0)


def test_last_sample_lands_on_end_time():
    t, _ = integrate_fixed(decay, [1.0], 0.3, 1.0, t0=0.1)
    assert len(t) == 4
    assert t[-1] == pytest.approx(1.0, abs=1e-15)
