"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line (also collected
into the terminal summary) and then asserts the same verdict.
"""

import time

import numpy as np
import pytest

from memonn.cli import load_config, run_bench
from memonn.memristor import LoadLine, dc_sweep, find_operating_point, ndr_intervals
from memonn.onn import (GROUP_CIRCUITS, OnnExperiment, corrupt, run_recognition,
                        shipped_patterns)
from memonn.phasenet import (PhaseNetConfig, simulate_averaged, simulate_direct, simulate_pair,
                             wrap)
from memonn.ppv import lobe_ratio, prc_to_ppv
from memonn.transient import (crossing_phase_differences, integrate_circuits,
                              prepare_oscillator)

PAIR_CURRENT = 5.53e-6
PAIR_PERIODS = 150
CASE2_SEEDS = range(20)

pytestmark = pytest.mark.slow


def test_1_ndr_and_operating_point(mp, record):
    t = time.perf_counter()
    curve = dc_sweep(mp, np.linspace(0.0, 3.3, 331))
    spans = ndr_intervals(curve)
    op = find_operating_point(curve, LoadLine(3.3, 810.0))
    sec = time.perf_counter() - t
    ok = len(spans) == 1 and op.unique and op.in_ndr and sec < 5
    span = f"[{spans[0][0]:.3f}, {spans[0][1]:.3f}] V" if spans else "none"
    assert record(1, ok, f"NDR {span}, Q at {op.point.vm:.3f} V unique={op.unique} "
                         f"in_ndr={op.in_ndr}, {sec:.2f} s")


def test_2_sustained_oscillation(osc_timed, record):
    o = osc_timed("B")
    last = np.diff(o.value.cycle.crossings)[-10:]
    spread = (last.max() - last.min()) / last.mean()
    v = o.value.cycle.one_cycle.v
    ok = o.value.cycle.stable and spread <= 1e-3 and np.ptp(v) > 0.1 and o.seconds < 30
    assert record(2, ok, f"T={o.value.period * 1e6:.4f} us, last-10 spread {spread:.2e}, "
                         f"swing {np.ptp(v):.3f} V, {o.seconds:.1f} s")


def test_3_step_halving(mp, osc_timed, record):
    base = osc_timed("B").value
    fine = prepare_oscillator(GROUP_CIRCUITS["B"], mp, steps_per_period=4000)
    rel = abs(fine.period - base.period) / base.period
    assert record(3, rel < 5e-4, f"period change {rel:.2e} (dt T/2000 -> T/4000)")


def test_4_prc_shape_dichotomy(prc_timed, record):
    a, b = prc_timed("A"), prc_timed("B")
    ra, rb = lobe_ratio(a.value.shifts), lobe_ratio(b.value.shifts)
    ok = not (0.5 <= ra <= 2) and 0.5 <= rb <= 2 and max(a.seconds, b.seconds) < 600
    assert record(4, ok, f"lobe ratio A {ra:.2f} (outside [0.5,2]), B {rb:.2f} (inside), "
                         f"extraction {a.seconds:.0f}/{b.seconds:.0f} s")


def test_5_ppv_pulse_invariance(prc_timed, record):
    devs = {}
    for g in ("A", "B"):
        full = prc_to_ppv(prc_timed(g, 1e-3).value).gamma
        half = prc_to_ppv(prc_timed(g, 5e-4).value).gamma
        # pointwise deviation relative to the curve's peak magnitude
        devs[g] = float(np.max(np.abs(full - half)) / np.max(np.abs(full)))
    ok = max(devs.values()) <= 0.05
    assert record(5, ok, f"max pointwise deviation A {devs['A']:.2%}, B {devs['B']:.2%}")


def test_6_pair_synchronisation(osc_timed, group_model, record):
    osc = osc_timed("B").value
    grp = group_model("B")
    w = grp.omega0
    th0 = np.array([0.0, 1.0])
    v0, x0 = osc.cycle.state_at(th0)
    res = {}
    for sgn in (1, -1):
        i = sgn * PAIR_CURRENT
        tr = simulate_pair(grp.ppv, grp.vout, i, i, th0 / w, t_end=PAIR_PERIODS * osc.period,
                           record_every=20)
        t, V, _ = integrate_circuits(osc.circuit, osc.memristor, v0, x0, osc.dt,
                                     int(PAIR_PERIODS * osc.period / osc.dt),
                                     coupling=i * np.array([[0, 1], [1, 0]]),
                                     v_threshold=osc.threshold, record_every=4)
        full = crossing_phase_differences(t, V, osc.threshold, osc.omega0)[1]
        res[sgn] = (float(tr.steady_differences()[1]), float(full))
    (pin, fin), (pan, fan) = res[1], res[-1]
    ok_phase = abs(pin) < 0.1 and abs(wrap(pan - np.pi)) < 0.1
    ok_full = abs(fin) < np.pi / 2 and abs(wrap(fan - np.pi)) < np.pi / 2
    ok_match = abs(wrap(pin - fin)) < 0.2 and abs(wrap(pan - fan)) < 0.2
    assert record(6, ok_phase and ok_full and ok_match,
                  f"in-phase: model {pin:+.4f} full {fin:+.4f}; anti-phase: model {pan:+.4f} "
                  f"full {fan:+.4f} rad")


def _steady_pair(cfg, s, i0, th0, t_end):
    ta = simulate_averaged(cfg, s, i0, th0, t_end=t_end, record_every=10)
    td = simulate_direct(cfg, th0 / cfg.omega, t_end=t_end, record_every=100)
    return ta.steady_differences(), td.steady_differences()


def test_7_averaged_matches_direct(group_model, record):
    grp = group_model("B")
    w = grp.omega0
    i0 = grp.i0
    weak = i0 * float(np.max(np.abs(grp.ppv(np.linspace(0, 2 * np.pi, 512)))))
    rng = np.random.default_rng(7)
    nets = []
    for n, signs in ((2, [1, 1]), (2, [1, -1]), (5, [1] * 5), (5, [1, 1, -1, 1, -1])):
        x = np.array(signs)
        s = np.outer(x, x) - np.eye(n, dtype=int)
        nets.append((n, s))
    worst = 0.0
    for n, s in nets:
        cfg = PhaseNetConfig(n, w, grp.ppv, i0 * s, grp.vout)
        th0 = rng.uniform(-np.pi, np.pi, n)
        da, dd = _steady_pair(cfg, s, i0, th0, 150 * 2 * np.pi / w)
        worst = max(worst, float(np.max(np.abs(wrap(da - dd)))))
    assert record(7, worst < 0.2, f"max steady difference {worst:.4f} rad over n=2 (+/-) and "
                                  f"n=5 (uniform, signed); coupling max|I*Gamma| = {weak:.4f}")


def test_8_recognition_identical_oscillators(group_model, record):
    ps = shipped_patterns()
    fails, slowest, runs = [], 0.0, 0
    for g in ("A", "B"):
        grp = group_model(g)
        for k in range(ps.p):
            for flips, seed in ((6, 0), (6, 1), (6, 2), (3, 3)):
                x = corrupt(ps.patterns[k], flips, seed)
                t = time.perf_counter()
                r = run_recognition(OnnExperiment(ps, x, waveform_group=g, rng_seed=seed,
                                                  target=k), grp, keep_trace=False)
                slowest = max(slowest, time.perf_counter() - t)
                runs += 1
                if not (r.match == k and r.hamming == 0):
                    fails.append(f"{g}/p{k}/seed{seed}")
    ok = not fails and slowest < 60
    assert record(8, ok, f"{runs - len(fails)}/{runs} runs recovered exactly "
                         f"(groups A and B, up to 6 flips), slowest run {slowest:.2f} s"
                  + (f"; failed {fails}" if fails else ""))


def test_9_mismatch_robustness(group_model, record):
    ps = shipped_patterns()
    errors, clustered, converged = {}, [], 0
    for g in ("A", "B"):
        grp = group_model(g)
        errs = []
        for seed in CASE2_SEEDS:
            k = seed % ps.p
            x = corrupt(ps.patterns[k], 6, seed)
            r = run_recognition(OnnExperiment(ps, x, waveform_group=g, freq_deviation=0.1,
                                              rng_seed=seed, target=k), grp, keep_trace=False)
            errs.append(r.pixel_errors)
            if g == "B" and r.converged:
                converged += 1
                d = np.abs(r.dtheta)
                clustered.append(bool(np.all(np.minimum(d, np.pi - d) < 0.6)))
        errors[g] = float(np.mean(errs))
    ok = errors["B"] <= errors["A"] and all(clustered)
    assert record(9, ok, f"mean pixel errors over {len(CASE2_SEEDS)} seeds: sinusoid (B) "
                         f"{errors['B']:.2f}, sawtooth (A) {errors['A']:.2f}; "
                         f"B converged runs {converged}, all clustered within 0.6 rad: "
                         f"{all(clustered)}")


def test_10_speedup(tmp_path, osc_timed, group_model, record):
    cfg = load_config(out=tmp_path)
    rep = run_bench(cfg, group_model("B"), osc_timed("B").value)
    assert record(10, rep.speedup >= 100,
                  f"speedup {rep.speedup:.0f}x (full network {rep.full_seconds:.2f} s, phase "
                  f"model {rep.phase_seconds:.4f} s, N={rep.n}, 30 us); engine agreement "
                  f"{rep.agreement:.3f} rad, flagged={rep.flagged}")


def test_11_phase_model_invariants(group_model, record):
    grp = group_model("B")
    ps = shipped_patterns()
    x = corrupt(ps.patterns[1], 6, 0)
    s = ps.patterns.T @ ps.patterns
    np.fill_diagonal(s, 0)
    rng = np.random.default_rng(11)
    cfg = PhaseNetConfig(60, grp.omega0 * (1 + rng.uniform(-0.1, 0.1, 60)), grp.ppv,
                         np.zeros((60, 60)), grp.vout)
    th0 = np.where(x > 0, 0.0, np.pi) + rng.uniform(-0.3, 0.3, 60)
    a = simulate_averaged(cfg, s, grp.i0, th0, t_end=30e-6)
    b = simulate_averaged(cfg, s, grp.i0, th0 + 2.5, t_end=30e-6)
    rot = float(np.max(np.abs(b.theta - a.theta - 2.5)))

    i = PAIR_CURRENT
    pair = simulate_pair(grp.ppv, grp.vout, i, -0.5 * i, (0.0, 0.3 / grp.omega0), t_end=20e-6)
    cfg2 = PhaseNetConfig(2, grp.omega0, grp.ppv, np.array([[0, i], [-0.5 * i, 0]]), grp.vout)
    direct = simulate_direct(cfg2, (0.0, 0.3 / grp.omega0), t_end=20e-6)
    identical = (np.array_equal(pair.alpha, direct.alpha)
                 and np.array_equal(pair.theta, direct.theta))
    ok = rot < 1e-8 and identical
    assert record(11, ok, f"rotation residual {rot:.1e} rad (N=60, shift 2.5 rad); "
                          f"pair vs n=2 direct bit-identical: {identical}")
