"""Scan the surrogate memristor family for the shipped coefficient set.

Family: dx/dt = -x/tau + v^2*q0*(1 + x^2),  g(x) = d0 + d2*x^2.

For each candidate the script reports, at both circuit configurations
(810 ohm / 800 pF and 1 kohm / 3500 pF): the operating point, the period,
the PRC lobe ratio, the odd-dominance ratio of the fitted PPV, and the
PPV deviations under a halved pulse and under a 30-period measurement.

    python scripts/search_surrogate.py --tau 185e-9 188e-9 190e-9 --d2 2e-4

The shipped set is tau = 188 ns, q0 = 1e6, d0 = 20 uS, d2 = 200 uS.
"""

import argparse

import numpy as np

from memonn.memristor import LoadLine, MemristorParams, dc_sweep, find_operating_point, ndr_intervals
from memonn.ppv import PulseSpec, extract_prc, fit_fourier, lobe_ratio, odd_dominance, prc_to_ppv
from memonn.transient import CircuitParams, NoOscillation, charging_fraction, prepare_oscillator

CONFIGS = {"B": CircuitParams(3.3, 810.0, 800e-12), "A": CircuitParams(3.3, 1000.0, 3500e-12)}


def family(tau, q0, d0, d2):
    return MemristorParams(a1=-1 / tau, b2=q0, c4=q0, d0=d0, d2=d2)


def evaluate(mp, m_samples=64):
    curve = dc_sweep(mp, np.linspace(0.0, 3.3, 331))
    row = {"ndr": ndr_intervals(curve)}
    for name, cp in CONFIGS.items():
        op = find_operating_point(curve, LoadLine(cp.vdc, cp.rs))
        row[name + "_op"] = (round(op.point.vm, 4), op.unique, op.in_ndr)
        try:
            osc = prepare_oscillator(cp, mp)
        except NoOscillation:
            row[name] = "no oscillation"
            continue
        prc = extract_prc(osc, PulseSpec(), m_samples)
        gamma = prc_to_ppv(prc).gamma
        scale = float(np.max(np.abs(gamma)))
        half = prc_to_ppv(extract_prc(osc, PulseSpec(0.5e-3), m_samples)).gamma
        late = prc_to_ppv(extract_prc(osc, PulseSpec(), m_samples, k_periods=30)).gamma
        f = fit_fourier(prc_to_ppv(prc), 10)
        row[name] = dict(T=osc.period, stable=osc.cycle.stable, charge=charging_fraction(osc.cycle),
                         amp=float(np.ptp(osc.cycle.one_cycle.v)),
                         lobe=lobe_ratio(prc.shifts), odd=odd_dominance(f), gmax=scale,
                         half_dev=float(np.max(np.abs(half - gamma)) / scale),
                         k30_dev=float(np.max(np.abs(late - gamma)) / scale))
    return row


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--tau", type=float, nargs="+", default=[188e-9])
    ap.add_argument("--q0", type=float, nargs="+", default=[1e6])
    ap.add_argument("--d0", type=float, nargs="+", default=[2e-5])
    ap.add_argument("--d2", type=float, nargs="+", default=[2e-4])
    ap.add_argument("--samples", type=int, default=64)
    args = ap.parse_args()
    for tau in args.tau:
        for q0 in args.q0:
            for d0 in args.d0:
                for d2 in args.d2:
                    row = evaluate(family(tau, q0, d0, d2), args.samples)
                    print(f"tau={tau:g} q0={q0:g} d0={d0:g} d2={d2:g}")
                    for k, v in row.items():
                        print(f"    {k}: {v}")


if __name__ == "__main__":
    main()
