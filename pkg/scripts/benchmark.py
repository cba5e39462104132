"""Wall-clock comparison of the full-circuit network and the phase model.

Repeats the N=60, 30 us recognition task and reports each run's timings,
speedup and cross-engine agreement.

    python scripts/benchmark.py --repeats 3 --group B
"""

import argparse

from memonn.cli import _waveform_group, load_config, run_bench


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--group", choices="AB", default="B")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--config", default=None)
    args = ap.parse_args()

    cfg = load_config(args.config, group=args.group)
    grp, osc = _waveform_group(cfg)
    print("run  full_s  phase_s  speedup  agreement_rad")
    for k in range(args.repeats):
        r = run_bench(cfg, grp, osc)
        print(f"{k:3d}  {r.full_seconds:6.2f}  {r.phase_seconds:7.4f}  {r.speedup:7.0f}  "
              f"{r.agreement:.3f}{'  (flagged)' if r.flagged else ''}")


if __name__ == "__main__":
    main()
