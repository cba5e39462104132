"""Command line front end: ``memonn {ndr,osc,prc,ppv,pair,onn,bench}``.

Each command reads one YAML run configuration (``--config``; the shipped
``data/default.yaml`` documents every key), writes CSV, P2 image and plain
text artifacts into ``--out`` and exits with

* 0 on success,
* 2 for configuration or validation errors,
* 3 for numerical failures (no NDR, no oscillation, divergence, ...),
* 4 when a phase network did not settle (artifacts are still written).

Every artifact starts with ``#`` metadata lines carrying the command, a
SHA-256 of the resolved configuration and the seed. There are no timestamps,
so reruns with the same configuration are byte-identical (wall-clock timings
in the ``bench`` report excepted).
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import yaml

from .errors import BadDimensions, BadDuration, ConfigError, MemonnError, NoNdr, NotConverged
from .memristor import (LoadLine, MemristorParams, curve_to_csv, dc_sweep, find_operating_point,
                        ndr_intervals, params_from_mapping, surrogate)
from .onn import (GROUP_CIRCUITS, GROUP_I0, GROUP_NAMES, OnnExperiment, PatternSet, WaveformGroup,
                  corrupt, hebbian_weights, init_phases, pattern_to_image, run_recognition,
                  shipped_patterns)
from .phasenet import OutputWaveform, simulate_pair, wrap
from .ppv import PpvFourier, PrcCurve, PulseSpec, extract_prc, fit_fourier, prc_to_ppv
from .transient import (CircuitParams, crossing_phase_differences, prepare_oscillator,
                        simulate_circuit, simulate_full_network)

log = logging.getLogger("memonn")

DEFAULT_CONFIG_PATH = Path(__file__).with_name("data") / "default.yaml"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_NOT_CONVERGED = 0, 2, 3, 4


# ---------------------------------------------------------------------------
# configuration


def _defaults() -> dict:
    with open(DEFAULT_CONFIG_PATH) as fh:
        return yaml.safe_load(fh)


def _merge(base: dict, over: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        name = f"{where}{key}"
        if key not in base:
            raise ConfigError(f"unknown configuration key {name!r}")
        ref = base[key]
        if isinstance(ref, dict) and key != "coefficients":
            if not isinstance(val, dict):
                raise ConfigError(f"configuration key {name!r} must be a section")
            out[key] = _merge(ref, val, name + ".")
        else:
            out[key] = _coerce(name, ref, val)
    return out


def _coerce(name, ref, val):
    if val is None or ref is None:
        return val
    if isinstance(ref, bool):
        if not isinstance(val, bool):
            raise ConfigError(f"{name!r} must be true or false, got {val!r}")
        return val
    if isinstance(ref, int) and not isinstance(ref, bool):
        if (isinstance(val, bool) or not isinstance(val, (int, float))
                or not float(val).is_integer()):
            raise ConfigError(f"{name!r} must be an integer, got {val!r}")
        return int(val)
    if isinstance(ref, float):
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{name!r} must be a number, got {val!r}")
        return float(val)
    if isinstance(ref, dict):
        if not isinstance(val, dict):
            raise ConfigError(f"{name!r} must be a mapping")
        return dict(val)
    return val


@dataclass
class RunConfig:
    data: dict
    out: Path

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    @property
    def group(self) -> str:
        return self.data["group"]

    @property
    def digest(self) -> str:
        text = json.dumps(self.data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def header(self, command: str) -> list[str]:
        return [f"memonn {command} group={self.group}",
                f"config_sha256={self.digest} seed={self.seed}"]

    def section(self, name: str) -> dict:
        return self.data[name]

    def memristor(self) -> MemristorParams:
        sec = self.data["memristor"]
        base = surrogate().to_dict()
        if sec["file"]:
            with open(sec["file"]) as fh:
                loaded = yaml.safe_load(fh) or {}
            base = params_from_mapping(loaded).to_dict()
        base.update(sec["coefficients"] or {})
        return params_from_mapping(base)

    def circuit(self) -> CircuitParams:
        ref = GROUP_CIRCUITS[self.group]
        sec = self.data["circuit"]
        return CircuitParams(ref.vdc if sec["vdc"] is None else sec["vdc"],
                             ref.rs if sec["rs"] is None else sec["rs"],
                             ref.cp if sec["cp"] is None else sec["cp"])

    def pulse(self) -> PulseSpec:
        sec = self.data["pulse"]
        return PulseSpec(sec["b"], sec["h"])

    def i0(self) -> float:
        v = self.data["onn"]["i0"]
        return GROUP_I0[self.group] if v is None else float(v)


def load_config(path=None, *, out=None, seed=None, group=None) -> RunConfig:
    """Defaults, overlaid by the YAML file at ``path``, overlaid by flags."""
    data = _defaults()
    if path is not None:
        with open(path) as fh:
            try:
                user = yaml.safe_load(fh) or {}
            except yaml.YAMLError as exc:
                raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        data = _merge(data, user)
    if seed is not None:
        data["seed"] = int(seed)
    if group is not None:
        data["group"] = group
    if data["group"] not in GROUP_CIRCUITS:
        raise ConfigError(f"'group' must be A or B, got {data['group']!r}")
    for sec, key in (("memristor", "file"), ("prc", "file"), ("fourier", "file"), ("onn", "patterns")):
        f = data[sec][key]
        if f is not None and not Path(f).is_file():
            raise ConfigError(f"'{sec}.{key}' refers to a missing file: {f}")
    if data["integration"]["method"] not in ("rk4", "euler"):
        raise ConfigError("'integration.method' must be rk4 or euler")
    return RunConfig(data, Path(out) if out is not None else Path("."))


# ---------------------------------------------------------------------------
# shared pipeline pieces


def _oscillator(cfg: RunConfig):
    sec = cfg.section("integration")
    return prepare_oscillator(cfg.circuit(), cfg.memristor(), sec["steps_per_period"],
                              sec["settle_periods"], method=sec["method"])


def _prc(cfg: RunConfig, osc) -> PrcCurve:
    sec = cfg.section("prc")
    return extract_prc(osc, cfg.pulse(), sec["samples"], sec["k_periods"])


def _waveform_group(cfg: RunConfig, osc=None) -> tuple[WaveformGroup, object]:
    osc = osc if osc is not None else _oscillator(cfg)
    f = cfg.section("fourier")
    if f["file"]:
        ppv = PpvFourier.from_csv(f["file"])
    else:
        ppv = fit_fourier(prc_to_ppv(_prc(cfg, osc)), f["order"])
    return WaveformGroup(cfg.group, ppv, OutputWaveform.from_cycle(osc.cycle), cfg.i0()), osc


def _patterns(cfg: RunConfig) -> PatternSet:
    p = cfg.section("onn")["patterns"]
    return PatternSet.load(p) if p else shipped_patterns()


def _write_text(path: Path, header: list[str], lines: list[str]) -> None:
    path.write_text("".join(f"# {h}\n" for h in header) + "".join(l + "\n" for l in lines))


# ---------------------------------------------------------------------------
# commands


def cmd_ndr(cfg: RunConfig) -> int:
    mp = cfg.memristor()
    cp = cfg.circuit()
    sec = cfg.section("dc")
    curve = dc_sweep(mp, np.linspace(sec["v_min"], sec["v_max"], sec["points"]))
    hdr = cfg.header("ndr")
    curve_to_csv(curve, cfg.out / "iv.csv", hdr)
    spans = ndr_intervals(curve)
    if not spans:
        _write_text(cfg.out / "ndr.txt", hdr, ["no NDR"])
        raise NoNdr("the I-V sweep has no negative-slope segment")
    op = find_operating_point(curve, LoadLine(cp.vdc, cp.rs))
    lines = [f"ndr_interval_v={lo!r},{hi!r}" for lo, hi in spans]
    lines += [f"operating_point_v={op.point.vm!r}", f"operating_point_a={op.point.im!r}",
              f"operating_point_x={op.point.x_eq!r}", f"unique={op.unique}",
              f"in_ndr={op.in_ndr}"]
    _write_text(cfg.out / "ndr.txt", hdr, lines)
    print("\n".join(lines))
    return EXIT_OK


def cmd_osc(cfg: RunConfig) -> int:
    osc = _oscillator(cfg)
    sec = cfg.section("osc")
    hdr = cfg.header("osc")
    traj = simulate_circuit(osc.circuit, osc.memristor, dt=osc.dt,
                            t_end=sec["periods"] * osc.period, method=osc.method,
                            record_every=sec["record_every"])
    traj.to_csv(cfg.out / "transient.csv", hdr)
    osc.cycle.to_csv(cfg.out / "cycle.csv", hdr)
    v = osc.cycle.one_cycle.v
    lines = [f"period_s={osc.period!r}", f"frequency_hz={1 / osc.period!r}",
             f"stable={osc.cycle.stable}", f"v_min={float(v.min())!r}",
             f"v_max={float(v.max())!r}", f"threshold_v={osc.threshold!r}"]
    _write_text(cfg.out / "osc.txt", hdr, lines)
    print("\n".join(lines))
    return EXIT_OK


def cmd_prc(cfg: RunConfig) -> int:
    prc = _prc(cfg, _oscillator(cfg))
    prc.to_csv(cfg.out / "prc.csv", cfg.header("prc"))
    print(f"prc samples={len(prc.phases)} min={float(prc.shifts.min())!r} "
          f"max={float(prc.shifts.max())!r}")
    return EXIT_OK


def cmd_ppv(cfg: RunConfig) -> int:
    f = cfg.section("prc")["file"]
    prc = PrcCurve.from_csv(f) if f else _prc(cfg, _oscillator(cfg))
    hdr = cfg.header("ppv")
    ppv = prc_to_ppv(prc)
    ppv.to_csv(cfg.out / "ppv.csv", hdr)
    fit = fit_fourier(ppv, cfg.section("fourier")["order"])
    fit.to_csv(cfg.out / "fourier.csv", hdr)
    print(f"ppv order={fit.order} residual={fit.residual!r}")
    return EXIT_OK


def cmd_pair(cfg: RunConfig) -> int:
    grp, osc = _waveform_group(cfg)
    sec = cfg.section("pair")
    hdr = cfg.header("pair")
    w = grp.omega0
    t_end = sec["periods"] * 2 * np.pi / w
    init = (0.0, sec["init_dtheta"] / w)
    lines = []
    for name, sign in (("in", 1.0), ("anti", -1.0)):
        i = sign * sec["current"]
        tr = simulate_pair(grp.ppv, grp.vout, i, i, init, t_end=t_end,
                           record_every=sec["record_every"])
        tr.to_csv(cfg.out / f"pair_{name}_dtheta.csv", "dtheta", hdr + [f"i12=i21={i!r}"])
        tr.to_csv(cfg.out / f"pair_{name}_alpha.csv", "alpha", hdr + [f"i12=i21={i!r}"])
        lines.append(f"{name}: current={i!r} steady_dtheta={float(tr.steady_differences()[1])!r} "
                     f"drift={tr.drift()!r}")
    _write_text(cfg.out / "pair.txt", hdr, lines)
    print("\n".join(lines))
    return EXIT_OK


def cmd_onn(cfg: RunConfig) -> int:
    grp, _ = _waveform_group(cfg)
    ps = _patterns(cfg)
    sec = cfg.section("onn")
    hdr = cfg.header("onn")
    targets = range(ps.p) if sec["test_pattern"] is None else [int(sec["test_pattern"])]
    lines, all_converged = [], True
    for k in targets:
        if not 0 <= k < ps.p:
            raise ConfigError(f"'onn.test_pattern' {k} out of range (have {ps.p})")
        x = corrupt(ps.patterns[k], sec["flips"], cfg.seed + k)
        exp = OnnExperiment(ps, x, sec["i0"], cfg.group, sec["freq_deviation"], cfg.seed + k,
                            sec["t_init"], sec["t_end"], sec["jitter"], k, sec["phase0_pixel"],
                            sec["engine"], sec["q_order"])
        res = run_recognition(exp, grp)
        all_converged &= res.converged
        stem = f"onn_p{k}"
        meta = hdr + [f"test_pattern={k} flips={sec['flips']} converged={res.converged}"]
        rows = [f"{n + 1},{float(d)!r},{int(p)},{'' if res.match is None else res.match},"
                f"{res.hamming}" for n, (d, p) in enumerate(zip(res.dtheta, res.pixels))]
        _write_text(cfg.out / f"{stem}_summary.csv", meta,
                    ["oscillator,dtheta,pixel,match,hamming"] + rows)
        res.trace.to_csv(cfg.out / f"{stem}_dtheta.csv", "dtheta", meta)
        black = sec["plus_is_black"]
        pattern_to_image(x, ps.rows, ps.cols, cfg.out / f"{stem}_input.pgm", black)
        pattern_to_image(res.pixels, ps.rows, ps.cols, cfg.out / f"{stem}_final.pgm", black)
        best = ps.patterns[res.match if res.match is not None else k]
        best = -best if res.inverted else best
        pattern_to_image(best, ps.rows, ps.cols, cfg.out / f"{stem}_match.pgm", black)
        lines.append(f"pattern {k}: match={res.match} hamming={res.hamming} "
                     f"errors={res.pixel_errors} converged={res.converged}")
    _write_text(cfg.out / "onn.txt", hdr + [f"group={cfg.group} ({GROUP_NAMES[cfg.group]})"], lines)
    print("\n".join(lines))
    return EXIT_OK if all_converged else EXIT_NOT_CONVERGED


@dataclass
class BenchReport:
    n: int
    t_end: float
    full_seconds: float
    phase_seconds: float
    speedup: float
    agreement: float  # max wrapped discrepancy of final phase differences, rad
    flagged: bool

    def lines(self) -> list[str]:
        return [f"{k}={v!r}" for k, v in asdict(self).items()]


def run_bench(cfg: RunConfig, grp: WaveformGroup, osc) -> BenchReport:
    """Time the phase-model ONN run and the full-circuit network on the same task."""
    sec = cfg.section("bench")
    n, t_end = sec["n"], sec["t_end"]
    if not t_end > 0:
        raise BadDuration("benchmark duration must be positive")
    onn = cfg.section("onn")
    ps = _patterns(cfg)
    i0 = cfg.i0()
    if n == ps.n:
        x = corrupt(ps.patterns[0], onn["flips"], cfg.seed)
        s = hebbian_weights(ps).s
    else:
        # no pattern of this size: all-to-all positive coupling, jittered start
        x = np.ones(n, dtype=np.int64)
        ps = PatternSet(1, n, x[None, :])
        s = hebbian_weights(ps).s
    exp = OnnExperiment(ps, x, i0, cfg.group, 0.0, cfg.seed, 0.0, t_end, onn["jitter"],
                        engine="averaged", q_order=onn["q_order"])
    theta0 = init_phases(x, cfg.seed, onn["jitter"])

    t0 = time.perf_counter()
    res = run_recognition(exp, grp, keep_trace=False)
    phase_s = time.perf_counter() - t0

    v0, x0 = osc.cycle.state_at(theta0)
    dt = osc.period / sec["steps_per_period"]
    t0 = time.perf_counter()
    trajs = simulate_full_network(n, osc.circuit, osc.memristor, s, i0,
                                  init=list(zip(v0, x0)), dt=dt, t_end=t_end,
                                  v_threshold=osc.threshold, method=osc.method,
                                  record_every=4)
    full_s = time.perf_counter() - t0

    V = np.column_stack([tr.v for tr in trajs])
    d_full = crossing_phase_differences(trajs[0].t, V, osc.threshold, osc.omega0)
    agreement = float(np.max(np.abs(wrap(res.dtheta - d_full))))
    return BenchReport(n, t_end, full_s, phase_s, full_s / phase_s, agreement,
                       agreement > sec["agreement_threshold"])


def cmd_bench(cfg: RunConfig) -> int:
    sec = cfg.section("bench")
    if not sec["t_end"] > 0:
        raise BadDuration("benchmark duration must be positive")
    grp, osc = _waveform_group(cfg)
    rep = run_bench(cfg, grp, osc)
    _write_text(cfg.out / "bench.txt", cfg.header("bench"), rep.lines())
    print("\n".join(rep.lines()))
    if rep.flagged:
        print(f"warning: engines disagree by {rep.agreement:.3g} rad "
              f"(threshold {sec['agreement_threshold']})", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"ndr": cmd_ndr, "osc": cmd_osc, "prc": cmd_prc, "ppv": cmd_ppv,
            "pair": cmd_pair, "onn": cmd_onn, "bench": cmd_bench}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="memonn", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", metavar="PATH", help="YAML run configuration")
    ap.add_argument("--out", metavar="DIR", default=".", help="output directory (created)")
    ap.add_argument("--seed", type=int, help="override the configuration seed")
    ap.add_argument("--group", choices=["A", "B"], help="override the waveform group")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, out=args.out, seed=args.seed, group=args.group)
        cfg.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg)
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (ConfigError, BadDimensions, BadDuration, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MemonnError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
