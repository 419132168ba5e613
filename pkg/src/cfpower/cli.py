"""Command-line front end.

    cfpower run --preset two-ue-uplink --tier desk --seed 7 --out results/
    cfpower run --config my.ini --override psa.iterations=200
    cfpower list-presets
"""

import argparse
import csv
import json
import logging
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

import cfpower
from cfpower import config as cfg
from cfpower.beamforming import NumericalFailure
from cfpower.powerctl import BudgetExceeded
from cfpower.presets import TIERS, describe_presets, get_preset
from cfpower.simharness import run_experiment, sweep_ap_count

log = logging.getLogger("cfpower")

RECORD_COLUMNS = ["realization", "strategy", "direction", "ue", "rate_bpshz", "sinr_db", "zeta"]
CDF_COLUMNS = ["strategy", "direction", "value_db", "cdf"]
SUMMARY_COLUMNS = ["strategy", "direction", "min_rate_p10_bpshz", "min_rate_p50_bpshz",
                   "min_rate_p90_bpshz", "mean_jain"]
SWEEP_COLUMNS = ["M", "N", "strategy", "direction", "mean_jain", "min_rate_p10_bpshz"]
UNITS = {
    "realization": "index", "ue": "index", "M": "count", "N": "count",
    "rate_bpshz": "bit/s/Hz", "min_rate_p10_bpshz": "bit/s/Hz", "min_rate_p50_bpshz": "bit/s/Hz",
    "min_rate_p90_bpshz": "bit/s/Hz", "sinr_db": "dB", "value_db": "dB",
    "zeta": "normalized power (max 1 = zeta_max)", "cdf": "probability", "mean_jain": "unitless",
}


def _db(x):
    with np.errstate(divide="ignore"):
        return float(10 * np.log10(x))


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _record_rows(result, prefix=()):
    for r in result.records:
        for k in range(len(r.zeta)):
            yield (*prefix, r.realization, r.strategy, r.direction, k,
                   repr(float(r.rates[k])), repr(_db(r.sinr[k])), repr(float(r.zeta[k])))


def _summary_rows(result, prefix=()):
    for row in result.summary_rows():
        yield (*prefix, row["strategy"], row["direction"], repr(row["min_rate_p10"]),
               repr(row["min_rate_p50"]), repr(row["min_rate_p90"]), repr(row["mean_jain"]))


def write_experiment(result, out):
    _write_csv(out / "records.csv", RECORD_COLUMNS, _record_rows(result))
    cdf_rows = []
    for d in result.config.directions:
        for s in result.config.strategies:
            values, probs = result.min_sinr_cdf(s, d)
            cdf_rows += [(s, d, repr(float(v)), repr(float(p))) for v, p in zip(values, probs)]
    _write_csv(out / "cdf.csv", CDF_COLUMNS, cdf_rows)
    _write_csv(out / "summary.csv", SUMMARY_COLUMNS, _summary_rows(result))


def write_sweep(rows, results, out):
    _write_csv(out / "sweep.csv", SWEEP_COLUMNS,
               [(r["M"], r["N"], r["strategy"], r["direction"], repr(r["mean_jain"]),
                 repr(r["min_rate_p10"])) for r in rows])
    records, summary = [], []
    for res in results:
        records += _record_rows(res, (res.config.M,))
        summary += _summary_rows(res, (res.config.M,))
    _write_csv(out / "records.csv", ["M"] + RECORD_COLUMNS, records)
    _write_csv(out / "summary.csv", ["M"] + SUMMARY_COLUMNS, summary)


def summary_line(label, summary):
    parts = [f"{s['direction']}/{s['strategy']}: p10 min-rate {s['min_rate_p10']:.4g} b/s/Hz, "
             f"mean Jain {s['mean_jain']:.4f}" for s in summary]
    return f"{label}: " + "; ".join(parts)


def resolve_sections(args):
    layers = []
    if args.config:
        layers.append(cfg.read_config_file(args.config))
    if args.preset:
        try:
            layers.append(get_preset(args.preset, args.tier))
        except KeyError as exc:
            raise cfg.ConfigError(exc.args[0]) from exc
    flags = {}
    if args.seed is not None:
        flags.setdefault("experiment", {})["seed"] = args.seed
    if args.threads is not None:
        flags.setdefault("experiment", {})["threads"] = args.threads
    overrides = {}
    for text in args.override:
        section, key, value = cfg.parse_override(text)
        overrides.setdefault(section, {})[key] = value
    return cfg.merge(*layers, flags, overrides)


def cmd_run(args):
    sections = resolve_sections(args)
    config, sweep = cfg.build(sections)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    label = args.preset or (Path(args.config).name if args.config else "defaults")

    start = time.perf_counter()
    meta = {
        "preset": args.preset,
        "tier": args.tier if args.preset else None,
        "config": cfg.to_sections(config, sweep),
        "units": UNITS,
        "versions": {"cfpower": cfpower.__version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
    }
    if sweep:
        rows, results = sweep_ap_count(config, sweep)
        write_sweep(rows, results, out)
        meta["noise_power"] = {str(r.config.M): r.noise_power for r in results}
        meta["fitness_evaluations"] = {str(r.config.M): r.metadata["fitness_evaluations"] for r in results}
        meta["failures"] = {str(r.config.M): r.failures for r in results}
        summary = []
        for r in results:
            summary += [dict(s, strategy=f"{s['strategy']}@M={r.config.M}") for s in r.summary_rows()]
    else:
        result = run_experiment(config)
        write_experiment(result, out)
        meta["noise_power"] = result.noise_power
        meta["fitness_evaluations"] = result.metadata["fitness_evaluations"]
        meta["failures"] = result.failures
        summary = result.summary_rows()
    meta["seeds"] = {"master": config.seed,
                     "derivation": "blake2b-64(f'{seed}:{label}:{index}'), labels layout/blockage/fading/psa-<direction>"}
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    (out / "timings.json").write_text(json.dumps({"wall_clock_s": time.perf_counter() - start}) + "\n")
    print(summary_line(label, summary))
    return 0


def cmd_list(args):
    print(describe_presets())
    print(f"tiers: {', '.join(TIERS)}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="cfpower", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write the output bundle")
    run.add_argument("--config", help="INI config file, or metadata.json from an earlier run")
    run.add_argument("--preset", help="preset name (see list-presets)")
    run.add_argument("--tier", choices=TIERS, default="desk")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", default="out")
    run.add_argument("--threads", type=int)
    run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                     help="section.key=value, repeatable; beats preset and config file")
    run.set_defaults(func=cmd_run)

    ls = sub.add_parser("list-presets", help="list preset experiments")
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except cfg.ConfigError as exc:
        print(f"cfpower: config error: {exc}", file=sys.stderr)
        return 2
    except (BudgetExceeded, NumericalFailure, OSError) as exc:
        print(f"cfpower: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
