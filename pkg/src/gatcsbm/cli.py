"""Command-line entry point.

Exit status: 0 success, 1 configuration error, 2 verification-suite failure,
3 I/O error. ``--config FILE`` values override flags given before it on the
command line; flags given after ``--config`` override the file (last wins).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .csbm import CsbmParams, dump_sample_tsv, sample_csbm
from .dataset import REAL_MODELS, evaluate_real_task, load_external_graph, one_vs_all_mean_shift
from .experiments import (
    SUITES,
    ConfigError,
    SweepConfig,
    easy_mu,
    format_records_csv,
    hard_mu,
    run_vary_distance_sweep,
    run_vary_q_sweep,
    run_verification_suite,
    write_records_csv,
)
from .numerics import RngStream

log = logging.getLogger("gatcsbm")

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3

# flag dest -> SweepConfig field
_CONFIG_FIELDS = {
    "n": "n", "d": "d", "p": "p", "q": "q", "sigma": "sigma", "trials": "trials",
    "seed": "base_seed", "jobs": "jobs", "models": "models", "r_policy": "r_policy",
    "q_grid": "q_grid", "distance_grid": "distance_grid",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _add_common(sp, *, regime=False, q_default=None):
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--d", type=int, default=None, help="override d = round(n / ln^2 n)")
    sp.add_argument("--p", type=float, default=0.5)
    sp.add_argument("--q", type=float, default=q_default)
    sp.add_argument("--sigma", type=float, default=0.1)
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    sp.add_argument("--models", type=_str_list, default=None)
    sp.add_argument("--r-policy", dest="r_policy", choices=("experiment", "theorem", "theorem13"),
                    default="experiment")
    sp.add_argument("--out", default=None)
    sp.add_argument("--config", default=None)
    if regime:
        sp.add_argument("--regime", choices=("easy", "hard"), default="easy")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gatcsbm", description="Graph attention on the CSBM: sweeps and checks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sq = sub.add_parser("sweep-q", help="fix ||mu||, sweep q")
    _add_common(sq, regime=True)
    sq.add_argument("--q-grid", dest="q_grid", type=_float_list, default=None)

    sd = sub.add_parser("sweep-distance", help="fix q, sweep ||mu|| / sigma")
    _add_common(sd, q_default=0.1)
    sd.add_argument("--distance-grid", dest="distance_grid", type=_float_list, default=None)

    ve = sub.add_parser("verify", help="run a verification suite")
    ve.add_argument("--suite", choices=sorted(SUITES), required=True)
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("--trials", type=int, default=10)
    ve.add_argument("--out", default=None)

    rd = sub.add_parser("real-data", help="one-vs-all mean-shift sweep on a TSV graph")
    rd.add_argument("--features", required=True)
    rd.add_argument("--edges", required=True)
    rd.add_argument("--labels", required=True)
    rd.add_argument("--masks", default=None)
    rd.add_argument("--class", dest="target_class", type=int, default=0)
    rd.add_argument("--mu-norm-grid", dest="mu_norm_grid", type=_float_list, required=True)
    rd.add_argument("--models", type=_str_list, default=list(REAL_MODELS))
    rd.add_argument("--out", default=None)

    ds = sub.add_parser("dump-sample", help="write one CSBM draw as TSV files")
    _add_common(ds, regime=True, q_default=0.1)
    ds.add_argument("--dump-dir", dest="dump_dir", required=True)
    return parser


def _config_after_flag(argv) -> set[str]:
    """Flag dests that appear after ``--config`` on the command line."""
    argv = list(argv)
    pos = next((k for k, a in enumerate(argv) if a == "--config" or a.startswith("--config=")), None)
    if pos is None:
        return set()
    later = set()
    for a in argv[pos + 1:]:
        if a.startswith("--"):
            later.add(a[2:].split("=", 1)[0].replace("-", "_"))
    return later


def sweep_config_from_args(args, argv) -> SweepConfig:
    data = {}
    for dest, fname in _CONFIG_FIELDS.items():
        if hasattr(args, dest):
            val = getattr(args, dest)
            if val is not None:
                data[fname] = val
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from exc
        if not isinstance(file_data, dict):
            raise ConfigError(f"{args.config}: top level must be an object")
        later = _config_after_flag(argv)
        flag_for = {v: k for k, v in _CONFIG_FIELDS.items()}
        for key, val in file_data.items():
            flag = flag_for.get(key, key)
            if flag in later:
                continue
            data[key] = val
    return SweepConfig.from_dict(data)


def _write_or_print(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_records(records, out):
    if out:
        write_records_csv(records, out)
    else:
        sys.stdout.write(format_records_csv(records))


def _run(args, argv) -> int:
    if args.command == "verify":
        report = run_verification_suite(args.suite, seed=args.seed, trials=args.trials)
        _write_or_print(report.to_json(), args.out)
        for c in report.checks:
            tag = "info" if c.informational else ("PASS" if c.passed else "FAIL")
            log.info("%s %s: %s", tag, c.name, c.claim)
        return EXIT_OK if report.passed else EXIT_VERIFY

    if args.command == "real-data":
        graph = load_external_graph(args.features, args.edges, args.labels, args.masks)
        task = one_vs_all_mean_shift(graph, args.target_class, np.zeros(graph.d))
        records = evaluate_real_task(task, args.models, args.mu_norm_grid)
        _emit_records(records, args.out)
        return EXIT_OK

    cfg = sweep_config_from_args(args, argv)
    if args.command == "sweep-q":
        records = run_vary_q_sweep(cfg, args.regime)
        _emit_records(records, args.out)
    elif args.command == "sweep-distance":
        _emit_records(run_vary_distance_sweep(cfg), args.out)
    elif args.command == "dump-sample":
        d = cfg.dim
        mu = easy_mu(cfg.n, d, cfg.sigma) if args.regime == "easy" else hard_mu(d, cfg.sigma)
        params = CsbmParams(cfg.n, d, cfg.p, cfg.q, mu, cfg.sigma)
        sample = sample_csbm(params, RngStream(cfg.base_seed, 0))
        dump_sample_tsv(sample, args.dump_dir)
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"gatcsbm: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return _run(args, argv)
    except ConfigError as exc:
        print(f"gatcsbm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"gatcsbm: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"gatcsbm: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
