"""Command-line entry point.

econcal run CONFIG [--seed N] [--parallelism N] [--output-dir DIR]
                   [--override KEY=VALUE ...]
econcal preset list
econcal preset emit NAME

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.  Relative output directories are rooted at
$ECONCAL_OUTPUT_ROOT when that is set.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, apply_override, load_config, validate_config
from .errors import EconCalError, GraphConnectivityError
from .experiment import run_experiment
from .presets import emit_preset, preset_names

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="econcal",
        description="Measure entropy surfaces of simulated exchange "
                    "economies.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser(
        "run", help="run an experiment described by a JSON config")
    run_p.add_argument("config", help="path to the config file")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the config's seed")
    run_p.add_argument("--parallelism", type=int, default=None,
                       help="worker processes for the grid sweep")
    run_p.add_argument("--output-dir", default=None,
                       help="override the config's output directory")
    run_p.add_argument("--override", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="set a config entry by dotted path, e.g. "
                            "protocol.n_samples=50 (repeatable)")

    preset_p = sub.add_parser("preset", help="bundled experiment configs")
    preset_sub = preset_p.add_subparsers(dest="preset_command",
                                         required=True)
    preset_sub.add_parser("list", help="list bundled presets")
    emit_p = preset_sub.add_parser(
        "emit", help="print a preset config as JSON")
    emit_p.add_argument("name", help="preset name or figure alias")
    return parser


def _cmd_run(args):
    cfg = load_config(args.config)
    for item in args.override:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError([f"--override {item!r} is not KEY=VALUE"])
        try:
            apply_override(cfg, key, value)
        except (KeyError, IndexError, ValueError, TypeError) as exc:
            raise ConfigError(
                [f"--override {item!r} does not address the config: "
                 f"{exc}"]) from exc
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.parallelism is not None:
        cfg["parallelism"] = args.parallelism
    if args.output_dir is not None:
        cfg["output_dir"] = args.output_dir
    config = validate_config(cfg)
    manifest = run_experiment(config)
    stats = manifest.stats
    print(f"wrote {manifest.output_dir}/[field.csv stats.json "
          f"manifest.json]")
    if stats["goodness_of_fit"] is not None:
        print(f"goodness_of_fit      {stats['goodness_of_fit']:.3e}")
    if stats["goodness_of_agreement"] is not None:
        print(f"goodness_of_agreement {stats['goodness_of_agreement']:.3e}")
    if stats["concavity"] is not None:
        verdict = "pass" if stats["concavity"]["passed"] else "FAIL"
        print(f"concavity            {verdict} (worst eigenvalue "
              f"{stats['concavity']['worst_eigenvalue']:.3e})")
    if stats["pure_money"] is not None:
        pm = stats["pure_money"]
        if pm["rms_z"] is not None:
            print(f"beta z-scores        rms {pm['rms_z']:.2f}, "
                  f"max {pm['max_abs_z']:.2f}")
        if pm["money_exponent"] is not None:
            print(f"log beta / log M     {pm['money_exponent']:+.4f}")
    if manifest.flagged_nodes:
        print(f"WARNING: {manifest.flagged_nodes} node(s) flagged as "
              f"possibly non-equilibrated")
    return EXIT_OK


def _cmd_preset(args):
    if args.preset_command == "list":
        rows = preset_names()
        width = max(len(name) for name, _, _ in rows)
        for name, aliases, desc in rows:
            alias_txt = f" ({', '.join(aliases)})" if aliases else ""
            print(f"{name:<{width}}  {desc}{alias_txt}")
        return EXIT_OK
    try:
        sys.stdout.write(emit_preset(args.name))
    except KeyError:
        known = ", ".join(name for name, _, _ in preset_names())
        print(f"unknown preset {args.name!r}; known presets: {known}",
              file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_preset(args)
    except (ConfigError, GraphConnectivityError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EconCalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
