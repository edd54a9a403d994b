"""Command line entry point: ``hkhydro <subcommand> [options]``.

Exit codes: 0 Completed, 2 Diverged, 3 IterationFailed, 1 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import CONFIG_ENV_VAR, ConfigError, find_default_config, format_config, load_config
from .scenarios import (
    EXIT_CODES,
    run_classification_report,
    run_relaxation,
    run_stability_map,
    run_temperature_sweep,
)
from .scheme import RunStatus

EXIT_USAGE = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _config_args(p):
    p.add_argument("--config", type=Path, default=None,
                   help=f"scenario file (default: first hkhydro.cfg on ${CONFIG_ENV_VAR}, else built-in defaults)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key; repeatable")
    p.add_argument("--output-dir", type=Path, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hkhydro", description="Two-velocity stochastic hydrodynamics laboratory")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("relax", help="perturbation-relaxation experiment")
    _config_args(p)

    p = sub.add_parser("classify", help="type classification of the three systems")
    _config_args(p)

    p = sub.add_parser("stability-map", help="amplification modulus map and stability boundary")
    p.add_argument("--a-gamma", type=_floats, default=[0.01, 0.1, 1.0, 10.0, 100.0])
    p.add_argument("--theta-samples", type=int, default=256)
    p.add_argument("--gamma-samples", type=int, default=4096)
    p.add_argument("--output-dir", type=Path, default=Path("runs/stability"))

    p = sub.add_parser("sweep-temperature", help="general-t relaxation over a temperature list")
    _config_args(p)
    p.add_argument("--T", dest="T_values", type=_floats, default=[0.0, 0.25, 0.5, 1.0, 2.0])
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("validate-config", help="print the resolved configuration")
    _config_args(p)
    return parser


def _load(args):
    path = args.config or find_default_config()
    cfg = load_config(path, args.overrides)
    if args.output_dir is not None:
        cfg = cfg.with_overrides({"output_dir": str(args.output_dir)})
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "stability-map":
            if not args.a_gamma or args.theta_samples < 1:
                raise ConfigError("need a nonempty --a-gamma list and --theta-samples >= 1")
            summary = run_stability_map(args.a_gamma, args.theta_samples, args.output_dir,
                                        args.gamma_samples)
            print(json.dumps(summary, indent=2))
            return 0

        cfg = _load(args)
        if args.command == "validate-config":
            sys.stdout.write(format_config(cfg))
            return 0
        if args.command == "classify":
            result = run_classification_report(cfg, cfg.output_dir)
            print(json.dumps(result, indent=2))
            return 0
        if args.command == "relax":
            report, summary = run_relaxation(cfg)
            print(f"{summary['system']}: {report.status.value} after {report.steps_taken} steps "
                  f"-> {cfg.output_dir}")
            return EXIT_CODES[report.status]
        if args.command == "sweep-temperature":
            rows = run_temperature_sweep(cfg, args.T_values, cfg.output_dir, args.workers)
            for r in rows:
                print(f"T={r['T']:.6g} xi_T={r['xi_T']:.6g} {r['status']} halving_time={r['halving_time']}")
            worst = max((RunStatus(r["status"]) for r in rows), key=EXIT_CODES.get)
            return EXIT_CODES[worst]
    except (ConfigError, ValueError) as exc:
        print(f"hkhydro: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
