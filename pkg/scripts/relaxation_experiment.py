"""Perturbation relaxation on the three systems, with an optional figure.

Runs the default bump on modified-t0, general-t and Nelson, writes each run
directory under --out and prints the amplitude history.
"""
import argparse
from pathlib import Path

from hkhydro.config import load_config
from hkhydro.pde import SystemKind
from hkhydro.scenarios import run_relaxation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=Path, default=None)
    ap.add_argument("--set", dest="overrides", action="append", default=[])
    ap.add_argument("--out", type=Path, default=Path("runs/relaxation"))
    ap.add_argument("--plot", action="store_true", help="render a PNG per run (needs matplotlib)")
    args = ap.parse_args()

    cfg = load_config(args.config, args.overrides)
    for kind in SystemKind:
        out = args.out / kind.value
        report, summary = run_relaxation(cfg, out, kind=kind)
        amps = ", ".join(f"{k}: {v['max_du']:.4f}" for k, v in summary["amplitudes"].items())
        print(f"{kind.value:12s} {report.status.value:10s} steps={report.steps_taken:3d}  max|du| {amps}")
        if args.plot:
            import runpy
            runpy.run_path(str(out / "plot_relaxation.py"), run_name="__main__")


if __name__ == "__main__":
    main()
