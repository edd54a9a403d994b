"""Scenario drivers and their on-disk artifacts.

Every CSV is written with ``%.17g`` so that identical configurations give
byte-identical data files.
"""
from __future__ import annotations

import dataclasses
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import thermo
from .config import ScenarioConfig, flatten
from .grid import FieldState, gaussian_bump
from .pde import (
    PdeSystem,
    StateVec,
    SystemKind,
    WrongTypeError,
    characteristic_speed,
    classify,
    classify_field,
    make_system,
)
from .scheme import DIAGNOSTIC_KEYS, RunReport, RunStatus, run
from .stability import STABLE_SLACK, gamma_polygon, stability_map

__all__ = [
    "InsufficientAmplitudeError",
    "TwoHump",
    "build_system",
    "build_initial",
    "standard_snapshot_times",
    "simulate",
    "run_relaxation",
    "report_two_hump",
    "run_classification_report",
    "run_stability_map",
    "run_temperature_sweep",
    "halving_time",
    "EXIT_CODES",
]

FLOAT_FMT = "%.17g"
STANDARD_STEPS = (0, 1, 20, 50)
EXIT_CODES = {RunStatus.COMPLETED: 0, RunStatus.DIVERGED: 2, RunStatus.ITERATION_FAILED: 3}


class InsufficientAmplitudeError(ValueError):
    pass


def build_system(cfg: ScenarioConfig, kind: Optional[SystemKind] = None) -> PdeSystem:
    kind = SystemKind(kind or cfg.system)
    _, _, xi = thermo.temperature_factors(cfg.thermo)
    return make_system(kind, xi=xi)


def build_initial(cfg: ScenarioConfig) -> FieldState:
    i = cfg.init
    return gaussian_bump(cfg.grid.build(), i.u_inf, i.v_inf, i.epsilon, i.sigma, i.q0)


def standard_snapshot_times(cfg: ScenarioConfig) -> list:
    """{0, tau, 20 tau, 50 tau} inside the horizon, merged with the configured times."""
    tau = cfg.tau
    times = {k * tau for k in STANDARD_STEPS if k <= cfg.solver.max_steps}
    times.update(cfg.snapshot_times)
    return sorted(times)


def simulate(cfg: ScenarioConfig, kind: Optional[SystemKind] = None) -> RunReport:
    i = cfg.init
    return run(build_system(cfg, kind), build_initial(cfg), cfg.solver,
               standard_snapshot_times(cfg), background=(i.u_inf, i.v_inf))


def _write_csv(path: Path, columns: dict) -> None:
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns.values()])
    np.savetxt(path, data, fmt=FLOAT_FMT, delimiter=",", header=",".join(columns), comments="")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"not serializable: {type(obj)}")


def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else float(x)


@dataclass
class TwoHump:
    two_hump: bool
    positions: list
    values: list


def report_two_hump(report: RunReport, tau: float, floor_rel: float = 1e-3) -> TwoHump:
    """Count the significant lobes of ``v - v_inf`` at ``t = tau``.

    A lobe is a maximal run of nodes of one sign whose magnitude exceeds
    ``floor_rel * max|v - v_inf|``.  The profile is two-hump when exactly two
    lobes of opposite sign remain; the extremum of each lobe is returned.
    """
    snap = report.snapshot_at(tau)
    dv = snap.v - report.background[1]
    peak = float(np.max(np.abs(dv)))
    if peak < 1e-12:
        raise InsufficientAmplitudeError(f"max|v - v_inf| = {peak:.3e} at t = {tau:.6g}")
    sign = np.where(np.abs(dv) > floor_rel * peak, np.sign(dv), 0.0)
    lobes = []
    start = None
    for k in range(len(sign) + 1):
        s = sign[k] if k < len(sign) else 0.0
        if start is not None and s != sign[start]:
            lobes.append((start, k))
            start = None
        if start is None and s != 0.0:
            start = k
    if snap.grid.periodic and len(lobes) > 1 and lobes[0][0] == 0 and lobes[-1][1] == len(sign) \
            and sign[0] == sign[-1]:
        # lobe wrapping through the periodic seam
        (a0, a1), (b0, b1) = lobes[0], lobes.pop()
        lobes[0] = (b0, a1 + len(sign))
    q = snap.q
    positions, values = [], []
    for a, b in lobes:
        idx = np.arange(a, b) % len(sign)
        k = idx[np.argmax(np.abs(dv[idx]))]
        positions.append(float(q[k]))
        values.append(float(dv[k]))
    two = len(lobes) == 2 and values[0] * values[1] < 0
    return TwoHump(two, positions, values)


def halving_time(report: RunReport) -> Optional[float]:
    d = report.diagnostics
    if len(d.get("t", ())) == 0:
        return None
    amp = d["max_du"]
    below = np.nonzero(amp <= 0.5 * amp[0])[0]
    if amp[0] == 0 or below.size == 0:
        return None
    return float(d["t"][below[0]])


PLOT_SCRIPT = '''\
"""Plot the relaxation snapshots and diagnostics written next to this file."""
import json
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

here = Path(__file__).resolve().parent
summary = json.loads((here / "summary.json").read_text())
snaps = summary["snapshots"]
fig, axes = plt.subplots(2, len(snaps), figsize=(3.2 * len(snaps), 5), sharex=True, squeeze=False)
for j, snap in enumerate(snaps):
    data = np.loadtxt(here / snap["file"], delimiter=",", skiprows=1)
    axes[0, j].plot(data[:, 0], data[:, 1])
    axes[1, j].plot(data[:, 0], data[:, 2], color="C1")
    axes[0, j].set_title(f"t = {snap['t_over_tau']:.4g} tau")
axes[0, 0].set_ylabel("u")
axes[1, 0].set_ylabel("v")
for ax in axes[1]:
    ax.set_xlabel("q")
fig.tight_layout()
fig.savefig(here / "snapshots.png", dpi=120)

diag = np.loadtxt(here / "diagnostics.csv", delimiter=",", skiprows=1)
fig2, ax = plt.subplots(figsize=(5, 3.5))
ax.semilogy(diag[:, 0], diag[:, 1], label="max|u - u_inf|")
ax.semilogy(diag[:, 0], np.maximum(diag[:, 2], 1e-300), label="max|v - v_inf|")
ax.set_xlabel("t")
ax.legend()
fig2.tight_layout()
fig2.savefig(here / "diagnostics.png", dpi=120)
'''


def _persist_run(report: RunReport, cfg: ScenarioConfig, out: Path, extra: dict) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    tau = cfg.tau
    snaps = []
    for i, snap in enumerate(report.snapshots):
        name = f"snapshot_{i:02d}.csv"
        _write_csv(out / name, {"q": snap.q, "u": snap.u, "v": snap.v})
        snaps.append({"file": name, "t": snap.t, "t_over_tau": snap.t / tau})
    _write_csv(out / "diagnostics.csv", {k: report.diagnostics[k] for k in DIAGNOSTIC_KEYS})
    summary = {
        "status": report.status.value,
        "exit_code": EXIT_CODES[report.status],
        "message": report.message,
        "steps_taken": report.steps_taken,
        "tau": tau,
        "h": cfg.grid.build().h,
        "background": list(report.background),
        "snapshots": snaps,
        "config": flatten(cfg),
        **extra,
    }
    _write_json(out / "summary.json", summary)
    (out / "plot_relaxation.py").write_text(PLOT_SCRIPT)
    return summary


def run_relaxation(cfg: ScenarioConfig, out_dir=None, kind: Optional[SystemKind] = None):
    """Run the perturbation-relaxation experiment and persist its artifacts.

    Returns ``(report, summary)``; a Diverged run is recorded, not raised.
    """
    out = Path(out_dir or cfg.output_dir)
    start = time.perf_counter()
    report = simulate(cfg, kind)
    elapsed = time.perf_counter() - start
    sys_kind = SystemKind(kind or cfg.system)
    _, _, xi = thermo.temperature_factors(cfg.thermo)
    extra = {"system": sys_kind.value, "xi_T": xi, "runtime_s": elapsed}
    d = report.diagnostics
    tau = cfg.tau
    amps = {}
    for k in STANDARD_STEPS:
        if k <= report.steps_taken:
            amps[f"{k}tau"] = {"max_du": float(d["max_du"][k]), "max_dv": float(d["max_dv"][k])}
    extra["amplitudes"] = amps
    if report.steps_taken >= 1 and len(d["centroid"]) > 1:
        extra["centroid_displacement"] = _finite_or_none(d["centroid"][-1] - d["centroid"][0])
    try:
        hump = report_two_hump(report, tau)
        extra["two_hump"] = dataclasses.asdict(hump)
    except (InsufficientAmplitudeError, KeyError) as exc:
        extra["two_hump"] = {"error": str(exc)}
    summary = _persist_run(report, cfg, out, extra)
    return report, summary


def run_classification_report(cfg: ScenarioConfig, out_dir=None) -> dict:
    """Classify the initial field under all three systems at the configured background."""
    init = build_initial(cfg)
    bg = StateVec(cfg.init.u_inf, cfg.init.v_inf)
    result = {"background": {"u_inf": bg.u, "v_inf": bg.v}, "systems": {}}
    for kind in SystemKind:
        sys = build_system(cfg, kind)
        fc = classify_field(sys, init)
        entry = fc.summary()
        entry["background_type"] = classify(sys, 0.0, 0.0, bg).type_tag.value
        if sys.xi_T is not None:
            entry["xi_T"] = sys.xi_T
        try:
            entry["characteristic_speed_background"] = characteristic_speed(sys, bg)
            speeds = init.u + init.v
            entry["characteristic_speed_range"] = [float(speeds.min()), float(speeds.max())]
        except WrongTypeError:
            entry["characteristic_speed_background"] = None
        result["systems"][kind.value] = entry
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "classification.json", result)
    return result


def run_stability_map(a_gamma_values: Sequence[float], theta_samples: int, out_dir,
                      gamma_samples: int = 4096) -> dict:
    """Largest amplification modulus on ``a_gamma x theta`` plus the boundary polygon.

    theta runs over ``2 pi j / theta_samples``, j = 0..theta_samples-1, i.e. [0, 2 pi).
    """
    if len(a_gamma_values) == 0 or theta_samples < 1:
        raise ValueError("stability map needs a nonempty a*gamma range and theta samples")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ag = np.asarray(a_gamma_values, dtype=float)
    theta = 2.0 * np.pi * np.arange(theta_samples) / theta_samples
    eta = stability_map(ag, theta)
    stable = eta <= 1.0 + STABLE_SLACK
    AG, TH = np.meshgrid(ag, theta, indexing="ij")
    _write_csv(out / "stability_map.csv", {
        "a_gamma": AG.ravel(), "theta": TH.ravel(), "max_eta": eta.ravel(), "stable": stable.ravel(),
    })
    phi, r, s = gamma_polygon(gamma_samples)
    _write_csv(out / "gamma_curve.csv", {"phi": phi, "r": r, "s": s})
    summary = {
        "n_points": int(stable.size),
        "n_stable": int(stable.sum()),
        "all_stable": bool(stable.all()),
        "max_eta": float(eta.max()),
        "a_gamma": ag.tolist(),
        "theta_samples": theta_samples,
        "gamma_samples": gamma_samples,
    }
    _write_json(out / "stability_summary.json", summary)
    return summary


def _sweep_one(args):
    cfg, T, out = args
    cfg_T = dataclasses.replace(cfg, system=SystemKind.GENERAL_T,
                                thermo=dataclasses.replace(cfg.thermo, T=float(T)))
    report, summary = run_relaxation(cfg_T, out)
    alpha_sq, upsilon, xi = thermo.temperature_factors(cfg_T.thermo)
    return {
        "T": float(T),
        "xi_T": xi,
        "upsilon": upsilon,
        "D_eff": thermo.effective_diffusion(cfg_T.thermo),
        "status": report.status.value,
        "steps_taken": report.steps_taken,
        "halving_time": halving_time(report),
        "final_max_du": float(report.diagnostics["max_du"][-1]),
    }


def run_temperature_sweep(cfg: ScenarioConfig, T_values: Sequence[float], out_dir=None,
                          workers: int = 1) -> list:
    """General-t relaxation at each temperature; one run directory per T plus ``sweep.csv``."""
    if any(not (T >= 0) for T in T_values):
        raise ValueError("temperatures must be >= 0")
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, T, out / f"T_{i:02d}") for i, T in enumerate(T_values)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(job) for job in jobs]
    status_code = {s.value: EXIT_CODES[s] for s in RunStatus}
    _write_csv(out / "sweep.csv", {
        "T": [r["T"] for r in rows],
        "xi_T": [r["xi_T"] for r in rows],
        "upsilon": [r["upsilon"] for r in rows],
        "D_eff": [r["D_eff"] for r in rows],
        "status_code": [status_code[r["status"]] for r in rows],
        "steps_taken": [r["steps_taken"] for r in rows],
        "halving_time": [math.nan if r["halving_time"] is None else r["halving_time"] for r in rows],
        "final_max_du": [r["final_max_du"] for r in rows],
    })
    _write_json(out / "sweep_summary.json", rows)
    return rows
