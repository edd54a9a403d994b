"""Implicit three-layer integrator for ``y_t + A(y) y_q = phi``.

The scheme is

    (3 y^{n+1} - 4 y^n + y^{n-1}) / (2 tau)
        + A(y^{n+1}) (y^{n+1}_{k+1} - y^{n+1}_{k-1}) / (2 h) = phi(y^{n+1})

solved by Picard iteration on the frozen matrix ``A``.  Level 1 comes from
one implicit two-layer step.  Any object exposing ``n_components``,
``advection_matrix(t, q, y) -> (n, m, m)`` and ``source_term(t, q, y) ->
(m, n)`` can be integrated; :class:`~hkhydro.pde.PdeSystem` and
:class:`ScalarAdvection` both do.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import cumulative_trapezoid, trapezoid

from .grid import FieldState, Grid

log = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "RunStatus",
    "RunReport",
    "SolverError",
    "IterationFailed",
    "Diverged",
    "SingularMatrixError",
    "CFLViolationError",
    "ScalarAdvection",
    "solve_linear_system",
    "advance_two_layer",
    "advance_three_layer",
    "bootstrap_first_step",
    "step_three_layer",
    "run",
    "explicit_reference",
    "reference_explicit_solve",
    "reconstruct_rho_theta",
]

RESIDUAL_RTOL = 1e-10
LOG_RANGE_GUARD = 700.0


@dataclass(frozen=True)
class SolverConfig:
    picard_tol: float = 1e-10
    picard_max_iters: int = 50
    blowup_factor: float = 1e6
    max_steps: int = 60
    # Picard non-convergence is read as blow-up of the solution; set False to
    # report it as IterationFailed instead
    picard_failure_diverges: bool = True

    def __post_init__(self):
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.picard_max_iters < 1:
            raise ValueError("picard_max_iters must be >= 1")
        if not self.blowup_factor > 1:
            raise ValueError("blowup_factor must exceed 1")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


class RunStatus(str, Enum):
    COMPLETED = "Completed"
    DIVERGED = "Diverged"
    ITERATION_FAILED = "IterationFailed"


class SolverError(RuntimeError):
    pass


class IterationFailed(SolverError):
    pass


class Diverged(SolverError):
    pass


class SingularMatrixError(SolverError):
    pass


class CFLViolationError(ValueError):
    pass


@dataclass(frozen=True)
class ScalarAdvection:
    """``y_t + a y_q = 0`` with constant speed ``a``; one component."""

    a: float = 1.0
    n_components = 1

    def advection_matrix(self, t, q, y):
        return np.full((y.shape[1], 1, 1), float(self.a))

    def source_term(self, t, q, y):
        return np.zeros_like(y)


def _sup(y) -> float:
    return float(np.max(np.abs(y))) if y.size else 0.0


def _assemble(blocks: np.ndarray, grid: Grid, diag: float, coupling: float) -> sp.csc_matrix:
    # diag * y_k + coupling * A_k (y_{k+1} - y_{k-1}); unknowns interleaved as k*m + component
    n, m, _ = blocks.shape
    k = np.arange(n)
    rows_c, cols_d = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    row = k[:, None, None] * m + rows_c[None]
    vals = coupling * blocks

    if grid.periodic:
        kp, km = (k + 1) % n, (k - 1) % n
        interior = np.ones(n, dtype=bool)
    else:
        kp, km = np.minimum(k + 1, n - 1), np.maximum(k - 1, 0)
        interior = (k > 0) & (k < n - 1)

    col_p = kp[:, None, None] * m + cols_d[None]
    col_m = km[:, None, None] * m + cols_d[None]
    sel = interior[:, None, None] & np.ones((1, m, m), dtype=bool)
    r = np.concatenate([row[sel], row[sel], np.arange(n * m)])
    c = np.concatenate([col_p[sel], col_m[sel], np.arange(n * m)])
    v = np.concatenate([vals[sel], -vals[sel], np.full(n * m, float(diag))])
    if not grid.periodic:
        # pinned end nodes: identity rows
        ends = np.concatenate([np.arange(m), (n - 1) * m + np.arange(m)])
        v[-n * m:][ends] = 1.0
    return sp.csc_matrix((v, (r, c)), shape=(n * m, n * m))


def solve_linear_system(blocks, rhs, grid: Grid, *, diag: float, coupling: float,
                        pinned: Optional[np.ndarray] = None) -> np.ndarray:
    """Solve ``diag y_k + coupling A_k (y_{k+1} - y_{k-1}) = rhs_k``.

    ``blocks`` has shape (n, m, m), ``rhs`` shape (m, n).  Periodic grids give
    a cyclic block-tridiagonal matrix; on far-field grids the two end nodes
    are set to ``pinned[:, 0]`` and ``pinned[:, -1]`` (defaults to ``rhs``).
    """
    blocks = np.asarray(blocks, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    m, n = rhs.shape
    b = rhs.T.copy()
    if not grid.periodic:
        ends = rhs if pinned is None else pinned
        b[0], b[-1] = ends[:, 0], ends[:, -1]
    b = b.ravel()
    mat = _assemble(blocks, grid, diag, coupling)
    try:
        x = spla.splu(mat).solve(b)
    except RuntimeError as exc:
        raise SingularMatrixError(f"block pivot breakdown: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularMatrixError("non-finite solution of the linear system")
    resid = _sup(mat @ x - b)
    if resid > RESIDUAL_RTOL * max(_sup(b), np.finfo(float).tiny):
        raise SingularMatrixError(f"linear residual {resid:.3e} exceeds tolerance")
    x = x.reshape(n, m)
    if not grid.periodic:
        # LU pivoting may perturb the identity rows by an ulp
        x[0], x[-1] = b[:m], b[-m:]
    return x.T


def _picard(system, grid, t_new, y_guess, base_rhs, phi_weight, diag, coupling, cfg, limit):
    q = grid.nodes()
    pinned = y_guess if not grid.periodic else None
    y = y_guess
    for it in range(1, cfg.picard_max_iters + 1):
        blocks = system.advection_matrix(t_new, q, y)
        rhs = base_rhs + phi_weight * system.source_term(t_new, q, y)
        y_new = solve_linear_system(blocks, rhs, grid, diag=diag, coupling=coupling, pinned=pinned)
        size = _sup(y_new)
        if not np.isfinite(size) or size > limit:
            raise Diverged(f"iterate sup-norm {size:.3e} exceeds blow-up limit {limit:.3e} at t={t_new:.6g}")
        if _sup(y_new - y) <= cfg.picard_tol * max(size, np.finfo(float).tiny):
            return y_new, it
        y = y_new
    raise IterationFailed(f"Picard iteration did not converge in {cfg.picard_max_iters} iterations at t={t_new:.6g}")


def _limit(cfg, scale):
    return cfg.blowup_factor * max(1.0, scale)


def advance_two_layer(system, grid, t0, y0, cfg: SolverConfig, scale=None):
    """One implicit two-layer step ``(y1 - y0)/tau + A(y1) D y1 = phi(y1)``; returns (y1, iterations)."""
    scale = _sup(y0) if scale is None else scale
    return _picard(system, grid, t0 + grid.tau, y0, y0, grid.tau, 1.0, 0.5 * grid.gamma,
                   cfg, _limit(cfg, scale))


def advance_three_layer(system, grid, t_new, y_prev, y_curr, cfg: SolverConfig, scale=None):
    """Level n+1 from levels n-1 and n; returns (y_next, iterations)."""
    scale = _sup(y_curr) if scale is None else scale
    base = 4.0 * y_curr - y_prev
    return _picard(system, grid, t_new, y_curr, base, 2.0 * grid.tau, 3.0, grid.gamma,
                   cfg, _limit(cfg, scale))


def bootstrap_first_step(sys, init: FieldState, cfg: SolverConfig) -> FieldState:
    y1, _ = advance_two_layer(sys, init.grid, init.t, init.stacked(), cfg)
    return FieldState.from_stacked(init.t + init.grid.tau, y1, init.grid)


def step_three_layer(sys, prev: FieldState, curr: FieldState, cfg: SolverConfig,
                     scale: Optional[float] = None) -> FieldState:
    grid = curr.grid
    if prev.grid != grid:
        raise ValueError("prev and curr live on different grids")
    if not math.isclose(prev.t + grid.tau, curr.t, rel_tol=1e-12, abs_tol=1e-12 * grid.tau):
        raise ValueError("levels are not one time step apart")
    y, _ = advance_three_layer(sys, grid, curr.t + grid.tau, prev.stacked(), curr.stacked(), cfg, scale)
    return FieldState.from_stacked(curr.t + grid.tau, y, grid)


@dataclass
class RunReport:
    status: RunStatus
    snapshots: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    steps_taken: int = 0
    background: tuple = (0.0, 0.0)
    message: str = ""

    def snapshot_at(self, t: float, rtol: float = 1e-9) -> FieldState:
        for snap in self.snapshots:
            if abs(snap.t - t) <= rtol * max(1.0, abs(t)):
                return snap
        raise KeyError(f"no snapshot at t={t}")


DIAGNOSTIC_KEYS = ("t", "max_du", "max_dv", "l2_du", "l2_dv", "centroid", "picard_iters")


def _diagnostics_row(t, y, q, h, background, iters):
    du = y[0] - background[0]
    dv = y[1] - background[1]
    w = np.abs(du)
    total = w.sum()
    centroid = float((q * w).sum() / total) if total > 0 else math.nan
    return (t, _sup(du), _sup(dv), math.sqrt(h * float(du @ du)), math.sqrt(h * float(dv @ dv)),
            centroid, iters)


def run(sys, init: FieldState, cfg: SolverConfig, snapshot_times: Sequence[float] = (),
        background: Optional[tuple] = None) -> RunReport:
    """March the Cauchy problem from ``init`` and collect snapshots and diagnostics.

    Stops after the last requested snapshot time (or ``cfg.max_steps`` when no
    times are given).  Blow-up and Picard failure end the run with the
    corresponding status instead of raising.
    """
    grid = init.grid
    tau = grid.tau
    times = sorted(float(s) for s in snapshot_times)
    horizon = cfg.max_steps * tau
    if times and (times[0] < init.t - 1e-12 * tau or times[-1] > init.t + horizon * (1 + 1e-12)):
        raise ValueError("snapshot times outside the run horizon")
    n_steps = cfg.max_steps if not times else min(cfg.max_steps, math.ceil((times[-1] - init.t) / tau - 1e-9))
    if background is None:
        background = (float(init.u[0]), float(init.v[0]))
    q = grid.nodes()
    report = RunReport(RunStatus.COMPLETED, background=background)
    rows = []

    pending = list(times)

    def level_time(n):
        return init.t + n * tau

    def take_snapshots(n, y_old, y_new):
        # levels n-1 and n bracket any pending request <= t_n
        t_new = level_time(n)
        while pending and pending[0] <= t_new + 1e-9 * tau:
            s = pending.pop(0)
            if abs(s - t_new) <= 1e-9 * tau or y_old is None:
                y = y_new
            else:
                w = (s - level_time(n - 1)) / tau
                y = (1.0 - w) * y_old + w * y_new
            report.snapshots.append(FieldState.from_stacked(s, y, grid))

    y_prev = None
    y_curr = init.stacked()
    scale = _sup(y_curr)
    rows.append(_diagnostics_row(init.t, y_curr, q, grid.h, background, 0))
    take_snapshots(0, None, y_curr)

    for n in range(1, n_steps + 1):
        t_new = level_time(n)
        try:
            if n == 1:
                y_next, iters = advance_two_layer(sys, grid, init.t, y_curr, cfg, scale)
            else:
                y_next, iters = advance_three_layer(sys, grid, t_new, y_prev, y_curr, cfg, scale)
        except (Diverged, SingularMatrixError) as exc:
            report.status, report.message = RunStatus.DIVERGED, str(exc)
            break
        except IterationFailed as exc:
            status = RunStatus.DIVERGED if cfg.picard_failure_diverges else RunStatus.ITERATION_FAILED
            report.status, report.message = status, str(exc)
            break
        report.steps_taken = n
        rows.append(_diagnostics_row(t_new, y_next, q, grid.h, background, iters))
        take_snapshots(n, y_curr, y_next)
        y_prev, y_curr = y_curr, y_next

    if report.status is not RunStatus.COMPLETED:
        log.info("run stopped after %d steps: %s", report.steps_taken, report.message)
    cols = list(zip(*rows))
    report.diagnostics = {k: np.asarray(c, dtype=float) for k, c in zip(DIAGNOSTIC_KEYS, cols)}
    return report


def _spectral_radius(blocks: np.ndarray) -> float:
    if blocks.shape[1] == 1:
        return _sup(blocks)
    return float(np.max(np.abs(np.linalg.eigvals(blocks))))


def _pad(y, periodic):
    if periodic:
        return np.concatenate([y[:, -2:], y, y[:, :2]], axis=1)
    return np.concatenate([y[:, :1], y[:, :1], y, y[:, -1:], y[:, -1:]], axis=1)


def _llf_rate(system, grid, t, q, y, alpha):
    # local Lax-Friedrichs splitting A = A+ + A-, A+- = (A +- alpha I)/2,
    # with second-order one-sided differences on each part
    yp = _pad(y, grid.periodic)
    h = grid.h
    back = (3.0 * yp[:, 2:-2] - 4.0 * yp[:, 1:-3] + yp[:, :-4]) / (2.0 * h)
    fwd = (-3.0 * yp[:, 2:-2] + 4.0 * yp[:, 3:-1] - yp[:, 4:]) / (2.0 * h)
    A = system.advection_matrix(t, q, y)
    central = np.einsum("kij,jk->ik", A, 0.5 * (back + fwd))
    rate = -central - 0.5 * alpha * (back - fwd) + system.source_term(t, q, y)
    if not grid.periodic:
        rate[:, 0] = 0.0
        rate[:, -1] = 0.0
    return rate


def explicit_reference(system, grid: Grid, y0, t0: float, t_end: float, cfl: float = 0.2):
    """Method-of-lines oracle: Lax-Friedrichs splitting in space, Heun (SSP-RK2) in time."""
    if not (0 < cfl <= 0.2):
        raise CFLViolationError(f"reference solver requires 0 < CFL <= 0.2, got {cfl}")
    q = grid.nodes()
    y = np.array(y0, dtype=float)
    t = float(t0)
    while t < t_end - 1e-14 * max(1.0, abs(t_end)):
        alpha = _spectral_radius(system.advection_matrix(t, q, y)) * 1.05
        dt = cfl * grid.h / alpha if alpha > 0 else t_end - t
        dt = min(dt, t_end - t)
        k1 = _llf_rate(system, grid, t, q, y, alpha)
        y1 = y + dt * k1
        alpha1 = _spectral_radius(system.advection_matrix(t + dt, q, y1))
        if alpha1 * dt / grid.h > 1.5 * cfl:
            raise CFLViolationError(f"wave speed {alpha1:.3g} violates CFL {cfl} within a step")
        k2 = _llf_rate(system, grid, t + dt, q, y1, alpha)
        y = 0.5 * (y + y1 + dt * k2)
        t += dt
        if not np.all(np.isfinite(y)):
            raise Diverged("reference solution became non-finite")
    return y


def reference_explicit_solve(sys, init: FieldState, t_end: float, cfl: float = 0.2) -> FieldState:
    y = explicit_reference(sys, init.grid, init.stacked(), init.t, t_end, cfl)
    return FieldState.from_stacked(t_end, y, init.grid)


def reconstruct_rho_theta(field: FieldState, D_eff: float, hbar_over_m: float):
    """Density and phase from u = -D d(ln rho)/dq and v = (hbar/m) d(theta)/dq.

    ``rho`` integrates to one (trapezoid rule over the domain); ``theta`` is
    zero at the left end of the grid.
    """
    q = field.q
    log_rho = -cumulative_trapezoid(field.u, q, initial=0.0) / D_eff
    if np.max(np.abs(log_rho)) > LOG_RANGE_GUARD:
        raise OverflowError("integral of u exceeds the exponent range guard")
    rho = np.exp(log_rho - np.max(log_rho))
    h = field.grid.h
    mass = h * rho.sum() if field.grid.periodic else trapezoid(rho, q)
    theta = cumulative_trapezoid(field.v, q, initial=0.0) / hbar_over_m
    return rho / mass, theta
