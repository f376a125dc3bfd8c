"""Implicit-Euler outer loop: initialize W0, advance to T, collect diagnostics.

A run stops for one of three reasons: the end time is reached, the amplitude
cap max|U| >= cap is hit after a completed step, or a linear solve breaks
down (partial results are still returned).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .assembly import FemOperators, assemble_operators
from .errors import SingularMatrixError
from .grid import build_grid
from .problems import ProblemSpec, sample_nodes
from .solvers import (
    SolverConfig,
    State,
    StepReport,
    m_norm,
    step,
    tau_bound_report,
)
from .sparse import EPS_FLOOR, LuFactorization, matvec

log = logging.getLogger(__name__)

DEFAULT_CAP = 0.3


@dataclass(frozen=True)
class Diagnostics:
    """Per-step scalars recorded after every accepted step (and at t = 0)."""

    u_max: float
    u_mnorm: float
    w_mnorm: float
    elliptic_residual: float


@dataclass
class RunResult:
    """Whole-run time series.

    ``times`` and ``diagnostics`` cover t = 0 and every accepted step;
    ``reports`` has one entry per step; ``states`` holds the snapshots taken
    at ``state_times`` (t = 0, every ``snapshot_every`` steps, and the final
    state).
    """

    times: list[float]
    states: list[State]
    state_times: list[float]
    reports: list[StepReport]
    diagnostics: list[Diagnostics]
    stop_reason: str  # reached_T | amplitude_cap | solver_failure
    tau_report: dict = field(default_factory=dict)

    @property
    def final_state(self) -> State:
        return self.states[-1]

    def total_iterations(self) -> int:
        return sum(r.iterations for r in self.reports)

    def total_wall_time(self) -> float:
        return sum(r.wall_time for r in self.reports)


def init_w0(ops: FemOperators, U0: np.ndarray) -> np.ndarray:
    """Initial W from the elliptic constraint: solve M W0 = K U0."""
    return LuFactorization(ops.M).solve(matvec(ops.K, U0))


def _diagnose(ops: FemOperators, state: State) -> Diagnostics:
    mw = matvec(ops.M, state.W)
    elliptic = float(
        np.linalg.norm(matvec(ops.K, state.U) - mw)
        / max(np.linalg.norm(mw), EPS_FLOOR)
    )
    return Diagnostics(
        u_max=float(np.abs(state.U).max()),
        u_mnorm=m_norm(ops.M, state.U),
        w_mnorm=m_norm(ops.M, state.W),
        elliptic_residual=elliptic,
    )


def run(
    problem: ProblemSpec,
    cfg: SolverConfig,
    T: float,
    snapshot_every: int = 10,
    n: int = 17,
    cap: float = DEFAULT_CAP,
) -> RunResult:
    """Advance the problem from its initial data to time T.

    The grid and the fixed operators are assembled once; U0 is the nodal
    interpolation of u0 and W0 comes from the elliptic solve.  The amplitude
    cap is checked after each completed step.
    """
    if T < 0:
        raise ValueError(f"end time must be nonnegative, got {T}")
    if snapshot_every < 1:
        raise ValueError(f"snapshot_every must be >= 1, got {snapshot_every}")

    grid = build_grid(problem.Lx, problem.Ly, n)
    ops = assemble_operators(grid, problem.grad_p)
    U0 = sample_nodes(problem, grid)
    state = State(U0, init_w0(ops, U0))

    result = RunResult(
        times=[0.0],
        states=[state],
        state_times=[0.0],
        reports=[],
        diagnostics=[_diagnose(ops, state)],
        stop_reason="reached_T",
        tau_report=tau_bound_report(ops, state, cfg.tau, problem.p_norm_1inf, T),
    )

    n_steps = max(0, math.ceil(T / cfg.tau - 1e-10))
    for i in range(n_steps):
        t = (i + 1) * cfg.tau
        try:
            state, report = step(ops, state, cfg)
        except SingularMatrixError as exc:
            log.warning("linear solve failed at t=%.6g: %s", t, exc)
            result.stop_reason = "solver_failure"
            break
        if not report.converged:
            log.warning(
                "step to t=%.6g hit k_max=%d with rel_err=%.3e",
                t,
                cfg.k_max,
                report.final_rel_err,
            )
        result.times.append(t)
        result.reports.append(report)
        diag = _diagnose(ops, state)
        result.diagnostics.append(diag)
        is_snapshot = (i + 1) % snapshot_every == 0
        if is_snapshot:
            result.states.append(state)
            result.state_times.append(t)
        if diag.u_max >= cap:
            result.stop_reason = "amplitude_cap"
            if not is_snapshot:
                result.states.append(state)
                result.state_times.append(t)
            break
    else:
        if n_steps and result.state_times[-1] != result.times[-1]:
            result.states.append(state)
            result.state_times.append(result.times[-1])
    return result


@dataclass(frozen=True)
class AprioriReport:
    """Outcome of checking the growth bound along a completed run."""

    max_w_ratio: float  # sup_t ||w(t)||_M / (e^{3 t ||p||} ||w(0)||_M)
    max_u_excess: float  # sup_t (||u(t)||_M - ||w(t)||_M)
    w_bound_ok: bool
    u_le_w_ok: bool


def apriori_check(result: RunResult, p_norm_1inf: float) -> AprioriReport:
    """Verify ||w(t)|| <= e^{3 t ||p||} ||w(0)|| and ||u(t)|| <= ||w(t)||.

    Evaluated in log space so the (very loose) exponential factor cannot
    overflow; report-only, nothing is raised.
    """
    w0 = result.diagnostics[0].w_mnorm
    max_log_ratio = -math.inf
    max_u_excess = -math.inf
    for t, diag in zip(result.times, result.diagnostics):
        bound_log = 3.0 * t * p_norm_1inf + math.log(max(w0, EPS_FLOOR))
        wlog = math.log(max(diag.w_mnorm, EPS_FLOOR))
        max_log_ratio = max(max_log_ratio, wlog - bound_log)
        max_u_excess = max(max_u_excess, diag.u_mnorm - diag.w_mnorm)
    if w0 == 0.0 and all(d.w_mnorm == 0.0 for d in result.diagnostics):
        max_log_ratio = -math.inf  # zero data: every ratio is 0
    ratio = math.exp(max_log_ratio) if max_log_ratio < 700 else math.inf
    return AprioriReport(
        max_w_ratio=ratio,
        max_u_excess=max_u_excess,
        w_bound_ok=max_log_ratio <= 0.0,
        u_le_w_ok=max_u_excess <= 1e-9,
    )
