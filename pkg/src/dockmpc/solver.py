"""Iteration-budgeted anytime solver for the box-constrained subproblem.

Projected-gradient descent with an Armijo backtracking line search along the
projection arc.  One iteration is one accepted projected-gradient step,
including its line search.  The iteration budget ``j_max`` caps how many such
steps a single ``solve`` call may take; the solver returns its best iterate
when the budget, the optimality tolerance, or a stalled line search stops it.
Suboptimality is a value here, never an error.

The trial step for each line search follows a spectral (Barzilai-Borwein)
rule by default, which is deterministic (a pure function of the iterate
history) and handles the wide dynamic range of the cost weights far better
than a fixed initial step; ``step_rule="fixed"`` restores the plain rule.

The reported optimality measure is the projected-gradient infinity norm
``|project(u - g) - u|_inf / max(1, |u|_inf)``.  With an unbounded budget the
solver still stops at ``unbounded_iteration_ceiling`` accepted steps: a
first-order method cannot reliably reach tight stationarity on this problem's
conditioning, and the ceiling plays the role of the internal iteration limit
every practical NLP solver carries.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .ocp import ControlSequence, cost_and_gradient_arrays, cost_arrays

#: termination reasons
OPTIMALITY_TOL = "OptimalityTol"
ITERATION_CAP = "IterationCap"
LINE_SEARCH_STALL = "LineSearchStall"


@dataclass(frozen=True)
class ArmijoParams:
    """Backtracking parameters: trial step, shrink factor, sufficient-decrease
    constant."""

    initial_step: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4

    def __post_init__(self):
        if not (0.0 < self.shrink < 1.0):
            raise ValueError("shrink factor must be in (0, 1)")
        if not (0.0 < self.sufficient_decrease < 1.0):
            raise ValueError("sufficient-decrease constant must be in (0, 1)")
        if self.initial_step <= 0.0:
            raise ValueError("initial step must be positive")


@dataclass(frozen=True)
class SolverConfig:
    """Solver knobs; ``j_max=None`` means an unbounded budget ('optimal')."""

    j_max: int = None
    opt_tol: float = 1e-5
    armijo: ArmijoParams = field(default_factory=ArmijoParams)
    max_backtracks: int = 60
    step_rule: str = "adaptive"
    unbounded_iteration_ceiling: int = 300

    def __post_init__(self):
        if self.j_max is not None and self.j_max < 1:
            raise ValueError("j_max must be a positive integer or None")
        if self.opt_tol <= 0.0:
            raise ValueError("opt_tol must be positive")
        if self.step_rule not in ("adaptive", "fixed"):
            raise ValueError("step_rule must be 'adaptive' or 'fixed'")
        if self.max_backtracks < 1 or self.unbounded_iteration_ceiling < 1:
            raise ValueError("iteration limits must be positive")

    @property
    def iteration_limit(self):
        return self.j_max if self.j_max is not None else self.unbounded_iteration_ceiling


@dataclass(frozen=True)
class SolveOutcome:
    """Anytime solve result.

    ``accepted_costs`` holds the cost of the start point followed by every
    accepted iterate, so descent is auditable after the fact.
    """

    useq: ControlSequence
    iterations: int
    reason: str
    optimality: float
    wall_time: float
    accepted_costs: np.ndarray


def project_box(useq, lower, upper):
    """Componentwise clamp of a control sequence onto [lower, upper]."""
    lo = lower.as_array()
    hi = upper.as_array()
    if np.any(lo > hi):
        raise ValueError("lower bound exceeds upper bound")
    return ControlSequence(np.clip(useq.values, lo, hi))


def _project_arr(u, bound):
    return np.clip(u, -bound, bound)


def _pg_measure(u, g, bound):
    """Projected-gradient infinity norm, normalized by the iterate scale."""
    r = np.max(np.abs(_project_arr(u - g, bound) - u))
    return float(r / max(1.0, np.max(np.abs(u))))


def solve(spec, x0, warm, cfg):
    """Run budgeted projected-gradient descent from ``project_box(warm)``.

    Returns the best iterate found; its cost never exceeds the cost of the
    projected warm start, and the accepted-cost sequence is non-increasing.
    """
    if len(warm) != spec.horizon:
        raise ValueError(f"warm start length {len(warm)} does not match horizon {spec.horizon}")
    t_start = time.perf_counter()
    bound = spec.bounds_array()
    x0_arr = x0.as_array()

    u = np.clip(warm.values, -bound, bound)
    cost_u, grad = cost_and_gradient_arrays(x0_arr, u, spec)
    accepted = [cost_u]
    iterations = 0
    trial = cfg.armijo.initial_step
    limit = cfg.iteration_limit

    while True:
        measure = _pg_measure(u, grad, bound)
        if measure <= cfg.opt_tol:
            reason = OPTIMALITY_TOL
            break
        if iterations >= limit:
            reason = ITERATION_CAP
            break

        alpha = trial if cfg.step_rule == "adaptive" else cfg.armijo.initial_step
        u_new = None
        for _ in range(cfg.max_backtracks):
            cand = _project_arr(u - alpha * grad, bound)
            cost_cand = cost_arrays(x0_arr, cand, spec)
            slope = float(np.sum(grad * (cand - u)))
            if cost_cand <= cost_u + cfg.armijo.sufficient_decrease * slope:
                u_new = cand
                break
            alpha *= cfg.armijo.shrink
        if u_new is None:
            reason = LINE_SEARCH_STALL
            break

        iterations += 1
        cost_new, grad_new = cost_and_gradient_arrays(x0_arr, u_new, spec)
        if cfg.step_rule == "adaptive":
            s = (u_new - u).ravel()
            y = (grad_new - grad).ravel()
            sy = float(s @ y)
            if sy > 1e-300:
                trial = min(max(float(s @ s) / sy, 1e-30), 1e30)
            else:
                trial = alpha / cfg.armijo.shrink
        u, cost_u, grad = u_new, cost_new, grad_new
        accepted.append(cost_u)

    return SolveOutcome(
        useq=ControlSequence(u),
        iterations=iterations,
        reason=reason,
        optimality=measure,
        wall_time=time.perf_counter() - t_start,
        accepted_costs=np.array(accepted),
    )
