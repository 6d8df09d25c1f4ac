"""Closed-loop budgeted MPC, the open-loop baseline, and the docking test.

The closed loop solves one subproblem per step from the current plant state,
applies the first control of the returned sequence, propagates the plant one
step, and optionally injects additive uniform state noise (quaternion
renormalized afterwards).  The loop stops early once the docking criterion
holds; a trial that never docks is a result, not a failure.

The open-loop baseline solves the same problem once, without the iteration
budget, and plays the resulting control sequence out with no feedback.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import _backend
from .dynamics import State13, integrator_code
from .ocp import ControlSequence, cost_arrays
from .solver import SolverConfig, solve


@dataclass(frozen=True)
class MissionConfig:
    """Mission-level knobs for one trial.

    ``perturbation`` is "off" or "uniform"; uniform noise is drawn
    componentwise from [0, w_max) by default (set ``symmetric_noise`` for the
    [-w_max, w_max) variant).
    """

    max_steps: int = 1000
    success_tol: float = 1e-3
    perturbation: str = "off"
    w_max: float = 1e-4
    symmetric_noise: bool = False
    plant_integrator: str = "euler"
    warm_start: str = "shift"

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.success_tol <= 0.0:
            raise ValueError("success_tol must be positive")
        if self.w_max < 0.0:
            raise ValueError("w_max must be nonnegative")
        if self.perturbation not in ("off", "uniform"):
            raise ValueError("perturbation must be 'off' or 'uniform'")
        if self.warm_start not in ("shift", "hold"):
            raise ValueError("warm_start must be 'shift' or 'hold'")
        integrator_code(self.plant_integrator)


@dataclass(frozen=True)
class TrialRecord:
    """Everything recorded about one trial.

    ``states`` has one more row than ``controls`` when produced by a run (the
    terminal state is kept); records reconstructed from persisted CSVs carry
    only the per-step states.  ``descent_ok`` aggregates the per-solve check
    that accepted costs never increased.
    """

    trial_id: int
    j_max: int
    dt: float
    states: np.ndarray
    controls: np.ndarray
    stage_costs: np.ndarray
    iterations: np.ndarray
    reasons: tuple
    loop_times: np.ndarray
    docked: bool
    dock_step: int
    descent_ok: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def steps(self):
        return self.controls.shape[0]


def is_docked(x, u, tol):
    """True iff every component of (u, x - x_d) is within ``tol`` (inclusive)."""
    z = np.concatenate((u.as_array(), x.as_array()))
    z[6 + 6] -= 1.0  # quaternion scalar measured against 1
    return bool(np.max(np.abs(z)) <= tol)


def warm_start_next(prev, mode):
    """Warm start for the next step: 'shift' drops the first control and
    repeats the last; 'hold' returns the sequence unchanged."""
    if mode == "hold":
        return ControlSequence(prev.values)
    if mode == "shift":
        return ControlSequence(np.vstack((prev.values[1:], prev.values[-1:])))
    raise ValueError("warm start mode must be 'shift' or 'hold'")


def _stage_cost(x_arr, u_arr, spec):
    e = x_arr - spec.kernel_args()[5]
    return float(e @ (spec.Q * e) + u_arr @ (spec.R * u_arr))


def _perturb(x_arr, rng, mcfg):
    lo = -mcfg.w_max if mcfg.symmetric_noise else 0.0
    y = x_arr + rng.uniform(lo, mcfg.w_max, 13)
    y[6:10] /= np.sqrt(np.sum(y[6:10] ** 2))
    return y


def run_closed_loop(x0, spec, scfg, mcfg, seed):
    """One budgeted-MPC trial from ``x0``; deterministic given ``seed``."""
    rng = np.random.default_rng(seed)
    plant_method = integrator_code(mcfg.plant_integrator)
    p = spec.params.kernel_params()
    bound = spec.bounds_array()

    x = x0.as_array()
    warm = ControlSequence.zeros(spec.horizon)
    states = [x.copy()]
    controls, costs, iters, reasons, times = [], [], [], [], []
    docked, dock_step, descent_ok = False, -1, True

    for k in range(mcfg.max_steps):
        outcome = solve(spec, State13.from_array(x), warm, scfg)
        u = outcome.useq.values[0]

        if scfg.j_max is not None and outcome.iterations > scfg.j_max:
            raise AssertionError("iteration budget exceeded")  # pragma: no cover
        if np.any(np.abs(outcome.useq.values) > bound):
            raise AssertionError("solver returned an infeasible sequence")  # pragma: no cover
        if np.any(np.diff(outcome.accepted_costs) > 0.0):
            descent_ok = False

        controls.append(u.copy())
        costs.append(_stage_cost(x, u, spec))
        iters.append(outcome.iterations)
        reasons.append(outcome.reason)
        times.append(outcome.wall_time)

        if is_docked(State13.from_array(x), outcome.useq[0], mcfg.success_tol):
            docked, dock_step = True, k

        x = _backend.step(x, u, spec.dt, plant_method, p)
        if mcfg.perturbation == "uniform":
            x = _perturb(x, rng, mcfg)
        states.append(x.copy())
        if docked:
            break
        warm = warm_start_next(outcome.useq, mcfg.warm_start)

    return TrialRecord(
        trial_id=0,
        j_max=scfg.j_max,
        dt=spec.dt,
        states=np.array(states),
        controls=np.array(controls),
        stage_costs=np.array(costs),
        iterations=np.array(iters, dtype=int),
        reasons=tuple(reasons),
        loop_times=np.array(times),
        docked=docked,
        dock_step=dock_step,
        descent_ok=descent_ok,
    )


def run_open_loop(x0, spec, mcfg, seed, scfg=None):
    """Solve once offline, then play the sequence out without feedback.

    The full control sequence is applied even after the docking criterion is
    met (there is no feedback to stop on); ``docked`` reports whether any
    step satisfied it.
    """
    rng = np.random.default_rng(seed)
    plant_method = integrator_code(mcfg.plant_integrator)
    p = spec.params.kernel_params()
    if scfg is None:
        scfg = SolverConfig(j_max=None)
    else:
        scfg = replace(scfg, j_max=None)

    offline = solve(spec, x0, ControlSequence.zeros(spec.horizon), scfg)
    useq = offline.useq.values

    x = x0.as_array()
    states = [x.copy()]
    controls, costs = [], []
    docked, dock_step = False, -1
    for i in range(spec.horizon):
        u = useq[i]
        controls.append(u.copy())
        costs.append(_stage_cost(x, u, spec))
        if not docked and is_docked(State13.from_array(x), ControlSequence(useq)[i], mcfg.success_tol):
            docked, dock_step = True, i
        x = _backend.step(x, u, spec.dt, plant_method, p)
        if mcfg.perturbation == "uniform":
            x = _perturb(x, rng, mcfg)
        states.append(x.copy())

    n = spec.horizon
    return TrialRecord(
        trial_id=0,
        j_max=None,
        dt=spec.dt,
        states=np.array(states),
        controls=np.array(controls),
        stage_costs=np.array(costs),
        iterations=np.zeros(n, dtype=int),
        reasons=tuple(["OpenLoop"] * n),
        loop_times=np.zeros(n),
        docked=docked,
        dock_step=dock_step,
        meta={
            "offline_iterations": offline.iterations,
            "offline_reason": offline.reason,
            "offline_wall_time": offline.wall_time,
            "offline_cost": float(cost_arrays(x0.as_array(), useq, spec)),
        },
    )
