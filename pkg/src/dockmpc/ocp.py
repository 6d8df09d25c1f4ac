"""Finite-horizon optimal control subproblem (single shooting).

One ``OcpSpec`` fixes everything about a subproblem except the initial state:
horizon, timestep, diagonal quadratic weights, the docking target, box bounds
on the controls, and the integrator used for the model rollout.  States are
recovered from controls by forward rollout, so the flattened control sequence
is the only decision variable.

The stage cost is ``(x - x_d)' Q (x - x_d) + u' R u`` summed over stages
``0 .. N-1`` of the rollout, with no terminal term; the quaternion enters the
state error through ``(eta - 1, rho)``.  ``cost_gradient`` is the exact
gradient of that sum by a backward adjoint sweep with analytic step Jacobians
(quaternion renormalization included), and is checked against central finite
differences in the test suite.
"""

from dataclasses import dataclass, field

import numpy as np

from .dynamics import Control6, PhysicalParams, State13, integrator_code
from . import _backend


@dataclass(frozen=True)
class ControlSequence:
    """Ordered sequence of N controls, stored as an (N, 6) array."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 6)
        if arr.ndim != 2 or arr.shape[1] != 6 or arr.shape[0] < 1:
            raise ValueError("control sequence must have shape (N, 6) with N >= 1")
        object.__setattr__(self, "values", arr.copy())

    @staticmethod
    def zeros(n):
        return ControlSequence(np.zeros((n, 6)))

    @staticmethod
    def from_controls(controls):
        return ControlSequence(np.stack([c.as_array() for c in controls]))

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, i):
        return Control6.from_array(self.values[i])

    def as_array(self):
        return self.values.copy()

    def as_flat(self):
        """Serialize as 6N scalars (row-major over stages)."""
        return self.values.reshape(-1).copy()


@dataclass(frozen=True)
class OcpSpec:
    """Definition of one finite-horizon subproblem.

    ``u_lower`` must equal ``-u_upper`` componentwise (symmetric box), and
    the diagonal weights must be nonnegative.
    """

    horizon: int
    dt: float
    Q: np.ndarray
    R: np.ndarray
    x_d: State13
    u_d: Control6
    u_upper: Control6
    integrator: str
    params: PhysicalParams
    u_lower: Control6 = None

    def __post_init__(self):
        object.__setattr__(self, "Q", np.asarray(self.Q, dtype=float).reshape(13).copy())
        object.__setattr__(self, "R", np.asarray(self.R, dtype=float).reshape(6).copy())
        if self.u_lower is None:
            object.__setattr__(self, "u_lower", Control6.from_array(-self.u_upper.as_array()))
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if np.any(self.Q < 0.0) or np.any(self.R < 0.0):
            raise ValueError("cost weights must be nonnegative")
        if not np.array_equal(self.u_lower.as_array(), -self.u_upper.as_array()):
            raise ValueError("u_lower must equal -u_upper componentwise")
        integrator_code(self.integrator)
        object.__setattr__(self, "_method", integrator_code(self.integrator))
        object.__setattr__(self, "_p", self.params.kernel_params())
        object.__setattr__(self, "_xt", self.x_d.as_array())

    # pre-packed kernel arguments (cached at construction)
    _method: int = field(init=False, repr=False, default=0)
    _p: np.ndarray = field(init=False, repr=False, default=None)
    _xt: np.ndarray = field(init=False, repr=False, default=None)

    def kernel_args(self):
        """(dt, method_code, params, Q, R, x_target) as consumed by kernels."""
        return self.dt, self._method, self._p, self.Q, self.R, self._xt

    def bounds_array(self):
        return self.u_upper.as_array()

    def _check_length(self, useq):
        if len(useq) != self.horizon:
            raise ValueError(
                f"control sequence length {len(useq)} does not match horizon {self.horizon}"
            )


def rollout(x0, useq, spec):
    """Forward-propagate ``x0`` under ``useq``; returns N+1 states."""
    spec._check_length(useq)
    dt, method, p, _, _, _ = spec.kernel_args()
    traj = _backend.rollout(x0.as_array(), useq.values, dt, method, p)
    return [State13.from_array(row) for row in traj]


def cost(x0, useq, spec):
    """Stage-cost sum along the rollout of ``useq`` from ``x0``."""
    spec._check_length(useq)
    dt, method, p, qd, rd, xt = spec.kernel_args()
    return float(_backend.cost(x0.as_array(), useq.values, dt, method, p, qd, rd, xt))


def cost_gradient(x0, useq, spec):
    """Exact cost gradient w.r.t. the flattened controls, as a 6N vector."""
    spec._check_length(useq)
    dt, method, p, qd, rd, xt = spec.kernel_args()
    _, grad = _backend.cost_and_gradient(x0.as_array(), useq.values, dt, method, p, qd, rd, xt)
    return grad.reshape(-1)


def cost_and_gradient_arrays(x0_arr, u_arr, spec):
    """Array-level fused cost/gradient used by the solver loop."""
    dt, method, p, qd, rd, xt = spec.kernel_args()
    return _backend.cost_and_gradient(x0_arr, u_arr, dt, method, p, qd, rd, xt)


def cost_arrays(x0_arr, u_arr, spec):
    """Array-level cost used by the solver line search."""
    dt, method, p, qd, rd, xt = spec.kernel_args()
    return float(_backend.cost(x0_arr, u_arr, dt, method, p, qd, rd, xt))
