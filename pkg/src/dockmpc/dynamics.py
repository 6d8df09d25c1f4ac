"""Quaternion algebra and the 13-state relative-motion dynamics.

Models a controlled deputy satellite relative to an uncontrolled chief on a
circular orbit. Translation follows the Clohessy-Wiltshire equations in the
chief-centered rotating frame, with body-frame thrust rotated into that frame.
Attitude is tracked as the error quaternion (deputy body frame to chief frame)
and the error angular velocity, driven by rigid-body Euler dynamics composed
back into the rotating frame.

Conventions
-----------
* Quaternions are scalar-first, ``q = (eta, rho)``; the inverse is
  ``(eta, -rho)``.  The rotation matrix of a unit quaternion is
  ``R = I - 2*eta*[rho]x + 2*[rho]x^2`` (passive convention), so ``R`` maps
  deputy-body coordinates to chief-frame coordinates when ``q`` is the error
  quaternion.
* The 13-state layout is ``(dr, dv, eta, rho, dw)``: relative position (km),
  relative velocity (km/s), error quaternion, error angular velocity (rad/s).
* Controls are ``(thrust, torque)`` in the deputy body frame.

Thrust scaling
--------------
``PhysicalParams.literal_units`` (default True) applies thrust as
``F / m_d`` directly in the km/s^2 acceleration rows, i.e. the parameter
table is read literally with no N-to-km conversion.  Setting it False adds
the 1/1000 factor of a strict unit analysis.  The two modes are one flag
apart; all shipped experiment defaults use the literal mode.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import _backend

EULER = _backend.EULER
RK4 = _backend.RK4
_METHOD_CODES = {"euler": EULER, "rk4": RK4}

#: Unit-norm deviation above which inputs are flagged (warned) before use.
FLAG_TOL = 1e-6


def integrator_code(method):
    """Map an integrator name ('euler' or 'rk4') to its kernel code."""
    try:
        return _METHOD_CODES[method]
    except KeyError:
        raise ValueError(f"unknown integrator {method!r}; expected 'euler' or 'rk4'") from None


@dataclass(frozen=True)
class Quaternion:
    """Unit quaternion, scalar part ``eta`` and 3-vector part ``rho``."""

    eta: float
    rho: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "rho", np.asarray(self.rho, dtype=float).reshape(3).copy())

    @staticmethod
    def identity():
        return Quaternion(1.0, np.zeros(3))

    @staticmethod
    def from_array(q):
        q = np.asarray(q, dtype=float).reshape(4)
        return Quaternion(q[0], q[1:4])

    def as_array(self):
        return np.concatenate(([self.eta], self.rho))

    def norm(self):
        return float(np.sqrt(self.eta**2 + self.rho @ self.rho))

    def normalized(self):
        return Quaternion.from_array(self.as_array() / self.norm())

    def inverse(self):
        return Quaternion(self.eta, -self.rho)


@dataclass(frozen=True)
class State13:
    """Relative state: position ``dr`` (km), velocity ``dv`` (km/s), error
    quaternion ``dq``, error angular velocity ``dw`` (rad/s)."""

    dr: np.ndarray
    dv: np.ndarray
    dq: Quaternion
    dw: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dr", np.asarray(self.dr, dtype=float).reshape(3).copy())
        object.__setattr__(self, "dv", np.asarray(self.dv, dtype=float).reshape(3).copy())
        object.__setattr__(self, "dw", np.asarray(self.dw, dtype=float).reshape(3).copy())

    @staticmethod
    def from_array(x):
        x = np.asarray(x, dtype=float).reshape(13)
        return State13(x[0:3], x[3:6], Quaternion(x[6], x[7:10]), x[10:13])

    def as_array(self):
        """Serialize to exactly 13 scalars in the order (dr, dv, eta, rho, dw)."""
        return np.concatenate((self.dr, self.dv, [self.dq.eta], self.dq.rho, self.dw))

    @staticmethod
    def docking():
        """The docking target: all zeros with an identity error quaternion."""
        return State13(np.zeros(3), np.zeros(3), Quaternion.identity(), np.zeros(3))


@dataclass(frozen=True)
class Control6:
    """Deputy body-frame thrust (N) and torque."""

    thrust: np.ndarray
    torque: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "thrust", np.asarray(self.thrust, dtype=float).reshape(3).copy())
        object.__setattr__(self, "torque", np.asarray(self.torque, dtype=float).reshape(3).copy())

    @staticmethod
    def zero():
        return Control6(np.zeros(3), np.zeros(3))

    @staticmethod
    def from_array(u):
        u = np.asarray(u, dtype=float).reshape(6)
        return Control6(u[0:3], u[3:6])

    def as_array(self):
        return np.concatenate((self.thrust, self.torque))


@dataclass(frozen=True)
class PhysicalParams:
    """Chief mean motion ``n`` (rad/s), deputy mass ``m_d`` (kg), principal
    inertia diagonal ``J`` (kg m^2), and the thrust-scaling flag."""

    n: float
    m_d: float
    J: tuple
    literal_units: bool = True

    def __post_init__(self):
        object.__setattr__(self, "n", float(self.n))
        object.__setattr__(self, "m_d", float(self.m_d))
        object.__setattr__(self, "J", tuple(float(j) for j in self.J))
        if len(self.J) != 3 or any(j <= 0.0 for j in self.J):
            raise ValueError("inertia diagonal must be three positive entries")
        if self.m_d <= 0.0:
            raise ValueError("deputy mass must be positive")

    @property
    def thrust_scale(self):
        """Acceleration per unit thrust as applied in the dynamics."""
        scale = 1.0 / self.m_d
        if not self.literal_units:
            scale /= 1000.0
        return scale

    def kernel_params(self):
        """Flat parameter vector consumed by the kernel backends."""
        return np.array([self.n, self.thrust_scale, *self.J])


def skew(v):
    """Skew-symmetric cross-product matrix: ``skew(v) @ w == cross(v, w)``."""
    v = np.asarray(v, dtype=float).reshape(3)
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def _checked_unit(q, where):
    arr = q.as_array()
    nq = np.sqrt(arr @ arr)
    if abs(nq - 1.0) > FLAG_TOL:
        warnings.warn(
            f"{where}: quaternion norm deviates by {abs(nq - 1.0):.2e}; normalizing",
            stacklevel=3,
        )
    return arr / nq


def quat_to_rotation(q):
    """Rotation matrix ``I - 2*eta*[rho]x + 2*[rho]x^2`` of a unit quaternion.

    Non-unit inputs are normalized internally (a warning is emitted when the
    deviation exceeds ``FLAG_TOL``).
    """
    arr = _checked_unit(q, "quat_to_rotation")
    sr = skew(arr[1:4])
    return np.eye(3) - 2.0 * arr[0] * sr + 2.0 * (sr @ sr)


def full_deriv(x, u, params):
    """Time derivative of the 13-state model as a plain 13-vector.

    Concatenates the translational rows (CW matrix plus rotated thrust), the
    error-quaternion kinematics, and the error angular acceleration obtained
    from the body-frame Euler equation composed into the rotating frame.
    """
    _checked_unit(x.dq, "full_deriv")
    return _backend.deriv(x.as_array(), u.as_array(), params.kernel_params())


def step(x, u, dt, method, params):
    """One fixed-step integration ('euler' or 'rk4'); the quaternion is
    renormalized to unit norm after the step."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    code = method if method in (EULER, RK4) else integrator_code(method)
    out = _backend.step(x.as_array(), u.as_array(), float(dt), code, params.kernel_params())
    return State13.from_array(out)


def cw_analytic_transition(tr, t, n):
    """Exact unforced Clohessy-Wiltshire transition over time ``t``.

    Parameters
    ----------
    tr : tuple of array-like
        ``(dr, dv)`` position and velocity 3-vectors.
    t : float
        Propagation time in seconds.
    n : float
        Chief mean motion in rad/s (nonzero).

    Returns
    -------
    tuple of ndarray
        The propagated ``(dr, dv)``.
    """
    if n == 0.0:
        raise ValueError("mean motion must be nonzero")
    r0 = np.asarray(tr[0], dtype=float).reshape(3)
    v0 = np.asarray(tr[1], dtype=float).reshape(3)
    c = np.cos(n * t)
    s = np.sin(n * t)

    phi_rr = np.array(
        [
            [4.0 - 3.0 * c, 0.0, 0.0],
            [6.0 * (s - n * t), 1.0, 0.0],
            [0.0, 0.0, c],
        ]
    )
    phi_rv = np.array(
        [
            [s / n, 2.0 * (1.0 - c) / n, 0.0],
            [2.0 * (c - 1.0) / n, (4.0 * s - 3.0 * n * t) / n, 0.0],
            [0.0, 0.0, s / n],
        ]
    )
    phi_vr = np.array(
        [
            [3.0 * n * s, 0.0, 0.0],
            [6.0 * n * (c - 1.0), 0.0, 0.0],
            [0.0, 0.0, -n * s],
        ]
    )
    phi_vv = np.array(
        [
            [c, 2.0 * s, 0.0],
            [-2.0 * s, 4.0 * c - 3.0, 0.0],
            [0.0, 0.0, c],
        ]
    )
    return phi_rr @ r0 + phi_rv @ v0, phi_vr @ r0 + phi_vv @ v0
