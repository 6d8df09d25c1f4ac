"""Pure NumPy implementation of the hot kernels.

This is the fallback backend: every function here has a signature-identical,
numerically-equivalent counterpart in the compiled extension ``_fastcore``.
Keep the two in lockstep; ``tests/test_backends.py`` compares them.

Conventions
-----------
State layout (13,): position (km), velocity (km/s), error quaternion
(scalar first), error angular velocity (rad/s).
Control layout (6,): body-frame thrust (N), body-frame torque.
Model parameter vector ``p`` (5,): mean motion n, thrust scale s (applied as
``s * R @ thrust`` in the acceleration rows), principal inertia diagonal.
Integrator codes: 0 = forward Euler, 1 = classic RK4.  Every step ends with
a quaternion renormalization, which is part of the differentiated map.
"""

import numpy as np

EULER = 0
RK4 = 1


def _skew(v):
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def _rot(eta, rho):
    # R = I - 2*eta*[rho]x + 2*[rho]x^2  (passive convention, scalar-first)
    sr = _skew(rho)
    return np.eye(3) - 2.0 * eta * sr + 2.0 * (sr @ sr)


def deriv(x, u, p):
    """Continuous-time derivative of the 13-state relative motion model."""
    n, s = p[0], p[1]
    jd = p[2:5]
    dr, dv = x[0:3], x[3:6]
    eta, rho, om = x[6], x[7:10], x[10:13]
    thrust, torque = u[0:3], u[3:6]
    rot = _rot(eta, rho)

    f = np.empty(13)
    f[0:3] = dv
    f[3] = 3.0 * n * n * dr[0] + 2.0 * n * dv[1]
    f[4] = -2.0 * n * dv[0]
    f[5] = -n * n * dr[2]
    f[3:6] += s * (rot @ thrust)
    f[6] = 0.5 * (rho @ om)
    f[7:10] = -0.5 * (eta * om + np.cross(rho, om))
    # Body-frame total angular velocity, Euler rigid-body torque balance,
    # then back to the orbit frame with the frame-rotation correction.
    a = om.copy()
    a[2] += n
    w = rot.T @ a
    h = (torque - np.cross(w, jd * w)) / jd
    f[10:13] = rot @ h
    f[10] += n * om[1]
    f[11] -= n * om[0]
    return f


def _d_rot_v(eta, rho, v):
    """Partials of R(eta, rho) @ v: returns (d/d_eta (3,), d/d_rho (3,3))."""
    d_eta = -2.0 * np.cross(rho, v)
    d_rho = 2.0 * eta * _skew(v) - 2.0 * _skew(np.cross(rho, v)) - 2.0 * _skew(rho) @ _skew(v)
    return d_eta, d_rho


def _d_rot_t_v(eta, rho, v):
    """Partials of R(eta, rho).T @ v."""
    d_eta = 2.0 * np.cross(rho, v)
    d_rho = -2.0 * eta * _skew(v) - 2.0 * _skew(np.cross(rho, v)) - 2.0 * _skew(rho) @ _skew(v)
    return d_eta, d_rho


def deriv_jacobians(x, u, p):
    """Analytic Jacobians (df/dx, df/du) of :func:`deriv`."""
    n, s = p[0], p[1]
    jd = p[2:5]
    eta, rho, om = x[6], x[7:10], x[10:13]
    thrust, torque = u[0:3], u[3:6]
    rot = _rot(eta, rho)

    A = np.zeros((13, 13))
    B = np.zeros((13, 6))
    A[0:3, 3:6] = np.eye(3)
    A[3, 0] = 3.0 * n * n
    A[3, 4] = 2.0 * n
    A[4, 3] = -2.0 * n
    A[5, 2] = -n * n

    d_eta, d_rho = _d_rot_v(eta, rho, thrust)
    A[3:6, 6] = s * d_eta
    A[3:6, 7:10] = s * d_rho
    B[3:6, 0:3] = s * rot

    A[6, 7:10] = 0.5 * om
    A[6, 10:13] = 0.5 * rho
    A[7:10, 6] = -0.5 * om
    A[7:10, 7:10] = 0.5 * _skew(om)
    A[7:10, 10:13] = -0.5 * (eta * np.eye(3) + _skew(rho))

    a = om.copy()
    a[2] += n
    w = rot.T @ a
    h = (torque - np.cross(w, jd * w)) / jd
    # dh/dw, with the inertia diagonal folded in.
    M = (_skew(jd * w) - _skew(w) * jd[None, :]) / jd[:, None]
    dh_eta, dh_rho = _d_rot_v(eta, rho, h)
    da_eta, da_rho = _d_rot_t_v(eta, rho, a)
    A[10:13, 6] = dh_eta + rot @ M @ da_eta
    A[10:13, 7:10] = dh_rho + rot @ M @ da_rho
    A[10:13, 10:13] = rot @ M @ rot.T - n * _skew(np.array([0.0, 0.0, 1.0]))
    B[10:13, 3:6] = rot / jd[None, :]
    return A, B


def _renorm(y):
    out = y.copy()
    out[6:10] /= np.sqrt(np.sum(out[6:10] ** 2))
    return out


def _renorm_jacobian(y):
    q = y[6:10]
    nq = np.sqrt(np.sum(q**2))
    qh = q / nq
    nj = np.eye(13)
    nj[6:10, 6:10] = (np.eye(4) - np.outer(qh, qh)) / nq
    return nj


def step(x, u, dt, method, p):
    """One fixed-step integration, quaternion renormalized afterwards."""
    if method == EULER:
        y = x + dt * deriv(x, u, p)
    else:
        k1 = deriv(x, u, p)
        k2 = deriv(x + 0.5 * dt * k1, u, p)
        k3 = deriv(x + 0.5 * dt * k2, u, p)
        k4 = deriv(x + dt * k3, u, p)
        y = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return _renorm(y)


def step_jacobians(x, u, dt, method, p):
    """Jacobians of :func:`step`, renormalization included."""
    if method == EULER:
        y = x + dt * deriv(x, u, p)
        a1, b1 = deriv_jacobians(x, u, p)
        ax = np.eye(13) + dt * a1
        bu = dt * b1
    else:
        k1 = deriv(x, u, p)
        x2 = x + 0.5 * dt * k1
        k2 = deriv(x2, u, p)
        x3 = x + 0.5 * dt * k2
        k3 = deriv(x3, u, p)
        x4 = x + dt * k3
        k4 = deriv(x4, u, p)
        y = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        a1, b1 = deriv_jacobians(x, u, p)
        a2r, b2r = deriv_jacobians(x2, u, p)
        a3r, b3r = deriv_jacobians(x3, u, p)
        a4r, b4r = deriv_jacobians(x4, u, p)
        a2 = a2r @ (np.eye(13) + 0.5 * dt * a1)
        b2 = b2r + a2r @ (0.5 * dt * b1)
        a3 = a3r @ (np.eye(13) + 0.5 * dt * a2)
        b3 = b3r + a3r @ (0.5 * dt * b2)
        a4 = a4r @ (np.eye(13) + dt * a3)
        b4 = b4r + a4r @ (dt * b3)
        ax = np.eye(13) + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        bu = (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
    nj = _renorm_jacobian(y)
    return nj @ ax, nj @ bu


def rollout(x0, U, dt, method, p):
    """Forward propagation; returns the (N+1, 13) state trajectory."""
    traj = np.empty((U.shape[0] + 1, 13))
    traj[0] = x0
    for i in range(U.shape[0]):
        traj[i + 1] = step(traj[i], U[i], dt, method, p)
    return traj


def cost(x0, U, dt, method, p, qdiag, rdiag, xtarget):
    """Quadratic stage cost summed along the rollout (no terminal term)."""
    total = 0.0
    x = x0
    for i in range(U.shape[0]):
        e = x - xtarget
        total += e @ (qdiag * e) + U[i] @ (rdiag * U[i])
        x = step(x, U[i], dt, method, p)
    return total


def cost_and_gradient(x0, U, dt, method, p, qdiag, rdiag, xtarget):
    """Cost plus its exact gradient w.r.t. the flattened control sequence.

    Backward (adjoint) sweep over the discrete rollout using the analytic
    step Jacobians, so the gradient is of the code actually run.
    """
    horizon = U.shape[0]
    traj = rollout(x0, U, dt, method, p)
    # forward-order stage sum so the value matches cost() bit for bit
    total = 0.0
    for i in range(horizon):
        e = traj[i] - xtarget
        total += e @ (qdiag * e) + U[i] @ (rdiag * U[i])
    grad = np.empty((horizon, 6))
    lam = np.zeros(13)
    for i in range(horizon - 1, -1, -1):
        ax, bu = step_jacobians(traj[i], U[i], dt, method, p)
        grad[i] = 2.0 * rdiag * U[i] + bu.T @ lam
        lam = 2.0 * qdiag * (traj[i] - xtarget) + ax.T @ lam
    return total, grad
