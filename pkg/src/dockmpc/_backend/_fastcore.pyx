# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementation of the hot kernels.

Mirrors ``pure.py`` function for function; see that module for conventions.
The adjoint sweep here uses transposed Jacobian-vector products only, so a
backward step costs a handful of 13x13 matvecs rather than matrix products.
"""

from libc.math cimport sqrt
from libc.string cimport memset

import numpy as np

EULER = 0
RK4 = 1


# ---------------------------------------------------------------------------
# small fixed-size helpers
# ---------------------------------------------------------------------------

cdef inline void v3_cross(const double* a, const double* b, double* out) noexcept nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


cdef inline void rot_from_quat(double eta, const double* r, double* R) noexcept nogil:
    # R = I - 2*eta*[r]x + 2*[r]x^2, row-major
    R[0] = 1.0 - 2.0 * (r[1] * r[1] + r[2] * r[2])
    R[1] = 2.0 * (r[0] * r[1] + eta * r[2])
    R[2] = 2.0 * (r[0] * r[2] - eta * r[1])
    R[3] = 2.0 * (r[0] * r[1] - eta * r[2])
    R[4] = 1.0 - 2.0 * (r[0] * r[0] + r[2] * r[2])
    R[5] = 2.0 * (r[1] * r[2] + eta * r[0])
    R[6] = 2.0 * (r[0] * r[2] + eta * r[1])
    R[7] = 2.0 * (r[1] * r[2] - eta * r[0])
    R[8] = 1.0 - 2.0 * (r[0] * r[0] + r[1] * r[1])


cdef inline void mv3(const double* M, const double* v, double* out) noexcept nogil:
    out[0] = M[0] * v[0] + M[1] * v[1] + M[2] * v[2]
    out[1] = M[3] * v[0] + M[4] * v[1] + M[5] * v[2]
    out[2] = M[6] * v[0] + M[7] * v[1] + M[8] * v[2]


cdef inline void mv3t(const double* M, const double* v, double* out) noexcept nogil:
    out[0] = M[0] * v[0] + M[3] * v[1] + M[6] * v[2]
    out[1] = M[1] * v[0] + M[4] * v[1] + M[7] * v[2]
    out[2] = M[2] * v[0] + M[5] * v[1] + M[8] * v[2]


cdef inline void mm3(const double* A, const double* B, double* out) noexcept nogil:
    cdef int i, j, k
    for i in range(3):
        for j in range(3):
            out[3 * i + j] = 0.0
            for k in range(3):
                out[3 * i + j] += A[3 * i + k] * B[3 * k + j]


cdef inline void skew3(const double* v, double* out) noexcept nogil:
    out[0] = 0.0
    out[1] = -v[2]
    out[2] = v[1]
    out[3] = v[2]
    out[4] = 0.0
    out[5] = -v[0]
    out[6] = -v[1]
    out[7] = v[0]
    out[8] = 0.0


cdef inline void d_rot_v_rho(double eta, const double* rho, const double* v,
                             double sign_eta, double* out) noexcept nogil:
    # sign_eta=+1: d(R v)/d_rho; sign_eta=-1: d(R^T v)/d_rho
    # 2*sign*eta*[v]x - 2*[rho x v]x - 2*(v rho^T - (rho.v) I)
    cdef double rxv[3]
    cdef double sv[9]
    cdef double sx[9]
    cdef double dot
    cdef int i, j
    v3_cross(rho, v, rxv)
    skew3(v, sv)
    skew3(rxv, sx)
    dot = rho[0] * v[0] + rho[1] * v[1] + rho[2] * v[2]
    for i in range(3):
        for j in range(3):
            out[3 * i + j] = (2.0 * sign_eta * eta * sv[3 * i + j]
                              - 2.0 * sx[3 * i + j]
                              - 2.0 * v[i] * rho[j])
        out[3 * i + i] += 2.0 * dot


# ---------------------------------------------------------------------------
# continuous dynamics and Jacobians
# ---------------------------------------------------------------------------

cdef void c_deriv(const double* x, const double* u, const double* p,
                  double* f) noexcept nogil:
    cdef double n = p[0]
    cdef double s = p[1]
    cdef const double* jd = p + 2
    cdef double eta = x[6]
    cdef const double* rho = x + 7
    cdef const double* om = x + 10
    cdef double R[9]
    cdef double rf[3]
    cdef double a[3]
    cdef double w[3]
    cdef double jw[3]
    cdef double wxjw[3]
    cdef double h[3]
    cdef double rh[3]
    cdef double rxo[3]
    cdef int i

    rot_from_quat(eta, rho, R)

    f[0] = x[3]
    f[1] = x[4]
    f[2] = x[5]
    f[3] = 3.0 * n * n * x[0] + 2.0 * n * x[4]
    f[4] = -2.0 * n * x[3]
    f[5] = -n * n * x[2]
    mv3(R, u, rf)
    f[3] += s * rf[0]
    f[4] += s * rf[1]
    f[5] += s * rf[2]

    f[6] = 0.5 * (rho[0] * om[0] + rho[1] * om[1] + rho[2] * om[2])
    v3_cross(rho, om, rxo)
    for i in range(3):
        f[7 + i] = -0.5 * (eta * om[i] + rxo[i])

    a[0] = om[0]
    a[1] = om[1]
    a[2] = om[2] + n
    mv3t(R, a, w)
    for i in range(3):
        jw[i] = jd[i] * w[i]
    v3_cross(w, jw, wxjw)
    for i in range(3):
        h[i] = (u[3 + i] - wxjw[i]) / jd[i]
    mv3(R, h, rh)
    f[10] = rh[0] + n * om[1]
    f[11] = rh[1] - n * om[0]
    f[12] = rh[2]


cdef void c_jac(const double* x, const double* u, const double* p,
                double* A, double* B) noexcept nogil:
    # A row-major 13x13, B row-major 13x6
    cdef double n = p[0]
    cdef double s = p[1]
    cdef const double* jd = p + 2
    cdef double eta = x[6]
    cdef const double* rho = x + 7
    cdef const double* om = x + 10
    cdef double R[9]
    cdef double a[3]
    cdef double w[3]
    cdef double jw[3]
    cdef double wxjw[3]
    cdef double h[3]
    cdef double M[9]
    cdef double RM[9]
    cdef double T[9]
    cdef double D[9]
    cdef double tmp3[3]
    cdef double tmp3b[3]
    cdef int i, j

    memset(A, 0, 169 * sizeof(double))
    memset(B, 0, 78 * sizeof(double))
    rot_from_quat(eta, rho, R)

    A[0 * 13 + 3] = 1.0
    A[1 * 13 + 4] = 1.0
    A[2 * 13 + 5] = 1.0
    A[3 * 13 + 0] = 3.0 * n * n
    A[3 * 13 + 4] = 2.0 * n
    A[4 * 13 + 3] = -2.0 * n
    A[5 * 13 + 2] = -n * n

    # translational acceleration: d(s R F)/d(eta, rho) and d/dF
    v3_cross(rho, u, tmp3)
    for i in range(3):
        A[(3 + i) * 13 + 6] = s * (-2.0 * tmp3[i])
    d_rot_v_rho(eta, rho, u, 1.0, D)
    for i in range(3):
        for j in range(3):
            A[(3 + i) * 13 + 7 + j] = s * D[3 * i + j]
            B[(3 + i) * 6 + j] = s * R[3 * i + j]

    # quaternion kinematics block
    for j in range(3):
        A[6 * 13 + 7 + j] = 0.5 * om[j]
        A[6 * 13 + 10 + j] = 0.5 * rho[j]
    for i in range(3):
        A[(7 + i) * 13 + 6] = -0.5 * om[i]
        A[(7 + i) * 13 + 10 + i] -= 0.5 * eta
    # 0.5*[om]x and -0.5*[rho]x entries
    A[7 * 13 + 8] = -0.5 * om[2]
    A[7 * 13 + 9] = 0.5 * om[1]
    A[8 * 13 + 7] = 0.5 * om[2]
    A[8 * 13 + 9] = -0.5 * om[0]
    A[9 * 13 + 7] = -0.5 * om[1]
    A[9 * 13 + 8] = 0.5 * om[0]
    A[7 * 13 + 11] = 0.5 * rho[2]
    A[7 * 13 + 12] = -0.5 * rho[1]
    A[8 * 13 + 10] = -0.5 * rho[2]
    A[8 * 13 + 12] = 0.5 * rho[0]
    A[9 * 13 + 10] = 0.5 * rho[1]
    A[9 * 13 + 11] = -0.5 * rho[0]

    # angular acceleration block
    a[0] = om[0]
    a[1] = om[1]
    a[2] = om[2] + n
    mv3t(R, a, w)
    for i in range(3):
        jw[i] = jd[i] * w[i]
    v3_cross(w, jw, wxjw)
    for i in range(3):
        h[i] = (u[3 + i] - wxjw[i]) / jd[i]
    # M = dh/dw = K ([Jw]x - [w]x J)
    skew3(jw, M)
    skew3(w, T)
    for i in range(3):
        for j in range(3):
            M[3 * i + j] = (M[3 * i + j] - T[3 * i + j] * jd[j]) / jd[i]
    mm3(R, M, RM)

    # d/d_eta: -2 rho x h + RM (2 rho x a)
    v3_cross(rho, h, tmp3)
    v3_cross(rho, a, tmp3b)
    tmp3b[0] *= 2.0
    tmp3b[1] *= 2.0
    tmp3b[2] *= 2.0
    mv3(RM, tmp3b, w)  # reuse w as scratch
    for i in range(3):
        A[(10 + i) * 13 + 6] = -2.0 * tmp3[i] + w[i]

    # d/d_rho: dRv_drho(h) + RM dRTv_drho(a)
    d_rot_v_rho(eta, rho, h, 1.0, D)
    d_rot_v_rho(eta, rho, a, -1.0, T)
    mm3(RM, T, M)  # reuse M
    for i in range(3):
        for j in range(3):
            A[(10 + i) * 13 + 7 + j] = D[3 * i + j] + M[3 * i + j]

    # d/d_om: RM R^T - n*[e3]x
    for i in range(3):
        for j in range(3):
            T[3 * i + j] = R[3 * j + i]
    mm3(RM, T, D)
    for i in range(3):
        for j in range(3):
            A[(10 + i) * 13 + 10 + j] = D[3 * i + j]
    A[10 * 13 + 11] += n
    A[11 * 13 + 10] -= n

    # d/d_tau: R K
    for i in range(3):
        for j in range(3):
            B[(10 + i) * 6 + 3 + j] = R[3 * i + j] / jd[j]


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------

cdef inline double c_renorm(double* y) noexcept nogil:
    # normalizes y[6:10] in place, returns the pre-normalization norm
    cdef double nq = sqrt(y[6] * y[6] + y[7] * y[7] + y[8] * y[8] + y[9] * y[9])
    y[6] /= nq
    y[7] /= nq
    y[8] /= nq
    y[9] /= nq
    return nq


cdef double c_step(const double* x, const double* u, double dt, int method,
                   const double* p, double* out) noexcept nogil:
    # returns the pre-renormalization quaternion norm (adjoint needs it)
    cdef double k1[13]
    cdef double k2[13]
    cdef double k3[13]
    cdef double k4[13]
    cdef double xs[13]
    cdef int i
    if method == 0:
        c_deriv(x, u, p, k1)
        for i in range(13):
            out[i] = x[i] + dt * k1[i]
    else:
        c_deriv(x, u, p, k1)
        for i in range(13):
            xs[i] = x[i] + 0.5 * dt * k1[i]
        c_deriv(xs, u, p, k2)
        for i in range(13):
            xs[i] = x[i] + 0.5 * dt * k2[i]
        c_deriv(xs, u, p, k3)
        for i in range(13):
            xs[i] = x[i] + dt * k3[i]
        c_deriv(xs, u, p, k4)
        for i in range(13):
            out[i] = x[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return c_renorm(out)


cdef void c_rollout(const double* x0, const double* U, int N, double dt,
                    int method, const double* p, double* X) noexcept nogil:
    cdef int i, j
    for j in range(13):
        X[j] = x0[j]
    for i in range(N):
        c_step(X + 13 * i, U + 6 * i, dt, method, p, X + 13 * (i + 1))


cdef double c_cost(const double* X, const double* U, int N,
                   const double* qd, const double* rd,
                   const double* xt) noexcept nogil:
    cdef double total = 0.0
    cdef double e
    cdef int i, j
    for i in range(N):
        for j in range(13):
            e = X[13 * i + j] - xt[j]
            total += qd[j] * e * e
        for j in range(6):
            total += rd[j] * U[6 * i + j] * U[6 * i + j]
    return total


cdef inline void apply_renorm_t(const double* lam, const double* q_hat,
                                double nq, double* out) noexcept nogil:
    # out = N^T lam where N is the renormalization Jacobian (symmetric)
    cdef double dot
    cdef int i
    for i in range(13):
        out[i] = lam[i]
    dot = (q_hat[0] * lam[6] + q_hat[1] * lam[7]
           + q_hat[2] * lam[8] + q_hat[3] * lam[9])
    for i in range(4):
        out[6 + i] = (lam[6 + i] - q_hat[i] * dot) / nq


cdef inline void mv13t_acc(const double* A, const double* v, double coef,
                           double* out) noexcept nogil:
    # out += coef * A^T v
    cdef int r, c
    for c in range(13):
        for r in range(13):
            out[c] += coef * A[13 * r + c] * v[r]


cdef inline void mv13t(const double* A, const double* v, double* out) noexcept nogil:
    cdef int r, c
    for c in range(13):
        out[c] = 0.0
        for r in range(13):
            out[c] += A[13 * r + c] * v[r]


cdef inline void mv13x6t_acc(const double* B, const double* v, double coef,
                             double* out) noexcept nogil:
    cdef int r, c
    for c in range(6):
        for r in range(13):
            out[c] += coef * B[6 * r + c] * v[r]


cdef void c_cost_gradient(const double* X, const double* U, int N, double dt,
                          int method, const double* p, const double* qd,
                          const double* rd, const double* xt,
                          double* G) noexcept nogil:
    """Adjoint sweep; X is the stored (N+1)x13 trajectory from c_rollout."""
    cdef double lam[13]
    cdef double vt[13]
    cdef double lnew[13]
    cdef double k1[13]
    cdef double k2[13]
    cdef double k3[13]
    cdef double k4[13]
    cdef double x2[13]
    cdef double x3[13]
    cdef double x4[13]
    cdef double ypre[13]
    cdef double d1[13]
    cdef double d2[13]
    cdef double d3[13]
    cdef double d4[13]
    cdef double w1[13]
    cdef double w2[13]
    cdef double w3[13]
    cdef double A1[169]
    cdef double A2[169]
    cdef double A3[169]
    cdef double A4[169]
    cdef double B1[78]
    cdef double B2[78]
    cdef double B3[78]
    cdef double B4[78]
    cdef double nq
    cdef int i, j
    cdef const double* x
    cdef const double* u

    for j in range(13):
        lam[j] = 0.0

    for i in range(N - 1, -1, -1):
        x = X + 13 * i
        u = U + 6 * i
        for j in range(6):
            G[6 * i + j] = 2.0 * rd[j] * u[j]

        if method == 0:
            c_deriv(x, u, p, k1)
            for j in range(13):
                ypre[j] = x[j] + dt * k1[j]
            nq = sqrt(ypre[6] * ypre[6] + ypre[7] * ypre[7]
                      + ypre[8] * ypre[8] + ypre[9] * ypre[9])
            apply_renorm_t(lam, X + 13 * (i + 1) + 6, nq, vt)
            c_jac(x, u, p, A1, B1)
            for j in range(13):
                lnew[j] = vt[j]
            mv13t_acc(A1, vt, dt, lnew)
            mv13x6t_acc(B1, vt, dt, G + 6 * i)
        else:
            # recompute stage states and the pre-renorm quaternion norm
            c_deriv(x, u, p, k1)
            for j in range(13):
                x2[j] = x[j] + 0.5 * dt * k1[j]
            c_deriv(x2, u, p, k2)
            for j in range(13):
                x3[j] = x[j] + 0.5 * dt * k2[j]
            c_deriv(x3, u, p, k3)
            for j in range(13):
                x4[j] = x[j] + dt * k3[j]
            c_deriv(x4, u, p, k4)
            nq = 0.0
            for j in range(6, 10):
                ypre[j] = x[j] + (dt / 6.0) * (k1[j] + 2.0 * k2[j]
                                               + 2.0 * k3[j] + k4[j])
                nq += ypre[j] * ypre[j]
            nq = sqrt(nq)
            apply_renorm_t(lam, X + 13 * (i + 1) + 6, nq, vt)
            c_jac(x, u, p, A1, B1)
            c_jac(x2, u, p, A2, B2)
            c_jac(x3, u, p, A3, B3)
            c_jac(x4, u, p, A4, B4)
            mv13t(A4, vt, d4)
            for j in range(13):
                w3[j] = 2.0 * vt[j] + dt * d4[j]
            mv13t(A3, w3, d3)
            for j in range(13):
                w2[j] = 2.0 * vt[j] + 0.5 * dt * d3[j]
            mv13t(A2, w2, d2)
            for j in range(13):
                w1[j] = vt[j] + 0.5 * dt * d2[j]
            mv13t(A1, w1, d1)
            for j in range(13):
                lnew[j] = vt[j] + (dt / 6.0) * (d1[j] + d2[j] + d3[j] + d4[j])
            mv13x6t_acc(B1, w1, dt / 6.0, G + 6 * i)
            mv13x6t_acc(B2, w2, dt / 6.0, G + 6 * i)
            mv13x6t_acc(B3, w3, dt / 6.0, G + 6 * i)
            mv13x6t_acc(B4, vt, dt / 6.0, G + 6 * i)

        for j in range(13):
            lam[j] = 2.0 * qd[j] * (x[j] - xt[j]) + lnew[j]


# ---------------------------------------------------------------------------
# python interface
# ---------------------------------------------------------------------------

def deriv(double[::1] x, double[::1] u, double[::1] p):
    out = np.empty(13)
    cdef double[::1] mv = out
    c_deriv(&x[0], &u[0], &p[0], &mv[0])
    return out


def deriv_jacobians(double[::1] x, double[::1] u, double[::1] p):
    A = np.empty((13, 13))
    B = np.empty((13, 6))
    cdef double[:, ::1] av = A
    cdef double[:, ::1] bv = B
    c_jac(&x[0], &u[0], &p[0], &av[0, 0], &bv[0, 0])
    return A, B


def step(double[::1] x, double[::1] u, double dt, int method, double[::1] p):
    out = np.empty(13)
    cdef double[::1] mv = out
    c_step(&x[0], &u[0], dt, method, &p[0], &mv[0])
    return out


def rollout(double[::1] x0, double[:, ::1] U, double dt, int method,
            double[::1] p):
    cdef int N = U.shape[0]
    X = np.empty((N + 1, 13))
    cdef double[:, ::1] xv = X
    c_rollout(&x0[0], &U[0, 0], N, dt, method, &p[0], &xv[0, 0])
    return X


def cost(double[::1] x0, double[:, ::1] U, double dt, int method,
         double[::1] p, double[::1] qdiag, double[::1] rdiag,
         double[::1] xtarget):
    cdef int N = U.shape[0]
    X = np.empty((N + 1, 13))
    cdef double[:, ::1] xv = X
    c_rollout(&x0[0], &U[0, 0], N, dt, method, &p[0], &xv[0, 0])
    return c_cost(&xv[0, 0], &U[0, 0], N, &qdiag[0], &rdiag[0], &xtarget[0])


def cost_and_gradient(double[::1] x0, double[:, ::1] U, double dt, int method,
                      double[::1] p, double[::1] qdiag, double[::1] rdiag,
                      double[::1] xtarget):
    cdef int N = U.shape[0]
    X = np.empty((N + 1, 13))
    G = np.empty((N, 6))
    cdef double[:, ::1] xv = X
    cdef double[:, ::1] gv = G
    cdef double total
    c_rollout(&x0[0], &U[0, 0], N, dt, method, &p[0], &xv[0, 0])
    total = c_cost(&xv[0, 0], &U[0, 0], N, &qdiag[0], &rdiag[0], &xtarget[0])
    c_cost_gradient(&xv[0, 0], &U[0, 0], N, dt, method, &p[0], &qdiag[0],
                    &rdiag[0], &xtarget[0], &gv[0, 0])
    return total, G
