# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Semantics must stay in lockstep with ``_fallback.py``: same algorithm
constants, same floating point expression order in the dynamics so that
planner feasibility decisions agree with executed steps.
"""

from libc.math cimport exp, fabs, isfinite, sqrt, INFINITY

import numpy as np

DEF ARMIJO_C1 = 1e-4
DEF BACKTRACK = 0.5
DEF MAX_BACKTRACKS = 40
DEF CURVATURE_SKIP = 1e-10

DEF ST_CONVERGED = 0
DEF ST_MAX_ITER = 1
DEF ST_LINE_SEARCH_STALL = 2
DEF ST_NON_FINITE = 3

cdef double CBRT_EPS = 2.220446049250313e-16 ** (1.0 / 3.0)

STATUS_CONVERGED = ST_CONVERGED
STATUS_MAX_ITER = ST_MAX_ITER
STATUS_LINE_SEARCH_STALL = ST_LINE_SEARCH_STALL
STATUS_NON_FINITE = ST_NON_FINITE


cdef inline void _quintic_point(const double* c, double tau, double* out) noexcept nogil:
    out[0] = ((((c[0] * tau + c[1]) * tau + c[2]) * tau + c[3]) * tau + c[4]) * tau + c[5]
    out[1] = (((5.0 * c[0] * tau + 4.0 * c[1]) * tau + 3.0 * c[2]) * tau + 2.0 * c[3]) * tau + c[4]
    out[2] = ((20.0 * c[0] * tau + 12.0 * c[1]) * tau + 6.0 * c[2]) * tau + 2.0 * c[3]


def quintic_table(double[::1] coeffs, double dt, Py_ssize_t n):
    pos = np.empty(n)
    vel = np.empty(n)
    acc = np.empty(n)
    cdef double[::1] p = pos, v = vel, a = acc
    cdef double out[3]
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            _quintic_point(&coeffs[0], dt * i, out)
            p[i] = out[0]
            v[i] = out[1]
            a[i] = out[2]
    return pos, vel, acc


cdef inline double _integrand(int fid, double gap, double vel, double acc,
                              double lead_vel, double v_d, double tau_h,
                              double d_s) noexcept nogil:
    cdef double e
    if fid == 0:
        return acc * acc
    elif fid == 1:
        e = v_d - vel
        return e * e
    elif fid == 2:
        e = lead_vel - vel
        return e * e
    elif fid == 3:
        e = gap - (vel * tau_h + d_s)
        return e * e
    elif fid == 4:
        e = gap - d_s
        return e * e
    else:
        return exp(-gap)


def feature_values(double[::1] pos, double[::1] vel, double[::1] acc,
                   double[::1] lead_pos, double[::1] lead_vel,
                   double dt, double v_d, double tau_h, double d_s,
                   int[::1] feat_ids):
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t m = feat_ids.shape[0]
    out = np.empty(m)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j
    cdef int fid
    cdef double gap, y0, y1, acc_sum
    with nogil:
        for j in range(m):
            fid = feat_ids[j]
            acc_sum = 0.0
            gap = lead_pos[0] - pos[0]
            y0 = _integrand(fid, gap, vel[0], acc[0], lead_vel[0], v_d, tau_h, d_s)
            for i in range(1, n):
                gap = lead_pos[i] - pos[i]
                y1 = _integrand(fid, gap, vel[i], acc[i], lead_vel[i], v_d, tau_h, d_s)
                acc_sum += 0.5 * (y0 + y1)
                y0 = y1
            o[j] = acc_sum * dt
    return out


cdef double _subseg_cost(const double* free, double p0, double v0, double a0,
                         const double* lp, const double* lv, Py_ssize_t n, double dt,
                         double v_d, double tau_h, double d_s,
                         const double* theta, const int* fids, Py_ssize_t m) noexcept nogil:
    cdef double c[6]
    cdef double prev[6]
    cdef double fsum[6]
    cdef double out[3]
    cdef double gap, cur, cost
    cdef Py_ssize_t i, j
    c[0] = free[0]; c[1] = free[1]; c[2] = free[2]
    c[3] = 0.5 * a0; c[4] = v0; c[5] = p0
    _quintic_point(c, 0.0, out)
    gap = lp[0] - out[0]
    for j in range(m):
        fsum[j] = 0.0
        prev[j] = _integrand(fids[j], gap, out[1], out[2], lv[0], v_d, tau_h, d_s)
    for i in range(1, n):
        _quintic_point(c, dt * i, out)
        gap = lp[i] - out[0]
        for j in range(m):
            cur = _integrand(fids[j], gap, out[1], out[2], lv[i], v_d, tau_h, d_s)
            fsum[j] += 0.5 * (prev[j] + cur)
            prev[j] = cur
    cost = 0.0
    for j in range(m):
        cost += theta[j] * (fsum[j] * dt)
    return cost


def subsegment_cost(double[::1] free, double p0, double v0, double a0,
                    double[::1] lead_pos, double[::1] lead_vel, double dt,
                    double v_d, double tau_h, double d_s,
                    double[::1] theta, int[::1] feat_ids):
    return _subseg_cost(&free[0], p0, v0, a0, &lead_pos[0], &lead_vel[0],
                        lead_pos.shape[0], dt, v_d, tau_h, d_s,
                        &theta[0], &feat_ids[0], feat_ids.shape[0])


cdef void _fd_grad(double* x, double* g, double p0, double v0, double a0,
                   const double* lp, const double* lv, Py_ssize_t n, double dt,
                   double v_d, double tau_h, double d_s,
                   const double* theta, const int* fids, Py_ssize_t m) noexcept nogil:
    cdef double xx[3]
    cdef double h, hp, hm, f1, f2, xi
    cdef Py_ssize_t i
    for i in range(3):
        xx[0] = x[0]; xx[1] = x[1]; xx[2] = x[2]
        xi = x[i]
        h = CBRT_EPS * (1.0 if fabs(xi) < 1.0 else fabs(xi))
        xx[i] = xi + h
        hp = xx[i] - xi
        f1 = _subseg_cost(xx, p0, v0, a0, lp, lv, n, dt, v_d, tau_h, d_s, theta, fids, m)
        xx[i] = xi - h
        hm = xi - xx[i]
        f2 = _subseg_cost(xx, p0, v0, a0, lp, lv, n, dt, v_d, tau_h, d_s, theta, fids, m)
        g[i] = (f1 - f2) / (hp + hm)


def optimize_free_coeffs(double p0, double v0, double a0,
                         double[::1] lead_pos, double[::1] lead_vel, double dt,
                         double v_d, double tau_h, double d_s,
                         double[::1] theta, int[::1] feat_ids,
                         double gtol, int max_iter):
    cdef Py_ssize_t n = lead_pos.shape[0]
    cdef Py_ssize_t m = feat_ids.shape[0]
    cdef const double* lp = &lead_pos[0]
    cdef const double* lv = &lead_vel[0]
    cdef const double* th = &theta[0]
    cdef const int* fids = &feat_ids[0]

    cdef double x[3]
    cdef double g[3]
    cdef double gn_vec[3]
    cdef double xn[3]
    cdef double p[3]
    cdef double s[3]
    cdef double y[3]
    cdef double hy[3]
    cdef double h_inv[9]
    cdef double f, fn, gnorm, dphi, alpha, sy, yhy, rho, snorm, ynorm
    cdef int it = 0, status = ST_MAX_ITER
    cdef int i, j, ls
    cdef bint accepted

    x[0] = 0.0; x[1] = 0.0; x[2] = 0.0
    f = _subseg_cost(x, p0, v0, a0, lp, lv, n, dt, v_d, tau_h, d_s, th, fids, m)
    if not isfinite(f):
        return np.zeros(3), f, INFINITY, 0, ST_NON_FINITE
    _fd_grad(x, g, p0, v0, a0, lp, lv, n, dt, v_d, tau_h, d_s, th, fids, m)

    for i in range(9):
        h_inv[i] = 0.0
    h_inv[0] = 1.0; h_inv[4] = 1.0; h_inv[8] = 1.0

    with nogil:
        while it < max_iter:
            it += 1
            gnorm = fabs(g[0])
            if fabs(g[1]) > gnorm:
                gnorm = fabs(g[1])
            if fabs(g[2]) > gnorm:
                gnorm = fabs(g[2])
            if gnorm <= gtol * (1.0 if fabs(f) < 1.0 else fabs(f)):
                status = ST_CONVERGED
                break
            for i in range(3):
                p[i] = -(h_inv[3 * i] * g[0] + h_inv[3 * i + 1] * g[1] + h_inv[3 * i + 2] * g[2])
            dphi = p[0] * g[0] + p[1] * g[1] + p[2] * g[2]
            if not isfinite(dphi) or dphi >= 0.0:
                for i in range(9):
                    h_inv[i] = 0.0
                h_inv[0] = 1.0; h_inv[4] = 1.0; h_inv[8] = 1.0
                for i in range(3):
                    p[i] = -g[i]
                dphi = -(g[0] * g[0] + g[1] * g[1] + g[2] * g[2])
            alpha = 1.0
            accepted = False
            for ls in range(MAX_BACKTRACKS):
                for i in range(3):
                    xn[i] = x[i] + alpha * p[i]
                fn = _subseg_cost(xn, p0, v0, a0, lp, lv, n, dt, v_d, tau_h, d_s, th, fids, m)
                if isfinite(fn) and fn <= f + ARMIJO_C1 * alpha * dphi:
                    accepted = True
                    break
                alpha *= BACKTRACK
            if not accepted:
                status = ST_LINE_SEARCH_STALL
                break
            _fd_grad(xn, gn_vec, p0, v0, a0, lp, lv, n, dt, v_d, tau_h, d_s, th, fids, m)
            for i in range(3):
                s[i] = xn[i] - x[i]
                y[i] = gn_vec[i] - g[i]
            sy = s[0] * y[0] + s[1] * y[1] + s[2] * y[2]
            snorm = sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2])
            ynorm = sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])
            if sy > CURVATURE_SKIP * snorm * ynorm:
                rho = 1.0 / sy
                for i in range(3):
                    hy[i] = h_inv[3 * i] * y[0] + h_inv[3 * i + 1] * y[1] + h_inv[3 * i + 2] * y[2]
                yhy = y[0] * hy[0] + y[1] * hy[1] + y[2] * hy[2]
                for i in range(3):
                    for j in range(3):
                        h_inv[3 * i + j] = (
                            h_inv[3 * i + j]
                            + ((sy + yhy) * rho * rho) * s[i] * s[j]
                            - rho * (s[i] * hy[j] + hy[i] * s[j])
                        )
            for i in range(3):
                x[i] = xn[i]
                g[i] = gn_vec[i]
            f = fn

    gnorm = fabs(g[0])
    if fabs(g[1]) > gnorm:
        gnorm = fabs(g[1])
    if fabs(g[2]) > gnorm:
        gnorm = fabs(g[2])
    if status == ST_MAX_ITER and gnorm <= gtol * (1.0 if fabs(f) < 1.0 else fabs(f)):
        status = ST_CONVERGED
    out = np.empty(3)
    cdef double[::1] ov = out
    for i in range(3):
        ov[i] = x[i]
    return out, f, gnorm, it, status


def candidate_costs(double[::1] accels, double d0, double vh0, double[::1] vpv,
                    double ts, double v_d, double tau_h, double d_s,
                    double[::1] theta, int[::1] feat_ids,
                    double d_min, double v_min, double v_max, double penalty):
    cdef Py_ssize_t kk = accels.shape[0]
    cdef Py_ssize_t n = vpv.shape[0]
    cdef Py_ssize_t m = feat_ids.shape[0]
    costs = np.empty(kk)
    viols = np.empty(kk)
    cdef double[::1] cv = costs
    cdef double[::1] vv = viols
    cdef double prev[6]
    cdef double fsum[6]
    cdef double a, ats, d, vh, cur, viol, dv, lv_, hv, cost
    cdef Py_ssize_t k, i, j
    with nogil:
        for k in range(kk):
            a = accels[k]
            ats = a * ts
            d = d0
            vh = vh0
            viol = 0.0
            for j in range(m):
                fsum[j] = 0.0
                prev[j] = _integrand(feat_ids[j], d, vh, a, vpv[0], v_d, tau_h, d_s)
            for i in range(1, n):
                # same expression order as step_dynamics
                d = (vpv[i - 1] - vh) * ts + d
                vh = vh0 + ats * i
                dv = d_min - d
                if dv < 0.0:
                    dv = 0.0
                lv_ = v_min - vh
                if lv_ < 0.0:
                    lv_ = 0.0
                hv = vh - v_max
                if hv < 0.0:
                    hv = 0.0
                viol += dv * dv + lv_ * lv_ + hv * hv
                for j in range(m):
                    cur = _integrand(feat_ids[j], d, vh, a, vpv[i], v_d, tau_h, d_s)
                    fsum[j] += 0.5 * (prev[j] + cur)
                    prev[j] = cur
            cost = 0.0
            for j in range(m):
                cost += theta[j] * fsum[j]
            cv[k] = cost * ts + penalty * viol
            vv[k] = viol
    return costs, viols
