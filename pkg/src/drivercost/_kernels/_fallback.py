"""Pure-numpy kernel backend.

Mirrors ``_core.pyx`` operation for operation; algorithm constants must stay
in lockstep with the compiled version. State updates keep the same floating
point expression order as the compiled core so that planner feasibility
decisions agree with executed dynamics within each backend.
"""

from __future__ import annotations

import math

import numpy as np

_CBRT_EPS = float(np.finfo(float).eps) ** (1.0 / 3.0)
_ARMIJO_C1 = 1e-4
_BACKTRACK = 0.5
_MAX_BACKTRACKS = 40
_CURVATURE_SKIP = 1e-10

STATUS_CONVERGED = 0
STATUS_MAX_ITER = 1
STATUS_LINE_SEARCH_STALL = 2
STATUS_NON_FINITE = 3


def quintic_table(coeffs, dt, n):
    c0, c1, c2, c3, c4, c5 = coeffs
    tau = dt * np.arange(n, dtype=float)
    pos = ((((c0 * tau + c1) * tau + c2) * tau + c3) * tau + c4) * tau + c5
    vel = (((5.0 * c0 * tau + 4.0 * c1) * tau + 3.0 * c2) * tau + 2.0 * c3) * tau + c4
    acc = ((20.0 * c0 * tau + 12.0 * c1) * tau + 6.0 * c2) * tau + 2.0 * c3
    return pos, vel, acc


def _integrand(fid, gap, vel, acc, lead_vel, v_d, tau_h, d_s):
    if fid == 0:
        return acc * acc
    if fid == 1:
        e = v_d - vel
        return e * e
    if fid == 2:
        e = lead_vel - vel
        return e * e
    if fid == 3:
        e = gap - (vel * tau_h + d_s)
        return e * e
    if fid == 4:
        e = gap - d_s
        return e * e
    if fid == 5:
        return np.exp(-gap)
    raise ValueError(f"unknown feature id {fid}")


def feature_values(pos, vel, acc, lead_pos, lead_vel, dt, v_d, tau_h, d_s, feat_ids):
    gap = lead_pos - pos
    out = np.empty(len(feat_ids))
    with np.errstate(over="ignore"):
        for j, fid in enumerate(feat_ids):
            y = _integrand(int(fid), gap, vel, acc, lead_vel, v_d, tau_h, d_s)
            out[j] = (0.5 * (y[:-1] + y[1:])).sum() * dt
    return out


def subsegment_cost(free, p0, v0, a0, lead_pos, lead_vel, dt, v_d, tau_h, d_s, theta, feat_ids):
    coeffs = np.array([free[0], free[1], free[2], 0.5 * a0, v0, p0])
    pos, vel, acc = quintic_table(coeffs, dt, lead_pos.shape[0])
    f = feature_values(pos, vel, acc, lead_pos, lead_vel, dt, v_d, tau_h, d_s, feat_ids)
    return float(np.dot(theta, f))


def _grad(cost, x):
    g = np.empty(3)
    for i in range(3):
        h = _CBRT_EPS * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] = x[i] + h
        hp = xp[i] - x[i]
        xm = x.copy()
        xm[i] = x[i] - h
        hm = x[i] - xm[i]
        g[i] = (cost(xp) - cost(xm)) / (hp + hm)
    return g


def optimize_free_coeffs(
    p0, v0, a0, lead_pos, lead_vel, dt, v_d, tau_h, d_s, theta, feat_ids, gtol, max_iter
):
    def cost(x):
        return subsegment_cost(
            x, p0, v0, a0, lead_pos, lead_vel, dt, v_d, tau_h, d_s, theta, feat_ids
        )

    x = np.zeros(3)
    f = cost(x)
    if not math.isfinite(f):
        return x, f, math.inf, 0, STATUS_NON_FINITE
    g = _grad(cost, x)
    h_inv = np.eye(3)
    status = STATUS_MAX_ITER
    it = 0
    while it < max_iter:
        it += 1
        gnorm = float(np.abs(g).max())
        if gnorm <= gtol * max(1.0, abs(f)):
            status = STATUS_CONVERGED
            break
        p = -h_inv @ g
        dphi = float(p @ g)
        if not math.isfinite(dphi) or dphi >= 0.0:
            h_inv = np.eye(3)
            p = -g
            dphi = float(-(g @ g))
        alpha = 1.0
        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            xn = x + alpha * p
            fn = cost(xn)
            if math.isfinite(fn) and fn <= f + _ARMIJO_C1 * alpha * dphi:
                accepted = True
                break
            alpha *= _BACKTRACK
        if not accepted:
            status = STATUS_LINE_SEARCH_STALL
            break
        gn = _grad(cost, xn)
        s = xn - x
        y = gn - g
        sy = float(s @ y)
        if sy > _CURVATURE_SKIP * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            rho = 1.0 / sy
            hy = h_inv @ y
            yhy = float(y @ hy)
            h_inv = (
                h_inv
                + ((sy + yhy) * rho * rho) * np.outer(s, s)
                - rho * (np.outer(s, hy) + np.outer(hy, s))
            )
        x, f, g = xn, fn, gn
    gnorm = float(np.abs(g).max())
    if status == STATUS_MAX_ITER and gnorm <= gtol * max(1.0, abs(f)):
        status = STATUS_CONVERGED
    return x, float(f), gnorm, it, status


def candidate_costs(
    accels, d0, vh0, vpv, ts, v_d, tau_h, d_s, theta, feat_ids,
    d_min, v_min, v_max, penalty,
):
    k = accels.shape[0]
    n = vpv.shape[0]
    ats = accels * ts
    d = np.full(k, d0)
    vh = np.full(k, vh0)
    m = len(feat_ids)
    fsum = np.zeros((m, k))
    viol = np.zeros(k)
    with np.errstate(over="ignore", invalid="ignore"):
        prev = [
            np.broadcast_to(
                _integrand(int(fid), d, vh, accels, vpv[0], v_d, tau_h, d_s), (k,)
            ).copy()
            for fid in feat_ids
        ]
        for i in range(1, n):
            # same expression order as step_dynamics / the compiled core
            d = (vpv[i - 1] - vh) * ts + d
            vh = vh0 + ats * i
            dv = np.maximum(0.0, d_min - d)
            lv = np.maximum(0.0, v_min - vh)
            hv = np.maximum(0.0, vh - v_max)
            viol += dv * dv + lv * lv + hv * hv
            for j, fid in enumerate(feat_ids):
                cur = np.broadcast_to(
                    _integrand(int(fid), d, vh, accels, vpv[i], v_d, tau_h, d_s), (k,)
                )
                fsum[j] += 0.5 * (prev[j] + cur)
                prev[j] = cur
        costs = (np.asarray(theta)[:, None] * fsum).sum(axis=0) * ts + penalty * viol
    return costs, viol
