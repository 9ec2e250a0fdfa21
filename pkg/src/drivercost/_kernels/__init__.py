"""Numerical kernel backend selection.

The hot inner loops (quintic sampling, feature integrals, the per-subsegment
BFGS, planner candidate evaluation) exist twice: a compiled Cython core
(``_core``) and a pure-numpy fallback (``_fallback``) with identical
semantics. The compiled core is used when importable; set
``DRIVERCOST_BACKEND=pure`` or ``compiled`` to force a choice.

Feature ids are positional: 0=f_a, 1=f_ds, 2=f_rs, 3=f_cd, 4=f_sd, 5=f_fd.
"""

from __future__ import annotations

import os

import numpy as np

# optimize_free_coeffs status codes
STATUS_CONVERGED = 0
STATUS_MAX_ITER = 1
STATUS_LINE_SEARCH_STALL = 2
STATUS_NON_FINITE = 3

_requested = os.environ.get("DRIVERCOST_BACKEND", "auto")
if _requested not in {"auto", "pure", "compiled"}:
    raise ImportError(f"DRIVERCOST_BACKEND must be auto, pure or compiled, got {_requested!r}")

if _requested == "pure":
    from . import _fallback as _impl

    BACKEND = "pure"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _fallback as _impl

        BACKEND = "pure"


def get_backend() -> str:
    return BACKEND


def _f64(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float64)


def _ids(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.intc)


def quintic_table(coeffs, dt: float, n: int):
    """Sample a quintic (descending coeffs) and its first two derivatives."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return _impl.quintic_table(_f64(coeffs), float(dt), int(n))


def feature_values(pos, vel, acc, lead_pos, lead_vel, dt, v_d, tau_h, d_s, feat_ids):
    """Trapezoidal feature integrals over one horizon, one value per id."""
    pos = _f64(pos)
    args = (_f64(vel), _f64(acc), _f64(lead_pos), _f64(lead_vel))
    if any(a.shape != pos.shape for a in args):
        raise ValueError("all trajectory arrays must share one grid")
    return _impl.feature_values(
        pos, *args, float(dt), float(v_d), float(tau_h), float(d_s), _ids(feat_ids)
    )


def subsegment_cost(free, p0, v0, a0, lead_pos, lead_vel, dt, v_d, tau_h, d_s, theta, feat_ids):
    """theta . f for the quintic pinned at (p0, v0, a0) with free high coeffs."""
    return _impl.subsegment_cost(
        _f64(free), float(p0), float(v0), float(a0),
        _f64(lead_pos), _f64(lead_vel), float(dt),
        float(v_d), float(tau_h), float(d_s), _f64(theta), _ids(feat_ids),
    )


def optimize_free_coeffs(
    p0, v0, a0, lead_pos, lead_vel, dt, v_d, tau_h, d_s, theta, feat_ids,
    gtol: float = 1e-8, max_iter: int = 200,
):
    """BFGS over the three free coefficients from the (0,0,0) start.

    Returns (free, cost, grad_inf_norm, n_iter, status). Gradients are
    central finite differences; convergence is ||g||_inf <= gtol*max(1,|f|).
    """
    return _impl.optimize_free_coeffs(
        float(p0), float(v0), float(a0),
        _f64(lead_pos), _f64(lead_vel), float(dt),
        float(v_d), float(tau_h), float(d_s), _f64(theta), _ids(feat_ids),
        float(gtol), int(max_iter),
    )


def candidate_costs(
    accels, d0, vh0, vpv, ts, v_d, tau_h, d_s, theta, feat_ids,
    d_min, v_min, v_max, penalty,
):
    """Planner candidate evaluation: simulate each constant acceleration over
    the horizon, integrate features, and accumulate constraint violations.

    Returns (costs, violation_sums); a candidate is feasible iff its
    violation sum is exactly 0.0.
    """
    return _impl.candidate_costs(
        _f64(accels), float(d0), float(vh0), _f64(vpv), float(ts),
        float(v_d), float(tau_h), float(d_s), _f64(theta), _ids(feat_ids),
        float(d_min), float(v_min), float(v_max), float(penalty),
    )
