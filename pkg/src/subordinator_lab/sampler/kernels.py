"""First-passage kernels.

Each replica simulates jumps above the cutoff as a Poisson stream in time,
with linear growth at ``drift`` between events, until the level is crossed.
Event ``j`` of replica ``r`` uses the Philox block at counter
``(j, r, tag, 0)``: u0 is the waiting time, u1 the jump size, u2 the thinning
acceptance (tempered stable only); u3 is unused.

Two implementations with identical stream consumption:

* ``passages_numba`` -- compiled, parallel over replicas;
* ``passages_numpy`` -- all live replicas advanced in lockstep with numpy.
"""
import math

import numpy as np

from .. import _backend
from .._backend import njit
from ..rng import uniforms_jit, uniforms_np

NONE, STABLE, TEMPERED, CP_EXP, CP_PARETO, TABULATED = range(6)

STATUS_OK = 0
STATUS_BUDGET = 1

if _backend.HAVE_NUMBA:
    from numba import prange
else:  # pragma: no cover
    prange = range


@njit(inline="always")
def _tab_inverse(lx, lp, sl, lt):
    n = lx.size
    if lt > lp[0]:
        return math.exp(lx[0] + (lt - lp[0]) / sl[0])
    if lt < lp[n - 1]:
        return math.exp(lx[n - 1] + (lt - lp[n - 1]) / sl[n - 2])
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if lp[mid] >= lt:
            lo = mid
        else:
            hi = mid
    if sl[lo] == 0.0:
        return math.exp(lx[lo])
    return math.exp(lx[lo] + (lt - lp[lo]) / sl[lo])


@njit(inline="always")
def _jump(code, params, lx, lp, sl, eps, log_tail_eps, u1, u2):
    if code == STABLE:
        return eps * u1 ** (-1.0 / params[0]), True
    if code == TEMPERED:
        x = eps * u1 ** (-1.0 / params[0])
        return x, u2 < math.exp(-params[1] * x)
    if code == CP_EXP:
        return -params[1] * math.log(u1), True
    if code == CP_PARETO:
        return params[2] * u1 ** (-1.0 / params[1]), True
    if code == TABULATED:
        return _tab_inverse(lx, lp, sl, log_tail_eps + math.log(u1)), True
    return 0.0, False


@njit(parallel=True, cache=True)
def _passages_numba(code, params, lx, lp, sl, level, eps, log_tail_eps, rate, drift,
                    k0, k1, tag, first_replica, max_events,
                    out_t, out_u, out_o, out_crept, out_status):
    n = out_t.size
    for i in prange(n):
        rep = np.uint64(first_replica + i)
        x_pos = 0.0
        t = 0.0
        j = 0
        status = STATUS_OK
        crossing_t = 0.0
        under = 0.0
        over = 0.0
        crept = False
        while True:
            if j >= max_events:
                status = STATUS_BUDGET
                break
            u0, u1, u2, u3 = uniforms_jit(np.uint64(j), rep, tag, k0, k1)
            j += 1
            if rate > 0.0:
                tau = -math.log(u0) / rate
            else:
                tau = math.inf
            if drift > 0.0:
                if x_pos + drift * tau > level:
                    crossing_t = t + (level - x_pos) / drift
                    under = level
                    over = 0.0
                    crept = True
                    break
                x_pos += drift * tau
            t += tau
            size, ok = _jump(code, params, lx, lp, sl, eps, log_tail_eps, u1, u2)
            if not ok:
                continue
            if x_pos + size > level:
                crossing_t = t
                under = x_pos
                over = x_pos + size - level
                break
            x_pos += size
        out_t[i] = crossing_t
        out_u[i] = under
        out_o[i] = over
        out_crept[i] = crept
        out_status[i] = status


def _jump_np(code, params, lx, lp, sl, eps, log_tail_eps, u1, u2):
    if code == STABLE:
        return eps * u1 ** (-1.0 / params[0]), np.ones(u1.shape, dtype=bool)
    if code == TEMPERED:
        x = eps * u1 ** (-1.0 / params[0])
        return x, u2 < np.exp(-params[1] * x)
    if code == CP_EXP:
        return -params[1] * np.log(u1), np.ones(u1.shape, dtype=bool)
    if code == CP_PARETO:
        return params[2] * u1 ** (-1.0 / params[1]), np.ones(u1.shape, dtype=bool)
    if code == TABULATED:
        lt = log_tail_eps + np.log(u1)
        n = lx.size
        i = np.clip(np.searchsorted(-lp, -lt, side="right") - 1, 0, n - 2)
        slope = sl[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = np.where(slope == 0.0, lx[i], lx[i] + (lt - lp[i]) / slope)
        out = np.where(lt > lp[0], lx[0] + (lt - lp[0]) / sl[0], inner)
        out = np.where(lt < lp[-1], lx[-1] + (lt - lp[-1]) / sl[-1], out)
        return np.exp(out), np.ones(u1.shape, dtype=bool)
    return np.zeros(u1.shape), np.zeros(u1.shape, dtype=bool)


def _passages_numpy(code, params, lx, lp, sl, level, eps, log_tail_eps, rate, drift,
                    k0, k1, tag, first_replica, max_events,
                    out_t, out_u, out_o, out_crept, out_status):
    n = out_t.size
    live = np.arange(n)
    x_pos = np.zeros(n)
    t = np.zeros(n)
    j = 0
    while live.size:
        if j >= max_events:
            out_status[live] = STATUS_BUDGET
            break
        reps = np.uint64(first_replica) + live.astype(np.uint64)
        u0, u1, u2, _ = uniforms_np(np.uint64(j), reps, tag, k0, k1)
        j += 1
        xp = x_pos[live]
        tt = t[live]
        if rate > 0.0:
            tau = -np.log(u0) / rate
        else:
            tau = np.full(live.size, math.inf)
        if drift > 0.0:
            creep = xp + drift * tau > level
            if creep.any():
                idx = live[creep]
                out_t[idx] = tt[creep] + (level - xp[creep]) / drift
                out_u[idx] = level
                out_o[idx] = 0.0
                out_crept[idx] = True
            keep = ~creep
            live, xp, tt, tau, u1, u2 = live[keep], xp[keep], tt[keep], tau[keep], u1[keep], u2[keep]
            xp = xp + drift * tau
        tt = tt + tau
        size, ok = _jump_np(code, params, lx, lp, sl, eps, log_tail_eps, u1, u2)
        cross = ok & (xp + size > level)
        if cross.any():
            idx = live[cross]
            out_t[idx] = tt[cross]
            out_u[idx] = xp[cross]
            out_o[idx] = xp[cross] + size[cross] - level
        xp = np.where(ok & ~cross, xp + size, xp)
        keep = ~cross
        live = live[keep]
        x_pos[live] = xp[keep]
        t[live] = tt[keep]


def run_passages(code, params, tables, level, eps, log_tail_eps, rate, drift,
                 key, tag, first_replica, n, max_events, backend=None):
    """Simulate ``n`` replicas; returns ``(T, undershoot, overshoot, crept, status)``."""
    if backend is None:
        backend = "numba" if _backend.USE_NUMBA else "numpy"
    lx, lp, sl = tables
    out_t = np.empty(n)
    out_u = np.empty(n)
    out_o = np.empty(n)
    out_crept = np.zeros(n, dtype=np.bool_)
    out_status = np.zeros(n, dtype=np.int8)
    args = (
        int(code), np.asarray(params, dtype=np.float64), lx, lp, sl, float(level), float(eps),
        float(log_tail_eps), float(rate), float(drift), key[0], key[1], np.uint64(tag),
        int(first_replica), int(max_events), out_t, out_u, out_o, out_crept, out_status,
    )
    if backend == "numba":
        if not _backend.HAVE_NUMBA:  # pragma: no cover
            raise RuntimeError("numba backend requested but numba is not importable")
        workers = _backend.worker_count()
        if workers:
            import numba

            numba.set_num_threads(min(workers, numba.config.NUMBA_NUM_THREADS))
        _passages_numba(*args)
    elif backend == "numpy":
        _passages_numpy(*args)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return out_t, out_u, out_o, out_crept, out_status
