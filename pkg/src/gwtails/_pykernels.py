"""Pure numpy implementations of the kernel API.

Used when the compiled extension is unavailable or ``GWTAILS_BACKEND=python``.
Vectorised over the input points instead of looping per point; results agree
with the compiled loops to rounding.
"""

from __future__ import annotations

import math

import numpy as np

DIVERGE = 1e150
GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SEED_XOR = np.uint64(0x5851F42D4C957F2D)


def _horner(c, z):
    acc = np.zeros(z.shape, dtype=complex)
    for a in c[::-1]:
        acc = acc * z + a
    return acc


def _hornerabs(c, x):
    acc = np.zeros(x.shape)
    for a in np.abs(c)[::-1]:
        acc = acc * x + a
    return acc


def pi_cascade(z, num, den, dnum, dden, E, t_max, deriv, skip_scale):
    z = np.ascontiguousarray(z, dtype=complex)
    w = z.copy()
    d = np.ones_like(w)
    status = np.zeros(z.size, dtype=np.int8)
    az = np.abs(z)
    with np.errstate(divide="ignore"):
        t0 = np.where(az > 0, np.ceil(np.log(az * skip_scale * 1e18) / math.log(E)), -1)
    t0 = np.minimum(t0, t_max - 1).astype(int)
    live = np.ones(z.size, dtype=bool)
    top = int(t0.max()) if z.size else -1
    for t in range(top, -1, -1):
        idx = np.flatnonzero(live & (t0 >= t))
        if idx.size == 0:
            continue
        Et1 = E ** (t + 1)
        Et2 = Et1 * E
        wi = w[idx]
        u = wi / Et1
        b = _horner(den, u)
        pole = np.abs(b) <= 1e-14 * _hornerabs(den, np.abs(u))
        if pole.any():
            status[idx[pole]] = 2
            live[idx[pole]] = False
            keep = ~pole
            idx, wi, u, b = idx[keep], wi[keep], u[keep], b[keep]
        a = _horner(num, u)
        g1 = a / b
        if deriv:
            g1p = (_horner(dnum, u) * b - a * _horner(dden, u)) / (b * b)
            d[idx] *= 1 + (2 * wi * g1 + wi * wi * g1p / Et1) / Et2
        with np.errstate(over="ignore", invalid="ignore"):
            wi = wi + wi * wi * g1 / Et2
        bad = ~np.isfinite(wi) | (np.abs(wi) > DIVERGE)
        w[idx] = wi
        if bad.any():
            status[idx[bad]] = 1
            live[idx[bad]] = False
    return 1 + w, (d if deriv else None), status


def phi_iterate(z, num, den, r, max_iter, stop_tol, escape):
    f = np.ascontiguousarray(z, dtype=complex).copy()
    status = np.full(f.size, 3, dtype=np.int8)
    iters = np.zeros(f.size, dtype=np.int32)
    live = np.ones(f.size, dtype=bool)
    rt = 1.0
    for t in range(max_iter):
        idx = np.flatnonzero(live)
        if idx.size == 0:
            break
        fi = f[idx]
        x = rt * fi
        esc = np.abs(x) > escape
        b = _horner(den, x)
        pole = np.abs(b) <= 1e-14 * _hornerabs(den, np.abs(x))
        status[idx[esc]] = 1
        status[idx[pole & ~esc]] = 2
        stop = esc | pole
        live[idx[stop]] = False
        idx, fi, x, b = idx[~stop], fi[~stop], x[~stop], b[~stop]
        with np.errstate(over="ignore", invalid="ignore"):
            step = (rt / r) * fi * fi * _horner(num, x) / b
            fi = fi + step
        f[idx] = fi
        rt *= r
        with np.errstate(invalid="ignore", over="ignore"):
            bad = ~np.isfinite(fi) | (np.abs(fi) > 1e300)
        status[idx[bad]] = 1
        live[idx[bad]] = False
        with np.errstate(invalid="ignore"):
            done = ~bad & (np.abs(step) <= stop_tol * np.abs(fi))
        status[idx[done]] = 0
        iters[idx[done]] = t + 1
        live[idx[done]] = False
    return f, status, iters


def julia_status(z, p, q, t_max, capture, escape):
    w = np.ascontiguousarray(z, dtype=complex).copy()
    status = np.zeros(w.size, dtype=np.int8)
    steps = np.full(w.size, t_max, dtype=np.int32)
    live = np.ones(w.size, dtype=bool)
    for t in range(t_max + 1):
        idx = np.flatnonzero(live)
        if idx.size == 0:
            break
        wi = w[idx]
        aw = np.abs(wi)
        cap = aw <= capture
        esc = ~cap & (aw >= escape)
        status[idx[cap]] = 1
        status[idx[esc]] = 2
        steps[idx[cap | esc]] = t
        live[idx[cap | esc]] = False
        if t == t_max:
            break
        keep = ~(cap | esc)
        idx, wi = idx[keep], wi[keep]
        b = _horner(q, wi)
        pole = np.abs(b) <= 1e-14 * _hornerabs(q, np.abs(wi))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            nxt = _horner(p, wi) / b
        bad = pole | ~np.isfinite(nxt)
        status[idx[bad]] = 2
        steps[idx[bad]] = t
        live[idx[bad]] = False
        w[idx[~bad]] = nxt[~bad]
    return status, steps


def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def path_keys(seed, paths):
    with np.errstate(over="ignore"):
        s = _mix64(np.uint64(seed) ^ _SEED_XOR)
        return _mix64(s + (paths.astype(np.uint64) + np.uint64(1)) * GAMMA)


def uniforms(keys, counters):
    with np.errstate(over="ignore"):
        bits = _mix64(keys + (counters.astype(np.uint64) + np.uint64(1)) * GAMMA)
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def gw_simulate(start, n_paths, seed, prob, alias, E, sigma, generations, exact_limit, cap):
    K = prob.size
    paths = np.arange(start, start + n_paths, dtype=np.int64)
    keys = path_keys(seed, paths)
    counter = np.zeros(n_paths, dtype=np.int64)
    X = np.ones(n_paths, dtype=np.int64)
    t = np.zeros(n_paths, dtype=np.int64)
    for _ in range(generations):
        act = np.flatnonzero((X < exact_limit) & (t < generations))
        if act.size == 0:
            break
        reps = X[act]
        owner = np.repeat(np.arange(act.size), reps)
        first = np.repeat(np.cumsum(reps) - reps, reps)
        offs = np.arange(owner.size) - first
        u = uniforms(keys[act][owner], counter[act][owner] + offs) * K
        k = np.minimum(u.astype(np.int64), K - 1)
        k = np.where(u - k >= prob[k], alias[k], k)
        X[act] = np.bincount(owner, weights=k + 1, minlength=act.size).astype(np.int64)
        counter[act] += reps
        t[act] += 1
    x = X.astype(float)
    capped = np.zeros(n_paths, dtype=np.int8)
    live = t < generations
    while live.any():
        idx = np.flatnonzero(live)
        over = x[idx] > cap
        capped[idx[over]] = 1
        live[idx[over]] = False
        idx = idx[~over]
        if idx.size == 0:
            break
        u1 = 1.0 - uniforms(keys[idx], counter[idx])
        u2 = uniforms(keys[idx], counter[idx] + 1)
        counter[idx] += 2
        z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
        xi = x[idx]
        x[idx] = np.maximum(xi * E + sigma * np.sqrt(xi) * z, 1.0)
        t[idx] += 1
        live[idx[t[idx] >= generations]] = False
    return x / np.power(E, t.astype(float)), capped


def fourier_sum(vals, h, x, resync=64):
    vals = np.asarray(vals, dtype=complex)
    n = vals.size
    out = np.zeros(len(x))
    if n == 0:
        return out
    k = np.arange(n, dtype=float)
    wts = np.ones(n)
    wts[0] = wts[-1] = 0.5
    re, im = vals.real * wts, vals.imag * wts
    for i, xi in enumerate(x):
        ang = k * (h * xi)
        out[i] = np.sum(re * np.cos(ang) + im * np.sin(ang))
    return out
