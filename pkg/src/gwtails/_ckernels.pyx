# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Mirrors gwtails._pykernels one function at a time."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, cos, sin, ceil, isfinite, hypot, M_PI
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

ctypedef double complex cplx


cdef inline cplx mkc(double re, double im) noexcept nogil:
    cdef cplx z
    z.real = re
    z.imag = im
    return z

cdef double DIVERGE = 1e150


cdef inline cplx horner(const double* c, Py_ssize_t n, cplx z) noexcept nogil:
    cdef Py_ssize_t j
    cdef double re = 0, im = 0, t
    for j in range(n - 1, -1, -1):
        t = re * z.real - im * z.imag + c[j]
        im = re * z.imag + im * z.real
        re = t
    return mkc(re, im)


cdef inline double hornerabs(const double* c, Py_ssize_t n, double x) noexcept nogil:
    cdef Py_ssize_t j
    cdef double acc = 0
    for j in range(n - 1, -1, -1):
        acc = acc * x + (c[j] if c[j] >= 0 else -c[j])
    return acc


cdef inline cplx cdiv(cplx a, cplx b) noexcept nogil:
    # Smith's algorithm
    cdef double e, f
    if (b.real if b.real >= 0 else -b.real) >= (b.imag if b.imag >= 0 else -b.imag):
        e = b.imag / b.real
        f = b.real + b.imag * e
        return mkc((a.real + a.imag * e) / f, (a.imag - a.real * e) / f)
    e = b.real / b.imag
    f = b.imag + b.real * e
    return mkc((a.real * e + a.imag) / f, (a.imag * e - a.real) / f)


cdef inline double cabs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline double cmod(cplx z) noexcept nogil:
    return hypot(z.real, z.imag)


cdef enum:
    LANES = 8


def pi_cascade(cplx[::1] z, const double[::1] num, const double[::1] den,
               const double[::1] dnum, const double[::1] dden,
               double E, int t_max, bint deriv, double skip_scale):
    cdef Py_ssize_t n = z.shape[0], i0, i, k, m
    cdef int t, top
    cdef cplx u, a, b, g1, g1p, bc, w2, w
    cdef double lnE = log(E), az, ie1, ie2, guard, ib
    cdef const double* pn = &num[0]
    cdef const double* pd = &den[0]
    cdef const double* pdn = &dnum[0]
    cdef const double* pdd = &dden[0]
    cdef Py_ssize_t nn = num.shape[0], nd = den.shape[0], ndn = dnum.shape[0], ndd = dden.shape[0]
    cdef cplx lw[LANES]
    cdef cplx ld[LANES]
    cdef int lt0[LANES]
    cdef Py_ssize_t lanes = LANES
    cdef signed char lst[LANES]
    # the loop is a serial chain per point; E^-t avoids divisions and the
    # lanes give the CPU independent chains to overlap
    inv_arr = np.power(1.0 / E, np.arange(t_max + 2, dtype=np.float64))
    cdef double[::1] inv = inv_arr
    val = np.empty(n, dtype=np.complex128)
    der = np.empty(n, dtype=np.complex128)
    status = np.zeros(n, dtype=np.int8)
    cdef cplx[::1] v = val
    cdef cplx[::1] dv = der
    cdef signed char[::1] st = status
    with nogil:
        i0 = 0
        while i0 < n:
            m = n - i0 if n - i0 < lanes else lanes
            top = -1
            for k in range(m):
                lw[k] = z[i0 + k]
                ld[k] = 1
                lst[k] = 0
                az = sqrt(cabs2(lw[k]))
                lt0[k] = t_max - 1
                if az > 0:
                    t = <int>ceil(log(az * skip_scale * 1e18) / lnE)
                    if t < lt0[k]:
                        lt0[k] = t
                else:
                    lt0[k] = -1
                if lt0[k] > top:
                    top = lt0[k]
            for t in range(top, -1, -1):
                ie1 = inv[t + 1]
                ie2 = inv[t + 2]
                for k in range(m):
                    if lst[k] != 0 or t > lt0[k]:
                        continue
                    w = lw[k]
                    u = mkc(w.real * ie1, w.imag * ie1)
                    b = horner(pd, nd, u)
                    guard = 1e-14 * hornerabs(pd, nd, sqrt(cabs2(u)))
                    if cabs2(b) <= guard * guard:
                        lst[k] = 2
                        continue
                    a = horner(pn, nn, u)
                    ib = 1.0 / cabs2(b)
                    bc = mkc(b.real * ib, -b.imag * ib)
                    g1 = a * bc
                    w2 = w * w
                    if deriv:
                        g1p = (horner(pdn, ndn, u) - g1 * horner(pdd, ndd, u)) * bc
                        ld[k] = ld[k] * (1 + (2 * w * g1 + w2 * g1p * ie1) * ie2)
                    w = w + w2 * g1 * ie2
                    if not (isfinite(w.real) and isfinite(w.imag)) or cabs2(w) > DIVERGE * DIVERGE:
                        lst[k] = 1
                    lw[k] = w
            for k in range(m):
                v[i0 + k] = 1 + lw[k]
                dv[i0 + k] = ld[k]
                st[i0 + k] = lst[k]
            i0 += lanes
    return val, (der if deriv else None), status


def phi_iterate(cplx[::1] z, const double[::1] num, const double[::1] den,
                double r, int max_iter, double stop_tol, double escape):
    cdef Py_ssize_t n = z.shape[0], i
    cdef int t
    cdef cplx f, x, b, step
    cdef double rt, guard
    cdef const double* pn = &num[0]
    cdef const double* pd = &den[0]
    cdef Py_ssize_t nn = num.shape[0], nd = den.shape[0]
    val = np.empty(n, dtype=np.complex128)
    status = np.zeros(n, dtype=np.int8)
    iters = np.zeros(n, dtype=np.int32)
    cdef cplx[::1] v = val
    cdef signed char[::1] st = status
    cdef int[::1] it = iters
    with nogil:
        for i in range(n):
            f = z[i]
            st[i] = 3
            rt = 1.0
            for t in range(max_iter):
                x = rt * f
                if cabs2(x) > escape * escape:
                    st[i] = 1
                    break
                b = horner(pd, nd, x)
                guard = 1e-14 * hornerabs(pd, nd, sqrt(cabs2(x)))
                if cabs2(b) <= guard * guard:
                    st[i] = 2
                    break
                step = cdiv((rt / r) * f * f * horner(pn, nn, x), b)
                f = f + step
                rt = rt * r
                # |f| grows like r^-t off the basin; squares would overflow first
                if not (isfinite(f.real) and isfinite(f.imag)) or cmod(f) > 1e300:
                    st[i] = 1
                    break
                if cmod(step) <= stop_tol * cmod(f):
                    st[i] = 0
                    it[i] = t + 1
                    break
            v[i] = f
    return val, status, iters


def julia_status(cplx[::1] z, const double[::1] p, const double[::1] q,
                 int t_max, double capture, double escape):
    cdef Py_ssize_t n = z.shape[0], i
    cdef int t
    cdef cplx w, b
    cdef double guard
    cdef const double* pp = &p[0]
    cdef const double* pq = &q[0]
    cdef Py_ssize_t np_ = p.shape[0], nq = q.shape[0]
    status = np.zeros(n, dtype=np.int8)
    steps = np.zeros(n, dtype=np.int32)
    cdef signed char[::1] st = status
    cdef int[::1] sp = steps
    with nogil:
        for i in range(n):
            w = z[i]
            for t in range(t_max + 1):
                if cabs2(w) <= capture * capture:
                    st[i] = 1
                    break
                if cabs2(w) >= escape * escape:
                    st[i] = 2
                    break
                if t == t_max:
                    break
                b = horner(pq, nq, w)
                guard = 1e-14 * hornerabs(pq, nq, sqrt(cabs2(w)))
                if cabs2(b) <= guard * guard:
                    st[i] = 2
                    break
                w = cdiv(horner(pp, np_, w), b)
                if not (isfinite(w.real) and isfinite(w.imag)):
                    st[i] = 2
                    break
            sp[i] = t
    return status, steps


# counter-based stream: splitmix64 finalizer over a Weyl sequence
cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t path_key(uint64_t seed, uint64_t path) noexcept nogil:
    return mix64(mix64(seed ^ 0x5851F42D4C957F2DULL) + (path + 1) * GAMMA)


cdef inline double uniform(uint64_t key, uint64_t counter) noexcept nogil:
    return <double>(mix64(key + (counter + 1) * GAMMA) >> 11) * (1.0 / 9007199254740992.0)


def gw_simulate(int64_t start, int64_t n_paths, uint64_t seed,
                const double[::1] prob, const int64_t[::1] alias,
                double E, double sigma, int generations,
                int64_t exact_limit, double cap):
    cdef Py_ssize_t i, K = prob.shape[0]
    cdef int t
    cdef int64_t X, j, k, total
    cdef uint64_t key, c
    cdef double u, x, u1, u2, scale, Et
    out = np.empty(n_paths, dtype=np.float64)
    capped = np.zeros(n_paths, dtype=np.int8)
    cdef double[::1] w = out
    cdef signed char[::1] ch = capped
    with nogil:
        for i in range(n_paths):
            key = path_key(seed, <uint64_t>(start + i))
            c = 0
            X = 1
            x = 1.0
            t = 0
            Et = 1.0
            while t < generations and X < exact_limit:
                total = 0
                for j in range(X):
                    u = uniform(key, c) * K
                    c += 1
                    k = <int64_t>u
                    if k >= K:
                        k = K - 1
                    if u - k >= prob[k]:
                        k = alias[k]
                    total += k + 1
                X = total
                t += 1
                Et = Et * E
            x = <double>X
            while t < generations:
                if x > cap:
                    ch[i] = 1
                    break
                u1 = 1.0 - uniform(key, c)
                u2 = uniform(key, c + 1)
                c += 2
                x = x * E + sigma * sqrt(x) * sqrt(-2.0 * log(u1)) * cos(2.0 * M_PI * u2)
                if x < 1.0:
                    x = 1.0
                t += 1
                Et = Et * E
            w[i] = x / Et
    return out, capped


def fourier_sum(cplx[::1] vals, double h, const double[::1] x, int resync=64):
    """``sum_k c_k Re[vals_k exp(-i k h x)]`` with half weights at both ends."""
    cdef Py_ssize_t n = vals.shape[0], nx = x.shape[0], i, k
    cdef double s, c, comp, term, tsum, ang, rr, ri, cr, ci, tmp
    out = np.zeros(nx, dtype=np.float64)
    cdef double[::1] o = out
    if n == 0:
        return out
    with nogil:
        for i in range(nx):
            s = 0.0
            comp = 0.0
            ang = h * x[i]
            rr = cos(ang)
            ri = -sin(ang)
            cr = 1.0
            ci = 0.0
            for k in range(n):
                if k % resync == 0:
                    cr = cos(k * ang)
                    ci = -sin(k * ang)
                term = vals[k].real * cr - vals[k].imag * ci
                if k == 0 or k == n - 1:
                    term = 0.5 * term
                # Neumaier compensated summation
                tsum = s + term
                if (s if s >= 0 else -s) >= (term if term >= 0 else -term):
                    comp = comp + ((s - tsum) + term)
                else:
                    comp = comp + ((term - tsum) + s)
                s = tsum
                tmp = cr * rr - ci * ri
                ci = cr * ri + ci * rr
                cr = tmp
            o[i] = s + comp
    return out
