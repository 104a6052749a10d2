"""Poincare and Schroeder conjugacies of G.

``Pi`` solves ``G(Pi(z)) = Pi(E z)``, ``Pi(0) = 1``, ``Pi'(0) = 1``.
``Phi`` solves ``Phi(G(z)) = r Phi(z)``, ``Phi(0) = 0``, ``Phi'(0) = 1``.

``Pi`` is evaluated through the perturbation cascade

    w <- w + w^2 G1(1 + w / E^(t+1)) / E^(t+2),   t = t_max-1, ..., 0,
    Pi(z) = 1 + w,

which is the composition ``G o ... o G (1 + z/E^t)`` rewritten so that the
tiny displacement from 1 is never added to 1 until the very end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BranchAmbiguity, Divergence, Overflow, PoleOfG
from .pgf import RationalPGF, _polyder, preimages_batch

__all__ = [
    "IterationConfig",
    "KappaTable",
    "pi_eval",
    "pi_derivative",
    "pi_eval_with_derivative",
    "phi_eval",
    "pi_inverse",
    "principal_preimage",
    "principal_index",
    "phi_inverse_coeffs",
    "phi_inverse_eval",
    "auto_kappa_scale",
]


@dataclass(frozen=True)
class IterationConfig:
    t_max: int = 150
    stop_tol: float = 1e-15
    phi_max_iter: int = 600
    phi_escape: float = 1e6
    backend: str | None = None

    def __post_init__(self):
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")
        if not self.stop_tol > 0:
            raise ValueError("stop_tol must be positive")


DEFAULT_CONFIG = IterationConfig()


def _as_array(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def _cascade(model: RationalPGF, cfg: IterationConfig, z, deriv):
    z, scalar = _as_array(z)
    flat = np.ascontiguousarray(z.ravel())
    kern = kernels.get_backend(cfg.backend)
    num, den = model.g1_num, model.g1_den
    dnum, dden = _polyder(num), _polyder(den)
    skip = abs(num[0] / den[0]) + 1.0

    def run(lo, hi):
        return kern.pi_cascade(flat[lo:hi], num, den, dnum, dden, model.E, cfg.t_max, deriv, skip)

    val, der, status = kernels.concat(kernels.map_chunks(run, flat.size)) if flat.size else (
        flat.copy(), flat.copy() if deriv else None, np.zeros(0, np.int8))
    if np.any(status == 2):
        i = int(np.flatnonzero(status == 2)[0])
        raise PoleOfG(f"cascade hit a pole of G at z={flat[i]!r}", "conjugacy", "pi_eval")
    if np.any(status == 1):
        i = int(np.flatnonzero(status == 1)[0])
        raise Divergence(f"cascade diverged at z={flat[i]!r}", "conjugacy", "pi_eval")
    val = val.reshape(z.shape)
    der = der.reshape(z.shape) if deriv else None
    if scalar:
        return complex(val), (complex(der) if deriv else None)
    return val, der


def pi_eval(model: RationalPGF, cfg: IterationConfig = DEFAULT_CONFIG, z=0.0):
    return _cascade(model, cfg, z, False)[0]


def pi_eval_with_derivative(model: RationalPGF, cfg: IterationConfig = DEFAULT_CONFIG, z=0.0):
    """``(Pi(z), Pi'(z))`` from a single cascade pass."""
    return _cascade(model, cfg, z, True)


def pi_derivative(model: RationalPGF, cfg: IterationConfig = DEFAULT_CONFIG, z=0.0):
    return _cascade(model, cfg, z, True)[1]


def phi_eval(model: RationalPGF, cfg: IterationConfig = DEFAULT_CONFIG, z=0.0):
    """Schroeder function by ``Phi_{t+1} = Phi_t + r^(t-1) Phi_t^2 G0(r^t Phi_t)``."""
    z, scalar = _as_array(z)
    flat = np.ascontiguousarray(z.ravel())
    kern = kernels.get_backend(cfg.backend)

    def run(lo, hi):
        return kern.phi_iterate(flat[lo:hi], model.g0_num, model.g0_den, model.r,
                                cfg.phi_max_iter, cfg.stop_tol, cfg.phi_escape)

    if flat.size:
        val, status, _ = kernels.concat(kernels.map_chunks(run, flat.size))
    else:
        val, status = flat.copy(), np.zeros(0, np.int8)
    if np.any(status != 0):
        i = int(np.flatnonzero(status != 0)[0])
        why = {1: "orbit escaped", 2: "orbit hit a pole of G", 3: "no convergence"}[int(status[i])]
        raise Divergence(f"{why} at z={flat[i]!r}", "conjugacy", "phi_eval")
    val = val.reshape(z.shape)
    return complex(val) if scalar else val


def principal_index(model: RationalPGF, w, ambiguity_tol=1e-10):
    """Index of the principal preimage of each ``w`` within its NaN-padded root row.

    The principal preimage is the root nearest the predictor ``1 + (w-1)/E``.
    Returns ``(index, roots)``.
    """
    w = np.asarray(w, dtype=complex).ravel()
    roots = preimages_batch(model, w)
    pred = 1.0 + (w - 1.0) / model.E
    dist = np.abs(roots - pred[:, None])
    dist = np.where(np.isnan(dist), np.inf, dist)
    order = np.argsort(dist, axis=1, kind="stable")
    idx = order[:, 0].copy()
    if roots.shape[1] > 1:
        d = np.take_along_axis(dist, order[:, :2], axis=1)
        tie = np.abs(d[:, 1] - d[:, 0]) <= ambiguity_tol * (d[:, 0] + d[:, 1])
        if tie.any():
            # A real w with a conjugate pair of preimages ties exactly; take the
            # upper one, as the principal square root would. Rounding can move a
            # real w off the axis slightly, hence the loose realness test.
            rows = np.arange(w.size)
            first, second = roots[rows, order[:, 0]], roots[rows, order[:, 1]]
            scale = np.maximum(np.abs(first), 1.0)
            conj_pair = (np.abs(w.imag) <= 1e-8 * np.maximum(np.abs(w), 1.0)) & (
                np.abs(first - np.conj(second)) <= 1e-6 * scale)
            bad = tie & ~conj_pair
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise BranchAmbiguity(f"two preimages equidistant from predictor at w={w[i]!r}",
                                      "conjugacy", "pi_inverse")
            upper = np.where(first.imag >= second.imag, order[:, 0], order[:, 1])
            idx = np.where(tie, upper, idx)
    return idx, roots


def principal_preimage(model: RationalPGF, w, ambiguity_tol=1e-10):
    """The principal preimage of each ``w``; returns ``(principal, all_roots)``."""
    idx, roots = principal_index(model, w, ambiguity_tol)
    return roots[np.arange(roots.shape[0]), idx], roots


def pi_inverse(model: RationalPGF, cfg: IterationConfig = DEFAULT_CONFIG, w=1.0,
               eps_loc=1e-2, max_steps=400, newton_iter=60):
    """Principal inverse of Pi.

    Backward iteration along the principal branch of ``G^-1`` until the point
    is within ``eps_loc`` of 1, then a Newton solve of ``Pi(u) = w_t`` seeded
    with ``w_t - 1``; the result is scaled back by ``E^t``. By construction
    ``E * pi_inverse(G0^-1(w)) == pi_inverse(w)``.
    """
    w, scalar = _as_array(w)
    cur = np.ascontiguousarray(w.ravel()).copy()
    steps = np.zeros(cur.size, dtype=int)
    active = np.abs(cur - 1.0) > eps_loc
    for _ in range(max_steps):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        nxt, _ = principal_preimage(model, cur[idx])
        cur[idx] = nxt
        steps[idx] += 1
        active[idx] = np.abs(nxt - 1.0) > eps_loc
    else:
        if active.any():
            raise Divergence("backward orbit did not approach 1", "conjugacy", "pi_inverse")
    u = cur - 1.0
    live = np.ones(u.size, dtype=bool)
    extra = np.zeros(u.size, dtype=int)
    for _ in range(newton_iter):
        idx = np.flatnonzero(live)
        if idx.size == 0:
            break
        pv, dv = pi_eval_with_derivative(model, cfg, u[idx])
        du = (pv - cur[idx]) / dv
        u[idx] -= du
        # Pi is accurate to ~eps absolute near 1, hence the floor
        small = np.abs(du) <= 1e-14 * np.abs(u[idx]) + 1e-15
        # one more sweep after the step drops below tolerance
        extra[idx[small]] += 1
        live[idx[extra[idx] >= 2]] = False
    if live.any():
        idx = np.flatnonzero(live)
        resid = np.abs(pi_eval(model, cfg, u[idx]) - cur[idx])
        if np.any(resid > 1e-13):
            raise Divergence("Newton solve for the local inverse did not converge", "conjugacy", "pi_inverse")
    out = (model.E ** steps) * u
    out = out.reshape(w.shape)
    return complex(out) if scalar else out


@dataclass(frozen=True)
class KappaTable:
    """Scaled Taylor coefficients ``scaled_coeffs[m] = a^m kappa_m`` of Phi^-1.

    Index 0 holds the (zero) constant term.
    """

    a: float
    scaled_coeffs: np.ndarray

    @property
    def M(self) -> int:
        return self.scaled_coeffs.size - 1

    def kappa(self, m: int) -> float:
        """Unscaled coefficient; may overflow for large m."""
        return float(self.scaled_coeffs[m] / self.a**m)

    def log_scaled(self, m: int) -> complex:
        return complex(np.log(complex(self.scaled_coeffs[m])))


def phi_inverse_coeffs(model: RationalPGF, M: int, a: float = 1.0) -> KappaTable:
    """Solve ``S(r z) Q(S(z)) = P(S(z))`` order by order for ``S = Phi^-1(a z)``."""
    if M < 1:
        raise ValueError("M must be >= 1")
    if not a > 0:
        raise ValueError("a must be positive")
    p, q, r = model.p_coeffs, model.q_coeffs, model.r
    deg = max(p.size, q.size) - 1
    s = np.zeros(M + 1)
    s[1] = a
    # pw[k, n] = [S^k]_n; S^k starts at order k
    pw = np.zeros((deg + 1, M + 1))
    pw[0, 0] = 1.0
    if deg >= 1:
        pw[1, 1] = a
    rpow = r ** np.arange(M + 1)
    for n in range(2, M + 1):
        for k in range(2, min(deg, n) + 1):
            pw[k, n] = np.dot(s[1:n], pw[k - 1, n - 1:0:-1])
        ps = sum(p[k] * pw[k, n] for k in range(2, p.size))
        qs = q @ pw[: q.size, :n]  # [Q(S)]_j for j < n
        rhs = ps - np.dot(rpow[1:n] * s[1:n], qs[n - 1:0:-1])
        s[n] = rhs / (q[0] * (rpow[n] - r))
        if deg >= 1:
            pw[1, n] = s[n]
        if not abs(s[n]) < 1e250:
            raise Overflow(f"scaled coefficient {n} overflowed; choose a smaller a",
                           "conjugacy", "phi_inverse_coeffs")
    return KappaTable(float(a), s)


def auto_kappa_scale(model: RationalPGF, M: int = 40) -> float:
    """Pick ``a`` so the scaled coefficients neither blow up nor underflow."""
    tab = phi_inverse_coeffs(model, M, 1.0)
    m = np.arange(2, M + 1)
    mags = np.abs(tab.scaled_coeffs[2:])
    ok = mags > 0
    if not ok.any():
        return 1.0
    growth = np.max(np.log(mags[ok]) / m[ok])
    return float(math.exp(-growth)) if growth > 0 else 1.0


def phi_inverse_eval(table: KappaTable, z):
    """Truncated series ``sum_m kappa_m z^m`` with the scaling unwound in logs."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    with np.errstate(divide="ignore"):
        lz = np.log(z / table.a)
    for m in range(1, table.M + 1):
        c = table.scaled_coeffs[m]
        if c == 0.0:
            continue
        out += np.exp(np.log(complex(c)) + m * lz)
    return np.where(z == 0, 0.0, out)
