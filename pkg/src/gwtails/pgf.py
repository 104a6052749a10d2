"""Rational probability-generating functions G = P/Q.

The model object keeps, besides the raw coefficients, a few derived
polynomials that the iteration kernels need:

* ``g1_num / g1_den`` with ``G(1+u) = 1 + E u + u^2 g1_num(u)/g1_den(u)``;
* ``g0_num / g0_den`` with ``G(z) = r z + z^2 g0_num(z)/g0_den(z)``.

Both remainders are obtained by deflating the numerator polynomial exactly,
so they carry no removable singularity and need no near-point switch.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import roots as _roots
from .errors import (
    MultipleZero,
    NegativeCoefficient,
    PoleOfG,
    RootFindFailure,
    ValidationError,
)

__all__ = [
    "RationalPGF",
    "validate",
    "load_model",
    "eval_g",
    "offspring_taylor",
    "q_zeros",
    "preimages",
    "preimages_batch",
    "aux_g1",
    "aux_g0",
]

K_CHECK = 64
NEG_TOL = 1e-12
POLE_GUARD = 1e-14


def _polyder(c):
    c = np.asarray(c)
    if c.size <= 1:
        return np.zeros(1, dtype=c.dtype)
    return c[1:] * np.arange(1, c.size)


def _shift_one(c):
    """Coefficients of c(1 + u) in powers of u."""
    out = np.zeros(len(c))
    for k, a in enumerate(c):
        for j in range(k + 1):
            out[j] += a * math.comb(k, j)
    return out


def _pad_sub(a, b):
    n = max(len(a), len(b))
    out = np.zeros(n)
    out[: len(a)] += a
    out[: len(b)] -= b
    return out


def _strip(c):
    c = np.asarray(c, dtype=float)
    n = c.size
    while n > 1 and c[n - 1] == 0.0:
        n -= 1
    return c[:n].copy()


@dataclass(frozen=True, eq=False)
class RationalPGF:
    """Validated rational PGF ``G(z) = P(z)/Q(z)`` with ``p_0 = 0``.

    Build with :meth:`from_coeffs`, which checks the model and raises
    :class:`ValidationError` listing every violated condition.
    """

    p_coeffs: np.ndarray
    q_coeffs: np.ndarray
    name: str = "custom"
    r: float = field(init=False)
    E: float = field(init=False)
    g2: float = field(init=False)
    deg_gap: int = field(init=False)
    g1_num: np.ndarray = field(init=False, repr=False)
    g1_den: np.ndarray = field(init=False, repr=False)
    g0_num: np.ndarray = field(init=False, repr=False)
    g0_den: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p = _strip(self.p_coeffs)
        q = _strip(self.q_coeffs)
        object.__setattr__(self, "p_coeffs", p)
        object.__setattr__(self, "q_coeffs", q)
        q0 = q[0] if q.size else 0.0
        r = p[1] / q0 if (p.size > 1 and q0 != 0.0) else float("nan")
        P1, Q1 = p.sum(), q.sum()
        dP1, dQ1 = _polyder(p).sum(), _polyder(q).sum()
        E = (dP1 * Q1 - P1 * dQ1) / (Q1 * Q1) if Q1 != 0 else float("nan")
        object.__setattr__(self, "r", float(r))
        object.__setattr__(self, "E", float(E))
        object.__setattr__(self, "deg_gap", int(p.size - q.size))

        pt, qt = _shift_one(p), _shift_one(q)
        lin = np.zeros(qt.size + 1)
        lin[: qt.size] += qt
        lin[1:] += E * qt
        num1 = _pad_sub(pt, lin)
        g1_num = num1[2:] if num1.size > 2 else np.zeros(1)
        object.__setattr__(self, "g1_num", g1_num)
        object.__setattr__(self, "g1_den", qt)

        rz = np.zeros(q.size + 1)
        rz[1:] = r * q
        num0 = _pad_sub(p, rz)
        g0_num = num0[2:] if num0.size > 2 else np.zeros(1)
        object.__setattr__(self, "g0_num", g0_num)
        object.__setattr__(self, "g0_den", q)
        object.__setattr__(self, "g2", float(2.0 * g1_num[0] / qt[0]) if qt[0] else float("nan"))

    @classmethod
    def from_coeffs(cls, p, q, name="custom", check=True):
        model = cls(np.asarray(p, dtype=float), np.asarray(q, dtype=float), name)
        if check:
            report = validate(model)
            if not report["valid"]:
                raise ValidationError("; ".join(report["violations"]), "pgf", "RationalPGF")
        return model

    @property
    def N(self) -> int:
        return self.p_coeffs.size - 1

    @property
    def M(self) -> int:
        return self.q_coeffs.size - 1

    @property
    def lead_ratio(self) -> float:
        """``p_N / q_M``; the residue propagation factor is ``lead_ratio * E``."""
        return float(self.p_coeffs[-1] / self.q_coeffs[-1])

    @property
    def log_E_r(self) -> float:
        return math.log(self.r) / math.log(self.E)

    @property
    def variance(self) -> float:
        """Offspring variance ``G''(1) + E - E^2``."""
        return self.g2 + self.E - self.E**2

    def to_json(self) -> dict:
        return {"p": self.p_coeffs.tolist(), "q": self.q_coeffs.tolist()}

    def model_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def __call__(self, z):
        return eval_g(self, z)[0]


def validate(model: RationalPGF) -> dict:
    """Check the PGF conditions; returns ``{valid, r, E, violations}``."""
    p, q = model.p_coeffs, model.q_coeffs
    bad = []
    if p.size < 2 or p[0] != 0.0:
        bad.append("p_0 must be exactly 0 (and p_1 present)")
    if q.size < 2:
        bad.append("deg Q must be at least 1")
    if q.size == 0 or q[0] == 0.0:
        bad.append("q_0 must be nonzero")
    if bad:
        return {"valid": False, "r": model.r, "E": model.E, "violations": bad}

    g_one = p.sum() / q.sum() if q.sum() != 0 else float("inf")
    if not abs(g_one - 1.0) <= 1e-12:
        bad.append(f"G(1) = {g_one!r} differs from 1")
    if not 0.0 < model.r < 1.0:
        bad.append(f"r = {model.r!r} outside (0, 1)")
    if not model.E > 1.0:
        bad.append(f"E = {model.E!r} not > 1 (not supercritical)")
    try:
        zeros = _roots.aberth(q)
        pv = np.abs(_roots.horner(p, zeros))
        scale = np.abs(p).sum() * np.maximum(1.0, np.abs(zeros)) ** (p.size - 1)
        if np.any(pv <= 1e-10 * scale):
            bad.append("P and Q share a root")
    except RootFindFailure as exc:
        bad.append(str(exc))
    coeffs = _taylor(p, q, K_CHECK)
    neg = np.flatnonzero(coeffs < -NEG_TOL)
    if neg.size:
        bad.append(f"Taylor coefficient {int(neg[0]) + 1} is negative ({coeffs[neg[0]]:.3e})")
    return {"valid": not bad, "r": model.r, "E": model.E, "violations": bad}


def load_model(path, name=None) -> RationalPGF:
    data = json.loads(Path(path).read_text())
    return RationalPGF.from_coeffs(data["p"], data["q"], name=name or Path(path).stem)


def _pole_guard(q, z):
    return POLE_GUARD * _roots.horner(np.abs(q), np.abs(z)).real


def eval_g(model: RationalPGF, z):
    """Value and derivative of ``G`` at ``z`` (scalar or array)."""
    z = np.asarray(z, dtype=complex)
    p, q = model.p_coeffs, model.q_coeffs
    Pv, Qv = _roots.horner(p, z), _roots.horner(q, z)
    if np.any(np.abs(Qv) <= _pole_guard(q, z)):
        raise PoleOfG(f"Q vanishes at {z!r}", "pgf", "eval_g")
    dPv, dQv = _roots.horner(_polyder(p), z), _roots.horner(_polyder(q), z)
    val = Pv / Qv
    der = (dPv * Qv - Pv * dQv) / (Qv * Qv)
    if val.ndim == 0:
        return complex(val), complex(der)
    return val, der


def _taylor(p, q, K):
    g = np.zeros(K + 1)
    for k in range(K + 1):
        acc = p[k] if k < p.size else 0.0
        for i in range(1, min(k, q.size - 1) + 1):
            acc -= q[i] * g[k - i]
        g[k] = acc / q[0]
    return g[1:]


def offspring_taylor(model: RationalPGF, K: int) -> np.ndarray:
    """Offspring probabilities ``[p_1, ..., p_K]`` by power-series long division."""
    if K < 1:
        raise ValueError("K must be >= 1")
    g = _taylor(model.p_coeffs, model.q_coeffs, K)
    if np.any(g < -NEG_TOL):
        k = int(np.flatnonzero(g < -NEG_TOL)[0]) + 1
        raise NegativeCoefficient(f"coefficient {k} = {g[k - 1]:.3e}", "pgf", "offspring_taylor")
    if np.cumsum(g)[-1] > 1.0 + 1e-12:
        raise NegativeCoefficient("partial sum exceeds 1", "pgf", "offspring_taylor")
    return g


def q_zeros(model: RationalPGF) -> np.ndarray:
    """Zeros of Q (poles of G), sorted by real then imaginary part."""
    q = model.q_coeffs
    z = _roots.aberth(q)
    scale = np.abs(q).sum() * np.maximum(1.0, np.abs(z)) ** (q.size - 1)
    resid = np.abs(_roots.horner(q, z))
    if np.any(resid > 1e-12 * scale):
        raise RootFindFailure("zeros of Q not resolved", "pgf", "q_zeros")
    dq = np.abs(_roots.horner(_polyder(q), z))
    if np.any(dq <= 1e-8 * scale):
        raise MultipleZero("Q has a multiple zero; simple poles are required", "pgf", "q_zeros")
    z = np.where(np.abs(z.imag) <= 1e-14 * np.maximum(1.0, np.abs(z)), z.real + 0j, z)
    return z[np.lexsort((z.imag, z.real))]


def _preimage_poly(model, z):
    p, q = model.p_coeffs, model.q_coeffs
    n = max(p.size, q.size)
    c = np.zeros(n, dtype=complex)
    c[: p.size] += p
    c[: q.size] -= z * q
    return c


def _check_residual(model, z, w):
    p, q = model.p_coeffs, model.q_coeffs
    resid = np.abs(_roots.horner(p, w) - np.asarray(z)[..., None] * _roots.horner(q, w))
    aw = np.abs(w)
    scale = _roots.horner(np.abs(p), aw).real + np.abs(np.asarray(z))[..., None] * _roots.horner(np.abs(q), aw).real
    return resid <= 1e-11 * np.maximum(scale, 1e-300)


def preimages(model: RationalPGF, z, return_dropped=False):
    """All finite ``w`` with ``G(w) = z``, sorted by real then imaginary part.

    Roots that escape to infinity (leading coefficient of ``P - zQ``
    cancelling) are omitted; ``return_dropped=True`` also returns their count.
    """
    c, dropped = _roots.trim(_preimage_poly(model, complex(z)))
    w = _roots.aberth(c)
    if w.size and not np.all(_check_residual(model, complex(z), w)):
        raise RootFindFailure(f"preimage residual too large at z={z!r}", "pgf", "preimages")
    return (w, dropped) if return_dropped else w


def preimages_batch(model: RationalPGF, zs) -> np.ndarray:
    """Preimages for many points: ``(B, d)`` array, NaN-padded on degree drop."""
    zs = np.asarray(zs, dtype=complex).ravel()
    p, q = model.p_coeffs, model.q_coeffs
    n = max(p.size, q.size)
    c = np.zeros((zs.size, n), dtype=complex)
    c[:, : p.size] += p
    c[:, : q.size] -= zs[:, None] * q
    scale = np.abs(c).max(axis=1)
    full = np.abs(c[:, -1]) > 1e-14 * scale
    out = np.full((zs.size, n - 1), np.nan + 0j)
    if full.any():
        out[full] = _roots.aberth_batch(c[full])
    for i in np.flatnonzero(~full):
        w = preimages(model, zs[i])
        out[i, : w.size] = w
    ok = _check_residual(model, zs, np.where(np.isnan(out), 0, out)) | np.isnan(out)
    if not ok.all():
        raise RootFindFailure("preimage residual too large", "pgf", "preimages_batch")
    return out


def aux_g1(model: RationalPGF, z):
    """``G1(z) = (G(z) - 1 - E(z-1)) / (z-1)^2``, regular at ``z = 1``."""
    u = np.asarray(z, dtype=complex) - 1.0
    den = _roots.horner(model.g1_den, u)
    if np.any(np.abs(den) <= _pole_guard(model.g1_den, u)):
        raise PoleOfG(f"Q vanishes at {z!r}", "pgf", "aux_g1")
    out = _roots.horner(model.g1_num, u) / den
    return complex(out) if out.ndim == 0 else out


def aux_g0(model: RationalPGF, z):
    """``G0(z) = (G(z) - r z) / z^2``, regular at ``z = 0``."""
    z = np.asarray(z, dtype=complex)
    den = _roots.horner(model.g0_den, z)
    if np.any(np.abs(den) <= _pole_guard(model.g0_den, z)):
        raise PoleOfG(f"Q vanishes at {z!r}", "pgf", "aux_g0")
    out = _roots.horner(model.g0_num, z) / den
    return complex(out) if out.ndim == 0 else out
