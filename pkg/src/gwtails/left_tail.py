"""Left-tail expansion of the density near zero.

    p(x) = sum_{m>=1} x^(alpha + (m-1) beta) V_m(x),   V_m(x) = K_m(-ln x / ln E),

with ``alpha = -1 - log_E r`` and ``beta = -log_E r``. The harmonics of
``K_m`` are ``kappa_m theta*_{m,n} / Gamma(m beta - 2 pi i n / ln E)``; every
factor is combined in logarithms because the pieces individually over- or
underflow long before the product does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import loggamma

from .conjugacy import DEFAULT_CONFIG, IterationConfig, KappaTable, auto_kappa_scale, phi_inverse_coeffs
from .errors import HypothesisViolation, LogOfZero, NonConvergence
from .karlin import ThetaTable, theta_star
from .pgf import RationalPGF

__all__ = ["LeftTailConfig", "LeftTables", "build_tables", "term_log_ratio", "v_m",
           "density_left", "LeftTailResult", "exponents"]

# below this a Fourier entry is indistinguishable from rounding noise
_TINY = 1e-300


def exponents(model: RationalPGF):
    """``(alpha, beta)``."""
    beta = -model.log_E_r
    return beta - 1.0, beta


@dataclass(frozen=True)
class LeftTailConfig:
    M_terms: int = 30
    n_harmonics: int = 50
    y_shift: float = 0.0
    kappa_scale: float | None = None
    nodes: int = 10**6
    rel_tol: float = 1e-6  # last-term magnitude allowed relative to the sum

    def __post_init__(self):
        if self.M_terms < 1 or self.n_harmonics < 0:
            raise ValueError("M_terms must be >= 1 and n_harmonics >= 0")


@dataclass(frozen=True)
class LeftTables:
    kappa: KappaTable
    theta: ThetaTable
    alpha: float
    beta: float
    log_coeffs: np.ndarray = field(repr=False)  # [m, n] log of the harmonic; -inf for zeros


def _check_hypotheses(model):
    alpha, beta = exponents(model)
    if not alpha > 0:
        raise HypothesisViolation(f"log_E r = {model.log_E_r:.6g} is not < -1; the left-tail series "
                                  "needs alpha > 0", "left_tail", "build_tables")
    return alpha, beta


def _s(model, m, n):
    lnE = math.log(model.E)
    return m * (-model.log_E_r) - 2j * math.pi * n / lnE


def term_log_ratio(model: RationalPGF, kappa: KappaTable, theta: ThetaTable, m: int, n: int) -> complex:
    """``log(kappa_m theta*_{m,n} / Gamma(m beta - 2 pi i n / ln E))``.

    Negative ``n`` comes from conjugation of the ``|n|`` entry.
    """
    if not (1 <= m <= min(kappa.M, theta.m_max)) or abs(n) > theta.n_max:
        raise IndexError(f"(m, n) = ({m}, {n}) outside the tables")
    if n < 0:
        return complex(np.conj(term_log_ratio(model, kappa, theta, m, -n)))
    c = kappa.scaled_coeffs[m]
    t = theta.values[m, n]
    if abs(c) < _TINY or abs(t) < _TINY:
        raise LogOfZero(f"vanishing factor at (m, n) = ({m}, {n})", "left_tail", "term_log_ratio")
    lr = (np.log(complex(c)) + np.log(complex(t)) - loggamma(_s(model, m, n))
          - m * math.log(kappa.a) - 2 * math.pi * n * theta.y_shift)
    return complex(lr)


def build_tables(model: RationalPGF, cfg: IterationConfig = DEFAULT_CONFIG,
                 lcfg: LeftTailConfig = LeftTailConfig()) -> LeftTables:
    alpha, beta = _check_hypotheses(model)
    a = lcfg.kappa_scale or auto_kappa_scale(model, max(lcfg.M_terms, 2))
    kappa = phi_inverse_coeffs(model, lcfg.M_terms, a)
    theta = theta_star(model, cfg, lcfg.M_terms, lcfg.n_harmonics, lcfg.y_shift, lcfg.nodes)
    lc = np.full((lcfg.M_terms + 1, lcfg.n_harmonics + 1), -np.inf, dtype=complex)
    for m in range(1, lcfg.M_terms + 1):
        for n in range(lcfg.n_harmonics + 1):
            try:
                lc[m, n] = term_log_ratio(model, kappa, theta, m, n)
            except LogOfZero:
                pass  # exact zero term
    return LeftTables(kappa, theta, alpha, beta, lc)


def _harmonic_sum(model, tables, m, logx):
    """``(L, S)`` with ``V_m(x) = e^L * S``, ``S`` real."""
    lc = tables.log_coeffs[m]
    live = np.isfinite(lc.real)
    n = np.arange(lc.size)[live]
    if n.size == 0:
        return np.zeros_like(logx), np.zeros_like(logx)
    lnE = math.log(model.E)
    # x^(-2 pi i n / ln E) for every harmonic, offset by the largest magnitude
    ph = lc[live][:, None] - (2j * math.pi * n / lnE)[:, None] * logx[None, :]
    L = ph.real.max(axis=0)
    wts = np.where(n == 0, 1.0, 2.0)[:, None]
    S = np.sum(wts * np.exp(ph - L[None, :]), axis=0).real
    return L, S


def v_m(model: RationalPGF, tables: LeftTables, m: int, x):
    """``V_m(x)`` as ``(sign, log|V_m|)`` arrays."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("x must be positive")
    L, S = _harmonic_sum(model, tables, m, np.log(np.atleast_1d(x)))
    with np.errstate(divide="ignore"):
        out = np.sign(S), L + np.log(np.abs(S))
    if x.ndim == 0:
        return float(out[0][0]), float(out[1][0])
    return out


@dataclass(frozen=True)
class LeftTailResult:
    x: np.ndarray
    density: np.ndarray
    last_term: np.ndarray  # |x^(alpha+(M-1)beta) V_M(x)|
    term_magnitudes: np.ndarray  # [m-1, i]


def density_left(model: RationalPGF, tables: LeftTables, x_grid, M_terms=None, strict=True,
                 rel_tol=1e-6) -> LeftTailResult:
    """Partial sum of the series through ``M_terms`` (default: all tabulated terms).

    With ``strict`` a last term larger than ``rel_tol * |sum|`` anywhere raises
    NonConvergence.
    """
    x = np.atleast_1d(np.asarray(x_grid, dtype=float))
    if np.any(x <= 0):
        raise ValueError("x must be positive")
    M = M_terms or tables.kappa.M
    M = min(M, tables.kappa.M, tables.theta.m_max)
    logx = np.log(x)
    total = np.zeros_like(x)
    mags = np.zeros((M, x.size))
    for m in range(1, M + 1):
        L, S = _harmonic_sum(model, tables, m, logx)
        lp = (tables.alpha + (m - 1) * tables.beta) * logx + L
        term = np.exp(lp) * S
        total += term
        mags[m - 1] = np.abs(term)
    last = mags[-1]
    if strict:
        bad = last > rel_tol * np.abs(total)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise NonConvergence(f"last term {last[i]:.3e} vs sum {total[i]:.3e} at x={x[i]:.6g}; "
                                 "increase M_terms or restrict x", "left_tail", "density_left")
    return LeftTailResult(x, total, last, mags)
