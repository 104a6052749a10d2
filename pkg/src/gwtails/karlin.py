"""The one-periodic Karlin-McGregor function and Fourier tables of its powers.

    K(z) = r^(-z) Phi(Pi(-E^z)),   K(z + 1) = K(z).

The left tail needs the coefficients of K(z)^m on the shifted line
``Im z = -y``; there the coefficients decay slowly enough to be computed
accurately, and the factor ``e^(2 pi n y)`` is carried separately.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .conjugacy import DEFAULT_CONFIG, IterationConfig, phi_eval, pi_eval
from .errors import Divergence, PoleOfG, StripViolation
from .pgf import RationalPGF

__all__ = ["ThetaTable", "k_eval", "theta_star", "plain_coefficients", "strip_bounds",
           "auto_y_shift", "decay_rate", "parseval_gap"]


@dataclass(frozen=True)
class ThetaTable:
    """``values[m, n] = e^(2 pi n y) theta*_{m,n}`` for 1 <= m <= m_max, 0 <= n <= n_max.

    Row 0 is unused and left at zero so that indices match ``m``.
    """

    m_max: int
    n_max: int
    y_shift: float
    nodes: int
    values: np.ndarray

    def to_csv(self, path, header=None):
        with open(path, "w", newline="") as fh:
            if header:
                for line in header:
                    fh.write(f"# {line}\n")
            w = csv.writer(fh)
            w.writerow(["m", "n", "Re", "Im", "y_shift"])
            for m in range(1, self.m_max + 1):
                for n in range(self.n_max + 1):
                    v = self.values[m, n]
                    w.writerow([m, n, repr(float(v.real)), repr(float(v.imag)), repr(self.y_shift)])


def k_eval(model: RationalPGF, cfg: IterationConfig = DEFAULT_CONFIG, z=0.0):
    """``K(z)``; raises StripViolation when ``z`` is outside the strip of analyticity."""
    z = np.asarray(z, dtype=complex)
    lnE = math.log(model.E)
    try:
        inner = pi_eval(model, cfg, -np.exp(z * lnE))
        out = np.exp(-z * math.log(model.r)) * phi_eval(model, cfg, inner)
    except (Divergence, PoleOfG) as exc:
        raise StripViolation(f"K diverged on the requested line: {exc}",
                             "karlin", "k_eval") from exc
    return complex(out) if out.ndim == 0 else out


def _line_samples(model, cfg, y_shift, nodes):
    x = np.arange(nodes) / nodes
    return k_eval(model, cfg, x - 1j * y_shift)


def theta_star(model: RationalPGF, cfg: IterationConfig = DEFAULT_CONFIG, m_max=30, n_max=50,
               y_shift=0.0, nodes=10**6) -> ThetaTable:
    """Fourier coefficients of ``K^m`` along ``x - i y`` by the uniform trapezoid rule.

    For a periodic integrand the trapezoid sums for all ``n`` at once are a
    single FFT of the samples.
    """
    if y_shift < 0:
        raise ValueError("y_shift must be >= 0")
    if nodes < 4 * n_max:
        raise ValueError("nodes must be >= 4 * n_max")
    k = _line_samples(model, cfg, y_shift, nodes)
    vals = np.zeros((m_max + 1, n_max + 1), dtype=complex)
    km = np.ones(nodes, dtype=complex)
    for m in range(1, m_max + 1):
        km = km * k
        vals[m] = np.fft.fft(km)[: n_max + 1] / nodes
    if not np.all(np.isfinite(vals)):
        raise StripViolation("non-finite Fourier coefficients; y_shift too close to the strip edge",
                             "karlin", "theta_star")
    return ThetaTable(m_max, n_max, float(y_shift), int(nodes), vals)


def plain_coefficients(model: RationalPGF, cfg: IterationConfig = DEFAULT_CONFIG, n_max=40,
                       nodes=1 << 14):
    """``theta_n`` of ``K`` on the real axis for ``n = -n_max..n_max`` (index ``n + n_max``)."""
    k = _line_samples(model, cfg, 0.0, nodes)
    f = np.fft.fft(k) / nodes
    return np.concatenate([f[nodes - n_max:], f[: n_max + 1]]), k


def strip_bounds(model: RationalPGF, theta: float):
    """Admissible ``y``: above ``pi/(2 ln E)`` for the Gamma factor, below ``theta/(2 ln E)``."""
    lnE = math.log(model.E)
    return math.pi / (2 * lnE), theta / (2 * lnE)


def auto_y_shift(model: RationalPGF, theta: float, cfg: IterationConfig = DEFAULT_CONFIG,
                 frac=0.9, backoff=0.8, tries=8, probe_nodes=4096):
    """Pick ``y`` a fraction ``frac`` of the way across the admissible band.

    Backs off towards the lower bound while K fails to evaluate on the line.
    """
    lo, hi = strip_bounds(model, theta)
    if hi <= lo:
        raise StripViolation("critical angle does not exceed pi; no admissible y",
                             "karlin", "auto_y_shift")
    for _ in range(tries):
        y = lo + frac * (hi - lo)
        try:
            k = _line_samples(model, cfg, y, probe_nodes)
        except StripViolation:
            frac *= backoff
            continue
        if np.all(np.isfinite(k)):
            return y
        frac *= backoff
    raise StripViolation("no y in the admissible band gave finite K", "karlin", "auto_y_shift")


def decay_rate(coeffs, floor=1e-13):
    """Least-squares slope ``c`` of ``log|theta_n| ~ log C - c n`` over ``n >= 0``.

    Points below ``floor * |theta_0|`` are rounding noise and are dropped.
    """
    coeffs = np.asarray(coeffs)
    mag = np.abs(coeffs)
    n = np.arange(mag.size)
    keep = mag > floor * mag[0]
    if keep.sum() < 2:
        raise ValueError("fewer than two coefficients above the noise floor")
    slope, _ = np.polyfit(n[keep], np.log(mag[keep]), 1)
    return float(-slope)


def parseval_gap(model: RationalPGF, cfg: IterationConfig = DEFAULT_CONFIG, n_max=40, nodes=1 << 14):
    """``|int_0^1 |K|^2 dx - sum |theta_n|^2|`` with the integral by trapezoid."""
    theta, k = plain_coefficients(model, cfg, n_max, nodes)
    lhs = float(np.mean(np.abs(k) ** 2))
    rhs = float(np.sum(np.abs(theta) ** 2))
    return abs(lhs - rhs), lhs, rhs
