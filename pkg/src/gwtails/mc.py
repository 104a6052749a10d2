"""Monte Carlo oracle: simulate the branching process and histogram W.

Each path has its own counter-based random stream (splitmix64 over
``(seed, path, draw)``), so the samples do not depend on how paths are split
across workers. Paths are simulated individual by individual while the
population is small; beyond ``exact_limit`` the next generation is drawn
from the normal approximation ``X' ~ N(E X, sigma^2 X)``, which is accurate
far below histogram resolution once X is in the hundreds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .pgf import RationalPGF, offspring_taylor

__all__ = ["AliasTable", "alias_table", "SimulationConfig", "offspring_truncation", "sample_offspring",
           "SimulationResult", "simulate_w", "compare", "histogram_l1", "ks_statistic"]


@dataclass(frozen=True)
class AliasTable:
    """Vose alias table over offspring counts ``1..K``."""

    prob: np.ndarray
    alias: np.ndarray  # int64, 0-based column index

    @property
    def K(self) -> int:
        return self.prob.size


def alias_table(weights) -> AliasTable:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0 or np.any(w < 0) or not w.sum() > 0:
        raise ValueError("weights must be a nonempty nonnegative vector")
    n = w.size
    scaled = w * (n / w.sum())
    prob = np.ones(n)
    alias = np.arange(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s, l = small.pop(), large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] = (scaled[l] + scaled[s]) - 1.0
        (small if scaled[l] < 1.0 else large).append(l)
    # leftovers are 1 up to rounding
    return AliasTable(prob, alias)


def offspring_truncation(model: RationalPGF, tail=1e-12, k_max=100_000):
    """Smallest K with ``1 - sum_{k<=K} p_k < tail``, and the probabilities."""
    K = 64
    while True:
        p = offspring_taylor(model, K)
        c = np.cumsum(p)
        hit = np.flatnonzero(1.0 - c < tail)
        if hit.size:
            k = int(hit[0]) + 1
            return k, p[:k]
        if K >= k_max:
            raise ValueError(f"offspring tail mass still >= {tail} at K={K}")
        K *= 2


@dataclass(frozen=True)
class SimulationConfig:
    generations: int = 25
    paths: int = 1_000_000
    offspring_truncation: int | None = None  # K; chosen from the tail mass when None
    rng_seed: int = 0
    population_cap: float = 1e8
    exact_limit: int = 256
    tail_mass: float = 1e-12
    backend: str | None = None

    def __post_init__(self):
        if self.generations < 1 or self.paths < 1:
            raise ValueError("generations and paths must be >= 1")
        if self.exact_limit < 1 or not self.population_cap > 0:
            raise ValueError("exact_limit and population_cap must be positive")


def _table(model, cfg):
    if cfg.offspring_truncation is None:
        _, p = offspring_truncation(model, cfg.tail_mass)
    else:
        p = offspring_taylor(model, cfg.offspring_truncation)
        if 1.0 - p.sum() >= cfg.tail_mass:
            raise ValueError("offspring_truncation leaves tail mass above the limit")
    return alias_table(p)


def sample_offspring(model: RationalPGF, cfg: SimulationConfig, n: int, stream: int = 0):
    """``n`` offspring counts from the stream of path index ``stream``."""
    tab = _table(model, cfg)
    kern = kernels._pykernels
    keys = kern.path_keys(cfg.rng_seed, np.full(n, stream, dtype=np.int64))
    u = kern.uniforms(keys, np.arange(n, dtype=np.int64)) * tab.K
    k = np.minimum(u.astype(np.int64), tab.K - 1)
    k = np.where(u - k >= tab.prob[k], tab.alias[k], k)
    return k + 1


@dataclass(frozen=True)
class SimulationResult:
    samples: np.ndarray
    capped: np.ndarray  # bool per path
    K: int

    @property
    def cap_fraction(self) -> float:
        return float(self.capped.mean()) if self.capped.size else 0.0

    @property
    def cap_saturation(self) -> bool:
        """More than 0.1% of paths stopped at the population cap."""
        return self.cap_fraction > 1e-3


def simulate_w(model: RationalPGF, cfg: SimulationConfig = SimulationConfig(), chunk=1 << 15,
               workers=None) -> SimulationResult:
    """``X_T / E^T`` per path; a path frozen at the cap reports ``X_t / E^t`` then."""
    tab = _table(model, cfg)
    kern = kernels.get_backend(cfg.backend)
    sigma = math.sqrt(max(model.variance, 0.0))

    def run(lo, hi):
        return kern.gw_simulate(lo, hi - lo, cfg.rng_seed, tab.prob, tab.alias, model.E, sigma,
                                cfg.generations, cfg.exact_limit, cfg.population_cap)

    w, capped = kernels.concat(kernels.map_chunks(run, cfg.paths, chunk=chunk, workers=workers))
    return SimulationResult(w, capped.astype(bool), tab.K)


def _bin_means(x, p, edges):
    """Average of the tabulated density over each bin (trapezoid on a refined grid)."""
    out = np.empty(edges.size - 1)
    for i in range(out.size):
        a, b = edges[i], edges[i + 1]
        xs = np.linspace(a, b, 9)
        out[i] = np.trapezoid(np.interp(xs, x, p), xs) / (b - a)
    return out


def histogram_l1(samples, x, p, bins=100, lo=0.0, hi=6.0):
    """``sum |hist - mean p| * width`` over ``bins`` equal bins of ``(lo, hi)``."""
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(samples, bins=edges)
    width = edges[1] - edges[0]
    hist = counts / (len(samples) * width)
    return float(np.sum(np.abs(hist - _bin_means(np.asarray(x), np.asarray(p), edges))) * width)


def ks_statistic(samples, x, p):
    """One-sample KS distance against the CDF of the tabulated density.

    Mass below ``x[0]`` is taken as zero.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(x))])
    s = np.sort(np.asarray(samples, dtype=float))
    n = s.size
    F = np.interp(s, x, cdf, left=0.0, right=cdf[-1])
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(n) / n
    return float(max(upper.max(), lower.max()))


def compare(samples, x, columns: dict, bins=100, lo=0.0, hi=6.0):
    """L1 histogram distance to each density column and KS against ``p_integral``."""
    out = {"n_samples": int(len(samples)), "bins": bins, "range": [lo, hi], "l1": {}}
    for name, p in columns.items():
        if p is None:
            continue
        out["l1"][name] = histogram_l1(samples, x, p, bins, lo, hi)
    if columns.get("p_integral") is not None:
        out["ks"] = ks_statistic(samples, x, columns["p_integral"])
    s = np.asarray(samples)
    out["mean"] = float(s.mean())
    out["std_error_mean"] = float(s.std(ddof=1) / math.sqrt(s.size)) if s.size > 1 else float("nan")
    return out
