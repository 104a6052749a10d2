"""Density of W by Fourier inversion of ``E exp(-zW) = Pi(-z)``.

    p(x) = (1/pi) int_0^ymax Re[Pi(iy) e^(-iyx)] dy,

using ``Pi(-iy) = conj(Pi(iy))``; the integral is the trapezoid rule on a
uniform grid whose samples are computed once and reused for every ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .conjugacy import DEFAULT_CONFIG, IterationConfig, pi_eval
from .errors import Divergence
from .pgf import RationalPGF

__all__ = ["QuadratureConfig", "FourierSamples", "fourier_samples", "density_integral",
           "moments"]


@dataclass(frozen=True)
class QuadratureConfig:
    """Trapezoid on ``[-y_max, y_max]`` with ``n_nodes`` intervals.

    Only the ``n_nodes/2 + 1`` samples on ``[0, y_max]`` are evaluated.
    """

    y_max: float = 2e4
    n_nodes: int = 2_000_000

    def __post_init__(self):
        if not self.y_max > 0:
            raise ValueError("y_max must be positive")
        if self.n_nodes < 1000 or self.n_nodes % 2:
            raise ValueError("n_nodes must be even and >= 1000")

    @classmethod
    def paper_scale(cls):
        return cls(2e5, 20_000_000)

    @property
    def step(self) -> float:
        return 2.0 * self.y_max / self.n_nodes


@dataclass(frozen=True)
class FourierSamples:
    step: float
    values: np.ndarray  # Pi(i k step), k = 0..n_nodes/2

    def density(self, x, backend=None):
        x = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=float)))
        kern = kernels.get_backend(backend)

        def run(lo, hi):
            return (kern.fourier_sum(self.values, self.step, x[lo:hi]),)

        (s,) = kernels.concat(kernels.map_chunks(run, x.size, chunk=8)) if x.size else (np.zeros(0),)
        return s * self.step / math.pi


def fourier_samples(model: RationalPGF, cfg: IterationConfig = DEFAULT_CONFIG,
                    qcfg: QuadratureConfig = QuadratureConfig()) -> FourierSamples:
    if model.E ** cfg.t_max < 100 * qcfg.y_max:
        raise Divergence(f"E^t_max = {model.E ** cfg.t_max:.3g} < 100*y_max; raise t_max",
                         "direct_density", "density_integral")
    y = np.arange(qcfg.n_nodes // 2 + 1) * qcfg.step
    return FourierSamples(qcfg.step, pi_eval(model, cfg, 1j * y))


def density_integral(model: RationalPGF, cfg: IterationConfig = DEFAULT_CONFIG,
                     qcfg: QuadratureConfig = QuadratureConfig(), x_grid=(1.0,), samples=None):
    samples = samples or fourier_samples(model, cfg, qcfg)
    return samples.density(x_grid, backend=cfg.backend)


def moments(samples: FourierSamples, x_max=20.0, n=2001, backend=None):
    """``(int p, int x p)`` over ``[0, x_max]``.

    The grid is quadratic in the index so it clusters near 0, where ``p`` has
    an algebraic singularity in its derivatives.
    """
    s = np.linspace(0.0, 1.0, n)
    x = x_max * s * s
    p = samples.density(x, backend=backend)
    return float(np.trapezoid(p, x)), float(np.trapezoid(x * p, x))
