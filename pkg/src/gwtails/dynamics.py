"""Orbits of G: membership in the attracting basin of 0, rasters, critical angle."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .pgf import RationalPGF

__all__ = ["UNDECIDED", "CAPTURED", "ESCAPED", "RasterRequest", "julia_membership", "raster",
           "write_pgm", "AngleEstimate", "critical_angle_estimate"]

UNDECIDED, CAPTURED, ESCAPED = 0, 1, 2
_NAMES = {UNDECIDED: "undecided", CAPTURED: "captured", ESCAPED: "escaped"}
# gray levels: basin black, escaping white
_GRAY = np.array([128, 0, 255], dtype=np.uint8)


def julia_membership(model: RationalPGF, z, t_max=500, capture=1e-3, escape=1e8, backend=None):
    """Status codes (``CAPTURED``/``ESCAPED``/``UNDECIDED``) for each ``z``.

    Captured means the orbit came within ``capture`` of 0, where G contracts,
    so it converges to 0. A scalar input returns the status name.
    """
    if not 0 < capture < escape:
        raise ValueError("need 0 < capture < escape")
    arr = np.asarray(z, dtype=complex)
    flat = np.ascontiguousarray(arr.ravel())
    kern = kernels.get_backend(backend)

    def run(lo, hi):
        st, steps = kern.julia_status(flat[lo:hi], model.p_coeffs, model.q_coeffs, t_max, capture, escape)
        return st, steps

    st = kernels.concat(kernels.map_chunks(run, flat.size))[0] if flat.size else np.zeros(0, np.int8)
    if arr.ndim == 0:
        return _NAMES[int(st[0])]
    return st.reshape(arr.shape)


@dataclass(frozen=True)
class RasterRequest:
    center: complex = 0j
    width: float = 4.0
    height: float = 4.0
    nx: int = 256
    ny: int = 256
    t_max: int = 500
    capture_radius: float = 1e-3
    escape_radius: float = 1e8

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("resolution must be >= 1")
        if not 0 < self.capture_radius < self.escape_radius:
            raise ValueError("need 0 < capture_radius < escape_radius")
        if not (self.width > 0 and self.height > 0):
            raise ValueError("width and height must be positive")

    def pixel_centers(self):
        """Row 0 is the top edge (largest imaginary part)."""
        c = complex(self.center)
        xs = c.real + (np.arange(self.nx) + 0.5 - self.nx / 2) * (self.width / self.nx)
        ys = c.imag - (np.arange(self.ny) + 0.5 - self.ny / 2) * (self.height / self.ny)
        return xs[None, :] + 1j * ys[:, None]

    def to_json(self):
        d = asdict(self)
        c = complex(self.center)
        d["center"] = [c.real, c.imag]
        return d


def raster(model: RationalPGF, req: RasterRequest, backend=None):
    return julia_membership(model, req.pixel_centers(), req.t_max, req.capture_radius,
                            req.escape_radius, backend)


def write_pgm(path, grid, req: RasterRequest, extra=None):
    """Binary 8-bit graymap plus ``<path>.json`` describing the request."""
    img = _GRAY[np.asarray(grid, dtype=np.int64)]
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    side = {"request": req.to_json(), "legend": {"0": "captured", "128": "undecided", "255": "escaped"}}
    if extra:
        side.update(extra)
    with open(str(path) + ".json", "w") as fh:
        json.dump(side, fh, indent=2, sort_keys=True)


@dataclass(frozen=True)
class AngleEstimate:
    theta: float  # full opening angle of the captured sector at 1
    half_angle: float
    resolution: float  # uncertainty of theta (two angle steps)
    probe_radii: tuple

    def to_json(self):
        return {"theta": self.theta, "theta_deg": math.degrees(self.theta),
                "half_angle": self.half_angle, "resolution": self.resolution,
                "probe_radii": list(self.probe_radii)}


def critical_angle_estimate(model: RationalPGF, probe_radii=(1e-2, 1e-3, 1e-4), angle_steps=360,
                            t_max=500, backend=None) -> AngleEstimate:
    """Opening angle at 1 of the sector that lies in the basin of 0.

    Points ``1 - rho e^(i k)`` are probed on a uniform grid of ``k``; the
    half angle is the largest ``phi`` with every ``|k| <= phi`` captured at
    every radius, and the estimate is twice that.
    """
    if angle_steps < 180:
        raise ValueError("angle_steps must be >= 180")
    radii = tuple(float(r) for r in probe_radii)
    if any(r <= 0 for r in radii) or list(radii) != sorted(radii, reverse=True):
        raise ValueError("probe radii must be positive and decreasing")
    step = 2 * math.pi / angle_steps
    k = np.arange(angle_steps // 2 + 1) * step
    kk = np.concatenate([k, -k[1:]])
    pts = 1.0 - np.array(radii)[:, None] * np.exp(1j * kk)[None, :]
    st = julia_membership(model, pts, t_max, backend=backend)
    ok = np.all(st == CAPTURED, axis=0)
    pos, neg = ok[: k.size], np.concatenate([[ok[0]], ok[k.size:]])
    both = pos & neg
    bad = np.flatnonzero(~both)
    last = (bad[0] - 1) if bad.size else k.size - 1
    half = float(k[last]) if last >= 0 else 0.0
    return AngleEstimate(2 * half, half, 2 * step, radii)
