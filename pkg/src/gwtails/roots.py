"""Simultaneous polynomial root finding (Aberth-Ehrlich iteration).

Coefficient arrays are in ascending power order, ``c[0] + c[1] z + ...``,
the convention used everywhere in this package.
"""

from __future__ import annotations

import numpy as np

from .errors import RootFindFailure

__all__ = ["aberth", "aberth_batch", "horner", "trim"]

_ANGLE_OFFSET = 0.4


def horner(coeffs, z):
    """Evaluate the polynomial with ascending ``coeffs`` at ``z`` (broadcasts)."""
    z = np.asarray(z)
    out = np.zeros(z.shape, dtype=np.result_type(z, np.asarray(coeffs), 1.0))
    for c in coeffs[::-1]:
        out = out * z + c
    return out


def trim(coeffs, rel_tol=1e-14):
    """Drop leading coefficients that vanish relative to the largest one.

    Returns the trimmed array and the number of dropped orders (roots that
    escaped to infinity).
    """
    c = np.asarray(coeffs, dtype=complex)
    scale = np.abs(c).max() if c.size else 0.0
    n = c.size
    while n > 1 and abs(c[n - 1]) <= rel_tol * scale:
        n -= 1
    return c[:n], c.size - n


def _initial_guess(c):
    # a rotated circle of radius max_k |c_k / c_d|^(1/(d-k)), which is within a
    # factor 2 of the largest root; starting outside keeps tiny roots from
    # dragging every guess towards 0
    deg = c.shape[-1] - 1
    a = np.abs(c[..., :-1]) / np.abs(c[..., -1:])
    with np.errstate(divide="ignore"):
        rho = np.max(a ** (1.0 / (deg - np.arange(deg))), axis=-1)
    rho = np.where(rho > 0, rho, 1.0)
    k = np.arange(deg)
    angles = 2.0 * np.pi * k / deg + _ANGLE_OFFSET
    return rho[..., None] * np.exp(1j * angles)


def aberth_batch(coeffs, tol=1e-13, max_iter=200):
    """Roots of many polynomials of equal degree at once.

    Parameters
    ----------
    coeffs : (B, d+1) complex array, ascending order, nonzero leading entries.

    Returns
    -------
    (B, d) complex array of roots, each row sorted by real then imaginary part.
    """
    c = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    deg = c.shape[1] - 1
    if deg < 1:
        return np.zeros((c.shape[0], 0), dtype=complex)
    if deg == 1:
        z = (-c[:, 0] / c[:, 1])[:, None]
        return z
    dc = c[:, 1:] * np.arange(1, deg + 1)
    z = _initial_guess(c)
    active = np.ones(c.shape[0], dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        za = z[idx]
        ca, dca = c[idx], dc[idx]
        pv = np.zeros_like(za)
        dv = np.zeros_like(za)
        for j in range(deg, -1, -1):
            pv = pv * za + ca[:, j, None]
        for j in range(deg - 1, -1, -1):
            dv = dv * za + dca[:, j, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = pv / dv
            diff = za[:, :, None] - za[:, None, :]
            np.einsum("bii->bi", diff)[...] = np.inf
            repulse = (1.0 / diff).sum(axis=2)
            step = newton / (1.0 - newton * repulse)
        step = np.where(np.isfinite(step), step, 0.0)
        za = za - step
        z[idx] = za
        conv = (np.abs(step) <= tol * np.abs(za)) | (pv == 0) | (np.abs(za) < 1e-280)
        done = np.all(conv, axis=1)
        active[idx[done]] = False
    if active.any():
        raise RootFindFailure(
            f"{int(active.sum())} polynomials did not converge in {max_iter} iterations",
            "roots", "aberth",
        )
    order = np.lexsort((z.imag, z.real), axis=1)
    return np.take_along_axis(z, order, axis=1)


def aberth(coeffs, tol=1e-13, max_iter=200):
    """All roots of one polynomial; leading zeros are trimmed first."""
    c, _ = trim(coeffs)
    if c.size < 2:
        return np.zeros(0, dtype=complex)
    return aberth_batch(c[None, :], tol=tol, max_iter=max_iter)[0]
