"""Poles of Pi and the right-tail residue series.

Every pole of ``Pi`` has the form

    omega = E^(m+1) Pi^-1(G^-1_{i_1} o ... o G^-1_{i_m}(z_j))

for a zero ``z_j`` of Q and a chain of inverse branches. A chain whose last
step is the principal branch gives the same pole as the chain without that
step. When ``deg P = deg Q + 1`` every pole also propagates to ``E^k omega``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .conjugacy import DEFAULT_CONFIG, IterationConfig, pi_eval_with_derivative, pi_inverse
from .errors import DegenerateDerivative, HypothesisViolation, NotApplicable
from .pgf import RationalPGF, _polyder, preimages_batch, q_zeros
from .roots import horner

__all__ = ["PoleRecord", "PoleSet", "enumerate_poles", "entry_bound", "residue_at", "density_right",
           "RightTailResult", "dedupe"]


@dataclass(frozen=True)
class PoleRecord:
    omega: complex
    residue: complex
    depth: int  # chain length m
    power: int  # n in omega = E^n Pi^-1(chain)
    source_zero: int
    branch_word: tuple  # root index at each step; roots sorted by (real, imag)
    propagation_k: int = 0
    cert_error: float = 0.0  # |Pi(omega/E) - z_j| / |z_j| for the primary pole
    degenerate: bool = False


@dataclass(frozen=True)
class PoleSet:
    records: list
    r_max: float
    depth_reached: int
    depth_capped: bool  # True when the depth cap stopped a live branch
    frontier: list = field(default_factory=list)  # first omitted poles beyond r_max
    asymptotic_only: bool = False

    @property
    def omega(self):
        return np.array([r.omega for r in self.records], dtype=complex)

    @property
    def residue(self):
        return np.array([r.residue for r in self.records], dtype=complex)

    @property
    def frontier_margin(self) -> float:
        """Smallest omitted ``|omega|`` over ``r_max``; inf if nothing was cut."""
        if not self.frontier:
            return math.inf
        return min(abs(r.omega) for r in self.frontier) / self.r_max

    def primary(self):
        return [r for r in self.records if r.propagation_k == 0]

    def to_csv(self, path, header=None):
        with open(path, "w", newline="") as fh:
            if header:
                for line in header:
                    fh.write(f"# {line}\n")
            w = csv.writer(fh)
            w.writerow(["re_omega", "im_omega", "re_res", "im_res", "depth", "power",
                        "source_zero", "propagation_k"])
            for r in self.records:
                w.writerow([repr(r.omega.real), repr(r.omega.imag), repr(r.residue.real),
                            repr(r.residue.imag), r.depth, r.power, r.source_zero, r.propagation_k])


def _residue_factor(model, zeros):
    """``E P(z_j) / Q'(z_j)``: the residue is this over ``Pi'(omega/E)``."""
    dq = _polyder(model.q_coeffs)
    return model.E * horner(model.p_coeffs, zeros) / horner(dq, zeros)


def residue_at(model: RationalPGF, cfg: IterationConfig, record: PoleRecord, tol=1e-14) -> complex:
    """Residue of Pi at ``record.omega`` from ``Pi(E z) = G(Pi(z))``."""
    zeros = q_zeros(model)
    base = record.omega / model.E ** record.propagation_k
    _, d = pi_eval_with_derivative(model, cfg, base / model.E)
    if abs(d) <= tol:
        raise DegenerateDerivative(f"Pi' vanishes at omega/E = {base / model.E!r}",
                                   "right_tail", "residue_at")
    res = _residue_factor(model, zeros[record.source_zero]) / d
    return complex(res * (model.lead_ratio * model.E) ** record.propagation_k)


def dedupe(omega, rel_tol=1e-8):
    """Indices of the first occurrence of each pole up to relative distance ``rel_tol``."""
    omega = np.asarray(omega, dtype=complex)
    order = np.lexsort((omega.imag, omega.real))
    keep = []
    kept_vals = []
    for i in order:
        w = omega[i]
        dup = False
        for v in reversed(kept_vals):
            if w.real - v.real > rel_tol * max(abs(w), 1.0):
                break
            if abs(w - v) <= rel_tol * max(abs(w), 1.0):
                dup = True
                break
        if not dup:
            keep.append(i)
            kept_vals.append(w)
    return np.array(keep, dtype=int)


def _check(model, asymptotic_only):
    if not model.log_E_r < -1:
        raise HypothesisViolation(f"log_E r = {model.log_E_r:.6g} is not < -1", "right_tail",
                                  "enumerate_poles")
    if model.deg_gap > 1 and not asymptotic_only:
        raise NotApplicable("deg P > deg Q + 1: the residue series is only asymptotic; "
                            "pass asymptotic_only to enumerate anyway", "right_tail", "enumerate_poles")


def entry_bound(model: RationalPGF, cfg: IterationConfig = DEFAULT_CONFIG, rho=0.25, samples=256):
    """``min |Pi^-1(v)| / E`` over the circle ``|v - 1| = rho``.

    A point of the ball ``|w - 1| <= rho`` whose image under G leaves the
    ball has ``|Pi^-1(w)|`` at least this large.
    """
    v = 1.0 + rho * np.exp(2j * np.pi * np.arange(samples) / samples)
    return float(np.min(np.abs(pi_inverse(model, cfg, v))) / model.E)


def _word(parents, cols, level, i):
    out = []
    for m in range(level, 0, -1):
        out.append(int(cols[m][i]))
        i = parents[m][i]
    return tuple(reversed(out))


def enumerate_poles(model: RationalPGF, cfg: IterationConfig = DEFAULT_CONFIG, r_max=500.0,
                    depth_max=40, asymptotic_only=False, rho=0.25, deriv_tol=1e-14) -> PoleSet:
    """Breadth-first walk of the preimage trees rooted at the zeros of Q.

    Each pole belongs to exactly one backward orbit of a zero that converges
    to 1. Such an orbit eventually enters the ball ``|w - 1| <= rho`` for good
    and then follows the principal branch, so the pole is emitted, as
    ``E^(m+1) Pi^-1(node)``, at every node of the ball except those reached by
    a principal step from inside the ball, which only repeat a pole. A node at depth m can only lead to poles with
    ``|omega| >= E^(m+2) * entry_bound``, which fixes the depth needed.
    """
    _check(model, asymptotic_only)
    zeros = q_zeros(model)
    E = model.E
    factors = _residue_factor(model, zeros)
    kmin = 0.9 * entry_bound(model, cfg, rho)
    # deepest level that can still emit a pole inside r_max
    need = max(0, int(math.ceil(math.log(r_max / kmin) / math.log(E))) - 1)
    depth = min(need, depth_max)
    w = zeros.astype(complex)
    src = np.arange(w.size)
    principal_step = np.zeros(w.size, dtype=bool)
    parents, cols = [None], [None]
    out_w, out_src, out_words, out_depth = [], [], [], []
    front_w, front_src, front_words, front_depth = [], [], [], []
    for m in range(depth + 1):
        inside = np.abs(w - 1.0) <= rho
        em = np.flatnonzero(inside & ~principal_step)
        if em.size:
            om = E ** (m + 1) * pi_inverse(model, cfg, w[em])
            for i, o in zip(em, om):
                word = _word(parents, cols, m, i)
                if abs(o) <= r_max:
                    out_w.append(o); out_src.append(src[i]); out_words.append(word); out_depth.append(m)
                else:
                    front_w.append(o); front_src.append(src[i]); front_words.append(word)
                    front_depth.append(m)
        if m == depth:
            break
        roots = preimages_batch(model, w)
        # the principal branch is only trusted, and only needed, inside the ball
        pred = 1.0 + (w - 1.0) / E
        dist = np.where(np.isnan(roots), np.inf, np.abs(roots - pred[:, None]))
        pidx = np.argmin(dist, axis=1)
        rows, cc = np.nonzero(~np.isnan(roots))
        w = roots[rows, cc]
        src = src[rows]
        principal_step = inside[rows] & (cc == pidx[rows])
        parents.append(rows)
        cols.append(cc)

    def build(ws, srcs, wds, deps):
        if not ws:
            return []
        ws = np.array(ws, dtype=complex)
        pv, dv = pi_eval_with_derivative(model, cfg, ws / E)
        zj = zeros[np.array(srcs)]
        cert = np.abs(pv - zj) / np.abs(zj)
        recs = []
        for k in range(ws.size):
            degen = bool(abs(dv[k]) <= deriv_tol)
            res = complex(factors[srcs[k]] / dv[k]) if not degen else complex("nan")
            recs.append(PoleRecord(complex(ws[k]), res, deps[k], deps[k] + 1, int(srcs[k]), wds[k],
                                   0, float(cert[k]), degen))
        return recs

    primary = build(out_w, out_src, out_words, out_depth)
    frontier = build(front_w, front_src, front_words, front_depth)
    records = list(primary)
    if model.deg_gap == 1:
        ce = model.lead_ratio * E
        for rec in primary:
            k = 1
            while abs(rec.omega) * E ** k <= r_max:
                records.append(PoleRecord(rec.omega * E ** k, rec.residue * ce ** k, rec.depth,
                                          rec.power + k, rec.source_zero, rec.branch_word, k,
                                          rec.cert_error, rec.degenerate))
                k += 1
    keep = dedupe([r.omega for r in records])
    records = [records[i] for i in keep]  # dedupe returns them sorted by real part
    return PoleSet(records, float(r_max), depth, need > depth_max, frontier, bool(model.deg_gap > 1))


@dataclass(frozen=True)
class RightTailResult:
    x: np.ndarray
    density: np.ndarray
    imag_residual: np.ndarray  # imaginary part left after conjugate pairing
    truncation: np.ndarray  # largest |Res| e^(-Re(omega) x) over the frontier
    asymptotic_only: bool


def density_right(model: RationalPGF, poles: PoleSet, x_grid) -> RightTailResult:
    """``-sum Res(Pi, omega) e^(-omega x)`` over the enumerated poles."""
    x = np.atleast_1d(np.asarray(x_grid, dtype=float))
    recs = [r for r in poles.records if not r.degenerate]
    om = np.array([r.omega for r in recs], dtype=complex)
    res = np.array([r.residue for r in recs], dtype=complex)
    total = np.zeros(x.size, dtype=complex)
    for lo in range(0, x.size, 64):
        xs = x[lo:lo + 64]
        total[lo:lo + 64] = -(res[None, :] * np.exp(-om[None, :] * xs[:, None])).sum(axis=1)
    fr = [r for r in poles.frontier if not r.degenerate and np.isfinite(r.residue)]
    if fr:
        fo = np.array([r.omega for r in fr])
        fres = np.array([r.residue for r in fr])
        trunc = np.max(np.abs(fres)[None, :] * np.exp(-fo.real[None, :] * x[:, None]), axis=1)
    else:
        trunc = np.zeros(x.size)
    return RightTailResult(x, total.real, total.imag, trunc, poles.asymptotic_only)
