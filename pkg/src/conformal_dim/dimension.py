"""Box-counting, Bowen-pressure, and two-scale Assouad estimators.

The Assouad estimator is a heuristic: for window sizes R on a decade
grid it counts rho-boxes inside the worst R-window over attractor
centers, regresses log max-count against log(R/rho), and takes the
steepest window scale.  The regression residual is reported so callers
can see convergence quality; the estimator has no claim to certified
bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import maps as mp
from .budget import resolve_budget
from .errors import InsufficientScales, NoRootInBracket
from .separation import (
    WSP_CONSISTENT,
    WSP_FAILING,
    SeparationReport,
    separation_verdict,
)
from .system import attractor_sample_arrays

BOX = "BOX"
BOWEN = "BOWEN"
ASSOUAD = "ASSOUAD"

AGREE = "AGREE"
FULL_ASSOUAD = "FULL_ASSOUAD"
INCONSISTENT = "INCONSISTENT"

TAU_AGREE = 0.07
TAU_FULL = 0.07
_COUNT_SLACK = 1e-9


@dataclass(frozen=True)
class DimensionEstimate:
    value: float
    method: str
    fit_points: tuple
    residual: float
    scales_used: str


@dataclass(frozen=True)
class DichotomyReport:
    hausdorff: DimensionEstimate
    assouad: DimensionEstimate
    separation: SeparationReport
    branch: str
    bowen: DimensionEstimate
    box: DimensionEstimate
    full_hausdorff_caveat: bool


def _as_arrays(intervals):
    if isinstance(intervals, tuple) and len(intervals) == 2 \
            and isinstance(intervals[0], np.ndarray):
        return intervals
    if isinstance(intervals, np.ndarray) and intervals.ndim == 1:
        pts = np.asarray(intervals, dtype=float)   # bare point set
        return pts, pts
    los = np.array([iv.lo for iv in intervals])
    his = np.array([iv.hi for iv in intervals])
    return los, his


def cover_count(intervals, center, R, rho):
    """Greedy left-to-right count of length-rho boxes covering
    (intervals intersect ball(center, R)); optimal in one dimension."""
    if not 0.0 < rho < R:
        raise ValueError("need 0 < rho < R")
    los, his = _as_arrays(intervals)
    if los.size == 0:
        return 0
    w_lo, w_hi = center - R, center + R
    i0 = int(np.searchsorted(his, w_lo, side="left"))
    i1 = int(np.searchsorted(los, w_hi, side="right"))
    count = 0
    covered = -math.inf
    for t in range(i0, i1):
        lo = max(float(los[t]), w_lo)
        hi = min(float(his[t]), w_hi)
        if lo > covered:
            boxes = max(1, math.ceil((hi - lo) / rho - _COUNT_SLACK))
            covered = lo + boxes * rho
            count += boxes
        elif hi > covered + _COUNT_SLACK * rho:
            boxes = math.ceil((hi - covered) / rho - _COUNT_SLACK)
            covered += boxes * rho
            count += boxes
    return count


def _fit_line(xs, ys):
    slope, intercept = np.polyfit(xs, ys, 1)
    residual = float(np.max(np.abs(np.asarray(ys) - (slope * np.asarray(xs) + intercept))))
    return float(slope), residual


def _clamp(value, notes):
    if value < 0.0:
        notes.append(f"clamped from {value:.6g}")
        return 0.0
    if value > 1.0:
        notes.append(f"clamped from {value:.6g}")
        return 1.0
    return value


def box_dimension(system, resolutions=None, budget=None):
    from .cylinders import scale_grid

    if resolutions is None:
        resolutions = scale_grid(system, 8)[1:]
    resolutions = [float(r) for r in resolutions]
    if len(resolutions) < 4:
        raise InsufficientScales("box fit needs at least 4 resolutions")
    if any(nxt >= cur for cur, nxt in zip(resolutions, resolutions[1:])):
        raise ValueError("resolutions must be strictly descending")
    bdg = resolve_budget(budget)
    xs, ys = [], []
    for rho in resolutions:
        los, his = attractor_sample_arrays(system, rho, bdg)
        n = cover_count((los, his), 0.5, 0.6, rho)
        xs.append(math.log(1.0 / rho))
        ys.append(math.log(n))
    slope, residual = _fit_line(xs, ys)
    notes = [f"rho from {resolutions[0]:.3g} down to {resolutions[-1]:.3g}"]
    value = _clamp(slope, notes)
    return DimensionEstimate(value, BOX, tuple(zip(xs, ys)), residual,
                             "; ".join(notes))


def _level_diams(system, depth, bdg):
    """diam f_w(Delta) for all words of each length 1..depth."""
    n = system.alphabet_size
    if all(m.kind == "affine" for m in system.maps):
        slopes = np.array([abs(m.params[0]) for m in system.maps])
        level = np.array([1.0])
        out = []
        for _ in range(depth):
            bdg.consume(level.size * n)
            level = (level[None, :] * slopes[:, None]).ravel()
            out.append(level)
        return out
    mats = [mp.to_matrix(m) for m in system.maps]
    level = [mp._canonical(1.0, 0.0, 0.0, 1.0)]
    out = []
    j = system.j
    for _ in range(depth):
        bdg.consume(len(level) * n)
        level = [mp.matrix_product(parent, child)
                 for parent in level for child in mats]
        diams = np.array([abs(_mat_eval(m, 1.0) - _mat_eval(m, 0.0))
                          for m in level])
        out.append(diams)
    return out


def _mat_eval(mat, x):
    p, q, r, s = mat
    return (p * x + q) / (r * x + s)


def bowen_dimension(system, depth, tol=1e-10, budget=None):
    """Root of the depth-k pressure, k = 2, 4, ..., depth.

    An upper-bound Hausdorff estimate: exact in the separated regime,
    an overestimate when cylinders overlap.
    """
    if depth < 2:
        raise ValueError("depth must be >= 2")
    bdg = resolve_budget(budget)
    diams_per_level = _level_diams(system, depth, bdg)
    roots = []
    for k in range(2, depth + 1, 2):
        logs = np.log(diams_per_level[k - 1])

        def pressure(s):
            m = logs.max() * s
            return (m + math.log(np.exp(s * logs - m).sum())) / k

        lo_s, hi_s = 0.0, 1.5
        if pressure(lo_s) <= 0.0 or pressure(hi_s) >= 0.0:
            raise NoRootInBracket(f"pressure has no sign change on [0, 1.5] at k={k}")
        while hi_s - lo_s > tol:
            mid = 0.5 * (lo_s + hi_s)
            if pressure(mid) > 0.0:
                lo_s = mid
            else:
                hi_s = mid
        roots.append((k, 0.5 * (lo_s + hi_s)))
    value = roots[-1][1]
    residual = abs(roots[-1][1] - roots[-2][1]) if len(roots) > 1 else 0.0
    return DimensionEstimate(value, BOWEN, tuple(roots), residual,
                             f"pressure roots at k={[k for k, _ in roots]}")


def assouad_estimate(system, window_decades=2, ratio_decades=3, budget=None):
    if window_decades < 2 or ratio_decades < 2:
        raise ValueError("decade counts must be >= 2")
    bdg = resolve_budget(budget)
    sample_cache = {}

    def sample(power):
        if power not in sample_cache:
            sample_cache[power] = attractor_sample_arrays(
                system, 10.0 ** power, bdg)
        return sample_cache[power]

    best_slope = -math.inf
    best_points = ()
    best_desc = ""
    worst_residual = 0.0
    for i in range(1, window_decades + 1):
        R = 10.0 ** (-i)
        c_los, c_his = sample(-i)
        centers = 0.5 * (c_los + c_his)
        xs, ys = [], []
        deep_witness = None
        for jj in range(1, ratio_decades + 1):
            rho = 10.0 ** (-(i + jj))
            # counting sample at quarter scale so discretization cannot
            # inflate the box count
            s_los, s_his = sample(round(math.log10(rho / 4.0), 12))
            counts = [cover_count((s_los, s_his), float(c), R, rho)
                      for c in centers]
            top = int(np.argmax(counts))
            xs.append(math.log(R / rho))
            ys.append(math.log(max(counts[top], 1)))
            deep_witness = float(centers[top])
        slope, residual = _fit_line(xs, ys)
        worst_residual = max(worst_residual, residual)
        if slope > best_slope:
            best_slope = slope
            best_points = tuple(zip(xs, ys))
            best_desc = (f"window R={R:.3g} (worst center {deep_witness:.6g}), "
                         f"rho down to {10.0 ** (-(i + ratio_decades)):.3g}")
    notes = [best_desc]
    value = _clamp(best_slope, notes)
    return DimensionEstimate(value, ASSOUAD, best_points, worst_residual,
                             "; ".join(notes))


def _default_bowen_depth(system, limit):
    n = system.alphabet_size
    depth = 2
    while depth + 2 <= 12 and n ** (depth + 2) * 2 <= limit:
        depth += 2
    return depth


def dichotomy_report(system, budget=None, bowen_depth=None,
                     separation_depth=None, tau_agree=TAU_AGREE,
                     tau_full=TAU_FULL):
    """End-to-end report: dimensions, separation verdict, branch.

    Branches: AGREE when the Assouad estimate matches Hausdorff within
    tau_agree under a consistent separation verdict; FULL_ASSOUAD when
    separation fails and the Assouad estimate is within tau_full of 1.
    Anything else is INCONSISTENT, which flags estimator failure rather
    than new geometry.
    """
    limit = resolve_budget(budget).limit
    if bowen_depth is None:
        bowen_depth = _default_bowen_depth(system, limit)
    bowen = bowen_dimension(system, bowen_depth, budget=limit)
    box = box_dimension(system, budget=limit)
    assouad = assouad_estimate(system, budget=limit)
    separation = separation_verdict(system, depth=separation_depth, budget=limit)

    if bowen.value <= box.value:
        h_val, h_src = bowen.value, "bowen"
    else:
        h_val, h_src = box.value, "box"
    hausdorff = DimensionEstimate(
        value=h_val,
        method=BOWEN if h_src == "bowen" else BOX,
        fit_points=(),
        residual=max(bowen.residual, box.residual),
        scales_used=f"min of bowen={bowen.value:.6g} and box={box.value:.6g}",
    )

    caveat = hausdorff.value >= 1.0 - tau_full
    if separation.verdict == WSP_CONSISTENT \
            and abs(assouad.value - hausdorff.value) <= tau_agree:
        branch = AGREE
    elif separation.verdict == WSP_FAILING \
            and assouad.value >= 1.0 - tau_full:
        branch = FULL_ASSOUAD
    else:
        branch = INCONSISTENT
    return DichotomyReport(hausdorff, assouad, separation, branch,
                           bowen, box, caveat)
