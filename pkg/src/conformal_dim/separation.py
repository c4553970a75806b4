"""Weak-separation diagnostics.

Three ingredients feed one verdict: per-scale overlap multiplicities of
the distinct stopping-set maps over the open unit interval, the decay
profile of the nearest distance from composites f_v^{-1} o f_w to the
identity, and exact-overlap bookkeeping.  Failing separation shows up
as multiplicities that keep growing while the identity distance decays
toward zero; bounded multiplicity with a stable distance floor is the
consistent regime.  Finite search cannot decide either way, so the
verdict is deliberately tri-state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import maps as mp
from .budget import resolve_budget
from .cylinders import decode_word, scale_grid, stopping_records
from .errors import EmptySet

WSP_CONSISTENT = "WSP_CONSISTENT"
WSP_FAILING = "WSP_FAILING"
INCONCLUSIVE = "INCONCLUSIVE"

THETA_FAIL = 1e-4
THETA_HOLD = 1e-2
EXACT_OVERLAP_TOL = 1e-13
DEDUP_CANONICAL_TOL = 1e-12
TARGET_FINEST_SCALE = 1e-6
SENTINEL_MAX = 2 ** 63 - 1
_TREND_WINDOW = 3
_MAX_EXACT_SAMPLES = 8


@dataclass(frozen=True)
class NearIdentityPair:
    v: tuple
    w: tuple
    distance: float       # sup norm of f_v^{-1} o f_w - Id over the neighbourhood
    gap_at_x1: float      # signed displacement of the composite at x1
    orientation: int


@dataclass(frozen=True)
class ScaleScan:
    b: float
    multiplicity: int
    witness_x: float
    pairs: tuple          # NearIdentityPair, ascending distance
    exact_overlaps: tuple # (word, word) samples


@dataclass(frozen=True)
class SeparationReport:
    b_grid: tuple
    multiplicities: tuple  # (count, witness_x) per scale
    ilc_decay: tuple       # running minimum pair distance per scale
    exact_overlaps: tuple
    verdict: str
    gamma_observed: int
    scans: tuple           # full per-scale detail, for the CLI dump


def _stab_sweep(los, his):
    """Max stabbing number of open intervals and an attaining point."""
    if los.size == 0:
        raise EmptySet("no intervals to sweep")
    xs = np.concatenate([los, his])
    tags = np.concatenate([np.ones(los.size, dtype=np.int64),
                           -np.ones(his.size, dtype=np.int64)])
    order = np.lexsort((tags, xs))   # closes before opens at equal x
    xs = xs[order]
    run = np.cumsum(tags[order])
    seg = run[:-1].copy()
    seg[xs[1:] <= xs[:-1]] = -1      # zero-length segments hold no points
    t = int(np.argmax(seg))
    return int(seg[t]), float(0.5 * (xs[t] + xs[t + 1]))


def _sup_distance_both_orders(mat_v, mat_w, j):
    """Min over the two composite orders of sup |h - Id| on J.

    Returns (distance, gap_at_x1_fn, swapped).  A composite whose pole
    enters J is nowhere near the identity; that order is discarded.
    """
    results = []
    for swapped, (m1, m2) in enumerate(((mat_v, mat_w), (mat_w, mat_v))):
        h_mat = mp.matrix_product(mp.matrix_inverse(m1), m2)
        try:
            h = mp.from_matrix(h_mat, j)
        except ValueError:
            continue
        d = mp.sup_distance_to_identity(h, j)
        results.append((d.value, bool(swapped), h))
    if not results:
        return None
    results.sort(key=lambda t: (t[0], t[1]))
    return results[0]


def _scan_uniform(system, depth, bdg, per_scale):
    """Flat scan for equal-slope affine systems.

    Level-k composites are x -> a^k x + off, so the distance of
    f_v^{-1} o f_w to the identity is exactly |off_w - off_v| / a^k and
    the minimum over pairs is a minimum over adjacent sorted offsets.
    """
    a = system.uniform_affine_slope()
    n = system.alphabet_size
    shifts = np.array([m.params[1] for m in system.maps])
    offs = np.array([0.0])
    d = 1.0
    scans = []
    for k in range(1, depth + 1):
        bdg.consume(offs.size * n)
        offs = (a * offs[None, :] + shifts[:, None]).ravel()
        d *= a
        order = np.argsort(offs, kind="stable")
        so = offs[order]
        diffs = np.diff(so)
        dup_tol = DEDUP_CANONICAL_TOL * math.sqrt(d)
        dup = diffs <= dup_tol
        rep_pos = np.concatenate(([0], np.flatnonzero(~dup) + 1))
        reps = so[rep_pos]
        mult, witness = _stab_sweep(reps, reps + d)
        exact = []
        for t in np.flatnonzero(dup)[:_MAX_EXACT_SAMPLES].tolist():
            exact.append((decode_word(int(order[t]), k, n),
                          decode_word(int(order[t + 1]), k, n)))
        rep_diffs = np.diff(reps)
        pairs = []
        if rep_diffs.size:
            take = np.argsort(rep_diffs, kind="stable")[:per_scale]
            for t in take.tolist():
                delta = float(rep_diffs[t] / d)
                v = decode_word(int(order[rep_pos[t]]), k, n)
                w = decode_word(int(order[rep_pos[t + 1]]), k, n)
                pairs.append(NearIdentityPair(v, w, delta, delta, 1))
            pairs.sort(key=lambda p: p.distance)
        scans.append(ScaleScan(d, mult, witness, tuple(pairs), tuple(exact)))
    return scans


def _group_records(records, tol=DEDUP_CANONICAL_TOL):
    """Group indices by canonical-map equality; first index represents."""
    mats = np.array([mp.to_matrix(r.map) for r in records])
    order = np.lexsort((mats[:, 3], mats[:, 2], mats[:, 1], mats[:, 0]))
    sorted_mats = mats[order]
    gaps = np.abs(np.diff(sorted_mats, axis=0)).max(axis=1)
    group_of = np.empty(len(records), dtype=np.int64)
    group_of[order] = np.concatenate(([0], np.cumsum(gaps > tol)))
    groups = {}
    for idx, g in enumerate(group_of.tolist()):
        groups.setdefault(g, []).append(idx)
    return list(groups.values()), mats


def _scan_general(system, depth, bdg, per_scale, distortion_k=None):
    from .distortion import estimate_distortion_constant

    if distortion_k is None:
        distortion_k = estimate_distortion_constant(system, depth=4, budget=bdg).K
    j = system.j
    x1 = system.x1
    scans = []
    for b in scale_grid(system, depth):
        records = stopping_records(system, b, bdg)
        groups, mats = _group_records(records)
        reps = [min(g) for g in groups]
        exact = tuple((records[g[0]].word, records[i].word)
                      for g in groups for i in g[1:])[:_MAX_EXACT_SAMPLES]
        rep_records = [records[i] for i in reps]
        los = np.array([r.image.lo for r in rep_records])
        his = np.array([r.image.hi for r in rep_records])
        mult, witness = _stab_sweep(los, his)

        best = []  # (distance, v_word, w_word, gap, orientation)
        for sign in (1, -1):
            idxs = [i for i in reps if records[i].map.orientation() == sign]
            if len(idxs) < 2:
                continue
            idxs.sort(key=lambda i: (records[i].image.lo, records[i].word))
            for ai in range(len(idxs)):
                ra = records[idxs[ai]]
                for bi in range(ai + 1, len(idxs)):
                    rb = records[idxs[bi]]
                    cutoff = best[-1][0] if len(best) >= per_scale else math.inf
                    lo_gap = rb.image.lo - ra.image.lo
                    if lo_gap / (distortion_k * b) > cutoff:
                        break
                    endpoint_gap = max(abs(lo_gap), abs(rb.image.hi - ra.image.hi))
                    if endpoint_gap / (distortion_k * b) > cutoff:
                        continue
                    got = _sup_distance_both_orders(
                        mats[idxs[ai]], mats[idxs[bi]], j)
                    if got is None:
                        continue
                    dist, swapped, h = got
                    if dist < EXACT_OVERLAP_TOL:
                        continue  # near-exact duplicates are overlap business
                    v_rec, w_rec = (rb, ra) if swapped else (ra, rb)
                    gap = mp._eval_raw(h, x1) - x1
                    best.append((dist, v_rec.word, w_rec.word, gap, sign))
                    best.sort(key=lambda t: (t[0], t[1], t[2]))
                    del best[per_scale:]
        pairs = tuple(NearIdentityPair(v, w, dist, gap, sign)
                      for dist, v, w, gap, sign in best)
        scans.append(ScaleScan(b, mult, witness, pairs, exact))
    return scans


def scan_scales(system, depth, budget=None, per_scale=1):
    if depth < 1:
        raise ValueError("depth must be >= 1")
    bdg = resolve_budget(budget)
    if system.uniform_affine_slope() is not None:
        return _scan_uniform(system, depth, bdg, per_scale)
    return _scan_general(system, depth, bdg, per_scale)


def overlap_multiplicity(system, b, budget=None):
    """Exact max stabbing count over the distinct stopping maps at b."""
    if not 0.0 < b <= 1.0:
        raise ValueError("scale must be in (0, 1]")
    bdg = resolve_budget(budget)
    a = system.uniform_affine_slope()
    if a is not None:
        n = system.alphabet_size
        shifts = np.array([m.params[1] for m in system.maps])
        offs = np.array([0.0])
        d = 1.0
        while True:
            bdg.consume(offs.size * n)
            offs = (a * offs[None, :] + shifts[:, None]).ravel()
            d *= a
            if d <= b:
                break
        so = np.sort(offs, kind="stable")
        keep = np.concatenate(([True], np.diff(so) > DEDUP_CANONICAL_TOL * math.sqrt(d)))
        reps = so[keep]
        return _stab_sweep(reps, reps + d)
    records = stopping_records(system, b, bdg)
    groups, _ = _group_records(records)
    rep_records = [records[min(g)] for g in groups]
    los = np.array([r.image.lo for r in rep_records])
    his = np.array([r.image.hi for r in rep_records])
    return _stab_sweep(los, his)


def nearest_identity_distance(system, depth, budget=None, per_scale=1):
    """Best near-identity pair per scale of the geometric grid."""
    scans = scan_scales(system, depth, budget, per_scale)
    return [scan.pairs[0] for scan in scans if scan.pairs]


def epsilon_separation_bound(epsilon, K, diamJ, a_cap=512):
    """Combinatorial path bound for the separation count at scale epsilon."""
    if epsilon <= 0.0 or K < 1.0:
        raise ValueError("need epsilon > 0 and K >= 1")
    k_prime = max(2.0, K)
    r_eps = epsilon / (k_prime - 1.0 / k_prime)
    a_eps = math.ceil(diamJ / r_eps)
    if a_eps > a_cap:
        return SENTINEL_MAX
    return math.comb(2 * a_eps, a_eps)


def default_depth(system, budget_limit, target=TARGET_FINEST_SCALE):
    """Deep enough to reach the target scale, shallow enough to afford."""
    ratio = system.diam_ratio
    n = system.alphabet_size
    want = max(_TREND_WINDOW, math.ceil(math.log(target) / math.log(ratio)))
    depth, nodes, level = 0, 0, 1
    while depth < want:
        level *= n
        if nodes + level > 0.9 * budget_limit:
            break
        nodes += level
        depth += 1
    return max(depth, 1)


def separation_verdict(system, depth=None, theta_fail=THETA_FAIL,
                       theta_hold=THETA_HOLD, budget=None, per_scale=1):
    bdg = resolve_budget(budget)
    if depth is None:
        depth = default_depth(system, bdg.remaining())
    scans = scan_scales(system, depth, bdg, per_scale)

    running = math.inf
    decay = []
    for scan in scans:
        if scan.pairs:
            running = min(running, scan.pairs[0].distance)
        decay.append(running)

    mults = [scan.multiplicity for scan in scans]
    verdict = INCONCLUSIVE
    if len(scans) >= _TREND_WINDOW and math.isfinite(decay[-1]):
        m3, m2, m1 = mults[-3], mults[-2], mults[-1]
        growing = m3 <= m2 <= m1 and m1 > m3
        if decay[-1] < theta_fail and growing:
            verdict = WSP_FAILING
        elif all(math.isfinite(d) and d >= theta_hold for d in decay[-3:]) and m1 == m3:
            verdict = WSP_CONSISTENT

    return SeparationReport(
        b_grid=tuple(scan.b for scan in scans),
        multiplicities=tuple((scan.multiplicity, scan.witness_x) for scan in scans),
        ilc_decay=tuple(decay),
        exact_overlaps=tuple(ov for scan in scans for ov in scan.exact_overlaps),
        verdict=verdict,
        gamma_observed=max(mults) if mults else 0,
        scans=tuple(scans),
    )
