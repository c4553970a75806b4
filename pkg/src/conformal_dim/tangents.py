"""Zoom-ladder construction of pseudo-tangent witnesses.

A witness for window parameter i is built by alternating two moves at
the top fixed point: ride the fixed-point map inward (m iterations),
then swap one cylinder word for a near-identity partner word.  Each
swap displaces the tracked point by a controlled negative increment;
the composed zoom map sends a chain of genuine attractor points onto a
descending ladder in [0, 1].  Unit-size attractor copies hang off every
ladder point, and the left Hausdorff gap of their union against [0, 1]
is the reported quality of the witness.

For all-affine systems the ladder runs in exact rational arithmetic:
zoom slopes grow geometrically and doubles lose the bookkeeping
invariant long before the ladder ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import maps as mp
from .budget import resolve_budget
from .cylinders import compose_word
from .dimension import _as_arrays, cover_count
from .errors import (
    ConformalDimError,
    EmptySet,
    ExtensionFailed,
    NoUsablePairs,
    PointsDiverged,
    PreconditionNotMet,
    StepSelectionFailed,
)
from .separation import WSP_FAILING, NearIdentityPair, separation_verdict
from .system import _merge_sorted, attractor_sample_arrays

BELOW = "BELOW"
ABOVE = "ABOVE"

ALPHA_CAP = 10.0               # bi-Lipschitz budget a zoom word may spend
COMPARABILITY_FLOOR = 0.05
GAP_FLOOR = 1e-13
DRIFT_TOL = 1e-9
EXTEND_NORM_SLACK = 1.0 + 1e-9
SHELL_RESOLUTION_CAP = 1e-3    # skip shells that magnify the sample past this
SAMPLE_FACTOR = 1e-4
SAMPLE_FLOOR = 1e-6
WINDOW_LO_FACTOR = 0.25


@dataclass(frozen=True)
class TangentPair:
    pair: NearIdentityPair
    side: str              # BELOW | ABOVE: sign of the displacement at x1
    comparability: float   # inf|Dg| / sup|Dg| over the neighbourhood


@dataclass(frozen=True)
class GapProfile:
    rho: float
    inf_gap: float
    sup_gap: float


@dataclass(frozen=True)
class LadderStep:
    n: int
    k: int           # index into the supplied pair list
    m: int           # fixed-point-map iterations burned before the swap
    point: float
    increment: float


@dataclass(frozen=True)
class TangentWitness:
    i: int
    epsilon: float
    T_word: tuple          # forward word u with T = f_u^{-1}
    points: tuple          # ladder, starting at x1
    left_gap: float
    alpha: float           # distortion ratio of the zoom map
    steps: tuple
    stop_reason: str
    kappa: float           # worst comparability among used pairs
    recheck_drift: float


@dataclass(frozen=True)
class TransportCheck:
    passed: bool
    n_source: int
    n_image: int


def _word_matrix(system, word):
    mat = mp._canonical(1.0, 0.0, 0.0, 1.0)
    for idx in word:
        mat = mp.matrix_product(mat, mp.to_matrix(system.maps[idx]))
    return mat


def _pair_composite(system, v, w):
    """f_v^{-1} o f_w as a map on J, or None when its pole enters J."""
    h_mat = mp.matrix_product(mp.matrix_inverse(_word_matrix(system, v)),
                              _word_matrix(system, w))
    try:
        return mp.from_matrix(h_mat, system.j)
    except ValueError:
        return None


def _comparability(system, v, w):
    h = _pair_composite(system, v, w)
    if h is None:
        return 0.0
    dlo, dhi = mp.deriv_range(h, system.j)
    if dhi == 0.0:
        return 0.0
    return dlo / dhi


def _mirror(system, p):
    """The same pair with the roles of v and w swapped."""
    h = _pair_composite(system, p.w, p.v)
    if h is None:
        return None
    d = mp.sup_distance_to_identity(h, system.j)
    gap = mp._eval_raw(h, system.x1) - system.x1
    return NearIdentityPair(p.w, p.v, d.value, gap, p.orientation)


def extend_pair(system, pair, floor=COMPARABILITY_FLOOR, m_max=200):
    """Conjugate by powers of the fixed-point map until the derivative
    of the composite is floor-comparable, without growing its norm."""
    base = pair.pair if isinstance(pair, TangentPair) else pair
    f1 = (system.f1_index,)
    for m in range(m_max + 1):
        v2, w2 = base.v + f1 * m, base.w + f1 * m
        h = _pair_composite(system, v2, w2)
        if h is None:
            continue
        d = mp.sup_distance_to_identity(h, system.j).value
        if d > base.distance * EXTEND_NORM_SLACK:
            continue
        comp = _comparability(system, v2, w2)
        if comp >= floor:
            gap = mp._eval_raw(h, system.x1) - system.x1
            near = NearIdentityPair(v2, w2, d, gap, base.orientation)
            return TangentPair(near, BELOW if gap < 0.0 else ABOVE, comp)
    raise ExtensionFailed(
        f"no conjugate within m <= {m_max} reaches comparability {floor} "
        "without growing the identity distance")


def select_tangent_pairs(system, depth=None, count=None,
                         floor=COMPARABILITY_FLOOR, force=False,
                         report=None, budget=None):
    """Usable near-identity pairs for ladder building, coarse first.

    Both orientations of every scanned pair are considered and the
    majority displacement side is kept, so each scale contributes one
    usable rung.  Fewer than `count` pairs may come back when the scan
    supply is short; none at all raises NoUsablePairs.
    """
    bdg = resolve_budget(budget)
    if report is None:
        report = separation_verdict(system, depth=depth, budget=bdg)
    if report.verdict != WSP_FAILING and not force:
        raise PreconditionNotMet(
            f"separation verdict is {report.verdict}; tangent ladders "
            "need WSP_FAILING (pass force=True to override)")

    oriented = []
    for scan in report.scans:
        for p in scan.pairs:
            for cand in (p, _mirror(system, p)):
                if cand is not None and abs(cand.gap_at_x1) > GAP_FLOOR:
                    oriented.append(cand)
    below = [p for p in oriented if p.gap_at_x1 < 0.0]
    above = [p for p in oriented if p.gap_at_x1 > 0.0]
    chosen = below if len(below) >= len(above) else above
    side = BELOW if chosen is below else ABOVE
    chosen.sort(key=lambda p: (-p.distance, p.v, p.w))

    out = []
    for p in chosen:
        comp = _comparability(system, p.v, p.w)
        if comp >= floor:
            out.append(TangentPair(p, side, comp))
        else:
            try:
                ext = extend_pair(system, p, floor=floor)
            except ExtensionFailed:
                continue
            if ext.side == side:
                out.append(ext)
        if count is not None and len(out) >= count:
            break
    if not out:
        raise NoUsablePairs("no near-identity pair has a usable displacement")
    return out


def gap_profile(system, pair, rho):
    """Range of |g(x) - x| over the rho-ball at x1 (exact candidates:
    endpoints, unit-derivative points, fixed points of g)."""
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    base = pair.pair if isinstance(pair, TangentPair) else pair
    h = _pair_composite(system, base.v, base.w)
    if h is None:
        raise PreconditionNotMet("composite pole enters the neighbourhood")
    j = system.j
    lo = max(system.x1 - rho, j.lo)
    hi = min(system.x1 + rho, j.hi)
    if lo > hi:
        raise EmptySet("window does not meet the neighbourhood")
    candidates = [lo, hi]
    p, q, r, s = mp.to_matrix(h)
    det = p * s - q * r
    if r != 0.0:
        if det > 0.0:
            for root in ((1.0 - s) / r, (-1.0 - s) / r):
                if lo < root < hi:
                    candidates.append(root)
        disc = (s - p) ** 2 + 4.0 * r * q
        if disc >= 0.0:
            for sign in (1.0, -1.0):
                root = ((p - s) + sign * math.sqrt(disc)) / (2.0 * r)
                if lo < root < hi:
                    candidates.append(root)
    else:
        if p != s:
            root = (q / s) / (1.0 - p / s)
            if lo < root < hi:
                candidates.append(root)
    vals = [abs(mp._eval_raw(h, x) - x) for x in candidates]
    return GapProfile(rho, min(vals), max(vals))


class _FractionAlgebra:
    """Exact affine map algebra: maps are (slope, offset) Fractions."""

    def __init__(self, system):
        self.maps = [(Fraction(m.params[0]), Fraction(m.params[1]))
                     for m in system.maps]
        a1, b1 = self.maps[system.f1_index]
        self.x1 = b1 / (1 - a1)
        self.f1 = self.maps[system.f1_index]
        self.identity = (Fraction(1), Fraction(0))

    def compose(self, f, g):
        return (f[0] * g[0], f[0] * g[1] + f[1])

    def inverse(self, f):
        return (1 / f[0], -f[1] / f[0])

    def eval(self, f, x):
        return f[0] * x + f[1]

    def word_map(self, word):
        f = self.identity
        for idx in word:
            f = self.compose(f, self.maps[idx])
        return f

    def scale(self, f, lo, hi):
        return abs(float(f[0]))

    def to_float(self, x):
        return float(x)

    def affine_floats(self, f):
        return float(f[0]), float(f[1])


class _MatrixAlgebra:
    """Float Moebius algebra on raw (uncanonical) 2x2 matrices."""

    def __init__(self, system):
        self.maps = [mp.to_matrix(m) for m in system.maps]
        self.x1 = system.x1
        self.f1 = self.maps[system.f1_index]
        self.identity = (1.0, 0.0, 0.0, 1.0)

    def compose(self, f, g):
        return mp.matrix_product(f, g)

    def inverse(self, f):
        return mp.matrix_inverse(f)

    def eval(self, f, x):
        p, q, r, s = f
        den = r * x + s
        if abs(den) < 1e-300:
            raise PointsDiverged("zoom composite hit its pole")
        return (p * x + q) / den

    def word_map(self, word):
        f = self.identity
        for idx in word:
            f = self.compose(f, self.maps[idx])
        return f

    def scale(self, f, lo, hi):
        p, q, r, s = f
        det = p * s - q * r
        worst = 0.0
        for x in (lo, 0.5 * (lo + hi), hi):
            den = (r * x + s) ** 2
            worst = math.inf if den < 1e-300 else max(worst, abs(det) / den)
        return worst

    def to_float(self, x):
        return float(x)

    def affine_floats(self, f):
        raise NotImplementedError


def _iterate(alg, f, m):
    out = alg.identity
    for _ in range(m):
        out = alg.compose(out, f)
    return out


def left_hausdorff_distance(a, b):
    """sup over points of a of the distance to b, both interval unions.

    Exact: the distance-to-b function is piecewise linear, so its
    maximum over each a-component sits at a component endpoint or at a
    gap midpoint of b.
    """
    alos, ahis = _as_arrays(a)
    blos, bhis = _as_arrays(b)
    if alos.size == 0 or blos.size == 0:
        raise EmptySet("left Hausdorff distance of an empty union")
    blos, bhis = _merge_sorted(blos, bhis)

    def dist(y):
        idx = int(np.searchsorted(blos, y, side="right"))
        if idx > 0 and bhis[idx - 1] >= y:
            return 0.0
        left = y - bhis[idx - 1] if idx > 0 else math.inf
        right = blos[idx] - y if idx < blos.size else math.inf
        return min(left, right)

    gap_mids = 0.5 * (bhis[:-1] + blos[1:])
    worst = 0.0
    for alo, ahi in zip(alos.tolist(), ahis.tolist()):
        worst = max(worst, dist(alo), dist(ahi))
        i0 = int(np.searchsorted(gap_mids, alo, side="left"))
        i1 = int(np.searchsorted(gap_mids, ahi, side="right"))
        for g in gap_mids[i0:i1].tolist():
            worst = max(worst, dist(g))
    return float(worst)


def _left_gap_from_shells(system, alg, shells, resolution, bdg):
    """Union of attractor copies hung off the ladder, measured against
    the unit interval from the left."""
    los, his = attractor_sample_arrays(system, resolution, bdg)
    parts_lo, parts_hi = [], []
    worst_res = 0.0
    for phi, psi in shells:
        shell = alg.compose(phi, psi)
        s = alg.scale(shell, 0.0, 1.0)
        if s * resolution > SHELL_RESOLUTION_CAP:
            continue
        worst_res = max(worst_res, s * resolution)
        if isinstance(alg, _FractionAlgebra):
            sf, of = alg.affine_floats(shell)
            new_lo, new_hi = sf * los + of, sf * his + of
            if sf < 0.0:
                new_lo, new_hi = new_hi, new_lo
        else:
            a = np.array([alg.eval(shell, x) for x in los.tolist()])
            b = np.array([alg.eval(shell, x) for x in his.tolist()])
            new_lo, new_hi = np.minimum(a, b), np.maximum(a, b)
        keep = (new_hi > 0.0) & (new_lo < 1.0)
        parts_lo.append(np.clip(new_lo[keep], 0.0, 1.0))
        parts_hi.append(np.clip(new_hi[keep], 0.0, 1.0))
    if not parts_lo:
        return 1.0
    ulos = np.concatenate(parts_lo)
    uhis = np.concatenate(parts_hi)
    if ulos.size == 0:
        return 1.0
    gap = left_hausdorff_distance(
        (np.array([0.0]), np.array([1.0])), (ulos, uhis))
    return gap + worst_res


def build_tangent_witness(system, pairs, i, window_lo_factor=WINDOW_LO_FACTOR,
                          m_max=200, budget=None):
    """Run the ladder for window parameter i (epsilon = 1/i).

    Steps are chosen by minimal burn (fixed-point iterations plus the
    swapped word length) among all landing candidates; ties prefer the
    larger displacement.  The search assumes the conjugated displacement
    grows with the burn count and stops scanning a pair once it
    overshoots the window.
    """
    if i < 1:
        raise ValueError("window parameter i must be >= 1")
    if not pairs:
        raise NoUsablePairs("no tangent pairs supplied")
    bdg = resolve_budget(budget)
    eps = 1.0 / i
    side = pairs[0].side
    sgn = -1.0 if side == BELOW else 1.0

    if all(m.kind == "affine" for m in system.maps):
        alg = _FractionAlgebra(system)
    else:
        alg = _MatrixAlgebra(system)
    f1 = alg.f1
    x1 = alg.x1
    supply = []
    for tp in pairs:
        supply.append((alg.word_map(tp.pair.v), alg.word_map(tp.pair.w),
                       tp.pair.v, tp.pair.w))

    phi = alg.identity
    psi = alg.identity
    psi_words = [()]
    shells = [(phi, psi)]
    point = x1
    points = [point]
    steps = []
    used = set()
    stop_reason = "step_cap"
    lo_mag, hi_mag = eps * window_lo_factor, eps

    while len(steps) < 4 * i:
        best = None
        for k, (fv, fw, v_word, w_word) in enumerate(supply):
            if k in used:
                continue
            f1m = alg.identity
            for m in range(m_max + 1):
                g = alg.compose(alg.inverse(f1m),
                                alg.compose(alg.inverse(fv),
                                            alg.compose(fw, f1m)))
                cand = alg.eval(phi, alg.eval(g, alg.eval(psi, x1)))
                inc = cand - point
                mag = abs(alg.to_float(inc))
                # a rung outside [0, 1] hangs its attractor copy outside
                # the unit window; such steps add nothing
                if lo_mag <= mag <= hi_mag \
                        and alg.to_float(inc) * sgn > 0.0 \
                        and 0.0 <= alg.to_float(cand) <= 1.0:
                    burn = m + len(v_word)
                    key = (burn, -mag, k, m)
                    if best is None or key < best[0]:
                        best = (key, k, m, cand, inc)
                if mag > hi_mag:
                    break
                f1m = alg.compose(f1m, f1)
        if best is None:
            if not steps:
                raise StepSelectionFailed(0)
            stop_reason = "supply_exhausted"
            break
        _, k, m, cand, inc = best
        fv, fw, v_word, w_word = supply[k]
        f1m = _iterate(alg, f1, m)
        phi = alg.compose(phi, alg.compose(alg.inverse(f1m), alg.inverse(fv)))
        psi = alg.compose(fw, alg.compose(f1m, psi))
        psi_words.append(w_word + (system.f1_index,) * m + psi_words[-1])
        point = cand
        pf = alg.to_float(point)
        if not -1.0 <= pf <= 2.0:
            raise PointsDiverged(f"ladder point {pf} left the safety band")
        points.append(point)
        shells.append((phi, psi))
        used.add(k)
        steps.append(LadderStep(len(steps) + 1, k, m, pf,
                                alg.to_float(inc)))

    t_word = ()
    for step in reversed(steps):
        t_word = t_word + pairs[step.k].pair.v \
            + (system.f1_index,) * step.m
    drift = 0.0
    for l, psi_word in enumerate(psi_words):
        prefix = ()
        for step in reversed(steps[l:]):
            prefix = prefix + pairs[step.k].pair.v \
                + (system.f1_index,) * step.m
        u_l = prefix + psi_word
        check = alg.eval(phi, alg.eval(alg.word_map(u_l), x1))
        drift = max(drift, abs(alg.to_float(check - points[l])))

    kappa = min(pairs[s.k].comparability for s in steps)
    if isinstance(alg, _FractionAlgebra):
        alpha = 1.0
    else:
        try:
            rec = compose_word(system, t_word)
            alpha = math.inf if rec.deriv_lo == 0.0 \
                else rec.deriv_hi / rec.deriv_lo
        except (ConformalDimError, ValueError):
            alpha = math.inf
    if alpha > ALPHA_CAP:
        raise PointsDiverged(
            f"zoom word distortion {alpha:.3g} exceeds the cap {ALPHA_CAP}")

    min_inc = min(abs(s.increment) for s in steps)
    resolution = max(SAMPLE_FACTOR * min_inc, SAMPLE_FLOOR)
    left_gap = _left_gap_from_shells(system, alg, shells, resolution, bdg)

    return TangentWitness(
        i=i,
        epsilon=eps,
        T_word=t_word,
        points=tuple(alg.to_float(p) for p in points),
        left_gap=left_gap,
        alpha=alpha,
        steps=tuple(steps),
        stop_reason=stop_reason,
        kappa=kappa,
        recheck_drift=drift,
    )


def check_covering_transport(point_set, map_, alpha, rho):
    """Covering counts cannot grow through the map: boxes at scale rho
    transport to boxes at scale alpha * rho."""
    if rho <= 0.0 or alpha <= 0.0:
        raise ValueError("need positive rho and alpha")
    los, his = _as_arrays(point_set)
    if los.size == 0:
        raise EmptySet("empty point set")
    span_lo, span_hi = float(los.min()), float(his.max())
    c = 0.5 * (span_lo + span_hi)
    R = 0.5 * (span_hi - span_lo) + 2.0 * rho
    n_src = cover_count((los, his), c, R, rho)

    a = np.array([mp._eval_raw(map_, x) for x in los.tolist()])
    b = np.array([mp._eval_raw(map_, x) for x in his.tolist()])
    img_lo, img_hi = np.minimum(a, b), np.maximum(a, b)
    order = np.argsort(img_lo, kind="stable")
    img_lo, img_hi = img_lo[order], img_hi[order]
    c2 = 0.5 * (float(img_lo.min()) + float(img_hi.max()))
    R2 = 0.5 * (float(img_hi.max()) - float(img_lo.min())) + 2.0 * alpha * rho
    n_img = cover_count((img_lo, img_hi), c2, R2, alpha * rho)
    return TransportCheck(n_img <= n_src, n_src, n_img)
