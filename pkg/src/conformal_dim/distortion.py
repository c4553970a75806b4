"""Bounded-distortion and Hoelder-constant estimation.

The distortion constant K compares |Df_w| anywhere on the neighbourhood
against the cylinder diameter; it is estimated over all words to a
depth on a Chebyshev grid and inflated by a small safety factor, which
is enough for the downstream pruning bounds that only need a valid
upper bound on tested words.  Purely affine systems give ratio exactly
one, so K is the bare safety factor there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import maps as mp
from .budget import resolve_budget
from .errors import PreconditionNotMet

SAFETY_INFLATION = 1.05
GRID_POINTS = 64
DEFAULT_BETA = 1.0


@dataclass(frozen=True)
class DistortionReport:
    K: float
    depth: int
    worst_word: tuple
    ratio_histogram: tuple   # (depth, max ratio) per depth


@dataclass(frozen=True)
class HolderReport:
    beta: float
    C_hat: float
    C_tilde: float
    samples: int


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    max_ratio: float         # worst lhs/rhs; <= 1 means the bound holds
    witness: tuple | None


def cheb_grid(interval, n=GRID_POINTS):
    k = np.arange(n)
    nodes = np.cos((2 * k + 1) * math.pi / (2 * n))
    mid = 0.5 * (interval.lo + interval.hi)
    half = 0.5 * (interval.hi - interval.lo)
    return np.sort(mid + half * nodes)


def _walk_words(system, depth, bdg):
    """All (word, composite) up to the depth, lexicographic, prefix first."""
    n = system.alphabet_size
    stack = [((i,), system.maps[i]) for i in range(n - 1, -1, -1)]
    while stack:
        word, composite = stack.pop()
        bdg.consume()
        yield word, composite
        if len(word) < depth:
            for i in range(n - 1, -1, -1):
                stack.append((word + (i,), mp.compose(composite, system.maps[i])))


def _abs_deriv_grid(m, xs):
    if m.kind == "affine":
        return np.full(xs.shape, abs(m.params[0]))
    p, q, r, s = m.params
    den = r * xs + s
    return np.abs((p * s - q * r) / (den * den))


def _signed_deriv_grid(m, xs):
    if m.kind == "affine":
        return np.full(xs.shape, m.params[0])
    p, q, r, s = m.params
    den = r * xs + s
    return (p * s - q * r) / (den * den)


def _diam_on(m, interval):
    return abs(mp._eval_raw(m, interval.hi) - mp._eval_raw(m, interval.lo))


def estimate_distortion_constant(system, depth, budget=None):
    if depth < 1:
        raise ValueError("depth must be >= 1")
    bdg = resolve_budget(budget)
    xs = cheb_grid(system.j)
    best = 0.0
    worst_word = ()
    per_depth = {}
    for word, composite in _walk_words(system, depth, bdg):
        diam = _diam_on(composite, system.delta)
        if composite.kind == "affine":
            a = abs(composite.params[0])
            ratio = max(a / diam, diam / a)
        else:
            derivs = _abs_deriv_grid(composite, xs)
            ratio = float(max(derivs.max() / diam, diam / derivs.min()))
        k = len(word)
        if ratio > per_depth.get(k, 0.0):
            per_depth[k] = ratio
        if ratio > best:
            best, worst_word = ratio, word
    return DistortionReport(
        K=best * SAFETY_INFLATION,
        depth=depth,
        worst_word=worst_word,
        ratio_histogram=tuple(sorted(per_depth.items())),
    )


def _holder_scan(system, depth, beta, bdg):
    """Worst |Df(x)-Df(y)| / (|x-y|^beta diam f_w(J)) over words and pairs."""
    xs = cheb_grid(system.j)
    dx = np.abs(xs[:, None] - xs[None, :])
    np.fill_diagonal(dx, np.inf)   # exclude x = y
    dx_pow = dx ** beta
    worst = 0.0
    witness = None
    samples = 0
    for word, composite in _walk_words(system, depth, bdg):
        diam_j = _diam_on(composite, system.j)
        derivs = _signed_deriv_grid(composite, xs)
        ratios = np.abs(derivs[:, None] - derivs[None, :]) / (dx_pow * diam_j)
        samples += xs.size * (xs.size - 1)
        t = int(np.argmax(ratios))
        val = float(ratios.flat[t])
        if val > worst:
            i, jj = divmod(t, xs.size)
            worst = val
            witness = (word, float(xs[i]), float(xs[jj]))
    return worst, witness, samples


def fit_composition_holder(system, depth, beta=DEFAULT_BETA, budget=None):
    """Fit C_hat by grid maximization; derive C_tilde = 2 K^2 C_hat."""
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must be in (0, 1]")
    bdg = resolve_budget(budget)
    worst, _, samples = _holder_scan(system, depth, beta, bdg)
    K = estimate_distortion_constant(system, depth, bdg).K
    c_hat = worst if worst > 0.0 else 1.0   # affine: any positive constant works
    return HolderReport(
        beta=beta,
        C_hat=c_hat,
        C_tilde=2.0 * K * K * c_hat * SAFETY_INFLATION,
        samples=samples,
    )


def check_composition_holder(system, depth, beta, C_hat, budget=None):
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must be in (0, 1]")
    if C_hat <= 0.0:
        raise ValueError("C_hat must be positive")
    bdg = resolve_budget(budget)
    worst, witness, _ = _holder_scan(system, depth, beta, bdg)
    ratio = worst / C_hat
    return CheckResult(passed=ratio <= 1.0 + 1e-9, max_ratio=ratio, witness=witness)


def check_inverse_composition_holder(system, pair, beta, C_tilde,
                                     epsilon=0.5, budget=None):
    """Hoelder bound on D(f_v^{-1} o f_w) for an epsilon-near pair."""
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must be in (0, 1]")
    v, w = pair
    mat_v = _word_matrix(system, v)
    mat_w = _word_matrix(system, w)
    try:
        h = mp.from_matrix(mp.matrix_product(mp.matrix_inverse(mat_v), mat_w),
                           system.j)
    except ValueError:
        raise PreconditionNotMet("composite has a pole in the neighbourhood") from None
    dist = mp.sup_distance_to_identity(h, system.j).value
    if dist >= epsilon:
        raise PreconditionNotMet(
            f"pair distance {dist} is not below epsilon {epsilon}")
    xs = cheb_grid(system.j)
    imgs = np.array([mp._eval_raw(h, float(x)) for x in xs])
    inside = (imgs >= system.j.lo) & (imgs <= system.j.hi)
    xs = xs[inside]
    if xs.size < 2:
        return CheckResult(passed=True, max_ratio=0.0, witness=None)
    derivs = _signed_deriv_grid(h, xs)
    dx = np.abs(xs[:, None] - xs[None, :])
    np.fill_diagonal(dx, np.inf)
    ratios = np.abs(derivs[:, None] - derivs[None, :]) / (C_tilde * dx ** beta)
    t = int(np.argmax(ratios))
    i, jj = divmod(t, xs.size)
    ratio = float(ratios.flat[t])
    return CheckResult(passed=ratio <= 1.0 + 1e-9, max_ratio=ratio,
                       witness=(float(xs[i]), float(xs[jj])))


def _word_matrix(system, word):
    mat = mp._canonical(1.0, 0.0, 0.0, 1.0)
    for sym in word:
        mat = mp.matrix_product(mat, mp.to_matrix(system.maps[sym]))
    return mat
