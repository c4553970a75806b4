"""Zoom construction: pair selection, ladders, witnesses, transport."""

import math
import random

import numpy as np
import pytest

from conformal_dim import maps as M
from conformal_dim import tangents as T
from conformal_dim.errors import (EmptySet, ExtensionFailed, NoUsablePairs,
                                  PreconditionNotMet, StepSelectionFailed)

PI_I2_POINTS = (1.0, 0.7831007808870452, 0.5976304209276482)
PI_I2_WORD = (0, 2, 2, 2, 1, 2, 1, 0, 0, 0, 2, 2, 2)
PI_I5_POINTS = (1.0, 0.8732990352584491, 0.6953240677064937)
PI_I5_WORD = (1, 0, 0, 0, 2, 0, 0, 1, 0, 2, 2, 0, 0, 0, 2, 2, 2, 0, 1, 2)

GOLDEN_GAPS = {1: 0.03942105611888166, 2: 0.01314406724562731,
               3: 0.013129211226148185, 4: 0.004382774830959251,
               5: 0.004382774830959251}
PI_GAPS = {1: 0.0076072165406265045, 2: 0.002522454894252988,
           3: 0.002522454894252988, 4: 0.002522454894252988,
           5: 0.0025165779547312037}


# ---------------------------------------------------------------------------
# pair selection

def test_pair_selection_from_failing_system(pi_pairs):
    assert len(pi_pairs) == 13
    assert {p.side for p in pi_pairs} == {T.BELOW}
    first = pi_pairs[0]
    assert (first.pair.v, first.pair.w) == ((1,), (0,))
    assert math.isclose(first.pair.distance, 0.9549296585513721,
                        rel_tol=1e-12)
    dists = [p.pair.distance for p in pi_pairs]
    assert all(a >= b for a, b in zip(dists, dists[1:]))
    for p in pi_pairs:
        assert p.comparability == 1.0       # affine composite, translation
        assert 0.0 < p.comparability <= 1.0
        assert abs(p.pair.gap_at_x1) > 1e-13
        assert p.pair.gap_at_x1 < 0.0       # BELOW means approach from below


def test_selection_requires_failing_verdict_or_force(cantor):
    with pytest.raises(PreconditionNotMet):
        T.select_tangent_pairs(cantor)
    forced = T.select_tangent_pairs(cantor, force=True)
    assert len(forced) == 13
    # separated system: the nearest composite is still far from the identity
    assert math.isclose(forced[0].pair.gap_at_x1, -2.0, rel_tol=1e-9)


def test_extension_noop_and_failure(pi_sys, pi_pairs):
    same = T.extend_pair(pi_sys, pi_pairs[0], floor=0.05)
    assert same.pair.v == pi_pairs[0].pair.v
    assert same.comparability == 1.0
    with pytest.raises(ExtensionFailed):
        T.extend_pair(pi_sys, pi_pairs[0], floor=1.1)   # impossible target


# ---------------------------------------------------------------------------
# gap profiles

def test_gap_profile_translation_is_flat(pi_sys, pi_pairs):
    p = pi_pairs[3]
    for rho in (0.3, 0.05, 1e-9):
        prof = T.gap_profile(pi_sys, p, rho)
        assert prof.inf_gap == prof.sup_gap
        assert math.isclose(prof.inf_gap, abs(p.pair.gap_at_x1),
                            rel_tol=1e-12)


def test_gap_profile_moebius_matches_dense_grid(moe):
    """Closed-form window extrema vs 400k-point enumeration."""
    nip = T.NearIdentityPair(v=(0,), w=(1, 1), distance=1.0,
                             gap_at_x1=0.0, orientation=1)
    prof = T.gap_profile(moe, nip, 0.02)
    mats = [M.to_matrix(m) for m in moe.maps]
    comp = M.matrix_product(M.matrix_inverse(mats[0]),
                            M.matrix_product(mats[1], mats[1]))
    g = M.from_matrix(comp, moe.j)
    lo = max(moe.j.lo, moe.x1 - 0.02)
    hi = min(moe.j.hi, moe.x1 + 0.02)
    xs = np.linspace(lo, hi, 400001)
    vals = np.abs(np.array([M._eval_raw(g, x) for x in xs]) - xs)
    assert abs(prof.inf_gap - vals.min()) <= 1e-9
    assert abs(prof.sup_gap - vals.max()) <= 1e-9
    assert prof.inf_gap <= prof.sup_gap


def test_gap_profile_shrinks_to_the_pointwise_gap(moe):
    nip = T.NearIdentityPair(v=(0,), w=(1, 1), distance=1.0,
                             gap_at_x1=0.0, orientation=1)
    prof = T.gap_profile(moe, nip, 1e-10)
    assert math.isclose(prof.inf_gap, prof.sup_gap, rel_tol=1e-6)


def test_gap_profile_fitted_ratio_bound(pi_sys, pi_pairs):
    # fit the worst window-comparability ratio, then require no violation
    rhos = [0.25 * abs(p.pair.gap_at_x1) ** 0.5 for p in pi_pairs[:6]]
    profs = [T.gap_profile(pi_sys, p, r)
             for p, r in zip(pi_pairs[:6], rhos)]
    k_fit = 1.1 * max(pr.sup_gap / pr.inf_gap for pr in profs)
    for pr in profs:
        assert pr.sup_gap <= k_fit * pr.inf_gap
        assert pr.inf_gap > 0.0


def test_gap_profile_validates_rho(pi_sys, pi_pairs):
    with pytest.raises(ValueError):
        T.gap_profile(pi_sys, pi_pairs[0], 0.0)


# ---------------------------------------------------------------------------
# witness construction

def test_witness_i1_coarse(pi_sys, pi_pairs):
    w = T.build_tangent_witness(pi_sys, pi_pairs, 1)
    assert w.i == 1 and w.epsilon == 1.0
    assert w.points == (1.0, 0.045070341448627954)
    assert [(s.k, s.m) for s in w.steps] == [(0, 0)]
    assert w.T_word == (1,)
    assert math.isclose(w.left_gap, PI_GAPS[1], rel_tol=1e-9)
    assert w.stop_reason == "supply_exhausted"


def test_witness_ladder_regressions(pi_sys, pi_pairs):
    for i in (2, 3, 4):
        w = T.build_tangent_witness(pi_sys, pi_pairs, i)
        assert w.points == PI_I2_POINTS
        assert [(s.k, s.m) for s in w.steps] == [(3, 0), (9, 0)]
        assert w.T_word == PI_I2_WORD
        assert math.isclose(w.left_gap, PI_GAPS[i], rel_tol=1e-9)
    w5 = T.build_tangent_witness(pi_sys, pi_pairs, 5)
    assert w5.points == PI_I5_POINTS
    assert [(s.k, s.m) for s in w5.steps] == [(5, 1), (12, 0)]
    assert w5.T_word == PI_I5_WORD
    assert math.isclose(w5.left_gap, PI_GAPS[5], rel_tol=1e-9)


def test_witness_invariants_both_galleries(pi_sys, pi_pairs, golden,
                                           golden_pairs):
    for system, pairs, gaps in ((pi_sys, pi_pairs, PI_GAPS),
                                (golden, golden_pairs, GOLDEN_GAPS)):
        for i in range(1, 6):
            w = T.build_tangent_witness(system, pairs, i)
            eps = 1.0 / i
            assert w.epsilon == eps
            for s in w.steps:
                assert -eps - 1e-12 <= s.increment <= -eps / 4.0 + 1e-12
            pts = list(w.points)
            assert pts == sorted(pts, reverse=True)
            assert all(0.0 <= p <= 1.0 for p in pts)
            assert math.isclose(w.left_gap, gaps[i], rel_tol=1e-9)
            assert w.left_gap <= 1.0 / i
            assert 1.0 <= w.alpha <= T.ALPHA_CAP
            assert w.kappa == 1.0
            assert w.recheck_drift <= 1e-9
            assert len(w.steps) <= 4 * i


def test_witness_word_bookkeeping(pi_sys, pi_pairs):
    """Replay the stored recipe in exact rationals: push x1 through the
    zoom-in word, then un-do the zoom-out word symbol by symbol.

    A float replay cannot verify this (undoing the zoom multiplies
    rounding noise by 1/contraction^depth), so the independent route uses
    Fractions, where the cancellation must be exact.
    """
    from fractions import Fraction

    w = T.build_tangent_witness(pi_sys, pi_pairs, 5)
    f1 = pi_sys.f1_index
    params = [(Fraction(m.params[0]), Fraction(m.params[1]))
              for m in pi_sys.maps]
    blocks = [pi_pairs[s.k].pair.v + (f1,) * s.m for s in w.steps]
    for l in range(len(w.steps)):
        phi_word = ()
        for b in reversed(blocks[:l + 1]):
            phi_word = phi_word + b
        psi_word = ()
        for n in range(l + 1):
            psi_word = (pi_pairs[w.steps[n].k].pair.w
                        + (f1,) * w.steps[n].m + psi_word)
        y = Fraction(pi_sys.x1)
        for sym in reversed(psi_word):
            a, b = params[sym]
            y = a * y + b
        for sym in phi_word:
            a, b = params[sym]
            y = (y - b) / a
        assert abs(float(y) - w.points[l + 1]) <= 1e-12
    # the full zoom-out word is the concatenation of the step blocks
    tw = ()
    for b in reversed(blocks):
        tw = tw + b
    assert tw == w.T_word


def test_witness_negative_control(cantor):
    pairs = T.select_tangent_pairs(cantor, force=True)
    for i in (5, 10):
        with pytest.raises(StepSelectionFailed) as exc:
            T.build_tangent_witness(cantor, pairs, i)
        assert "step 0" in str(exc.value)


def test_witness_validates_inputs(pi_sys, pi_pairs):
    with pytest.raises(ValueError):
        T.build_tangent_witness(pi_sys, pi_pairs, 0)
    with pytest.raises(NoUsablePairs):
        T.build_tangent_witness(pi_sys, [], 1)


# ---------------------------------------------------------------------------
# one-sided Hausdorff distance

def test_left_hausdorff_examples():
    unit = (np.array([0.0]), np.array([1.0]))
    assert T.left_hausdorff_distance(unit, np.array([0.0, 0.5, 1.0])) \
        == 0.25
    assert T.left_hausdorff_distance(np.array([0.5]), unit) == 0.0
    assert T.left_hausdorff_distance(np.array([0.0, 1.0]),
                                     np.array([0.4])) == 0.6


def test_left_hausdorff_empty_raises():
    with pytest.raises(EmptySet):
        T.left_hausdorff_distance(np.array([]), np.array([0.5]))
    with pytest.raises(EmptySet):
        T.left_hausdorff_distance(np.array([0.5]), np.array([]))


def test_left_hausdorff_interval_to_points_formula():
    """d from [0,1] to a finite set equals the worst of the two edge
    distances and all half-gaps; compared on random sets."""
    rng = random.Random(5150)
    unit = (np.array([0.0]), np.array([1.0]))
    for _ in range(50):
        pts = sorted(rng.uniform(0.0, 1.0) for _ in range(rng.randint(1, 9)))
        got = T.left_hausdorff_distance(unit, np.array(pts))
        want = max([pts[0], 1.0 - pts[-1]]
                   + [(b - a) / 2.0 for a, b in zip(pts, pts[1:])])
        assert math.isclose(got, want, rel_tol=1e-12, abs_tol=1e-15)


def test_left_hausdorff_is_one_sided():
    a = np.array([0.0, 1.0])
    b = np.array([0.0, 0.2, 1.0])
    assert T.left_hausdorff_distance(a, b) == 0.0
    assert T.left_hausdorff_distance(b, a) == 0.2


# ---------------------------------------------------------------------------
# covering transport

def test_transport_identity_and_scaling():
    A = np.arange(10) * (3.0 / 64.0)
    ident = M.affine(1.0, 0.0, M.Interval(-1.0, 2.0))
    out = T.check_covering_transport(A, ident, 1.0, 1.0 / 16.0)
    assert out.passed and out.n_source == out.n_image == 5
    doubler = M.affine(2.0, 0.3, M.Interval(-1.0, 2.0))
    ok = T.check_covering_transport(A, doubler, 2.0, 1.0 / 16.0)
    assert ok.passed and (ok.n_source, ok.n_image) == (5, 5)


def test_transport_understated_bound_fails():
    A = np.arange(10) * (3.0 / 64.0)
    doubler = M.affine(2.0, 0.3, M.Interval(-1.0, 2.0))
    out = T.check_covering_transport(A, doubler, 1.0, 1.0 / 16.0)
    assert not out.passed
    assert out.n_image > out.n_source
    assert (out.n_source, out.n_image) == (5, 10)


def test_transport_random_triples():
    rng = random.Random(90125)
    for _ in range(40):
        n = rng.randint(2, 12)
        A = np.array(sorted(rng.uniform(-0.4, 1.4) for _ in range(n)))
        slope = rng.uniform(0.5, 3.0)
        mp = M.affine(slope, rng.uniform(-0.2, 0.2),
                      M.Interval(-3.0, 6.0))
        alpha = max(slope, 1.0 / slope) + 1e-12
        rho = rng.uniform(0.01, 0.2)
        assert T.check_covering_transport(A, mp, alpha, rho).passed


def test_transport_validates_scales():
    A = np.array([0.0, 0.5])
    ident = M.affine(1.0, 0.0, M.Interval(-1.0, 2.0))
    with pytest.raises(ValueError):
        T.check_covering_transport(A, ident, 1.0, 0.0)
    with pytest.raises(ValueError):
        T.check_covering_transport(A, ident, 0.0, 0.1)
