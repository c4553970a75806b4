"""Bounded distortion estimates and the composition regularity checks."""

import math

import pytest

from conformal_dim import distortion as X
from conformal_dim import maps as M
from conformal_dim.errors import PreconditionNotMet


def test_affine_distortion_is_the_safety_margin(cantor):
    # derivative is constant, so the raw ratio is 1 up to float noise and
    # K is just the 5 percent inflation
    for depth in (1, 4):
        rep = X.estimate_distortion_constant(cantor, depth)
        assert math.isclose(rep.K, 1.05, rel_tol=1e-12)
        assert rep.depth == depth
    hist = X.estimate_distortion_constant(cantor, 1).ratio_histogram
    assert all(math.isclose(r, 1.0, rel_tol=1e-12) for _, r in hist)


def test_moebius_distortion_saturates_shallow(moe):
    reports = {d: X.estimate_distortion_constant(moe, d)
               for d in (2, 4, 6, 8)}
    ks = [reports[d].K for d in (2, 4, 6, 8)]
    assert math.isclose(ks[0], 1.12378581771116, rel_tol=1e-12)
    for a, b in zip(ks, ks[1:]):
        assert b >= a - 1e-15
    assert ks[3] - ks[2] <= 0.01       # stabilised well before depth 8
    assert ks[3] <= 2.0 * ks[1]
    assert reports[6].worst_word == (0,)


def test_estimate_rejects_bad_depth(cantor):
    with pytest.raises(ValueError):
        X.estimate_distortion_constant(cantor, 0)


# ---------------------------------------------------------------------------
# composition regularity fit and check

def test_fit_affine_system(cantor):
    rep = X.fit_composition_holder(cantor, 3)
    assert rep.beta == 1.0
    assert rep.C_hat == 1.0
    # safe constant is 2 K^2 C_hat with one more safety factor
    assert math.isclose(rep.C_tilde, 2.0 * 1.05 ** 3, rel_tol=1e-12)


def test_fit_moebius_worst_sample_is_shallow(moe):
    fit6 = X.fit_composition_holder(moe, 6)
    fit8 = X.fit_composition_holder(moe, 8)
    assert math.isclose(fit6.C_hat, 0.12393599440022804, rel_tol=1e-12)
    assert fit8.C_hat == fit6.C_hat
    assert math.isclose(fit6.C_tilde, 0.3286879966082592, rel_tol=1e-12)
    K = X.estimate_distortion_constant(moe, 6).K
    assert fit6.C_tilde >= 2.0 * K * K * fit6.C_hat * (1.0 - 1e-12)
    assert fit6.C_tilde <= 2.2 * K * K * fit6.C_hat
    assert fit8.samples > fit6.samples


def test_check_passes_at_fitted_constant(moe):
    fit8 = X.fit_composition_holder(moe, 8)
    out = X.check_composition_holder(moe, 8, 1.0, fit8.C_hat)
    assert out.passed
    assert math.isclose(out.max_ratio, 1.0, rel_tol=1e-12)
    # the fitted constant from a shallower sweep is the same number here
    out6 = X.check_composition_holder(moe, 6,
                                      1.0, X.fit_composition_holder(moe, 6).C_hat)
    assert out6.passed


def test_check_fails_below_the_fit_with_witness(moe):
    fit = X.fit_composition_holder(moe, 6)
    out = X.check_composition_holder(moe, 6, 1.0, fit.C_hat / 2.0)
    assert not out.passed
    assert math.isclose(out.max_ratio, 2.0, rel_tol=1e-12)
    word, x, y = out.witness
    assert isinstance(word, tuple) and len(word) >= 1
    assert moe.j.lo <= x <= moe.j.hi
    assert moe.j.lo <= y <= moe.j.hi


def test_fit_and_check_validate_inputs(cantor):
    with pytest.raises(ValueError):
        X.fit_composition_holder(cantor, 3, beta=0.0)
    with pytest.raises(ValueError):
        X.check_composition_holder(cantor, 3, 1.0, 0.0)
    with pytest.raises(ValueError):
        X.fit_composition_holder(cantor, 0)


# ---------------------------------------------------------------------------
# inverse-side check on near-identity pairs

def test_inverse_check_trivial_pair_passes(cantor):
    out = X.check_inverse_composition_holder(cantor, ((0,), (0,)),
                                             1.0, 2.31525)
    assert out.passed
    assert out.max_ratio == 0.0


def test_inverse_check_requires_nearby_pair(moe):
    # the two generators compose to a unit translation, far from the
    # identity, so the default closeness precondition rejects the pair
    with pytest.raises(PreconditionNotMet):
        X.check_inverse_composition_holder(moe, ((0,), (1,)), 1.0, 0.33)


def test_inverse_check_with_relaxed_radius(moe):
    out = X.check_inverse_composition_holder(moe, ((0,), (1,)), 1.0, 0.33,
                                             epsilon=20.0)
    assert out.passed
    assert out.max_ratio == 0.0     # translations have flat derivative


# ---------------------------------------------------------------------------

def test_cheb_grid_shape(cantor):
    g = X.cheb_grid(cantor.j, 8)
    assert len(g) == 8
    assert all(a < b for a, b in zip(g, g[1:]))
    assert g[0] >= cantor.j.lo and g[-1] <= cantor.j.hi
    # clusters toward the ends rather than spacing evenly
    assert (g[1] - g[0]) < (g[4] - g[3])
