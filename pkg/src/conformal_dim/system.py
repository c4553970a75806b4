"""IFS loading, validation, and hull normalization.

A system is read from a small line-oriented config, its attractor hull
is located by iterating the hull-refinement operator, and every map is
conjugated by the affine rescale that sends the hull to [0, 1].  All
downstream modules assume that normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import maps as mp
from .errors import (
    NoFixedPointInDomain,
    NotAContraction,
    ParseError,
    PoleInDomain,
    TrivialSystem,
)

DEFAULT_EPS_NEIGHBOURHOOD = 0.05
_HULL_MAX_ITER = 2000
_HULL_TOL = 1e-14


@dataclass(frozen=True)
class ValidationReport:
    contraction_constants: tuple
    hull_before: mp.Interval
    rescale: tuple            # affine (a, b) applied to raw coordinates
    fixed_points: tuple       # in normalized coordinates
    orientation: tuple
    warnings: tuple


@dataclass(frozen=True)
class IfsSystem:
    maps: tuple
    delta: mp.Interval        # always [0, 1]
    j: mp.Interval            # eps-neighbourhood of delta
    x0: float
    x1: float
    f1_index: int
    eps_neighbourhood: float
    validation: ValidationReport

    @property
    def alphabet_size(self):
        return len(self.maps)

    @property
    def diam_ratio(self):
        """Smallest one-step cylinder diameter; the scale-grid ratio.

        Affine widths come from the slope so the grid accumulates the
        exact same float products as composite cylinder diameters.
        """
        widths = []
        for m in self.maps:
            if m.kind == "affine":
                widths.append(abs(m.params[0]) * self.delta.width)
            else:
                widths.append(abs(mp._eval_raw(m, 1.0) - mp._eval_raw(m, 0.0)))
        return min(widths)

    @property
    def c_min(self):
        return min(mp.deriv_range(m, self.delta)[0] for m in self.maps)

    def uniform_affine_slope(self):
        """Common positive slope if all maps are affine with one slope."""
        slopes = set()
        for m in self.maps:
            if m.kind != "affine":
                return None
            slopes.add(m.params[0])
        if len(slopes) == 1:
            a = slopes.pop()
            if a > 0:
                return a
        return None


def parse_config(text):
    """Parse the declarative config into map descriptions and an optional hint."""
    descs = []
    hint = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            if tokens[0] == "interval":
                if len(tokens) != 3:
                    raise ValueError("expected: interval <lo> <hi>")
                hint = mp.Interval(float(tokens[1]), float(tokens[2]))
            elif tokens[0] == "map":
                if tokens[1] == "affine" and len(tokens) == 4:
                    descs.append(("affine", (float(tokens[2]), float(tokens[3]))))
                elif tokens[1] == "moebius" and len(tokens) == 6:
                    descs.append(("moebius", tuple(float(t) for t in tokens[2:6])))
                else:
                    raise ValueError("expected: map affine <a> <b> | map moebius <p> <q> <r> <s>")
            else:
                raise ValueError(f"unknown keyword {tokens[0]!r}")
        except (ValueError, IndexError) as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    return descs, hint


def _raw_eval(desc, x):
    kind, params = desc
    if kind == "affine":
        a, b = params
        return a * x + b
    p, q, r, s = params
    den = r * x + s
    if den == 0.0:
        raise ZeroDivisionError
    return (p * x + q) / (r * x + s)


def _raw_deriv(desc, x):
    kind, params = desc
    if kind == "affine":
        return params[0]
    p, q, r, s = params
    den = r * x + s
    return (p * s - q * r) / (den * den)


def _attracting_fixed_point(desc, index):
    """Real fixed point with |Df| < 1, straight from the parameters."""
    kind, params = desc
    if kind == "affine":
        a, b = params
        if abs(a) >= 1.0:
            raise NotAContraction(index, f"slope magnitude {abs(a)} >= 1")
        return b / (1.0 - a)
    p, q, r, s = params
    if r == 0.0:
        if abs(p / s) >= 1.0:
            raise NotAContraction(index, "derivative magnitude >= 1")
        return (q / s) / (1.0 - p / s)
    # r*x^2 + (s - p)*x - q = 0
    bq = s - p
    disc = bq * bq + 4.0 * r * q
    if disc < 0.0:
        raise NoFixedPointInDomain(f"map {index}: no real fixed point")
    sq = math.sqrt(disc)
    roots = ((-bq + sq) / (2.0 * r), (-bq - sq) / (2.0 * r))
    attracting = [x for x in roots if abs(_raw_deriv(desc, x)) < 1.0]
    if not attracting:
        raise NoFixedPointInDomain(f"map {index}: no attracting fixed point")
    return attracting[0]


def _hull(descs, hint):
    """Attractor hull endpoints by iterating endpoint images.

    The hull operator I -> conv(union f_i(I)) converges from either
    side: from inside when seeded with the fixed points, from outside
    when seeded with a superset hint.
    """
    fps = [_attracting_fixed_point(desc, i) for i, desc in enumerate(descs)]
    if hint is not None:
        lo, hi = hint.lo, hint.hi
    else:
        lo, hi = min(fps), max(fps)
    if hi - lo < 1e-13:
        # all generators pinned to one point; widen so iteration can grow
        lo, hi = lo - 1e-9, hi + 1e-9
    for _ in range(_HULL_MAX_ITER):
        pts = []
        for i, desc in enumerate(descs):
            try:
                pts.append(_raw_eval(desc, lo))
                pts.append(_raw_eval(desc, hi))
            except ZeroDivisionError:
                raise PoleInDomain(i, "pole inside candidate hull") from None
        nlo, nhi = min(pts), max(pts)
        scale = max(1.0, abs(nlo), abs(nhi))
        if not (math.isfinite(nlo) and math.isfinite(nhi)):
            raise NotAContraction(-1, "hull iteration diverged")
        if abs(nlo - lo) <= _HULL_TOL * scale and abs(nhi - hi) <= _HULL_TOL * scale:
            return nlo, nhi
        lo, hi = nlo, nhi
    return lo, hi


def load_system(config_text, eps_neighbourhood=DEFAULT_EPS_NEIGHBOURHOOD):
    descs, hint = parse_config(config_text)
    if len(descs) < 2:
        raise TrivialSystem("need at least two maps")

    fps_raw = [_attracting_fixed_point(desc, i) for i, desc in enumerate(descs)]
    if max(fps_raw) - min(fps_raw) <= 1e-12 * max(1.0, abs(fps_raw[0])):
        raise TrivialSystem("all maps share the same fixed point")

    h_lo, h_hi = _hull(descs, hint)
    width = h_hi - h_lo
    if width <= 1e-12:
        raise TrivialSystem("attractor hull is a single point")
    rescale = (1.0 / width, -h_lo / width)

    eps = float(eps_neighbourhood)
    delta = mp.Interval(0.0, 1.0)
    j = mp.Interval(-eps, 1.0 + eps)

    # conjugate each map by T(x) = (x - h_lo)/width.  Affine maps stay
    # in slope/offset algebra: the slope is conjugation-invariant and
    # the matrix route would smear it through a det normalization.
    t_mat = mp._canonical(rescale[0], rescale[1], 0.0, 1.0)
    t_inv = mp.matrix_inverse(t_mat)
    normalized = []
    for i, (kind, params) in enumerate(descs):
        if kind == "affine":
            a, b = params
            offset = rescale[0] * b + rescale[1] * (1.0 - a)
            normalized.append(mp.affine(a, offset, j))
            continue
        raw_mat = mp._canonical(*params)
        mat = mp.matrix_product(mp.matrix_product(t_mat, raw_mat), t_inv)
        try:
            normalized.append(mp.from_matrix(mat, j))
        except ValueError as exc:
            raise PoleInDomain(i, str(exc)) from None

    constants = []
    orientations = []
    for i, m in enumerate(normalized):
        d_lo, d_hi = mp.deriv_range(m, j)
        if d_hi >= 1.0:
            raise NotAContraction(i, f"sup |Df| = {d_hi} on the neighbourhood")
        constants.append(d_hi)
        orientations.append(m.orientation())
        y0, y1 = mp._eval_raw(m, j.lo), mp._eval_raw(m, j.hi)
        if not (j.contains(y0, slack=1e-12) and j.contains(y1, slack=1e-12)):
            raise NotAContraction(i, "does not map the neighbourhood into itself")

    fixed_points = [fixed_point(m) for m in normalized]
    x1 = max(fixed_points)
    f1_index = fixed_points.index(x1)
    x0 = min(fixed_points)

    report = ValidationReport(
        contraction_constants=tuple(constants),
        hull_before=mp.Interval(h_lo, h_hi),
        rescale=rescale,
        fixed_points=tuple(fixed_points),
        orientation=tuple(orientations),
        warnings=(),
    )
    return IfsSystem(
        maps=tuple(normalized),
        delta=delta,
        j=j,
        x0=x0,
        x1=x1,
        f1_index=f1_index,
        eps_neighbourhood=eps,
        validation=report,
    )


def load_system_file(path, eps_neighbourhood=DEFAULT_EPS_NEIGHBOURHOOD):
    with open(path, "r", encoding="utf-8") as fh:
        return load_system(fh.read(), eps_neighbourhood)


def fixed_point(m):
    """The unique attracting fixed point inside the closed domain."""
    slack = 1e-9 * m.domain.width
    if m.kind == "affine":
        a, b = m.params
        x = b / (1.0 - a)
        if not m.domain.contains(x, slack=slack):
            raise NoFixedPointInDomain(f"fixed point {x} outside {m.domain}")
        return x
    p, q, r, s = m.params
    if r == 0.0:
        x = (q / s) / (1.0 - p / s)
        if not m.domain.contains(x, slack=slack):
            raise NoFixedPointInDomain(f"fixed point {x} outside {m.domain}")
        return x
    bq = s - p
    disc = bq * bq + 4.0 * r * q
    if disc < 0.0:
        raise NoFixedPointInDomain("no real fixed point")
    sq = math.sqrt(disc)
    in_domain = [x for x in ((-bq + sq) / (2.0 * r), (-bq - sq) / (2.0 * r))
                 if m.domain.contains(x, slack=slack)
                 and abs(mp._deriv_raw(m, x)) < 1.0]
    if not in_domain:
        raise NoFixedPointInDomain(f"no attracting fixed point in {m.domain}")
    return in_domain[0]


def attractor_sample(system, resolution, budget=None):
    """Merged union of stopping-set cylinder images at the resolution."""
    los, his = attractor_sample_arrays(system, resolution, budget)
    return [mp.Interval(lo, hi) for lo, hi in zip(los.tolist(), his.tolist())]


def attractor_sample_arrays(system, resolution, budget=None):
    from . import cylinders  # deferred: cylinders has no back-import

    if not 0.0 < resolution <= 1.0:
        raise ValueError("resolution must be in (0, 1]")
    los, his = cylinders.stopping_intervals(system, resolution, budget)
    return _merge_sorted(los, his)


def _merge_sorted(los, his):
    """Merge touching/overlapping intervals given as parallel arrays."""
    import numpy as np

    order = np.argsort(los, kind="stable")
    los, his = los[order], his[order]
    # union-sweep: a new component starts where lo exceeds the running max hi
    run_hi = np.maximum.accumulate(his)
    new_comp = np.empty(los.shape, dtype=bool)
    new_comp[0] = True
    new_comp[1:] = los[1:] > run_hi[:-1]
    starts = np.flatnonzero(new_comp)
    ends = np.empty_like(starts)
    ends[:-1] = starts[1:] - 1
    ends[-1] = los.size - 1
    return los[starts], run_hi[ends]
