"""Exact algebra of one-dimensional conformal contractions.

Two closed families: affine maps x -> a*x + b and Moebius maps
x -> (p*x + q)/(r*x + s).  Both are closed under composition and
inversion, so composites along symbolic words stay in closed form and
sup-norm distances to the identity are computable exactly (endpoints
plus interior critical points).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainViolation, PoleEntersDomain, PoleProximity

# Pole-safety and domain-slack margin, as a fraction of the domain width.
POLE_MARGIN_FACTOR = 1e-6


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("interval endpoints must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self):
        return self.hi - self.lo

    def contains(self, x, slack=0.0):
        return self.lo - slack <= x <= self.hi + slack

    def inflate(self, pad):
        return Interval(self.lo - pad, self.hi + pad)


@dataclass(frozen=True)
class MapDistance:
    value: float
    argmax: float


@dataclass(frozen=True)
class ConformalMap:
    kind: str                  # "affine" | "moebius"
    params: tuple              # (a, b) | canonical (p, q, r, s)
    domain: Interval

    def margin(self):
        return POLE_MARGIN_FACTOR * self.domain.width

    def pole(self):
        """Pole location, or None when the map is (affine-)linear."""
        if self.kind == "affine":
            return None
        p, q, r, s = self.params
        if r == 0.0:
            return None
        return -s / r

    def orientation(self):
        if self.kind == "affine":
            return 1 if self.params[0] > 0 else -1
        p, q, r, s = self.params
        return 1 if p * s - q * r > 0 else -1


def affine(a, b, domain):
    if a == 0.0:
        raise ValueError("affine slope must be nonzero")
    return ConformalMap("affine", (float(a), float(b)), domain)


def moebius(p, q, r, s, domain):
    det = p * s - q * r
    if det == 0.0:
        raise ValueError("moebius matrix must be invertible")
    m = ConformalMap("moebius", _canonical(p, q, r, s), domain)
    pole = m.pole()
    if pole is not None and domain.contains(pole, slack=m.margin()):
        raise ValueError(f"pole {pole} inside domain {domain}")
    return m


def _canonical(p, q, r, s):
    """Scale so |det| = 1 and the first nonzero entry is positive."""
    det = p * s - q * r
    scale = 1.0 / math.sqrt(abs(det))
    entries = [p * scale, q * scale, r * scale, s * scale]
    for e in entries:
        if e != 0.0:
            if e < 0.0:
                entries = [-v for v in entries]
            break
    return tuple(entries)


def to_matrix(m):
    """Lift to a canonical 2x2 matrix (affine maps get bottom row (0, 1))."""
    if m.kind == "affine":
        a, b = m.params
        return _canonical(a, b, 0.0, 1.0)
    return m.params


def from_matrix(mat, domain):
    p, q, r, s = mat
    if r == 0.0 and s != 0.0:
        return affine(p / s, q / s, domain)
    return moebius(p, q, r, s, domain)


def matrix_product(m1, m2):
    a, b, c, d = m1
    e, f, g, h = m2
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def matrix_inverse(mat):
    p, q, r, s = mat
    return (s, -q, -r, p)


def _check_domain(m, x):
    slack = m.margin()
    if not m.domain.contains(x, slack=slack):
        raise DomainViolation(f"x={x} outside inflated domain {m.domain}")
    pole = m.pole()
    if pole is not None and abs(x - pole) < slack:
        raise PoleProximity(f"x={x} within {slack} of pole {pole}")


def _eval_raw(m, x):
    if m.kind == "affine":
        a, b = m.params
        return a * x + b
    p, q, r, s = m.params
    return (p * x + q) / (r * x + s)


def _deriv_raw(m, x):
    if m.kind == "affine":
        return m.params[0]
    p, q, r, s = m.params
    den = r * x + s
    return (p * s - q * r) / (den * den)


def evaluate(m, x):
    _check_domain(m, x)
    return _eval_raw(m, x)


def derivative(m, x):
    _check_domain(m, x)
    return _deriv_raw(m, x)


def compose(outer, inner):
    """Composite outer(inner(x)) on inner's domain, in closed form."""
    if outer.kind == "affine" and inner.kind == "affine":
        a1, b1 = outer.params
        a2, b2 = inner.params
        return ConformalMap("affine", (a1 * a2, a1 * b2 + b1), inner.domain)
    mat = matrix_product(to_matrix(outer), to_matrix(inner))
    p, q, r, s = mat
    if r != 0.0:
        pole = -s / r
        slack = POLE_MARGIN_FACTOR * inner.domain.width
        if inner.domain.contains(pole, slack=slack):
            raise PoleEntersDomain(f"composite pole {pole} in {inner.domain}")
        return ConformalMap("moebius", _canonical(p, q, r, s), inner.domain)
    return ConformalMap("affine", (p / s, q / s), inner.domain)


def invert_extended(m, x):
    """Global inverse: exact on f(closure of domain), C^1-linear beyond.

    Beyond the image of the closed domain the true inverse is continued
    by its tangent line at the junction, so the extension is expanding
    wherever the map contracts.
    """
    if m.kind == "affine":
        a, b = m.params
        return (x - b) / a
    jlo, jhi = m.domain.lo, m.domain.hi
    e0, e1 = _eval_raw(m, jlo), _eval_raw(m, jhi)
    if e0 <= e1:
        img_lo, img_hi, pre_lo, pre_hi = e0, e1, jlo, jhi
    else:
        img_lo, img_hi, pre_lo, pre_hi = e1, e0, jhi, jlo
    if img_lo <= x <= img_hi:
        p, q, r, s = m.params
        return (s * x - q) / (-r * x + p)
    if x > img_hi:
        edge, pre = img_hi, pre_hi
    else:
        edge, pre = img_lo, pre_lo
    return pre + (x - edge) / _deriv_raw(m, pre)


def sup_distance_to_identity(m, window):
    """Exact sup of |f(x) - x| over the window, with its location.

    Interior extrema of f(x) - x sit where Df(x) = 1; for canonical
    Moebius matrices that is (r*x + s)^2 = det, solvable only when
    det = +1.  Everything else is endpoint-attained.
    """
    slack = m.margin()
    if not (m.domain.contains(window.lo, slack=slack)
            and m.domain.contains(window.hi, slack=slack)):
        raise DomainViolation(f"window {window} outside domain {m.domain}")
    candidates = [window.lo, window.hi]
    if m.kind == "affine":
        a, b = m.params
        if a == 1.0:
            return MapDistance(abs(b), window.lo)
    else:
        p, q, r, s = m.params
        det = p * s - q * r
        if r == 0.0:
            if p / s == 1.0:
                return MapDistance(abs(q / s), window.lo)
        elif det > 0.0:
            for root in ((1.0 - s) / r, (-1.0 - s) / r):
                if window.lo < root < window.hi:
                    candidates.append(root)
    best_v, best_x = -1.0, window.lo
    for x in candidates:
        v = abs(_eval_raw(m, x) - x)
        if v > best_v:
            best_v, best_x = v, x
    return MapDistance(best_v, best_x)


def normalize(m, j_minus, j_plus):
    """Rescale the output so j_minus maps to 0 and j_plus maps to 1."""
    y0 = _eval_raw(m, j_minus)
    y1 = _eval_raw(m, j_plus)
    span = y1 - y0
    rescale = ConformalMap("affine", (1.0 / span, -y0 / span), m.domain)
    return compose(rescale, m)


def deriv_range(m, interval):
    """(inf, sup) of |Df| on the interval, exact by monotonicity.

    |Df| for a Moebius map is monotone on any interval avoiding the
    pole, so endpoint evaluation is exact; affine maps are constant.
    """
    if m.kind == "affine":
        a = abs(m.params[0])
        return a, a
    d0 = abs(_deriv_raw(m, interval.lo))
    d1 = abs(_deriv_raw(m, interval.hi))
    return min(d0, d1), max(d0, d1)


def is_identity(m, tol=1e-12):
    ident = _canonical(1.0, 0.0, 0.0, 1.0)
    return max(abs(a - b) for a, b in zip(to_matrix(m), ident)) <= tol


def maps_close(m1, m2, tol=1e-12):
    """Canonical-form equality with entrywise tolerance."""
    mat1, mat2 = to_matrix(m1), to_matrix(m2)
    direct = max(abs(a - b) for a, b in zip(mat1, mat2))
    flipped = max(abs(a + b) for a, b in zip(mat1, mat2))
    return min(direct, flipped) <= tol
