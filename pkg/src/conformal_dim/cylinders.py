"""Symbolic words, cylinder records, and diameter-stopping sets.

A stopping set at scale b collects the first prefixes whose cylinder
image has diameter <= b; the empty word counts as diameter 1, so the
scale grid is total on (0, 1].  Two enumeration engines coexist: a
record-building depth-first walk (general, feeds the public API and the
CLI dump) and a flat numpy offset engine for systems of equal-slope
affine maps, where a level-k cylinder is fully described by its left
endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import maps as mp
from .budget import resolve_budget

DEDUP_TOL = 1e-12

Word = tuple  # of alphabet indices


def word_str(word):
    return "".join(str(s) for s in word) if word else "<empty>"


@dataclass(frozen=True)
class CylinderRecord:
    word: Word
    map: mp.ConformalMap
    image: mp.Interval
    diam: float
    deriv_lo: float
    deriv_hi: float


@dataclass(frozen=True)
class StoppingSet:
    b: float
    records: tuple
    distinct_maps: tuple


def _make_record(system, word, composite):
    e0 = mp._eval_raw(composite, 0.0)
    e1 = mp._eval_raw(composite, 1.0)
    lo, hi = (e0, e1) if e0 <= e1 else (e1, e0)
    d_lo, d_hi = mp.deriv_range(composite, system.delta)
    if composite.kind == "affine":
        # slope times base width, the same float product the scale grid
        # accumulates; endpoint subtraction would smear it by an ulp
        diam = abs(composite.params[0]) * system.delta.width
    else:
        diam = hi - lo
    return CylinderRecord(word, composite, mp.Interval(lo, hi), diam, d_lo, d_hi)


def compose_word(system, word):
    if not word:
        raise ValueError("empty word has no composite record")
    composite = system.maps[word[0]]
    for sym in word[1:]:
        composite = mp.compose(composite, system.maps[sym])
    return _make_record(system, tuple(word), composite)


def stopping_records(system, b, budget=None):
    """Depth-first stopping enumeration; lexicographic record order."""
    if not 0.0 < b <= 1.0:
        raise ValueError("stopping scale must be in (0, 1]")
    bdg = resolve_budget(budget)
    n = system.alphabet_size
    records = []
    # stack of frontier nodes, pushed in reverse so children pop in order
    stack = []
    for i in range(n - 1, -1, -1):
        stack.append(((i,), system.maps[i]))
    while stack:
        word, composite = stack.pop()
        bdg.consume()
        rec = _make_record(system, word, composite)
        if rec.diam <= b:
            records.append(rec)
        else:
            for i in range(n - 1, -1, -1):
                stack.append((word + (i,), mp.compose(composite, system.maps[i])))
    return records


def stopping_set(system, b, budget=None, dedup_tol=DEDUP_TOL):
    records = stopping_records(system, b, budget)
    return StoppingSet(b, tuple(records), tuple(distinct_maps(records, dedup_tol)))


def distinct_maps(records, tol=DEDUP_TOL):
    """First occurrences under canonical-form equality with tolerance.

    Duplicates cluster entrywise-tight in canonical form, so a sort plus
    adjacent grouping decides equality without an all-pairs scan.
    """
    if tol < 0.0:
        raise ValueError("tolerance must be nonnegative")
    if not records:
        return []
    mats = np.array([mp.to_matrix(r.map) for r in records])
    order = np.lexsort((mats[:, 3], mats[:, 2], mats[:, 1], mats[:, 0]))
    sorted_mats = mats[order]
    gaps = np.abs(np.diff(sorted_mats, axis=0)).max(axis=1)
    group_of = np.empty(len(records), dtype=np.int64)
    group_of[order] = np.concatenate(([0], np.cumsum(gaps > tol)))
    first_index = {}
    for idx, g in enumerate(group_of.tolist()):
        if g not in first_index:
            first_index[g] = idx
    keep = sorted(first_index.values())
    return [records[i].map for i in keep]


# --- flat engine for equal-slope affine systems --------------------------

def level_offsets(system, depth, budget=None):
    """Left endpoints of all level-k cylinders, k = 1..depth.

    Returns (offsets_per_level, diams_per_level).  Index order encodes
    the word in base n with the first symbol most significant, matching
    the depth-first record order.
    """
    a = system.uniform_affine_slope()
    if a is None:
        raise ValueError("flat engine needs equal-slope affine maps")
    bdg = resolve_budget(budget)
    shifts = np.array([m.params[1] for m in system.maps])
    offs = np.array([0.0])
    levels, diams = [], []
    d = 1.0
    for _ in range(depth):
        bdg.consume(offs.size * shifts.size)
        offs = (a * offs[None, :] + shifts[:, None]).ravel()
        d *= a
        levels.append(offs)
        diams.append(d)
    return levels, diams


def decode_word(index, depth, alphabet_size):
    word = []
    for _ in range(depth):
        index, sym = divmod(index, alphabet_size)
        word.append(sym)
    word.reverse()
    return tuple(word)


def stopping_intervals(system, b, budget=None):
    """(los, his) arrays of the stopping set at scale b, image order.

    Equal-slope affine systems stop at a single level, enumerated flat;
    everything else goes through the record walk.
    """
    if not 0.0 < b <= 1.0:
        raise ValueError("stopping scale must be in (0, 1]")
    a = system.uniform_affine_slope()
    if a is not None:
        depth, d = 1, a
        while d > b:
            depth += 1
            d *= a
        levels, diams = level_offsets(system, depth, budget)
        los = levels[-1]
        return los, los + diams[-1]
    records = stopping_records(system, b, budget)
    los = np.array([r.image.lo for r in records])
    his = np.array([r.image.hi for r in records])
    return los, his


def scale_grid(system, depth):
    """Geometric scale grid b_k = ratio^k by cumulative products.

    Uses the same successive multiplication as the flat engine's diams,
    so for equal-slope systems the grid values equal level diameters
    bit for bit and A_{b_k} is exactly the level-k word set.
    """
    ratio = system.diam_ratio
    out = []
    b = 1.0
    for _ in range(depth):
        b *= ratio
        out.append(b)
    return out
