"""Metric distortion of closed polygonal curves.

The quantity of interest is the supremum over point pairs of
(shorter-way arclength) / (chord length).  Three estimators live here:

* :func:`distortion_sampled` -- a plain sampled maximum, fast, always a
  lower bound on the true supremum;
* :func:`cell_upper_bound` -- a rigorous upper bound for the restriction
  of the ratio to a product of two parameter intervals, each inside a
  single edge;
* :func:`distortion_certified` -- branch and bound over edge-interval
  cells, returning an interval [lo, hi] guaranteed to contain the true
  supremum, with hi - lo <= eps unless the cell budget runs out.

Pairs on the same edge or on two edges sharing a vertex never enter the
cell queue: for straight segments the ratio there is maximized at the
shared corner in the equal-arm limit, where it equals
:func:`corner_ratio` of the interior angle, and that value is both
added to the upper bound and realized (up to rounding) by explicit
near-corner sample pairs, so the analytic bound is tight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCurve, NotEmbedded, OutOfRange
from .geom import PolyCurve, _min_clearance_pair, _points_at, _seg_seg_dist

__all__ = [
    "WitnessPair",
    "DistortionCertificate",
    "corner_ratio",
    "helix_ratio_bound",
    "distortion_sampled",
    "cell_upper_bound",
    "distortion_certified",
    "max_pair_ratio_open",
]

_CHUNK = 2_000_000
_CHORD_FLOOR = 1e-12


@dataclass(frozen=True)
class WitnessPair:
    """A concrete pair of curve parameters and the ratio they achieve."""

    s: float
    t: float
    ratio: float

    def to_json(self) -> dict:
        return {"s": self.s, "t": self.t, "ratio": self.ratio}


@dataclass(frozen=True)
class DistortionCertificate:
    """Output of the certified engine.

    ``lo`` is achieved by ``witness``; ``hi`` is a rigorous upper bound
    for the supremum.  ``cells`` counts every cell whose upper bound was
    evaluated (initial grid plus all bisection children).  When
    ``budget_exceeded`` is set the interval is still valid but may be
    wider than ``eps``.
    """

    lo: float
    hi: float
    eps: float
    witness: WitnessPair
    cells: int
    budget_exceeded: bool

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_json(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "eps": self.eps,
            "witness": self.witness.to_json(),
            "cells": self.cells,
            "budget_exceeded": self.budget_exceeded,
        }


def corner_ratio(phi: float) -> float:
    """Worst arclength/chord ratio near a corner with interior angle phi.

    For two straight edges meeting at angle phi, points at equal small
    arm lengths a on either side have path length 2a through the corner
    and chord 2*a*sin(phi/2), so the ratio is 1/sin(phi/2) independent of
    a; unequal arms only do worse.  phi must lie in (0, pi]; a flat
    vertex gives exactly 1.0.
    """
    if not (0.0 <= phi <= math.pi):
        raise OutOfRange(f"interior angle {phi!r} outside [0, pi]")
    if phi < 1e-15:
        return math.inf
    return 1.0 / math.sin(0.5 * phi)


def helix_ratio_bound(t) -> float:
    """Closed-form distortion ceiling for one coupled strand.

    A strand winding t half-turns at radius 1/2 while climbing unit
    height has length sqrt((pi*t/2)^2 + 1); the worst pair on it is the
    two ends of a half-turn, giving ratio sqrt((pi*t/2)^2 + 1) overall.
    """
    t = abs(int(t))
    if t < 1:
        raise OutOfRange("half-twist count must be a nonzero integer")
    return math.sqrt((math.pi * t / 2.0) ** 2 + 1.0)


def _pair_ratios(c: PolyCurve, s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Ratio for parameter arrays; pairs with chord below the floor get 0."""
    p = _points_at(c, s)
    q = _points_at(c, t)
    chord = np.linalg.norm(p - q, axis=-1)
    d = np.abs(s - t)
    arc = np.minimum(d, c.total_len - d)
    ok = chord >= _CHORD_FLOOR
    return np.where(ok, arc / np.where(ok, chord, 1.0), 0.0)


def _pair_blocks(n: int, k: int):
    """Index blocks (i, j) covering the triangle j >= i + k, at most
    ~_CHUNK pairs per block.

    Never materializes the full pair list: for tens of thousands of
    parameters the n^2/2 index pair array alone would not fit in memory.
    """
    rows = max(1, _CHUNK // max(n, 1))
    for r0 in range(0, max(n - k, 0), rows):
        r1 = min(r0 + rows, n - k)
        ii = [np.full(n - i - k, i) for i in range(r0, r1)]
        jj = [np.arange(i + k, n) for i in range(r0, r1)]
        yield np.concatenate(ii), np.concatenate(jj)


def distortion_sampled(c: PolyCurve, n_samples: int = 1024) -> WitnessPair:
    """Maximum ratio over all pairs drawn from a fixed sample set.

    The sample set is the curve's vertices plus ``n_samples`` points
    equally spaced in arclength.  The result is always a lower bound on
    the true distortion; the returned witness reproduces its ratio
    through the scalar evaluation path.
    """
    if n_samples < 0:
        raise OutOfRange("n_samples must be nonnegative")
    params = np.concatenate(
        [c.cum_len[: c.m], np.arange(n_samples) * (c.total_len / max(n_samples, 1))]
    )
    params = params[params < c.total_len]
    n = len(params)
    if n < 2:
        raise DegenerateCurve("not enough sample points for a pair")
    best = -1.0
    bs = bt = 0.0
    for ii, jj in _pair_blocks(n, 1):
        ss = params[ii]
        tt = params[jj]
        r = _pair_ratios(c, ss, tt)
        k = int(np.argmax(r))
        if r[k] > best:
            best = float(r[k])
            bs, bt = float(ss[k]), float(tt[k])
    if best <= 0.0:
        raise DegenerateCurve("every sampled pair was chord-degenerate")
    return WitnessPair(s=bs, t=bt, ratio=best)


def _subsegment_endpoints(c: PolyCurve, edge: np.ndarray, a: np.ndarray, b: np.ndarray):
    """Points at params a and b, both known to lie on ``edge``."""
    base = c.vertices[edge]
    dirs = c.edge_dirs[edge]
    p0 = base + (a - c.cum_len[edge])[:, None] * dirs
    p1 = base + (b - c.cum_len[edge])[:, None] * dirs
    return p0, p1


def _cell_upper(c: PolyCurve, ei, ej, s0, s1, t0, t1) -> np.ndarray:
    """Vectorized sup bound for cells; intervals assumed ordered s1 <= t0
    along the loop (callers normalize).  Touching or overlapping
    subsegments give +inf."""
    L = c.total_len
    fwd_max = t1 - s0
    fwd_min = t0 - s1
    num = np.minimum(np.minimum(fwd_max, L - fwd_min), 0.5 * L)
    a0, a1 = _subsegment_endpoints(c, ei, s0, s1)
    b0, b1 = _subsegment_endpoints(c, ej, t0, t1)
    den = _seg_seg_dist(a0, a1 - a0, b0, b1 - b0)
    out = np.full_like(num, math.inf)
    pos = den > 0.0
    out[pos] = num[pos] / den[pos]
    return out


def cell_upper_bound(c: PolyCurve, interval_i, interval_j) -> float:
    """Rigorous sup bound of the ratio over one pair of parameter
    intervals, each contained in a single edge.

    The arclength numerator is the exact supremum of the shorter-way
    distance over the cell (capped at half the total length); the
    denominator is the exact minimum distance between the two
    subsegments.  Intervals that touch or overlap give +inf.
    """
    a0, a1 = (float(v) for v in interval_i)
    b0, b1 = (float(v) for v in interval_j)
    L = c.total_len
    for lo_, hi_ in ((a0, a1), (b0, b1)):
        if not (0.0 <= lo_ < hi_ <= L):
            raise OutOfRange(
                f"interval [{lo_!r}, {hi_!r}] is not an increasing pair inside [0, {L!r}]"
            )
    if a0 > b0:
        a0, a1, b0, b1 = b0, b1, a0, a1
    ea = int(np.searchsorted(c.cum_len, a0, side="right") - 1)
    eb = int(np.searchsorted(c.cum_len, b0, side="right") - 1)
    ea = min(ea, c.m - 1)
    eb = min(eb, c.m - 1)
    if a1 > c.cum_len[ea + 1] + 1e-9 * L or b1 > c.cum_len[eb + 1] + 1e-9 * L:
        raise OutOfRange("each interval must stay within a single edge")
    if a1 > b0:  # overlap: shared points, denominator is zero
        return math.inf
    val = _cell_upper(
        c,
        np.array([ea]),
        np.array([eb]),
        np.array([a0]),
        np.array([a1]),
        np.array([b0]),
        np.array([b1]),
    )
    return float(val[0])


def max_pair_ratio_open(points):
    """Max (path length along an OPEN polyline) / chord over vertex pairs.

    Used for strand-level checks where the path between two points is
    forced to stay inside one arc assembly.  Returns (ratio, i, j).
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[1] != 3 or len(P) < 2:
        raise DegenerateCurve("need an (n, 3) array with n >= 2")
    seg = np.linalg.norm(P[1:] - P[:-1], axis=1)
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    iu, ju = np.triu_indices(len(P), k=1)
    chord = np.linalg.norm(P[ju] - P[iu], axis=1)
    arc = cum[ju] - cum[iu]
    ok = chord >= _CHORD_FLOOR
    ratio = np.where(ok, arc / np.where(ok, chord, 1.0), 0.0)
    k = int(np.argmax(ratio))
    return float(ratio[k]), int(iu[k]), int(ju[k])


# ---------------------------------------------------------------------------
# Certified branch and bound


def _initial_vertex_scan(c: PolyCurve):
    """Best ratio over all vertex pairs plus equal-arm near-corner pairs.

    Vertex pairs seed the lower bound with every cell corner of the
    initial grid.  The near-corner pairs realize (to rounding) the
    analytic corner bound at each vertex, which keeps the corner term
    from dominating the reported interval.
    """
    m, L = c.m, c.total_len
    params = c.cum_len[:m]
    best, bs, bt = -1.0, 0.0, 0.0
    for ii, jj in _pair_blocks(m, 1):
        ss = params[ii]
        tt = params[jj]
        r = _pair_ratios(c, ss, tt)
        k = int(np.argmax(r))
        if r[k] > best:
            best, bs, bt = float(r[k]), float(ss[k]), float(tt[k])
    arm = 0.5 * np.minimum(np.minimum(np.roll(c.edge_lens, 1), c.edge_lens), 0.25 * L)
    ss = params - arm
    ss[ss < 0.0] += L
    tt = params + arm  # arm <= edge length / 2 < L - params[i] for i < m
    r = _pair_ratios(c, ss, tt)
    k = int(np.argmax(r))
    if r[k] > best:
        best, bs, bt = float(r[k]), float(ss[k]), float(tt[k])
    return best, bs, bt


def _corner_sup(c: PolyCurve) -> float:
    """Sup of the ratio over all same-edge and adjacent-edge pairs.

    Same-edge pairs have ratio exactly 1.  For adjacent edges with
    interior angle phi at the shared vertex, path <= a + b and
    chord >= (a + b) * sin(phi/2) for arm lengths a, b, so the corner
    ratio dominates the whole cell; no such cell is ever queued.
    """
    angles = [corner_ratio(_interior_angle_fast(c, i)) for i in range(c.m)]
    return max(angles)


def _interior_angle_fast(c: PolyCurve, i: int) -> float:
    a = c.vertices[i - 1] - c.vertices[i]
    b = c.vertices[(i + 1) % c.m] - c.vertices[i]
    cross = np.linalg.norm(np.cross(a, b))
    return math.atan2(cross, float(np.dot(a, b)))


def distortion_certified(
    c: PolyCurve, eps: float = 1e-2, max_expansions: int = 5_000_000
) -> DistortionCertificate:
    """Interval certification of the distortion by branch and bound.

    The initial cells are all unordered pairs of edges sharing no vertex,
    each taken as a full parameter rectangle.  A cell whose upper bound
    is at most lo + eps is discarded; survivors are bisected along their
    longer parameter side, and the fresh corner/midpoint pairs feed the
    sampled lower bound.  On normal termination the reported interval is
    [lo, max(lo + eps, analytic corner sup)], which always contains the
    true supremum.  ``max_expansions`` caps the number of bisections;
    when it trips, surviving cells widen ``hi`` accordingly and
    ``budget_exceeded`` is set.

    Raises NotEmbedded when two vertex-disjoint edges touch, since the
    ratio is then unbounded.
    """
    if not (eps > 0.0) or not math.isfinite(eps):
        raise OutOfRange(f"eps must be a positive finite number, got {eps!r}")
    if max_expansions < 0:
        raise OutOfRange("max_expansions must be nonnegative")
    clear, ci, cj = _min_clearance_pair(c)
    if clear <= 0.0:
        raise NotEmbedded(
            f"edges {ci} and {cj} touch or cross; distortion is unbounded"
        )
    m, L = c.m, c.total_len

    lo, ws, wt = _initial_vertex_scan(c)
    corner_hi = _corner_sup(c)
    floor_pruned_hi = 0.0

    # initial cell grid: unordered non-adjacent edge pairs, chunked
    cells = None
    cells_seen = 0
    if m >= 4:
        survivors = []
        for ii, jj in _pair_blocks(m, 2):
            wrap = (ii == 0) & (jj == m - 1)  # adjacent through the seam
            if wrap.any():
                ii, jj = ii[~wrap], jj[~wrap]
            cells_seen += len(ii)
            s0 = c.cum_len[ii]
            s1 = c.cum_len[ii + 1]
            t0 = c.cum_len[jj]
            t1 = c.cum_len[jj + 1]
            u = _cell_upper(c, ii, jj, s0, s1, t0, t1)
            alive = u > lo + eps
            survivors.append(
                (ii[alive], jj[alive], s0[alive], s1[alive], t0[alive], t1[alive], u[alive])
            )
        cells = tuple(np.concatenate(parts) for parts in zip(*survivors))

    expansions = 0
    budget_exceeded = False
    while cells is not None and len(cells[0]) > 0:
        ei, ej, s0, s1, t0, t1, _u = cells
        n = len(ei)
        if expansions + n > max_expansions:
            budget_exceeded = True
            break
        expansions += n

        span_s = s1 - s0
        span_t = t1 - t0
        split_s = span_s >= span_t
        smid = 0.5 * (s0 + s1)
        tmid = 0.5 * (t0 + t1)

        # fresh sample pairs: the two new child corners and the center
        samp_s = np.concatenate(
            [
                np.where(split_s, smid, s0),
                np.where(split_s, smid, s1),
                smid,
            ]
        )
        samp_t = np.concatenate(
            [
                np.where(split_s, t0, tmid),
                np.where(split_s, t1, tmid),
                tmid,
            ]
        )
        r = _pair_ratios(c, samp_s, samp_t)
        k = int(np.argmax(r))
        if r[k] > lo:
            lo = float(r[k])
            ws, wt = float(samp_s[k]), float(samp_t[k])

        child_ei = np.concatenate([ei, ei])
        child_ej = np.concatenate([ej, ej])
        child_s0 = np.concatenate([s0, np.where(split_s, smid, s0)])
        child_s1 = np.concatenate([np.where(split_s, smid, s1), s1])
        child_t0 = np.concatenate([t0, np.where(split_s, t0, tmid)])
        child_t1 = np.concatenate([np.where(split_s, t1, tmid), t1])
        cells_seen += 2 * n

        u = _cell_upper(c, child_ei, child_ej, child_s0, child_s1, child_t0, child_t1)
        alive = u > lo + eps
        # guard against float-resolution stalls: a cell too small to split
        # meaningfully is retired into the upper bound instead
        res = 1e-13 * L
        stuck = alive & (child_s1 - child_s0 < res) & (child_t1 - child_t0 < res)
        if np.any(stuck):
            floor_pruned_hi = max(floor_pruned_hi, float(u[stuck].max()))
            alive &= ~stuck
        cells = (
            child_ei[alive],
            child_ej[alive],
            child_s0[alive],
            child_s1[alive],
            child_t0[alive],
            child_t1[alive],
            u[alive],
        )

    hi = max(lo + eps, corner_hi, floor_pruned_hi)
    if budget_exceeded and cells is not None and len(cells[0]) > 0:
        hi = max(hi, float(cells[6].max()))
    witness = WitnessPair(s=ws, t=wt, ratio=lo)
    return DistortionCertificate(
        lo=lo,
        hi=hi,
        eps=eps,
        witness=witness,
        cells=cells_seen,
        budget_exceeded=budget_exceeded,
    )
