"""Closed polygonal space curves and the metric primitives built on them.

Everything downstream (the distortion engine, the plat builder, the
refiner) works with one concrete object: a closed polyline in R^3 with an
arclength parametrization.  Vertices are an (m, 3) float64 array;
parameters live in the half-open interval [0, L) where L is the total
length.

Conventions
-----------
* edge k joins vertex k to vertex (k + 1) % m
* ``cum_len`` has m + 1 entries, ``cum_len[0] == 0``, ``cum_len[m] == L``
* parameters are never wrapped implicitly -- values outside [0, L) raise
  :class:`~kdl.errors.OutOfRange`.  :func:`wrap_param` is the one
  documented place that reduces mod L.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCurve, OutOfRange

__all__ = [
    "Point3",
    "PolyCurve",
    "build_polycurve",
    "point_at",
    "wrap_param",
    "arclength_distance",
    "chord_distance",
    "interior_angle",
    "segment_min_distance",
    "min_clearance",
    "curve_to_json",
    "curve_from_json",
    "load_curve",
    "save_curve",
]

# Exact all-pairs clearance below this vertex count; spatial grid above.
_BRUTE_CLEARANCE_LIMIT = 700


@dataclass(frozen=True)
class Point3:
    """A point in R^3.  Thin wrapper so public signatures stay readable."""

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @staticmethod
    def from_array(a) -> "Point3":
        return Point3(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class PolyCurve:
    """A closed polyline with cached arclength data.

    Construct through :func:`build_polycurve`, which validates and
    precomputes; the constructor itself trusts its inputs.  ``arcs`` is
    an optional tuple of tag objects attached by the plat builder; the
    geometry code treats them as opaque.
    """

    vertices: np.ndarray
    cum_len: np.ndarray
    total_len: float
    edge_dirs: np.ndarray   # unit vectors, shape (m, 3)
    edge_lens: np.ndarray   # shape (m,)
    arcs: tuple = field(default=())

    def __post_init__(self):
        self.vertices.setflags(write=False)
        self.cum_len.setflags(write=False)
        self.edge_dirs.setflags(write=False)
        self.edge_lens.setflags(write=False)

    @property
    def m(self) -> int:
        return len(self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)


def _as_vertex_array(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=float)
    else:
        rows = []
        for p in points:
            if isinstance(p, Point3):
                rows.append([p.x, p.y, p.z])
            else:
                rows.append([float(p[0]), float(p[1]), float(p[2])])
        arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise DegenerateCurve(f"expected an (m, 3) vertex array, got shape {arr.shape}")
    return arr


def build_polycurve(points, arcs=()) -> PolyCurve:
    """Validate a closed vertex loop and precompute its arclength tables.

    Consecutive exact-duplicate vertices are dropped (including a
    duplicated first/last vertex).  After deduplication the loop needs at
    least 3 vertices, all coordinates finite, and every edge strictly
    shorter than half the total length; otherwise DegenerateCurve.
    """
    arr = _as_vertex_array(points)
    if not np.all(np.isfinite(arr)):
        raise DegenerateCurve("vertex coordinates must be finite")
    if len(arr) >= 2 and np.array_equal(arr[0], arr[-1]):
        arr = arr[:-1]
    if len(arr) >= 2:
        keep = np.ones(len(arr), dtype=bool)
        same = np.all(arr[1:] == arr[:-1], axis=1)
        keep[1:] = ~same
        arr = arr[keep]
    if len(arr) < 3:
        raise DegenerateCurve(
            f"a closed curve needs at least 3 distinct vertices, got {len(arr)}"
        )
    deltas = np.roll(arr, -1, axis=0) - arr
    lens = np.linalg.norm(deltas, axis=1)
    total = float(lens.sum())
    worst = int(np.argmax(lens))
    if lens[worst] >= 0.5 * total:
        raise DegenerateCurve(
            f"edge {worst} has length {lens[worst]:.6g} >= half the total "
            f"length {total:.6g}; the loop is metrically degenerate"
        )
    cum = np.zeros(len(arr) + 1)
    np.cumsum(lens, out=cum[1:])
    cum[-1] = total  # guard against rounding drift in the last entry
    dirs = deltas / lens[:, None]
    return PolyCurve(
        vertices=arr.copy(),
        cum_len=cum,
        total_len=total,
        edge_dirs=dirs,
        edge_lens=lens,
        arcs=tuple(arcs),
    )


def _check_params(c: PolyCurve, s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    bad = (s < 0.0) | (s >= c.total_len) | ~np.isfinite(s)
    if np.any(bad):
        val = float(np.atleast_1d(s)[np.argmax(np.atleast_1d(bad))])
        raise OutOfRange(
            f"parameter {val!r} outside [0, {c.total_len!r}); use wrap_param() "
            "to reduce mod the total length first"
        )
    return s


def _points_at(c: PolyCurve, s: np.ndarray) -> np.ndarray:
    """Vectorized evaluation; assumes parameters already validated."""
    k = np.searchsorted(c.cum_len, s, side="right") - 1
    # s == some cum_len entry lands exactly on a vertex; searchsorted can
    # only overshoot past m-1 through float dust on the last edge
    k = np.clip(k, 0, c.m - 1)
    local = s - c.cum_len[k]
    return c.vertices[k] + local[..., None] * c.edge_dirs[k]


def point_at(c: PolyCurve, s: float) -> Point3:
    """Point at arclength parameter ``s`` in [0, total_len)."""
    s = _check_params(c, float(s))
    return Point3.from_array(_points_at(c, np.atleast_1d(s))[0])


def wrap_param(c: PolyCurve, s: float) -> float:
    """Reduce an arbitrary finite parameter into [0, total_len)."""
    if not math.isfinite(s):
        raise OutOfRange(f"cannot wrap non-finite parameter {s!r}")
    out = math.fmod(float(s), c.total_len)
    if out < 0.0:
        out += c.total_len
    if out >= c.total_len:  # fmod dust, e.g. s = -1e-18
        out = 0.0
    return out


def arclength_distance(c: PolyCurve, s: float, t: float) -> float:
    """Shorter-way-around distance between two parameters on the loop."""
    st = _check_params(c, np.array([s, t], dtype=float))
    d = abs(float(st[0]) - float(st[1]))
    return min(d, c.total_len - d)


def chord_distance(c: PolyCurve, s: float, t: float) -> float:
    """Straight-line (ambient) distance between the two curve points."""
    st = _check_params(c, np.array([s, t], dtype=float))
    p = _points_at(c, st)
    return float(np.linalg.norm(p[0] - p[1]))


def interior_angle(c: PolyCurve, i: int) -> float:
    """Angle at vertex i between its two incident edges, in (0, pi].

    pi means the vertex is flat (collinear neighbours); small values mean
    a sharp corner.
    """
    if not (0 <= i < c.m):
        raise OutOfRange(f"vertex index {i} outside 0..{c.m - 1}")
    a = c.vertices[i - 1] - c.vertices[i]
    b = c.vertices[(i + 1) % c.m] - c.vertices[i]
    cross = np.linalg.norm(np.cross(a, b))
    dot = float(np.dot(a, b))
    # atan2 is stable near both 0 and pi, unlike arccos of the normalized dot.
    # A return of exactly 0.0 only happens for a cusp (the curve doubles back
    # along itself), which downstream treats as infinitely sharp.
    return math.atan2(cross, dot)


def _dot(u, v):
    return np.einsum("...k,...k->...", u, v)


def _seg_seg_dist(p1, d1, p2, d2):
    """Minimum distance between segment batches  p1 + s*d1  and  p2 + t*d2.

    Clamped coordinate descent on the convex quadratic.  The opening move
    uses the joint interior formula, so interior minima are hit exactly;
    clamped cases settle onto their active edge within a couple of
    alternations, and each alternation is an exact 1-D minimization, so
    four rounds land on the constrained minimum to machine precision.
    Degenerate (zero-length) inputs collapse to point-segment problems.
    """
    a = _dot(d1, d1)
    e = _dot(d2, d2)
    b = _dot(d1, d2)
    r = p1 - p2
    c = _dot(d1, r)
    f = _dot(d2, r)
    denom = a * e - b * b
    tiny = 1e-300
    safe_denom = np.where(denom > tiny, denom, 1.0)
    s = np.where(denom > tiny, np.clip((b * f - c * e) / safe_denom, 0.0, 1.0), 0.0)
    safe_a = np.where(a > tiny, a, 1.0)
    safe_e = np.where(e > tiny, e, 1.0)
    t = np.zeros_like(s)
    for _ in range(4):
        t = np.clip((b * s + f) / safe_e, 0.0, 1.0)
        t = np.where(e > tiny, t, 0.0)
        s = np.clip((b * t - c) / safe_a, 0.0, 1.0)
        s = np.where(a > tiny, s, 0.0)
    t = np.clip((b * s + f) / safe_e, 0.0, 1.0)
    t = np.where(e > tiny, t, 0.0)
    diff = (p1 + s[..., None] * d1) - (p2 + t[..., None] * d2)
    return np.sqrt(_dot(diff, diff))


def segment_min_distance(a0, a1, b0, b1) -> float:
    """Minimum distance between segments [a0, a1] and [b0, b1].

    Accepts Point3, tuples, or arrays.  Exact for parallel, collinear,
    touching and degenerate inputs.
    """

    def conv(p):
        if isinstance(p, Point3):
            return p.as_array()
        return np.asarray(p, dtype=float)

    a0, a1, b0, b1 = conv(a0), conv(a1), conv(b0), conv(b1)
    return float(
        _seg_seg_dist(
            a0[None, :], (a1 - a0)[None, :], b0[None, :], (b1 - b0)[None, :]
        )[0]
    )


def _clearance_brute(c: PolyCurve):
    m = c.m
    if m < 4:
        return math.inf, -1, -1
    iu, ju = np.triu_indices(m, k=2)
    keep = ~((iu == 0) & (ju == m - 1))
    iu, ju = iu[keep], ju[keep]
    if len(iu) == 0:
        return math.inf, -1, -1
    V = c.vertices
    D = c.edge_lens[:, None] * c.edge_dirs
    best = math.inf
    bi = bj = -1
    chunk = 2_000_000
    for lo in range(0, len(iu), chunk):
        ii, jj = iu[lo : lo + chunk], ju[lo : lo + chunk]
        d = _seg_seg_dist(V[ii], D[ii], V[jj], D[jj])
        k = int(np.argmin(d))
        if d[k] < best:
            best = float(d[k])
            bi, bj = int(ii[k]), int(jj[k])
    return best, bi, bj


def _clearance_grid(c: PolyCurve):
    """Exact clearance for big curves: bin edge midpoints on a grid whose
    cell size is a proven upper bound for the answer plus edge radii, so
    the closest eligible pair is always within one 27-neighbourhood."""
    m = c.m
    V = c.vertices
    D = c.edge_lens[:, None] * c.edge_dirs
    mids = V + 0.5 * D
    half = 0.5 * c.edge_lens
    idx = np.arange(m)
    skip = (idx + 2) % m
    upper = _seg_seg_dist(V, D, V[skip], D[skip])
    u0 = float(upper.min())
    cell = u0 + 2.0 * float(half.max()) + 1e-12
    keys = np.floor(mids / cell).astype(np.int64)
    order = np.lexsort((keys[:, 2], keys[:, 1], keys[:, 0]))
    sk = keys[order]
    bounds = np.nonzero(np.any(sk[1:] != sk[:-1], axis=1))[0] + 1
    starts = np.concatenate(([0], bounds))
    ends = np.concatenate((bounds, [m]))
    bins = {}
    for s0, e0 in zip(starts, ends):
        bins[tuple(sk[s0])] = order[s0:e0]
    offsets = [
        (dx, dy, dz)
        for dx in (-1, 0, 1)
        for dy in (-1, 0, 1)
        for dz in (-1, 0, 1)
    ]
    cand_i, cand_j = [], []
    for key, members in bins.items():
        gathered = []
        for off in offsets:
            nb = bins.get((key[0] + off[0], key[1] + off[1], key[2] + off[2]))
            if nb is not None:
                gathered.append(nb)
        others = np.concatenate(gathered)
        ii = np.repeat(members, len(others))
        jj = np.tile(others, len(members))
        m1 = jj > ii
        cand_i.append(ii[m1])
        cand_j.append(jj[m1])
    ii = np.concatenate(cand_i)
    jj = np.concatenate(cand_j)
    keep = (jj > ii + 1) & ~((ii == 0) & (jj == m - 1))
    ii, jj = ii[keep], jj[keep]
    best = math.inf
    bi = bj = -1
    chunk = 2_000_000
    for lo in range(0, len(ii), chunk):
        a, b = ii[lo : lo + chunk], jj[lo : lo + chunk]
        d = _seg_seg_dist(V[a], D[a], V[b], D[b])
        k = int(np.argmin(d))
        if d[k] < best:
            best = float(d[k])
            bi, bj = int(a[k]), int(b[k])
    return best, bi, bj


def min_clearance(c: PolyCurve) -> float:
    """Minimum distance over all pairs of edges that share no vertex.

    Returns 0.0 when such a pair touches or crosses (the curve is not
    embedded), and +inf for a triangle, which has no eligible pairs.
    """
    d, _, _ = _min_clearance_pair(c)
    return d


def _pairwise_edge_distance_matrix(c: PolyCurve) -> np.ndarray:
    """Dense (m, m) matrix of segment distances with same/adjacent edge
    entries at +inf.  Quadratic memory -- for small curves only (the
    refiner's incremental clearance tracking)."""
    m = c.m
    out = np.full((m, m), math.inf)
    if m < 4:
        return out
    V = c.vertices
    D = c.edge_lens[:, None] * c.edge_dirs
    iu, ju = np.triu_indices(m, k=2)
    keep = ~((iu == 0) & (ju == m - 1))
    iu, ju = iu[keep], ju[keep]
    d = _seg_seg_dist(V[iu], D[iu], V[ju], D[ju])
    out[iu, ju] = d
    out[ju, iu] = d
    return out


def _pair_min_over(verts: np.ndarray, D: np.ndarray, ea: int, eb: int):
    """Clearance matrix after a vertex move that changed edges ea and eb.

    Returns (updated copy, new global minimum).  Rows/columns for the two
    touched edges are recomputed against everything in one batched call;
    adjacency stays inf.
    """
    m = len(verts)
    Dnew = D.copy()
    if m < 4:
        return Dnew, math.inf
    deltas = np.roll(verts, -1, axis=0) - verts
    edges = sorted({ea % m, eb % m})
    k = len(edges)
    p1 = np.repeat(verts[edges], m, axis=0)
    d1 = np.repeat(deltas[edges], m, axis=0)
    p2 = np.tile(verts, (k, 1))
    d2 = np.tile(deltas, (k, 1))
    rows = _seg_seg_dist(p1, d1, p2, d2).reshape(k, m)
    for idx, e in enumerate(edges):
        row = rows[idx]
        row[[(e - 1) % m, e, (e + 1) % m]] = math.inf
        Dnew[e, :] = row
        Dnew[:, e] = row
    return Dnew, float(Dnew.min())


def _min_clearance_pair(c: PolyCurve):
    if c.m <= _BRUTE_CLEARANCE_LIMIT:
        return _clearance_brute(c)
    return _clearance_grid(c)


# ---------------------------------------------------------------------------
# JSON round-tripping


def curve_to_json(c: PolyCurve) -> dict:
    out = {
        "closed": True,
        "vertices": [[float(x), float(y), float(z)] for x, y, z in c.vertices],
    }
    if c.arcs:
        out["arcs"] = [tag.to_json() for tag in c.arcs]
    return out


def curve_from_json(data: dict) -> PolyCurve:
    if not isinstance(data, dict) or data.get("closed") is not True:
        raise DegenerateCurve('curve JSON must be an object with "closed": true')
    if "vertices" not in data:
        raise DegenerateCurve('curve JSON is missing "vertices"')
    arcs = ()
    if data.get("arcs"):
        from .plat import ArcTag  # deferred: geometry stays tag-agnostic

        arcs = tuple(ArcTag.from_json(d) for d in data["arcs"])
    return build_polycurve(data["vertices"], arcs=arcs)


def save_curve(c: PolyCurve, path) -> None:
    with open(path, "w") as fh:
        json.dump(curve_to_json(c), fh)
        fh.write("\n")


def load_curve(path) -> PolyCurve:
    with open(path) as fh:
        return curve_from_json(json.load(fh))
