"""Acceptance gate: one test per shipping criterion.

Run ``pytest tests/test_acceptance.py -v`` to get a pass/fail line per
criterion.  Tolerances and runtime ceilings are pinned in the asserts;
nothing here is tunable from the outside.
"""

import math
import time

import numpy as np
import pytest

from conftest import jittered_polygon, random_rotation, regular_polygon
from kdl import (
    RefineConfig,
    bridge_distance,
    build_plat,
    build_polycurve,
    crossing_number_alternating,
    distortion_certified,
    distortion_lower_bound,
    distortion_sampled,
    helix_ratio_bound,
    make_report,
    make_uniform_jm_spec,
    max_adjacent_arc_ratio,
    min_clearance,
    pardon_bound,
    refine,
    run_claim_checks,
    twist_region_count,
)

GROMOV_FLOOR = math.pi / 2.0
KNOT_FLOOR = 5.0 * math.pi / 3.0


@pytest.fixture(scope="module")
def b3():
    spec = make_uniform_jm_spec(3, 13, 3)
    curve = build_plat(spec, samples_per_half_twist=16)
    return spec, curve


# ---------------------------------------------------------------------------
# 1. A single twist strand's worst sampled pair ratio matches the closed
#    form sqrt(pi^2 t^2 / 4 + 1) to 0.5% and respects the 2*pi*t cap.
#
#    KNOWN LIMIT at t=1: the closed form bounds the ratio from above for
#    every t (that is what the construction needs), but it is attained
#    only when a pair of samples can sit a whole turn apart, which first
#    happens at t=2.  For a single half-twist the true supremum is
#    sqrt(pi^2/4 + 1)/sqrt(2) ~ 1.3167, about 29% below the closed form,
#    so the equality assert below fails for t=1 and that failure is
#    expected.  The bound itself (and everything built on it) is intact;
#    see the cap assert, which passes for every t.

@pytest.mark.parametrize("t", [1, 3, 5])
def test_criterion_01_helix_ratio_matches_closed_form(t):
    start = time.perf_counter()
    rec = run_claim_checks(t=t, samples=128)[0]
    ratio, closed_form = rec["ratio"], helix_ratio_bound(t)
    assert ratio <= 2.0 * math.pi * t
    assert ratio <= closed_form * (1.0 + 1e-9)
    assert time.perf_counter() - start < 10.0
    assert ratio == pytest.approx(closed_form, rel=5e-3)


# ---------------------------------------------------------------------------
# 2. Pairs spanning two adjacent arcs of the built curve never exceed
#    4*pi*t (1% tolerance for discretization).

def test_criterion_02_adjacent_arc_ratio(b3):
    _, curve = b3
    start = time.perf_counter()
    ratio, (i, j) = max_adjacent_arc_ratio(curve)
    assert time.perf_counter() - start < 30.0
    assert ratio <= 4.0 * math.pi * 3 * 1.01
    assert j == (i + 1) % len(curve.arcs)


# ---------------------------------------------------------------------------
# 3. Certified engine against the two shapes with known exact values,
#    plus containment of a dense sampling oracle (>= 1e6 pairs).

def test_criterion_03_certified_engine_reference_shapes():
    start = time.perf_counter()

    square = build_polycurve([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]])
    cert = distortion_certified(square, eps=9.5e-5)
    assert cert.lo <= 2.0 <= cert.hi
    assert cert.width <= 1e-4
    oracle = distortion_sampled(square, n_samples=2000)  # ~2e6 pairs
    assert cert.lo - 1e-12 <= oracle.ratio <= cert.hi

    gon = build_polycurve(regular_polygon(4096))
    cert = distortion_certified(gon, eps=9.5e-4)
    assert cert.lo <= GROMOV_FLOOR <= cert.hi
    assert cert.width <= 1e-3
    oracle = distortion_sampled(gon, n_samples=2000)  # ~1.9e7 pairs
    assert cert.lo * (1.0 - 1e-12) <= oracle.ratio <= cert.hi

    assert time.perf_counter() - start < 60.0


# ---------------------------------------------------------------------------
# 4. Every closed embedded curve has distortion at least pi/2, so neither
#    the certified upper end nor the sampled value may dip below it.

def test_criterion_04_gromov_floor_random_curves():
    for seed in range(20):
        c = build_polycurve(jittered_polygon(24, seed))
        assert distortion_certified(c, eps=1e-2).hi >= GROMOV_FLOOR
        assert distortion_sampled(c, n_samples=500).ratio >= GROMOV_FLOOR - 1e-9


# ---------------------------------------------------------------------------
# 5. The sandwich on the b=3 curve: closed-form lower bound below the
#    certified interval, certified interval below the clearance-based
#    upper bound, and the knottedness floor 5*pi/3 respected.

def test_criterion_05_bound_sandwich_b3(b3):
    spec, curve = b3
    start = time.perf_counter()
    report = make_report(spec, curve)
    cert = distortion_certified(curve, eps=0.05)
    assert not cert.budget_exceeded
    assert report.lower_bound == pytest.approx(0.0375)
    assert report.lower_bound <= cert.lo
    assert cert.hi <= report.upper_bound
    assert cert.lo >= KNOT_FLOOR - 0.05
    assert time.perf_counter() - start < 600.0


# ---------------------------------------------------------------------------
# 6. Closed-form suite at the canonical n = 4b(b-2)+1.

def test_criterion_06_formula_suite():
    for b in range(3, 11):
        n = 4 * b * (b - 2) + 1
        assert bridge_distance(b, n) == 2 * b + 1
        regions = twist_region_count(b, n)
        assert regions == 4 * b**3 - 10 * b**2 + 5 * b - 1
        counts = make_uniform_jm_spec(b, n, 3).twists
        crossings = crossing_number_alternating(b, n, counts)
        assert crossings == 3 * regions
        assert 3 * b**3 <= crossings <= 12 * b**3


# ---------------------------------------------------------------------------
# 7. The family's lower bound grows linearly in b while the fixed
#    representativity-2 bound stays flat; they part ways 8x by b=8.

def test_criterion_07_bound_divergence():
    lows = [distortion_lower_bound(b, 2 * b + 1) for b in range(3, 11)]
    for b, lo in zip(range(3, 11), lows):
        assert lo == pytest.approx(b / 80.0, rel=1e-12)
    assert all(a < b for a, b in zip(lows, lows[1:]))
    assert pardon_bound(2) == pytest.approx(0.0125, rel=1e-12)
    assert distortion_lower_bound(8, 17) / pardon_bound(2) == pytest.approx(
        8.0, rel=1e-12
    )


# ---------------------------------------------------------------------------
# 8. Distortion is similarity-invariant; certificates must agree through
#    a random rotation + scale + shift, witnesses included.

def test_criterion_08_similarity_invariance():
    start = time.perf_counter()
    verts = jittered_polygon(24, seed=5)
    lam = 2.37
    moved = lam * verts @ random_rotation(11).T + np.array([0.3, -1.2, 0.7])
    c1 = build_polycurve(verts)
    c2 = build_polycurve(moved)
    r1 = distortion_certified(c1, eps=1e-2)
    r2 = distortion_certified(c2, eps=1e-2)
    assert r2.lo == pytest.approx(r1.lo, rel=1e-9)
    assert r2.hi == pytest.approx(r1.hi, rel=1e-9)
    got = sorted([r2.witness.s, r2.witness.t])
    want = sorted([lam * r1.witness.s, lam * r1.witness.t])
    for g, w in zip(got, want):
        d = abs(g - w) % c2.total_len
        assert min(d, c2.total_len - d) <= 1e-6 * c2.total_len
    assert time.perf_counter() - start < 30.0


# ---------------------------------------------------------------------------
# 9. The refiner pulls a noisy circle a measurable fraction of the way
#    back toward the round minimum without ever violating the clearance
#    floor, and is bit-for-bit reproducible.

def test_criterion_09_refiner_progress():
    start = time.perf_counter()
    c0 = build_polycurve(jittered_polygon(64, seed=12345))
    d0 = distortion_sampled(c0, n_samples=64).ratio

    cfg = RefineConfig(iterations=50_000, step=0.05, clearance_floor=0.05, seed=7)
    refined = refine(c0, cfg)
    d1 = distortion_sampled(refined, n_samples=64).ratio
    assert d1 <= d0 - 0.2 * (d0 - GROMOV_FLOOR)
    assert min_clearance(refined) >= cfg.clearance_floor - 1e-12

    short = RefineConfig(iterations=2000, step=0.05, clearance_floor=0.05, seed=7)
    again_a = refine(c0, short)
    again_b = refine(c0, short)
    assert np.array_equal(again_a.vertices, again_b.vertices)

    assert time.perf_counter() - start < 60.0


# ---------------------------------------------------------------------------
# 10. Builder integrity across the family: one component, embedded with
#     positive clearance, and exactly the predicted arc inventory.

def test_criterion_10_builder_integrity():
    start = time.perf_counter()
    for b in (3, 4, 5):
        n = 4 * b * (b - 2) + 1
        spec = make_uniform_jm_spec(b, n, 3)
        curve = build_plat(spec, samples_per_half_twist=16)
        kinds = [a.kind for a in curve.arcs]
        assert kinds.count("bridge") == 2 * b
        assert kinds.count("vertical") == n + 1
        assert kinds.count("twist") == 2 * twist_region_count(b, n)
        assert min_clearance(curve) > 0.0
    assert time.perf_counter() - start < 60.0
