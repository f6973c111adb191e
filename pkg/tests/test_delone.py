import math
from fractions import Fraction

import numpy as np
import pytest

from spiraldelone.contfrac import quotient
from spiraldelone.delone import (AnnulusTooSmall, UnboundedM, bounds, covering_at,
                                 covering_scan, covering_threshold, exponent_trend,
                                 hole_lower, packing_bruteforce, packing_scan,
                                 rational_gap, spiral_hole_witness, stratified_annulus)
from spiraldelone.exactreal import parse_theta
from spiraldelone.spiral import SpiralParams, nearest_index, point

GOLD = parse_theta("golden")
HALF_GOLD = SpiralParams(Fraction(1, 2), GOLD)
THIRD = SpiralParams(Fraction(1, 2), parse_theta("rat:1/3"))
ARITH = SpiralParams(Fraction(1, 2), parse_theta("cf-rule:arith"))


def test_bounds_examples():
    b = bounds(HALF_GOLD)
    assert b.M == 1 and b.certified
    assert b.packing_lower == pytest.approx(0.2391463, abs=1e-7)
    assert b.covering_upper == pytest.approx(11.3352556, abs=1e-7)
    assert bounds(SpiralParams(Fraction(1), GOLD)).packing_lower == pytest.approx(1 / math.sqrt(3))
    assert hole_lower(0.5, 50) == pytest.approx(0.1546797, abs=1e-7)
    with pytest.raises(UnboundedM):
        bounds(ARITH)


def test_rational_gap_examples():
    assert rational_gap(0.5, None, 3, 3) == pytest.approx(0.4641016, abs=1e-7)
    assert rational_gap(0.5, None, 3, 300) == pytest.approx(0.0499584, abs=1e-7)
    assert rational_gap(1.0, None, 1, 1) == pytest.approx(1.0)


@pytest.mark.parametrize("params", [HALF_GOLD, THIRD, SpiralParams(Fraction(1), GOLD),
                                    SpiralParams(Fraction(2, 3), parse_theta("surd:(0+sqrt(2))/1")),
                                    SpiralParams(Fraction(1, 2), parse_theta("cf-rule:arith"))])
def test_packing_matches_bruteforce(params):
    rep = packing_scan(params, 0.0, range(1, 1001))
    q, gap = packing_bruteforce(params, 1000, 1000)
    np.testing.assert_array_equal(rep.q, q)
    np.testing.assert_array_equal(rep.gap, gap)


def test_packing_gap_at_least_radial():
    rep = packing_scan(HALF_GOLD, 0.0, range(1, 5000))
    radial = (rep.nu + rep.q) ** 0.5 - rep.nu ** 0.5
    assert np.all(rep.gap >= radial * (1 - 1e-12))


def test_packing_empty_and_normalisations():
    rep = packing_scan(HALF_GOLD, 0.0, [])
    assert len(rep) == 0 and rep.min_n1 is None
    rep = packing_scan(SpiralParams(Fraction(1), GOLD), 0.3, range(1, 3000))
    lo, hi = np.minimum(rep.n1, rep.n2), np.maximum(rep.n1, rep.n2)
    assert np.all((lo * (1 - 1e-12) <= rep.n3) & (rep.n3 <= hi * (1 + 1e-12)))


def test_packing_golden_bound():
    rep = packing_scan(HALF_GOLD, 0.0, range(1, 10_001))
    assert rep.lower_bound == pytest.approx(0.2391463, abs=1e-7)
    assert rep.min_n1 >= rep.lower_bound - 1e-9


def test_packing_threads_identical():
    a = packing_scan(HALF_GOLD, 0.0, range(1, 50_000), threads=1)
    b = packing_scan(HALF_GOLD, 0.0, range(1, 50_000), threads=4)
    np.testing.assert_array_equal(a.q, b.q)
    np.testing.assert_array_equal(a.gap, b.gap)


def test_rational_degeneration():
    j = np.arange(1, 400)
    rep = packing_scan(THIRD, 0.0, 3 * j)
    expect = np.array([rational_gap(0.5, 0.0, 3, int(x)) for x in j])
    assert np.all(rep.q == 3)
    np.testing.assert_allclose(rep.n1, expect, rtol=1e-9)
    assert rep.n1[299] < 0.05


def test_covering_member_sample():
    z = point(HALF_GOLD, 12345).cartesian
    n, d = nearest_index(HALF_GOLD, z)
    assert n == 12345 and d < 1e-9


def test_covering_golden_bound():
    rep = covering_scan(HALF_GOLD, 0.0, (100, 1000), 2000, seed=1)
    assert rep.upper_bound == pytest.approx(11.3352556, abs=1e-7)
    assert rep.max_n2 <= rep.upper_bound + 1e-6
    np.testing.assert_array_equal(rep.dist, [nearest_index(HALF_GOLD, complex(z))[1] for z in rep.z[:50]] +
                                  list(rep.dist[50:]))


def test_covering_threshold():
    t = covering_threshold(HALF_GOLD)
    assert t == pytest.approx(376.9, abs=1.0)
    with pytest.raises(AnnulusTooSmall):
        covering_scan(HALF_GOLD, 0.0, (10, 20), 10, seed=0)
    assert covering_threshold(THIRD) is None


def test_covering_rational_grows():
    maxima = [covering_scan(THIRD, 0.0, (10.0 ** j, 2 * 10.0 ** j), 1000, seed=2).n1.max() for j in range(2, 6)]
    assert all(b > a for a, b in zip(maxima, maxima[1:]))


def test_stratified_samples():
    z = stratified_annulus(10, 20, 5000, seed=3)
    r = np.abs(z)
    assert r.min() >= 10 and r.max() <= 20
    # equal-count shells in area
    shells = np.floor((r ** 2 - 100) / 300 * 10).astype(int)
    assert np.all(np.bincount(shells, minlength=10)[:10] == 500)
    np.testing.assert_array_equal(z, stratified_annulus(10, 20, 5000, seed=3))


def test_covering_threads_identical():
    z = stratified_annulus(100, 200, 300, seed=4)
    a = covering_at(HALF_GOLD, 0.0, z, threads=1)
    b = covering_at(HALF_GOLD, 0.0, z, threads=3)
    np.testing.assert_array_equal(a.dist, b.dist)


def test_spiral_holes_arith():
    prev = 0.0
    for i in range(5, 10):
        h = spiral_hole_witness(ARITH, i)
        assert h.verified
        r = h.detail["r_i"]
        assert r >= hole_lower(0.5, quotient(ARITH.theta, i + 1))
        assert r > prev
        prev = r


def test_spiral_hole_golden():
    h = spiral_hole_witness(HALF_GOLD, 4)
    assert h.verified and h.radius > 0


@pytest.mark.parametrize("alpha, beta, stat, sign", [
    (1, 0.0, "covering", 1), (Fraction(1, 2), -1.0, "covering", 1), (Fraction(1, 2), 0.25, "packing", -1),
    (1, 0.5, "covering", 0), (Fraction(1, 2), 0.0, "packing", 0),
])
def test_exponent_trend(alpha, beta, stat, sign):
    tr = exponent_trend(SpiralParams(Fraction(alpha), GOLD), beta, stat, np.geomspace(10, 1e5, 5),
                        samples=400, seed=5)
    if sign == 0:
        assert abs(tr.slope) < 0.05
    else:
        assert sign * tr.slope > 0.1
