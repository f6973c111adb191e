import math

import numpy as np
import pytest

from spiraldelone.contfrac import critical_time, expand, principal, quotient
from spiraldelone.exactreal import parse_theta
from spiraldelone.scenery import (DegenerateBasis, LatticeBasis, basis_at, covering_radius,
                                  covering_radius_of, default_grid, gauss_reduce,
                                  hole_witness_lattice, lattice_vector, richards_check,
                                  sampled_covering_radius, scenery_scan, shortest_vector,
                                  snapshot)

GOLD = parse_theta("golden")
ARITH = parse_theta("cf-rule:arith")


def brute_shortest(b: LatticeBasis, R: int = 40) -> float:
    c = np.arange(-R, R + 1)
    m, n = np.meshgrid(c, c)
    v = np.outer(m.ravel(), b.b1) + np.outer(n.ravel(), b.b2)
    L = np.hypot(v[:, 0], v[:, 1])
    return float(L[L > 0].min())


def test_basis_examples():
    b = basis_at(GOLD, 1)
    assert b.b1 == pytest.approx((1.618033988749895, 1.0)) and b.b2 == (-1.0, 0.0)
    b4 = basis_at(GOLD, 4)
    assert b4.b1[0] == pytest.approx(2 * b.b1[0]) and b4.b1[1] == pytest.approx(b.b1[1] / 2)
    rng = np.random.default_rng(0)
    for _ in range(100):
        th = parse_theta(f"rat:{rng.integers(1, 10**6)}/{rng.integers(1, 10**6)}")
        assert abs(basis_at(th, float(rng.uniform(1, 1e4))).det) == pytest.approx(1, rel=1e-9)


def test_gauss_reduce_examples():
    r = gauss_reduce(LatticeBasis((1, 0), (0, 1)))
    assert (r.b1, r.b2) == ((1, 0), (0, 1))
    r = gauss_reduce(LatticeBasis((1, 0), (1, 1)))
    assert sorted(map(abs, r.b1 + r.b2)) == [0, 0, 1, 1]
    b = LatticeBasis((5, 0), (2, 0.1))
    r = gauss_reduce(b)
    assert math.hypot(*r.b1) == pytest.approx(brute_shortest(b))


def test_gauss_reduce_invariants():
    rng = np.random.default_rng(1)
    for _ in range(200):
        ang, shear, h = rng.uniform(0, 2 * np.pi), rng.uniform(-0.5, 0.5), rng.uniform(0.3, 3)
        R = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
        B0 = np.array([[1.0, 0.0], [shear, max(h, 1.0)]]) @ R.T  # reduced to begin with
        U0 = np.array([[1, rng.integers(-4, 5)], [0, 1]]) @ np.array([[1, 0], [rng.integers(-4, 5), 1]])
        v = U0 @ B0
        b = LatticeBasis(tuple(v[0]), tuple(v[1]))
        r = gauss_reduce(b)
        n1, n2, dot = np.dot(r.b1, r.b1), np.dot(r.b2, r.b2), np.dot(r.b1, r.b2)
        assert n1 <= n2 * (1 + 1e-12) and dot <= 1e-12 and abs(dot) <= n1 / 2 * (1 + 1e-12)
        U = np.array(r.transform, dtype=float)
        np.testing.assert_allclose(U @ b.vectors(), r.vectors(), atol=1e-9)
        assert abs(round(np.linalg.det(U))) == 1
        assert math.hypot(*r.b1) == pytest.approx(brute_shortest(b), rel=1e-12)


def test_degenerate_basis():
    with pytest.raises(DegenerateBasis):
        gauss_reduce(LatticeBasis((1, 2), (2, 4)))


def test_covering_radius_examples():
    assert covering_radius_of(LatticeBasis((1, 0), (0, 1))) == pytest.approx(math.sqrt(2) / 2)
    assert covering_radius_of(LatticeBasis((1, 0), (0.5, math.sqrt(3) / 2))) == pytest.approx(1 / math.sqrt(3))


def test_reduction_invariance():
    rng = np.random.default_rng(2)
    base = basis_at(GOLD, 37.5)
    s0, c0 = math.hypot(*gauss_reduce(base).b1), covering_radius_of(base)
    for _ in range(20):
        a, b = rng.integers(-5, 6, 2)
        U = np.array([[1, a], [0, 1]]) @ np.array([[1, 0], [b, 1]])
        v = U @ base.vectors()
        other = LatticeBasis(tuple(v[0]), tuple(v[1]))
        assert math.hypot(*gauss_reduce(other).b1) == pytest.approx(s0, abs=1e-12)
        assert covering_radius_of(other) == pytest.approx(c0, abs=1e-12)


def test_covering_vs_sampling_oracle():
    rng = np.random.default_rng(3)
    for t in (1.0, 3.3, 71.0, 1234.5):
        b = basis_at(GOLD, t)
        exact, sampled = covering_radius_of(b), sampled_covering_radius(b, 10_000, rng)
        assert exact - 1e-3 <= sampled <= exact + 1e-12


def test_shortest_examples():
    v, L = shortest_vector(GOLD, 1)
    assert L == pytest.approx(1) and abs(v[0]) == pytest.approx(1)
    assert math.hypot(*lattice_vector(GOLD, 2, 1, 1)) == pytest.approx(1.0704663, abs=1e-7)


def test_shortest_at_critical_time():
    for i in range(1, 15):
        c = principal(GOLD, i)
        t = float(critical_time(GOLD, i))
        witness = math.sqrt(2 * float(c.q * abs(GOLD.exact() * c.q - c.p)))
        assert math.hypot(*lattice_vector(GOLD, c.p, c.q, t)) == pytest.approx(witness)
        assert shortest_vector(GOLD, t)[1] <= witness * (1 + 1e-12)


def test_snapshot_matches_naive_basis():
    for t in (1.0, 2.0, 17.0, 400.0):
        assert snapshot(GOLD, t).covering_radius == pytest.approx(covering_radius_of(basis_at(GOLD, t)), rel=1e-9)


def test_window_golden():
    t20 = float(critical_time(GOLD, 20))
    scan = scenery_scan(GOLD, default_grid(GOLD, t20, 300))
    assert scan.min_shortest >= math.sqrt(2 / 3) - 1e-9
    assert scan.max_covering <= 3 * math.sqrt(2) + 1e-9


def test_richards_examples():
    for i, k in ((1, 1), (4, 1)):
        r = richards_check(GOLD, i, k)
        assert r.exact_zero and r.dot == 0
    assert richards_check(GOLD, 4, 1, scale=1.01).dot != 0


@pytest.mark.parametrize("spec", ["golden", "surd:(0+sqrt(2))/1", "surd:(1+sqrt(13))/2"])
def test_richards_exact(spec):
    th = parse_theta(spec)
    for i in range(21):
        for k in range(quotient(th, i + 1) + 1):
            assert richards_check(th, i, k).exact_zero


def test_richards_stream_relative():
    for i in range(1, 15):
        for k in range(quotient(ARITH, i + 1) + 1):
            assert richards_check(ARITH, i, k).relative <= 1e-12


def test_lattice_holes_arith():
    prev = 0.0
    for i in range(1, 12):
        h = hole_witness_lattice(ARITH, i)
        assert h.verified
        a_next = quotient(ARITH, i + 1)
        assert h.detail["r_i"] > math.sqrt((a_next - 1) / 4)
        assert h.radius > prev
        prev = h.radius
    h = hole_witness_lattice(ARITH, 8)
    assert quotient(ARITH, 9) == 10 and h.detail["r_i"] > 1.5


def test_lattice_hole_sampling_oracle():
    h = hole_witness_lattice(GOLD, 3)
    assert h.verified
    t = h.t
    rng = np.random.default_rng(4)
    m = rng.integers(-200, 200, 1000)
    n = rng.integers(-400, 400, 1000)
    x = (m * GOLD.exact().__float__() - n) * math.sqrt(t)
    y = m / math.sqrt(t)
    assert np.all(np.hypot(x - h.center.real, y - h.center.imag) >= h.radius * (1 - 1e-9))


def test_pow2_covering_grows():
    pow2 = parse_theta("cf-rule:pow2")
    vals = [snapshot(pow2, hole_witness_lattice(pow2, i).t).covering_radius for i in range(3, 9)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_grid_contains_critical_times():
    grid = default_grid(GOLD, 1e4, 50)
    labels = [lab for _, lab in grid if lab is not None]
    assert (0, None) in labels and len(grid) == 50 + len(labels)
    assert expand(GOLD, 3).quotients == (1, 1, 1)
