"""The lattice family Lambda(t) = {((m theta - n) sqrt t, m / sqrt t)}.

Snapshots are built from the convergent pair (p_{i-1}, q_{i-1}), (p_i, q_i),
which is a unimodular basis whose coordinates can be evaluated accurately
at any t; the naive generators (theta sqrt t, 1/sqrt t), (-sqrt t, 0) lose all
precision once t is large.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .contfrac import (RationalHit, Terminated, critical_grid, critical_time,
                       intermediate, principal, quotient)
from .exactreal import QuadExt, StreamExhausted, ThetaSpec, stream_sandwich


class DegenerateBasis(ValueError):
    pass


@dataclass(frozen=True)
class LatticeBasis:
    b1: tuple[float, float]
    b2: tuple[float, float]
    transform: tuple[tuple[int, int], tuple[int, int]] = ((1, 0), (0, 1))

    @property
    def det(self) -> float:
        return self.b1[0] * self.b2[1] - self.b1[1] * self.b2[0]

    def vectors(self) -> np.ndarray:
        return np.array([self.b1, self.b2], dtype=float)


@dataclass
class LatticeSnapshot:
    t: float
    basis: LatticeBasis
    reduced: LatticeBasis
    shortest_len: float
    covering_radius: float
    label: tuple[int, int | None] | None = None


@dataclass(frozen=True)
class HoleWitness:
    center: complex
    radius: float
    construction: str
    verified: bool
    t: float | None = None
    detail: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# coordinates

def delta(theta: ThetaSpec, p: int, q: int) -> float:
    """q*theta - p as a correctly rounded-ish float (no cancellation)."""
    exact = theta.exact()
    if exact is not None:
        return float(exact * q - p)
    eps = Fraction(1, (max(q, 1) ** 2) << 80)
    p0, q0, p1, q1 = stream_sandwich(theta, eps)
    mid = (Fraction(p0, q0) + Fraction(p1, q1)) / 2
    return float(mid * q - p)


def lattice_vector(theta: ThetaSpec, p: int, q: int, t: float) -> tuple[float, float]:
    """Image of (m, n) = (q, p): ((q theta - p) sqrt t, q / sqrt t)."""
    s = math.sqrt(t)
    return (delta(theta, p, q) * s, q / s)


def basis_at(theta: ThetaSpec, t: float) -> LatticeBasis:
    if t < 1:
        raise ValueError("t must be >= 1")
    s = math.sqrt(t)
    th = float(theta.exact()) if theta.exact() is not None else delta(theta, 0, 1)
    return LatticeBasis((th * s, 1 / s), (-s, 0.0))


def _convergent_basis(theta: ThetaSpec, t: float) -> LatticeBasis:
    """Basis {z_{i-1}(t), z_i(t)} with i the first index where t_i >= t."""
    i = 0
    while True:
        try:
            quotient(theta, i + 1)
            ti = float(critical_time(theta, i))
        except (Terminated, StreamExhausted, RationalHit):
            break
        if ti >= t:
            break
        i += 1
    c0, c1 = principal(theta, i - 1), principal(theta, i)
    b1 = lattice_vector(theta, c0.p, c0.q, t)
    b2 = lattice_vector(theta, c1.p, c1.q, t)
    return LatticeBasis(b1, b2, ((c0.q, -c0.p), (c1.q, -c1.p)))


# ---------------------------------------------------------------------------
# reduction and invariants

def _dot(u, v) -> float:
    return u[0] * v[0] + u[1] * v[1]


def gauss_reduce(basis: LatticeBasis) -> LatticeBasis:
    """Lagrange-Gauss reduction, with b1 . b2 <= 0 at the end."""
    b1, b2 = np.array(basis.b1, float), np.array(basis.b2, float)
    U = np.array(basis.transform, dtype=object)
    scale = max(np.hypot(*b1), np.hypot(*b2))
    det = b1[0] * b2[1] - b1[1] * b2[0]
    if not np.isfinite(det) or abs(det) <= 1e-14 * scale * scale:
        raise DegenerateBasis("basis vectors are (nearly) dependent")
    if _dot(b1, b1) > _dot(b2, b2):
        b1, b2 = b2, b1
        U = U[::-1].copy()
    for _ in range(10_000):
        mu = round(_dot(b1, b2) / _dot(b1, b1))
        if mu:
            b2 = b2 - mu * b1
            U[1] = U[1] - mu * U[0]
        if _dot(b2, b2) < _dot(b1, b1):
            b1, b2 = b2, b1
            U = U[::-1].copy()
        else:
            break
    else:
        raise DegenerateBasis("reduction did not terminate")
    if _dot(b1, b2) > 0:
        b2 = -b2
        U[1] = -U[1]
    return LatticeBasis(tuple(map(float, b1)), tuple(map(float, b2)),
                        tuple(tuple(int(x) for x in row) for row in U))


def reduced_covering_radius(reduced: LatticeBasis) -> float:
    """Circumradius of the non-obtuse triangle (0, b1, b1+b2)."""
    b1, b2 = reduced.b1, reduced.b2
    s = (b1[0] + b2[0], b1[1] + b2[1])
    return math.hypot(*b1) * math.hypot(*b2) * math.hypot(*s) / (2 * abs(reduced.det))


def covering_radius_of(basis: LatticeBasis) -> float:
    return reduced_covering_radius(gauss_reduce(basis))


def snapshot(theta: ThetaSpec, t: float, label=None) -> LatticeSnapshot:
    if t < 1:
        raise ValueError("t must be >= 1")
    basis = _convergent_basis(theta, t)
    red = gauss_reduce(basis)
    return LatticeSnapshot(t, basis, red, math.hypot(*red.b1), reduced_covering_radius(red), label)


def shortest_vector(theta: ThetaSpec, t: float) -> tuple[tuple[float, float], float]:
    red = snapshot(theta, t).reduced
    return red.b1, math.hypot(*red.b1)


def covering_radius(theta: ThetaSpec, t: float) -> float:
    return snapshot(theta, t).covering_radius


def _dist_to_lattice(pts: np.ndarray, B: np.ndarray) -> np.ndarray:
    c = np.arange(-2, 4)
    grid = np.stack(np.meshgrid(c, c), -1).reshape(-1, 2) @ B
    return np.min(np.linalg.norm(pts[:, None, :] - grid[None, :, :], axis=2), axis=1)


def sampled_covering_radius(basis: LatticeBasis, count: int, rng: np.random.Generator,
                            polish: int = 16) -> float:
    """Max distance to the lattice over random points of the fundamental cell.

    The best ``polish`` samples are then improved by a compass search, since a
    plain sample of size N misses the deep hole by O(N^-1/2).  Always a lower
    bound for the covering radius.
    """
    B = gauss_reduce(basis).vectors()
    pts = rng.uniform(0, 1, (count, 2)) @ B
    d = _dist_to_lattice(pts, B)
    top = np.argsort(d)[-polish:]
    x, best = pts[top].copy(), d[top].copy()
    step = np.full(len(x), math.hypot(*B[0]) / math.sqrt(count))
    dirs = np.array([(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]) / math.sqrt(2)
    for _ in range(200):
        trial = x[:, None, :] + step[:, None, None] * dirs[None, :, :]
        dt = _dist_to_lattice(trial.reshape(-1, 2), B).reshape(len(x), len(dirs))
        j = np.argmax(dt, axis=1)
        gain = dt[np.arange(len(x)), j] > best
        x[gain] = trial[gain, j[gain]]
        best = np.maximum(best, dt[np.arange(len(x)), j])
        step[~gain] /= 2
    return float(max(d.max(), best.max()))


# ---------------------------------------------------------------------------
# Richards' rectangle and the hole construction

@dataclass(frozen=True)
class RichardsResult:
    t: float
    dot: float
    exact_zero: bool | None  # None when theta is only known as a stream
    norm_product: float = 0.0  # |z_i(t)| |z_ik(t)|, the scale for relative checks

    @property
    def relative(self) -> float:
        return abs(self.dot) / self.norm_product if self.norm_product else 0.0


def richards_check(theta: ThetaSpec, i: int, k: int, scale: float = 1.0) -> RichardsResult:
    """z_i(t) . z_ik(t) at t = scale * sqrt(t_i t_ik).

    For exact angles, t * dot = delta_i delta_ik t^2 + q_i q_ik is evaluated in
    Q(sqrt D); at scale 1 it is exactly zero.
    """
    ci, cik = principal(theta, i), intermediate(theta, i, k)
    ti, tik = critical_time(theta, i), critical_time(theta, i, k)
    t = scale * math.sqrt(float(ti) * float(tik))
    exact = theta.exact()
    if t == 0:  # (i, k) = (0, 0): z_0 paired with q = 0, t collapses to 0
        norms = 0.0
    else:
        zi = lattice_vector(theta, ci.p, ci.q, t)
        zk = lattice_vector(theta, cik.p, cik.q, t)
        norms = math.hypot(*zi) * math.hypot(*zk)
    if exact is not None and scale == 1.0:
        di, dik = exact * ci.q - ci.p, exact * cik.q - cik.p
        num = di * dik * ti * tik + ci.q * cik.q
        zero = num == QuadExt(0)
        return RichardsResult(t, 0.0 if zero else float(num) / t, zero, norms)
    return RichardsResult(t, _dot(zi, zk), None, norms)


def lattice_points_in_ball(reduced: LatticeBasis, center: complex, radius: float) -> list[tuple[float, float]]:
    """Every lattice point with |v - center| < radius, by Cramer bounds."""
    B = reduced.vectors()
    det = abs(reduced.det)
    reach = abs(center) + radius
    n1 = math.ceil(reach * math.hypot(*reduced.b2) / det) + 1
    n2 = math.ceil(reach * math.hypot(*reduced.b1) / det) + 1
    c1, c2 = np.meshgrid(np.arange(-n1, n1 + 1), np.arange(-n2, n2 + 1))
    pts = np.stack([c1.ravel(), c2.ravel()], 1) @ B
    d = np.hypot(pts[:, 0] - center.real, pts[:, 1] - center.imag)
    return [tuple(p) for p in pts[d < radius]]


def hole_witness_lattice(theta: ThetaSpec, i: int) -> HoleWitness:
    """Empty ball of radius r_i/2 in Lambda(t_ik), k = floor(a_{i+1}/2).

    z_ik(t_ik) = (+-r_i, r_i); the ball sits in the square spanned by 0 and
    z_ik, on the side given by the sign of q_ik theta - p_ik.
    """
    if i < 1:
        raise ValueError("i must be >= 1")
    k = quotient(theta, i + 1) // 2
    cik, ci = intermediate(theta, i, k), principal(theta, i)
    t = float(critical_time(theta, i, k))
    d = delta(theta, cik.p, cik.q)
    r = math.sqrt(cik.q * abs(d))
    center = complex(math.copysign(r / 2, d), r / 2)
    basis = LatticeBasis(lattice_vector(theta, ci.p, ci.q, t), lattice_vector(theta, cik.p, cik.q, t))
    red = gauss_reduce(basis)
    # open ball: allow points on the boundary within rounding
    inside = lattice_points_in_ball(red, center, r / 2 * (1 - 1e-9))
    return HoleWitness(center, r / 2, "square", not inside, t,
                       {"i": i, "k": k, "r_i": r, "points_inside": len(inside)})


# ---------------------------------------------------------------------------
# scans

def default_grid(theta: ThetaSpec, t_max: float, n: int) -> list[tuple[float, tuple | None]]:
    """n log-spaced times in [1, t_max] merged with every critical time."""
    pts = [(float(t), None) for t in np.geomspace(1.0, t_max, n)]
    pts += [(t, (i, k)) for t, i, k in critical_grid(theta, t_max)]
    pts.sort(key=lambda p: p[0])
    return pts


@dataclass
class SceneryScan:
    snapshots: list[LatticeSnapshot]

    @property
    def min_shortest(self) -> float:
        return min(s.shortest_len for s in self.snapshots)

    @property
    def max_covering(self) -> float:
        return max(s.covering_radius for s in self.snapshots)


def scenery_scan(theta: ThetaSpec, t_grid) -> SceneryScan:
    snaps = []
    for item in t_grid:
        t, label = item if isinstance(item, tuple) else (item, None)
        if t < 1:
            raise ValueError("grid must lie in [1, inf)")
        snaps.append(snapshot(theta, t, label))
    return SceneryScan(snaps)
