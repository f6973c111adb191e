"""Packing and covering diagnostics for the spiral under the relative metric.

Packing: for each nu, the closest later point F(nu + q).  The search is
exhaustive without a cap on q: any q that could beat an upper bound U on the
minimum satisfies both

    (nu + q)^a - nu^a < U             (radial gap)
    2 nu^a |sin(pi {q theta})| < U    (angular gap, since |F(nu+q)| >= |F(nu)|)

so candidates are read off a table of {q theta} for q up to the radial limit.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .contfrac import (Terminated, badly_approx_report, critical_time, intermediate,
                       principal, quotient)
from .exactreal import (CertInterval, QuotientStream, Rational, StreamExhausted,
                        ThetaSpec)
from .scenery import HoleWitness, delta
from .spiral import (TWO_PI, SpiralParams, frac_engine, frac_range,
                     nearest_index, pair_distance, radial_gap, radii)

PACK_BLOCK = 4096
COVER_BLOCK = 1024
COVER_STREAM = 7


class AnnulusTooSmall(ValueError):
    pass


class UnboundedM(ValueError):
    pass


def pmap(fn, items, threads: int = 1):
    """Ordered map; the result never depends on the thread count."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as ex:
        return list(ex.map(fn, items))


def _normalize(gap, r_z, r_zeta, beta: float):
    a, b = np.power(r_z, beta), np.power(r_zeta, beta)
    return gap / a, gap / b, gap / ((a + b) / 2)


# ---------------------------------------------------------------------------
# bounds

@dataclass(frozen=True)
class BoundSet:
    alpha: float
    M: int | None
    packing_lower: float | None
    covering_upper: float | None
    certified: bool

    def hole_lower(self, a_next: int) -> float:
        return hole_lower(self.alpha, a_next)


def hole_lower(alpha: float, a_next: int) -> float:
    return min(1.0, alpha / (16 * math.sqrt(2))) * math.sqrt(a_next - 1)


def prefix_M(theta: ThetaSpec, depth: int = 50) -> tuple[int, bool]:
    """(M, certified): the quotient bound used by the explicit constants."""
    if isinstance(theta, QuotientStream) and theta.is_infinite and not theta.bounded_rule:
        raise UnboundedM(f"quotient rule {theta.rule!r} is unbounded")
    if isinstance(theta, QuotientStream) and not theta.is_infinite:
        return max(theta.terms), False
    rep = badly_approx_report(theta, depth)
    return rep.max_quotient, rep.certified_bounded


def bounds(params: SpiralParams, M: int | None = None) -> BoundSet:
    certified = M is not None
    if M is None:
        M, certified = prefix_M(params.theta)
    a = params.a
    return BoundSet(
        alpha=a, M=M,
        packing_lower=min(1.0, 2 ** a - 1) / math.sqrt(2 + M),
        covering_upper=2 * a * math.sqrt(2 * (M + 2)) + 2 * math.pi * math.sqrt(M + 1),
        certified=certified,
    )


def _bound_or_none(params: SpiralParams, attr: str) -> float | None:
    try:
        return getattr(bounds(params), attr)
    except UnboundedM:
        return None


# ---------------------------------------------------------------------------
# packing

@dataclass
class PackingReport:
    alpha: float
    beta: float
    nu: np.ndarray
    q: np.ndarray
    gap: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    n3: np.ndarray
    lower_bound: float | None = None

    def __len__(self):
        return len(self.nu)

    @property
    def argmin(self) -> int:
        return int(np.argmin(self.n1))

    @property
    def min_n1(self) -> float | None:
        return float(self.n1.min()) if len(self) else None

    @property
    def witness(self) -> dict | None:
        if not len(self):
            return None
        j = self.argmin
        return {"nu": int(self.nu[j]), "q": int(self.q[j]), "gap": float(self.gap[j]), "n1": float(self.n1[j])}


def _gap_matrix(alpha: float, nu: np.ndarray, qs: np.ndarray, fq: np.ndarray) -> np.ndarray:
    r1 = radii(alpha, nu)[:, None]
    dr = radial_gap(alpha, nu[:, None], qs[None, :])
    s = np.sin(np.pi * fq)[None, :]
    return np.sqrt(dr * dr + 4 * r1 * (r1 + dr) * s * s)


def _seed_qs(theta: ThetaSpec, q_max: int) -> np.ndarray:
    qs = set(range(1, min(q_max, 8) + 1))
    i = 0
    while True:
        try:
            a_next = quotient(theta, i + 1)
        except (Terminated, StreamExhausted):
            break
        c = principal(theta, i)
        if c.q > q_max:
            break
        qs.add(c.q)
        for k in range(1, min(a_next, 64)):
            qk = intermediate(theta, i, k).q
            if qk > q_max:
                break
            qs.add(qk)
        i += 1
    qs.discard(0)
    return np.array(sorted(q for q in qs if q <= q_max), dtype=np.int64)


def _q_limit(alpha: float, nu: np.ndarray, U: np.ndarray) -> int:
    """Largest q that can still have radial gap < U, over the block."""
    lim = np.exp(np.log(radii(alpha, nu) + U) / alpha) - nu
    return int(np.ceil(lim.max() * (1 + 1e-9))) + 1


def _packing_block(params: SpiralParams, nu: np.ndarray):
    a = params.a
    eng = frac_engine(params.theta)
    seeds = _seed_qs(params.theta, max(16, 4 * int(math.sqrt(nu.max())) + 64))
    fs = eng.fracs(0, seeds)
    g = _gap_matrix(a, nu, seeds, fs)
    U = g.min(axis=1)
    q_hi = _q_limit(a, nu, U)
    eps = float(np.max(np.arcsin(np.minimum(1.0, U / (2 * radii(a, nu)))) / np.pi)) + 1e-12
    cand = []
    step = 1 << 22
    for s in range(1, q_hi + 1, step):
        m = min(step, q_hi + 1 - s)
        f = eng.fracs(s, np.arange(m, dtype=np.int64))
        cand.append(s + np.flatnonzero(np.abs(f) <= eps))
    qs = np.union1d(seeds, np.concatenate(cand)) if cand else seeds
    fq = eng.fracs(0, qs)
    g = _gap_matrix(a, nu, qs, fq)
    j = np.argmin(g, axis=1)  # first index => smallest q among ties
    rows = np.arange(len(nu))
    return qs[j], g[rows, j]


def packing_scan(params: SpiralParams, beta: float, nu_values, threads: int = 1) -> PackingReport:
    """Exact min over q >= 1 of |F(nu+q) - F(nu)| for every nu given."""
    if beta >= 1:
        raise ValueError("beta must be < 1")
    nu = np.unique(np.asarray(list(nu_values) if not hasattr(nu_values, "__array__") else nu_values,
                              dtype=np.int64))
    if len(nu) and nu[0] < 1:
        raise ValueError("nu must be >= 1")
    lower = _bound_or_none(params, "packing_lower") if beta == float(params.beta_star) else None
    if not len(nu):
        e = np.zeros(0)
        return PackingReport(params.a, beta, nu, nu.copy(), e, e, e, e, lower)
    # blocks never straddle a factor of two in nu, keeping the candidate
    # tables tight
    blocks = []
    start = 0
    while start < len(nu):
        stop = min(start + PACK_BLOCK, int(np.searchsorted(nu, 2 * nu[start], side="left")))
        stop = max(stop, start + 1)
        blocks.append(nu[start:stop])
        start = stop
    parts = pmap(lambda b: _packing_block(params, b), blocks, threads)
    q = np.concatenate([p[0] for p in parts])
    gap = np.concatenate([p[1] for p in parts])
    r1 = radii(params.a, nu)
    r2 = r1 + radial_gap(params.a, nu, q)
    n1, n2, n3 = _normalize(gap, r1, r2, beta)
    return PackingReport(params.a, beta, nu, q, gap, n1, n2, n3, lower)


def packing_bruteforce(params: SpiralParams, nu_max: int, q_max: int):
    """Reference: exhaustive q <= q_max for every nu <= nu_max."""
    nu = np.arange(1, nu_max + 1, dtype=np.int64)
    qs = np.arange(1, q_max + 1, dtype=np.int64)
    g = _gap_matrix(params.a, nu, qs, frac_engine(params.theta).fracs(0, qs))
    j = np.argmin(g, axis=1)
    return qs[j], g[np.arange(len(nu)), j]


# ---------------------------------------------------------------------------
# covering

@dataclass
class CoveringReport:
    alpha: float
    beta: float
    annulus: tuple[float, float]
    z: np.ndarray
    n: np.ndarray
    dist: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    n3: np.ndarray
    upper_bound: float | None = None
    threshold: float | None = None

    def __len__(self):
        return len(self.z)

    @property
    def max_n2(self) -> float | None:
        return float(self.n2.max()) if len(self) else None

    @property
    def witness(self) -> dict | None:
        if not len(self):
            return None
        j = int(np.argmax(self.n2))
        return {"x": float(self.z[j].real), "y": float(self.z[j].imag), "n": int(self.n[j]),
                "dist": float(self.dist[j]), "n2": float(self.n2[j])}


def covering_threshold(params: SpiralParams) -> float | None:
    """t_{i0} for the first i0 with q_i0 >= 2(1 + a^2) and q_i0 >= 3(2 + M).

    None when the constants do not apply (rational angle, unbounded rule).
    """
    theta = params.theta
    if isinstance(theta, Rational):
        return None
    try:
        M, _ = prefix_M(theta)
    except UnboundedM:
        return None
    need = max(2 * (1 + params.a ** 2), 3 * (2 + M))
    i = 0
    while principal(theta, i).q < need:
        i += 1
    return float(critical_time(theta, i))


def stratified_annulus(R1: float, R2: float, count: int, seed: int, block: int = COVER_BLOCK) -> np.ndarray:
    """count points, area-uniform and stratified in radius, uniform in angle."""
    from .harness.rng import block_rng

    out = np.empty(count, dtype=complex)
    for b, s in enumerate(range(0, count, block)):
        m = min(block, count - s)
        rng = block_rng(seed, COVER_STREAM, b)
        u = (np.arange(s, s + m) + rng.uniform(0, 1, m)) / count
        r = np.sqrt(R1 * R1 + u * (R2 * R2 - R1 * R1))
        phi = rng.uniform(-math.pi, math.pi, m)
        out[s:s + m] = r * np.exp(1j * phi)
    return out


def covering_scan(params: SpiralParams, beta: float, annulus: tuple[float, float],
                  sample_count: int, seed: int, threads: int = 1,
                  check_threshold: bool = True) -> CoveringReport:
    R1, R2 = annulus
    if not 1 <= R1 <= R2:
        raise ValueError("annulus needs 1 <= R1 <= R2")
    thr = covering_threshold(params)
    if check_threshold and thr is not None and R1 ** (1 / params.a) < thr:
        raise AnnulusTooSmall(f"|z|^(1/alpha) must reach t_i0 = {thr:.6g}; got R1 = {R1}")
    z = stratified_annulus(R1, R2, sample_count, seed)
    return covering_at(params, beta, z, annulus, threads, thr)


def covering_at(params: SpiralParams, beta: float, z, annulus=None, threads: int = 1,
                threshold: float | None = None) -> CoveringReport:
    z = np.asarray(z, dtype=complex)
    found = pmap(lambda w: nearest_index(params, complex(w)), z, threads)
    n = np.array([f[0] for f in found], dtype=np.int64)
    dist = np.array([f[1] for f in found])
    n1, n2, n3 = _normalize(dist, np.abs(z), radii(params.a, n), beta)
    upper = _bound_or_none(params, "covering_upper") if beta == float(params.beta_star) else None
    return CoveringReport(params.a, beta, annulus, z, n, dist, n1, n2, n3, upper, threshold)


# ---------------------------------------------------------------------------
# holes and the rational case

def _ceil(x) -> int:
    if isinstance(x, CertInterval):
        if math.ceil(x.lo) != math.ceil(x.hi):
            raise ValueError("critical time interval straddles an integer")
        return math.ceil(x.hi)
    return -((-x).floor())


def spiral_hole_witness(params: SpiralParams, i: int, beta: float | None = None) -> HoleWitness:
    """Empty ball B(xi_i, R_i) between F(nu_i) and F(nu_i + q_ik)."""
    if i < 0:
        raise ValueError("i must be >= 0")
    theta, a = params.theta, params.a
    beta = float(params.beta_star) if beta is None else beta
    a_next = quotient(theta, i + 1)
    k = a_next // 2
    c = intermediate(theta, i, k)
    nu = _ceil(critical_time(theta, i, k))
    d = delta(theta, c.p, c.q)
    r_lo, gap = nu ** a, float(radial_gap(a, nu, c.q))
    mod = r_lo + gap / 2
    f_nu = float(frac_engine(theta).fracs(nu, [0])[0])
    xi = mod * complex(math.cos(TWO_PI * (f_nu + d / 2)), math.sin(TWO_PI * (f_nu + d / 2)))
    R = min(gap / 2, mod * abs(math.sin(math.pi * d)))
    lo = max(1, math.floor((mod - R) ** (1 / a)) - 1)
    hi = math.ceil((mod + R) ** (1 / a)) + 1
    inside, closest = 0, math.inf
    step = 1 << 22
    for s in range(lo, hi + 1, step):
        m = min(step, hi + 1 - s)
        f = frac_range(theta, s, m)
        ang = f - math.atan2(xi.imag, xi.real) / TWO_PI
        dd = pair_distance(mod, radii(a, np.arange(s, s + m)), ang)
        inside += int(np.count_nonzero(dd < R * (1 - 1e-9)))
        closest = min(closest, float(dd.min()))
    r_i = R * mod ** (-beta)
    return HoleWitness(xi, R, "sector", inside == 0, None,
                       {"i": i, "k": k, "nu": nu, "q": c.q, "r_i": r_i,
                        "hole_lower": hole_lower(a, a_next) if a_next >= 1 else None,
                        "closest_over_R": closest / R, "indices_checked": hi - lo + 1})


def rational_gap(alpha: float, beta: float | None, q: int, j: int) -> float:
    """|F((j+1)q) - F(jq)| / |F(jq)|^beta for theta = p/q (same ray)."""
    if q < 1 or j < 1:
        raise ValueError("q and j must be >= 1")
    beta = 1 - 1 / (2 * alpha) if beta is None else beta
    return (j * q) ** (alpha * (1 - beta)) * math.expm1(alpha * math.log1p(1 / j))


# ---------------------------------------------------------------------------
# exponent trends

@dataclass
class Trend:
    statistic: str
    R: np.ndarray
    values: np.ndarray
    slope: float


def _trend_value(params: SpiralParams, beta: float, statistic: str, R: float,
                 samples: int, seed: int, threads: int) -> float:
    if statistic == "packing":
        n0 = R ** (1 / params.a)
        nu = np.unique(np.geomspace(n0, 3 * n0, samples).astype(np.int64))
        return packing_scan(params, beta, nu, threads).min_n1
    if statistic == "covering":
        rep = covering_scan(params, beta, (R, 2 * R), samples, seed, threads, check_threshold=False)
        return rep.max_n2
    raise ValueError(f"unknown statistic {statistic!r}")


def exponent_trend(params: SpiralParams, beta: float, statistic: str, R_grid,
                   samples: int = 2000, seed: int = 0, threads: int = 1) -> Trend:
    """Least-squares slope of log(statistic) against log R.

    packing: min normalised gap over nu in [R^(1/a), 3 R^(1/a)];
    covering: max n2 over stratified samples in the annulus [R, 2R].
    """
    R = np.asarray(R_grid, dtype=float)
    vals = np.array([_trend_value(params, beta, statistic, float(r), samples, seed, threads) for r in R])
    slope = float(np.polyfit(np.log(R), np.log(vals), 1)[0])
    return Trend(statistic, R, vals, slope)
