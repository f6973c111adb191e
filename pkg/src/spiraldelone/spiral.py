"""Points F(n) = n^alpha exp(2 pi i n theta) of a general Archimedean spiral.

Angles are reduced exactly: {n theta} comes from exact arithmetic (single
points) or from 96-bit fixed-point integer arithmetic seeded with an exact
residue (vectorised paths).  ``n * theta`` is never formed in floating point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exactreal import (Rational, ThetaSpec,
                        fixed_point_frac, frac_q_theta)

FRAC_BITS = 96
_MASK32 = np.uint64(0xFFFFFFFF)
_OFFSET_LIMIT = 1 << 31
TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class SpiralParams:
    alpha: Fraction
    theta: ThetaSpec

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    @property
    def beta_star(self) -> Fraction:
        return 1 - 1 / (2 * self.alpha)

    @property
    def a(self) -> float:
        return float(self.alpha)


@dataclass(frozen=True)
class SpiralPoint:
    n: int
    radius: float
    frac_angle: float
    cartesian: complex
    frac_cert: object = None  # QuadExt or CertInterval


# ---------------------------------------------------------------------------
# vectorised fractional parts

class FracEngine:
    """{(base + k) theta} in [-1/2, 1/2) for arrays of offsets 0 <= k < 2^31."""

    def __init__(self, theta: ThetaSpec):
        self.theta = theta
        self.rational = None
        if isinstance(theta, Rational) and theta.value.denominator < _OFFSET_LIMIT:
            v = theta.value
            self.rational = (v.numerator % v.denominator, v.denominator)
        else:
            A = fixed_point_frac(theta, 1, FRAC_BITS)
            self.limbs = [np.uint64((A >> s) & 0xFFFFFFFF) for s in (0, 32, 64)]

    def fracs(self, base: int, offsets) -> np.ndarray:
        k = np.asarray(offsets, dtype=np.int64)
        if k.size == 0:
            return np.zeros(0)
        if k.min() < 0 or k.max() >= _OFFSET_LIMIT:
            lo = int(k.min())
            if int(k.max()) - lo >= _OFFSET_LIMIT:
                raise ValueError("offset span too wide")
            return self.fracs(base + lo, k - lo)
        k = k.astype(np.uint64)
        if self.rational is not None:
            p, q = self.rational
            c = (base * p) % q
            r = (np.uint64(c) + k * np.uint64(p)) % np.uint64(q)
            r = r.astype(np.float64)
            return np.where(2 * r >= q, r - q, r) / q
        C = fixed_point_frac(self.theta, base, FRAC_BITS) if base else 0
        c0, c1, c2 = (np.uint64((C >> s) & 0xFFFFFFFF) for s in (0, 32, 64))
        a0, a1, a2 = self.limbs
        t = k * a0 + c0
        r0 = t & _MASK32
        t = k * a1 + c1 + (t >> np.uint64(32))
        r1 = t & _MASK32
        r2 = (k * a2 + c2 + (t >> np.uint64(32))) & _MASK32
        x = (r2.astype(np.float64) + (r1.astype(np.float64) + r0.astype(np.float64) * 2.0**-32) * 2.0**-32) * 2.0**-32
        return np.where(r2 >= np.uint64(1 << 31), x - 1.0, x)


@lru_cache(maxsize=64)
def frac_engine(theta: ThetaSpec) -> FracEngine:
    return FracEngine(theta)


def frac_range(theta: ThetaSpec, n_lo: int, count: int) -> np.ndarray:
    """{n theta} for n = n_lo .. n_lo + count - 1."""
    eng = frac_engine(theta)
    out = np.empty(count)
    step = _OFFSET_LIMIT >> 1
    for s in range(0, count, step):
        m = min(step, count - s)
        out[s:s + m] = eng.fracs(n_lo + s, np.arange(m, dtype=np.int64))
    return out


def radii(alpha: float, n) -> np.ndarray:
    return np.exp(alpha * np.log(np.asarray(n, dtype=np.float64)))


def pair_distance(r1, r2, dfrac):
    """|r2 e^{2 pi i (phi + dfrac)} - r1 e^{2 pi i phi}| without cancellation."""
    s = np.sin(np.pi * dfrac)
    return np.sqrt((r2 - r1) ** 2 + 4 * r1 * r2 * s * s)


def radial_gap(alpha: float, nu, q):
    """(nu + q)^alpha - nu^alpha, accurate for q << nu."""
    nu = np.asarray(nu, dtype=np.float64)
    return np.exp(alpha * np.log(nu)) * np.expm1(alpha * np.log1p(q / nu))


# ---------------------------------------------------------------------------
# points

def point(params: SpiralParams, n: int) -> SpiralPoint:
    if n < 1:
        raise ValueError("n must be >= 1 (the origin is not part of the scanned set)")
    cert = frac_q_theta(params.theta, n)
    f = float(cert)
    r = math.exp(params.a * math.log(n))
    z = complex(r * math.cos(TWO_PI * f), r * math.sin(TWO_PI * f))
    return SpiralPoint(n, r, f, z, cert)


def _index_bounds(alpha: Fraction, R1: float, R2: float) -> tuple[int, int]:
    """Smallest n with n^alpha >= R1 and largest with n^alpha <= R2, exactly."""
    a = float(alpha)
    f1, f2 = Fraction(R1), Fraction(R2)
    exact = alpha.numerator <= 64 and alpha.denominator <= 64

    def pow_cmp(n: int, R: Fraction) -> int:  # sign of n^alpha - R
        if exact:
            lhs, rhs = Fraction(n) ** alpha.numerator, R ** alpha.denominator
        else:
            lhs, rhs = math.exp(a * math.log(n)), float(R)
        return (lhs > rhs) - (lhs < rhs)

    lo = max(1, math.floor(R1 ** (1 / a)) - 1)
    while lo > 1 and pow_cmp(lo - 1, f1) >= 0:
        lo -= 1
    while pow_cmp(lo, f1) < 0:
        lo += 1
    hi = math.floor(R2 ** (1 / a)) + 2
    while hi >= lo and pow_cmp(hi, f2) > 0:
        hi -= 1
    while pow_cmp(hi + 1, f2) <= 0:
        hi += 1
    return lo, hi


def annulus_arrays(params: SpiralParams, R1: float, R2: float) -> dict[str, np.ndarray]:
    if not 1 <= R1 <= R2:
        raise ValueError("annulus needs 1 <= R1 <= R2")
    lo, hi = _index_bounds(params.alpha, R1, R2)
    count = max(0, hi - lo + 1)
    n = np.arange(lo, lo + count, dtype=np.int64)
    f = frac_range(params.theta, lo, count) if count else np.zeros(0)
    r = radii(params.a, n)
    return {"n": n, "radius": r, "frac_angle": f,
            "x": r * np.cos(TWO_PI * f), "y": r * np.sin(TWO_PI * f)}


def points_in_annulus(params: SpiralParams, R1: float, R2: float):
    arr = annulus_arrays(params, R1, R2)
    for n, r, f, x, y in zip(arr["n"], arr["radius"], arr["frac_angle"], arr["x"], arr["y"]):
        yield SpiralPoint(int(n), float(r), float(f), complex(x, y))


# ---------------------------------------------------------------------------
# nearest point

class OffsetIndex:
    """Offsets k in [-W, W] sorted by {k theta}, for angular window queries."""

    def __init__(self, theta: ThetaSpec, W: int):
        self.W = W
        pos = frac_range(theta, 0, W + 1)
        neg = -pos[1:]
        neg = np.where(neg >= 0.5, neg - 1.0, neg)
        fr = np.concatenate([neg[::-1], pos])
        ks = np.arange(-W, W + 1, dtype=np.int64)
        order = np.argsort(fr, kind="stable")
        self.fr = fr[order]
        self.k = ks[order]

    def query(self, target: float, eps: float, kmin: int, kmax: int) -> np.ndarray:
        """Offsets with circular distance of {k theta} to target <= eps."""
        if eps >= 0.5:
            sel = self.k
        else:
            lo, hi = target - eps, target + eps
            pieces = []
            for a, b in ((lo, hi), (lo + 1, hi + 1), (lo - 1, hi - 1)):
                i, j = np.searchsorted(self.fr, [a, b])
                if j > i:
                    pieces.append(self.k[i:j])
            sel = np.concatenate(pieces) if pieces else np.zeros(0, np.int64)
        return sel[(sel >= kmin) & (sel <= kmax)]


_INDEX_CACHE: dict[ThetaSpec, OffsetIndex] = {}
_INDEX_MAX = 1 << 23
_BRUTE = 1 << 14


def _offset_index(theta: ThetaSpec, W: int) -> OffsetIndex | None:
    if W > _INDEX_MAX:
        return None
    idx = _INDEX_CACHE.get(theta)
    if idx is None or idx.W < W:
        size = 1 << max(12, (W - 1).bit_length())
        idx = OffsetIndex(theta, min(size, _INDEX_MAX))
        _INDEX_CACHE[theta] = idx
    return idx


def _eval_candidates(params: SpiralParams, z: complex, ns: np.ndarray):
    r = abs(z)
    c = math.atan2(z.imag, z.real) / TWO_PI
    eng = frac_engine(params.theta)
    base = int(ns.min())
    f = eng.fracs(base, ns - base)
    rad = radii(params.a, ns)
    d = pair_distance(r, rad, f - c)
    j = int(np.argmin(d))
    return int(ns[j]), float(d[j])


def _window_bounds(alpha: float, r: float, g: float) -> tuple[int, int]:
    lo = max(1, math.floor(max(r - g, 0.0) ** (1 / alpha) * (1 - 1e-12)) - 1)
    hi = math.ceil((r + g) ** (1 / alpha) * (1 + 1e-12)) + 1
    return lo, hi


def _nearest_on_rays(params: SpiralParams, z: complex) -> tuple[int, float]:
    p, q = frac_engine(params.theta).rational
    a = params.a
    r = abs(z)
    c = math.atan2(z.imag, z.real) / TWO_PI
    rho = np.arange(q, dtype=np.int64)
    first = np.where(rho == 0, q, rho)
    ang = ((rho * p) % q).astype(np.float64)
    ang = np.where(2 * ang >= q, ang - q, ang) / q
    proj = r * np.cos(TWO_PI * (ang - c))
    target = np.maximum(proj, 0.0) ** (1 / a)
    j = np.floor((target - first) / q)
    best_n, best_d = None, math.inf
    for dj in (-1, 0, 1, 2):
        n = first + np.maximum(j + dj, 0).astype(np.int64) * q
        d = pair_distance(r, radii(a, n), ang - c)
        i = int(np.argmin(d))
        if d[i] < best_d or (d[i] == best_d and n[i] < best_n):
            best_n, best_d = int(n[i]), float(d[i])
    return best_n, best_d


def nearest_index(params: SpiralParams, z: complex) -> tuple[int, float]:
    """Index and distance of the member of {F(n): n >= 1} closest to z.

    Complete search: a candidate window in n is sized from the current best
    distance g (the radial gap |n^alpha - |z|| and the angular gap both bound
    the distance from below), and g doubles until the best found is <= g.
    """
    r = abs(z)
    eng = frac_engine(params.theta)
    if eng.rational is not None and eng.rational[1] <= 4096:
        return _nearest_on_rays(params, z)
    a = params.a
    c = math.atan2(z.imag, z.real) / TWO_PI
    g = 2.0 * max(r, 1.0) ** (1 - 1 / (2 * a))
    while True:
        lo, hi = _window_bounds(a, r, g)
        if hi - lo <= _BRUTE:
            ns = np.arange(lo, hi + 1, dtype=np.int64)
        else:
            mid = (lo + hi) // 2
            W = max(mid - lo, hi - mid)
            eps = math.asin(min(1.0, g / r)) / TWO_PI + 1e-12 if g < r else 0.5
            idx = _offset_index(params.theta, W)
            if idx is None:
                ns = _angular_scan(params, lo, hi, c, eps)
            else:
                target = c - float(eng.fracs(mid, [0])[0])
                target -= math.floor(target + 0.5)
                ks = idx.query(target, eps, lo - mid, hi - mid)
                ns = mid + ks
        if len(ns):
            n, d = _eval_candidates(params, z, np.sort(ns))
            if d <= g:
                return n, d
        g *= 2


def _angular_scan(params: SpiralParams, lo: int, hi: int, c: float, eps: float) -> np.ndarray:
    out = []
    step = 1 << 22
    for s in range(lo, hi + 1, step):
        m = min(step, hi + 1 - s)
        f = frac_range(params.theta, s, m)
        dv = f - c
        dv -= np.floor(dv + 0.5)
        out.append(s + np.flatnonzero(np.abs(dv) <= eps))
    return np.concatenate(out) if out else np.zeros(0, np.int64)


def nearest_point(params: SpiralParams, z: complex) -> tuple[SpiralPoint, float]:
    n, d = nearest_index(params, z)
    return point(params, n), d


# ---------------------------------------------------------------------------
# local affine frame

@dataclass
class LocalFrame:
    nu: int
    k: np.ndarray
    approx: np.ndarray  # complex, rotated so that F(nu) sits on the positive axis
    residual: np.ndarray
    c_estimate: float


def local_frame(params: SpiralParams, nu: int, K: float) -> LocalFrame:
    """Compare F(nu + k) e^{-2 pi i nu theta} with its first-order expansion
    nu^a + nu^(a-1/2) (a k / sqrt(nu) + 2 pi {k theta} sqrt(nu) i)."""
    if nu < 1 or K <= 0:
        raise ValueError("need nu >= 1 and K > 0")
    a = params.a
    span = int(math.floor(K * math.sqrt(nu)))
    k = np.arange(max(-span, 1 - nu), span + 1, dtype=np.int64)
    fk = frac_engine(params.theta).fracs(0, np.abs(k))
    fk = np.where(k < 0, -fk, fk)
    fk -= np.floor(fk + 0.5)
    nua = nu ** a
    sq = math.sqrt(nu)
    approx = nua + nu ** (a - 0.5) * (a * k / sq + 1j * TWO_PI * fk * sq)
    exact_pts = radii(a, nu + k) * np.exp(1j * TWO_PI * fk)
    res = np.abs(exact_pts - approx)
    res[k == 0] = 0.0
    scale = nua * ((a * k / nu) ** 2 + (TWO_PI * fk) ** 2)
    nz = scale > 0
    c = float(np.max(res[nz] / scale[nz])) if nz.any() else 0.0
    return LocalFrame(nu, k, approx, res, c)
