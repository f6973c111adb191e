"""Continued fractions: expansions, principal and intermediate convergents,
Farey classification, approximation-quality bounds and critical times."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .exactreal import (CertInterval, QuadExt, QuotientStream, Rational,
                        StreamExhausted, Surd, ThetaSpec, stream_sandwich)

# extra quotients a stream check may pull in before giving up
REFINE_CAP = 64


class Terminated(ValueError):
    """A rational angle's expansion ended before the requested depth."""

    def __init__(self, length: int, expansion: "CFExpansion"):
        super().__init__(f"expansion terminated after {length} quotients")
        self.length = length
        self.expansion = expansion


class OutOfRange(ValueError):
    pass


class RationalHit(ZeroDivisionError):
    """q*theta - p vanishes exactly."""


class NotFarey(ValueError):
    pass


class NotContaining(ValueError):
    pass


@dataclass(frozen=True)
class CFExpansion:
    quotients: tuple[int, ...]  # a_0, a_1, ...
    terminated: bool = False
    period_start: int | None = None  # surds: index where the period begins

    @property
    def a0(self) -> int:
        return self.quotients[0]

    @property
    def max_quotient_seen(self) -> int:
        return max(self.quotients[1:], default=0)

    def __len__(self):
        return len(self.quotients)

    def __str__(self):
        head, tail = self.quotients[0], self.quotients[1:]
        return f"[{head}; {','.join(map(str, tail))}]" if tail else f"[{head}]"


@dataclass(frozen=True)
class Convergent:
    i: int
    p: int
    q: int


@dataclass(frozen=True)
class IntermediateConvergent:
    i: int
    k: int
    p: int
    q: int


@dataclass(frozen=True)
class FareyPair:
    left: Fraction
    right: Fraction

    def __post_init__(self):
        if self.left.denominator * self.right.numerator - self.right.denominator * self.left.numerator != 1:
            raise NotFarey(f"{self.left} < {self.right} is not a Farey pair")


# ---------------------------------------------------------------------------
# expansion

@lru_cache(maxsize=256)
def _surd_period(x: QuadExt) -> tuple[tuple[int, ...], int, int]:
    """(quotients through one full period, period start, period length)."""
    seen: dict[QuadExt, int] = {}
    out: list[int] = []
    idx = 0
    while True:
        if idx >= 1:
            if x in seen:
                start = seen[x]
                return tuple(out), start, idx - start
            seen[x] = idx
        a = x.floor()
        out.append(a)
        x = (x - a).reciprocal()
        idx += 1


@lru_cache(maxsize=1024)
def _rational_quotients(v: Fraction) -> tuple[int, ...]:
    out = []
    num, den = v.numerator, v.denominator
    while den:
        a = num // den
        out.append(a)
        num, den = den, num - a * den
    return tuple(out)


def expand(theta: ThetaSpec, depth: int, strict: bool = False) -> CFExpansion:
    """First ``depth`` quotients a_0 .. a_{depth-1}.

    Rational angles stop early and are flagged ``terminated``; with
    ``strict=True`` that raises :class:`Terminated` instead.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if isinstance(theta, Rational):
        qs = _rational_quotients(theta.value)
        exp = CFExpansion(tuple(qs[:depth]), terminated=len(qs) < depth)
        if exp.terminated and strict:
            raise Terminated(len(qs), exp)
        return exp
    if isinstance(theta, Surd):
        head, start, length = _surd_period(theta.value)
        qs = list(head[:depth])
        while len(qs) < depth:
            qs.append(head[start + (len(qs) - start) % length])
        return CFExpansion(tuple(qs), period_start=start)
    assert isinstance(theta, QuotientStream)
    return CFExpansion(tuple(theta.quotient(i) for i in range(depth)))


def quotient(theta: ThetaSpec, i: int) -> int:
    """a_i; raises :class:`Terminated` for rationals past their end."""
    if isinstance(theta, QuotientStream):
        return theta.quotient(i)
    exp = expand(theta, i + 1)
    if len(exp) <= i:
        raise Terminated(len(exp), exp)
    return exp.quotients[i]


def convergents(theta: ThetaSpec, depth: int) -> list[Convergent]:
    """Seed (i=-1: 1/0) followed by p_i/q_i for i < depth."""
    exp = expand(theta, depth)
    out = [Convergent(-1, 1, 0)]
    p_prev, q_prev, p, q = 0, 1, 1, 0  # (p_{-2}, q_{-2}) and (p_{-1}, q_{-1})
    for i, a in enumerate(exp.quotients):
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append(Convergent(i, p, q))
    return out


@lru_cache(maxsize=4096)
def _pq(theta: ThetaSpec, i: int) -> tuple[int, int]:
    if i == -1:
        return 1, 0
    if i == 0:
        return quotient(theta, 0), 1
    a = quotient(theta, i)
    p1, q1 = _pq(theta, i - 1)
    p2, q2 = _pq(theta, i - 2) if i >= 1 else (0, 1)
    return a * p1 + p2, a * q1 + q2


def principal(theta: ThetaSpec, i: int) -> Convergent:
    p, q = _pq(theta, i)
    return Convergent(i, p, q)


def intermediate(theta: ThetaSpec, i: int, k: int) -> IntermediateConvergent:
    if i < 0:
        raise OutOfRange("intermediate convergents need i >= 0")
    a_next = quotient(theta, i + 1)
    if not 0 <= k <= a_next:
        raise OutOfRange(f"k={k} outside [0, a_{i + 1}={a_next}]")
    p, q = _pq(theta, i)
    pm, qm = _pq(theta, i - 1)
    return IntermediateConvergent(i, k, k * p + pm, k * q + qm)


# ---------------------------------------------------------------------------
# approximation quality  q |q theta - p|

def _stream_interval(theta: QuotientStream, q: int, extra_bits: int) -> tuple[int, int, int, int]:
    eps = Fraction(1, max(q, 1) ** 2 << extra_bits)
    return stream_sandwich(theta, eps)


def _delta_exact(theta: ThetaSpec, p: int, q: int) -> QuadExt | None:
    exact = theta.exact()
    return None if exact is None else exact * q - p


def quality(theta: ThetaSpec, p: int, q: int, extra_bits: int = 64):
    """q*|q*theta - p| exactly (QuadExt) or as a CertInterval for streams."""
    if q < 1:
        raise ValueError("q must be >= 1")
    d = _delta_exact(theta, p, q)
    if d is not None:
        return abs(d) * q
    p0, q0, p1, q1 = _stream_interval(theta, q, extra_bits)
    vals = []
    for P, Q in ((p0, q0), (p1, q1)):
        vals.append(Fraction(q * (q * P - p * Q), Q))
    lo, hi = min(vals), max(vals)
    if lo <= 0 <= hi:
        return CertInterval(Fraction(0), max(-lo, hi))
    if hi < 0:
        lo, hi = -hi, -lo
    return CertInterval(lo, hi)


def _compare(theta: ThetaSpec, p: int, q: int, bound: Fraction) -> int:
    """Sign of q|q theta - p| - bound, refining stream tails until decided."""
    d = _delta_exact(theta, p, q)
    if d is not None:
        return (abs(d) * q - bound).sign()
    assert isinstance(theta, QuotientStream)
    bits = 8
    num, den = bound.numerator, bound.denominator
    for _ in range(REFINE_CAP):
        p0, q0, p1, q1 = _stream_interval(theta, q, bits)
        # q|qP - pQ|/Q vs num/den, integer cross-multiplication
        s0 = q * abs(q * p0 - p * q0) * den - num * q0
        s1 = q * abs(q * p1 - p * q1) * den - num * q1
        same_side = (q * p0 - p * q0) * (q * p1 - p * q1) > 0
        if same_side and s0 > 0 and s1 > 0:
            return 1
        if same_side and s0 < 0 and s1 < 0:
            return -1
        if q * p0 == p * q0 and q * p1 == p * q1:
            return (Fraction(0) > bound) - (Fraction(0) < bound)
        bits += 16
    raise StreamExhausted("comparison undecided within the refinement cap")


@dataclass
class Lemma8Record:
    i: int
    k: int
    a_i: int
    a_next: int
    value: float
    item1: bool | None = None
    item2: bool | None = None
    item3: bool | None = None
    item4: bool | None = None
    principal_value: float | None = None

    @property
    def ok(self) -> bool:
        return all(v is not False for v in (self.item1, self.item2, self.item3, self.item4))


def lemma8_check(theta: ThetaSpec, i: int, k: int) -> Lemma8Record:
    """Evaluate the four approximation-quality inequalities at (i, k).

    1. q_ik |q_ik theta - p_ik| > 1/(2 + a_i)       for 0 <= k < a_{i+1}
    2. q_ik |q_ik theta - p_ik| < k + 1              for 0 <= k <= a_{i+1}
    3. q_i |q_i theta - p_i| < 1/a_{i+1}             (reported with every k)
    4. q_ik |q_ik theta - p_ik| > (a_{i+1} - 1)/4    for i >= 1, k = a_{i+1} // 2

    Item 1 is skipped where q_ik = 0, i.e. at (i, k) = (0, 0), and for i = 0
    when a_0 < 0.  Items outside their range are ``None``.
    """
    if i < 0:
        raise OutOfRange("i must be >= 0")
    a_i = quotient(theta, i)
    a_next = quotient(theta, i + 1)
    if not 0 <= k <= a_next:
        raise OutOfRange(f"k={k} outside [0, {a_next}]")
    ic = intermediate(theta, i, k)
    pc = principal(theta, i)
    rec = Lemma8Record(i, k, a_i, a_next, value=0.0)
    if ic.q >= 1:
        rec.value = _float_quality(theta, ic.p, ic.q)
        if k < a_next and (i >= 1 or (k >= 1 and a_i >= 0)):
            rec.item1 = _compare(theta, ic.p, ic.q, Fraction(1, 2 + a_i)) > 0
        rec.item2 = _compare(theta, ic.p, ic.q, Fraction(k + 1)) < 0
        if i >= 1 and k == a_next // 2:
            rec.item4 = _compare(theta, ic.p, ic.q, Fraction(a_next - 1, 4)) > 0
    else:
        rec.item2 = Fraction(0) < k + 1
    rec.item3 = _compare(theta, pc.p, pc.q, Fraction(1, a_next)) < 0
    rec.principal_value = _float_quality(theta, pc.p, pc.q)
    return rec


def _float_quality(theta: ThetaSpec, p: int, q: int) -> float:
    v = quality(theta, p, q)
    return float(v)


def lemma8_suite(theta: ThetaSpec, depth: int) -> list[Lemma8Record]:
    """All (i, k) with i + 1 < depth; stops quietly where a rational ends."""
    out = []
    for i in range(depth - 1):
        try:
            a_next = quotient(theta, i + 1)
        except Terminated:
            break
        for k in range(a_next + 1):
            out.append(lemma8_check(theta, i, k))
    return out


def lemma8_fast(a0: int, terms: list[int], depth: int) -> list[tuple[int, int, int]]:
    """Integer-only sweep of the four inequalities over a quotient list.

    Uses theta bracketed by the last two convergents of ``terms``; returns the
    list of violations as (i, k, item).  An undecided comparison counts as a
    violation, so callers must supply a tail long enough to resolve.
    """
    ps, qs = [1, a0], [0, 1]  # index shift: ps[j] = p_{j-1}
    for a in terms:
        ps.append(a * ps[-1] + ps[-2])
        qs.append(a * qs[-1] + qs[-2])
    P0, Q0, P1, Q1 = ps[-2], qs[-2], ps[-1], qs[-1]
    quot = [a0] + list(terms)
    bad = []

    def cmp(p, q, num, den):
        s0 = q * abs(q * P0 - p * Q0) * den - num * Q0
        s1 = q * abs(q * P1 - p * Q1) * den - num * Q1
        if (q * P0 - p * Q0) * (q * P1 - p * Q1) <= 0:
            return 0
        if s0 > 0 and s1 > 0:
            return 1
        if s0 < 0 and s1 < 0:
            return -1
        return 0

    for i in range(depth - 1):
        a_i, a_next = quot[i], quot[i + 1]
        p_i, q_i = ps[i + 1], qs[i + 1]
        p_m, q_m = ps[i], qs[i]
        if cmp(p_i, q_i, 1, a_next) != -1:
            bad.append((i, -1, 3))
        for k in range(a_next + 1):
            p, q = k * p_i + p_m, k * q_i + q_m
            if q == 0:
                continue
            if k < a_next and (i >= 1 or a_i >= 0) and cmp(p, q, 1, 2 + a_i) != 1:
                bad.append((i, k, 1))
            if cmp(p, q, k + 1, 1) != -1:
                bad.append((i, k, 2))
            if i >= 1 and k == a_next // 2 and cmp(p, q, a_next - 1, 4) != 1:
                bad.append((i, k, 4))
    return bad


# ---------------------------------------------------------------------------
# Farey intervals

@dataclass(frozen=True)
class FareyClass:
    parity: str  # "even": (p_i/q_i, p_ik/q_ik);  "odd": (p_ik/q_ik, p_i/q_i)
    i: int
    k: int
    canonical: tuple[int, int] = field(default=(0, 0))  # (i, k) with k < a_{i+1}


def farey_classify(theta: ThetaSpec, pair: FareyPair, max_depth: int = 200) -> FareyClass:
    """Locate a Farey interval containing theta among (intermediate) convergents.

    Returns the first match scanning i upward with 0 <= k <= a_{i+1}; the
    ``canonical`` field holds the representation with k < a_{i+1}.
    """
    exact = theta.exact()
    lo, hi = pair.left, pair.right
    if exact is not None:
        inside = exact > lo and exact < hi
    else:
        inside = _stream_between(theta, lo, hi)
    if not inside:
        raise NotContaining(f"theta not in ({lo}, {hi})")
    first = None
    canonical = None
    for i in range(max_depth):
        try:
            a_next = quotient(theta, i + 1)
        except Terminated:
            break
        p, q = _pq(theta, i)
        conv = Fraction(p, q)
        for k in range(a_next + 1):
            ic = intermediate(theta, i, k)
            if ic.q == 0:
                continue
            mid = Fraction(ic.p, ic.q)
            if i % 2 == 0:
                match = (conv, mid) == (lo, hi)
            else:
                match = (mid, conv) == (lo, hi)
            if match:
                if first is None:
                    first = (i, k)
                if k < a_next and canonical is None:
                    canonical = (i, k)
        if first is not None and canonical is not None:
            break
        if q > max(lo.denominator, hi.denominator):
            break
    if first is None:
        raise NotContaining(f"({lo}, {hi}) matches no convergent pair")
    i, k = first
    return FareyClass("even" if i % 2 == 0 else "odd", i, k, canonical or first)


def _stream_between(theta: QuotientStream, lo: Fraction, hi: Fraction) -> bool:
    bits = 8
    for _ in range(REFINE_CAP):
        p0, q0, p1, q1 = stream_sandwich(theta, Fraction(1, 1 << bits))
        a, b = sorted((Fraction(p0, q0), Fraction(p1, q1)))
        if a > lo and b < hi:
            return True
        if b <= lo or a >= hi:
            return False
        bits += 16
    raise StreamExhausted("containment undecided")


def stern_brocot_path(theta: ThetaSpec, depth: int) -> list[FareyPair]:
    """Farey intervals containing theta produced by mediant descent."""
    exact = theta.exact()
    a0 = quotient(theta, 0)
    lo, hi = Fraction(a0), Fraction(a0 + 1)
    out = []
    for _ in range(depth):
        out.append(FareyPair(lo, hi))
        med = Fraction(lo.numerator + hi.numerator, lo.denominator + hi.denominator)
        if exact is not None:
            right = exact > med
            if exact == QuadExt(med):
                break
        else:
            right = _stream_between(theta, med, hi)
        lo, hi = (med, hi) if right else (lo, med)
    return out


# ---------------------------------------------------------------------------
# critical times

def critical_time(theta: ThetaSpec, i: int, k: int | None = None):
    """t_i = q_i/|q_i theta - p_i|, or t_ik for an intermediate convergent.

    Exact QuadExt for rational/surd angles, CertInterval for streams.
    """
    if k is None:
        c = principal(theta, i)
        p, q = c.p, c.q
    else:
        c = intermediate(theta, i, k)
        p, q = c.p, c.q
    if q == 0:
        return QuadExt(0)
    d = _delta_exact(theta, p, q)
    if d is not None:
        if d.sign() == 0:
            raise RationalHit(f"{q}*theta - {p} = 0")
        return QuadExt(q) / abs(d)
    iv = quality(theta, p, q)
    # t = q^2 / (q|q theta - p|)
    return CertInterval(Fraction(q * q) / iv.hi, Fraction(q * q) / iv.lo)


def critical_grid(theta: ThetaSpec, t_max: float, max_depth: int = 400) -> list[tuple[float, int, int | None]]:
    """Every critical time t_i and t_ik in [1, t_max] as (t, i, k)."""
    out = []
    for i in range(max_depth):
        try:
            a_next = quotient(theta, i + 1)
        except (Terminated, StreamExhausted):
            break
        try:
            ti = float(critical_time(theta, i))
        except RationalHit:
            break
        if 1 <= ti <= t_max:
            out.append((ti, i, None))
        stop = False
        for k in range(1, a_next):
            try:
                tk = float(critical_time(theta, i, k))
            except RationalHit:
                stop = True
                break
            if tk > t_max:
                break
            if tk >= 1:
                out.append((tk, i, k))
        if ti > t_max or stop:
            break
    out.sort()
    return out


@dataclass(frozen=True)
class BadlyApproxReport:
    max_quotient: int
    depth: int
    terminated: bool
    certified_bounded: bool
    note: str


def badly_approx_report(theta: ThetaSpec, depth: int = 50) -> BadlyApproxReport:
    exp = expand(theta, depth)
    m = exp.max_quotient_seen
    if exp.terminated:
        return BadlyApproxReport(m, len(exp), True, False, "rational, not badly approximable")
    if isinstance(theta, Surd):
        head, start, length = _surd_period(theta.value)
        m_all = max(head[1:])
        return BadlyApproxReport(m_all, depth, False, True, "periodic expansion, bounded quotients")
    if isinstance(theta, QuotientStream) and theta.bounded_rule:
        return BadlyApproxReport(theta.const, depth, False, True, "constant quotient rule")
    return BadlyApproxReport(m, depth, False, False, "prefix maximum only")
