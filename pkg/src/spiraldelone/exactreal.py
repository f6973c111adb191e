"""Exact arithmetic for rotation angles.

Rationals are plain :class:`fractions.Fraction`.  Real quadratic numbers
``a + b*sqrt(D)`` are :class:`QuadExt`; their sign and floor are decided with
integer square roots, never with floating point.  Angles given only through a
stream of partial quotients are evaluated to certified rational intervals.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rat = Fraction


class StreamExhausted(ValueError):
    """An explicit quotient list is too short for the requested precision."""


def _squarefree_split(d: int) -> tuple[int, int]:
    """Return (s, core) with d == s*s*core and core square-free."""
    s, core, f = 1, 1, 2
    while f * f <= d:
        while d % (f * f) == 0:
            d //= f * f
            s *= f
        if d % f == 0:
            d //= f
            core *= f
        f += 1
    return s, core * d


class QuadExt:
    """The number ``a + b*sqrt(D)`` with rational a, b and square-free D >= 0."""

    __slots__ = ("a", "b", "D")

    def __init__(self, a, b=0, D: int = 0):
        a, b, D = Fraction(a), Fraction(b), int(D)
        if D < 0:
            raise ValueError("D must be non-negative")
        if D > 1 and b:
            s, D = _squarefree_split(D)
            b *= s
        if D <= 1 or not b:
            a, b, D = a + b * D, Fraction(0), 0
        self.a, self.b, self.D = a, b, D

    # -- construction helpers -------------------------------------------
    @classmethod
    def coerce(cls, x) -> "QuadExt":
        return x if isinstance(x, QuadExt) else cls(Fraction(x))

    def _common_d(self, other: "QuadExt") -> int:
        if self.D and other.D and self.D != other.D:
            raise ValueError(f"mixed radicands sqrt({self.D}) and sqrt({other.D})")
        return self.D or other.D

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        try:
            other = QuadExt.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return QuadExt(self.a + other.a, self.b + other.b, self._common_d(other))

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.D)

    def __sub__(self, other):
        return self + (-QuadExt.coerce(other))

    def __rsub__(self, other):
        return QuadExt.coerce(other) - self

    def __mul__(self, other):
        try:
            other = QuadExt.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        D = self._common_d(other)
        return QuadExt(self.a * other.a + self.b * other.b * D,
                       self.a * other.b + self.b * other.a, D)

    __rmul__ = __mul__

    def conjugate(self) -> "QuadExt":
        return QuadExt(self.a, -self.b, self.D)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.D

    def reciprocal(self) -> "QuadExt":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("reciprocal of zero")
        return QuadExt(self.a / n, -self.b / n, self.D)

    def __truediv__(self, other):
        return self * QuadExt.coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return QuadExt.coerce(other) * self.reciprocal()

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- exact predicates --------------------------------------------------
    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0 or sa == sb:
            return sa or sb
        if sa == 0:
            return sb
        # opposite signs: compare a^2 with b^2 D
        lhs, rhs = self.a * self.a, self.b * self.b * self.D
        return sa if lhs > rhs else sb

    def floor(self) -> int:
        if not self.b:
            return math.floor(self.a)
        w = math.lcm(self.a.denominator, self.b.denominator)
        A = self.a.numerator * (w // self.a.denominator)
        B = self.b.numerator * (w // self.b.denominator)
        s = math.isqrt(B * B * self.D)
        # B*B*D is never a perfect square here, so sqrt lies strictly in (s, s+1)
        if B > 0:
            return (A + s) // w
        return (A - s - 1) // w

    def is_rational(self) -> bool:
        return not self.b

    def __eq__(self, other):
        try:
            other = QuadExt.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.a == other.a and self.b == other.b and self.D == other.D

    def __hash__(self):
        return hash((self.a, self.b, self.D))

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    # -- conversions -------------------------------------------------------
    def bracket(self, bits: int) -> tuple[Fraction, Fraction]:
        """Dyadic interval [m/2^bits, (m+1)/2^bits] containing the value."""
        scale = 1 << bits
        m = (self * scale).floor()
        if not self.b:
            v = self.a
            return v, v
        return Fraction(m, scale), Fraction(m + 1, scale)

    def __float__(self):
        if not self.b:
            return float(self.a)
        if self.sign() == 0:
            return 0.0
        approx = float(self.a) + float(self.b) * math.sqrt(self.D)
        k = 70 - (math.frexp(approx)[1] if approx else -200)
        while True:
            k = max(k, 0)
            m = (self * (1 << k)).floor()
            if abs(m) >= 1 << 62:
                return float(Fraction(m, 1 << k))
            k += 64

    def __repr__(self):
        if not self.b:
            return f"QuadExt({self.a})"
        return f"QuadExt({self.a} + {self.b}*sqrt({self.D}))"


def sign(x) -> int:
    return QuadExt.coerce(x).sign()


def nearest_frac(x) -> tuple[int, QuadExt]:
    """Split ``x = m + f`` with integer m and -1/2 <= f < 1/2."""
    x = QuadExt.coerce(x)
    m = (x + Fraction(1, 2)).floor()
    return m, x - m


@dataclass(frozen=True)
class CertInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty interval")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        x = QuadExt.coerce(x)
        return x >= self.lo and x <= self.hi

    def __float__(self):
        return float(self.mid)


# ---------------------------------------------------------------------------
# rotation angle specifications

GOLDEN = QuadExt(Fraction(1, 2), Fraction(1, 2), 5)
POW2_CAP = 1 << 62


@dataclass(frozen=True)
class ThetaSpec:
    text: str

    def exact(self) -> QuadExt | None:
        """Exact value, or None for quotient streams."""
        return None


@dataclass(frozen=True)
class Rational(ThetaSpec):
    value: Fraction = Fraction(0)

    def exact(self):
        return QuadExt(self.value)


@dataclass(frozen=True)
class Surd(ThetaSpec):
    value: QuadExt = GOLDEN

    def exact(self):
        return self.value


@dataclass(frozen=True)
class QuotientStream(ThetaSpec):
    """theta = [a0; a1, a2, ...] given by an explicit prefix or a rule.

    Rules: ``const`` (a_i = c), ``arith`` (a_i = i + 1), ``pow2``
    (a_i = 2^i, capped at 2^62).  Rules start at a0 = 0.
    """

    a0: int = 0
    terms: tuple[int, ...] | None = None
    rule: str | None = None
    const: int = 1

    def __post_init__(self):
        if self.terms is not None and any(a < 1 for a in self.terms):
            raise ValueError("partial quotients must be positive")
        if self.rule not in (None, "const", "arith", "pow2"):
            raise ValueError(f"unknown rule {self.rule!r}")
        if self.rule == "const" and self.const < 1:
            raise ValueError("constant quotient must be positive")

    @property
    def is_infinite(self) -> bool:
        return self.terms is None

    def quotient(self, i: int) -> int:
        if i == 0:
            return self.a0
        if self.terms is not None:
            if i > len(self.terms):
                raise StreamExhausted(f"quotient a_{i} beyond explicit list of {len(self.terms)}")
            return self.terms[i - 1]
        if self.rule == "const":
            return self.const
        if self.rule == "arith":
            return i + 1
        return 1 << i if i < 62 else POW2_CAP

    @property
    def bounded_rule(self) -> bool:
        return self.rule == "const"


_SURD_RE = re.compile(
    r"^\(\s*([+-]?\d+)\s*([+-])\s*sqrt\(\s*(\d+)\s*\)\s*\)\s*/\s*([+-]?\d+)$")


def parse_theta(text: str) -> ThetaSpec:
    """Parse ``golden | rat:p/q | surd:(P+sqrt(D))/Q | cf:a0,a1,... | cf-rule:...``."""
    s = text.strip()
    if s == "golden":
        return Surd(s, GOLDEN)
    kind, _, body = s.partition(":")
    if kind == "rat":
        return Rational(s, Fraction(body))
    if kind == "surd":
        m = _SURD_RE.match(body.replace(" ", ""))
        if not m:
            raise ValueError(f"bad surd spec {text!r}")
        P, op, D, Q = int(m[1]), m[2], int(m[3]), int(m[4])
        if Q == 0:
            raise ValueError("zero denominator")
        value = QuadExt(Fraction(P, Q), Fraction(1 if op == "+" else -1, Q), D)
        if value.is_rational():
            return Rational(s, value.a)
        return Surd(s, value)
    if kind == "cf":
        parts = [int(p) for p in body.split(",") if p.strip()]
        if not parts:
            raise ValueError("empty quotient list")
        return QuotientStream(s, a0=parts[0], terms=tuple(parts[1:]))
    if kind == "cf-rule":
        name, _, arg = body.partition(":")
        if name == "const":
            return QuotientStream(s, rule="const", const=int(arg or 1))
        if name in ("arith", "pow2"):
            return QuotientStream(s, rule=name)
        raise ValueError(f"unknown quotient rule {body!r}")
    raise ValueError(
        f"unsupported theta {text!r}; decimals are rejected because their "
        "partial quotients cannot be certified")


# ---------------------------------------------------------------------------
# certified evaluation

def stream_convergents(theta: QuotientStream):
    """Yield (i, p_i, q_i) for i = 0, 1, ... until the stream runs out."""
    p_prev, q_prev = 1, 0
    p, q = theta.a0, 1
    yield 0, p, q
    i = 0
    while True:
        i += 1
        try:
            a = theta.quotient(i)
        except StreamExhausted:
            return
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        yield i, p, q


def stream_sandwich(theta: QuotientStream, eps: Fraction) -> tuple[int, int, int, int]:
    """Consecutive convergents (p_N, q_N, p_{N+1}, q_{N+1}) with 1/(q_N q_{N+1}) <= eps."""
    prev = None
    for _, p, q in stream_convergents(theta):
        if prev is not None and Fraction(1, prev[1] * q) <= eps:
            return prev[0], prev[1], p, q
        prev = (p, q)
    raise StreamExhausted(f"quotient list of {theta.text} too short for eps={float(eps):.3g}")


def eval_theta(theta: ThetaSpec, eps) -> CertInterval:
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if isinstance(theta, Rational):
        return CertInterval(theta.value, theta.value)
    if isinstance(theta, Surd):
        bits = max(0, math.ceil(math.log2(1 / eps)) if eps < 1 else 0)
        while Fraction(1, 1 << bits) > eps:
            bits += 1
        return CertInterval(*theta.value.bracket(bits))
    p0, q0, p1, q1 = stream_sandwich(theta, eps)
    a, b = Fraction(p0, q0), Fraction(p1, q1)
    return CertInterval(min(a, b), max(a, b))


def frac_q_theta(theta: ThetaSpec, q: int, eps=Fraction(1, 1 << 64)):
    """{q*theta} in [-1/2, 1/2): exact QuadExt, or a CertInterval for streams."""
    if q < 1:
        raise ValueError("q must be >= 1")
    exact = theta.exact()
    if exact is not None:
        return nearest_frac(exact * q)[1]
    eps = Fraction(eps)
    for _ in range(256):
        iv = eval_theta(theta, eps / q)
        lo, hi = iv.lo * q, iv.hi * q
        m = math.floor(lo + Fraction(1, 2))
        if math.floor(hi + Fraction(1, 2)) == m:
            return CertInterval(lo - m, hi - m)
        eps /= 2
    raise StreamExhausted("could not separate {q theta} from the half-integer boundary")


def fixed_point_frac(theta: ThetaSpec, n: int, bits: int) -> int:
    """floor(({n*theta} mod 1) * 2^bits), with {.} taken in [0, 1).

    Exact for rational and surd angles; for streams the error is at most one
    unit in the last place.
    """
    exact = theta.exact()
    scale = 1 << bits
    if exact is not None:
        v = exact * n
        return (v * scale).floor() - v.floor() * scale
    iv = eval_theta(theta, Fraction(1, scale * max(n, 1) * 4))
    lo = iv.lo * n
    return math.floor((lo - math.floor(lo)) * scale)
