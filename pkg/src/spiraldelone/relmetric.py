"""The relative distance d_beta and sampled checks of the scalar comparison
inequalities used to move between its three normalisations."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ULP_SLACK = 4


class DegenerateDenominator(ZeroDivisionError):
    pass


def _pow_abs(z: complex, beta: float) -> float:
    r = abs(z)
    if r == 0:
        if beta > 0:
            return 0.0
        if beta == 0:
            return 1.0
        raise DegenerateDenominator("|0|^beta with beta < 0")
    return r ** beta


def d_beta(z: complex, w: complex, beta: float) -> float:
    """|z - w| / (|z|^beta + |w|^beta)."""
    if beta >= 1:
        raise ValueError("beta must be < 1")
    den = _pow_abs(z, beta) + _pow_abs(w, beta)
    if den == 0:
        raise DegenerateDenominator("|z|^beta + |w|^beta = 0")
    return abs(z - w) / den


def normalizations(z: complex, zeta: complex, beta: float) -> tuple[float, float, float]:
    """|z-zeta| scaled by |z|^beta, by |zeta|^beta and by their mean."""
    d = abs(z - zeta)
    a, b = _pow_abs(z, beta), _pow_abs(zeta, beta)
    if a == 0 or b == 0:
        raise DegenerateDenominator("zero modulus in normalisation")
    return d / a, d / b, d / ((a + b) / 2)


def normalizations_array(d, rz, rzeta, beta: float):
    """Vectorised normalisations from distances and the two moduli."""
    a = np.power(rz, beta)
    b = np.power(rzeta, beta)
    return d / a, d / b, d / ((a + b) / 2)


# ---------------------------------------------------------------------------
# scalar lemma suites

def _lt_violation(lhs, rhs):
    """lhs < rhs is violated only beyond the ulp band."""
    slack = ULP_SLACK * np.spacing(np.maximum(np.abs(lhs), np.abs(rhs)))
    return lhs - rhs >= slack


def _le_violation(lhs, rhs):
    slack = ULP_SLACK * np.spacing(np.maximum(np.abs(lhs), np.abs(rhs)))
    return lhs - rhs > slack


def _powm1(base_m1, expo):
    """(1 + base_m1)**expo - 1 without cancellation."""
    return np.expm1(expo * np.log1p(base_m1))


def _loguniform(rng, lo, hi, n):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), n))


def _offset_points(rng, z, rho_max, n):
    """zeta = z + rho e^{i psi} with rho uniform in (0, rho_max); z real > 0."""
    rho = rng.uniform(0, 1, n) * rho_max
    psi = rng.uniform(-np.pi, np.pi, n)
    zeta_abs = np.hypot(z + rho * np.cos(psi), rho * np.sin(psi))
    return rho, zeta_abs


def _lemma15(rng, n):
    beta = rng.uniform(0.01, 0.95, n)
    r = _loguniform(rng, 0.05, 20, n)
    rp = r * (1 + rng.uniform(0.01, 0.99, n))
    logM = np.log(r * rp / (2 * (rp - r))) / (1 - beta)
    ok = np.abs(logM) < 200
    z = np.exp(np.clip(logM, -200, 200) + rng.uniform(0, 3, n))
    rho, za = _offset_points(rng, z, r * z ** beta, n)
    hyp = ok & (rho < r * z ** beta) & (za > 0)
    lhs, rhs = rho, rp / 2 * (z ** beta + za ** beta)
    return hyp, _lt_violation(lhs, rhs), np.stack([beta, r, rp, z, rho, za], 1)


def _lemma2(rng, n):
    beta = rng.uniform(0.01, 0.95, n)
    r = _loguniform(rng, 0.05, 20, n)
    rp = r * (1 + rng.uniform(0.01, 3, n))
    logM = np.log(r * rp / (rp - r)) / (1 - beta)
    ok = np.abs(logM) < 200
    z = np.exp(np.clip(logM, -200, 200) + rng.uniform(0, 3, n))
    rho, za = _offset_points(rng, z, 2 * r * z ** beta, n)
    h16 = rho < r * z ** beta
    h17 = rho < r / 2 * (z ** beta + za ** beta)
    hyp = ok & (h16 | h17) & (za > 0)
    return hyp, _lt_violation(rho, rp * za ** beta), np.stack([beta, r, rp, z, rho, za], 1)


def _lemma18(rng, n):
    alpha = _loguniform(rng, 1e-3, 1e3, n)
    x = rng.uniform(0, 1, n) / alpha ** 2
    hyp = x > 0
    lhs = np.exp(alpha * np.log1p(x))
    return hyp, _lt_violation(lhs, 1 + 2 * alpha * x), np.stack([alpha, x], 1)


def _lemma_one_minus_h(rng, n):
    delta = _loguniform(rng, 1e-3, 1e3, n)
    h = rng.uniform(0, 0.5, n)
    hyp = h > 0
    lhs = np.exp(delta * np.log1p(-h))
    # strict ">" conclusion: violated when rhs - lhs reaches the band
    return hyp, _lt_violation(1 - 2 * delta * h, lhs), np.stack([delta, h], 1)


def _lemma19(rng, n):
    delta = rng.uniform(1e-3, 8, n)
    beta = -delta
    r = _loguniform(rng, 0.01, 10, n)
    rp = r * (1 + rng.uniform(0.01, 3, n))
    M = np.maximum.reduce([np.ones(n), r * delta ** 2, 2 * r * rp * delta / (rp - r), 2 * r])
    z = M * np.exp(rng.uniform(0, 3, n))
    # |z - zeta| is at most max(r|z|^b, r|zeta|^b) <= r, so offsets up to 2r suffice
    rho, za = _offset_points(rng, z, 2 * r, n)
    item = rng.integers(1, 4, n)
    zb, wb = z ** beta, za ** beta
    hyp1 = rho < r * zb
    hyp2 = rho < r / 2 * (zb + wb)
    hyp3 = rho < r * wb
    hyp = (za >= 1) & np.select([item == 1, item == 2], [hyp1, hyp2], hyp3)
    v1 = _lt_violation(rho, rp * wb) | _lt_violation(rho, rp / 2 * (zb + wb))
    v2 = _lt_violation(rho, rp * wb)
    v3 = _lt_violation(rho, rp * zb)
    viol = np.select([item == 1, item == 2], [v1, v2], v3)
    return hyp, viol, np.stack([beta, r, rp, z, rho, za, item], 1)


def _lemma12(rng, n):
    c = _loguniform(rng, 1e-3, 1e3, n)
    alpha = rng.uniform(0, 1, n)
    x = rng.uniform(0, 1, n)
    hyp = (alpha > 0) & (x > 0)
    lhs = _powm1(c * x, alpha)
    rhs = x * _powm1(c, alpha)
    return hyp, _le_violation(rhs, lhs), np.stack([c, alpha, x], 1)


def _lemma21(rng, n):
    alpha = rng.uniform(0, 1, n)
    x = rng.uniform(0, 1, n) / (1 - alpha)
    hyp = (alpha > 0) & (x > 0)
    lhs = np.exp(alpha * np.log1p(x))
    return hyp, _le_violation(1 + alpha * x / 2, lhs), np.stack([alpha, x], 1)


LEMMA_SAMPLERS = {
    "Lemma 15": (_lemma15, ("beta", "r", "r_prime", "abs_z", "dist", "abs_zeta")),
    "Lemma 2": (_lemma2, ("beta", "r", "r_prime", "abs_z", "dist", "abs_zeta")),
    "Lemma 18": (_lemma18, ("alpha", "x")),
    "Lemma (1-h)^delta": (_lemma_one_minus_h, ("delta", "h")),
    "Lemma 19": (_lemma19, ("beta", "r", "r_prime", "abs_z", "dist", "abs_zeta", "item")),
    "Lemma 12": (_lemma12, ("c", "alpha", "x")),
    "Lemma 21": (_lemma21, ("alpha", "x")),
}


@dataclass
class ViolationReport:
    lemma: str
    samples: int
    violations: int
    witness: dict | None = None
    per_block: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violations == 0


def _run_lemma(name: str, sample_count: int, seed: int, block_size: int = 1 << 16) -> ViolationReport:
    from .harness.rng import block_rng

    sampler, fields = LEMMA_SAMPLERS[name]
    lemma_key = list(LEMMA_SAMPLERS).index(name)
    report = ViolationReport(name, 0, 0)
    block = 0
    while report.samples < sample_count:
        rng = block_rng(seed, lemma_key, block)
        need = min(block_size, sample_count - report.samples)
        hyp, viol, params = sampler(rng, 2 * need + 64)
        idx = np.flatnonzero(hyp)[:need]
        bad = idx[viol[idx]]
        report.samples += len(idx)
        report.violations += len(bad)
        if len(bad) and report.witness is None:
            report.witness = {f: float(v) for f, v in zip(fields, params[bad[0]])}
        block += 1
    return report


def scalar_lemma_suite(sample_count: int, seed: int, lemmas=None) -> list[ViolationReport]:
    """Sample each lemma's hypotheses and count violated conclusions."""
    names = lemmas or list(LEMMA_SAMPLERS)
    return [_run_lemma(n, sample_count, seed) for n in names]


def triangle_violations(count: int, seed: int, beta_range=(0.5, 0.999)) -> int:
    """Random triples violating d(x,z) <= d(x,y) + d(y,z) beyond the ulp band."""
    from .harness.rng import block_rng

    rng = block_rng(seed, 99, 0)
    beta = rng.uniform(*beta_range, count)
    scale = _loguniform(rng, 1e-3, 1e3, (3, count))
    pts = scale * np.exp(1j * rng.uniform(-np.pi, np.pi, (3, count)))
    x, y, z = pts

    def d(u, v):
        return np.abs(u - v) / (np.abs(u) ** beta + np.abs(v) ** beta)

    return int(np.count_nonzero(_le_violation(d(x, z), d(x, y) + d(y, z))))
