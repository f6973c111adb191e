"""Command line front end.

Exit status: 0 when every assertion attached to the job holds (or the job
asserts nothing), 1 when one fails (the witness is in the report), 2 on usage
errors.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .. import contfrac, delone, relmetric, scenery, spiral
from ..exactreal import Rational, parse_theta
from .registry import registry
from .report import Report, columns_from_arrays, to_json

OUT_DIR_ENV = "SPIRALDELONE_OUT_DIR"
PACK_TOL = 1e-9
COVER_TOL = 1e-6
WINDOW_TOL = 1e-9


class UsageError(ValueError):
    pass


@dataclass
class JobSpec:
    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    emit: str = "json"
    out: str | None = None
    threads: int = 1  # speed only, never echoed

    def echo(self) -> dict:
        return {"command": self.command, "params": self.params, "seed": self.seed, "emit": self.emit}


# ---------------------------------------------------------------------------
# argument helpers

def _alpha(text: str) -> Fraction:
    try:
        a = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad alpha {text!r}") from exc
    if a <= 0:
        raise UsageError("alpha must be positive")
    return a


def _pair(text: str, sep: str, kind=float):
    try:
        lo, hi = (kind(x) for x in text.split(sep))
    except ValueError as exc:
        raise UsageError(f"expected LO{sep}HI, got {text!r}") from exc
    return lo, hi


def _params(p: dict):
    try:
        theta = parse_theta(p["theta"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return spiral.SpiralParams(_alpha(p["alpha"]), theta)


def _beta(p: dict, params) -> float:
    if p.get("beta") is None:
        return float(params.beta_star)
    beta = float(p["beta"])
    if beta >= 1:
        raise UsageError("beta must be < 1")
    return beta


# ---------------------------------------------------------------------------
# handlers

def _cf(job: JobSpec) -> Report:
    p = job.params
    theta = parse_theta(p["theta"])
    depth = int(p.get("depth", 20))
    exp = contfrac.expand(theta, depth)
    convs = contfrac.convergents(theta, len(exp))
    rows = []
    for c in convs:
        if c.i < 0:
            continue
        q = contfrac.quality(theta, c.p, c.q) if c.q else 0
        rows.append([c.i, exp.quotients[c.i], c.p, c.q, float(q)])
    viol = [(r.i, r.k) for r in contfrac.lemma8_suite(theta, len(exp)) if not r.ok]
    rep = contfrac.badly_approx_report(theta, depth)
    summary = {"expansion": str(exp), "terminated": exp.terminated, "max_quotient": rep.max_quotient,
               "certified_bounded": rep.certified_bounded, "lemma8_violations": viol}
    return Report(job.command, job.echo(), ["i", "a_i", "p_i", "q_i", "quality"], rows, summary, not viol)


def _spiral_emit(job: JobSpec) -> Report:
    params = _params(job.params)
    R1, R2 = _pair(job.params["annulus"], ",")
    try:
        arr = spiral.annulus_arrays(params, R1, R2)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    cols, rows = columns_from_arrays(arr)
    return Report(job.command, job.echo(), cols, rows, {"count": len(rows)})


def _t_max(theta, text: str) -> float:
    if text.startswith("t"):
        return float(contfrac.critical_time(theta, int(text[1:])))
    return float(text)


def _label(label) -> str:
    if label is None:
        return ""
    i, k = label
    return str(i) if k is None else f"{i},{k}"


def _scenery_scan(job: JobSpec) -> Report:
    p = job.params
    theta = parse_theta(p["theta"])
    t_max = _t_max(theta, str(p["t_max"]))
    if t_max < 1:
        raise UsageError("t-max must be >= 1")
    grid = scenery.default_grid(theta, t_max, int(p.get("grid", 1000)))
    items = delone.pmap(lambda g: scenery.snapshot(theta, g[0], g[1]), grid, job.threads)
    rows = [[s.t, _label(s.label), s.shortest_len, s.covering_radius] for s in items]
    scan = scenery.SceneryScan(items)
    summary = {"min_shortest": scan.min_shortest, "max_covering": scan.max_covering, "points": len(rows)}
    passed = None
    if not isinstance(theta, Rational):
        try:
            M, _ = delone.prefix_M(theta)
            lo, hi = math.sqrt(2 / (2 + M)), 3 * math.sqrt(M + 1)
            summary.update(M=M, shortest_floor=lo, covering_ceiling=hi)
            passed = scan.min_shortest >= lo - WINDOW_TOL and scan.max_covering <= hi + WINDOW_TOL
        except delone.UnboundedM:
            pass
    return Report(job.command, job.echo(), ["t", "label", "shortest_len", "covering_radius"], rows, summary, passed)


def _scan_packing(job: JobSpec) -> Report:
    params = _params(job.params)
    beta = _beta(job.params, params)
    lo, hi = _pair(job.params["nu"], ":", int)
    rep = delone.packing_scan(params, beta, np.arange(lo, hi + 1, dtype=np.int64), job.threads)
    cols, rows = columns_from_arrays({"nu": rep.nu, "q": rep.q, "gap": rep.gap,
                                      "n1": rep.n1, "n2": rep.n2, "n3": rep.n3})
    summary = {"beta": beta, "min_n1": rep.min_n1, "witness": rep.witness, "packing_lower": rep.lower_bound}
    passed = None
    if rep.lower_bound is not None and len(rep):
        passed = rep.min_n1 >= rep.lower_bound - PACK_TOL
    return Report(job.command, job.echo(), cols, rows, summary, passed)


def _covering(job: JobSpec, params, beta):
    R1, R2 = _pair(job.params["annulus"], ",")
    try:
        return delone.covering_scan(params, beta, (R1, R2), int(job.params.get("samples", 10_000)),
                                    job.seed, job.threads)
    except delone.AnnulusTooSmall as exc:
        raise UsageError(str(exc)) from exc


def _scan_covering(job: JobSpec) -> Report:
    params = _params(job.params)
    beta = _beta(job.params, params)
    rep = _covering(job, params, beta)
    cols, rows = columns_from_arrays({"x": rep.z.real, "y": rep.z.imag, "n": rep.n, "dist": rep.dist,
                                      "n1": rep.n1, "n2": rep.n2, "n3": rep.n3})
    summary = {"beta": beta, "max_n2": rep.max_n2, "witness": rep.witness,
               "covering_upper": rep.upper_bound, "threshold_t": rep.threshold}
    passed = None
    if rep.upper_bound is not None and len(rep):
        passed = rep.max_n2 <= rep.upper_bound + COVER_TOL
    return Report(job.command, job.echo(), cols, rows, summary, passed)


def _verify_lemmas(job: JobSpec) -> Report:
    n = int(job.params.get("samples", 1_000_000))
    reps = relmetric.scalar_lemma_suite(n, job.seed)
    rows = [[r.lemma, r.samples, r.violations, "" if r.witness is None else to_json(r.witness, 0).replace("\n", "")]
            for r in reps]
    passed = all(r.ok for r in reps)
    summary = {"total_violations": sum(r.violations for r in reps)}
    return Report(job.command, job.echo(), ["lemma", "samples", "violations", "witness"], rows, summary, passed)


def _verdict(job: JobSpec) -> Report:
    params = _params(job.params)
    beta = float(params.beta_star)
    lo, hi = _pair(job.params.get("nu", "1:100000"), ":", int)
    pack = delone.packing_scan(params, beta, np.arange(lo, hi + 1, dtype=np.int64), job.threads)
    cover = _covering(job, params, beta)
    try:
        M, certified = delone.prefix_M(params.theta)
    except delone.UnboundedM:
        M, certified = None, False
    dense = None if cover.upper_bound is None else cover.max_n2 <= cover.upper_bound + COVER_TOL
    discrete = None if pack.lower_bound is None else pack.min_n1 >= pack.lower_bound - PACK_TOL
    verdict = {"relatively_dense_evidence": dense, "uniformly_discrete_evidence": discrete,
               "theta_prefix_M": M, "M_certified": certified, "beta": beta,
               "max_n2": cover.max_n2, "covering_upper": cover.upper_bound,
               "min_n1": pack.min_n1, "packing_lower": pack.lower_bound}
    rows = [[k, v] for k, v in verdict.items()]
    return Report(job.command, job.echo(), ["key", "value"], rows, verdict)


def _registry(job: JobSpec) -> Report:
    rows = [list(e) for e in registry()]
    return Report(job.command, job.echo(), ["lemma", "module", "test"], rows, {"entries": len(rows)})


HANDLERS = {
    "cf": _cf,
    "spiral emit": _spiral_emit,
    "scenery scan": _scenery_scan,
    "scan packing": _scan_packing,
    "scan covering": _scan_covering,
    "verify lemmas": _verify_lemmas,
    "verdict": _verdict,
    "registry": _registry,
}


def run(job: JobSpec) -> Report:
    try:
        handler = HANDLERS[job.command]
    except KeyError as exc:
        raise UsageError(f"unknown command {job.command!r}") from exc
    return handler(job)


# ---------------------------------------------------------------------------
# argparse

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--emit", choices=("json", "csv"), default="json")
    common.add_argument("--out", help=f"output file (relative paths resolve under ${OUT_DIR_ENV} if set)")
    common.add_argument("--threads", type=int, default=1, help="worker threads; affects speed only")
    common.add_argument("--seed", type=int, default=0)

    spiral_args = argparse.ArgumentParser(add_help=False)
    spiral_args.add_argument("--alpha", required=True)
    spiral_args.add_argument("--theta", required=True)

    ap = argparse.ArgumentParser(prog="spiraldelone", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("cf", parents=[common], help="continued fraction data")
    p.add_argument("--theta", required=True)
    p.add_argument("--depth", type=int, default=20)

    p = sub.add_parser("spiral", help="spiral points")
    s = p.add_subparsers(dest="sub", required=True)
    e = s.add_parser("emit", parents=[common, spiral_args])
    e.add_argument("--annulus", required=True, help="R1,R2")

    p = sub.add_parser("scenery", help="lattice family statistics")
    s = p.add_subparsers(dest="sub", required=True)
    e = s.add_parser("scan", parents=[common])
    e.add_argument("--theta", required=True)
    e.add_argument("--t-max", required=True, help="number, or tN for the critical time t_N")
    e.add_argument("--grid", type=int, default=1000)

    p = sub.add_parser("scan", help="packing / covering scans")
    s = p.add_subparsers(dest="sub", required=True)
    for name in ("packing", "covering"):
        e = s.add_parser(name, parents=[common, spiral_args])
        b = e.add_mutually_exclusive_group(required=True)
        b.add_argument("--beta", type=float)
        b.add_argument("--beta-critical", action="store_true")
        if name == "packing":
            e.add_argument("--nu", required=True, help="LO:HI (inclusive)")
        else:
            e.add_argument("--annulus", required=True, help="R1,R2")
            e.add_argument("--samples", type=int, default=10_000)

    p = sub.add_parser("verify", help="sampled scalar inequality suites")
    s = p.add_subparsers(dest="sub", required=True)
    e = s.add_parser("lemmas", parents=[common])
    e.add_argument("--samples", type=int, default=1_000_000)

    p = sub.add_parser("verdict", parents=[common, spiral_args], help="combined evidence at the critical beta")
    p.add_argument("--nu", default="1:100000")
    p.add_argument("--annulus", default="100,1000")
    p.add_argument("--samples", type=int, default=10_000)

    sub.add_parser("registry", parents=[common], help="claim -> check mapping")
    return ap


_NON_PARAMS = {"cmd", "sub", "emit", "out", "threads", "seed", "beta_critical"}


def job_from_args(ns: argparse.Namespace) -> JobSpec:
    command = ns.cmd if getattr(ns, "sub", None) is None else f"{ns.cmd} {ns.sub}"
    params = {k: v for k, v in sorted(vars(ns).items()) if k not in _NON_PARAMS and v is not None}
    if getattr(ns, "beta_critical", False):
        params["beta"] = None
    return JobSpec(command, params, ns.seed, ns.emit, ns.out, max(1, ns.threads))


def resolve_out(out: str | None) -> Path | None:
    if out is None:
        return None
    path = Path(out)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def main(argv=None) -> int:
    ns = _parser().parse_args(argv)
    job = job_from_args(ns)
    try:
        report = run(job)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = report.render(job.emit)
    path = resolve_out(job.out)
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    if report.passed is False:
        witness = to_json(report.summary.get("witness", report.summary), 0).replace("\n", " ")
        print(f"assertion failed: {witness}", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
