"""Command-line front door: exposes the library, runs verification
sweeps, and emits machine-readable reports.

Exit codes: 0 success, 1 verification assertion failure (report still
written), 2 invalid arguments or malformed input, 3 enumeration cap
exceeded, 4 iteration budget exhausted.  All error paths print a
structured JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from . import calibration
from .bohr import (
    BohrSet,
    PrimeGroup,
    bohr_members,
    dual_norm,
    regular_pmf,
    tv_distance,
    word_norm,
    word_norm_table,
)
from .errors import (
    BudgetExhausted,
    DimensionCapExceeded,
    EnumerationCapExceeded,
    GblabError,
    SupportTooLarge,
)
from .gowers import JointSampler, cauchy_form, u2_local
from .inverse import inverse_u2_local, u2_correlations
from .khintchine import (
    DriverConfig,
    greedy_ap_free,
    iteration_driver,
    r4_harness,
)
from .spectral import GroupFunction, fde_report
from .torus import (
    DilatedTorus,
    DualFrequency,
    LocalPhase,
    bohr_basis,
    bohr_basis_norm_bound_holds,
    bohr_basis_unique_in_half_box,
    complement_torus,
    validate_ap_identity,
    validate_phase,
)

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_USAGE = 2
EXIT_CAP = 3
EXIT_BUDGET = 4


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def frac(s: str) -> Fraction:
    """Parse "num/den" or an exact decimal string."""
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"not a fraction: {s!r}") from e


def frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def int_list(s: str) -> list[int]:
    try:
        return [int(t) for t in s.split(",") if t]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {s!r}") from e


@dataclass
class RunConfig:
    seed: int = 0
    cap: int = 10**6
    eta: float = 0.2
    shrink: Fraction = Fraction(1, 50)
    delta_e: float = 0.1
    budget: int = 40
    waste_threshold: float = 0.05
    thickness_threshold: float = 0.6
    primes: list[int] = field(default_factory=lambda: [7, 11, 13])
    out_dir: str | None = None
    workers: int = 1

    @classmethod
    def load(cls, path: str | None) -> "RunConfig":
        cfg = cls()
        if path:
            for line in Path(path).read_text().splitlines():
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, _, raw = line.partition("=")
                key = key.strip()
                raw = raw.strip()
                if not hasattr(cfg, key):
                    raise ValueError(f"unknown config key {key!r}")
                cur = getattr(cfg, key)
                if isinstance(cur, Fraction):
                    setattr(cfg, key, Fraction(raw))
                elif isinstance(cur, bool):
                    setattr(cfg, key, raw.lower() in ("1", "true", "yes"))
                elif isinstance(cur, int):
                    setattr(cfg, key, int(raw))
                elif isinstance(cur, float):
                    setattr(cfg, key, float(raw))
                elif isinstance(cur, list):
                    setattr(cfg, key, [int(t) for t in raw.split(",") if t])
                else:
                    setattr(cfg, key, raw)
        env_seed = os.environ.get("GBLAB_SEED")
        if env_seed is not None:
            cfg.seed = int(env_seed)
        return cfg


def emit(report: dict, cfg: RunConfig, name: str) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if cfg.out_dir:
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        Path(cfg.out_dir, name).write_text(text + "\n")
    else:
        print(text)


def error_exit(code: int, err_code: str, message: str, argument: str | None = None):
    payload = {"code": err_code, "message": message}
    if argument is not None:
        payload["argument"] = argument
    print(json.dumps(payload), file=sys.stderr)
    raise SystemExit(code)


def _pmap(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with Pool(workers) as pool:
        return pool.map(fn, items)


# ---------------------------------------------------------------------------
# bohr subcommands


def cmd_bohr(args, cfg: RunConfig) -> int:
    g = PrimeGroup(args.p)
    if args.action == "members":
        B = BohrSet(g, args.S, args.rho, shift=args.shift)
        members = bohr_members(B, cap=cfg.cap)
        report = B.to_json()
        report["members"] = members
        report["count"] = len(members)
        emit(report, cfg, "bohr_members.json")
        return EXIT_OK
    if args.action == "pmf":
        B = BohrSet(g, args.S, args.rho, shift=args.shift)
        P = regular_pmf(B, cap=cfg.cap)
        emit(P.to_json(), cfg, "bohr_pmf.json")
        return EXIT_OK
    if args.action == "norms":
        if args.a is None:
            error_exit(EXIT_USAGE, "missing-argument", "norms needs --a", "--a")
        report = {
            "p": args.p,
            "S": args.S,
            "a": args.a,
            "word": word_norm(args.a, args.S, args.p),
            "dual": frac_str(dual_norm(args.a, args.S, args.p)),
        }
        emit(report, cfg, "bohr_norms.json")
        return EXIT_OK
    if args.action == "basis":
        basis = bohr_basis(args.S, args.p, cap=cfg.cap)
        report = {
            "p": basis.p,
            "S": list(basis.S),
            "elements": basis.elements,
            "sizes": [_fmt(N) for N in basis.sizes],
            "rep_factor": _fmt(basis.rep_factor),
            "prod_sizes_over_p": _fmt(basis.prod_sizes_over_p),
            "norm_bound_holds": bohr_basis_norm_bound_holds(basis),
        }
        emit(report, cfg, "bohr_basis.json")
        return EXIT_OK
    error_exit(EXIT_USAGE, "unknown-action", f"unknown bohr action {args.action!r}")


# ---------------------------------------------------------------------------
# verification suites


RHO_GRID = [Fraction(1, d) for d in range(8, 1, -1)]


def _frequency_sets(p: int, max_size: int = 2):
    out = [(a,) for a in range(1, p)]
    if max_size >= 2:
        out += [(a, b) for a in range(1, p) for b in range(a + 1, p)]
    if max_size >= 3:
        out += [
            (a, b, c)
            for a in range(1, p)
            for b in range(a + 1, p)
            for c in range(b + 1, p)
        ]
    return out


def suite_size_bohr(cfg: RunConfig) -> tuple[bool, dict]:
    """Exact size bounds, norm triangle inequalities, norm duality and
    regular-pmf normalization, exhaustively over a small grid."""
    checked = 0
    failures = []
    for p in cfg.primes:
        g = PrimeGroup(p)
        for S in _frequency_sets(p):
            dn = [dual_norm(a, S, p) for a in range(p)]
            words = word_norm_table(S, p)
            for a in range(p):
                for b in range(p):
                    if dn[(a + b) % p] > dn[a] + dn[b]:
                        failures.append(["dual-triangle", p, list(S), a, b])
                    if words[(a + b) % p] > words[a] + words[b]:
                        failures.append(["word-triangle", p, list(S), a, b])
                for lam in range(p):
                    if g.circle_norm(a * lam) > dn[a] * words[lam]:
                        failures.append(["duality", p, list(S), a, lam])
            for rho in RHO_GRID:
                small = sum(1 for a in range(p) if dn[a] < rho)
                big = sum(1 for a in range(p) if dn[a] < 2 * rho)
                if small < rho ** len(S) * p:
                    failures.append(["size-lower", p, list(S), frac_str(rho)])
                if big > 4 ** len(S) * small:
                    failures.append(["size-doubling", p, list(S), frac_str(rho)])
                P = regular_pmf(BohrSet(g, S, rho))
                if sum(P.masses.values()) != 1:
                    failures.append(["pmf-total", p, list(S), frac_str(rho)])
                bound = 1 / ((rho / 2) ** len(S) * p)
                if any(m > bound for m in P.masses.values()):
                    failures.append(["max-mass", p, list(S), frac_str(rho)])
                checked += 1
    return not failures, {
        "suite": "size-bohr",
        "primes": cfg.primes,
        "instances": checked,
        "failures": failures[:50],
    }


def suite_ati(cfg: RunConfig) -> tuple[bool, dict]:
    """Shift stability of regular pmfs: tv * rho / (|S| rho') <= C."""
    ratios = []
    failures = []
    for p in cfg.primes if cfg.primes != [7, 11, 13] else [101, 211]:
        g = PrimeGroup(p)
        for S in [(1,), (1, 3), (2, 5, 11)]:
            for rho in [Fraction(3, 10), Fraction(1, 10)]:
                P = regular_pmf(BohrSet(g, S, rho))
                for ratio_den in [8, 32, 128]:
                    rho_p = rho / ratio_den
                    for h in bohr_members(BohrSet(g, S, rho_p)):
                        tv = tv_distance(P, P.shifted(h))
                        scaled = float(tv * rho / (len(S) * rho_p))
                        ratios.append(scaled)
                        if scaled > calibration.ATI_C:
                            failures.append([p, list(S), frac_str(rho), h, scaled])
    return not failures, {
        "suite": "ati",
        "calibrated_c": calibration.ATI_C,
        "max_ratio": _fmt(max(ratios)) if ratios else None,
        "instances": len(ratios),
        "failures": failures[:50],
    }


def suite_edual_exact(cfg: RunConfig) -> tuple[bool, dict]:
    """Exhaustive duality: ||n lam / p|| <= ||n||_{S-perp} ||lam||_S, and
    the reverse word-norm bound at the calibrated constant."""
    failures = []
    checked = 0
    worst = 0.0
    for p in cfg.primes:
        g = PrimeGroup(p)
        for S in _frequency_sets(p):
            words = word_norm_table(S, p)
            dn = [dual_norm(n, S, p) for n in range(p)]
            for lam in range(1, p):
                best = max(
                    (float(g.circle_norm(n * lam)) / float(dn[n]))
                    for n in range(1, p)
                    if dn[n] > 0
                )
                ratio = words[lam] / (len(S) ** 1.5 * max(best, 1e-300))
                worst = max(worst, ratio)
                checked += 1
                if ratio > calibration.EDUAL_II_C:
                    failures.append([p, list(S), lam, ratio])
            for n in range(p):
                for lam in range(p):
                    if g.circle_norm(n * lam) > dn[n] * words[lam]:
                        failures.append(["exact-part", p, list(S), n, lam])
    return not failures, {
        "suite": "edual-exact",
        "calibrated_c": calibration.EDUAL_II_C,
        "max_ratio": _fmt(worst),
        "instances": checked,
        "failures": failures[:50],
    }


def suite_fde(cfg: RunConfig) -> tuple[bool, dict]:
    """Fourier decay of regular pmfs at the calibrated constant."""
    failures = []
    maxima = []
    primes = cfg.primes if cfg.primes != [7, 11, 13] else [101, 211]
    for p in primes:
        g = PrimeGroup(p)
        for S in [(1,), (1, 3)]:
            for rho in [Fraction(3, 10), Fraction(1, 10)]:
                rep = fde_report(BohrSet(g, S, rho))
                maxima.append(rep.max_ratio)
                if rep.max_ratio > calibration.FDE_C:
                    failures.append([p, list(S), frac_str(rho), rep.max_ratio])
    return not failures, {
        "suite": "fde",
        "calibrated_c": calibration.FDE_C,
        "max_ratio": _fmt(max(maxima)),
        "instances": len(maxima),
        "failures": failures,
    }


def _cauchy_case(args) -> list:
    p, seed = args
    rng = np.random.default_rng(seed)
    vals = rng.uniform(-1, 1, p)
    F = GroupFunction(PrimeGroup(p), vals.astype(complex))
    lhs = cauchy_form(F)
    rhs = float(vals.mean()) ** 4
    return [p, seed, lhs, rhs, bool(lhs >= rhs - 1e-9)]


def suite_cauchy(cfg: RunConfig, trials: int = 200, primes=None) -> tuple[bool, dict]:
    primes = primes or [31, 101]
    cases = [(p, cfg.seed + t) for p in primes for t in range(trials)]
    rows = _pmap(_cauchy_case, cases, cfg.workers)
    failures = [r for r in rows if not r[4]]
    return not failures, {
        "suite": "cauchy",
        "trials": trials,
        "primes": primes,
        "instances": len(rows),
        "failures": failures[:50],
    }


def suite_locu2(cfg: RunConfig) -> tuple[bool, dict]:
    """Synthetic noisy phases: the returned witness correlation reaches
    eta/2 and the fft and exhaustive objectives agree."""
    p = 211
    eta = 0.1
    S = (1,)
    rho0, rho1 = Fraction(3, 10), Fraction(1, 100)
    g = PrimeGroup(p)
    n = np.arange(p)
    rng = np.random.default_rng(cfg.seed)
    failures = []
    checked = 0
    for trial in range(10):
        xi = int(rng.integers(1, p))
        noise = rng.normal(0, 0.15, p) + 1j * rng.normal(0, 0.15, p)
        vals = np.exp(2j * np.pi * xi * n / p) + noise
        f = GroupFunction(g, vals)
        w = inverse_u2_local(f, S, rho0, rho1, eta)
        checked += 1
        if w.correlation < eta / 2:
            failures.append(["low-correlation", trial, w.xi, w.correlation])
        P0 = regular_pmf(BohrSet(g, S, rho0))
        P1 = regular_pmf(BohrSet(g, S, rho1))
        ex = u2_correlations(f, P0, P1, method="exhaustive")
        if abs(float(ex[w.xi]) - w.correlation) > 1e-9:
            failures.append(["method-mismatch", trial, w.xi])
    return not failures, {
        "suite": "locu2",
        "p": p,
        "eta": eta,
        "separation_c": calibration.LOCU2_SEPARATION_C,
        "instances": checked,
        "failures": failures,
    }


def suite_bohr_basis(cfg: RunConfig) -> tuple[bool, dict]:
    failures = []
    checked = 0
    for p in cfg.primes:
        for S in [(1,), (1, 2), (2, 3), (1, 3, 5)]:
            S = tuple(s for s in S if s < p)
            if not S:
                continue
            basis = bohr_basis(S, p)
            checked += 1
            if not bohr_basis_norm_bound_holds(basis):
                failures.append(["norm-bound", p, list(S)])
            if not bohr_basis_unique_in_half_box(basis):
                failures.append(["uniqueness", p, list(S)])
            lo, hi = calibration.BOHR_BASIS_PROD_BANDS[len(basis.S)]
            if not lo <= basis.prod_sizes_over_p <= hi:
                failures.append(["prod-band", p, list(S), basis.prod_sizes_over_p])
    return not failures, {
        "suite": "bohr-basis",
        "primes": cfg.primes,
        "instances": checked,
        "failures": failures,
    }


def suite_nfoc(cfg: RunConfig, count: int = 30) -> tuple[bool, dict]:
    """Complement tori of random dilated tori: exact homomorphism, exact
    round trip on rational samples, volume ratio in the per-d band."""
    rng = random.Random(cfg.seed)
    failures = []
    checked = 0
    while checked < count:
        d = rng.randint(1, 4)
        lams = [Fraction(rng.randint(10, 100), 10) for _ in range(d)]
        G = DilatedTorus(lams)
        nums = [rng.randint(-5, 5) for _ in range(d)]
        if all(m == 0 for m in nums):
            continue
        gg = 0
        for m in nums:
            gg = math.gcd(gg, abs(m))
        nums = [m // gg for m in nums]
        k = DualFrequency(G, nums)
        comp = complement_torus(G, k)
        checked += 1
        for _ in range(5):
            t = [
                Fraction(rng.randint(0, 99), 100) for _ in range(comp.torus.dim)
            ]
            s = [
                Fraction(rng.randint(0, 99), 100) for _ in range(comp.torus.dim)
            ]
            x1 = comp.psi_from_coords(t)
            x2 = comp.psi_from_coords(s)
            xs = comp.psi_from_coords([a + b for a, b in zip(t, s)])
            diff = comp.torus.reduce([a + b - c for a, b, c in zip(x1, x2, xs)])
            if any(v != 0 for v in diff):
                failures.append(["homomorphism", checked])
                break
        lo, hi = calibration.NFOC_VOL_BANDS[d]
        if not lo <= comp.vol_ratio <= hi:
            failures.append(["vol-band", checked, d, comp.vol_ratio])
    return not failures, {
        "suite": "nfoc",
        "count": count,
        "instances": checked,
        "failures": failures,
    }


def suite_omh(cfg: RunConfig) -> tuple[bool, dict]:
    """Planted quadratic phases pass the alternating-sum validator and
    the progression identity; a planted cubic fails with exact defect."""
    failures = []
    checked = 0
    for p in [7, 11, 13]:
        g = PrimeGroup(p)
        B = BohrSet(g, (1,), Fraction(1, 2))
        quad = LocalPhase.from_polynomial(B, [3 % p, 1, 2])
        cert = validate_phase(quad)
        checked += 1
        if not cert.ok:
            failures.append(["quadratic-rejected", p])
        ap = validate_ap_identity(quad)
        if not ap.ok:
            failures.append(["ap-identity", p])
        cubic = LocalPhase.from_polynomial(B, [1, 0, 0, 0])
        cubic = LocalPhase(B, "quadratic", cubic.unit_tables)
        cert3 = validate_phase(cubic)
        if cert3.ok or cert3.max_defect == 0:
            failures.append(["cubic-accepted", p])
    return not failures, {
        "suite": "omh",
        "instances": checked,
        "failures": failures,
    }


SUITES = {
    "size-bohr": suite_size_bohr,
    "ati": suite_ati,
    "edual-exact": suite_edual_exact,
    "fde": suite_fde,
    "cauchy": suite_cauchy,
    "locu2": suite_locu2,
    "bohr-basis": suite_bohr_basis,
    "nfoc": suite_nfoc,
    "omh": suite_omh,
}


def cmd_verify(args, cfg: RunConfig) -> int:
    fn = SUITES.get(args.suite)
    if fn is None:
        error_exit(
            EXIT_USAGE, "unknown-suite", f"unknown suite {args.suite!r}", "suite"
        )
    if args.p:
        cfg.primes = args.p
    if args.suite == "cauchy":
        ok, report = suite_cauchy(cfg, trials=args.trials, primes=args.p or None)
    else:
        ok, report = fn(cfg)
    report["ok"] = ok
    emit(report, cfg, f"verify_{args.suite}.json")
    return EXIT_OK if ok else EXIT_ASSERTION


# ---------------------------------------------------------------------------
# khintchine subcommand


def load_f_csv(path: str, p: int | None) -> np.ndarray:
    rows = []
    try:
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].startswith("#"):
                    continue
                rows.append((int(row[0]), float(row[1])))
    except (OSError, ValueError, IndexError) as e:
        raise ValueError(f"malformed f file {path!r}: {e}") from e
    if not rows:
        raise ValueError(f"empty f file {path!r}")
    n = p or (max(i for i, _ in rows) + 1)
    vals = np.zeros(n)
    for i, v in rows:
        if not 0 <= i < n:
            raise ValueError(f"index {i} outside [0, {n})")
        vals[i] = v
    return vals


def generate_f(args, cfg: RunConfig) -> np.ndarray:
    p = args.p
    if p is None:
        raise ValueError("generator specs need --p")
    n = np.arange(p)
    if args.generator == "planted":
        rng = np.random.default_rng(cfg.seed)
        vals = 0.5 + args.amp * np.cos(
            2 * np.pi * ((args.alpha * n * n + args.beta * n) % p) / p
        )
        if args.noise:
            vals = vals + rng.normal(0, args.noise, p)
        return np.clip(vals, 0, 1)
    if args.generator == "random":
        rng = np.random.default_rng(cfg.seed)
        return rng.uniform(0, 1, p)
    if args.generator == "indicator":
        rng = np.random.default_rng(cfg.seed)
        return (rng.uniform(0, 1, p) < args.density).astype(float)
    raise ValueError(f"unknown generator {args.generator!r}")


def cmd_khintchine(args, cfg: RunConfig) -> int:
    if args.r4_N:
        A = greedy_ap_free(args.r4_N)
        rep = r4_harness(args.r4_N, A, eta=cfg.eta)
        emit(rep.to_json(), cfg, "r4_report.json")
        return EXIT_BUDGET if rep.budget_exhausted else EXIT_OK
    if args.f:
        try:
            fvals = load_f_csv(args.f, args.p)
        except ValueError as e:
            error_exit(EXIT_USAGE, "malformed-input", str(e), "--f")
    elif args.generator:
        fvals = generate_f(args, cfg)
    else:
        error_exit(
            EXIT_USAGE, "missing-argument", "need --f or --generator", "--f"
        )
    dconf = DriverConfig(
        eta=cfg.eta,
        shrink=cfg.shrink,
        budget=args.budget if args.budget is not None else cfg.budget,
        delta_e_declared=cfg.delta_e,
        waste_threshold=cfg.waste_threshold,
        thickness_threshold=cfg.thickness_threshold,
    )
    try:
        cert, trace, _ = iteration_driver(fvals, eta=cfg.eta, config=dconf)
    except BudgetExhausted as e:
        report = {"error": "budget-exhausted", "message": str(e)}
        if e.trace is not None:
            report["steps"] = len(e.trace.steps)
            if cfg.out_dir:
                Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
                Path(cfg.out_dir, "trace.jsonl").write_text(e.trace.to_jsonl() + "\n")
        emit(report, cfg, "certificate.json")
        return EXIT_BUDGET
    if cfg.out_dir:
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        Path(cfg.out_dir, "trace.jsonl").write_text(trace.to_jsonl() + "\n")
        emit(cert.to_json(), cfg, "certificate.json")
    else:
        emit({"certificate": cert.to_json(), "steps": len(trace.steps)}, cfg, "")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


class Parser(argparse.ArgumentParser):
    def error(self, message):
        error_exit(EXIT_USAGE, "invalid-arguments", message)


def build_parser() -> Parser:
    parser = Parser(prog="gblab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key=value config file")
        sp.add_argument("--seed", type=int, help="override config seed")
        sp.add_argument("--out", help="output directory (default: stdout)")
        sp.add_argument("--workers", type=int, default=1, help="worker pool size")

    b = sub.add_parser("bohr", help="Bohr set enumeration, pmfs, norms, bases")
    b.add_argument("action", choices=["members", "pmf", "norms", "basis"])
    b.add_argument("--p", type=int, required=True)
    b.add_argument("--S", type=int_list, required=True)
    b.add_argument("--rho", type=frac, default=Fraction(1, 4))
    b.add_argument("--shift", type=int, default=0)
    b.add_argument("--a", type=int)
    common(b)

    v = sub.add_parser("verify", help="run a verification sweep")
    v.add_argument("suite", choices=sorted(SUITES))
    v.add_argument("--p", type=int, action="append", default=[])
    v.add_argument("--trials", type=int, default=200)
    v.add_argument("--grid", default="default")
    common(v)

    k = sub.add_parser("khintchine", help="energy-decrement iteration driver")
    k.add_argument("--f", help="CSV file of index,value pairs")
    k.add_argument("--generator", choices=["planted", "random", "indicator"])
    k.add_argument("--p", type=int)
    k.add_argument("--alpha", type=int, default=1)
    k.add_argument("--beta", type=int, default=0)
    k.add_argument("--amp", type=float, default=0.45)
    k.add_argument("--noise", type=float, default=0.0)
    k.add_argument("--density", type=float, default=0.3)
    k.add_argument("--budget", type=int)
    k.add_argument("--r4-N", type=int, dest="r4_N", help="run the 4-AP harness")
    common(k)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args.config)
    except (OSError, ValueError) as e:
        error_exit(EXIT_USAGE, "bad-config", str(e), "--config")
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.out_dir = args.out
    cfg.workers = args.workers
    try:
        if args.command == "bohr":
            return cmd_bohr(args, cfg)
        if args.command == "verify":
            return cmd_verify(args, cfg)
        if args.command == "khintchine":
            return cmd_khintchine(args, cfg)
        error_exit(EXIT_USAGE, "unknown-command", f"unknown command {args.command!r}")
    except (EnumerationCapExceeded, SupportTooLarge, DimensionCapExceeded) as e:
        error_exit(EXIT_CAP, "cap-exceeded", str(e))
    except BudgetExhausted as e:
        error_exit(EXIT_BUDGET, "budget-exhausted", str(e))
    except GblabError as e:
        error_exit(EXIT_USAGE, type(e).__name__, str(e))
    except ValueError as e:
        error_exit(EXIT_USAGE, "invalid-value", str(e))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
