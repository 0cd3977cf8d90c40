"""Acceptance suite: ten end-to-end criteria with stated tolerances and
runtime budgets.  Each test prints exactly one PASS/FAIL line."""

import itertools
import math
import random
import sys
import time
from fractions import Fraction

import numpy as np

from gblab import calibration
from gblab.bohr import (
    BohrSet,
    PrimeGroup,
    bohr_members,
    dual_norm,
    regular_pmf,
    tv_distance,
    word_norm_table,
)
from gblab.gowers import cauchy_form
from gblab.inverse import (
    derivative_frequency_map,
    inverse_u2_local,
    quadruple_audit,
    u2_correlations,
)
from gblab.khintchine import greedy_ap_free, iteration_driver, r4_harness
from gblab.spectral import GroupFunction
from gblab.torus import (
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


def report(capfd, n, name, ok, elapsed, detail):
    line = (
        f"ACCEPTANCE {n} {name}: {'PASS' if ok else 'FAIL'} "
        f"({elapsed:.1f} s; {detail})"
    )
    with capfd.disabled():
        print(line, file=sys.stderr, flush=True)
    return ok


def frequency_sets(p, max_size):
    half = (p - 1) // 2 + 1
    sets = [(a,) for a in range(1, half)]
    if max_size >= 2:
        sets += [(a, b) for a in range(1, p) for b in range(a + 1, p)]
    if max_size >= 3:
        sets += [
            (a, b, c)
            for a in range(1, p)
            for b in range(a + 1, p)
            for c in range(b + 1, p)
        ]
    return sets


def test_criterion_1_exact_lemma_suite(capfd):
    t0 = time.perf_counter()
    rho_grid = [Fraction(1, d) for d in range(8, 1, -1)]
    checked = 0
    bad = []
    for p in (7, 11, 13, 17):
        g = PrimeGroup(p)
        all_sets = [(a,) for a in range(1, p)] + [
            (a, b) for a in range(1, p) for b in range(a + 1, p)
        ]
        for S in all_sets:
            dn = [dual_norm(a, S, p) for a in range(p)]
            words = word_norm_table(S, p)
            for a in range(p):
                for b in range(p):
                    if dn[(a + b) % p] > dn[a] + dn[b]:
                        bad.append(("dual-triangle", p, S, a, b))
                    if words[(a + b) % p] > words[a] + words[b]:
                        bad.append(("word-triangle", p, S, a, b))
                for lam in range(p):
                    if g.circle_norm(a * lam) > dn[a] * words[lam]:
                        bad.append(("duality", p, S, a, lam))
            for rho in rho_grid:
                small = sum(1 for a in range(p) if dn[a] < rho)
                big = sum(1 for a in range(p) if dn[a] < 2 * rho)
                if small < rho ** len(S) * p:
                    bad.append(("size-lower", p, S, rho))
                if big > 4 ** len(S) * small:
                    bad.append(("size-doubling", p, S, rho))
                P = regular_pmf(BohrSet(g, S, rho))
                if sum(P.masses.values()) != 1:
                    bad.append(("pmf-total", p, S, rho))
                bound = 1 / ((rho / 2) ** len(S) * p)
                if any(m > bound for m in P.masses.values()):
                    bad.append(("max-mass", p, S, rho))
                checked += 1
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60
    assert report(capfd, 1, "exact-lemma-suite", ok, elapsed,
                  f"{checked} grid instances, {len(bad)} failures")


def test_criterion_2_cauchy_positivity(capfd):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    failures = 0
    total = 0
    for p in (31, 101, 401):
        g = PrimeGroup(p)
        for _ in range(200):
            vals = rng.uniform(-1, 1, p)
            total += 1
            if cauchy_form(GroupFunction(g, vals.astype(complex))) < float(vals.mean()) ** 4 - 1e-9:
                failures += 1
    # fast convolution vs direct triple sum at p = 31
    p = 31
    vals = rng.uniform(-1, 1, p)
    brute = float(
        np.mean(
            [
                vals[x] * vals[y] * vals[z] * vals[(x - 3 * y + 3 * z) % p]
                for x in range(p)
                for y in range(p)
                for z in range(p)
            ]
        )
    )
    fast = cauchy_form(GroupFunction(PrimeGroup(p), vals.astype(complex)))
    match = abs(fast - brute) <= 1e-9
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and total == 600 and match and elapsed < 120
    assert report(capfd, 2, "cauchy-positivity", ok, elapsed,
                  f"{total} cases, {failures} failures, brute-force gap {abs(fast - brute):.2e}")


def test_criterion_3_shift_stability_calibration(capfd):
    t0 = time.perf_counter()
    per_p_max = {}
    violations = 0
    instances = 0
    for p in (101, 211):
        g = PrimeGroup(p)
        worst = 0.0
        for S in [(1,), (1, 3), (2, 5, 11)]:
            for rho in [Fraction(3, 10), Fraction(1, 10)]:
                P = regular_pmf(BohrSet(g, S, rho))
                for den in (8, 32, 128):
                    rho_p = rho / den
                    for h in bohr_members(BohrSet(g, S, rho_p)):
                        ratio = float(
                            tv_distance(P, P.shifted(h)) * rho / (len(S) * rho_p)
                        )
                        instances += 1
                        worst = max(worst, ratio)
                        if ratio > calibration.ATI_C:
                            violations += 1
        per_p_max[p] = worst
    spread = max(per_p_max.values()) / max(min(per_p_max.values()), 1e-300)
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and math.isfinite(spread) and spread <= 3 and elapsed < 300
    assert report(capfd, 3, "shift-stability", ok, elapsed,
                  f"{instances} instances, max ratios {per_p_max}, "
                  f"cross-p spread {spread:.2f}, C={calibration.ATI_C}")


def test_criterion_4_local_u2_inverse(capfd):
    t0 = time.perf_counter()
    eta = 0.1
    rng = np.random.default_rng(4)
    good = 0
    exhaustive_ok = True
    slowest = 0.0
    cases = [(401, Fraction(1, 100))] * 40 + [(4001, Fraction(1, 1000))] * 10
    for p, rho1 in cases:
        g = PrimeGroup(p)
        n = np.arange(p)
        xi_true = int(rng.integers(1, p))
        eps = 0.1
        noise = (rng.normal(0, 1, p) + 1j * rng.normal(0, 1, p)) / np.sqrt(2)
        f = GroupFunction(g, (1 - eps) * np.exp(2j * np.pi * xi_true * n / p) + eps * noise)
        t1 = time.perf_counter()
        w = inverse_u2_local(f, (1,), Fraction(3, 10), rho1, eta)
        dt = time.perf_counter() - t1
        if p == 4001:
            slowest = max(slowest, dt)
        if w.correlation >= eta / 2:
            good += 1
        if p <= 401:
            ex = u2_correlations(
                f, regular_pmf(BohrSet(g, (1,), Fraction(3, 10))),
                regular_pmf(BohrSet(g, (1,), rho1)), method="exhaustive",
            )
            if abs(float(np.max(ex)) - w.correlation) > 1e-9:
                exhaustive_ok = False
    elapsed = time.perf_counter() - t0
    ok = good == 50 and exhaustive_ok and slowest < 10
    assert report(capfd, 4, "local-u2-inverse", ok, elapsed,
                  f"{good}/50 with correlation >= eta/2, exhaustive match: "
                  f"{exhaustive_ok}, slowest p=4001 instance {slowest:.1f} s")


def test_criterion_5_bohr_basis(capfd):
    t0 = time.perf_counter()
    rng = random.Random(5)
    cases = []
    for S in frequency_sets(7, 3):
        cases.append((7, S))
    for S in frequency_sets(11, 2):
        cases.append((11, S))
    for p in (31, 101):
        cases += [(p, (a,)) for a in (1, 2, 5)]
        cases += [(p, tuple(sorted(rng.sample(range(1, p), k)))) for k in (2, 3) for _ in range(6)]
    bad = []
    for p, S in cases:
        basis = bohr_basis(S, p)
        if not bohr_basis_norm_bound_holds(basis):
            bad.append(("norm-bound", p, S))
        if not bohr_basis_unique_in_half_box(basis):
            bad.append(("uniqueness", p, S))
        for a in range(p):
            coeffs = basis.represent(a)  # raises on failure
            na = float(dual_norm(a, basis.S, p))
            for c, N in zip(coeffs, basis.sizes):
                if a and abs(c) > basis.rep_factor * N * na * (1 + 1e-9):
                    bad.append(("rep-bound", p, S, a))
        lo, hi = calibration.BOHR_BASIS_PROD_BANDS[len(basis.S)]
        if not lo <= basis.prod_sizes_over_p <= hi:
            bad.append(("prod-band", p, S, basis.prod_sizes_over_p))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 120
    assert report(capfd, 5, "bohr-basis", ok, elapsed,
                  f"{len(cases)} bases certified, {len(bad)} failures")


def test_criterion_6_complement_torus(capfd):
    t0 = time.perf_counter()
    rng = random.Random(6)
    bad = []
    done = 0
    while done < 100:
        d = rng.randint(1, 4)
        lams = [Fraction(rng.randint(10, 100), 10) for _ in range(d)]
        G = DilatedTorus(lams)
        nums = [rng.randint(-5, 5) for _ in range(d)]
        if all(m == 0 for m in nums):
            continue
        g = 0
        for m in nums:
            g = math.gcd(g, abs(m))
        k = DualFrequency(G, [m // g for m in nums])
        comp = complement_torus(G, k)
        done += 1
        r = comp.torus.dim
        for _ in range(5):
            t = [Fraction(rng.randint(0, 99), 100) for _ in range(r)]
            s = [Fraction(rng.randint(0, 99), 100) for _ in range(r)]
            ts = [(a + b) % 1 for a, b in zip(t, s)]
            lhs = comp.psi_from_coords(ts)
            rhs = comp.torus.reduce(
                [a + b for a, b in zip(comp.psi_from_coords(t), comp.psi_from_coords(s))]
            )
            if lhs != rhs:
                bad.append(("homomorphism", done))
            y = comp.psi_from_coords(t)
            back = comp.psi_inverse(y)
            if any(abs(float(a - b)) > 1e-12 for a, b in zip(back, t)):
                bad.append(("round-trip", done))
        lo, hi = calibration.NFOC_VOL_BANDS[d]
        if not lo <= comp.vol_ratio <= hi:
            bad.append(("vol-band", done, d, comp.vol_ratio))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 60
    assert report(capfd, 6, "complement-torus", ok, elapsed,
                  f"100 random tori, {len(bad)} failures")


def test_criterion_7_quadratic_validators(capfd):
    t0 = time.perf_counter()
    bad = []
    for p in (7, 11, 31):
        B = BohrSet(PrimeGroup(p), (1,), Fraction(1, 2))
        quad = LocalPhase.from_polynomial(B, [3 % p, 2 % p, 1])
        cert = validate_phase(quad)  # exhaustive
        if not cert.ok:
            bad.append(("quadratic-rejected", p))
        if not validate_ap_identity(quad).ok:
            bad.append(("ap-identity", p))
        cubic_tables = LocalPhase.from_polynomial(B, [1, 0, 0, 0]).unit_tables
        cubic = LocalPhase(B, "quadratic", cubic_tables)
        c3 = validate_phase(cubic)
        if c3.ok or c3.max_defect == 0:
            bad.append(("cubic-accepted", p))
    elapsed = time.perf_counter() - t0
    ok = not bad
    assert report(capfd, 7, "quadratic-validators", ok, elapsed,
                  f"3 primes exhaustively validated, {len(bad)} failures")


def test_criterion_8_derivative_frequency_map(capfd):
    t0 = time.perf_counter()
    bad = []
    for p, alpha in ((101, 7), (211, 5)):
        g = PrimeGroup(p)
        n = np.arange(p)
        f = GroupFunction(g, np.exp(2j * np.pi * ((alpha * n * n) % p) / p))
        fm = derivative_frequency_map(
            f, (1,), Fraction(3, 10), Fraction(1, 40), Fraction(1, 25), 0.2
        )
        if not fm.omega:
            bad.append(("empty-omega", p))
        for n2 in fm.omega:
            if fm.xi[n2] != (2 * alpha * n2) % p:
                bad.append(("wrong-frequency", p, n2))
        for threshold in (0.0, 1.0, 5.0):
            aud = quadruple_audit(fm, threshold, trials=5000, seed=p)
            if aud.bad != 0:
                bad.append(("bad-quadruple", p, threshold))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 120
    assert report(capfd, 8, "derivative-frequency-map", ok, elapsed,
                  f"2 primes, {len(bad)} failures")


def test_criterion_9_toy_driver(capfd):
    t0 = time.perf_counter()
    eta = 0.2
    delta_e = 0.1
    step_cap = math.ceil(4 / delta_e) + 10
    plan = [(101, 7), (211, 7), (499, 6)]
    rng = np.random.default_rng(9)
    bad = []
    runs = 0
    for p, count in plan:
        n = np.arange(p)
        for _ in range(count):
            runs += 1
            alpha = int(rng.integers(1, p))
            beta = int(rng.integers(0, p))
            amp = float(rng.uniform(0.3, 0.45))
            f = np.clip(
                0.5 + amp * np.cos(2 * np.pi * ((alpha * n * n + beta * n) % p) / p)
                + 0.03 * rng.standard_normal(p),
                0,
                1,
            )
            cert, trace, _ = iteration_driver(f, eta=eta)
            if len(trace.steps) > step_cap:
                bad.append(("step-cap", p, len(trace.steps)))
            if cert.stats.lambda_f < cert.stats.e_f_a ** 4 - eta:
                bad.append(("recurrence", p))
            for st in trace.steps:
                if st.kind == "energy-decrement" and st.delta_energy <= 0:
                    bad.append(("non-decreasing", p))
            if cert.stats.p_r_zero > 0.6:
                bad.append(("thickness", p, cert.stats.p_r_zero))
    elapsed = time.perf_counter() - t0
    ok = not bad and runs == 20 and elapsed < 600
    assert report(capfd, 9, "toy-driver", ok, elapsed,
                  f"{runs} planted runs, {len(bad)} failures")


def test_criterion_10_r4_harness(capfd):
    t0 = time.perf_counter()
    N = 50
    A = greedy_ap_free(N)
    rep = r4_harness(N, A, eta=0.2)
    consistent = True
    if rep.certificate is not None:
        s = rep.certificate.stats
        # both sides of the chain from the same exact evaluator
        consistent = (
            abs(rep.inequality["lambda_f"] - s.lambda_f) < 1e-12
            and abs(rep.inequality["e_f_a_fourth"] - s.e_f_a ** 4) < 1e-12
            and rep.certificate.recurrence_ok == (s.lambda_f >= s.e_f_a ** 4 - 0.2)
        )
    else:
        consistent = False
    elapsed = time.perf_counter() - t0
    ok = rep.ap_free and consistent and elapsed < 30
    assert report(capfd, 10, "r4-harness", ok, elapsed,
                  f"N={N}, |A|={len(A)}, p={rep.p}, AP-free={rep.ap_free}, "
                  f"chain consistent={consistent}")
