"""Constructive inverse theory for local Gowers norms.

The local U^2 inverse algorithm, local-to-global linearization of almost
linear phases, rationalization of large bilinear exponential sums, and
the derivative-frequency map with its additive-quadruple audit.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import calibration
from .bohr import (
    BohrSet,
    PrimeGroup,
    RegularPmf,
    as_fraction,
    bohr_members,
    dual_norm,
    regular_pmf,
    word_norm_table,
)
from .errors import (
    AlmostLinearityViolated,
    ExponentialSumTooSmall,
    InsufficientU2,
    InsufficientU3,
    NoSmallMultiple,
    RadiusSeparationViolated,
)
from .gowers import JointSampler, u2_local, u3_local
from .spectral import GroupFunction
from .torus import BilinearPhase, LocalPhase


def _fmt(x: float) -> str:
    return f"{x:.12g}"


@dataclass
class U2Witness:
    """A frequency xi with its weighted correlation
    sum_{n0} p0(n0) |sum_{n1} p1(n1) f(n0+n1) e_p(-xi n1)|^2."""

    xi: int
    correlation: float
    method: str
    eta: float
    measured_u2: float

    def to_json(self) -> dict:
        return {
            "xi": self.xi,
            "correlation": _fmt(self.correlation),
            "method": self.method,
            "eta": _fmt(self.eta),
            "measured_u2": _fmt(self.measured_u2),
        }


def u2_correlations(
    f: GroupFunction, P0: RegularPmf, P1: RegularPmf, method: str = "fft"
) -> np.ndarray:
    """The witness objective for every frequency xi at once.

    fft: one length-p transform per base point n0 in the support of p0.
    exhaustive: direct summation of the same objective (identical values,
    different order of operations)."""
    p = f.p
    vals = f.values
    out = np.zeros(p)
    if method == "fft":
        for n0, m0 in P0.items():
            g = np.zeros(p, dtype=complex)
            for n1, m1 in P1.items():
                g[n1] += float(m1) * vals[(n0 + n1) % p]
            # fft gives sum_{n1} g(n1) e_p(-xi n1) for all xi
            out += float(m0) * np.abs(np.fft.fft(g)) ** 2
        return out
    if method == "exhaustive":
        shifts = np.array(list(dict(P1.items())), dtype=np.int64)
        w1 = np.array([float(m) for m in dict(P1.items()).values()])
        phases = np.exp(-2j * np.pi * np.outer(np.arange(p), shifts) / p)
        for n0, m0 in P0.items():
            inner = phases @ (w1 * vals[(n0 + shifts) % p])
            out += float(m0) * np.abs(inner) ** 2
        return out
    raise ValueError(f"unknown method {method!r}")


def inverse_u2_local(
    f: GroupFunction,
    S,
    rho0,
    rho1,
    eta: float,
    method: str = "fft",
    separation_c: float = calibration.LOCU2_SEPARATION_C,
) -> U2Witness:
    """Frequency witnessing a large local U^2 box value.

    Preconditions are measured, not assumed: the box value with h0, h0'
    regular on B(S, rho0) and h1, h1' regular on B(S, rho1) must reach
    eta, and rho0 must exceed separation_c * |S| * rho1 / eta^2."""
    p = f.p
    g = PrimeGroup(p)
    rho0 = as_fraction(rho0)
    rho1 = as_fraction(rho1)
    B0 = BohrSet(g, S, rho0)
    B1 = BohrSet(g, S, rho1)
    sep = Fraction(separation_c).limit_denominator(10**6) * len(B0.S) * rho1 / Fraction(
        eta
    ).limit_denominator(10**6) ** 2
    if not rho0 > sep:
        raise RadiusSeparationViolated(
            f"rho0={rho0} must exceed {separation_c}*|S|*rho1/eta^2={float(sep):.6g}"
        )
    P0 = regular_pmf(B0)
    P1 = regular_pmf(B1)
    J = JointSampler.independent(p, {"h0": P0, "h1": P1})
    measured = u2_local(f, J).value
    if measured < eta:
        raise InsufficientU2(f"measured u2 {measured:.6g} below eta {eta}")
    corr = u2_correlations(f, P0, P1, method=method)
    xi = int(np.argmax(corr))  # first maximum = smallest canonical residue
    return U2Witness(xi, float(corr[xi]), method, eta, measured)


# ---------------------------------------------------------------------------
# local-to-global linearization


def _circle_dist(x: Fraction) -> Fraction:
    m = x % 1
    return min(m, 1 - m)


def check_almost_linear(phi: LocalPhase, A: float) -> None:
    """Verify the almost-linearity hypothesis: the second difference at
    the base point is bounded by A ||h1|| ||h2|| / rho^2."""
    B = phi.domain
    p = phi.p
    n0 = B.shift
    table = phi.unit_tables[0]
    members = [h for h in range(p) if (n0 + h) % p in B]
    rho2 = float(B.rho) ** 2
    for h1 in members:
        n1 = float(dual_norm(h1, B.S, p))
        for h2 in members:
            if (n0 + h1 + h2) % p not in B:
                continue
            d = _circle_dist(
                table[(n0 + h1 + h2) % p]
                - table[(n0 + h1) % p]
                - table[(n0 + h2) % p]
                + table[n0]
            )
            bound = A * n1 * float(dual_norm(h2, B.S, p)) / rho2
            if float(d) > bound + 1e-12:
                raise AlmostLinearityViolated(
                    f"second difference {float(d):.6g} at ({h1},{h2}) exceeds {bound:.6g}"
                )


def linearize_defect(phi: LocalPhase, xi: int, A: float) -> float:
    """max over h in B of ||phi(n0+h) - phi(n0) - xi h / p|| * rho /
    (A^{1/2} |S|^4 ||h||); 0/0 counts as 0."""
    B = phi.domain
    p = phi.p
    n0 = B.shift
    table = phi.unit_tables[0]
    scale = math.sqrt(A) * len(B.S) ** 4 / float(B.rho)
    worst = 0.0
    for h in range(1, p):
        if (n0 + h) % p not in B:
            continue
        d = float(
            _circle_dist(table[(n0 + h) % p] - table[n0] - Fraction((xi * h) % p, p))
        )
        if d == 0:
            continue
        allowance = scale * float(dual_norm(h, B.S, p))
        if allowance == 0:
            return math.inf
        worst = max(worst, d / allowance)
    return worst


def linearize_local(
    phi: LocalPhase, A: float, method: str | None = None
) -> tuple[int, float]:
    """Global frequency approximating an almost linear local phase.

    Returns (xi, achieved defect ratio).  exhaustive minimizes the defect
    over all frequencies; fft takes the matched-filter argmax against the
    regular pmf of the domain and refines over nearby frequencies."""
    check_almost_linear(phi, A)
    B = phi.domain
    p = phi.p
    if method is None:
        method = "exhaustive" if p <= 512 else "fft"
    if method == "exhaustive":
        best, best_d = 0, math.inf
        for xi in range(p):
            d = linearize_defect(phi, xi, A)
            if d < best_d:
                best, best_d = xi, d
        return best, best_d
    # matched filter: correlate e(phi(n0 + h)) against e_p(xi h) weighted
    # by the regular pmf of the unshifted Bohr set
    n0 = B.shift
    table = phi.unit_tables[0]
    P = regular_pmf(BohrSet(B.group, B.S, B.rho))
    g = np.zeros(p, dtype=complex)
    for h, m in P.items():
        g[h] = float(m) * np.exp(2j * np.pi * float(table[(n0 + h) % p]))
    corr = np.abs(np.fft.fft(g))
    xi0 = int(np.argmax(corr))
    # refine over a small window around the matched-filter answer
    cands = sorted({(xi0 + t) % p for t in range(-8, 9)})
    best, best_d = xi0, math.inf
    for xi in cands:
        d = linearize_defect(phi, xi, A)
        if d < best_d:
            best, best_d = xi, d
    return best, best_d


# ---------------------------------------------------------------------------
# bilinear rationalization


def rationalize_bilinear(
    phi: BilinearPhase,
    lam: LocalPhase | None,
    mu: LocalPhase | None,
    delta: float,
    kmax: int,
    threshold_c: float,
) -> int:
    """Smallest multiplier k <= kmax flattening a bilinear phase that has
    a large twisted exponential sum.

    The sum E e(phi(n,m) + lam(n) + mu(m)) is measured with n, m regular
    on the two domain Bohr sets; below delta the hypothesis fails.  The
    flatness test bounds ||k phi(n,m)|| * rho^2 / (||n||_S ||m||_S) on
    the half-radius ball, with word norms in the denominator."""
    p = phi.p
    Pn = regular_pmf(phi.domain_n)
    Pm = regular_pmf(phi.domain_m)
    total = 0j
    for n, mn in Pn.items():
        for m, mm in Pm.items():
            ph = phi.table[n][m]
            if lam is not None:
                ph += lam.unit_tables[0][n]
            if mu is not None:
                ph += mu.unit_tables[0][m]
            total += float(mn * mm) * np.exp(2j * np.pi * float(ph % 1))
    if abs(total) < delta:
        raise ExponentialSumTooSmall(
            f"|E e(phi + lam + mu)| = {abs(total):.6g} below delta {delta}"
        )
    words = word_norm_table(phi.domain_n.S, p)
    half_n = bohr_members(BohrSet(phi.domain_n.group, phi.domain_n.S, phi.domain_n.rho / 2))
    half_m = bohr_members(BohrSet(phi.domain_m.group, phi.domain_m.S, phi.domain_m.rho / 2))
    rho_sq = float(phi.domain_n.rho * phi.domain_m.rho)
    for k in range(1, kmax + 1):
        ok = True
        for n in half_n:
            wn = words[n]
            if wn == 0:
                continue
            for m in half_m:
                wm = words[m]
                if wm == 0:
                    continue
                d = float(_circle_dist(k * phi.table[n][m]))
                if d * rho_sq > threshold_c * wn * wm:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return k
    raise NoSmallMultiple(f"no multiplier k <= {kmax} flattens the phase")


# ---------------------------------------------------------------------------
# derivative frequency map


@dataclass
class FrequencyMap:
    """Frequencies attached to derivative directions n2 with large local
    U^2 box value of f(. + n2) conj f(.)."""

    p: int
    S: tuple[int, ...]
    rho0: Fraction
    rho1: Fraction
    rho2: Fraction
    eta: float
    omega: list[int]
    xi: dict[int, int]
    correlations: dict[int, float]
    omega_prob: float  # P(h2 - h2' in Omega) under iid regular draws

    def frequency(self, n2: int) -> int:
        return self.xi.get(n2 % self.p, 0)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "S": list(self.S),
            "eta": _fmt(self.eta),
            "omega": sorted(self.omega),
            "xi": {str(k): v for k, v in sorted(self.xi.items())},
            "correlations": {str(k): _fmt(v) for k, v in sorted(self.correlations.items())},
            "omega_prob": _fmt(self.omega_prob),
        }


def derivative_frequency_map(
    f: GroupFunction,
    S,
    rho0,
    rho1,
    rho2,
    eta: float,
    separation_c: float = calibration.LOCU2_SEPARATION_C,
) -> FrequencyMap:
    """First step of the U^3 inverse argument.

    For each direction n2 in B(S, 2 rho2), tests whether the multiplicative
    derivative f(. + n2) conj f(.) has local U^2 box value at least eta/4;
    the passing directions form Omega and each receives the maximizing
    frequency of the U^2 witness objective at threshold eta/4."""
    p = f.p
    g = PrimeGroup(p)
    rho0, rho1, rho2 = as_fraction(rho0), as_fraction(rho1), as_fraction(rho2)
    J3 = JointSampler.independent(
        p,
        {
            "h0": regular_pmf(BohrSet(g, S, rho0)),
            "h1": regular_pmf(BohrSet(g, S, rho1)),
            "h2": regular_pmf(BohrSet(g, S, rho2)),
        },
    )
    u3 = u3_local(f, J3).value
    if u3 < eta:
        raise InsufficientU3(f"measured u3 {u3:.6g} below eta {eta}")
    P0 = regular_pmf(BohrSet(g, S, rho0))
    P1 = regular_pmf(BohrSet(g, S, rho1))
    J2 = JointSampler.independent(p, {"h0": P0, "h1": P1})
    omega: list[int] = []
    xi: dict[int, int] = {}
    corrs: dict[int, float] = {}
    S_t = BohrSet(g, S, rho2).S
    directions = bohr_members(BohrSet(g, S, 2 * rho2))
    vals = f.values
    idx = np.arange(p)
    for n2 in directions:
        fn2 = GroupFunction(g, vals[(idx + n2) % p] * np.conj(vals))
        if u2_local(fn2, J2).value < eta / 4:
            continue
        corr = u2_correlations(fn2, P0, P1, method="fft")
        best = int(np.argmax(corr))
        omega.append(n2)
        xi[n2] = best
        corrs[n2] = float(corr[best])
    # exact P(h2 - h2' in Omega) for iid regular draws from B(S, rho2)
    P2 = regular_pmf(BohrSet(g, S, rho2))
    oset = set(omega)
    prob = sum(
        float(m * mp)
        for h2, m in P2.items()
        for h2p, mp in P2.items()
        if (h2 - h2p) % p in oset
    )
    return FrequencyMap(p, S_t, rho0, rho1, rho2, eta, omega, xi, corrs, prob)


@dataclass
class QuadrupleAudit:
    threshold: float
    trials: int
    in_omega: int
    bad: int

    @property
    def omega_fraction(self) -> float:
        return self.in_omega / self.trials if self.trials else 0.0

    @property
    def bad_fraction(self) -> float:
        return self.bad / self.in_omega if self.in_omega else 0.0

    def to_json(self) -> dict:
        return {
            "threshold": _fmt(self.threshold),
            "trials": self.trials,
            "in_omega": self.in_omega,
            "bad": self.bad,
            "omega_fraction": _fmt(self.omega_fraction),
            "bad_fraction": _fmt(self.bad_fraction),
        }


def quadruple_audit(
    fmap: FrequencyMap,
    threshold: float,
    trials: int = 10000,
    seed: int = 0,
) -> QuadrupleAudit:
    """Additive-quadruple additivity audit of a frequency map.

    Draws h2, h2', k2, k2' iid regular from B(S, rho2) and forms the
    quadruple (h2-h2', k2-k2', k2-h2', h2-k2'), which always satisfies
    a1 + a2 = a3 + a4.  A quadruple inside Omega^4 is bad when
    ||xi(a1) + xi(a2) - xi(a3) - xi(a4)||_S exceeds the threshold."""
    p = fmap.p
    g = PrimeGroup(p)
    rng = random.Random(seed)
    P2 = regular_pmf(BohrSet(g, fmap.S, fmap.rho2))
    support = list(P2.support())
    weights = [float(P2.prob(a)) for a in support]
    words = word_norm_table(fmap.S, p)
    oset = set(fmap.omega)
    in_omega = bad = 0
    for _ in range(trials):
        h2, h2p, k2, k2p = rng.choices(support, weights=weights, k=4)
        quad = (
            (h2 - h2p) % p,
            (k2 - k2p) % p,
            (k2 - h2p) % p,
            (h2 - k2p) % p,
        )
        if not all(a in oset for a in quad):
            continue
        in_omega += 1
        combo = (
            fmap.xi[quad[0]] + fmap.xi[quad[1]] - fmap.xi[quad[2]] - fmap.xi[quad[3]]
        ) % p
        if words[combo] > threshold:
            bad += 1
    return QuadrupleAudit(threshold, trials, in_omega, bad)
