"""Structured local approximants and the energy-decrement iteration.

The data model: a labeled family of shifted Bohr cells, each carrying a
Lipschitz function of a locally quadratic torus-valued phase, used to
approximate a function f on Z/pZ.  The driver repeatedly improves the
approximant by an exhaustive quadratic-correlation search until the
three certificate inequalities (near-uniformity, recurrence, thickness)
hold, with all bookkeeping recorded in a replayable trace.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .bohr import (
    BohrSet,
    PrimeGroup,
    RegularPmf,
    as_fraction,
    find_prime_in,
    regular_pmf,
)
from .errors import BudgetExhausted, NoCorrelationFound, UnimplementedStep
from .gowers import JointSampler
from .spectral import GroupFunction
from .torus import DilatedTorus, LocalPhase


def _fmt(x: float) -> str:
    return f"{x:.12g}"


@functools.lru_cache(maxsize=2048)
def _cached_pmf(B: BohrSet) -> RegularPmf:
    # shifted cells share one breakpoint integration
    if B.shift % B.p:
        base = BohrSet(B.group, B.S, B.rho)
        return _cached_pmf(base).shifted(B.shift)
    return regular_pmf(B)


def _dense_pmf(B: BohrSet) -> np.ndarray:
    P = _cached_pmf(B)
    out = np.zeros(B.p)
    for a, m in P.items():
        out[a] = float(m)
    return out


# ---------------------------------------------------------------------------
# Lipschitz functions on dilated tori


@dataclass
class CosineCombination:
    """F(x) = clamp(sum_t c_t cos(2 pi <m_t, x / lambda> + theta_t)).

    Frequencies are integer vectors against the torus coordinates, so F
    is well defined on the torus; the Lipschitz certificate is the sum
    of |c_t| * 2 pi * |(m_{t,i} / lambda_i)|_2, and clamping composes
    with a 1-Lipschitz map."""

    torus: DilatedTorus
    terms: list[tuple[float, tuple[int, ...], float]] = field(default_factory=list)
    clamped: bool = True

    def lipschitz_certificate(self) -> float:
        total = 0.0
        for c, m, _ in self.terms:
            grad = math.sqrt(
                sum((mi / float(l)) ** 2 for mi, l in zip(m, self.torus.lambdas))
            )
            total += abs(c) * 2 * math.pi * grad
        return total

    def eval_units(self, units: np.ndarray) -> np.ndarray:
        """Evaluate on points given by unit coordinates u_i = x_i / lambda_i,
        shape (dim, n)."""
        n = units.shape[1] if units.ndim == 2 else 1
        out = np.zeros(n)
        for c, m, theta in self.terms:
            phase = np.zeros(n)
            for mi, row in zip(m, units):
                phase += mi * row
            out += c * np.cos(2 * math.pi * phase + theta)
        if self.clamped:
            out = np.clip(out, -1.0, 1.0)
        return out


# ---------------------------------------------------------------------------
# approximant


@dataclass
class Cell:
    """Per-label data: shifted Bohr cell, torus, Lipschitz F, quadratic Xi."""

    label: int
    prob: Fraction
    bohr: BohrSet  # shift field holds the cell's base point n_c
    torus: DilatedTorus
    F: CosineCombination
    Xi: LocalPhase

    def fv_dense(self) -> np.ndarray:
        p = self.bohr.p
        if self.torus.dim == 0:
            base = np.zeros(p)
            if self.F.terms:
                # constant terms only on the empty torus
                base += sum(c * math.cos(t) for c, _, t in self.F.terms)
                if self.F.clamped:
                    base = np.clip(base, -1.0, 1.0)
            return base
        units = np.array(
            [[float(v) for v in table] for table in self.Xi.unit_tables]
        )
        return self.F.eval_units(units)

    def a_bohr(self) -> BohrSet:
        return BohrSet(
            self.bohr.group, self.bohr.S, self.bohr.rho / 2, self.bohr.shift
        )

    def r_bohr(self, shrink: Fraction) -> BohrSet:
        return BohrSet(self.bohr.group, self.bohr.S, shrink * self.bohr.rho)


@dataclass
class StructuredLocalApproximant:
    group: PrimeGroup
    cells: list[Cell]
    shrink: Fraction

    @property
    def p(self) -> int:
        return self.group.p

    def a_weights(self) -> np.ndarray:
        """Matrix W[c, a] = P(a = a | label c), rows in cell order."""
        return np.stack([_dense_pmf(cell.a_bohr()) for cell in self.cells])

    def r_weights(self) -> list[np.ndarray]:
        return [_dense_pmf(cell.r_bohr(self.shrink)) for cell in self.cells]

    def label_probs(self) -> np.ndarray:
        return np.array([float(cell.prob) for cell in self.cells])

    def fv_matrix(self) -> np.ndarray:
        return np.stack([cell.fv_dense() for cell in self.cells])

    def a_marginal(self) -> np.ndarray:
        return self.label_probs() @ self.a_weights()

    def joint_sampler(self) -> JointSampler:
        labels = [cell.label for cell in self.cells]
        label_pmf = {cell.label: cell.prob for cell in self.cells}
        slot_pmfs = {
            cell.label: {
                "a": dict(_cached_pmf(cell.a_bohr()).items()),
                "r": dict(_cached_pmf(cell.r_bohr(self.shrink)).items()),
            }
            for cell in self.cells
        }
        return JointSampler(self.p, labels, label_pmf, ("a", "r"), slot_pmfs)


def initial_approximant(p: int, shrink=Fraction(1, 50)) -> StructuredLocalApproximant:
    """One cell per residue c, all with S = {1}, rho = 1, base point c,
    the zero-dimensional torus and F = 0.

    The label-c cell draws a regularly from c + B({1}, 1/2); averaging the
    shifts over uniform c makes the unconditional law of a exactly uniform."""
    group = PrimeGroup(p)
    shrink = as_fraction(shrink)
    zero_torus = DilatedTorus(())
    cells = []
    for c in range(p):
        B = BohrSet(group, (1,), Fraction(1), shift=c)
        Xi = LocalPhase(B, "quadratic", [], torus=zero_torus)
        cells.append(
            Cell(c, Fraction(1, p), B, zero_torus, CosineCombination(zero_torus), Xi)
        )
    return StructuredLocalApproximant(group, cells, shrink)


# ---------------------------------------------------------------------------
# statistics


@dataclass
class ApproximantStats:
    waste: float
    err1: float
    err4: float
    energy: float
    d1: int
    d2: int
    d2poor: int
    rho_min: float
    vol_max: float
    lambda_f: float
    lambda_fv: float
    e_f_a: float
    e_fv_a: float
    p_r_zero: float
    uniformity_gap: float  # max_a |p P(a = a) - 1|

    def to_json(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            out[k] = v if isinstance(v, int) else _fmt(v)
        return out


def _lambda_per_label(
    vals0: np.ndarray, vals1: np.ndarray, wa: np.ndarray, wr: np.ndarray, p: int
) -> float:
    """E g0(a) g1(a+r) g1(a+2r) g1(a+3r) under (wa, wr), g0/g1 dense."""
    idx = np.arange(p)
    total = 0.0
    for r in np.nonzero(wr)[0]:
        prod = (
            vals0 * vals1[(idx + r) % p] * vals1[(idx + 2 * r) % p] * vals1[(idx + 3 * r) % p]
        )
        total += float(wr[r]) * float(wa @ prod)
    return float(total)


def approximant_stats(
    v: StructuredLocalApproximant, f, eta: float = 0.2
) -> ApproximantStats:
    p = v.p
    fvals = np.real(f.values if isinstance(f, GroupFunction) else np.asarray(f))
    probs = v.label_probs()
    W = v.a_weights()
    FV = v.fv_matrix()
    Rw = v.r_weights()
    e_f_a = float(probs @ (W @ fvals))
    e_fv_a = float(probs @ np.sum(W * FV, axis=1))
    waste = abs(e_f_a - float(fvals.mean()))
    err1 = abs(e_f_a - e_fv_a)
    energy = float(probs @ np.sum(W * (fvals[None, :] - FV) ** 2, axis=1))
    lam_f = 0.0
    lam_fv = 0.0
    d2poor = 0
    for i, cell in enumerate(v.cells):
        lf_c = _lambda_per_label(fvals, fvals, W[i], Rw[i], p)
        lv_c = _lambda_per_label(FV[i], FV[i], W[i], Rw[i], p)
        lam_f += float(probs[i]) * lf_c
        lam_fv += float(probs[i]) * lv_c
        e_fv_c = float(W[i] @ FV[i])
        if lv_c < e_fv_c**4 - eta / 2:
            d2poor = max(d2poor, cell.torus.dim)
    err4 = abs(lam_fv - lam_f)
    d1 = max(len(cell.bohr.S) for cell in v.cells)
    d2 = max(cell.torus.dim for cell in v.cells)
    rho_min = min(float(cell.bohr.rho) for cell in v.cells)
    vol_max = max(float(cell.torus.volume) for cell in v.cells)
    p_r_zero = float(sum(float(pr) * rw[0] for pr, rw in zip(probs, Rw)))
    marginal = v.a_marginal()
    uniformity_gap = float(np.max(np.abs(p * marginal - 1.0)))
    return ApproximantStats(
        waste,
        err1,
        err4,
        energy,
        d1,
        d2,
        min(d2poor, d2),
        rho_min,
        vol_max,
        lam_f,
        lam_fv,
        e_f_a,
        e_fv_a,
        p_r_zero,
        uniformity_gap,
    )


# ---------------------------------------------------------------------------
# toy energy decrement


@dataclass
class DecrementReport:
    predicted_drop: float
    achieved_drop: float
    updated_labels: int
    best_correlation: float
    argmax: tuple[int, int]  # lexicographically smallest best (alpha, beta)


def toy_energy_decrement(
    v: StructuredLocalApproximant,
    f,
    eta: float = 0.2,
    gamma_max: float = 1.0,
    floor: float = 1e-9,
    lipschitz_gap_use: float = 0.5,
) -> tuple[StructuredLocalApproximant, DecrementReport]:
    """One exhaustive quadratic-correlation improvement of the approximant.

    Per label, searches all global quadratic phases (alpha, beta) for the
    largest correlation with the residual f - f_v, adds the best cosine
    correction with an exactly optimal step size, clamps to [-1, 1], and
    re-expresses F and Xi with one added torus dimension whose period
    keeps the new F 1-Lipschitz."""
    p = v.p
    fvals = np.real(f.values if isinstance(f, GroupFunction) else np.asarray(f))
    probs = v.label_probs()
    W = v.a_weights()
    FV = v.fv_matrix()
    G = W * (fvals[None, :] - FV)  # weighted residual, shape (labels, p)
    n = np.arange(p)
    best_val = np.zeros(len(v.cells))
    best_ab = [(0, 0)] * len(v.cells)
    for alpha in range(p):
        phase = np.exp(2j * np.pi * ((alpha * n * n) % p) / p)
        # corr[c, beta] = sum_a G[c, a] e_p(alpha a^2 + beta a)
        corr = np.abs(np.fft.ifft(G * phase[None, :], axis=1) * p)
        cb = np.argmax(corr, axis=1)
        cv = corr[np.arange(len(v.cells)), cb]
        improved = cv > best_val + 1e-15
        for i in np.nonzero(improved)[0]:
            best_val[i] = cv[i]
            best_ab[i] = (alpha, int(cb[i]))
    # exact line search and new cells
    new_cells: list[Cell] = []
    predicted = 0.0
    updated = 0
    for i, cell in enumerate(v.cells):
        alpha, beta = best_ab[i]
        g = fvals - FV[i]
        # complex correlation fixes the cosine phase offset
        ph = np.exp(2j * np.pi * ((alpha * n * n + beta * n) % p) / p)
        z = np.sum(W[i] * g * ph)
        theta = -float(np.angle(z))
        h = np.cos(2 * np.pi * ((alpha * n * n + beta * n) % p) / p + theta)
        T = float(np.sum(W[i] * g * h))
        Q = float(np.sum(W[i] * h * h))
        gamma = min(max(T / Q if Q > 0 else 0.0, 0.0), gamma_max)
        drop = 2 * gamma * T - gamma * gamma * Q
        if gamma <= 0 or drop <= 0:
            new_cells.append(cell)
            continue
        predicted += float(probs[i]) * drop
        updated += 1
        gap = 1.0 - cell.F.lipschitz_certificate()
        lam_f = max(1.0, 2 * math.pi * gamma / max(gap * lipschitz_gap_use, 1e-9))
        lam = Fraction(math.ceil(lam_f * 1000), 1000)
        new_torus = DilatedTorus(cell.torus.lambdas + (lam,))
        terms = [(c, m + (0,), t) for c, m, t in cell.F.terms]
        terms.append((gamma, tuple([0] * cell.torus.dim) + (1,), theta))
        newF = CosineCombination(new_torus, terms)
        q_table = [Fraction((alpha * a * a + beta * a) % p, p) for a in range(p)]
        newXi = LocalPhase(
            cell.bohr, "quadratic", cell.Xi.unit_tables + [q_table], torus=new_torus
        )
        new_cells.append(replace(cell, torus=new_torus, F=newF, Xi=newXi))
    if predicted < floor:
        raise NoCorrelationFound(
            f"predicted energy drop {predicted:.3g} below floor {floor:.3g}"
        )
    v2 = StructuredLocalApproximant(v.group, new_cells, v.shrink)
    e_before = approximant_stats(v, fvals, eta).energy
    e_after = approximant_stats(v2, fvals, eta).energy
    report = DecrementReport(
        predicted,
        e_before - e_after,
        updated,
        float(best_val.max()),
        best_ab[int(np.argmax(best_val))],
    )
    return v2, report


# ---------------------------------------------------------------------------
# iteration driver


@dataclass
class EdgeCheck:
    d1_growth_ok: bool
    d2_growth_ok: bool
    rho_shrink_ok: bool
    vol_growth_ok: bool
    waste_drift_ok: bool

    def ok(self) -> bool:
        return all(self.__dict__.values())


@dataclass
class TraceStep:
    kind: str  # energy-decrement | dimension-decrement | terminal
    before: ApproximantStats
    after: ApproximantStats | None
    delta_energy: float
    edge: EdgeCheck | None
    details: dict

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "before": self.before.to_json(),
            "after": self.after.to_json() if self.after else None,
            "delta_energy": _fmt(self.delta_energy),
            "edge": None if self.edge is None else self.edge.__dict__,
            "details": {
                k: (v if isinstance(v, (int, str, bool, list, tuple)) else _fmt(v))
                for k, v in self.details.items()
            },
        }


@dataclass
class IterationTrace:
    steps: list[TraceStep] = field(default_factory=list)
    dimension_decrement_demanded: bool = False

    @property
    def energy_decrements(self) -> int:
        return sum(1 for s in self.steps if s.kind == "energy-decrement")

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(s.to_json()) for s in self.steps)


@dataclass
class Certificate:
    p: int
    eta: float
    stats: ApproximantStats
    waste_threshold: float
    thickness_threshold: float
    terminated_by: str  # conditions | correlation-floor

    @property
    def near_uniform_ok(self) -> bool:
        return self.stats.uniformity_gap <= 1e-9 + self.waste_threshold

    @property
    def recurrence_ok(self) -> bool:
        return self.stats.lambda_f >= self.stats.e_f_a**4 - self.eta

    @property
    def thickness_ok(self) -> bool:
        return self.stats.p_r_zero <= self.thickness_threshold

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "eta": _fmt(self.eta),
            "stats": self.stats.to_json(),
            "near_uniform_ok": self.near_uniform_ok,
            "recurrence_ok": self.recurrence_ok,
            "thickness_ok": self.thickness_ok,
            "terminated_by": self.terminated_by,
        }


@dataclass
class DriverConfig:
    eta: float = 0.2
    shrink: Fraction = Fraction(1, 50)
    budget: int = 40
    gamma_max: float = 1.0
    floor: float = 1e-9
    delta_e_declared: float = 0.1
    waste_threshold: float = 0.05
    thickness_threshold: float = 0.6
    vol_growth_cap: float = 1e9
    waste_drift_cap: float = 0.1


def iteration_driver(
    f,
    eta: float = 0.2,
    oracles: dict[str, Callable] | None = None,
    config: DriverConfig | None = None,
) -> tuple[Certificate, IterationTrace, StructuredLocalApproximant]:
    """Run the abstract improvement loop with toy constants.

    While the approximation errors are large, apply the energy-decrement
    oracle; when the approximant itself has too few progressions (poor
    distribution), demand the dimension-decrement oracle, which is a
    pluggable interface and unimplemented by default.  On termination the
    returned certificate records the three conclusions: near-uniform
    distribution of a, the recurrence bound for Lambda, and thickness of
    the step distribution."""
    config = config or DriverConfig(eta=eta)
    config.eta = eta
    oracles = oracles or {}
    fvals = np.real(f.values if isinstance(f, GroupFunction) else np.asarray(f))
    if fvals.min() < -1e-12 or fvals.max() > 1 + 1e-12:
        raise ValueError("driver input must map into [0, 1]")
    p = len(fvals)
    v = initial_approximant(p, config.shrink)
    trace = IterationTrace()
    energy_cap = math.ceil(4 / config.delta_e_declared)
    terminated_by = "conditions"
    for step in range(config.budget + 1):
        stats = approximant_stats(v, fvals, eta)
        if stats.err1 > eta or stats.err4 > eta:
            if step >= config.budget:
                raise BudgetExhausted(
                    f"budget {config.budget} exhausted with err1={stats.err1:.4g}, "
                    f"err4={stats.err4:.4g}",
                    trace,
                )
            oracle = oracles.get("energy", None)
            try:
                if oracle is not None:
                    v2, report = oracle(v, fvals, eta)
                else:
                    v2, report = toy_energy_decrement(
                        v, fvals, eta, config.gamma_max, config.floor
                    )
            except NoCorrelationFound as e:
                terminated_by = "correlation-floor"
                trace.steps.append(
                    TraceStep("terminal", stats, None, 0.0, None, {"reason": str(e)})
                )
                break
            after = approximant_stats(v2, fvals, eta)
            edge = EdgeCheck(
                d1_growth_ok=after.d1 <= stats.d1,
                d2_growth_ok=after.d2 <= stats.d2 + 1,
                rho_shrink_ok=after.rho_min >= stats.rho_min / 2,
                vol_growth_ok=after.vol_max
                <= max(stats.vol_max, 1.0) * config.vol_growth_cap,
                waste_drift_ok=abs(after.waste - stats.waste)
                <= config.waste_drift_cap,
            )
            trace.steps.append(
                TraceStep(
                    "energy-decrement",
                    stats,
                    after,
                    stats.energy - after.energy,
                    edge,
                    {
                        "predicted": report.predicted_drop,
                        "achieved": report.achieved_drop,
                        "updated_labels": report.updated_labels,
                        "argmax": list(report.argmax),
                    },
                )
            )
            if trace.energy_decrements > energy_cap:
                raise BudgetExhausted(
                    f"more than {energy_cap} energy decrements", trace
                )
            v = v2
            continue
        if stats.lambda_fv <= stats.e_fv_a**4 - eta:
            trace.dimension_decrement_demanded = True
            oracle = oracles.get("dimension", None)
            if oracle is None:
                raise UnimplementedStep(
                    "dimension-decrement demanded but no oracle supplied"
                )
            if step >= config.budget:
                raise BudgetExhausted(f"budget {config.budget} exhausted", trace)
            v2 = oracle(v, fvals, eta)
            after = approximant_stats(v2, fvals, eta)
            trace.steps.append(
                TraceStep(
                    "dimension-decrement",
                    stats,
                    after,
                    stats.energy - after.energy,
                    None,
                    {},
                )
            )
            v = v2
            continue
        trace.steps.append(TraceStep("terminal", stats, None, 0.0, None, {}))
        break
    else:
        raise BudgetExhausted(f"budget {config.budget} exhausted", trace)
    final = approximant_stats(v, fvals, eta)
    cert = Certificate(
        p,
        eta,
        final,
        config.waste_threshold,
        config.thickness_threshold,
        terminated_by,
    )
    return cert, trace, v


# ---------------------------------------------------------------------------
# r4 harness


@dataclass
class R4Report:
    N: int
    p: int
    size: int
    density: float
    ap_free: bool
    found_ap: tuple[int, int] | None
    certificate: Certificate | None
    trace: IterationTrace | None
    budget_exhausted: bool
    inequality: dict

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "p": self.p,
            "size": self.size,
            "density": _fmt(self.density),
            "ap_free": self.ap_free,
            "found_ap": list(self.found_ap) if self.found_ap else None,
            "certificate": self.certificate.to_json() if self.certificate else None,
            "budget_exhausted": self.budget_exhausted,
            "inequality": {k: _fmt(v) for k, v in self.inequality.items()},
        }


def find_4ap(A: set[int], p: int) -> tuple[int, int] | None:
    """First (a, r), r != 0 mod p, with all of a, a+r, a+2r, a+3r in A mod p.

    For A inside [1, N] with p >= 2N this is equivalent to A containing a
    genuine integer 4-term progression: consecutive differences of the
    four residues are congruent to the reduced step and small enough to
    be equal to it."""
    res = {a % p for a in A}
    for a in sorted(res):
        for r in range(1, p):
            if (
                (a + r) % p in res
                and (a + 2 * r) % p in res
                and (a + 3 * r) % p in res
            ):
                return a, r
    return None


def greedy_ap_free(N: int) -> set[int]:
    """Greedy 4-AP-free subset of {1..N} (integer progressions, r > 0)."""
    out: list[int] = []
    for n in range(1, N + 1):
        ok = True
        for r in range(1, n):
            if n - 3 * r >= 1 and all(n - k * r in set(out) for k in (1, 2, 3)):
                ok = False
                break
        if ok:
            out.append(n)
    return set(out)


def r4_harness(
    N: int, A: set[int], eta: float = 0.2, config: DriverConfig | None = None
) -> R4Report:
    """Embed 1_A in Z/pZ for the smallest prime p in [2N, 4N], check
    4-AP-freeness exhaustively, run the iteration driver, and report the
    density-vs-Lambda inequality chain."""
    if not A <= set(range(1, N + 1)):
        raise ValueError("A must be a subset of {1..N}")
    group = find_prime_in(2 * N, 4 * N)
    p = group.p
    found = find_4ap(A, p) if A else None
    fvals = np.zeros(p)
    for a in A:
        fvals[a % p] = 1.0
    cert = None
    trace = None
    exhausted = False
    try:
        cert, trace, _ = iteration_driver(fvals, eta=eta, config=config)
    except BudgetExhausted as e:
        exhausted = True
        trace = e.trace
    density = len(A) / p
    ineq = {"density_fourth": density**4, "eta": eta}
    if cert is not None:
        ineq["e_f_a"] = cert.stats.e_f_a
        ineq["e_f_a_fourth"] = cert.stats.e_f_a**4
        ineq["lambda_f"] = cert.stats.lambda_f
        ineq["lambda_lower_bound"] = cert.stats.e_f_a**4 - eta
    return R4Report(
        N,
        p,
        len(A),
        density,
        found is None,
        found,
        cert,
        trace,
        exhausted,
        ineq,
    )
