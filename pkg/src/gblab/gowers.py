"""Gowers-type multilinear forms on Z/pZ.

The 4-AP form Lambda with label-coupled distributions, localized U^2 and
U^3 box norms with regular shift distributions, and the positivity of the
x - 3y + 3z - w form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .bohr import BohrSet, PrimeGroup, RegularPmf, regular_pmf, uniform_pmf
from .errors import GroupMismatch, SupportTooLarge
from .spectral import GroupFunction

EXACT_TERM_CAP = 10**7


def _as_pmf(P) -> dict[int, Fraction]:
    if isinstance(P, RegularPmf):
        return dict(P.items())
    return dict(P)


def _dense(P: Mapping[int, Fraction], p: int) -> np.ndarray:
    out = np.zeros(p)
    for a, m in P.items():
        out[a % p] = float(m)
    return out


@dataclass
class JointSampler:
    """Joint law of named slot variables coupled through a label c.

    Conditioned on c the slots are independent, each with its own pmf;
    unconditionally they may be arbitrarily coupled through the label.
    Primed copies used by box norms are independent draws with the same
    label.
    """

    p: int
    labels: list
    label_pmf: dict
    slots: tuple[str, ...]
    slot_pmfs: dict  # label -> slot name -> pmf dict

    @classmethod
    def independent(cls, p: int, slot_pmfs: Mapping[str, Mapping]) -> "JointSampler":
        """Single-label sampler with independent slots."""
        pmfs = {name: _as_pmf(P) for name, P in slot_pmfs.items()}
        return cls(p, [0], {0: Fraction(1)}, tuple(slot_pmfs), {0: pmfs})

    @classmethod
    def uniform(cls, p: int, slots: Sequence[str] = ("a", "r")) -> "JointSampler":
        U = uniform_pmf(PrimeGroup(p))
        return cls.independent(p, {s: U for s in slots})

    def support_product(self, label) -> int:
        n = 1
        for name in self.slots:
            n *= len(self.slot_pmfs[label][name])
        return n

    def exact_cost(self) -> int:
        return sum(self.support_product(c) for c in self.labels)

    def slot_pmf(self, label, name) -> dict[int, Fraction]:
        return self.slot_pmfs[label][name]

    def sample_label(self, rng):
        u = rng.random()
        acc = 0.0
        for c in self.labels:
            acc += float(self.label_pmf[c])
            if u < acc:
                return c
        return self.labels[-1]

    def sample_slot(self, label, name, rng) -> int:
        u = rng.random()
        acc = 0.0
        for a, m in self.slot_pmfs[label][name].items():
            acc += float(m)
            if u < acc:
                return a
        return a

    def sample(self, rng) -> tuple:
        c = self.sample_label(rng)
        return c, {name: self.sample_slot(c, name, rng) for name in self.slots}

    def marginal(self, name) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for c in self.labels:
            pc = self.label_pmf[c]
            for a, m in self.slot_pmfs[c][name].items():
                out[a] = out.get(a, Fraction(0)) + pc * m
        return out


def bohr_pair_sampler(p: int, S, rho0, rho1) -> JointSampler:
    """Shift sampler with h0 regular on B(S, rho0), h1 regular on B(S, rho1)."""
    g = PrimeGroup(p)
    P0 = regular_pmf(BohrSet(g, S, rho0))
    P1 = regular_pmf(BohrSet(g, S, rho1))
    return JointSampler.independent(p, {"h0": P0, "h1": P1})


def bohr_triple_sampler(p: int, S, rho0, rho1, rho2) -> JointSampler:
    g = PrimeGroup(p)
    return JointSampler.independent(
        p,
        {
            "h0": regular_pmf(BohrSet(g, S, rho0)),
            "h1": regular_pmf(BohrSet(g, S, rho1)),
            "h2": regular_pmf(BohrSet(g, S, rho2)),
        },
    )


@dataclass
class ExpectationResult:
    value: float
    stderr: float | None
    mode: str

    def __float__(self):
        return self.value


def _four_values(f) -> list[np.ndarray]:
    if isinstance(f, GroupFunction):
        return [f.values] * 4
    fs = list(f)
    if len(fs) != 4:
        raise ValueError("need one function or exactly four")
    return [g.values for g in fs]


def lambda4(
    f,
    J: JointSampler,
    mode: str = "exact",
    trials: int = 20000,
    rng=None,
    cap: int = EXACT_TERM_CAP,
) -> ExpectationResult:
    """Lambda_{a,r}(f0,f1,f2,f3) = E f0(a) f1(a+r) f2(a+2r) f3(a+3r)
    under the coupled law of (a, r)."""
    vals = _four_values(f)
    p = J.p
    if set(J.slots) != {"a", "r"}:
        raise ValueError(f"lambda4 needs slots a, r; sampler has {J.slots}")
    if mode == "exact":
        if J.exact_cost() > cap:
            raise SupportTooLarge(
                f"{J.exact_cost()} terms exceed exact-mode cap {cap}"
            )
        total = 0.0
        idx = np.arange(p)
        for c in J.labels:
            pa = J.slot_pmf(c, "a")
            pr = J.slot_pmf(c, "r")
            wa = _dense(pa, p)
            label_sum = 0.0
            for r, mr in pr.items():
                prod = (
                    vals[0]
                    * vals[1][(idx + r) % p]
                    * vals[2][(idx + 2 * r) % p]
                    * vals[3][(idx + 3 * r) % p]
                )
                label_sum += float(mr) * float(np.real(np.dot(wa, prod)))
            total += float(J.label_pmf[c]) * label_sum
        return ExpectationResult(total, None, "exact")
    if mode == "monte-carlo":
        if rng is None:
            raise ValueError("monte-carlo mode needs an rng")
        samples = np.empty(trials)
        for i in range(trials):
            _, drawn = J.sample(rng)
            a, r = drawn["a"], drawn["r"]
            samples[i] = np.real(
                vals[0][a % p]
                * vals[1][(a + r) % p]
                * vals[2][(a + 2 * r) % p]
                * vals[3][(a + 3 * r) % p]
            )
        return ExpectationResult(
            float(samples.mean()),
            float(samples.std(ddof=1) / math.sqrt(trials)),
            "monte-carlo",
        )
    raise ValueError(f"unknown mode {mode!r}")


def cauchy_form(F: GroupFunction) -> float:
    """E_{x,y,z} F(x) F(y) F(z) F(x - 3y + 3z) for uniform x, y, z.

    Substituting w = x - 3y collapses the triple average to
    E_w (E_y F(w + 3y) F(y))^2, a single cross-correlation; the value is
    therefore at least (E F)^4 by Cauchy-Schwarz.
    """
    vals = np.real(F.values).astype(float)
    p = F.p
    inv3 = pow(3, -1, p)
    H = vals[(inv3 * np.arange(p)) % p]
    # c(w) = sum_y F(w + y') H(y') via FFT cross-correlation
    c = np.fft.ifft(np.fft.fft(vals) * np.conj(np.fft.fft(H))).real
    g = c / p
    return float(np.mean(g * g))


def u2_local(
    f: GroupFunction,
    J: JointSampler,
    mode: str = "exact",
    trials: int = 20000,
    rng=None,
    cap: int = EXACT_TERM_CAP,
) -> ExpectationResult:
    """Local U^2 box value
    E f(h0+h1) conj f(h0+h1') conj f(h0'+h1) f(h0'+h1')
    with (h0', h1') independent copies sharing the label of (h0, h1)."""
    p = J.p
    if set(J.slots) != {"h0", "h1"}:
        raise ValueError(f"u2_local needs slots h0, h1; sampler has {J.slots}")
    vals = f.values
    if mode == "monte-carlo":
        if rng is None:
            raise ValueError("monte-carlo mode needs an rng")
        samples = np.empty(trials)
        for i in range(trials):
            c = J.sample_label(rng)
            h0 = J.sample_slot(c, "h0", rng)
            h0p = J.sample_slot(c, "h0", rng)
            h1 = J.sample_slot(c, "h1", rng)
            h1p = J.sample_slot(c, "h1", rng)
            samples[i] = np.real(
                vals[(h0 + h1) % p]
                * np.conj(vals[(h0 + h1p) % p])
                * np.conj(vals[(h0p + h1) % p])
                * vals[(h0p + h1p) % p]
            )
        return ExpectationResult(
            float(samples.mean()),
            float(samples.std(ddof=1) / math.sqrt(trials)),
            "monte-carlo",
        )
    total = 0.0
    for c in J.labels:
        p0 = J.slot_pmf(c, "h0")
        p1 = J.slot_pmf(c, "h1")
        # square over the larger support: cost small^2 * large
        if len(p0) >= len(p1):
            inner, outer = p0, p1
        else:
            inner, outer = p1, p0
        n_in, n_out = len(inner), len(outer)
        if n_out * n_out * n_in > cap:
            raise SupportTooLarge(
                f"{n_out * n_out * n_in} terms exceed exact-mode cap {cap}"
            )
        out_items = list(outer.items())
        in_shifts = np.array([a for a in inner], dtype=np.int64)
        in_w = np.array([float(m) for m in inner.values()])
        label_sum = 0.0
        for g, mg in out_items:
            for gp, mgp in out_items:
                # T = sum over inner shift of w * f(g + s) conj f(gp + s)
                T = np.sum(
                    in_w * vals[(g + in_shifts) % p] * np.conj(vals[(gp + in_shifts) % p])
                )
                label_sum += float(mg) * float(mgp) * float(np.real(T * np.conj(T)))
        total += float(J.label_pmf[c]) * label_sum
    return ExpectationResult(total, None, "exact")


def u3_local(
    f: GroupFunction,
    J: JointSampler,
    mode: str = "exact",
    trials: int = 20000,
    rng=None,
    cap: int = EXACT_TERM_CAP,
) -> ExpectationResult:
    """Local U^3 box value: the eight-fold alternating product over
    (h0, h0', h1, h1', h2, h2') with primed copies sharing the label."""
    p = J.p
    if set(J.slots) != {"h0", "h1", "h2"}:
        raise ValueError(f"u3_local needs slots h0, h1, h2; sampler has {J.slots}")
    vals = f.values
    if mode == "monte-carlo":
        if rng is None:
            raise ValueError("monte-carlo mode needs an rng")
        samples = np.empty(trials)
        for i in range(trials):
            c = J.sample_label(rng)
            h = {}
            for name in ("h0", "h1", "h2"):
                h[name] = J.sample_slot(c, name, rng)
                h[name + "p"] = J.sample_slot(c, name, rng)
            prod = 1 + 0j
            for w in range(8):
                x = (
                    h["h0p" if w & 1 else "h0"]
                    + h["h1p" if w & 2 else "h1"]
                    + h["h2p" if w & 4 else "h2"]
                ) % p
                v = vals[x]
                prod *= np.conj(v) if bin(w).count("1") % 2 else v
            samples[i] = prod.real
        return ExpectationResult(
            float(samples.mean()),
            float(samples.std(ddof=1) / math.sqrt(trials)),
            "monte-carlo",
        )
    total = 0.0
    for c in J.labels:
        pmfs = [J.slot_pmf(c, n) for n in ("h0", "h1", "h2")]
        # the squared (inner) slot is the largest support
        inner_idx = max(range(3), key=lambda i: len(pmfs[i]))
        inner = pmfs[inner_idx]
        outers = [pmfs[i] for i in range(3) if i != inner_idx]
        n_in = len(inner)
        n_a, n_b = len(outers[0]), len(outers[1])
        if n_a * n_a * n_b * n_b * n_in > cap:
            raise SupportTooLarge(
                f"{n_a * n_a * n_b * n_b * n_in} terms exceed exact-mode cap {cap}"
            )
        in_shifts = np.array(list(inner), dtype=np.int64)
        in_w = np.array([float(m) for m in inner.values()])
        items_a = [(a, float(m)) for a, m in outers[0].items()]
        items_b = [(b, float(m)) for b, m in outers[1].items()]
        label_sum = 0.0
        for a, ma in items_a:
            for ap, map_ in items_a:
                for b, mb in items_b:
                    for bp, mbp in items_b:
                        base = (
                            vals[(a + b + in_shifts) % p]
                            * np.conj(vals[(a + bp + in_shifts) % p])
                            * np.conj(vals[(ap + b + in_shifts) % p])
                            * vals[(ap + bp + in_shifts) % p]
                        )
                        T = np.sum(in_w * base)
                        label_sum += ma * map_ * mb * mbp * float(
                            np.real(T * np.conj(T))
                        )
        total += float(J.label_pmf[c]) * label_sum
    return ExpectationResult(total, None, "exact")
