"""Discrete Fourier analysis on Z/pZ.

Transforms, characters, Fourier coefficients of regular distributions and
decay diagnostics.  The transform normalization is fixed to
fhat(xi) = (1/p) sum_n f(n) e_p(-xi n); every Plancherel constant in the
test-suite derives from this choice.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bohr import BohrSet, DEFAULT_ENUM_CAP, PrimeGroup, RegularPmf, word_norm_table
from .errors import EnumerationCapExceeded


def character(p: int, a: int) -> complex:
    """e_p(a) = exp(2*pi*i*a/p)."""
    return complex(np.exp(2j * np.pi * (a % p) / p))


def character_vector(p: int) -> np.ndarray:
    """Array of e_p(n) for n = 0..p-1."""
    return np.exp(2j * np.pi * np.arange(p) / p)


@dataclass
class GroupFunction:
    """Dense complex-valued function on Z/pZ, with an optional sup-norm claim."""

    group: PrimeGroup
    values: np.ndarray
    bound: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if len(self.values) != self.group.p:
            raise ValueError(f"need {self.group.p} values, got {len(self.values)}")
        if self.bound is not None:
            top = float(np.max(np.abs(self.values)))
            if top > self.bound + 1e-12:
                raise ValueError(f"claimed bound {self.bound} but sup is {top}")

    @property
    def p(self) -> int:
        return self.group.p

    def mean(self) -> complex:
        return complex(self.values.mean())


@dataclass
class Spectrum:
    """Fourier coefficients of a GroupFunction, indexed by frequency."""

    group: PrimeGroup
    coefficients: np.ndarray

    @property
    def p(self) -> int:
        return self.group.p

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["xi", "re", "im"])
        for xi, c in enumerate(self.coefficients):
            w.writerow([xi, repr(float(c.real)), repr(float(c.imag))])
        return buf.getvalue()


def dft(f: GroupFunction) -> Spectrum:
    """fhat(xi) = (1/p) sum_n f(n) e_p(-xi n); prime-length FFT via numpy."""
    coeffs = np.fft.fft(f.values) / f.p
    return Spectrum(f.group, coeffs)


def idft(F: Spectrum) -> GroupFunction:
    """f(n) = sum_xi fhat(xi) e_p(xi n)."""
    values = np.fft.ifft(F.coefficients) * F.p
    return GroupFunction(F.group, values)


def pmf_fourier(P: RegularPmf, lam: int) -> complex:
    """E e_p(lam * n) for n drawn from P, summed over the exact support."""
    p = P.p
    total = 0j
    for n, mass in P.items():
        total += float(mass) * np.exp(2j * np.pi * ((lam * n) % p) / p)
    return complex(total)


def pmf_spectrum(P: RegularPmf) -> np.ndarray:
    """All Fourier coefficients E e_p(lam n), lam = 0..p-1, via one FFT."""
    p = P.p
    dense = np.zeros(p)
    for n, mass in P.items():
        dense[n] = float(mass)
    # fft computes sum_n mass(n) e_p(-lam n); conjugate flips the sign
    return np.conj(np.fft.fft(dense))


@dataclass
class DecayReport:
    """Decay diagnostics for the Fourier coefficients of a regular pmf."""

    bohr: BohrSet
    ratios: dict[int, float]
    max_ratio: float
    argmax: int


def fde_report(B: BohrSet, cap: int = DEFAULT_ENUM_CAP) -> DecayReport:
    """Ratio |E e_p(lam n)| * rho * ||lam||_S / |S|^{5/2} for every lam.

    Frequencies with word norm 0 (only lam = 0) are excluded; the bound
    they certify is vacuous there.
    """
    from .bohr import regular_pmf

    p = B.p
    if p > cap:
        raise EnumerationCapExceeded(f"p={p} exceeds enumeration cap {cap}")
    P = regular_pmf(B, cap=cap)
    spec = pmf_spectrum(P)
    words = word_norm_table(B.S, p)
    rho = float(B.rho)
    scale = rho / len(B.S) ** 2.5
    ratios = {}
    for lam in range(p):
        if words[lam] == 0:
            continue
        ratios[lam] = abs(spec[lam]) * scale * words[lam]
    argmax = max(ratios, key=ratios.get)
    return DecayReport(B, ratios, ratios[argmax], argmax)
