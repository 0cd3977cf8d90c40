"""Exact Bohr-set geometry over Z/pZ.

Membership, enumeration, dual and word norms, regular distributions and
total-variation comparisons.  All norm arithmetic is done with
fractions.Fraction so that the classical inequalities can be asserted
without any tolerance.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import (
    DegenerateFrequencySet,
    EnumerationCapExceeded,
    GroupMismatch,
    NoPrimeInRange,
)

DEFAULT_ENUM_CAP = 10**6


def as_fraction(x) -> Fraction:
    """Convert x to an exact Fraction.

    Floats go through their shortest decimal repr, so 0.2 means 1/5,
    not the nearest binary double.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all n < 3.3e24."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeGroup:
    """The cyclic group Z/pZ for a prime p, with the map a -> a/p in R/Z."""

    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")

    def circle_norm(self, a: int) -> Fraction:
        """Distance of a/p to the nearest integer, as an exact fraction."""
        a %= self.p
        return Fraction(min(a, self.p - a), self.p)


def find_prime_in(lo: int, hi: int) -> PrimeGroup:
    """Smallest prime p with lo <= p <= hi."""
    if not (2 <= lo < hi):
        raise ValueError(f"need 2 <= lo < hi, got [{lo}, {hi}]")
    for n in range(lo, hi + 1):
        if is_prime(n):
            return PrimeGroup(n)
    raise NoPrimeInRange(f"no prime in [{lo}, {hi}]")


def _check_frequencies(S: Iterable[int], p: int) -> tuple[int, ...]:
    S = tuple(sorted({s % p for s in S}))
    if not any(s != 0 for s in S):
        raise DegenerateFrequencySet(f"S={S} contains no non-zero residue mod {p}")
    return S


def dual_norm(a: int, S: Iterable[int], p: int) -> Fraction:
    """sup over xi in S of || a*xi/p ||_{R/Z}, exact."""
    S = _check_frequencies(S, p)
    a %= p
    best = Fraction(0)
    for xi in S:
        v = (a * xi) % p
        d = Fraction(min(v, p - v), p)
        if d > best:
            best = d
    return best


def word_norm_table(S: Iterable[int], p: int) -> list[int]:
    """BFS distances on the Cayley graph of Z/pZ with generators +-S.

    table[a] is the word norm of a; computing the whole table costs
    O(p*|S|), which is the cheapest way to get any single value exactly.
    """
    S = _check_frequencies(S, p)
    gens = [g for s in S for g in (s, (-s) % p) if s % p != 0]
    dist = [-1] * p
    dist[0] = 0
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for g in gens:
            b = (a + g) % p
            if dist[b] < 0:
                dist[b] = dist[a] + 1
                queue.append(b)
    return dist


def word_norm(a: int, S: Iterable[int], p: int) -> int:
    """Minimum of sum |n_s| over representations a = sum n_s * s mod p."""
    return word_norm_table(S, p)[a % p]


@dataclass(frozen=True)
class BohrSet:
    """B(S, rho) = {a in Z/pZ : ||a||_{S-perp} < rho}, optionally shifted."""

    group: PrimeGroup
    S: tuple[int, ...]
    rho: Fraction
    shift: int = 0

    def __init__(self, group: PrimeGroup, S, rho, shift: int = 0):
        if isinstance(group, int):
            group = PrimeGroup(group)
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "S", _check_frequencies(S, group.p))
        rho = as_fraction(rho)
        if not (0 < rho <= 1):
            raise ValueError(f"rho={rho} outside (0, 1]")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "shift", shift % group.p)

    @property
    def p(self) -> int:
        return self.group.p

    @property
    def rank(self) -> int:
        return len(self.S)

    def norm(self, a: int) -> Fraction:
        return dual_norm(a, self.S, self.p)

    def __contains__(self, a: int) -> bool:
        return self.norm(a - self.shift) < self.rho

    def shifted(self, n: int) -> "BohrSet":
        return BohrSet(self.group, self.S, self.rho, (self.shift + n) % self.p)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "S": list(self.S),
            "rho": f"{self.rho.numerator}/{self.rho.denominator}",
            "shift": self.shift,
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "BohrSet":
        return cls(PrimeGroup(d["p"]), d["S"], Fraction(d["rho"]), d.get("shift", 0))


def bohr_members(B: BohrSet, cap: int = DEFAULT_ENUM_CAP) -> list[int]:
    """All members of the (shifted) Bohr set, in increasing residue order."""
    p = B.p
    if p > cap:
        raise EnumerationCapExceeded(f"p={p} exceeds enumeration cap {cap}")
    if B.rho > Fraction(1, 2):
        return [(a + B.shift) % p for a in range(p)]
    # norms of a and p-a agree, so scan half the range
    members = []
    for a in range(p):
        if dual_norm(a, B.S, p) < B.rho:
            members.append((a + B.shift) % p)
    members.sort()
    return members


@dataclass(frozen=True)
class RegularPmf:
    """Exact pmf of the regular distribution on a shifted Bohr set."""

    base: BohrSet
    masses: dict[int, Fraction] = field(compare=False)

    @property
    def p(self) -> int:
        return self.base.p

    def prob(self, a: int) -> Fraction:
        return self.masses.get(a % self.p, Fraction(0))

    def support(self) -> list[int]:
        return sorted(self.masses)

    def items(self):
        return self.masses.items()

    def shifted(self, n: int) -> "RegularPmf":
        p = self.p
        return RegularPmf(
            self.base.shifted(n), {(a + n) % p: m for a, m in self.masses.items()}
        )

    def to_json(self) -> dict:
        d = self.base.to_json()
        d["masses"] = {
            str(a): f"{m.numerator}/{m.denominator}" for a, m in sorted(self.masses.items())
        }
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def regular_pmf(B: BohrSet, cap: int = DEFAULT_ENUM_CAP) -> RegularPmf:
    """Exact regular pmf by breakpoint integration.

    The mass of a is 2*int_{1/2}^{1} [||a|| < t*rho] / |B(S, t*rho)| dt.
    The integrand is a step function of t with breakpoints at ||b||/rho
    for b in B(S, rho), so the integral is a finite rational sum.
    """
    p = B.p
    if p > cap:
        raise EnumerationCapExceeded(f"p={p} exceeds enumeration cap {cap}")
    half = Fraction(1, 2)
    one = Fraction(1)
    # unshifted norms scaled by 1/rho; entry tau[a] = ||a||/rho
    taus: dict[int, Fraction] = {}
    for a in range(p):
        t = dual_norm(a, B.S, p) / B.rho
        if t < one:
            taus[a] = t
    cuts = sorted({half, one} | {t for t in taus.values() if half < t < one})
    masses: dict[int, Fraction] = {a: Fraction(0) for a in taus}
    for lo, hi in zip(cuts, cuts[1:]):
        # on the open interval (lo, hi), b is a member iff tau_b <= lo
        cell = [a for a, t in taus.items() if t <= lo]
        size = len(cell)
        weight = 2 * (hi - lo) / size
        for a in cell:
            masses[a] += weight
    total = sum(masses.values())
    assert total == 1, f"pmf normalization failed: {total}"
    shift = B.shift
    return RegularPmf(B, {(a + shift) % p: m for a, m in masses.items() if m > 0})


def sample_regular(B: BohrSet, rng, cap: int = DEFAULT_ENUM_CAP) -> int:
    """One draw from the regular distribution on B.

    Draws t uniformly from [1/2, 1] and then a uniform member of
    B(S, t*rho); deterministic given the state of rng.
    """
    p = B.p
    if p > cap:
        raise EnumerationCapExceeded(f"p={p} exceeds enumeration cap {cap}")
    t = Fraction(1, 2) * (1 + Fraction(str(rng.random())))
    trho = t * B.rho
    cell = [a for a in range(p) if dual_norm(a, B.S, p) < trho]
    a = cell[rng.randrange(len(cell))]
    return (a + B.shift) % p


def tv_distance(P, Q) -> Fraction:
    """sum_a |P(a) - Q(a)|, exact; note: no 1/2 factor in this convention."""
    p_P = P.p if hasattr(P, "p") else None
    p_Q = Q.p if hasattr(Q, "p") else None
    if p_P is not None and p_Q is not None and p_P != p_Q:
        raise GroupMismatch(f"pmfs over Z/{p_P}Z and Z/{p_Q}Z")
    pm = dict(P.items()) if hasattr(P, "items") else dict(P)
    qm = dict(Q.items()) if hasattr(Q, "items") else dict(Q)
    total = Fraction(0)
    for a in set(pm) | set(qm):
        total += abs(pm.get(a, Fraction(0)) - qm.get(a, Fraction(0)))
    return total


def uniform_pmf(group: PrimeGroup) -> dict[int, Fraction]:
    m = Fraction(1, group.p)
    return {a: m for a in range(group.p)}
