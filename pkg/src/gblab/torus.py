"""Dilated tori and local polynomial phases.

Torus norms and duals, the complement-torus isomorphism for an
irreducible frequency, box bases for low-dimensional lattices, Bohr
bases of Z/pZ, and validators for locally linear/quadratic/bilinear
maps.  Lattice arithmetic is exact over fractions.Fraction; floating
point appears only in reported sizes and certified factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .bohr import BohrSet, DEFAULT_ENUM_CAP, PrimeGroup, as_fraction, bohr_members, dual_norm
from .errors import (
    DimensionCapExceeded,
    DimensionMismatch,
    EnumerationCapExceeded,
    NoAdmissibleBasePoint,
    RankDeficient,
    ReducibleFrequency,
    ZeroFrequency,
)

LATTICE_DIM_CAP = 6
BOHR_BASIS_DIM_CAP = 4


# ---------------------------------------------------------------------------
# dilated tori


@dataclass(frozen=True)
class DilatedTorus:
    """Product of circles R/lambda_i Z with periods lambda_i >= 1."""

    lambdas: tuple[Fraction, ...]

    def __init__(self, lambdas: Sequence):
        lams = tuple(as_fraction(x) for x in lambdas)
        if any(l < 1 for l in lams):
            raise ValueError(f"periods must be >= 1, got {lams}")
        object.__setattr__(self, "lambdas", lams)

    @property
    def dim(self) -> int:
        return len(self.lambdas)

    @property
    def volume(self) -> Fraction:
        v = Fraction(1)
        for l in self.lambdas:
            v *= l
        return v

    def reduce(self, x: Sequence) -> tuple:
        """Representative with each coordinate in [0, lambda_i)."""
        if len(x) != self.dim:
            raise DimensionMismatch(f"point has {len(x)} coords, torus dim {self.dim}")
        out = []
        for xi, l in zip(x, self.lambdas):
            if isinstance(xi, Fraction):
                out.append(xi - (xi / l).__floor__() * l)
            else:
                out.append(float(xi) % float(l))
        return tuple(out)

    def norm(self, x: Sequence) -> float:
        """Euclidean distance in R^d from x to the lattice prod lambda_i Z."""
        if len(x) != self.dim:
            raise DimensionMismatch(f"point has {len(x)} coords, torus dim {self.dim}")
        total = 0.0
        for xi, l in zip(x, self.lambdas):
            lf = float(l)
            r = float(xi) % lf
            total += min(r, lf - r) ** 2
        return math.sqrt(total)


def torus_norm(G: DilatedTorus, x: Sequence) -> float:
    return G.norm(x)


@dataclass(frozen=True)
class DualFrequency:
    """Dual-lattice element k = (m_i / lambda_i) of a dilated torus."""

    torus: DilatedTorus
    numerators: tuple[int, ...]

    def __init__(self, torus: DilatedTorus, numerators: Sequence[int]):
        nums = tuple(int(m) for m in numerators)
        if len(nums) != torus.dim:
            raise DimensionMismatch(
                f"{len(nums)} numerators for a {torus.dim}-dimensional torus"
            )
        object.__setattr__(self, "torus", torus)
        object.__setattr__(self, "numerators", nums)

    @property
    def is_zero(self) -> bool:
        return all(m == 0 for m in self.numerators)

    @property
    def irreducible(self) -> bool:
        if self.is_zero:
            return False
        return math.gcd(*(abs(m) for m in self.numerators)) == 1

    def norm_sq(self) -> Fraction:
        return sum(
            (Fraction(m) / l) ** 2 for m, l in zip(self.numerators, self.torus.lambdas)
        )

    def norm(self) -> float:
        return math.sqrt(float(self.norm_sq()))

    def pairing(self, x: Sequence) -> float:
        """<k, x> = sum m_i x_i / lambda_i, in R (caller reduces mod 1)."""
        return float(
            sum(Fraction(m) * as_fraction(xi) / l
                for m, xi, l in zip(self.numerators, x, self.torus.lambdas))
        )


# ---------------------------------------------------------------------------
# exact lattice helpers


def gram_matrix(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    return [[sum(a * b for a, b in zip(u, v)) for v in rows] for u in rows]


def _det(M: list[list[Fraction]]) -> Fraction:
    """Determinant by fraction-free-ish Gaussian elimination over Fraction."""
    n = len(M)
    A = [row[:] for row in M]
    det = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if A[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            A[i], A[piv] = A[piv], A[i]
            det = -det
        det *= A[i][i]
        inv = 1 / A[i][i]
        for r in range(i + 1, n):
            factor = A[r][i] * inv
            if factor:
                A[r] = [x - factor * y for x, y in zip(A[r], A[i])]
    return det


def lll_reduce(rows: list[list[Fraction]], delta: Fraction = Fraction(3, 4)):
    """Lenstra-Lenstra-Lovasz reduction over exact rationals.

    rows are r linearly independent vectors in Q^d with r <= d <= 6;
    returns a reduced basis of the same lattice.
    """
    b = [list(map(Fraction, row)) for row in rows]
    r = len(b)

    def gso():
        # Gram-Schmidt: bstar and mu coefficients
        bstar = []
        mu = [[Fraction(0)] * r for _ in range(r)]
        for i in range(r):
            v = b[i][:]
            for j in range(i):
                num = sum(x * y for x, y in zip(b[i], bstar[j]))
                den = sum(x * x for x in bstar[j])
                mu[i][j] = num / den
                v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
            bstar.append(v)
        norms = [sum(x * x for x in v) for v in bstar]
        return bstar, mu, norms

    bstar, mu, norms = gso()
    k = 1
    while k < r:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
        bstar, mu, norms = gso()
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            bstar, mu, norms = gso()
            k = max(k - 1, 1)
    return b


def integer_row_kernel(m: Sequence[int]) -> list[list[int]]:
    """Basis of the integer solutions of sum m_i z_i = 0, for m != 0.

    Builds a unimodular U with m.U = (g, 0, ..., 0); columns 2..d of U
    span the kernel.
    """
    d = len(m)
    if all(x == 0 for x in m):
        raise ZeroFrequency("kernel of the zero form is everything")
    U = [[1 if i == j else 0 for j in range(d)] for i in range(d)]

    def col(j):
        return [U[i][j] for i in range(d)]

    def setcol(j, v):
        for i in range(d):
            U[i][j] = v[i]

    g = m[0]
    for j in range(1, d):
        a, bb = g, m[j]
        if bb == 0:
            # column j is already annihilated by m
            continue
        gg, x, y = _egcd(a, bb)
        c0, cj = col(0), col(j)
        setcol(0, [x * u + y * v for u, v in zip(c0, cj)])
        setcol(j, [(-bb // gg) * u + (a // gg) * v for u, v in zip(c0, cj)])
        g = gg
    # kernel basis: columns 1..d-1
    return [col(j) for j in range(1, d)]


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with a x + b y = g = gcd(a, b), g > 0 unless both zero."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_r, old_x, old_y = -old_r, -old_x, -old_y
    return old_r, old_x, old_y


def hermite_basis(rows: list[list[int]]) -> list[list[int]]:
    """Row-style Hermite reduction: basis of the integer row span of rows."""
    mat = [row[:] for row in rows if any(row)]
    n = len(mat[0])
    basis: list[list[int]] = []
    # column-by-column elimination using exact gcd pivots
    work = mat
    for j in range(n):
        nz = [r for r in work if r[j] != 0]
        rest = [r for r in work if r[j] == 0]
        if not nz:
            work = rest
            continue
        piv = nz[0]
        for r in nz[1:]:
            # reduce pair (piv[j], r[j]) to (gcd, 0)
            g, x, y = _egcd(piv[j], r[j])
            a, bq = piv[j] // g, r[j] // g
            piv, r2 = (
                [x * u + y * v for u, v in zip(piv, r)],
                [-bq * u + a * v for u, v in zip(piv, r)],
            )
            rest.append(r2)
        basis.append(piv)
        work = [r for r in rest if any(r)]
    return basis


# ---------------------------------------------------------------------------
# box bases


@dataclass
class BoxBasis:
    """Reduced generators v_i with sizes N_i such that the integer box
    {sum n_i v_i : |n_i| < t N_i} sits inside the ball of radius t."""

    generators: list[list[Fraction]]
    sizes: list[float]
    sizes_sq_inv: list[Fraction]  # exact N_i^{-2} = r^2 |v_i|^2
    inner_factor: float
    det_sq: Fraction

    @property
    def rank(self) -> int:
        return len(self.generators)

    def coefficient_of(self, x: Sequence[Fraction]) -> list[Fraction]:
        """Solve x = sum n_i v_i exactly (least-squares via Gram system)."""
        G = gram_matrix(self.generators)
        rhs = [sum(a * as_fraction(b) for a, b in zip(v, x)) for v in self.generators]
        return _solve_fraction(G, rhs)

    def to_json(self) -> dict:
        return {
            "generators": [
                [f"{c.numerator}/{c.denominator}" for c in v] for v in self.generators
            ],
            "sizes": [repr(s) for s in self.sizes],
            "inner_factor": repr(self.inner_factor),
        }


def _solve_fraction(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for i in range(n):
        piv = next(r for r in range(i, n) if M[r][i] != 0)
        M[i], M[piv] = M[piv], M[i]
        inv = 1 / M[i][i]
        M[i] = [x * inv for x in M[i]]
        for r in range(n):
            if r != i and M[r][i]:
                f = M[r][i]
                M[r] = [x - f * y for x, y in zip(M[r], M[i])]
    return [M[i][n] for i in range(n)]


def lattice_box_basis(
    rows: Sequence[Sequence], enum_range: int = 5
) -> BoxBasis:
    """Reduced basis plus box sizes N_i := 1 / (r * |v_i|).

    Outer containment is exact by the triangle inequality: |n_i| < t N_i
    for all i forces |sum n_i v_i| < t.  The inner direction is certified
    per instance: the achieved factor is the minimum over enumerated
    short combinations x != 0 of |x| / max_i(|n_i| / N_i).
    """
    basis = [[as_fraction(c) for c in row] for row in rows]
    r = len(basis)
    if r > LATTICE_DIM_CAP:
        raise DimensionCapExceeded(f"rank {r} exceeds cap {LATTICE_DIM_CAP}")
    det_sq = _det(gram_matrix(basis))
    if det_sq == 0:
        raise RankDeficient("generators are linearly dependent")
    red = lll_reduce(basis)
    norms_sq = [sum(x * x for x in v) for v in red]
    sizes = [1.0 / (r * math.sqrt(float(ns))) for ns in norms_sq]
    sizes_sq_inv = [r * r * ns for ns in norms_sq]
    # certify the inner direction by short-vector enumeration
    import itertools

    K = enum_range
    C = np.array(
        list(itertools.product(range(-K, K + 1), repeat=r)), dtype=float
    )
    C = C[np.any(C != 0, axis=1)]
    V = np.array([[float(c) for c in v] for v in red])
    X = C @ V
    xnorms = np.sqrt((X * X).sum(axis=1))
    boxscale = (np.abs(C) / np.array(sizes)).max(axis=1)
    inner = float((xnorms / boxscale).min())
    return BoxBasis(red, sizes, sizes_sq_inv, inner, det_sq)


# ---------------------------------------------------------------------------
# complement torus


@dataclass
class ComplementTorus:
    """Isomorphism data for the kernel of an irreducible dual frequency.

    The kernel subgroup is V / L where V is the hyperplane annihilated by
    k and L the intersection of the period lattice with V.  Points are
    carried in coordinates t relative to the reduced basis of L: the map
    psi sends sum t_i v_i to (t_i * period_i).
    """

    source: DilatedTorus
    k: DualFrequency
    torus: DilatedTorus  # the complement G'
    basis: list[list[Fraction]]  # reduced basis of L, rows in R^d
    vol_ratio: float  # vol(G') / (|k| vol(G))

    def psi_from_coords(self, t: Sequence) -> tuple:
        """Image in G' of the point with basis coordinates t."""
        return self.torus.reduce(
            [as_fraction(ti) * l for ti, l in zip(t, self.torus.lambdas)]
        )

    def embed(self, t: Sequence) -> tuple:
        """Point of the source torus with basis coordinates t."""
        d = len(self.basis[0]) if self.basis else self.source.dim
        x = [Fraction(0)] * d
        for ti, v in zip(t, self.basis):
            ti = as_fraction(ti)
            x = [xi + ti * vi for xi, vi in zip(x, v)]
        return self.source.reduce(x)

    def psi_inverse(self, y: Sequence) -> tuple:
        """Basis coordinates of the kernel point mapped to y."""
        return tuple(
            as_fraction(yi) / l for yi, l in zip(y, self.torus.lambdas)
        )


def complement_torus(G: DilatedTorus, k: DualFrequency) -> ComplementTorus:
    """Complement torus G' and isomorphism data for kernel(k) in G."""
    if k.torus != G:
        raise DimensionMismatch("frequency belongs to a different torus")
    if k.is_zero:
        raise ZeroFrequency("zero frequency has no complement torus")
    if not k.irreducible:
        raise ReducibleFrequency(f"numerators {k.numerators} have a common factor")
    d = G.dim
    if d == 1:
        return ComplementTorus(G, k, DilatedTorus(()), [], 1.0)
    kernel = integer_row_kernel(k.numerators)
    # scale integer solutions by the periods to land in the period lattice
    L = [
        [z_i * l for z_i, l in zip(z, G.lambdas)]
        for z in kernel
    ]
    box = lattice_box_basis(L)
    # periods 1/N_i = r*|v_i| >= 1 since the shortest vector of L has length >= 1
    lams = []
    for ns in (sum(x * x for x in v) for v in box.generators):
        lam = box.rank * math.sqrt(float(ns))
        lams.append(Fraction(lam).limit_denominator(10**9))
    torus = DilatedTorus([max(l, Fraction(1)) for l in lams])
    vol_ratio = float(torus.volume) / (k.norm() * float(G.volume))
    return ComplementTorus(G, k, torus, box.generators, vol_ratio)


# ---------------------------------------------------------------------------
# Bohr bases of Z/pZ


@dataclass
class BohrBasis:
    """Elements a_1..a_d of Z/pZ with sizes N_i giving box coordinates
    for the dual norm: small-norm residues decompose as sum n_i a_i with
    coefficient i bounded by a recorded multiple of N_i * norm."""

    p: int
    S: tuple[int, ...]
    elements: list[int]
    sizes: list[float]
    box: BoxBasis
    rep_factor: float  # achieved factor in the representation bound
    prod_sizes_over_p: float

    def represent(self, a: int) -> list[int]:
        """Coefficients n with a = sum n_i a_i mod p, from nearest-integer
        reduction of the phase vector of a."""
        p = self.p
        x = []
        for s in self.S:
            f = Fraction((a * s) % p, p)
            if f > Fraction(1, 2):
                f -= 1
            x.append(f)
        coeffs = self.box.coefficient_of(x)
        out = []
        for c in coeffs:
            if c.denominator != 1:
                raise AssertionError(f"non-integer lattice coordinate {c}")
            out.append(int(c))
        assert sum(n * ai for n, ai in zip(out, self.elements)) % p == a % p
        return out


def bohr_basis(S, p: int, cap: int = DEFAULT_ENUM_CAP) -> BohrBasis:
    """Box basis for the dual-norm geometry of B(S, .) in Z/pZ."""
    if p > cap:
        raise EnumerationCapExceeded(f"p={p} exceeds enumeration cap {cap}")
    group = PrimeGroup(p)
    S = tuple(sorted({s % p for s in S} - {0}))
    if not S:
        from .errors import DegenerateFrequencySet

        raise DegenerateFrequencySet("no non-zero frequency")
    d = len(S)
    if d > BOHR_BASIS_DIM_CAP:
        raise DimensionCapExceeded(f"|S|={d} exceeds cap {BOHR_BASIS_DIM_CAP}")
    # lattice generated by Z^S and the vector (s/p): scale by p, Hermite-reduce
    rows = [[p if i == j else 0 for j in range(d)] for i in range(d)]
    rows.append([s for s in S])
    hb = hermite_basis(rows)
    gamma = [[Fraction(c, p) for c in row] for row in hb]
    box = lattice_box_basis(gamma)
    # lift each generator to the residue it represents: v = a*(s/p) mod Z^S
    s0 = S[0]
    s0_inv = pow(s0, -1, p)
    elements = []
    for v in box.generators:
        num = v[0] * p
        assert num.denominator == 1
        a = (int(num) * s0_inv) % p
        # sanity: the whole vector matches a*(s/p) modulo integers
        for s, c in zip(S, v):
            diff = c - Fraction(a * s, p)
            assert diff.denominator == 1, f"lift mismatch at s={s}"
        elements.append(a)
    # achieved representation factor over all residues
    basis = BohrBasis(p, S, elements, box.sizes, box, 0.0, 0.0)
    worst = 0.0
    for a in range(1, p):
        coeffs = basis.represent(a)
        na = float(dual_norm(a, S, p))
        for n, N in zip(coeffs, box.sizes):
            if n != 0:
                worst = max(worst, abs(n) / (N * na))
    basis.rep_factor = worst
    prod = 1.0
    for N in box.sizes:
        prod *= N
    basis.prod_sizes_over_p = prod / p
    return basis


def bohr_basis_norm_bound_holds(basis: BohrBasis) -> bool:
    """Exact check: dual norm of each basis element is at most 1/N_i."""
    for a, ninv_sq in zip(basis.elements, basis.box.sizes_sq_inv):
        if dual_norm(a, basis.S, basis.p) ** 2 > ninv_sq:
            return False
    return True


def bohr_basis_unique_in_half_box(basis: BohrBasis) -> bool:
    """Exhaustive: representations with |n_i| < N_i/2 are unique."""
    import itertools

    ranges = []
    for N in basis.sizes:
        top = math.ceil(N / 2) - 1
        # |n| < N/2 with n integer
        vals = [n for n in range(-top - 1, top + 2) if abs(n) < N / 2]
        ranges.append(vals)
    seen = {}
    for coeffs in itertools.product(*ranges):
        a = sum(n * ai for n, ai in zip(coeffs, basis.elements)) % basis.p
        if a in seen and seen[a] != coeffs:
            return False
        seen[a] = coeffs
    return True


# ---------------------------------------------------------------------------
# local phases


@dataclass
class PhaseCertificate:
    arity: str
    ok: bool
    max_defect: Fraction
    tuples_checked: int

    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "ok": self.ok,
            "max_defect": f"{self.max_defect.numerator}/{self.max_defect.denominator}",
            "tuples_checked": self.tuples_checked,
        }


def _circle_defect(num: int, den: int) -> Fraction:
    m = num % den
    return Fraction(min(m, den - m), den)


@dataclass
class LocalPhase:
    """R/Z-valued (or dilated-torus-valued) map on a shifted Bohr set.

    Each output coordinate i is stored as a unit phase table u_i (exact
    fractions mod 1); the torus value is (lambda_i * u_i(a)).  A circle
    target is the special case of a single coordinate with period 1.
    """

    domain: BohrSet
    arity: str  # linear | quadratic
    unit_tables: list[list[Fraction]]  # per coordinate, indexed by residue
    torus: DilatedTorus | None = None
    certificate: PhaseCertificate | None = None

    def __post_init__(self):
        p = self.domain.p
        for t in self.unit_tables:
            if len(t) != p:
                raise ValueError("phase table length must equal p")

    @property
    def p(self) -> int:
        return self.domain.p

    @property
    def out_dim(self) -> int:
        return len(self.unit_tables)

    def unit(self, a: int):
        a %= self.p
        vals = tuple(t[a] for t in self.unit_tables)
        return vals[0] if self.torus is None else vals

    def value(self, a: int):
        a %= self.p
        if self.torus is None:
            return self.unit_tables[0][a]
        return tuple(
            l * t[a] for l, t in zip(self.torus.lambdas, self.unit_tables)
        )

    @classmethod
    def from_polynomial(
        cls, domain: BohrSet, coeffs: Sequence[int], torus: DilatedTorus | None = None
    ) -> "LocalPhase":
        """Phase a -> (c_k a^k + ... + c_1 a + c_0)/p mod 1, one coordinate.

        coeffs in descending degree; degree <= 1 is declared linear,
        degree 2 quadratic.
        """
        p = domain.p
        table = []
        for a in range(p):
            acc = 0
            for c in coeffs:
                acc = acc * a + c
            table.append(Fraction(acc % p, p))
        arity = "linear" if len(coeffs) <= 2 else "quadratic"
        return cls(domain, arity, [table], torus)


def _common_numerators(table: list[Fraction]) -> tuple[np.ndarray, int]:
    den = 1
    for v in table:
        den = den * v.denominator // math.gcd(den, v.denominator)
    nums = np.array([int(v * den) for v in table], dtype=np.int64)
    return nums, den


def _domain_mask(B: BohrSet) -> np.ndarray:
    p = B.p
    mask = np.zeros(p, dtype=bool)
    for a in bohr_members(B, cap=10**7):
        mask[a] = True
    return mask


def validate_phase(
    phi: LocalPhase,
    arity: str | None = None,
    budget: int | None = None,
    seed: int = 0,
) -> PhaseCertificate:
    """Check the defining alternating-sum identity for the declared arity.

    linear: the four-point second difference vanishes; quadratic: the
    eight-point third difference vanishes.  Exhaustive over all shift
    tuples when budget is None, otherwise over budget random tuples.
    All admissibility and defect arithmetic is exact.
    """
    arity = arity or phi.arity
    p = phi.p
    mask = _domain_mask(phi.domain)
    rng = np.random.default_rng(seed)
    order = 2 if arity == "linear" else 3
    if budget is None:
        grids = np.meshgrid(*([np.arange(p)] * (order + 1)), indexing="ij")
        tuples = np.stack([g.ravel() for g in grids], axis=1)
    else:
        tuples = rng.integers(0, p, size=(budget, order + 1))
    n = tuples[:, 0]
    hs = tuples[:, 1:]
    # corners of the order-dimensional parallelepiped
    admissible = np.ones(len(tuples), dtype=bool)
    corners = []
    for omega in range(2**order):
        pt = n.copy()
        bits = 0
        for j in range(order):
            if omega >> j & 1:
                pt = pt + hs[:, j]
                bits += 1
        pt = pt % p
        admissible &= mask[pt]
        corners.append((pt, -1 if bits % 2 else 1))
    max_defect = Fraction(0)
    checked = 0
    for table in phi.unit_tables:
        nums, den = _common_numerators(table)
        alt = np.zeros(len(tuples), dtype=np.int64)
        for pt, sign in corners:
            alt += sign * nums[pt]
        alt = alt[admissible] % den
        checked = int(admissible.sum())
        if len(alt):
            folded = np.minimum(alt, den - alt)
            worst = int(folded.max())
            d = Fraction(worst, den)
            if d > max_defect:
                max_defect = d
    cert = PhaseCertificate(arity, max_defect == 0, max_defect, checked)
    phi.certificate = cert
    return cert


def validate_ap_identity(phi: LocalPhase) -> PhaseCertificate:
    """Check phi(n) - 3 phi(n+h) + 3 phi(n+2h) - phi(n+3h) = 0 on the
    pairs (n, h) whose four points all lie in the domain."""
    p = phi.p
    mask = _domain_mask(phi.domain)
    n, h = np.meshgrid(np.arange(p), np.arange(p), indexing="ij")
    n, h = n.ravel(), h.ravel()
    pts = [(n + k * h) % p for k in range(4)]
    admissible = mask[pts[0]] & mask[pts[1]] & mask[pts[2]] & mask[pts[3]]
    max_defect = Fraction(0)
    checked = int(admissible.sum())
    for table in phi.unit_tables:
        nums, den = _common_numerators(table)
        alt = nums[pts[0]] - 3 * nums[pts[1]] + 3 * nums[pts[2]] - nums[pts[3]]
        alt = alt[admissible] % den
        if len(alt):
            folded = np.minimum(alt, den - alt)
            d = Fraction(int(folded.max()), den)
            if d > max_defect:
                max_defect = d
    return PhaseCertificate("ap-identity", max_defect == 0, max_defect, checked)


def second_difference(phi: LocalPhase, h1: int, h2: int):
    """Base-point-independent value of the discrete second difference
    phi(a+h1+h2) - phi(a+h1) - phi(a+h2) + phi(a), as unit phases.

    Every base point a with all four points in the domain must give the
    same value mod 1 (checked); NoAdmissibleBasePoint if none exists.
    """
    p = phi.p
    mask = _domain_mask(phi.domain)
    bases = [
        a
        for a in range(p)
        if mask[a] and mask[(a + h1) % p] and mask[(a + h2) % p] and mask[(a + h1 + h2) % p]
    ]
    if not bases:
        raise NoAdmissibleBasePoint(f"no base point admits shifts ({h1}, {h2})")
    out = []
    for table in phi.unit_tables:
        vals = {
            (
                table[(a + h1 + h2) % p] - table[(a + h1) % p] - table[(a + h2) % p] + table[a]
            )
            % 1
            for a in bases
        }
        if len(vals) != 1:
            raise AssertionError(
                f"second difference depends on the base point: {sorted(vals)}"
            )
        out.append(vals.pop())
    return out[0] if phi.torus is None else tuple(out)


@dataclass
class BilinearPhase:
    """R/Z-valued map on a product of Bohr sets, additive in each slot."""

    domain_n: BohrSet
    domain_m: BohrSet
    table: list[list[Fraction]]  # indexed [n][m] over Z/pZ x Z/pZ

    @property
    def p(self) -> int:
        return self.domain_n.p

    def value(self, n: int, m: int) -> Fraction:
        return self.table[n % self.p][m % self.p]

    @classmethod
    def from_coefficient(cls, domain_n: BohrSet, domain_m: BohrSet, c: int):
        """phi(n, m) = c n m / p."""
        p = domain_n.p
        table = [
            [Fraction((c * n * m) % p, p) for m in range(p)] for n in range(p)
        ]
        return cls(domain_n, domain_m, table)


def validate_bilinear(phi: BilinearPhase) -> PhaseCertificate:
    """Additivity in each slot over admissible triples, exact."""
    p = phi.p
    mn = _domain_mask(phi.domain_n)
    mm = _domain_mask(phi.domain_m)
    members_n = [a for a in range(p) if mn[a]]
    members_m = [a for a in range(p) if mm[a]]
    max_defect = Fraction(0)
    checked = 0
    for x in members_n:
        for xp in members_n:
            if not mn[(x + xp) % p]:
                continue
            for m in members_m:
                d = (
                    phi.table[(x + xp) % p][m] - phi.table[x][m] - phi.table[xp][m]
                ) % 1
                max_defect = max(max_defect, min(d, 1 - d))
                checked += 1
    for y in members_m:
        for yp in members_m:
            if not mm[(y + yp) % p]:
                continue
            for n in members_n:
                d = (
                    phi.table[n][(y + yp) % p] - phi.table[n][y] - phi.table[n][yp]
                ) % 1
                max_defect = max(max_defect, min(d, 1 - d))
                checked += 1
    return PhaseCertificate("bilinear", max_defect == 0, max_defect, checked)
