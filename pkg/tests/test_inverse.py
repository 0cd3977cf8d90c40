"""Unit tests for the local U^2 inverse machinery and frequency maps."""

import math
import random
from fractions import Fraction

import numpy as np
import pytest

from gblab.bohr import BohrSet, PrimeGroup, regular_pmf
from gblab.errors import (
    AlmostLinearityViolated,
    ExponentialSumTooSmall,
    InsufficientU2,
    InsufficientU3,
    NoSmallMultiple,
    RadiusSeparationViolated,
)
from gblab.gowers import JointSampler, bohr_pair_sampler, u2_local
from gblab.inverse import (
    FrequencyMap,
    check_almost_linear,
    derivative_frequency_map,
    inverse_u2_local,
    linearize_defect,
    linearize_local,
    quadruple_audit,
    rationalize_bilinear,
    u2_correlations,
)
from gblab.spectral import GroupFunction, character_vector
from gblab.torus import BilinearPhase, LocalPhase

RHO0 = Fraction(3, 10)
RHO1 = Fraction(1, 40)


def phase_fn(p, xi):
    return GroupFunction(PrimeGroup(p), character_vector(p) ** xi, bound=1.0)


def noisy_phase(p, xi, eps, seed=0):
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-1, 1, p) + 1j * rng.uniform(-1, 1, p)
    noise /= np.max(np.abs(noise))
    vals = (1 - eps) * character_vector(p) ** xi + eps * noise
    vals /= np.max(np.abs(vals))
    return GroupFunction(PrimeGroup(p), vals)


class TestInverseU2:
    def test_pure_phase(self):
        p = 101
        w = inverse_u2_local(phase_fn(p, 17), {1}, RHO0, RHO1, eta=0.5)
        assert w.xi == 17
        assert w.correlation >= 0.25
        assert w.correlation == pytest.approx(1.0, abs=1e-9)

    def test_low_u2_rejected(self):
        p = 101
        rng = np.random.default_rng(1)
        f = GroupFunction(PrimeGroup(p), rng.choice([-1.0, 1.0], p))
        with pytest.raises(InsufficientU2):
            inverse_u2_local(f, {1}, RHO0, RHO1, eta=0.9)

    def test_separation_rejected(self):
        p = 101
        with pytest.raises(RadiusSeparationViolated):
            inverse_u2_local(
                phase_fn(p, 3), {1}, Fraction(1, 100), Fraction(1, 10), eta=0.1
            )

    def test_noisy_phase_meets_half_eta(self):
        p = 211
        eta = 0.1
        for seed in range(5):
            f = noisy_phase(p, 23, 0.1, seed=seed)
            w = inverse_u2_local(f, {1}, RHO0, Fraction(1, 100), eta=eta)
            assert w.correlation >= eta / 2
            assert w.xi == 23

    def test_fft_equals_exhaustive(self):
        p = 101
        f = noisy_phase(p, 40, 0.2, seed=3)
        P0 = regular_pmf(BohrSet(PrimeGroup(p), {1}, RHO0))
        P1 = regular_pmf(BohrSet(PrimeGroup(p), {1}, RHO1))
        a = u2_correlations(f, P0, P1, method="fft")
        b = u2_correlations(f, P0, P1, method="exhaustive")
        assert np.max(np.abs(a - b)) < 1e-9

    def test_witness_reproducible(self):
        p = 101
        f = noisy_phase(p, 9, 0.15, seed=4)
        w = inverse_u2_local(f, {1}, RHO0, RHO1, eta=0.3)
        P0 = regular_pmf(BohrSet(PrimeGroup(p), {1}, RHO0))
        P1 = regular_pmf(BohrSet(PrimeGroup(p), {1}, RHO1))
        corr = u2_correlations(f, P0, P1)
        assert corr[w.xi] == pytest.approx(w.correlation, abs=1e-9)
        assert w.xi == int(np.argmax(corr))

    def test_correlation_bounded(self):
        p = 101
        w = inverse_u2_local(phase_fn(p, 5), {1}, RHO0, RHO1, eta=0.3)
        assert 0 <= w.correlation <= 1 + 1e-9


class TestLinearize:
    def test_exact_linear(self):
        p = 101
        B = BohrSet(PrimeGroup(p), {1}, Fraction(1, 4))
        phi = LocalPhase.from_polynomial(B, [13, 0])
        xi, defect = linearize_local(phi, A=0.0)
        assert defect == 0
        assert linearize_defect(phi, 13, 0.0) == 0

    def test_constant_phase(self):
        p = 101
        B = BohrSet(PrimeGroup(p), {1}, Fraction(1, 4))
        phi = LocalPhase.from_polynomial(B, [7])
        xi, defect = linearize_local(phi, A=0.0)
        assert defect == 0
        assert xi == 0

    def test_shifted_domain(self):
        p = 101
        B = BohrSet(PrimeGroup(p), {1}, Fraction(1, 4), shift=30)
        phi = LocalPhase.from_polynomial(B, [13, 5])
        xi, defect = linearize_local(phi, A=0.0)
        assert xi == 13
        assert defect == 0

    def test_perturbed_linear(self):
        p = 101
        B = BohrSet(PrimeGroup(p), {1}, Fraction(1, 5))
        xi0 = 21
        # small quadratic perturbation: phi = xi0 n / p + alpha n^2 / p
        table = [Fraction((xi0 * n + n * n) % p, p) for n in range(p)]
        phi = LocalPhase(B, "linear", [table])
        # second differences are 2 h1 h2 / p; calibrate A from the domain
        A = 0.0
        for h1 in range(p):
            if h1 not in B or h1 == 0:
                continue
            for h2 in range(p):
                if h2 == 0 or h2 not in B or (h1 + h2) % p not in B:
                    continue
                d = float(min(Fraction(2 * h1 * h2 % p, p), 1 - Fraction(2 * h1 * h2 % p, p)))
                denom = float(
                    Fraction(min(h1, p - h1), p)
                    * Fraction(min(h2, p - h2), p)
                    / (B.rho * B.rho)
                )
                A = max(A, d / denom)
        xi, defect = linearize_local(phi, A=A)
        exh_best = min(linearize_defect(phi, x, A) for x in range(p))
        assert defect == pytest.approx(exh_best, abs=1e-9)
        assert defect <= 2.0  # calibration band

    def test_violation_detected(self):
        p = 101
        B = BohrSet(PrimeGroup(p), {1}, Fraction(1, 4))
        table = [Fraction((n * n * n) % p, p) for n in range(p)]
        phi = LocalPhase(B, "linear", [table])
        with pytest.raises(AlmostLinearityViolated):
            linearize_local(phi, A=1e-6)

    def test_fft_matches_exhaustive(self):
        p = 101
        B = BohrSet(PrimeGroup(p), {1}, Fraction(1, 4))
        phi = LocalPhase.from_polynomial(B, [33, 2])
        xi_e, d_e = linearize_local(phi, A=0.0, method="exhaustive")
        xi_f, d_f = linearize_local(phi, A=0.0, method="fft")
        assert d_f == pytest.approx(d_e, abs=1e-9)
        assert xi_f == xi_e == 33


class TestRationalizeBilinear:
    def make_domains(self, p=31):
        g = PrimeGroup(p)
        return BohrSet(g, {1}, Fraction(1, 4)), BohrSet(g, {1}, Fraction(1, 4))

    def test_zero_phase(self):
        Bn, Bm = self.make_domains()
        phi = BilinearPhase.from_coefficient(Bn, Bm, 0)
        assert rationalize_bilinear(phi, None, None, 0.5, 4, 1.0) == 1

    def test_halved_phase(self):
        p = 31
        Bn, Bm = self.make_domains(p)
        # theta with k=1: theta(n, m) = n m / p scaled to be flat at k=1
        inv2 = pow(2, -1, p)
        phi = BilinearPhase.from_coefficient(Bn, Bm, inv2)
        theta = BilinearPhase.from_coefficient(Bn, Bm, 1)
        t1 = rationalize_bilinear(theta, None, None, 1e-6, 4, 5.0)
        k = rationalize_bilinear(phi, None, None, 1e-6, 4, 5.0)
        assert t1 == 1
        assert k <= 2

    def test_small_sum_rejected(self):
        p = 31
        Bn, Bm = self.make_domains(p)
        phi = BilinearPhase.from_coefficient(Bn, Bm, 11)
        with pytest.raises(ExponentialSumTooSmall):
            rationalize_bilinear(phi, None, None, 0.99, 4, 1.0)

    def test_no_small_multiple(self):
        p = 31
        Bn, Bm = self.make_domains(p)
        phi = BilinearPhase.from_coefficient(Bn, Bm, 11)
        with pytest.raises(NoSmallMultiple):
            rationalize_bilinear(phi, None, None, 1e-9, 2, 1e-6)


def quadratic_fn(p, alpha, beta=0):
    n = np.arange(p)
    return GroupFunction(
        PrimeGroup(p), np.exp(2j * np.pi * ((alpha * n * n + beta * n) % p) / p)
    )


class TestDerivativeFrequencyMap:
    RHO = (Fraction(3, 10), Fraction(1, 40), Fraction(1, 25))

    def test_quadratic_recovers_derivative_frequencies(self):
        p = 101
        alpha = 7
        fmap = derivative_frequency_map(
            quadratic_fn(p, alpha), {1}, *self.RHO, eta=0.2
        )
        assert fmap.omega
        for n2 in fmap.omega:
            assert fmap.xi[n2] == (2 * alpha * n2) % p
            assert fmap.correlations[n2] >= 0.2 / 8
        assert fmap.omega_prob >= 0.2 / 4

    def test_linear_phase_gives_zero_frequency(self):
        p = 101
        fmap = derivative_frequency_map(phase_fn(p, 5), {1}, *self.RHO, eta=0.2)
        for n2 in fmap.omega:
            assert fmap.xi[n2] == 0

    def test_off_omega_is_zero(self):
        p = 101
        fmap = derivative_frequency_map(quadratic_fn(p, 3), {1}, *self.RHO, eta=0.2)
        outside = next(a for a in range(p) if a not in set(fmap.omega))
        assert fmap.frequency(outside) == 0

    def test_random_low_u3_rejected(self):
        p = 101
        rng = np.random.default_rng(6)
        f = GroupFunction(PrimeGroup(p), rng.choice([-1.0, 1.0], p))
        with pytest.raises(InsufficientU3):
            derivative_frequency_map(f, {1}, *self.RHO, eta=0.9)

    def test_beta_term_cancels(self):
        p = 101
        a = derivative_frequency_map(quadratic_fn(p, 5, 0), {1}, *self.RHO, eta=0.2)
        b = derivative_frequency_map(quadratic_fn(p, 5, 9), {1}, *self.RHO, eta=0.2)
        assert a.xi == b.xi


class TestQuadrupleAudit:
    RHO = (Fraction(3, 10), Fraction(1, 40), Fraction(1, 25))

    def test_quadratic_has_no_bad_quadruples(self):
        p = 101
        fmap = derivative_frequency_map(quadratic_fn(p, 4), {1}, *self.RHO, eta=0.2)
        for threshold in [0.0, 1.0, 5.0]:
            audit = quadruple_audit(fmap, threshold, trials=4000, seed=1)
            assert audit.in_omega > 0
            assert audit.bad == 0

    def test_random_map_fails_strict_threshold(self):
        p = 101
        rng = random.Random(2)
        fmap = derivative_frequency_map(quadratic_fn(p, 4), {1}, *self.RHO, eta=0.2)
        scrambled = FrequencyMap(
            fmap.p,
            fmap.S,
            fmap.rho0,
            fmap.rho1,
            fmap.rho2,
            fmap.eta,
            fmap.omega,
            {n2: rng.randrange(p) for n2 in fmap.omega},
            fmap.correlations,
            fmap.omega_prob,
        )
        audit = quadruple_audit(scrambled, 0.5, trials=4000, seed=3)
        assert audit.in_omega > 0
        assert audit.bad_fraction > 0.5

    def test_monotone_in_threshold(self):
        p = 101
        fmap = derivative_frequency_map(quadratic_fn(p, 9), {1}, *self.RHO, eta=0.2)
        fracs = [
            quadruple_audit(fmap, t, trials=2000, seed=5).bad_fraction
            for t in [0.0, 2.0, 10.0, 1e9]
        ]
        assert all(a >= b for a, b in zip(fracs, fracs[1:]))
        assert fracs[-1] == 0

    def test_vacuous_threshold(self):
        p = 101
        fmap = derivative_frequency_map(quadratic_fn(p, 2), {1}, *self.RHO, eta=0.2)
        assert quadruple_audit(fmap, 1e12, trials=1000, seed=7).bad == 0
