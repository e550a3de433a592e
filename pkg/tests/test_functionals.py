"""Conserved functionals, split identities, and the polynomial inequality."""

import math

import numpy as np
import pytest

from gmchlab import functionals as fl
from gmchlab.coefficients import coefficient_table
from gmchlab.grid import GridFunction, GridSpec, quadrature
from gmchlab.profiles import MollifierSpec, PeakonParams, mollified_peakon


SPEC = GridSpec(20.0, 4096)
SPEC_FINE = GridSpec(30.0, 8192)


def smooth_profile(seed: int, spec: GridSpec = SPEC_FINE, scale: float = 1.0) -> GridFunction:
    """Random decaying superposition of Gaussians, supported well inside."""
    r = np.random.default_rng(seed)
    u = np.zeros(spec.point_count)
    for _ in range(4):
        c = r.uniform(-6, 6)
        w = r.uniform(0.8, 2.5)
        amp = r.uniform(0.2, 1.0) * scale
        u += amp * np.exp(-(((spec.x - c) / w) ** 2))
    return GridFunction(spec, u)


def positive_momentum_profile(seed: int, spec: GridSpec = SPEC_FINE) -> GridFunction:
    """u built from a random nonnegative momentum density."""
    r = np.random.default_rng(seed)
    y = np.zeros(spec.point_count)
    for _ in range(3):
        c = r.uniform(-6, 6)
        w = r.uniform(0.3, 1.5)
        amp = r.uniform(0.1, 1.0)
        y += amp * np.exp(-(((spec.x - c) / w) ** 2))
    return GridFunction.from_momentum(spec, y)


class TestEnergy:
    def test_zero(self):
        assert fl.energy_E(GridFunction(SPEC, np.zeros(SPEC.point_count))) == 0.0

    def test_single_mode_closed_form(self):
        # sin(pi x / L): integral of sin^2 + (pi/L)^2 cos^2 = L + pi^2/L
        L = SPEC.half_length
        u = GridFunction(SPEC, np.sin(np.pi * SPEC.x / L))
        assert fl.energy_E(u) == pytest.approx(L + np.pi**2 / L, rel=1e-12)

    def test_sampled_peakon_band_limit(self):
        # kinked samples carry a spectral-derivative excess that decays like
        # 1/k_max; assert the closed form within that budget
        u = GridFunction(SPEC, np.exp(-np.abs(SPEC.x)))
        k_max = float(SPEC.wavenumbers[-1])
        assert abs(fl.energy_E(u) - 2.0) < 8 / (np.pi * k_max)


class TestHigherDensity:
    def test_zero(self):
        t = coefficient_table(2)
        assert fl.functional_F(GridFunction(SPEC, np.zeros(SPEC.point_count)), t) == 0.0

    def test_mollified_peakon_converges_to_closed_form(self):
        p = PeakonParams.from_amplitude(1, 1.0)
        t = coefficient_table(1)
        vals = []
        for w in (0.4, 0.2, 0.1):
            u0, _ = mollified_peakon(p, MollifierSpec(width=w, mass=2.0), SPEC)
            vals.append(fl.functional_F(u0, t))
        errs = [abs(v - 4 / 3) for v in vals]
        # the profile converges in H1 only like sqrt(width), so the density
        # converges slowly too; assert the measured monotone approach
        assert errs == sorted(errs, reverse=True)
        assert errs[-1] < errs[0] / 2

    def test_sampled_peakon_with_kink(self):
        # kink-limited quadrature: needs a fine grid for the 1e-3 target
        t = coefficient_table(1)
        spec = GridSpec(20.0, 2**15)
        u = GridFunction(spec, np.exp(-np.abs(spec.x)))
        assert fl.functional_F(u, t) == pytest.approx(4 / 3, abs=1e-3)


class TestHamiltonianRatio:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_F_is_2np1_times_H(self, n):
        # measured ratio F/H on distinct smooth profiles; the n = 1 case is
        # the hand-expanded identity int u (u^2-u_x^2) y = int (u^4 + 2u^2u_x^2 - u_x^4/3)
        t = coefficient_table(n)
        for seed in (1, 2, 3):
            u = smooth_profile(seed)
            F = fl.functional_F(u, t)
            H = fl.hamiltonian_H(u, t)
            assert F == pytest.approx(2 * (n + 1) * H, rel=1e-8)

    def test_hand_expansion_cubic(self):
        u = smooth_profile(7)
        du = u.du
        lhs = quadrature(u.spec, u.samples * (u.samples**2 - du**2) * u.y)
        rhs = quadrature(
            u.spec, u.samples**4 + 2 * u.samples**2 * du**2 - du**4 / 3
        )
        assert lhs == pytest.approx(rhs, rel=1e-10)


class TestCrestIdentityDistance:
    def test_zero_field(self):
        p = PeakonParams.from_amplitude(1, 1.0)
        u = GridFunction(SPEC, np.zeros(SPEC.point_count))
        assert fl.h1_distance_to_peakon(u, p, 0.0) == pytest.approx(
            math.sqrt(2.0), rel=1e-12
        )

    def test_sampled_peakon_self_distance_is_band_limited(self):
        # the kinked profile is not grid-representable; the self-distance
        # floor is sqrt of the spectral-derivative excess, not zero
        p = PeakonParams.from_amplitude(1, 1.0)
        u = GridFunction(SPEC, np.exp(-np.abs(SPEC.x)))
        d = fl.h1_distance_to_peakon(u, p, 0.0)
        k_max = float(SPEC.wavenumbers[-1])
        assert d <= math.sqrt(8 / (np.pi * k_max))

    def test_against_direct_quadrature_on_smoothed_profile(self):
        # direct-norm oracle: mollified peakon vs translated sampled peakon
        p = PeakonParams.from_amplitude(1, 1.0)
        u0, _ = mollified_peakon(p, MollifierSpec(width=0.1, mass=2.0), SPEC_FINE)
        xi = 1.0
        d_identity = fl.h1_distance_to_peakon(u0, p, xi)
        phi = np.exp(-np.abs(SPEC_FINE.x - xi))
        diff = GridFunction(SPEC_FINE, u0.samples - phi)
        dd = diff.du
        d_direct = math.sqrt(quadrature(SPEC_FINE, diff.samples**2 + dd**2))
        assert d_identity == pytest.approx(d_direct, abs=2e-3)

    def test_xi_near_edge_rejected(self):
        p = PeakonParams.from_amplitude(1, 1.0)
        u = GridFunction(SPEC, np.zeros(SPEC.point_count))
        with pytest.raises(ValueError):
            fl.h1_distance_to_peakon(u, p, SPEC.half_length - 1.0)


class TestMaxAndLocation:
    def test_sampled_peakon_crest(self):
        u = GridFunction(SPEC, np.exp(-np.abs(SPEC.x)))
        M, xi = fl.max_and_location(u)
        assert M == pytest.approx(1.0, abs=1e-6)
        assert abs(xi) <= SPEC.dx**2

    def test_translated_crest(self):
        # parabola refinement is O(dx^2) on smooth crests but only O(dx) on
        # a sampled kink; the translated peakon is the kinked case
        shift = 3.7
        u = GridFunction(SPEC, np.exp(-np.abs(SPEC.x - shift)))
        _, xi = fl.max_and_location(u)
        assert xi == pytest.approx(shift, abs=SPEC.dx)

    def test_smooth_gaussian_subgrid_accuracy(self):
        u = GridFunction(SPEC, np.exp(-((SPEC.x - 0.123456) ** 2)))
        M, xi = fl.max_and_location(u)
        assert xi == pytest.approx(0.123456, abs=SPEC.dx**2)
        assert M == pytest.approx(1.0, abs=1e-6)

    def test_tie_breaks_left(self):
        u = np.zeros(SPEC.point_count)
        i1 = np.argmin(np.abs(SPEC.x + 1.0))
        i2 = np.argmin(np.abs(SPEC.x - 1.0))
        u[i1] = u[i2] = 1.0
        _, xi = fl.max_and_location(GridFunction(SPEC, u))
        assert xi == pytest.approx(-1.0, abs=SPEC.dx)

    def test_constant_rejected(self):
        with pytest.raises(ValueError):
            fl.max_and_location(GridFunction(SPEC, np.ones(SPEC.point_count)))


class TestSplitFields:
    def test_peakon_annihilates_g(self):
        u = GridFunction(SPEC, np.exp(-np.abs(SPEC.x)))
        g = fl.g_function(u, 0.0)
        # spectral-derivative ringing decays like 1/(distance from the kink)
        interior = np.abs(SPEC.x) > 0.5
        assert np.max(np.abs(g.samples[interior])) < 1e-2

    def test_zero_maps_to_zero(self):
        t = coefficient_table(2)
        z = GridFunction(SPEC, np.zeros(SPEC.point_count))
        assert np.all(fl.g_function(z, 0.3).samples == 0)
        assert np.all(fl.h_function(z, 0.3, t).samples == 0)

    def test_cubic_h_matches_hand_formula(self):
        t = coefficient_table(1)
        u = smooth_profile(3, SPEC)
        du = u.du
        h = fl.h_function(u, 0.5, t).samples
        left = SPEC.x < 0.5
        expect = np.where(
            left,
            u.samples**2 - (2 / 3) * u.samples * du - du**2 / 3,
            u.samples**2 + (2 / 3) * u.samples * du - du**2 / 3,
        )
        assert np.allclose(h, expect, atol=1e-12)


class TestSplitIntegralIdentities:
    @pytest.mark.parametrize("seed,xi", [(1, 0.37), (2, -2.2), (3, 5.0), (4, 0.0)])
    def test_g_square(self, seed, xi):
        u = smooth_profile(seed)
        lhs = fl.g_square_integral(u, xi)
        rhs = fl.energy_E(u) - 2 * float(u.eval_at(xi)) ** 2
        assert lhs == pytest.approx(rhs, abs=1e-8)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    @pytest.mark.parametrize("seed,xi", [(1, 0.37), (2, -2.2), (5, 1.9)])
    def test_hg_square(self, n, seed, xi):
        t = coefficient_table(n)
        u = smooth_profile(seed)
        lhs = fl.hg_square_integral(u, xi, t)
        rhs = fl.functional_F(u, t) - float(t.two_minus_c1) / (n + 1) * float(
            u.eval_at(xi)
        ) ** (2 * n + 2)
        assert lhs == pytest.approx(rhs, rel=1e-6, abs=1e-12)


class TestPointwiseBound:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_positive_momentum_profiles(self, n):
        t = coefficient_table(n)
        worst = 0.0
        for seed in range(25):
            u = positive_momentum_profile(seed)
            M, xi = fl.max_and_location(u)
            margin = fl.check_pointwise_h_bound(u, xi, t)
            worst = min(worst, margin)
        assert worst >= -1e-10

    def test_constant_window_logic(self):
        # with u_x = 0 the bound margin is ((2-c_1)/2 - 1) u^(2n) >= 0
        t = coefficient_table(2)
        assert float(t.two_minus_c1) / 2 - 1 > 0

    def test_sign_violation_reported_separately(self):
        t = coefficient_table(1)
        u = GridFunction(SPEC, -np.exp(-SPEC.x**2))
        with pytest.raises(fl.SignConditionError):
            fl.check_pointwise_h_bound(u, 0.0, t)

    def test_zero_margin_for_zero_field(self):
        t = coefficient_table(1)
        z = GridFunction(SPEC, np.zeros(SPEC.point_count))
        assert fl.check_pointwise_h_bound(z, 0.0, t) == 0.0


class TestPolynomialInequality:
    def test_peakon_saturates_algebraically(self):
        # closed-form E, F, M: the left side cancels exactly, float at the end
        for n in (1, 2, 3, 5):
            t = coefficient_table(n)
            for a in (0.5, 1.0, 2.0):
                p = PeakonParams.from_amplitude(n, a)
                E = 2 * a**2
                F = a ** (2 * n + 2) * float(t.two_minus_c1) / (n + 1)
                lhs = fl.stability_lhs(E, F, a, t)
                assert abs(lhs) <= 1e-12 * max(1.0, F)

    def test_mollified_peakon(self):
        t = coefficient_table(1)
        p = PeakonParams.from_amplitude(1, 1.0)
        u0, _ = mollified_peakon(p, MollifierSpec(width=0.05, mass=2.0), SPEC)
        chk = fl.stability_inequality(u0, t)
        assert chk.lhs <= 1e-6

    def test_zero_field(self):
        t = coefficient_table(1)
        u = GridFunction(SPEC, np.exp(-SPEC.x**2) * 0 + 1e-300)
        E = fl.energy_E(u)
        assert fl.stability_lhs(E, 0.0, 1e-300, t) == pytest.approx(0.0, abs=1e-200)


class TestPeakDeviation:
    def test_exact_peakon_zero_gap(self):
        n, a = 2, 1.0
        t = coefficient_table(n)
        p = PeakonParams.from_amplitude(n, a)
        E = 2 * a**2
        F = a ** (2 * n + 2) * float(t.two_minus_c1) / (n + 1)
        dev = fl.peak_deviation_bound(E, F, a, p, t)
        assert dev.gap == pytest.approx(0.0, abs=1e-14)
        assert dev.sup_bound_ok

    def test_sup_bound_flag(self):
        t = coefficient_table(1)
        p = PeakonParams.from_amplitude(1, 1.0)
        dev = fl.peak_deviation_bound(2.0, 4 / 3, 1.5, p, t)
        assert not dev.sup_bound_ok  # M^2 = 2.25 > E/2 = 1

    def test_nonpositive_M_rejected(self):
        t = coefficient_table(1)
        p = PeakonParams.from_amplitude(1, 1.0)
        with pytest.raises(ValueError):
            fl.peak_deviation_bound(2.0, 4 / 3, 0.0, p, t)


class TestSupNormBound:
    @pytest.mark.parametrize("seed", range(8))
    def test_smooth_profiles(self, seed):
        u = smooth_profile(seed)
        assert fl.sup_norm_bound_margin(u) >= 0.0

    def test_peakon_sample(self):
        u = GridFunction(SPEC, 1.7 * np.exp(-np.abs(SPEC.x)))
        assert fl.sup_norm_bound_margin(u) >= 0.0
