import math

import numpy as np
import pytest

from frachs.efgrid import (
    EFGrid,
    ProblemParams,
    Profile,
    SingularOperatorError,
    apply_multiplier,
    grid_radii,
    inner,
    invert_multiplier,
    kelvin_reflect,
    make_grid,
    profile_from_radial,
    radial_from_profile,
    weighted_integral,
)
from frachs.specfun import hardy_constant


class TestProblemParams:
    def test_derived_fields(self):
        p = ProblemParams(n=3, s=0.75, q=3.0)
        assert p.b == 3.0 / 3.0 - (3.0 - 1.5) / 2.0  # n/q - (n-2s)/2
        assert p.b * p.q < 2 * p.s
        assert abs(p.sphere_measure - 4.0 * math.pi) < 1e-14
        assert p.critical_exponent == 4.0

    def test_q_range_enforced(self):
        with pytest.raises(ValueError, match="2 < q < 2n"):
            ProblemParams(n=3, s=0.75, q=5.0)
        with pytest.raises(ValueError):
            ProblemParams(n=3, s=0.75, q=2.0)
        with pytest.raises(ValueError):
            ProblemParams(n=3, s=0.75, q=4.0)  # critical without the flag
        p = ProblemParams(n=3, s=0.75, q=4.0, allow_critical=True)
        assert abs(p.b) < 1e-15

    def test_lambda_range_enforced(self):
        hs = hardy_constant(3, 0.75)
        ProblemParams(n=3, s=0.75, q=3.0, lam=-0.9 * hs)
        with pytest.raises(ValueError, match="lambda"):
            ProblemParams(n=3, s=0.75, q=3.0, lam=-hs)

    def test_dimension_and_order(self):
        with pytest.raises(ValueError):
            ProblemParams(n=1, s=0.5, q=3.0)
        with pytest.raises(ValueError):
            ProblemParams(n=3, s=0.0, q=3.0)


class TestGrid:
    def test_spacing_and_frequencies(self):
        g = make_grid(30.0, 2048)
        assert g.spacing == 0.029296875
        assert g.freqs[0] == 0.0
        assert g.freqs[1] == pytest.approx(math.pi / 30.0, rel=1e-15)
        assert g.nodes[0] == -30.0
        assert g.nodes[g.N // 2] == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            make_grid(30.0, 100)  # not a power of two
        with pytest.raises(ValueError):
            make_grid(30.0, 32)  # too small
        with pytest.raises(ValueError):
            make_grid(4.0, 256)  # L too small

    def test_parseval(self, rng):
        g = make_grid(20.0, 256)
        f = rng.standard_normal(g.N)
        lhs = (2 * g.L / g.N) * np.sum(f**2)
        fhat = np.fft.fft(f)
        rhs = (2 * g.L / g.N**2) * np.sum(np.abs(fhat) ** 2)
        assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


class TestProfile:
    def test_rejects_bad_values(self):
        g = make_grid(10.0, 64)
        with pytest.raises(ValueError):
            Profile(g, np.full(g.N, np.nan))
        with pytest.raises(ValueError):
            Profile(g, np.zeros(g.N - 1))

    def test_even_symmetrization(self, rng):
        g = make_grid(10.0, 128)
        f = Profile(g, rng.standard_normal(g.N)).symmetrized_even()
        assert f.is_even()


class TestMultiplier:
    def test_pure_mode_is_eigenfunction(self, params):
        g = make_grid(30.0, 512)
        tau1 = math.pi / g.L
        mode = Profile(g, np.cos(tau1 * g.nodes))
        out = apply_multiplier(g, 0, params, mode, shift=0.2)
        expected = (params.multiplier(g, 0, 0.2)[1]) * mode.values
        assert np.max(np.abs(out.values - expected)) <= 1e-12 * np.max(np.abs(expected))

    def test_linearity(self, params, rng):
        g = make_grid(30.0, 256)
        f = Profile(g, rng.standard_normal(g.N))
        h = Profile(g, rng.standard_normal(g.N))
        both = apply_multiplier(g, 1, params, Profile(g, f.values + h.values))
        sep = apply_multiplier(g, 1, params, f).values + apply_multiplier(g, 1, params, h).values
        assert np.max(np.abs(both.values - sep)) <= 1e-12 * np.max(np.abs(sep))

    def test_self_adjoint(self, params, rng):
        g = make_grid(30.0, 256)
        f = Profile(g, rng.standard_normal(g.N))
        h = Profile(g, rng.standard_normal(g.N))
        left = inner(apply_multiplier(g, 0, params, f), h)
        right = inner(f, apply_multiplier(g, 0, params, h))
        assert abs(left - right) <= 1e-10 * max(abs(left), 1.0)

    def test_constant_profile_hits_hardy_direction(self, params):
        g = make_grid(30.0, 256)
        ones = Profile(g, np.ones(g.N))
        out = apply_multiplier(g, 0, params, ones)
        hs = hardy_constant(params.n, params.s)
        assert np.max(np.abs(out.values - hs)) <= 1e-12 * hs

    def test_quadratic_form_positive_above_minus_hardy(self, rng):
        hs = hardy_constant(3, 0.75)
        p = ProblemParams(n=3, s=0.75, q=3.0, lam=-0.9 * hs)
        g = make_grid(30.0, 256)
        for _ in range(20):
            f = Profile(g, rng.standard_normal(g.N))
            assert inner(apply_multiplier(g, 0, p, f, shift=p.lam), f) > 0.0

    def test_grid_mismatch_rejected(self, params):
        g1, g2 = make_grid(30.0, 128), make_grid(30.0, 256)
        f = Profile(g1, np.ones(g1.N))
        with pytest.raises(ValueError, match="EFGrid"):
            apply_multiplier(g2, 0, params, f)


class TestInvert:
    def test_round_trip(self, params, rng):
        g = make_grid(30.0, 256)
        rhs = Profile(g, rng.standard_normal(g.N))
        back = apply_multiplier(g, 0, params, invert_multiplier(g, 0, params, rhs))
        assert np.max(np.abs(back.values - rhs.values)) <= 1e-11 * np.max(np.abs(rhs.values))

    def test_zero_maps_to_zero(self, params):
        g = make_grid(30.0, 128)
        out = invert_multiplier(g, 0, params, Profile(g, np.zeros(g.N)))
        assert np.all(out.values == 0.0)

    def test_constant_rhs(self, params):
        g = make_grid(30.0, 128)
        out = invert_multiplier(g, 0, params, Profile(g, np.ones(g.N)), shift=0.5)
        expected = 1.0 / (params.multiplier(g, 0, 0.5)[0])
        assert np.max(np.abs(out.values - expected)) <= 1e-12 * abs(expected)

    def test_singular_shift_rejected(self, params):
        g = make_grid(30.0, 128)
        hs = hardy_constant(params.n, params.s)
        with pytest.raises(SingularOperatorError):
            invert_multiplier(g, 0, params, Profile(g, np.ones(g.N)), shift=-hs - 0.1)


class TestKelvin:
    def test_even_fixed_point(self, rng):
        g = make_grid(10.0, 128)
        f = Profile(g, rng.standard_normal(g.N)).symmetrized_even()
        assert np.array_equal(kelvin_reflect(f).values, f.values)

    def test_odd_negates(self, rng):
        g = make_grid(10.0, 128)
        raw = rng.standard_normal(g.N)
        reversed_raw = np.concatenate((raw[:1], raw[1:][::-1]))
        odd = Profile(g, raw - reversed_raw)
        assert np.max(np.abs(kelvin_reflect(odd).values + odd.values)) == 0.0

    def test_involution(self, rng):
        g = make_grid(10.0, 128)
        f = Profile(g, rng.standard_normal(g.N))
        assert np.array_equal(kelvin_reflect(kelvin_reflect(f)).values, f.values)

    def test_evenness_characterization(self, rng):
        g = make_grid(10.0, 128)
        f = Profile(g, rng.standard_normal(g.N))
        assert not np.array_equal(kelvin_reflect(f).values, f.values)
        sym = f.symmetrized_even()
        assert np.array_equal(kelvin_reflect(sym).values, sym.values)


class TestQuadrature:
    def test_zero(self, params):
        g = make_grid(30.0, 128)
        assert weighted_integral(Profile(g, np.zeros(g.N)), 2.0, params) == 0.0

    def test_constant(self, params):
        g = make_grid(30.0, 128)
        got = weighted_integral(Profile(g, np.ones(g.N)), 1.0, params)
        assert abs(got - params.sphere_measure * 2 * g.L) <= 1e-12 * got

    def test_gaussian_closed_form(self, params):
        g = make_grid(12.0, 1024)
        f = Profile(g, np.exp(-(g.nodes**2)))
        got = weighted_integral(f, 2.0, params)
        expected = params.sphere_measure * math.sqrt(math.pi / 2.0)
        assert abs(got - expected) <= 1e-10 * expected


class TestRadialTransform:
    def test_homogeneous_maps_to_constant(self, params):
        g = make_grid(12.0, 256)
        r = grid_radii(g)
        prof = profile_from_radial(params, g, r ** (-(params.n - 2 * params.s) / 2.0))
        assert np.max(np.abs(prof.values - 1.0)) <= 1e-12

    def test_critical_shape(self, params):
        g = make_grid(12.0, 256)
        r = grid_radii(g)
        m = (params.n - 2 * params.s) / 2.0
        prof = profile_from_radial(params, g, (1.0 + r**2) ** (-m))
        expected = (2.0 * np.cosh(g.nodes)) ** (-m)
        assert np.max(np.abs(prof.values - expected)) <= 1e-12 * np.max(expected)

    def test_round_trip(self, params, rng):
        g = make_grid(12.0, 256)
        samples = np.exp(rng.standard_normal(g.N))
        back = radial_from_profile(params, profile_from_radial(params, g, samples))
        assert np.max(np.abs(back - samples) / samples) <= 1e-12

    def test_sample_count_checked(self, params):
        g = make_grid(12.0, 256)
        with pytest.raises(ValueError):
            profile_from_radial(params, g, np.ones(g.N + 1))

    def test_dilation_becomes_translation(self, params):
        # grid chosen so ln 2 is exactly 32 spacings: translation by a whole
        # number of steps makes the correspondence exact; L ~ 44 keeps the
        # wrapped-around tail below the 1e-10 budget
        steps = 32
        N = 4096
        h = math.log(2.0) / steps
        g = EFGrid(L=N * h / 2.0, N=N)
        m = (params.n - 2 * params.s) / 2.0
        r = grid_radii(g)

        def z1(rr):
            return (1.0 + rr**2) ** (-m)

        base = profile_from_radial(params, g, z1(r))
        for t, shift in ((2.0, steps), (0.5, -steps)):
            scaled = profile_from_radial(params, g, t ** (-m) * z1(r / t))
            translated = np.roll(base.values, -shift)  # v(zeta + ln t)
            assert np.max(np.abs(scaled.values - translated)) <= 1e-10
