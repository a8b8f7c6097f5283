import math

import numpy as np
import pytest

from roskit import basedist as bd
from roskit import cpoisson as cp
from roskit.errors import DomainError, UnsupportedMethodError

RAD = bd.condition_nonzero(bd.rademacher())
UNIF = bd.condition_nonzero(bd.uniform(1.0))
GAUSS = bd.condition_nonzero(bd.gaussian())
ATOMS = bd.condition_nonzero(bd.symmetric_atoms([(0.7, 0.4), (1.3, 0.6)]))


class TestSeries:
    def test_unit_intensity_random_signs(self):
        # E S_k^4 = 3k^2 - 2k for the sign walk; Poisson(1) has E xi = 1,
        # E xi^2 = 2, so the series sums to 3*2 - 2*1 = 4
        res = cp.cp_abs_moment(cp.CompoundPoissonSpec(1.0, RAD), 4.0)
        assert res.value == pytest.approx(4.0, abs=1e-9)
        assert res.error_bound <= 1e-8

    def test_zero_intensity(self):
        assert cp.cp_abs_moment(cp.CompoundPoissonSpec(0.0, RAD), 4.0).value == 0.0

    def test_uniform_jumps_cumulant_value(self):
        # lam m4 + 3 lam^2 m2^2 = 1.8/5 + 3 (1.8/3)^2 = 1.44
        res = cp.cp_abs_moment(cp.CompoundPoissonSpec(1.8, UNIF), 4.0)
        assert res.value == pytest.approx(1.44, rel=1e-7)

    def test_truncation_refinement(self):
        # recomputing at tol/10 moves the value by less than tol
        spec = cp.CompoundPoissonSpec(2.5, UNIF)
        for tol in (1e-5, 1e-7):
            a = cp.cp_abs_moment(spec, 5.0, tol=tol).value
            b = cp.cp_abs_moment(spec, 5.0, tol=tol / 10.0).value
            assert abs(a - b) < tol

    @pytest.mark.parametrize("lam", [0.5, 1.0, 1.8, 3.0])
    @pytest.mark.parametrize("p", [4, 6])
    @pytest.mark.parametrize("jump", [RAD, UNIF, GAUSS, ATOMS])
    def test_series_matches_cumulants(self, lam, p, jump):
        spec = cp.CompoundPoissonSpec(lam, jump)
        series = cp.cp_abs_moment(spec, float(p), tol=1e-9)
        oracle = cp.cp_even_moment_cumulant(spec, p)
        assert abs(series.value - oracle) <= max(series.error_bound, 1e-9 * oracle)

    def test_large_intensity_log_space(self):
        # lam^k / k! must be assembled in log space for large lam
        spec = cp.CompoundPoissonSpec(100.0, RAD)
        series = cp.cp_abs_moment(spec, 4.0, tol=1e-6)
        oracle = cp.cp_even_moment_cumulant(spec, 4)  # 100 + 3*100^2
        assert oracle == 30100.0
        assert abs(series.value - oracle) <= max(series.error_bound, 1e-8 * oracle)

    def test_monotone_in_intensity(self):
        vals = [
            cp.cp_abs_moment(cp.CompoundPoissonSpec(lam, RAD), 4.5).value
            for lam in (0.2, 0.5, 1.0, 2.0, 4.0)
        ]
        assert vals == sorted(vals)

    def test_domain(self):
        with pytest.raises(DomainError):
            cp.cp_abs_moment(cp.CompoundPoissonSpec(1.0, RAD), 2.0)
        with pytest.raises(DomainError):
            cp.CompoundPoissonSpec(-1.0, RAD)


class TestCumulantOracle:
    def test_rademacher_values(self):
        assert cp.cp_even_moment_cumulant(cp.CompoundPoissonSpec(1.0, RAD), 4) == 4.0
        assert cp.cp_even_moment_cumulant(cp.CompoundPoissonSpec(2.0, RAD), 4) == 14.0

    def test_uniform_value(self):
        got = cp.cp_even_moment_cumulant(cp.CompoundPoissonSpec(1.8, UNIF), 4)
        assert got == pytest.approx(1.44, rel=1e-14)

    def test_sixth_moment_formula(self):
        # kappa_r = lam m_r; for the sign walk at lam=1: 1 + 15 + 15 = 31
        got = cp.cp_even_moment_cumulant(cp.CompoundPoissonSpec(1.0, RAD), 6)
        assert got == pytest.approx(31.0, rel=1e-14)

    def test_unsupported_order(self):
        with pytest.raises(UnsupportedMethodError):
            cp.cp_even_moment_cumulant(cp.CompoundPoissonSpec(1.0, RAD), 5)


class TestSampling:
    def test_zero_intensity_all_zero(self):
        draws = cp.cp_sample(cp.CompoundPoissonSpec(0.0, RAD), np.random.default_rng(1), 50)
        assert np.all(draws == 0.0)

    def test_empirical_moments(self):
        rng = np.random.default_rng(99)
        draws = cp.cp_sample(cp.CompoundPoissonSpec(1.0, RAD), rng, 1_000_000)
        for power, want in ((2, 1.0), (4, 4.0)):
            obs = draws**power
            se = obs.std(ddof=1) / math.sqrt(obs.size)
            assert abs(obs.mean() - want) <= 3.0 * se

    def test_deterministic(self):
        spec = cp.CompoundPoissonSpec(1.3, UNIF)
        a = cp.cp_sample(spec, np.random.default_rng(7), 1000)
        b = cp.cp_sample(spec, np.random.default_rng(7), 1000)
        assert np.array_equal(a, b)


class TestPoissonPowerMoment:
    @pytest.mark.parametrize("p,want", [(1.0, 1.0), (2.0, 2.0), (3.0, 5.0), (4.0, 15.0)])
    def test_touchard_values_at_unit_intensity(self, p, want):
        res = cp.poisson_power_moment(1.0, p, tol=1e-11)
        assert res.value == pytest.approx(want, abs=1e-10)

    def test_non_integer_power_brute_force(self):
        lam, p = 1.7, 2.6
        brute = sum(
            math.exp(-lam + k * math.log(lam) - math.lgamma(k + 1)) * k**p
            for k in range(1, 200)
        )
        res = cp.poisson_power_moment(lam, p, tol=1e-12)
        assert abs(res.value - brute) <= res.error_bound + 1e-12

    def test_zero_intensity(self):
        assert cp.poisson_power_moment(0.0, 3.0).value == 0.0
