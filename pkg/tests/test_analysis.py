"""Tests for distribution functions, exponent bookkeeping, and verdicts."""

import math

import numpy as np
import pytest

from leveldecay.analysis import (
    DistributionFunction,
    ExpIntegrabilityParams,
    ExponentTable,
    default_levels,
    distribution_function,
    energy_inequality_check,
    exponent_table,
    fit_power_exponent,
    grid_stability,
    levelset_recursion_fit,
    regime_verdict,
    series_integrability_check,
    weak_norm_estimate,
)
from leveldecay.errors import FitError, InputError, ParameterError
from leveldecay.lemmas import LemmaParams
from leveldecay.pde import (
    CoefficientSpec,
    GridField,
    SourceSpec,
    picard_solve,
    sample_source,
)


def const_field(n, value):
    return GridField(n, np.full((n, n, n), float(value)))


def power_distribution(p, levels):
    """|A_k| = k^(-p) clipped at total volume 1."""
    levels = np.asarray(levels, dtype=float)
    return DistributionFunction(levels, np.minimum(1.0, levels ** -p))


@pytest.fixture(scope="module")
def degenerate_solve():
    coeff = CoefficientSpec(alpha_low=1.0, beta_high=1.0, theta=0.5)
    src = SourceSpec(kind="radial_power", m=2.0)
    u, _, _ = picard_solve(coeff, src, 32)
    return coeff, src, u


@pytest.fixture(scope="module")
def radial_proxy():
    """|u|(x) = |x - c|^{-1} sampled at N=64 (radial_power with m = 3)."""
    return sample_source(SourceSpec(kind="radial_power", m=3.0), 64)


class TestDistributionFunction:
    def test_two_level_step_field(self):
        d = distribution_function(const_field(4, 0.5), np.array([0.25, 0.75]))
        assert d.measures.tolist() == [1.0, 0.0]

    def test_level_above_sup_is_zero(self):
        d = distribution_function(const_field(4, 0.5), np.array([0.5]))
        assert d.measures.tolist() == [0.0]  # strict inequality |u| > k

    def test_nonincreasing(self):
        rng = np.random.default_rng(3)
        fld = GridField(8, rng.exponential(size=(8, 8, 8)))
        d = distribution_function(fld, default_levels(fld))
        assert np.all(np.diff(d.measures) <= 0.0)

    def test_radial_proxy_matches_analytic(self, radial_proxy):
        levels = np.linspace(2.0, 8.0, 13)
        d = distribution_function(radial_proxy, levels)
        analytic = (4.0 * math.pi / 3.0) * levels ** -3.0
        rel = np.abs(d.measures - analytic) / analytic
        assert np.max(rel) < 0.10

    def test_scaling_equivariance(self):
        rng = np.random.default_rng(9)
        vals = rng.exponential(size=(6, 6, 6))
        fld = GridField(6, vals)
        scaled = GridField(6, 2.0 * vals)
        levels = np.array([0.5, 1.0, 2.0, 4.0])
        d_scaled = distribution_function(scaled, levels)
        d_orig = distribution_function(fld, levels / 2.0)
        assert np.array_equal(d_scaled.measures, d_orig.measures)

    def test_default_levels_span(self):
        fld = const_field(4, 10.0)
        levels = default_levels(fld)
        assert len(levels) == 64
        assert levels[0] == pytest.approx(0.1) and levels[-1] == pytest.approx(10.0)
        assert default_levels(const_field(4, 0.0)).tolist() == [1.0]

    @pytest.mark.parametrize("levels,measures", [
        ([1.0, 1.0], [0.5, 0.5]),          # not strictly ascending
        ([0.0, 1.0], [0.5, 0.5]),          # nonpositive level
        ([1.0, 2.0], [0.25, 0.5]),         # increasing measures
        ([1.0, 2.0], [1.5, 0.5]),          # exceeds domain volume
        ([1.0, 2.0], [-0.1, -0.2]),        # negative measure
        ([1.0, 2.0], [0.5]),               # length mismatch
    ])
    def test_validation(self, levels, measures):
        with pytest.raises(InputError):
            DistributionFunction(np.asarray(levels, float),
                                 np.asarray(measures, float))

    def test_as_dict_and_csv(self, tmp_path):
        d = power_distribution(2.0, [1.0, 2.0, 4.0])
        out = d.as_dict()
        assert out["levels"] == [1.0, 2.0, 4.0]
        assert out["measures"] == [1.0, 0.25, 0.0625]
        path = tmp_path / "dist.csv"
        d.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "level,measure"
        assert len(lines) == 4 and lines[1] == "1.0,1.0"


class TestWeakNormEstimate:
    def test_exact_power_tail(self):
        d = power_distribution(2.5, np.geomspace(1.0, 100.0, 40))
        assert weak_norm_estimate(d, 2.5) == pytest.approx(1.0, rel=1e-12)

    def test_zero_distribution(self):
        d = DistributionFunction(np.array([1.0, 2.0]), np.array([0.0, 0.0]))
        assert weak_norm_estimate(d, 3.0) == 0.0

    def test_monotone_in_measures(self):
        levels = np.geomspace(1.0, 10.0, 10)
        lo = DistributionFunction(levels, np.full(10, 0.25))
        hi = DistributionFunction(levels, np.full(10, 0.5))
        assert weak_norm_estimate(lo, 2.0) <= weak_norm_estimate(hi, 2.0)

    def test_positive_exponent_required(self):
        d = power_distribution(1.0, [1.0, 2.0])
        with pytest.raises(ParameterError):
            weak_norm_estimate(d, 0.0)


class TestFitPowerExponent:
    @pytest.mark.parametrize("p", [1.0, 2.0, 3.0, 4.875])
    def test_exact_power_law(self, p):
        d = power_distribution(p, np.geomspace(1.5, 50.0, 24))
        slope, r2 = fit_power_exponent(d, 1.0, 100.0)
        assert abs(slope + p) < 1e-10
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_scale_invariance_of_slope(self):
        levels = np.geomspace(2.0, 64.0, 12)
        meas = 0.37 * levels ** -2.0
        d1 = DistributionFunction(levels, meas)
        d2 = DistributionFunction(levels, 0.001 * meas)
        s1, _ = fit_power_exponent(d1, 1.0, 100.0)
        s2, _ = fit_power_exponent(d2, 1.0, 100.0)
        assert s1 == pytest.approx(s2, abs=1e-12)

    def test_radial_proxy_slope(self, radial_proxy):
        d = distribution_function(radial_proxy, np.geomspace(2.0, 8.0, 16))
        slope, _ = fit_power_exponent(d, 2.0, 8.0)
        assert abs(slope + 3.0) < 0.3

    def test_too_few_points(self):
        d = power_distribution(2.0, [1.0, 2.0, 4.0])
        with pytest.raises(FitError):
            fit_power_exponent(d, 1.0, 10.0)

    def test_window_excludes_zero_measures(self):
        levels = np.geomspace(1.0, 32.0, 12)
        meas = np.where(levels > 8.0, 0.0, levels ** -2.0)
        d = DistributionFunction(levels, np.minimum(1.0, meas))
        slope, r2 = fit_power_exponent(d, 1.0, 32.0)
        assert abs(slope + 2.0) < 1e-10 and r2 == pytest.approx(1.0, abs=1e-12)


class TestEnergyInequality:
    def test_level_above_sup_vanishes(self):
        u = const_field(4, 1.0)
        f = const_field(4, 1.0)
        coeff = CoefficientSpec(alpha_low=1.0, beta_high=1.0, theta=0.5)
        res = energy_inequality_check(u, f, coeff, k=2.0, h=3.0)
        assert res == 0.0

    def test_zero_field(self):
        coeff = CoefficientSpec(alpha_low=1.0, beta_high=1.0, theta=0.0)
        res = energy_inequality_check(const_field(4, 0.0), const_field(4, 1.0),
                                      coeff, k=1.0, h=2.0)
        assert res == 0.0

    def test_converged_solution_satisfies_inequality(self, degenerate_solve):
        coeff, src, u = degenerate_solve
        f = sample_source(src, u.n_cells)
        sup = u.sup_norm()
        rng = np.random.default_rng(1)
        for _ in range(20):
            k = float(rng.uniform(0.05, 0.5)) * sup
            h = k * float(rng.uniform(1.5, 3.0))
            residual = energy_inequality_check(u, f, coeff, k, h)
            rhs = residual + _lhs_value(u, f, coeff, k, h)
            assert residual >= -0.05 * abs(rhs)

    def test_ordering_required(self):
        coeff = CoefficientSpec(alpha_low=1.0, beta_high=1.0, theta=0.0)
        with pytest.raises(ParameterError):
            energy_inequality_check(const_field(4, 1.0), const_field(4, 1.0),
                                    coeff, k=2.0, h=2.0)
        with pytest.raises(ParameterError):
            energy_inequality_check(const_field(4, 1.0), const_field(4, 1.0),
                                    coeff, k=0.0, h=1.0)


def _lhs_value(u, f, coeff, k, h):
    """Recover the LHS by subtracting the residual from the RHS term."""
    from leveldecay.pde import excess, truncate

    g = excess(u.values, k)
    rhs = float(np.sum(f.values * truncate(g, h - k)) * u.spacing ** 3)
    residual = energy_inequality_check(u, f, coeff, k, h)
    return rhs - residual


class TestExponentTable:
    def test_bounded_regime(self):
        x = exponent_table(2.0, 0.5)
        assert x.regime == "bounded"
        assert x.two_star == 6.0
        assert x.two_star_prime == pytest.approx(1.2)
        assert x.m_prime == 2.0
        assert x.m_double_star is None
        assert x.recursion_alpha == 3.0

    def test_exponential_boundary(self):
        x = exponent_table(1.5, 0.3)
        assert x.regime == "exponential"
        assert x.recursion_beta == pytest.approx(1.0)
        assert x.recursion_theta == 0.3

    def test_weak_power_values(self):
        x = exponent_table(1.3, 0.5)
        assert x.regime == "weak_power"
        assert x.m_double_star == pytest.approx(9.75)
        assert x.predicted_exponent == pytest.approx(4.875)
        assert x.recursion_beta == pytest.approx(6.0 / (2.0 * 1.3 / 0.3))

    def test_entropy_boundary_goes_to_entropy_side(self):
        assert exponent_table(1.2, 0.0).regime == "entropy_weak_power"
        assert exponent_table(1.1, 0.0).regime == "entropy_weak_power"

    def test_theta_does_not_change_regime(self):
        for theta in (0.0, 0.5, 0.9):
            assert exponent_table(1.3, theta).regime == "weak_power"

    @pytest.mark.parametrize("bad", [
        dict(m=1.0, theta=0.0), dict(m=0.5, theta=0.0),
        dict(m=2.0, theta=1.0), dict(m=2.0, theta=-0.1),
        dict(m=2.0, theta=0.0, n=2),
    ])
    def test_validation(self, bad):
        with pytest.raises(ParameterError):
            exponent_table(**bad)

    def test_as_dict_round_trip_keys(self):
        out = exponent_table(1.3, 0.5).as_dict()
        for key in ("n", "m", "theta", "two_star", "two_star_prime",
                    "m_prime", "m_double_star", "regime",
                    "predicted_exponent", "recursion_alpha",
                    "recursion_beta", "recursion_theta"):
            assert key in out


class TestLevelsetRecursionFit:
    def test_exponential_tail_is_finite(self):
        levels = np.arange(1.0, 11.0)
        d = DistributionFunction(levels, np.exp(-levels) / math.e ** -1)
        c = levelset_recursion_fit(d, exponent_table(1.3, 0.5))
        assert math.isfinite(c) and c > 0.0

    def test_vanishing_tail_gives_zero(self):
        levels = np.array([1.0, 2.0, 4.0])
        d = DistributionFunction(levels, np.array([0.5, 0.0, 0.0]))
        assert levelset_recursion_fit(d, exponent_table(1.3, 0.5)) == 0.0

    def test_no_admissible_pairs(self):
        d = DistributionFunction(np.array([1.0, 1.2]), np.array([0.5, 0.4]))
        with pytest.raises(FitError):
            levelset_recursion_fit(d, exponent_table(1.3, 0.5))


class TestExpIntegrabilityParams:
    @pytest.mark.parametrize("tau,theta", [
        (1.0, 0.0), (2.0 * math.e, 0.5), (0.3, 0.9), (17.0, 0.25),
    ])
    def test_lambda_identity(self, tau, theta):
        pars = ExpIntegrabilityParams(tau=tau, theta=theta)
        assert abs(2.0 ** (2.0 - theta) * pars.lam * tau ** (1.0 - theta)
                   - 1.0) < 1e-12

    def test_validation(self):
        with pytest.raises(ParameterError):
            ExpIntegrabilityParams(tau=0.0, theta=0.5)
        with pytest.raises(ParameterError):
            ExpIntegrabilityParams(tau=1.0, theta=1.0)


class TestSeriesIntegrability:
    def test_basel_series(self):
        n = 2_000_000
        levels = np.arange(1.0, n + 1.0)
        d = DistributionFunction(levels, 1.0 / levels ** 2)
        total, converged = series_integrability_check(d, 1.0)
        assert converged
        assert abs(total - math.pi ** 2 / 6.0) < 1e-5

    def test_harmonic_series_diverges(self):
        levels = np.arange(1.0, 1001.0)
        d = DistributionFunction(levels, 1.0 / levels)
        _, converged = series_integrability_check(d, 1.0)
        assert not converged

    def test_compactly_supported_converges(self):
        d = DistributionFunction(np.array([1.0, 2.0, 3.0]),
                                 np.array([0.5, 0.25, 0.0]))
        total, converged = series_integrability_check(d, 1.0)
        assert converged and total == 0.75

    def test_rate_weight(self):
        d = DistributionFunction(np.array([1.0, 2.0, 3.0]),
                                 np.array([0.5, 0.25, 0.0]))
        total, _ = series_integrability_check(d, 2.0)
        assert total == 0.5 + 2.0 * 0.25

    def test_rate_domain(self):
        d = DistributionFunction(np.array([1.0]), np.array([0.0]))
        with pytest.raises(ParameterError):
            series_integrability_check(d, 0.5)


class TestGridStability:
    def test_exact_block_average_is_stable(self):
        rng = np.random.default_rng(11)
        fine_vals = rng.normal(size=(8, 8, 8))
        fine = GridField(8, fine_vals)
        coarse_vals = fine_vals.reshape(4, 2, 4, 2, 4, 2).mean(axis=(1, 3, 5))
        assert grid_stability(GridField(4, coarse_vals), fine) == 0.0

    def test_detects_deviation(self):
        fine = const_field(8, 1.0)
        coarse = const_field(4, 1.25)
        assert grid_stability(coarse, fine) == pytest.approx(0.25)

    def test_zero_fine_field(self):
        assert grid_stability(const_field(4, 0.0), const_field(8, 0.0)) == 0.0

    def test_divisibility_required(self):
        with pytest.raises(InputError):
            grid_stability(const_field(3, 1.0), const_field(8, 1.0))


class TestRegimeVerdict:
    def test_zero_field_all_regimes(self):
        u = const_field(8, 0.0)
        for m in (2.0, 1.5, 1.3, 1.1):
            rpt = regime_verdict(u, exponent_table(m, 0.5))
            assert rpt.passed, rpt.regime

    def test_bounded_with_fine_grid(self, degenerate_solve):
        coeff, src, u = degenerate_solve
        fine, _, _ = picard_solve(coeff, src, 64)
        rpt = regime_verdict(u, exponent_table(2.0, 0.5), u_fine=fine)
        assert rpt.regime == "bounded"
        assert rpt.passed
        assert rpt.verdicts["stability_rel_diff"] <= 0.05

    def test_exponential_regime_series(self, degenerate_solve):
        # reuse the bounded-m solution as a generic finite field
        _, _, u = degenerate_solve
        rpt = regime_verdict(u, exponent_table(1.5, 0.5))
        assert rpt.regime == "exponential"
        assert rpt.verdicts["series_converged"]
        assert abs(2.0 ** 1.5 * rpt.verdicts["lam"]
                   * rpt.verdicts["tau"] ** 0.5 - 1.0) < 1e-12

    def test_exponential_rejects_wrong_beta(self, degenerate_solve):
        _, _, u = degenerate_solve
        bad = LemmaParams(c=1.0, alpha=3.0, beta=2.0, theta=0.5, k0=1.0,
                          phi0=1.0)
        with pytest.raises(ParameterError):
            regime_verdict(u, exponent_table(1.5, 0.5), recursion_params=bad)

    def test_report_serialization_shape(self, degenerate_solve):
        _, _, u = degenerate_solve
        rpt = regime_verdict(u, exponent_table(2.0, 0.5))
        out = rpt.as_dict()
        assert set(out) == {"regime", "exponent_table", "verdicts",
                            "distribution_function", "passed"}
        assert isinstance(out["distribution_function"]["levels"], list)
