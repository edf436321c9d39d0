"""Extremal level-function oracle: recursion values, grids, and domination.

The reference implementation below recomputes the recursion directly in value
space (the production code works in log space with fast paths for structured
grids); agreement between the two on shared grids guards the kernels.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leveldecay import (
    ExponentialDecay,
    InputError,
    LemmaParams,
    LevelFunction,
    PowerLawDecay,
    VanishingLevel,
    bound_for,
    compute_L,
    compute_tau,
    default_level_grid,
    extremal_level_function,
    run_domination_suite,
    sample_lemma_params,
    verify_bound,
)
from leveldecay.oracle import LevelGrid


def reference_extremal(p, variant, levels):
    """Direct-space recursion: largest grid function obeying the hypothesis."""
    lev = np.asarray(levels, dtype=float)
    vals = np.empty(lev.shape[0])
    vals[0] = p.phi0
    for i in range(1, lev.shape[0]):
        rhs = p.c * (lev[i] - lev[:i]) ** -p.alpha * vals[:i] ** p.beta
        if variant == "kv":
            rhs = rhs * lev[:i] ** (p.theta * p.alpha)
        elif variant == "generalized":
            rhs = rhs * lev[i] ** (p.theta * p.alpha)
        vals[i] = min(vals[i - 1], rhs.min())
    return vals


def params(c=1.0, alpha=1.0, beta=1.0, theta=0.0, k0=1.0, phi0=1.0):
    return LemmaParams(c=c, alpha=alpha, beta=beta, theta=theta, k0=k0,
                       phi0=phi0)


class TestRecursionValues:
    def test_classical_hand_values(self):
        fn = extremal_level_function(params(), "classical",
                                     np.array([1.0, 2.0, 3.0, 4.0]))
        assert fn.values == pytest.approx([1.0, 1.0, 0.5, 1.0 / 3.0],
                                          rel=1e-12)

    def test_kv_level_factor_uses_lower_level(self):
        # RHS = c * k^(theta*alpha) * (h-k)^(-alpha) * phi(k)^beta
        fn = extremal_level_function(params(theta=0.5), "kv",
                                     np.array([1.0, 2.0, 4.0]))
        assert fn.values == pytest.approx([1.0, 1.0, 1.0 / 3.0], rel=1e-12)

    def test_generalized_level_factor_uses_upper_level(self):
        # RHS = c * h^(theta*alpha) * (h-k)^(-alpha) * phi(k)^beta
        fn = extremal_level_function(params(theta=0.5), "generalized",
                                     np.array([1.0, 2.0, 4.0]))
        assert fn.values == pytest.approx([1.0, 1.0, 2.0 / 3.0], rel=1e-12)

    def test_zero_phi0_propagates(self):
        grid = np.geomspace(1.0, 100.0, 50)
        for variant in ("classical", "kv", "generalized"):
            fn = extremal_level_function(params(phi0=0.0, theta=0.3), variant,
                                         grid)
            assert np.all(fn.values == 0.0)

    def test_single_level_grid(self):
        fn = extremal_level_function(params(phi0=3.0), "classical",
                                     np.array([1.0]))
        assert fn.values.tolist() == [3.0]

    def test_nonincreasing_and_bounded_by_phi0(self):
        grid = np.geomspace(0.5, 500.0, 300)
        for variant in ("classical", "kv", "generalized"):
            for beta in (0.5, 1.0, 2.0):
                p = params(c=2.0, alpha=1.5, beta=beta, theta=0.4, k0=0.5,
                           phi0=7.0)
                fn = extremal_level_function(p, variant, grid)
                assert np.all(np.diff(fn.values) <= 0.0)
                assert np.all(fn.values <= p.phi0)


class TestKernelAgreement:
    CASES = [
        params(c=2.0, alpha=1.5, beta=0.5, theta=0.4, k0=0.7, phi0=3.0),
        params(c=0.3, alpha=2.5, beta=1.0, theta=0.8, k0=2.0, phi0=1.0),
        params(c=5.0, alpha=1.0, beta=2.0, theta=0.2, k0=1.0, phi0=0.5),
    ]

    @staticmethod
    def assert_matches_reference(p, variant, grid):
        got = extremal_level_function(p, variant, grid).values
        want = reference_extremal(p, variant, np.asarray(grid, dtype=float))
        deep = (got < 1e-100) & (want < 1e-100)
        np.testing.assert_allclose(got[~deep], want[~deep], rtol=1e-8)

    @pytest.mark.parametrize("variant", ["classical", "kv", "generalized"])
    def test_geometric_grid_matches_reference(self, variant):
        for p in self.CASES:
            grid = np.geomspace(p.k0, 200.0 * p.k0, 400)
            self.assert_matches_reference(p, variant, grid)

    @pytest.mark.parametrize("variant", ["classical", "kv", "generalized"])
    def test_irregular_grid_matches_reference(self, variant):
        rng = np.random.default_rng(3)
        for p in self.CASES:
            gaps = rng.uniform(0.01, 1.0, size=299)
            grid = p.k0 + np.concatenate([[0.0], np.cumsum(gaps)])
            self.assert_matches_reference(p, variant, grid)

    @pytest.mark.parametrize("variant", ["classical", "kv", "generalized"])
    def test_collapse_adapted_grid_matches_reference(self, variant):
        p = params(c=1.5, alpha=2.0, beta=1.8, theta=0.3, phi0=2.0)
        grid = default_level_grid(p, variant, n_levels=300)
        assert grid.kind == "vanishing_adapted"
        self.assert_matches_reference(p, variant, grid)


class TestWorkedComparisons:
    def test_power_law_dominates_classical_oracle(self):
        p = params(c=1.0, alpha=1.0, beta=0.5, k0=1.0, phi0=1.0)
        fn = extremal_level_function(p, "classical",
                                     np.geomspace(1.0, 1e4, 4000))
        rep = verify_bound(fn, PowerLawDecay(coefficient=80.0, exponent=2.0))
        assert rep.max_violation <= 0.0

    def test_exponential_dominates_generalized_oracle(self):
        p = params(c=1.0, alpha=2.0, beta=1.0, theta=0.5, k0=1.0, phi0=1.0)
        assert compute_tau(p) == pytest.approx(2.0 * math.e, rel=1e-12)
        fn = extremal_level_function(p, "generalized",
                                     default_level_grid(p, "generalized"))
        bound = ExponentialDecay(tau=2.0 * math.e, theta=0.5, base_level=1.0,
                                 phi0=1.0)
        assert verify_bound(fn, bound).max_violation <= 0.0

    def test_supercritical_collapse_at_predicted_level(self):
        p = params(c=1.0, alpha=2.0, beta=2.0, theta=0.5, k0=1.0, phi0=1.0)
        top = 2.0 * compute_L(p)
        fn = extremal_level_function(p, "generalized",
                                     np.geomspace(1.0, top, 4000))
        assert fn.values[-1] < 1e-10

    def test_zero_oracle_never_violates(self):
        fn = LevelFunction(levels=np.array([1.0, 2.0, 3.0]),
                           values=np.zeros(3))
        for bound in (VanishingLevel(level=2.5),
                      PowerLawDecay(coefficient=1.0, exponent=1.0)):
            assert verify_bound(fn, bound).max_violation <= 0.0


class TestVerifyBound:
    def test_unconstrained_region_reports_neg_inf(self):
        fn = LevelFunction(levels=np.array([1.0, 2.0]),
                           values=np.array([1.0, 0.5]))
        rep = verify_bound(fn, VanishingLevel(level=5.0))
        assert rep.max_violation == -math.inf

    def test_violation_location(self):
        fn = LevelFunction(levels=np.array([1.0, 2.0, 3.0]),
                           values=np.array([1.0, 0.9, 0.2]))
        rep = verify_bound(fn, VanishingLevel(level=1.5))
        assert rep.max_violation == pytest.approx(0.9)
        assert rep.worst_level == 2.0

    def test_as_dict_keys(self):
        fn = LevelFunction(levels=np.array([1.0]), values=np.array([1.0]))
        d = verify_bound(fn, PowerLawDecay(coefficient=2.0, exponent=1.0)).as_dict()
        assert set(d) == {"max_violation", "worst_level"}


class TestGrids:
    def test_geometric_default_for_flat_regimes(self):
        for beta in (0.5, 1.0):
            grid = default_level_grid(params(beta=beta, k0=2.0), "generalized")
            assert grid.kind == "geometric"
            assert len(grid) == 4000
            levels = np.asarray(grid)
            assert levels[0] == 2.0
            assert levels[-1] == pytest.approx(2000.0, rel=1e-12)

    def test_adapted_grid_structure(self):
        p = params(beta=2.0)  # classical vanishing level 5.0
        grid = default_level_grid(p, "classical")
        levels = np.asarray(grid)
        assert grid.kind == "vanishing_adapted"
        assert grid.vanish == pytest.approx(5.0, rel=1e-12)
        assert len(grid) == 4000
        assert levels[0] == p.k0
        assert np.all(np.diff(levels) > 0.0)
        assert grid.vanish in levels  # the predicted level itself is a node
        assert levels[-1] == pytest.approx(4.0 * grid.vanish, rel=1e-12)
        # approach section crowds the vanishing level from below
        assert levels[grid.split - 1] < grid.vanish

    def test_small_grids_fall_back_to_geometric(self):
        grid = default_level_grid(params(beta=2.0), "classical", n_levels=32)
        assert grid.kind == "geometric" and len(grid) == 32

    def test_rejects_degenerate_size(self):
        with pytest.raises(InputError):
            default_level_grid(params(), "classical", n_levels=1)

    def test_level_grid_array_protocol(self):
        grid = default_level_grid(params(), "classical", n_levels=100)
        arr = np.asarray(grid)
        assert arr.shape == (100,) and len(grid) == 100


class TestValidation:
    def test_unknown_variant(self):
        with pytest.raises(InputError):
            extremal_level_function(params(), "other", np.array([1.0, 2.0]))

    def test_grid_must_start_at_k0(self):
        with pytest.raises(InputError):
            extremal_level_function(params(k0=1.0), "classical",
                                    np.array([2.0, 3.0]))

    def test_grid_must_ascend(self):
        with pytest.raises(InputError):
            extremal_level_function(params(), "classical",
                                    np.array([1.0, 3.0, 2.0]))

    def test_grid_must_be_1d_nonempty(self):
        with pytest.raises(InputError):
            extremal_level_function(params(), "classical", np.array([]))
        with pytest.raises(InputError):
            extremal_level_function(params(), "classical",
                                    np.array([[1.0, 2.0]]))

    def test_level_function_shape_mismatch(self):
        with pytest.raises(InputError):
            LevelFunction(levels=np.array([1.0, 2.0]),
                          values=np.array([1.0]))

    def test_sampler_rejects_unknown_regime(self):
        with pytest.raises(InputError):
            sample_lemma_params(np.random.default_rng(0), "mid")


FLOAT_KW = dict(allow_nan=False, allow_infinity=False)


class TestProperties:
    @given(st.floats(0.1, 10.0, **FLOAT_KW), st.floats(0.5, 4.0, **FLOAT_KW),
           st.sampled_from([0.5, 1.0, 2.0]), st.floats(0.0, 0.9, **FLOAT_KW),
           st.floats(0.5, 5.0, **FLOAT_KW), st.floats(0.0, 10.0, **FLOAT_KW))
    @settings(max_examples=25, deadline=None)
    def test_refinement_never_raises_oracle(self, c, alpha, beta, theta, k0,
                                            phi0):
        p = LemmaParams(c=c, alpha=alpha, beta=beta, theta=theta, k0=k0,
                        phi0=phi0)
        coarse = np.geomspace(k0, 100.0 * k0, 60)
        mids = np.sqrt(coarse[:-1] * coarse[1:])
        fine = np.sort(np.concatenate([coarse, mids]))
        v_coarse = extremal_level_function(p, "generalized", coarse).values
        v_fine = extremal_level_function(p, "generalized", fine).values
        shared = np.searchsorted(fine, coarse)
        assert np.all(v_fine[shared] <= v_coarse + 1e-9 * phi0 + 1e-300)

    @given(st.floats(0.1, 10.0, **FLOAT_KW), st.floats(0.5, 4.0, **FLOAT_KW),
           st.sampled_from([0.5, 1.0, 2.0]), st.floats(0.0, 0.9, **FLOAT_KW),
           st.floats(0.5, 5.0, **FLOAT_KW), st.floats(0.0, 10.0, **FLOAT_KW))
    @settings(max_examples=25, deadline=None)
    def test_kv_oracle_below_generalized(self, c, alpha, beta, theta, k0,
                                         phi0):
        # h^(theta*alpha) >= k^(theta*alpha) for h > k, so every kv constraint
        # is tighter; the kv extremal sits below the generalized one.
        p = LemmaParams(c=c, alpha=alpha, beta=beta, theta=theta, k0=k0,
                        phi0=phi0)
        grid = np.geomspace(k0, 200.0 * k0, 200)
        v_kv = extremal_level_function(p, "kv", grid).values
        v_gen = extremal_level_function(p, "generalized", grid).values
        assert np.all(v_kv <= v_gen * (1.0 + 1e-12) + 1e-300)


class TestDominationSuite:
    def test_small_sample_dominates(self):
        cases = run_domination_suite(n_per_regime=2, seed=0)
        assert len(cases) == 18
        for rec in cases:
            assert rec["max_violation"] <= rec["tolerance"], rec
            assert set(rec) >= {"variant", "regime", "index", "params",
                                "bound", "max_violation", "worst_level",
                                "tolerance"}
            if rec["bound"]["kind"] == "vanishing":
                assert "collapse_value" in rec
