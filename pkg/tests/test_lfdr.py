"""Step-up rule, threshold form, FDR curve, and the asymptotic power evaluator."""

import numpy as np
import pytest

from ordershape.errors import InputError
from ordershape.lfdr import (
    asymptotic_power_gaussian,
    estimated_fdr_curve,
    lfdr_values,
    step_up,
    threshold_lambda,
)


class TestLfdrValues:
    def test_indistinguishable(self):
        out = lfdr_values(np.array([0.4]), np.array([0.5]), np.array([1.0]))
        np.testing.assert_allclose(out, [0.5])

    def test_arithmetic(self):
        out = lfdr_values(np.array([0.01]), np.array([0.8]), np.array([4.0]))
        np.testing.assert_allclose(out, [0.5])

    def test_pure_null_region(self):
        out = lfdr_values(np.array([0.99]), np.array([0.7]), np.array([0.0]))
        np.testing.assert_allclose(out, [1.0])

    def test_zero_both_densities_scores_one(self):
        out = lfdr_values(np.array([0.5]), np.array([1.0]), np.array([0.0]), f0=lambda x: np.zeros_like(x))
        np.testing.assert_allclose(out, [1.0])


class TestStepUp:
    def test_running_mean_example(self):
        dec = step_up(np.array([0.01, 0.05, 0.20]), 0.05)
        assert dec.k_hat == 2
        np.testing.assert_array_equal(dec.rejected, [True, True, False])
        assert dec.threshold == 0.05

    def test_none_rejected(self):
        dec = step_up(np.array([0.4, 0.9]), 0.05)
        assert dec.k_hat == 0 and not dec.rejected.any() and dec.threshold == 0.0

    def test_all_rejected(self):
        dec = step_up(np.array([0.01, 0.02, 0.03]), 0.05)
        assert dec.k_hat == 3 and dec.rejected.all()

    def test_rejected_mean_at_most_alpha(self):
        rng = np.random.default_rng(40)
        for _ in range(200):
            s = rng.uniform(size=int(rng.integers(1, 50)))
            dec = step_up(s, 0.1)
            if dec.k_hat:
                assert s[dec.rejected].mean() <= 0.1 + 1e-12

    def test_monotone_in_alpha(self):
        rng = np.random.default_rng(41)
        for _ in range(100):
            s = rng.uniform(size=30)
            lo = step_up(s, 0.05).rejected
            hi = step_up(s, 0.2).rejected
            assert (hi | ~lo).all()  # lo subset of hi

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(42)
        s = rng.uniform(size=40)
        perm = rng.permutation(40)
        np.testing.assert_array_equal(step_up(s, 0.1).rejected[perm], step_up(s[perm], 0.1).rejected)

    def test_validates_inputs(self):
        with pytest.raises(InputError):
            step_up(np.array([0.5, 1.2]), 0.05)
        with pytest.raises(InputError):
            step_up(np.array([0.5]), 0.0)


class TestThresholdLambda:
    def test_example(self):
        s = np.array([0.01, 0.05, 0.20])
        lam = threshold_lambda(s, 0.05)
        assert lam == 0.05
        np.testing.assert_array_equal(s <= lam, step_up(s, 0.05).rejected)

    def test_empty_rejection_convention(self):
        assert threshold_lambda(np.array([0.4, 0.9]), 0.05) == 0.0

    def test_identical_scores_at_alpha_reject_all(self):
        s = np.full(5, 0.05)
        lam = threshold_lambda(s, 0.05)
        assert lam == 0.05
        dec = step_up(s, 0.05)
        assert dec.k_hat == 5
        np.testing.assert_array_equal(s <= lam, dec.rejected)

    def test_equivalence_with_step_up_random(self):
        rng = np.random.default_rng(43)
        for _ in range(300):
            m = int(rng.integers(1, 200))
            s = rng.uniform(size=m)
            alpha = float(rng.uniform(0.01, 0.3))
            lam = threshold_lambda(s, alpha)
            np.testing.assert_array_equal(s <= lam, step_up(s, alpha).rejected)


class TestEstimatedFdrCurve:
    def test_single_score(self):
        np.testing.assert_allclose(estimated_fdr_curve(np.array([0.2])), [[0.2, 0.2]])

    def test_two_scores(self):
        np.testing.assert_allclose(
            estimated_fdr_curve(np.array([0.1, 0.3])), [[0.1, 0.1], [0.3, 0.2]]
        )

    def test_constant_scores(self):
        out = estimated_fdr_curve(np.full(4, 0.37))
        np.testing.assert_allclose(out, [[0.37, 0.37]])

    def test_sorted_by_lambda(self):
        rng = np.random.default_rng(44)
        out = estimated_fdr_curve(rng.uniform(size=50))
        assert (np.diff(out[:, 0]) > 0).all()


class TestAsymptoticPowerGaussian:
    def test_near_global_null_power_vanishes(self):
        power = asymptotic_power_gaussian(np.full(64, 1 - 1e-3), ks=2.5, alpha=0.05)
        assert power < 0.02

    def test_strong_separation_power_near_one(self):
        power = asymptotic_power_gaussian(np.full(64, 0.9), ks=6.0, alpha=0.05)
        assert power > 0.95

    def test_more_signal_more_power(self):
        weak = asymptotic_power_gaussian(np.full(64, 0.9), ks=2.0, alpha=0.05)
        strong = asymptotic_power_gaussian(np.full(64, 0.9), ks=3.0, alpha=0.05)
        assert 0.0 < weak < strong < 1.0

    def test_informative_prior_beats_flat_at_same_density(self):
        flat = np.full(512, 0.9)
        steep = np.repeat([0.801 - 1e-3, 0.999], 256)  # same null mass, concentrated signal
        p_flat = asymptotic_power_gaussian(flat, ks=2.5, alpha=0.05)
        p_steep = asymptotic_power_gaussian(steep, ks=2.5, alpha=0.05)
        assert p_steep > p_flat

    def test_validates(self):
        with pytest.raises(InputError):
            asymptotic_power_gaussian(np.array([0.5]), 2.5, 0.05)
        with pytest.raises(InputError):
            asymptotic_power_gaussian(np.array([0.5, 1.2]), 2.5, 0.05)
        with pytest.raises(InputError):
            asymptotic_power_gaussian(np.array([0.5, 0.6]), -1.0, 0.05)
