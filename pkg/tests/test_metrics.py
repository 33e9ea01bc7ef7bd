import numpy as np
import pytest

from slrcov.datagen import BandedModelSpec, gen_banded_cov
from slrcov.metrics import (
    confusion_rates,
    fpr_tpr,
    frobenius_error,
    rate_fit,
    sparsity,
)
from tests.oracles import confusion_bruteforce


class TestSparsity:
    def test_identity(self):
        assert sparsity(np.eye(4)) == pytest.approx(0.25, abs=0)

    def test_zero_matrix(self):
        assert sparsity(np.zeros((5, 5))) == 0.0

    def test_banded_p100(self):
        assert sparsity(gen_banded_cov(BandedModelSpec(p=100))) == pytest.approx(0.1810, abs=0)

    def test_count_is_integer(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            p = int(rng.integers(2, 10))
            m = rng.standard_normal((p, p)) * (rng.random((p, p)) > 0.5)
            count = sparsity(m) * p * p
            assert count == pytest.approx(round(count), abs=1e-9)

    def test_tolerance_threshold_is_strict(self):
        m = np.array([[0.1, 0.0], [0.0, 0.2]])
        assert sparsity(m, zero_tol=0.1) == 0.25
        assert sparsity(m, zero_tol=0.05) == 0.5


class TestConfusionRates:
    def test_perfect_recovery(self):
        truth = np.array([[1.0, 0.0, 0.5], [0.0, 2.0, 0.0], [0.5, 0.0, 1.0]])
        fpr, tpr = fpr_tpr(truth, truth)
        assert fpr == 0.0
        assert tpr == 1.0

    def test_all_nonzero_estimate_flags_fpr(self):
        truth = np.diag([1.0, 2.0, 0.0, 0.0])
        estimate = np.ones((4, 4))
        rates = confusion_rates(truth, estimate)
        # every entry predicted nonzero: no predicted zeros exist
        assert rates.fpr == 0.0
        assert rates.fpr_defined is False
        assert rates.tpr == pytest.approx(2.0 / 16.0)
        assert rates.tpr_defined is True

    def test_all_zero_estimate_flags_tpr(self):
        truth = np.diag([1.0, 2.0])
        rates = confusion_rates(truth, np.zeros((2, 2)))
        assert rates.tpr == 0.0
        assert rates.tpr_defined is False
        assert rates.fpr == pytest.approx(2.0 / 4.0)

    def test_conventional_rates_use_true_denominators(self):
        truth = np.array([[1.0, 0.0], [0.0, 0.0]])
        estimate = np.array([[1.0, 1.0], [1.0, 0.0]])
        rates = confusion_rates(truth, estimate)
        assert rates.fpr_conventional == pytest.approx(2.0 / 3.0)
        assert rates.tpr_conventional == pytest.approx(1.0)
        # precision-style versions differ
        assert rates.fpr == 0.0
        assert rates.tpr == pytest.approx(1.0 / 3.0)

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            fpr_tpr(np.eye(2), np.eye(3))

    def test_matches_bruteforce_on_random_patterns(self):
        rng = np.random.default_rng(1)
        for _ in range(10_000):
            truth = (rng.random((5, 5)) > 0.5).astype(float)
            estimate = (rng.random((5, 5)) > 0.5).astype(float)
            rates = confusion_rates(truth, estimate)
            b_fpr, b_tpr, b_fpr_c, b_tpr_c = confusion_bruteforce(truth, estimate)
            assert rates.fpr == b_fpr
            assert rates.tpr == b_tpr
            assert rates.fpr_conventional == b_fpr_c
            assert rates.tpr_conventional == b_tpr_c


class TestFrobeniusError:
    def test_zero_for_equal_inputs(self):
        rng = np.random.default_rng(2)
        m = rng.standard_normal((4, 4))
        assert frobenius_error(m, m) == 0.0

    def test_identity_vs_zero(self):
        assert frobenius_error(np.zeros((3, 3)), np.eye(3)) == pytest.approx(np.sqrt(3.0))

    def test_single_entry_perturbation(self):
        rng = np.random.default_rng(3)
        m = rng.standard_normal((4, 4))
        perturbed = m.copy()
        perturbed[0, 0] += 0.1
        assert frobenius_error(m, perturbed) == pytest.approx(0.1, abs=1e-14)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            a, b, c = (rng.standard_normal((3, 3)) for _ in range(3))
            assert frobenius_error(a, c) <= (
                frobenius_error(a, b) + frobenius_error(b, c) + 1e-12
            )

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            frobenius_error(np.eye(2), np.eye(3))


class TestRateFit:
    def test_exact_power_law(self):
        fit = rate_fit([(100, 1.0), (400, 0.5), (1600, 0.25)])
        assert fit.slope == pytest.approx(-0.5, abs=1e-12)

    def test_constant_errors_give_zero_slope(self):
        fit = rate_fit([(10, 2.0), (20, 2.0), (40, 2.0)])
        assert fit.slope == pytest.approx(0.0, abs=1e-12)

    def test_rejects_duplicate_sample_sizes(self):
        with pytest.raises(ValueError, match="distinct"):
            rate_fit([(10, 1.0), (10, 0.9), (20, 0.8)])

    def test_rejects_too_few_points(self):
        with pytest.raises(ValueError, match="at least 3"):
            rate_fit([(10, 1.0), (20, 0.5)])

    def test_rejects_nonpositive_errors(self):
        with pytest.raises(ValueError, match="positive"):
            rate_fit([(10, 1.0), (20, 0.0), (40, 0.2)])

    def test_intercept_recovers_constant(self):
        points = [(n, 3.0 * n ** -0.5) for n in (50, 100, 200, 400)]
        fit = rate_fit(points)
        assert fit.slope == pytest.approx(-0.5, abs=1e-12)
        assert np.exp(fit.intercept) == pytest.approx(3.0, abs=1e-10)
