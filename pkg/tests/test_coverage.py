"""Monte Carlo coverage of the bounds and of the certified pipelines."""

import math

import numpy as np
import pytest

from src.bounds.concentration import BoundInputError, DiscreteSupport
from src.bounds.pacbayes import ConfidenceBudget
from src.hypotheses.training import TrainConfig
from src.simulation.coverage import (
    COVERAGE_COLUMNS,
    CoverageReport,
    coverage_kl,
    coverage_recursive,
    coverage_sampling,
    coverage_split_kl,
)

SUPPORT = DiscreteSupport((-0.5, 0.0, 0.5, 1.0))
WEIGHTS = (0.1, 0.4, 0.4, 0.1)
QUICK_TRAIN = TrainConfig(learning_rate=10.0, momentum=0.9, epochs=10)


class TestCoverageReport:

    def test_arithmetic(self):
        report = CoverageReport(harness='toy', trials=100, violations=7, target=0.95,
                                bounds=np.full(100, 0.3), truths=np.full(100, 0.1))
        assert report.coverage == pytest.approx(0.93)
        assert report.slack == pytest.approx(3.0 * math.sqrt(0.05 * 0.95 / 100))
        assert report.passed()
        assert report.mean_gap == pytest.approx(0.2)
        assert list(report.summary()) == COVERAGE_COLUMNS
        assert repr(report) == "CoverageReport(toy: coverage=0.9300, target=0.9500, violations=7/100)"

    def test_failing(self):
        report = CoverageReport(harness='toy', trials=1000, violations=200, target=0.95,
                                bounds=np.zeros(1000), truths=np.zeros(1000))
        assert not report.passed()


class TestSplitKlCoverage:

    def test_meets_target(self):
        report = coverage_split_kl(SUPPORT, WEIGHTS, n=100, delta=0.05, trials=500, seed=0)
        assert report.trials == 500
        assert report.target == 0.95
        assert report.truths[0] == pytest.approx(0.2)
        assert report.passed()
        assert report.mean_gap > 0.0

    def test_point_mass_always_covered(self):
        report = coverage_split_kl(SUPPORT, (0.0, 1.0, 0.0, 0.0), n=20, delta=0.05, trials=200, seed=1)
        assert report.violations == 0
        assert report.coverage == 1.0

    def test_loose_delta_small_sample(self):
        report = coverage_split_kl(SUPPORT, WEIGHTS, n=3, delta=0.5, trials=2000, seed=2)
        assert report.coverage >= 0.5

    def test_reproducible(self):
        a = coverage_split_kl(SUPPORT, WEIGHTS, n=50, delta=0.05, trials=100, seed=3)
        b = coverage_split_kl(SUPPORT, WEIGHTS, n=50, delta=0.05, trials=100, seed=3)
        np.testing.assert_array_equal(a.bounds, b.bounds)

    def test_weights_checked(self):
        with pytest.raises(BoundInputError):
            coverage_split_kl(SUPPORT, (0.5, 0.5), n=10, delta=0.05, trials=10)
        with pytest.raises(BoundInputError):
            coverage_split_kl(SUPPORT, (0.5, 0.5, 0.5, -0.5), n=10, delta=0.05, trials=10)

    @pytest.mark.slow
    def test_ten_thousand_trials(self):
        report = coverage_split_kl(SUPPORT, WEIGHTS, n=100, delta=0.05, trials=10000, seed=0)
        assert report.coverage >= 0.95 - 3.0 * math.sqrt(0.05 * 0.95 / 10000)


class TestKlAndSamplingCoverage:

    def test_kl(self):
        report = coverage_kl(0.1, 100, 0.05, trials=2000, seed=0)
        assert report.harness == 'kl'
        assert report.passed()

    def test_kl_degenerate_mean(self):
        assert coverage_kl(0.0, 30, 0.05, trials=100, seed=1).violations == 0

    def test_kl_invalid_p(self):
        with pytest.raises(BoundInputError):
            coverage_kl(1.5, 30, 0.05, trials=10)

    def test_sampling(self):
        report = coverage_sampling((0.0, 0.25, 1.0), (0.5, 0.3, 0.2), m=200, delta=0.05, trials=1000, seed=4)
        assert report.truths[0] == pytest.approx(0.275)
        assert report.passed()

    def test_sampling_values_checked(self):
        with pytest.raises(BoundInputError):
            coverage_sampling((0.0, 2.0), (0.5, 0.5), m=10, delta=0.05, trials=10)


class TestPipelineCoverage:

    def test_recursive(self):
        report = coverage_recursive(n=200, T=2, trials=10, seed=0, n_hypotheses=21, train_cfg=QUICK_TRAIN)
        assert report.harness == 'rpb'
        assert report.target == pytest.approx(0.975)
        assert report.passed()
        assert np.all(report.truths >= 0.1 - 1e-12)

    def test_uninformed(self):
        report = coverage_recursive(n=100, T=1, trials=5, seed=1, method='uninformed',
                                    n_hypotheses=21, train_cfg=QUICK_TRAIN)
        assert report.violations == 0

    def test_workers_do_not_change_results(self):
        kwargs = dict(n=64, T=2, trials=4, seed=5, n_hypotheses=11, train_cfg=QUICK_TRAIN)
        serial = coverage_recursive(workers=1, **kwargs)
        parallel = coverage_recursive(workers=2, **kwargs)
        np.testing.assert_array_equal(serial.bounds, parallel.bounds)
        np.testing.assert_array_equal(serial.truths, parallel.truths)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            coverage_recursive(n=10, T=1, trials=1, method='oracle')

    @pytest.mark.slow
    def test_recursive_thousand_trials(self):
        report = coverage_recursive(n=1000, T=4, budget=ConfidenceBudget.for_recursion(4), trials=1000, seed=0)
        assert report.passed()
