"""Tests for the PAC-Bayes bounds and confidence budgets."""

import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from src.bounds.concentration import BoundInputError, DiscreteSupport
from src.bounds.pacbayes import (
    BoundInputs,
    ConfidenceBudget,
    log_term,
    mcallester_relaxed,
    pb_kl_upper,
    pb_split_kl_upper,
    sampling_upper,
)


class TestPacBayesKL:

    def test_zero_loss_zero_kl(self):
        assert pb_kl_upper(BoundInputs(0.0, 0.0, 100), 0.05) == pytest.approx(0.058155, abs=1e-6)

    def test_mcallester_value(self):
        assert mcallester_relaxed(BoundInputs(0.0, 0.0, 100), 0.05) == pytest.approx(0.173082, abs=1e-6)

    def test_union_factor_loosens(self):
        b = BoundInputs(0.1, 2.0, 500)
        assert pb_kl_upper(b, 0.05, 4) > pb_kl_upper(b, 0.05, 1)

    def test_log_term(self):
        assert log_term(100, 0.05, 2) == pytest.approx(math.log(2 * 2 * 10 / 0.05))

    def test_infinite_kl_is_vacuous(self):
        assert pb_kl_upper(BoundInputs(0.1, math.inf, 100), 0.05) == 1.0

    @hyp_settings(max_examples=500, deadline=None)
    @given(
        st.floats(0.0, 1.0),
        st.floats(0.0, 50.0),
        st.integers(1, 100_000),
        st.floats(0.001, 0.5),
        st.integers(1, 10),
    )
    def test_pinsker_domination(self, emp, kl, n, delta, union_factor):
        b = BoundInputs(emp, kl, n)
        assert mcallester_relaxed(b, delta, union_factor) >= pb_kl_upper(b, delta, union_factor) - 1e-12

    def test_pinsker_domination_random_tuples(self):
        rng = np.random.default_rng(3)
        for _ in range(10_000):
            b = BoundInputs(float(rng.uniform()), float(rng.exponential(5.0)), int(rng.integers(1, 60_000)))
            delta = float(rng.uniform(0.001, 0.5))
            assert mcallester_relaxed(b, delta) >= pb_kl_upper(b, delta) - 1e-12

    def test_invalid_inputs(self):
        with pytest.raises(BoundInputError):
            BoundInputs(1.5, 0.0, 10)
        with pytest.raises(BoundInputError):
            BoundInputs(0.5, -1.0, 10)
        with pytest.raises(BoundInputError):
            pb_kl_upper(BoundInputs(0.5, 0.0, 10), 0.0)


class TestPacBayesSplitKL:

    def test_binary_support_matches_kl_bound(self):
        binary = DiscreteSupport((0.0, 1.0))
        expected = pb_kl_upper(BoundInputs(0.2, 1.5, 300), 0.05, 3)
        assert pb_split_kl_upper([0.2], binary, 1.5, 300, 0.05, 3) == pytest.approx(expected, abs=1e-15)

    def test_saturated_indicators(self):
        support = DiscreteSupport((-0.5, 0.0, 0.5, 1.0))
        assert pb_split_kl_upper([1.0, 1.0, 1.0], support, 3.0, 100, 0.05) == pytest.approx(1.0)

    def test_below_support_maximum(self):
        support = DiscreteSupport((-0.5, 0.0, 0.5, 1.0))
        bound = pb_split_kl_upper([0.6, 0.2, 0.05], support, 0.5, 5000, 0.025, 4)
        assert -0.5 < bound < 1.0

    def test_length_mismatch(self):
        support = DiscreteSupport((-0.5, 0.0, 0.5, 1.0))
        with pytest.raises(BoundInputError):
            pb_split_kl_upper([0.5], support, 0.0, 100, 0.05)


class TestSamplingBound:

    def test_zero_mean_value(self):
        assert sampling_upper(0.0, 1000, 0.01) == pytest.approx(0.004595, abs=1e-6)

    def test_dominates_sample_mean(self):
        assert sampling_upper(0.3, 200, 0.01) > 0.3


class TestConfidenceBudget:

    def test_for_recursion(self):
        budget = ConfidenceBudget.for_recursion(4)
        assert budget.union_factor == 4
        assert budget.sampling_parts == 10
        assert budget.delta == 0.025
        assert budget.delta_part == pytest.approx(0.001)
        assert budget.total_failure == pytest.approx(0.035)

    def test_rejects_overspent_budget(self):
        with pytest.raises(BoundInputError):
            ConfidenceBudget(delta=0.6, delta_prime=0.5)
        with pytest.raises(BoundInputError):
            ConfidenceBudget(union_factor=0)
