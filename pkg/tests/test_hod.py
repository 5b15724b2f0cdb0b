#!/usr/bin/env python3
"""
Test per la baseline a differenze di ordine superiore.
"""

import math
import os
import sys

import numpy as np
import pytest

# Aggiungi directory parent al path
sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from modrec.recovery import (
    HodMethod,
    HodOptions,
    RecoveryRequest,
    anti_difference,
    choose_order,
    create_method,
    finite_difference,
    hod_recover,
)
from modrec.recovery.hod import difference_anchors, precondition_holds
from modrec.sampling.errors import InvalidArgumentError
from modrec.sampling.signals import compute_support_bound, fold_signal, sampling_interval_for


class TestDifferences:
    """finite_difference e anti_difference"""

    def test_first_and_second_order(self):
        x = [1.0, 4.0, 9.0, 16.0]
        assert list(finite_difference(x, 1)) == [3.0, 5.0, 7.0]
        assert list(finite_difference(x, 2)) == [2.0, 2.0]

    def test_linearity(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=20), rng.normal(size=20)
        lhs = finite_difference(2.0 * a - 3.0 * b, 3)
        rhs = 2.0 * finite_difference(a, 3) - 3.0 * finite_difference(b, 3)
        assert np.allclose(lhs, rhs)

    def test_sequence_too_short(self):
        with pytest.raises(InvalidArgumentError):
            finite_difference([1.0, 2.0], 2)
        with pytest.raises(InvalidArgumentError):
            finite_difference([1.0, 2.0, 3.0], 0)

    @pytest.mark.parametrize("order", [1, 2, 4])
    def test_anti_difference_inverts(self, order):
        x = np.random.default_rng(order).normal(size=25)
        restored = anti_difference(finite_difference(x, order), order, difference_anchors(x, order))
        assert np.allclose(restored, x, atol=1e-10)

    def test_anchor_count_checked(self):
        with pytest.raises(InvalidArgumentError):
            anti_difference([1.0, 2.0], 2, [0.0])


class TestChooseOrder:
    """Scelta automatica di K"""

    def test_high_oversampling(self):
        assert choose_order(sampling_interval_for(np.pi, 20.0), np.pi, 0.2) == (2, True)

    def test_unreachable_at_low_oversampling(self):
        assert choose_order(sampling_interval_for(np.pi, 4.0), np.pi, 0.025) == (12, False)

    def test_bound_below_threshold(self):
        assert choose_order(0.25, np.pi, 2.0) == (1, True)

    def test_order_grows_as_threshold_shrinks(self):
        interval = sampling_interval_for(np.pi, 20.0)
        k_large, _ = choose_order(interval, np.pi, 0.2)
        k_small, _ = choose_order(interval, np.pi, 0.001)
        assert k_small > k_large

    def test_max_order_cap(self):
        interval = sampling_interval_for(np.pi, 20.0)
        assert choose_order(interval, np.pi, 1e-30, max_order=3) == (3, False)


class TestHodRecover:
    """Recupero con differenze e integrazione su reticolo"""

    def test_no_folds_returns_input(self, gaussian):
        s = gaussian(0.15, 20.0, 400)
        folded = fold_signal(s, 0.2)
        assert np.array_equal(hod_recover(folded), s.samples)

    def test_exact_when_differences_are_small(self, folded_gaussian):
        signal, folded = folded_gaussian(3.0, 0.2, oversampling=20.0)
        assert compute_support_bound(signal, 0.2) > 100
        assert precondition_holds(signal.samples, 2, 0.2)
        estimate = hod_recover(folded)
        assert np.max(np.abs(estimate - signal.samples)) < 1e-9

    def test_known_anchor(self, folded_gaussian):
        signal, folded = folded_gaussian(3.0, 0.2, oversampling=20.0)
        estimate = hod_recover(folded, anchor=signal.samples[0])
        assert np.max(np.abs(estimate - signal.samples)) < 1e-9

    def test_fixed_order(self, folded_gaussian):
        signal, folded = folded_gaussian(3.0, 0.2, oversampling=20.0)
        estimate = hod_recover(folded, HodOptions(auto_order=False, order=3))
        assert np.max(np.abs(estimate - signal.samples)) < 1e-9

    def test_window_shorter_than_order(self, folded_gaussian):
        _, folded = folded_gaussian(0.1, 0.2, oversampling=20.0, half_width=1)
        with pytest.raises(InvalidArgumentError):
            hod_recover(folded, HodOptions(auto_order=False, order=5))


class TestHodMethod:
    """HOD nel registry dei metodi"""

    def test_converged_at_high_oversampling(self, folded_gaussian):
        signal, folded = folded_gaussian(3.0, 0.2, oversampling=20.0)
        method = create_method("hod", {})
        request = RecoveryRequest(
            folded=folded,
            n_lambda=compute_support_bound(signal, 0.2),
            truth=signal.samples,
        )
        outcome = method.recover(request)
        assert outcome.converged and outcome.order == 2
        assert np.max(np.abs(outcome.samples - signal.samples)) < 1e-9

    def test_flags_unreachable_order(self, folded_gaussian):
        signal, folded = folded_gaussian(1.0, 0.025, oversampling=4.0)
        method = HodMethod()
        request = RecoveryRequest(folded=folded, n_lambda=compute_support_bound(signal, 0.025))
        valid, _ = method.precondition(request)
        assert not valid
        outcome = method.recover(request)
        assert not outcome.converged
        assert outcome.order == 12

    def test_precondition_checks_truth(self, folded_gaussian):
        signal, folded = folded_gaussian(3.0, 0.2, oversampling=20.0)
        method = HodMethod(auto_order=False, order=1)
        request = RecoveryRequest(folded=folded, n_lambda=0, truth=signal.samples * 1e4)
        valid, message = method.precondition(request)
        assert not valid and "Delta^1" in message

    def test_invalid_options(self):
        with pytest.raises(InvalidArgumentError):
            HodOptions(order=0)
        with pytest.raises(InvalidArgumentError):
            HodOptions(bound=-1.0)
        with pytest.raises(InvalidArgumentError):
            create_method("hod", {"peel_init": "previous"})

    def test_growth_constant_default(self):
        assert HodOptions().growth_constant == pytest.approx(math.e)
