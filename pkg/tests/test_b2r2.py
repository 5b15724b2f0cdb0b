#!/usr/bin/env python3
"""
Test per il recupero B2R2: proiezione sul supporto, PGD e peeling.
"""

import os
import sys

import numpy as np
import pytest

# Aggiungi directory parent al path
sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from modrec.recovery import (
    B2R2Method,
    PeelInit,
    PgdOptions,
    RecoveryRequest,
    b2r2_recover,
    cost,
    create_method,
    gradient,
    init_guess,
    list_methods,
    pgd_solve,
    run_pgd,
    support_project,
)
from modrec.sampling.errors import DivergenceError, InvalidArgumentError, WindowTooSmallError
from modrec.sampling.signals import (
    MSE_FLOOR_DB,
    FoldedSignal,
    compute_support_bound,
    mse_db,
    residual,
    round_to_lattice,
    sampling_interval_for,
)
from modrec.sampling.spectral import SpectralBand, band_rho
from modrec.workflows.trial import simulate_signal


def _band_for(folded):
    return SpectralBand.for_window(folded.band_edge, folded.sampling_interval, len(folded))


@pytest.fixture
def three_folds(folded_gaussian):
    """Gaussiana appena sopra lambda: fold solo in n = -1, 0, 1."""
    signal, folded = folded_gaussian(0.201, 0.2)
    return signal, folded, _band_for(folded)


class TestSupportProject:
    """Proiezione P_{S_N}"""

    def test_keeps_center(self):
        out = support_project([1.0, 2.0, 3.0, 4.0, 5.0], 1)
        assert list(out) == [0.0, 2.0, 3.0, 4.0, 0.0]

    def test_level_zero(self):
        assert list(support_project([1.0, 2.0, 3.0], 0)) == [0.0, 2.0, 0.0]

    def test_wide_support_is_identity(self):
        y = np.arange(7.0)
        assert np.array_equal(support_project(y, 10), y)

    def test_negative_level(self):
        with pytest.raises(InvalidArgumentError):
            support_project([1.0, 2.0, 3.0], -1)


class TestInitAndCost:
    """init_guess, cost e gradient"""

    def test_init_guess_without_folds_is_near_zero(self, gaussian):
        s = gaussian(0.15, 4.0, 400)
        band = SpectralBand.for_window(np.pi, s.sampling_interval, len(s))
        z0 = init_guess(s.samples, 20, band)
        assert np.max(np.abs(z0)) < 1e-6

    def test_init_guess_single_fold_sign(self, folded_gaussian):
        signal, folded = folded_gaussian(0.2005, 0.2)
        assert compute_support_bound(signal, 0.2) == 0
        z = residual(signal, folded)
        assert z.values[folded.half_width] == pytest.approx(-0.4)
        z0 = init_guess(folded.samples, 0, _band_for(folded))
        assert z0[folded.half_width] < 0
        assert np.count_nonzero(z0) == 1

    def test_cost_at_observation_is_zero(self):
        band = band_rho(np.pi, sampling_interval_for(np.pi, 3.0), 128)
        f = np.random.default_rng(0).normal(size=31)
        assert cost(f, f, band) == 0.0
        assert cost(np.zeros_like(f), f, band) > 0.0

    def test_cost_shape_mismatch(self):
        band = band_rho(np.pi, sampling_interval_for(np.pi, 3.0), 128)
        with pytest.raises(InvalidArgumentError):
            cost(np.zeros(5), np.zeros(7), band)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        band = band_rho(np.pi, sampling_interval_for(np.pi, 4.0), 128)
        h = 1e-5
        for _ in range(100):
            f = rng.normal(size=31)
            z = rng.normal(size=31)
            d = rng.normal(size=31)
            d /= np.linalg.norm(d)
            numeric = (cost(z + h * d, f, band) - cost(z - h * d, f, band)) / (2 * h)
            analytic = float(np.dot(gradient(z, f, band), d))
            assert abs(numeric - analytic) <= 1e-6 * max(1.0, abs(analytic))


class TestRunPgd:
    """PGD su un livello"""

    def test_zero_observation(self):
        band = band_rho(np.pi, sampling_interval_for(np.pi, 4.0), 256)
        result = run_pgd(np.zeros(41), 5, band)
        assert not np.any(result.estimate)
        assert result.converged and result.iterations == 0

    def test_cost_history_is_non_increasing(self):
        band = band_rho(np.pi, sampling_interval_for(np.pi, 4.0), 256)
        f = np.random.default_rng(3).uniform(-0.2, 0.2, 41)
        history = []
        result = run_pgd(f, 8, band, PgdOptions(max_iters=200), history=history)
        assert len(history) == result.iterations + 1
        assert np.all(np.diff(history) <= 0.0)
        assert history[-1] < history[0]

    def test_estimate_stays_on_support(self):
        band = band_rho(np.pi, sampling_interval_for(np.pi, 4.0), 256)
        f = np.random.default_rng(4).uniform(-0.2, 0.2, 41)
        estimate = pgd_solve(f, 6, band, PgdOptions(max_iters=50), None)
        assert np.array_equal(estimate, support_project(estimate, 6))

    def test_recovers_residual_on_small_support(self, three_folds):
        signal, folded, band = three_folds
        z = residual(signal, folded).values
        estimate = run_pgd(folded.samples, 1, band).estimate
        assert np.allclose(round_to_lattice(estimate, 0.2), z, rtol=0.0, atol=1e-12)
        assert np.max(np.abs(estimate - z)) < 1e-3 * 0.2

    def test_initial_point_must_be_in_support(self):
        band = band_rho(np.pi, sampling_interval_for(np.pi, 4.0), 256)
        z0 = np.ones(41)
        with pytest.raises(InvalidArgumentError):
            run_pgd(np.zeros(41), 3, band, z0=z0)

    def test_level_beyond_window(self):
        band = band_rho(np.pi, sampling_interval_for(np.pi, 4.0), 256)
        with pytest.raises(InvalidArgumentError):
            run_pgd(np.zeros(41), 21, band)

    def test_invalid_options(self):
        with pytest.raises(InvalidArgumentError):
            PgdOptions(shrink=1.0)
        with pytest.raises(InvalidArgumentError):
            PgdOptions(max_iters=0)
        with pytest.raises(InvalidArgumentError):
            PgdOptions(armijo_c=0.5)
        with pytest.raises(InvalidArgumentError):
            PgdOptions(direction="sideways")

    def test_gradient_direction_recovers_small_support(self, three_folds):
        signal, folded, band = three_folds
        z = residual(signal, folded).values
        result = run_pgd(folded.samples, 1, band, PgdOptions(direction="gradient"))
        assert np.allclose(round_to_lattice(result.estimate, 0.2), z, rtol=0.0, atol=1e-12)

    def test_conjugate_needs_fewer_iterations(self):
        band = band_rho(np.pi, sampling_interval_for(np.pi, 8.0), 512)
        f = np.random.default_rng(7).uniform(-0.2, 0.2, 101)
        conjugate = run_pgd(f, 30, band, PgdOptions(grad_tol=1e-8, rel_cost_tol=0.0))
        steepest = run_pgd(
            f, 30, band, PgdOptions(direction="gradient", grad_tol=1e-8, rel_cost_tol=0.0, max_iters=500)
        )
        assert conjugate.converged and not conjugate.hit_max_iters
        assert conjugate.iterations < steepest.iterations
        assert conjugate.cost <= steepest.cost + 1e-12


class TestB2R2Recover:
    """Peeling completo"""

    def test_level_zero_returns_input(self, folded_gaussian):
        _, folded = folded_gaussian(0.15, 0.2)
        samples, trace = b2r2_recover(folded, 0, _band_for(folded))
        assert np.array_equal(samples, folded.samples)
        assert trace.records == [] and trace.converged

    def test_exact_recovery(self, three_folds):
        signal, folded, band = three_folds
        samples, trace = b2r2_recover(folded, 1, band)
        assert mse_db(samples, signal.samples) == MSE_FLOOR_DB
        assert trace.converged

    def test_levels_descend_to_one(self, three_folds):
        signal, folded, band = three_folds
        samples, trace = b2r2_recover(folded, 3, band)
        assert trace.levels == [3, 2, 1]
        assert [r.snapshot.size for r in trace.records] == [7, 5, 3]
        assert np.allclose(samples, signal.samples, atol=1e-12)

    @pytest.mark.parametrize("peel_init", list(PeelInit))
    def test_peel_init_variants(self, three_folds, peel_init):
        signal, folded, band = three_folds
        samples, trace = b2r2_recover(folded, 2, band, peel_init=peel_init)
        assert np.allclose(samples, signal.samples, atol=1e-12)
        assert trace.converged

    def test_peel_init_from_string(self, three_folds):
        _, folded, band = three_folds
        b2r2_recover(folded, 1, band, peel_init="fresh")
        with pytest.raises(ValueError):
            b2r2_recover(folded, 1, band, peel_init="random")

    def test_support_beyond_window(self, three_folds):
        _, folded, band = three_folds
        with pytest.raises(WindowTooSmallError):
            b2r2_recover(folded, folded.half_width + 1, band)

    def test_negative_support(self, three_folds):
        _, folded, band = three_folds
        with pytest.raises(InvalidArgumentError):
            b2r2_recover(folded, -1, band)

    def test_non_finite_input_diverges_with_partial(self):
        samples = np.zeros(41)
        samples[20] = np.nan
        folded = FoldedSignal(
            samples=samples,
            sampling_interval=sampling_interval_for(np.pi, 4.0),
            band_edge=np.pi,
            threshold=0.2,
            noisy=True,
        )
        band = _band_for(folded)
        with pytest.raises(DivergenceError) as excinfo:
            b2r2_recover(folded, 3, band)
        assert excinfo.value.partial is not None
        assert excinfo.value.partial.shape == samples.shape


class TestRandomBandlimited:
    """B2R2 su segnali casuali somma di sinc, lambda=0.025 e OF=10"""

    @staticmethod
    def _trial(seed):
        return simulate_signal(0.025, 10.0, seed=seed, num_pulses=6, center_spread=6.0)

    @pytest.mark.parametrize("seed", range(4))
    def test_exact_recovery(self, seed):
        data = self._trial(seed)
        assert data.n_lambda > 0
        samples, trace = b2r2_recover(data.folded, data.n_lambda, _band_for(data.folded))
        assert mse_db(samples, data.truth.samples) == MSE_FLOOR_DB
        assert trace.converged
        assert trace.stalled == []
        assert min(r.edge_margin for r in trace.records) >= 0.5

    @pytest.mark.parametrize("seed", range(2))
    def test_pgd_edges_round_to_residual(self, seed):
        data = self._trial(seed)
        n = data.n_lambda
        center = data.folded.half_width
        z = residual(data.truth, data.folded).values
        result = run_pgd(data.folded.samples, n, _band_for(data.folded))
        assert result.converged
        edges = [center - n, center + n]
        rounded = round_to_lattice(result.estimate[edges], 0.025)
        assert np.allclose(rounded, z[edges], rtol=0.0, atol=1e-12)


class TestB2R2Method:
    """B2R2 nel registry dei metodi"""

    def test_registered(self):
        names = [m["name"] for m in list_methods()]
        assert "b2r2" in names and "hod" in names

    def test_recover_through_registry(self, three_folds):
        signal, folded, _ = three_folds
        method = create_method("b2r2", {"max_iters": 500, "peel_init": "rounded"})
        assert isinstance(method, B2R2Method)
        outcome = method.recover(RecoveryRequest(folded=folded, n_lambda=2))
        assert outcome.converged and outcome.method == "b2r2"
        assert outcome.trace.levels == [2, 1]
        assert outcome.trace.records[0].snapshot is None
        assert f"{outcome.trace.total_iterations} iterazioni" in outcome.message
        assert np.allclose(outcome.samples, signal.samples, atol=1e-12)

    def test_unknown_option(self):
        with pytest.raises(InvalidArgumentError):
            create_method("b2r2", {"step": 0.1})

    def test_invalid_peel_init(self):
        with pytest.raises(InvalidArgumentError):
            create_method("b2r2", {"peel_init": "random"})

    def test_unknown_method(self):
        with pytest.raises(InvalidArgumentError):
            create_method("cvx")
