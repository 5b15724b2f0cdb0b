#!/usr/bin/env python3
"""
Test per l'harness Monte-Carlo: seed, trial, aggregazione e parallelismo.
"""

import math
import os
import sys

import numpy as np
import pytest

# Aggiungi directory parent al path
sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from modrec.sampling.errors import InconsistencyError, WindowTooSmallError
from modrec.sampling.signals import MSE_FLOOR_DB, mse_db
from modrec.workflows import trial as trial_module
from modrec.workflows.config import ConfigurationError, ExperimentConfig
from modrec.workflows.interfaces import TrialRunnerProtocol
from modrec.workflows.result_types import Cell, SweepTable, TrialReport
from modrec.workflows.service import SweepService, run_sweep
from modrec.workflows.trial import (
    prepare_trial,
    refine_inband,
    run_trial,
    signal_seed,
    simulate_signal,
    trial_seed,
)


def _config(**overrides):
    values = dict(
        lambdas=(0.1,),
        ofs=(12.0,),
        snr_dbs=(20.0, math.inf),
        trials=3,
        base_seed=11,
        methods=("hod",),
    )
    values.update(overrides)
    return ExperimentConfig(**values)


def fake_runner(config, cell, trial_index):
    return TrialReport(
        cell=cell,
        trial=trial_index,
        seed=trial_seed(config.base_seed, cell.threshold, cell.oversampling, cell.snr_db, trial_index),
        mse_db=-10.0 * (trial_index + 1),
        converged=trial_index != 0,
        n_lambda=1,
        n_w=10,
    )


class TestSeeds:
    """Derivazione dei seed"""

    def test_signal_seed_depends_on_trial_only(self):
        assert signal_seed(0, 1) == signal_seed(0, 1)
        assert signal_seed(0, 1) != signal_seed(0, 2)
        assert signal_seed(0, 1) != signal_seed(1, 1)

    def test_trial_seed_depends_on_cell(self):
        base = trial_seed(0, 0.05, 4.0, 15.0, 3)
        assert base == trial_seed(0, 0.05, 4.0, 15.0, 3)
        assert base != trial_seed(0, 0.05, 4.0, 20.0, 3)
        assert base != trial_seed(0, 0.2, 4.0, 15.0, 3)
        assert 0 <= base < 2**64

    def test_same_signal_across_cells(self):
        config = _config(snr_dbs=(math.inf,), ofs=(12.0,))
        a = prepare_trial(config, Cell(0.1, 12.0, math.inf, "hod"), 0)
        b = prepare_trial(config, Cell(0.2, 12.0, math.inf, "b2r2"), 0)
        assert a.model == b.model
        assert a.seed == b.seed
        assert a.noise_seed != b.noise_seed


class TestSimulateSignal:
    """simulate_signal"""

    def test_noiseless_pipeline(self):
        data = simulate_signal(0.2, 6.0, seed=1)
        assert not data.folded.noisy
        assert np.all(data.folded.samples >= -0.2) and np.all(data.folded.samples < 0.2)
        assert data.n_lambda < data.half_width
        assert np.max(np.abs(data.truth.samples)) <= 1.0 + 1e-9

    def test_large_threshold_is_identity(self):
        data = simulate_signal(2.0, 6.0, seed=1)
        assert np.array_equal(data.folded.samples, data.truth.samples)
        assert data.n_lambda == 0

    def test_noisy_pipeline_is_deterministic(self):
        a = simulate_signal(0.2, 6.0, 15.0, seed=1, noise_seed=99)
        b = simulate_signal(0.2, 6.0, 15.0, seed=1, noise_seed=99)
        assert a.folded.noisy
        assert np.array_equal(a.folded.samples, b.folded.samples)


class TestRunTrial:
    """Singolo trial"""

    def test_deterministic(self):
        config = _config()
        cell = Cell(0.1, 12.0, 20.0, "hod")
        assert run_trial(config, cell, 1) == run_trial(config, cell, 1)

    def test_report_fields(self):
        config = _config()
        cell = Cell(0.1, 12.0, math.inf, "hod")
        report = run_trial(config, cell, 0)
        data = prepare_trial(config, cell, 0)
        assert report.seed == trial_seed(11, 0.1, 12.0, math.inf, 0)
        assert report.n_w == data.half_width
        assert report.n_lambda == data.n_lambda
        assert math.isfinite(report.mse_db) and report.error is None

    def test_margin_is_capped_by_window(self):
        config = _config(n_lambda_margin=10**6)
        cell = Cell(0.1, 12.0, math.inf, "hod")
        report = run_trial(config, cell, 0)
        assert report.n_lambda == report.n_w

    def test_b2r2_trial(self):
        config = _config(methods=("b2r2",), method_options={"b2r2": {"max_iters": 50}}, snr_dbs=(math.inf,))
        cell = Cell(0.1, 12.0, math.inf, "b2r2")
        report = run_trial(config, cell, 0)
        assert report == run_trial(config, cell, 0)
        assert math.isfinite(report.mse_db)

    @pytest.mark.parametrize("trial_index", [0, 1, 2])
    def test_exact_b2r2_trial_reports_converged(self, trial_index):
        config = _config(methods=("b2r2",), snr_dbs=(math.inf,), num_pulses=6, center_spread=6.0)
        report = run_trial(config, Cell(0.1, 12.0, math.inf, "b2r2"), trial_index)
        assert report.mse_db == MSE_FLOOR_DB
        assert report.converged and report.error is None

    def test_simulation_failure_is_recorded(self, monkeypatch):
        def broken(config, cell, trial_index):
            raise WindowTooSmallError("code troppo alte")

        monkeypatch.setattr(trial_module, "prepare_trial", broken)
        report = run_trial(_config(), Cell(0.1, 12.0, math.inf, "hod"), 0)
        assert not report.converged
        assert report.mse_db == 0.0
        assert "code troppo alte" in report.error
        assert not report.simulated

    def test_non_finite_mse_rejected(self):
        with pytest.raises(InconsistencyError):
            TrialReport(Cell(0.1, 12.0, 20.0, "hod"), 0, 0, float("nan"), True, 0, 0)

    def test_measure_falls_back_to_folded(self):
        data = simulate_signal(0.2, 6.0, seed=1)
        estimate = np.full(data.truth.samples.size, np.nan)
        expected = mse_db(data.folded.samples, data.truth.samples)
        assert trial_module._measure(estimate, data) == expected
        assert trial_module._measure(data.truth.samples, data) == MSE_FLOOR_DB

    def test_refine_inband_removes_out_of_band_noise(self):
        data = simulate_signal(0.2, 6.0, 15.0, seed=1, noise_seed=5)
        rng = np.random.default_rng(8)
        noisy = data.truth.samples + 0.05 * rng.standard_normal(data.truth.samples.size)
        refined = refine_inband(noisy, data.folded)
        assert refined.shape == noisy.shape
        assert mse_db(refined, data.truth.samples) < mse_db(noisy, data.truth.samples) - 3.0


class TestSweepTable:
    """Aggregazione dei report"""

    def test_single_cell_single_trial(self):
        report = fake_runner(_config(), Cell(0.1, 12.0, 20.0, "hod"), 0)
        table = SweepTable.from_reports([report], expected_trials=1)
        (summary,) = table.cells
        assert summary.mean_mse_db == report.mse_db
        assert summary.trials == 1 and summary.failures == 1

    def test_mean_independent_of_arrival_order(self):
        cell = Cell(0.1, 12.0, 20.0, "hod")
        reports = [fake_runner(_config(), cell, i) for i in range(5)]
        forward = SweepTable.from_reports(reports)
        backward = SweepTable.from_reports(reversed(reports))
        assert forward == backward
        assert forward.cells[0].mean_mse_db == -30.0

    def test_failed_simulations_excluded_from_mean(self):
        cell = Cell(0.1, 12.0, 20.0, "hod")
        reports = [fake_runner(_config(), cell, i) for i in range(3)]
        reports[1] = TrialReport(cell, 1, 0, 0.0, False, 0, 0, error="code troppo alte")
        (summary,) = SweepTable.from_reports(reports, expected_trials=3).cells
        assert summary.mean_mse_db == -20.0
        assert summary.trials == 3 and summary.failures == 2

    def test_cell_without_simulations(self):
        cell = Cell(0.1, 12.0, 20.0, "hod")
        reports = [TrialReport(cell, i, 0, 0.0, False, 0, 0) for i in range(2)]
        (summary,) = SweepTable.from_reports(reports).cells
        assert summary.mean_mse_db == 0.0 and summary.failures == 2

    def test_duplicate_trials(self):
        report = fake_runner(_config(), Cell(0.1, 12.0, 20.0, "hod"), 0)
        with pytest.raises(InconsistencyError):
            SweepTable.from_reports([report, report])

    def test_missing_trials(self):
        cell = Cell(0.1, 12.0, 20.0, "hod")
        reports = [fake_runner(_config(), cell, i) for i in (0, 2)]
        with pytest.raises(InconsistencyError):
            SweepTable.from_reports(reports, expected_trials=3)

    def test_pivot_and_methods(self):
        config = _config(methods=("b2r2", "hod"))
        table = SweepService(config, runner=fake_runner).run()
        assert table.methods() == ["b2r2", "hod"]
        pivot = table.pivot()
        assert pivot.shape == (1, 4)
        assert len(SweepTable().pivot()) == 0


class TestSweepService:
    """Orchestrazione dello sweep"""

    def test_fake_runner_matches_protocol(self):
        assert isinstance(fake_runner, TrialRunnerProtocol)

    def test_cell_order(self):
        config = _config(lambdas=(0.05, 0.2), ofs=(4.0, 6.0), snr_dbs=(10.0,), methods=("b2r2", "hod"))
        cells = SweepService(config).cells()
        assert cells[0] == Cell(0.05, 4.0, 10.0, "b2r2")
        assert cells[1] == Cell(0.05, 4.0, 10.0, "hod")
        assert cells[2] == Cell(0.05, 6.0, 10.0, "b2r2")
        assert cells[-1] == Cell(0.2, 6.0, 10.0, "hod")
        assert len(list(SweepService(config).tasks())) == 8 * config.trials

    def test_injected_runner(self):
        service = SweepService(_config(), runner=fake_runner)
        table = service.run(parallelism=3)
        assert len(table) == 2
        assert len(service.reports) == 6
        assert all(s.failures == 1 and s.mean_mse_db == -20.0 for s in table)

    def test_unknown_executor(self):
        with pytest.raises(ConfigurationError):
            SweepService(_config(), executor="cluster")

    def test_parallelism_does_not_change_results(self):
        config = _config()
        serial = SweepService(config)
        reference = serial.run(parallelism=1)
        threaded = SweepService(config, executor="thread")
        assert threaded.run(parallelism=2) == reference
        assert threaded.reports == serial.reports
        assert run_sweep(config, parallelism=2, executor="process") == reference

    def test_invalid_config(self):
        with pytest.raises(ConfigurationError) as excinfo:
            _config(ofs=(1.0,), trials=0)
        assert len(excinfo.value.errors) == 2
