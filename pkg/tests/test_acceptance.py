#!/usr/bin/env python3
"""
Sweep Monte-Carlo di accettazione sulle griglie incluse.

Lenti: eseguire con `pytest -m slow`. Le soglie hanno una tolleranza di 5 dB
perché l'insieme di segnali di riferimento non è noto con esattezza.
"""

import dataclasses
import math
import os
import sys

import pytest

# Aggiungi directory parent al path
sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from modrec.sampling.app_config import AppConfig
from modrec.sampling.signals import MSE_FLOOR_DB
from modrec.workflows.config import ConfigLoader, ExperimentConfig
from modrec.workflows.service import SweepService, run_sweep

pytestmark = pytest.mark.slow

PARALLELISM = max(1, min(8, os.cpu_count() or 1))
TOLERANCE_DB = 5.0
DESK_TRIALS = 50


def _bundled(name, **overrides):
    config = ConfigLoader.load(name, preset="desk", app_config=AppConfig())
    return dataclasses.replace(config, **overrides)


def test_noiseless_exactness():
    config = ExperimentConfig(
        lambdas=(0.05, 0.2),
        ofs=(6.0,),
        snr_dbs=(math.inf,),
        trials=250,
        base_seed=1,
        methods=("b2r2",),
    )
    service = SweepService(config)
    service.run(PARALLELISM)
    for threshold in config.lambdas:
        reports = [r for r in service.reports if r.cell.threshold == threshold]
        exact = sum(1 for r in reports if r.mse_db <= MSE_FLOOR_DB)
        assert exact >= 0.99 * len(reports), f"lambda={threshold}: {exact}/{len(reports)} trial esatti"


def test_oversampling_crossover():
    config = _bundled("fig2", ofs=(10.0, 32.0), trials=DESK_TRIALS)
    table = run_sweep(config, PARALLELISM)
    b2r2_at_10 = table.lookup(0.025, 10.0, 25.0, "b2r2").mean_mse_db
    hod_at_10 = table.lookup(0.025, 10.0, 25.0, "hod").mean_mse_db
    hod_at_32 = table.lookup(0.025, 32.0, 25.0, "hod").mean_mse_db
    assert b2r2_at_10 <= -55.0 + TOLERANCE_DB
    assert hod_at_10 >= -20.0 - TOLERANCE_DB
    assert hod_at_32 <= -55.0 + TOLERANCE_DB


def test_snr_trends():
    config = _bundled("fig3")
    table = run_sweep(config, PARALLELISM)
    snrs = sorted(config.snr_dbs)
    for threshold in config.lambdas:
        for of in config.ofs:
            curve = [table.lookup(threshold, of, snr, "b2r2").mean_mse_db for snr in snrs]
            for lower, higher in zip(curve, curve[1:]):
                assert higher <= lower + 1.0, f"lambda={threshold}, OF={of}: {curve}"
    for snr in (s for s in snrs if s >= 15.0):
        large = table.lookup(0.2, 6.0, snr, "b2r2").mean_mse_db
        small = table.lookup(0.05, 6.0, snr, "b2r2").mean_mse_db
        assert large <= small + 3.0


def test_hard_regime_separation():
    config = _bundled("fig4", lambdas=(0.05,))
    table = run_sweep(config, PARALLELISM)
    b2r2 = table.lookup(0.05, 6.0, 15.0, "b2r2").mean_mse_db
    hod = table.lookup(0.05, 6.0, 15.0, "hod").mean_mse_db
    assert b2r2 <= hod - 10.0
