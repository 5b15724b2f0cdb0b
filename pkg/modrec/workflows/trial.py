"""
Singolo trial Monte-Carlo.

Pipeline deterministica: genera segnale -> campiona a OF -> fold a lambda ->
rumore a SNR -> N_lambda dai campioni puliti -> metodo -> MSE contro i
campioni veri.

Seed: il segnale dipende solo da (base_seed, trial), il rumore da
(base_seed, lambda, OF, SNR, trial). Tutti i metodi e tutte le celle vedono
lo stesso insieme di segnali.
"""

import hashlib
import logging
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..recovery import RecoveryRequest, create_method
from ..sampling.errors import DivergenceError, ModuloError
from ..sampling.signals import (
    AnalogModel,
    FoldedSignal,
    SampledSignal,
    add_noise,
    choose_window,
    compute_support_bound,
    fold_signal,
    generate_bandlimited,
    mse_db,
    sample,
    sampling_interval_for,
)
from ..sampling.spectral import SpectralBand, lowpass_project
from .config import ExperimentConfig
from .result_types import Cell, TrialReport

logger = logging.getLogger(__name__)


def _digest_seed(*parts) -> int:
    text = "|".join(repr(p) for p in parts)
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


def signal_seed(base_seed: int, trial_index: int) -> int:
    """Seed del segnale analogico di un trial."""
    return _digest_seed("signal", int(base_seed), int(trial_index))


def trial_seed(base_seed: int, threshold: float, oversampling: float, snr_db: float, trial_index: int) -> int:
    """Seed del rumore: hash di (base_seed, lambda, OF, SNR, trial)."""
    return _digest_seed(
        "noise", int(base_seed), float(threshold), float(oversampling), float(snr_db), int(trial_index)
    )


@dataclass(frozen=True, eq=False)
class TrialData:
    """
    Segnale simulato di un trial.

    Attributes:
        model: Segnale analogico
        truth: Campioni veri f
        folded: Campioni modulo (eventualmente rumorosi)
        n_lambda: Support bound dai campioni puliti
        snr_db: SNR applicato
        seed: Seed del segnale
        noise_seed: Seed del rumore
    """

    model: AnalogModel
    truth: SampledSignal
    folded: FoldedSignal
    n_lambda: int
    snr_db: float
    seed: int
    noise_seed: int

    @property
    def half_width(self) -> int:
        return self.truth.half_width


def simulate_signal(
    threshold: float,
    oversampling: float,
    snr_db: float = math.inf,
    seed: int = 0,
    noise_seed: Optional[int] = None,
    num_pulses: int = 32,
    center_spread: float = 32.0,
    band_edge: float = math.pi,
    tail_ratio: float = 1e-4,
    max_window_seconds: float = 240.0,
) -> TrialData:
    """
    Genera, campiona e fa il fold di un segnale casuale.

    Il rumore è aggiunto dopo il fold (campioni modulo rumorosi).

    Raises:
        InvalidArgumentError: Parametri non validi
        WindowTooSmallError: La finestra non contiene le code del segnale
    """
    model = generate_bandlimited(seed, band_edge, num_pulses, center_spread)
    interval = sampling_interval_for(band_edge, oversampling)
    half_width = choose_window(model, interval, threshold, tail_ratio=tail_ratio, max_seconds=max_window_seconds)
    truth = sample(model, interval, half_width)
    folded = fold_signal(truth, threshold)
    n_lambda = compute_support_bound(truth, threshold)
    noise_seed = seed if noise_seed is None else noise_seed
    folded = add_noise(folded, snr_db, noise_seed)
    return TrialData(
        model=model,
        truth=truth,
        folded=folded,
        n_lambda=n_lambda,
        snr_db=snr_db,
        seed=seed,
        noise_seed=noise_seed,
    )


def prepare_trial(config: ExperimentConfig, cell: Cell, trial_index: int) -> TrialData:
    """Segnale del trial (cella, indice) secondo i seed deterministici."""
    return simulate_signal(
        cell.threshold,
        cell.oversampling,
        cell.snr_db,
        seed=signal_seed(config.base_seed, trial_index),
        noise_seed=trial_seed(config.base_seed, cell.threshold, cell.oversampling, cell.snr_db, trial_index),
        num_pulses=config.num_pulses,
        center_spread=config.center_spread,
        band_edge=config.band_edge,
        tail_ratio=config.tail_ratio,
        max_window_seconds=config.max_window_seconds,
    )


def refine_inband(estimate: np.ndarray, folded: FoldedSignal) -> np.ndarray:
    """Rimuove dalla stima il contenuto fuori banda (rumore residuo)."""
    band = SpectralBand.for_window(folded.band_edge, folded.sampling_interval, estimate.size)
    return lowpass_project(estimate, band)


def _measure(estimate: Optional[np.ndarray], data: TrialData) -> float:
    """MSE della stima; ripiega sui campioni modulo se la stima non è utilizzabile."""
    truth = data.truth.samples
    if estimate is not None and np.all(np.isfinite(estimate)):
        value = mse_db(estimate, truth)
        if math.isfinite(value):
            return value
    return mse_db(data.folded.samples, truth)


def run_trial(config: ExperimentConfig, cell: Cell, trial_index: int) -> TrialReport:
    """
    Esegue un trial in modo deterministico da (base_seed, cella, indice).

    Gli errori del metodo non sono fatali: il report è marcato non convergente
    con l'MSE della migliore stima disponibile (stima parziale o campioni modulo).
    """
    started = time.perf_counter()
    noise_seed = trial_seed(config.base_seed, cell.threshold, cell.oversampling, cell.snr_db, trial_index)

    try:
        data = prepare_trial(config, cell, trial_index)
    except ModuloError as e:
        logger.warning(f"Trial {trial_index} {cell}: simulazione fallita ({e})")
        return TrialReport(
            cell=cell,
            trial=trial_index,
            seed=noise_seed,
            mse_db=0.0,
            converged=False,
            n_lambda=0,
            n_w=0,
            wall_time_s=time.perf_counter() - started,
            error=str(e),
        )

    n_lambda = min(data.n_lambda + config.n_lambda_margin, data.half_width)
    request = RecoveryRequest(folded=data.folded, n_lambda=n_lambda, truth=data.truth.samples)
    estimate: Optional[np.ndarray] = None
    error: Optional[str] = None
    try:
        method = create_method(cell.method, config.options_for(cell.method))
        outcome = method.recover(request)
        estimate, converged = outcome.samples, outcome.converged
    except DivergenceError as e:
        estimate, converged, error = e.partial, False, str(e)
    except ModuloError as e:
        converged, error = False, str(e)
    if error:
        logger.warning(f"Trial {trial_index} {cell}: {error}")

    if (
        config.refine_inband
        and data.folded.noisy
        and estimate is not None
        and np.all(np.isfinite(estimate))
    ):
        estimate = refine_inband(estimate, data.folded)

    return TrialReport(
        cell=cell,
        trial=trial_index,
        seed=noise_seed,
        mse_db=_measure(estimate, data),
        converged=converged,
        n_lambda=n_lambda,
        n_w=data.half_width,
        wall_time_s=time.perf_counter() - started,
        error=error,
    )
