"""
Fixture condivise: segnali gaussiani campionati.

Una gaussiana larga ha spettro trascurabile oltre omega_m, quindi le
identità fuori banda valgono con tolleranze strette anche su finestre brevi.
"""

import os
import sys

import numpy as np
import pytest

# Aggiungi directory parent al path
sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))

from modrec.sampling.signals import FoldedSignal, SampledSignal, fold_signal, sampling_interval_for


def make_gaussian(amplitude: float, oversampling: float, half_width: int, sigma: float = 3.0, band_edge: float = np.pi):
    """Campioni di amplitude * exp(-t^2 / (2 sigma^2)) su n = -N_w..N_w."""
    interval = sampling_interval_for(band_edge, oversampling)
    t = np.arange(-half_width, half_width + 1) * interval
    return SampledSignal(
        samples=amplitude * np.exp(-(t**2) / (2.0 * sigma**2)),
        sampling_interval=interval,
        band_edge=band_edge,
    )


@pytest.fixture
def gaussian():
    """Factory: gaussian(amplitude, oversampling, half_width) -> SampledSignal."""
    return make_gaussian


@pytest.fixture
def folded_gaussian():
    """Factory: folded_gaussian(amplitude, threshold, ...) -> (SampledSignal, FoldedSignal)."""

    def build(amplitude: float, threshold: float, oversampling: float = 4.0, half_width: int = 400, **kwargs):
        signal = make_gaussian(amplitude, oversampling, half_width, **kwargs)
        folded: FoldedSignal = fold_signal(signal, threshold)
        return signal, folded

    return build
