"""
Dominio del campionamento modulo: segnali, folding, operatori spettrali.
"""

from .errors import (
    DivergenceError,
    EmptyBandError,
    InconsistencyError,
    InvalidArgumentError,
    ModuloError,
    TableParseError,
    WindowTooSmallError,
)
from .signals import (
    MSE_FLOOR_DB,
    AnalogModel,
    FoldedSignal,
    Pulse,
    ResidualSequence,
    SampledSignal,
    add_noise,
    choose_window,
    compute_support_bound,
    fold_signal,
    generate_bandlimited,
    modulo_fold,
    mse_db,
    residual,
    round_to_lattice,
    sample,
    sampling_interval_for,
)
from .spectral import (
    SpectralBand,
    Spectrum,
    apply_adjoint,
    band_rho,
    highpass_project,
    lowpass_project,
    out_of_band_energy,
    partial_dtft,
)

__all__ = [
    "DivergenceError",
    "EmptyBandError",
    "InconsistencyError",
    "InvalidArgumentError",
    "ModuloError",
    "TableParseError",
    "WindowTooSmallError",
    "MSE_FLOOR_DB",
    "AnalogModel",
    "FoldedSignal",
    "Pulse",
    "ResidualSequence",
    "SampledSignal",
    "add_noise",
    "choose_window",
    "compute_support_bound",
    "fold_signal",
    "generate_bandlimited",
    "modulo_fold",
    "mse_db",
    "residual",
    "round_to_lattice",
    "sample",
    "sampling_interval_for",
    "SpectralBand",
    "Spectrum",
    "apply_adjoint",
    "band_rho",
    "highpass_project",
    "lowpass_project",
    "out_of_band_energy",
    "partial_dtft",
]
