"""
Operatori nel dominio della DTFT sulla regione fuori banda rho.

La DTFT parziale F_rho e la sua aggiunta sono realizzate su una griglia uniforme
di M frequenze (M potenza di due, almeno 4 volte la finestra): la finestra è
immersa nella griglia con indice n mod M, trasformata con FFT, e i bin fuori da
rho = (-omega_s/2, -omega_m) U (omega_m, omega_s/2) sono azzerati.

Con il peso 1/M della somma di Riemann, F*_rho F_rho sulla griglia è una
proiezione ortogonale; highpass_project ne è la compressione sulla finestra.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from .errors import EmptyBandError, InconsistencyError, InvalidArgumentError

logger = logging.getLogger(__name__)

# Fattore minimo tra griglia e lunghezza della finestra
GRID_FACTOR = 4

# Margine relativo per escludere i bin esattamente sui bordi di rho
EDGE_EPSILON = 1e-9

# Residuo immaginario ammesso nell'aggiunta di uno spettro simmetrico
SYMMETRY_TOLERANCE = 1e-10


def grid_size_for(window_length: int, factor: int = GRID_FACTOR) -> int:
    """Potenza di due più piccola >= factor * window_length."""
    if window_length < 1 or factor < 1:
        raise InvalidArgumentError("window_length e factor devono essere positivi")
    return 1 << max(1, math.ceil(math.log2(factor * window_length)))


@dataclass(frozen=True, eq=False)
class SpectralBand:
    """
    Regione fuori banda rho discretizzata su M punti.

    Le tabelle derivate sono in sola lettura e condivisibili tra thread.

    Attributes:
        band_edge: omega_m in rad/s
        sampling_rate: omega_s in rad/s
        grid_size: M, potenza di due
        mask: True per i bin (ordine FFT) dentro rho
        bins: Indici FFT dei bin in rho
        mirror: Per ogni bin in rho, la posizione del bin a frequenza opposta
        kernel: Risposta all'impulso circolare del passa-alto, q[k] per k = 0..M-1
    """

    band_edge: float
    sampling_rate: float
    grid_size: int
    mask: np.ndarray = field(init=False, repr=False)
    bins: np.ndarray = field(init=False, repr=False)
    mirror: np.ndarray = field(init=False, repr=False)
    kernel: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        M = self.grid_size
        if M < 2 or M & (M - 1):
            raise InvalidArgumentError(f"grid_size deve essere una potenza di due, ricevuto {M}")
        if self.band_edge <= 0:
            raise InvalidArgumentError(f"band_edge deve essere positivo, ricevuto {self.band_edge}")
        if self.sampling_rate <= 2.0 * self.band_edge:
            raise EmptyBandError(
                f"Regione fuori banda vuota: OF={self.sampling_rate / (2 * self.band_edge):.6f} <= 1"
            )

        # Bin m <-> omega = m * omega_s / M, con m in (-M/2, M/2]
        m = np.fft.fftfreq(M) * M
        cutoff = M * self.band_edge / self.sampling_rate
        mask = (np.abs(m) > cutoff * (1 + EDGE_EPSILON)) & (np.abs(m) < M / 2)
        bins = np.flatnonzero(mask)
        position = np.full(M, -1)
        position[bins] = np.arange(bins.size)
        mirror = position[(-bins) % M]
        kernel = np.fft.irfft(mask[: M // 2 + 1].astype(float), n=M)

        for name, value in (("mask", mask), ("bins", bins), ("mirror", mirror), ("kernel", kernel)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def for_window(
        cls,
        band_edge: float,
        sampling_interval: float,
        window_length: int,
        factor: int = GRID_FACTOR,
    ) -> "SpectralBand":
        """Banda con M = potenza di due >= factor * window_length."""
        return band_rho(band_edge, sampling_interval, grid_size_for(window_length, factor))

    @property
    def sampling_interval(self) -> float:
        return 2.0 * np.pi / self.sampling_rate

    @property
    def oversampling(self) -> float:
        return self.sampling_rate / (2.0 * self.band_edge)

    @property
    def weight(self) -> float:
        """Peso della somma di Riemann: T_s * omega_s / (2 pi M) = 1/M."""
        return 1.0 / self.grid_size

    @property
    def frequencies(self) -> np.ndarray:
        """Frequenze (rad/s) dei bin in rho, nello stesso ordine di bins."""
        return np.fft.fftfreq(self.grid_size)[self.bins] * self.sampling_rate

    @property
    def flagged_fraction(self) -> float:
        return self.bins.size / self.grid_size

    def check_window(self, length: int) -> None:
        """Verifica che una finestra di lunghezza length sia compatibile con la griglia."""
        if length % 2 == 0:
            raise InvalidArgumentError(f"La finestra deve avere lunghezza dispari, ricevuta {length}")
        if length > self.grid_size:
            raise InvalidArgumentError(
                f"Finestra di {length} campioni più lunga della griglia M={self.grid_size}"
            )

    def embed(self, x: ArrayLike) -> np.ndarray:
        """Immerge la finestra centrata nella griglia (indice n mod M)."""
        x = np.asarray(x, dtype=float)
        self.check_window(x.size)
        half = (x.size - 1) // 2
        buffer = np.zeros(self.grid_size)
        buffer[: half + 1] = x[half:]
        if half:
            buffer[-half:] = x[:half]
        return buffer

    def restrict(self, buffer: np.ndarray, length: int) -> np.ndarray:
        """Inverso di embed: estrae la finestra centrata di lunghezza length."""
        half = (length - 1) // 2
        if half:
            return np.concatenate([buffer[-half:], buffer[: half + 1]])
        return buffer[:1].copy()

    def project_grid(self, buffer: np.ndarray) -> np.ndarray:
        """Proiezione ortogonale F*_rho F_rho su tutta la griglia di M punti."""
        spectrum = np.fft.rfft(buffer)
        spectrum[~self.mask[: self.grid_size // 2 + 1]] = 0.0
        return np.fft.irfft(spectrum, n=self.grid_size)

    def lag_kernel(self, max_lag: int) -> np.ndarray:
        """Coefficienti q[k] per k = 0..max_lag (il nucleo è pari)."""
        return self.kernel[np.arange(max_lag + 1) % self.grid_size]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """
    Valori complessi sui bin di rho.

    Attributes:
        values: X(omega_k) nell'ordine di band.bins
        band: Banda di riferimento
    """

    values: np.ndarray
    band: SpectralBand

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.band.bins.shape:
            raise InvalidArgumentError(
                f"Spettro con {values.size} valori, la banda ha {self.band.bins.size} bin"
            )
        object.__setattr__(self, "values", values)

    @property
    def frequencies(self) -> np.ndarray:
        return self.band.frequencies

    def norm(self) -> float:
        """Norma pesata sqrt(w * sum |X|^2)."""
        return math.sqrt(self.band.weight * float(np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: "Spectrum") -> complex:
        """Prodotto interno pesato <X, Y> = w * sum X conj(Y)."""
        return complex(self.band.weight * np.sum(self.values * np.conj(other.values)))

    def symmetry_error(self) -> float:
        """Scarto relativo dalla simmetria coniugata X(-omega) = conj(X(omega))."""
        scale = np.max(np.abs(self.values)) if self.values.size else 0.0
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(self.values[self.band.mirror] - np.conj(self.values))) / scale)

    def is_conjugate_symmetric(self, tolerance: float = SYMMETRY_TOLERANCE) -> bool:
        return self.symmetry_error() <= tolerance


def band_rho(band_edge: float, sampling_interval: float, grid_size: int) -> SpectralBand:
    """
    Costruisce la regione rho per omega_m e T_s su una griglia di M punti.

    Raises:
        EmptyBandError: Se OF <= 1
        InvalidArgumentError: Se M non è una potenza di due
    """
    if sampling_interval <= 0:
        raise InvalidArgumentError(f"T_s deve essere positivo, ricevuto {sampling_interval}")
    band = SpectralBand(
        band_edge=float(band_edge),
        sampling_rate=2.0 * np.pi / sampling_interval,
        grid_size=int(grid_size),
    )
    logger.debug(
        f"Banda rho: OF={band.oversampling:.3f}, M={band.grid_size}, bin in rho={band.bins.size}"
    )
    return band


def partial_dtft(x: ArrayLike, band: SpectralBand) -> Spectrum:
    """DTFT di x valutata sui bin di rho, via FFT della finestra immersa."""
    spectrum = np.fft.fft(band.embed(x))
    return Spectrum(values=spectrum[band.bins], band=band)


def apply_adjoint(
    spectrum: Spectrum,
    band: SpectralBand,
    length: int,
    symmetric: bool = True,
) -> np.ndarray:
    """
    Aggiunta F*_rho: sintetizza la finestra di lunghezza length dallo spettro.

    Args:
        spectrum: Valori sui bin di rho
        band: Banda (deve coincidere con quella dello spettro)
        length: Lunghezza (dispari) della finestra di uscita
        symmetric: Se True lo spettro è dichiarato coniugato-simmetrico e il
                   residuo immaginario viene verificato

    Returns:
        Sequenza reale

    Raises:
        InconsistencyError: Residuo immaginario oltre 1e-10 * ||X|| con symmetric=True
    """
    if spectrum.band is not band and (
        spectrum.band.grid_size != band.grid_size
        or not np.array_equal(spectrum.band.bins, band.bins)
    ):
        raise InvalidArgumentError("Spettro definito su una banda diversa")
    band.check_window(length)

    full = np.zeros(band.grid_size, dtype=complex)
    full[band.bins] = spectrum.values
    window = band.restrict(np.fft.ifft(full), length)

    if symmetric:
        residue = float(np.linalg.norm(window.imag))
        if residue > SYMMETRY_TOLERANCE * max(spectrum.norm(), np.finfo(float).tiny):
            raise InconsistencyError(
                f"Residuo immaginario {residue:.3e} oltre tolleranza: spettro non simmetrico"
            )
    return window.real.copy()


def highpass_project(x: ArrayLike, band: SpectralBand) -> np.ndarray:
    """F*_rho F_rho x: filtro passa-alto ideale su rho, troncato alla finestra."""
    x = np.asarray(x, dtype=float)
    return band.restrict(band.project_grid(band.embed(x)), x.size)


def out_of_band_energy(x: ArrayLike, band: SpectralBand) -> float:
    """||F_rho x||^2 pesato, calcolato sulla metà positiva dello spettro."""
    spectrum = np.fft.rfft(band.embed(x))
    half = band.mask[: band.grid_size // 2 + 1]
    return 2.0 * band.weight * float(np.sum(np.abs(spectrum[half]) ** 2))


def lowpass_project(x: ArrayLike, band: SpectralBand) -> np.ndarray:
    """Complemento di highpass_project: x - F*_rho F_rho x."""
    x = np.asarray(x, dtype=float)
    return x - highpass_project(x, band)
