"""
Segnali bandlimited, campionamento uniforme e operatore modulo.

Contiene i tipi di dominio (AnalogModel, SampledSignal, FoldedSignal,
ResidualSequence) e le operazioni pure che li collegano: generazione,
campionamento, folding, decomposizione nel residuo, support bound, rumore e
metriche di qualità.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import minimize_scalar

from .errors import InconsistencyError, InvalidArgumentError, WindowTooSmallError

logger = logging.getLogger(__name__)

# Sentinella per MSE = -inf (stima esatta)
MSE_FLOOR_DB = -300.0

# Rapporti sotto questa soglia sono indistinguibili da zero in doppia precisione
ROUNDOFF_FLOOR = (64 * np.finfo(float).eps) ** 2

# Tolleranza assoluta per lo snap dei residui sul reticolo 2*lambda*Z
LATTICE_TOLERANCE = 1e-9

# Punti per lobo della griglia densa usata per la normalizzazione
GRID_DENSITY = 64

# Lobi di margine oltre i centri estremi della griglia densa
GRID_MARGIN_LOBES = 4

Real = Union[float, np.ndarray]


@dataclass(frozen=True)
class Pulse:
    """Impulso sinc con ampiezza e centro (secondi)."""

    amplitude: float
    center: float


@dataclass(frozen=True)
class AnalogModel:
    """
    Segnale bandlimited in forma chiusa: somma di sinc traslati con cutoff band_edge.

    Attributes:
        pulses: Impulsi (ampiezza, centro)
        band_edge: Frequenza di banda omega_m in rad/s
        normalization: Fattore di scala applicato alla somma
        peak_time: Istante del picco assoluto (se il modello è normalizzato)
    """

    pulses: Tuple[Pulse, ...]
    band_edge: float
    normalization: float = 1.0
    peak_time: Optional[float] = None

    @classmethod
    def from_pulses(cls, pulses, band_edge: float, normalize: bool = True) -> "AnalogModel":
        """
        Costruisce un modello da coppie (ampiezza, centro).

        Args:
            pulses: Iterabile di coppie (amplitude, center)
            band_edge: omega_m in rad/s
            normalize: Se True scala il modello a picco unitario

        Returns:
            AnalogModel
        """
        if band_edge <= 0:
            raise InvalidArgumentError(f"band_edge deve essere positivo, ricevuto {band_edge}")
        model = cls(
            pulses=tuple(Pulse(float(a), float(c)) for a, c in pulses),
            band_edge=float(band_edge),
        )
        return model.normalized() if normalize else model

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([p.amplitude for p in self.pulses], dtype=float)

    @property
    def centers(self) -> np.ndarray:
        return np.array([p.center for p in self.pulses], dtype=float)

    def __call__(self, t: ArrayLike) -> np.ndarray:
        return self.evaluate(t)

    def evaluate(self, t: ArrayLike) -> np.ndarray:
        """Valuta il modello negli istanti t (secondi)."""
        t = np.asarray(t, dtype=float)
        if not self.pulses:
            return np.zeros_like(t)
        kernel = np.sinc(self.band_edge * (t[..., None] - self.centers) / np.pi)
        return self.normalization * (kernel @ self.amplitudes)

    def evaluation_grid(self) -> np.ndarray:
        """
        Griglia densa su cui è definito il picco unitario.

        Copre i centri con un margine di GRID_MARGIN_LOBES lobi e contiene
        l'istante del picco quando noto.
        """
        lobe = np.pi / self.band_edge
        centers = self.centers if self.pulses else np.zeros(1)
        start = centers.min() - GRID_MARGIN_LOBES * lobe
        stop = centers.max() + GRID_MARGIN_LOBES * lobe
        count = int(math.ceil((stop - start) / lobe * GRID_DENSITY)) + 1
        grid = np.linspace(start, stop, count)
        if self.peak_time is not None:
            grid = np.sort(np.append(grid, self.peak_time))
        return grid

    def normalized(self) -> "AnalogModel":
        """Ritorna una copia scalata a picco assoluto unitario."""
        raw = replace(self, normalization=1.0, peak_time=None)
        peak_time, peak = _locate_peak(raw)
        if peak == 0.0:
            logger.debug("Modello identicamente nullo, normalizzazione saltata")
            return raw
        return replace(raw, normalization=1.0 / peak, peak_time=peak_time)


def _locate_peak(model: AnalogModel, candidates: int = 5) -> Tuple[Optional[float], float]:
    """Trova il massimo di |f| raffinando i migliori punti della griglia densa."""
    grid = model.evaluation_grid()
    values = np.abs(model.evaluate(grid))
    if not np.any(values > 0):
        return None, 0.0

    step = grid[1] - grid[0]
    best_t, best_v = float(grid[np.argmax(values)]), float(values.max())
    for idx in np.argsort(values)[::-1][:candidates]:
        center = float(grid[idx])
        res = minimize_scalar(
            lambda t: -abs(float(model.evaluate(t))),
            bounds=(center - step, center + step),
            method="bounded",
            options={"xatol": 1e-13},
        )
        if -res.fun > best_v:
            best_t, best_v = float(res.x), float(-res.fun)
    return best_t, best_v


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """
    Sequenza di campioni uniformi su indici n = -N_w..N_w.

    Attributes:
        samples: Campioni f(n T_s)
        sampling_interval: T_s in secondi
        band_edge: omega_m in rad/s
    """

    samples: np.ndarray
    sampling_interval: float
    band_edge: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size % 2 == 0:
            raise InvalidArgumentError(
                f"La finestra deve avere lunghezza dispari (indici simmetrici), ricevuta {samples.shape}"
            )
        if self.sampling_interval <= 0 or self.band_edge <= 0:
            raise InvalidArgumentError("sampling_interval e band_edge devono essere positivi")
        if self.oversampling < 1.0 - 1e-12:
            raise InvalidArgumentError(
                f"Campionamento sotto Nyquist: OF={self.oversampling:.6f} < 1"
            )
        object.__setattr__(self, "samples", samples)

    @property
    def half_width(self) -> int:
        return (self.samples.size - 1) // 2

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    @property
    def sampling_rate(self) -> float:
        """omega_s = 2*pi/T_s."""
        return 2.0 * np.pi / self.sampling_interval

    @property
    def oversampling(self) -> float:
        """OF = omega_s / (2*omega_m)."""
        return np.pi / (self.sampling_interval * self.band_edge)

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True, eq=False)
class FoldedSignal(SampledSignal):
    """
    Campioni modulo con soglia lambda, eventualmente rumorosi.

    Attributes:
        threshold: lambda > 0
        noisy: True se è stato aggiunto rumore dopo il folding
        noise_variance: sigma_v^2 del rumore aggiunto
    """

    threshold: float = 1.0
    noisy: bool = False
    noise_variance: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if self.threshold <= 0:
            raise InvalidArgumentError(f"lambda deve essere positivo, ricevuto {self.threshold}")
        if not self.noisy:
            lam = self.threshold
            if np.any(self.samples < -lam) or np.any(self.samples >= lam):
                raise InconsistencyError("Campioni senza rumore fuori da [-lambda, lambda)")


@dataclass(frozen=True, eq=False)
class ResidualSequence:
    """
    Residuo z = f_lambda - f, multiplo intero di 2*lambda.

    Attributes:
        values: Valori del residuo sulla finestra
        threshold: lambda
        support_bound: N tale che values[n] = 0 per |n| > N
    """

    values: np.ndarray
    threshold: float
    support_bound: int

    @property
    def multiples(self) -> np.ndarray:
        """Valori espressi come interi k con z = 2*lambda*k."""
        return np.rint(self.values / (2.0 * self.threshold)).astype(np.int64)


def sampling_interval_for(band_edge: float, oversampling: float) -> float:
    """T_s che realizza il fattore di sovracampionamento richiesto."""
    if band_edge <= 0 or oversampling <= 0:
        raise InvalidArgumentError("band_edge e oversampling devono essere positivi")
    return np.pi / (oversampling * band_edge)


def generate_bandlimited(
    seed: int,
    band_edge: float,
    num_pulses: int,
    center_spread: float,
) -> AnalogModel:
    """
    Genera un segnale casuale somma di sinc, normalizzato a picco unitario.

    Ampiezze uniformi in [-1, 1], centri uniformi in
    [-center_spread/2, center_spread/2].

    Args:
        seed: Seed del generatore
        band_edge: omega_m in rad/s
        num_pulses: Numero di impulsi (>= 1)
        center_spread: Ampiezza dell'intervallo dei centri in secondi

    Returns:
        AnalogModel normalizzato

    Raises:
        InvalidArgumentError: Se band_edge o num_pulses non sono positivi
    """
    if band_edge <= 0:
        raise InvalidArgumentError(f"band_edge deve essere positivo, ricevuto {band_edge}")
    if num_pulses < 1:
        raise InvalidArgumentError(f"num_pulses deve essere >= 1, ricevuto {num_pulses}")
    if center_spread < 0:
        raise InvalidArgumentError(f"center_spread non può essere negativo, ricevuto {center_spread}")

    rng = np.random.default_rng(seed)
    amplitudes = rng.uniform(-1.0, 1.0, num_pulses)
    centers = rng.uniform(-center_spread / 2.0, center_spread / 2.0, num_pulses)
    return AnalogModel.from_pulses(zip(amplitudes, centers), band_edge, normalize=True)


def choose_window(
    model: AnalogModel,
    sampling_interval: float,
    threshold: float,
    tail_ratio: float = 1e-4,
    max_seconds: float = 240.0,
    guard_fraction: float = 0.1,
    max_doublings: int = 6,
) -> int:
    """
    Sceglie la semi-larghezza N_w della finestra di campionamento.

    Regola dell'inviluppo: |f(t)| <= norm * sum|a_i| / (omega_m |t - c_i|),
    quindi la finestra si estende finché l'inviluppo scende sotto
    tail_ratio * lambda, con un tetto di max_seconds. Poi raddoppia finché la
    banda di guardia esterna resta sotto lambda/2.

    Returns:
        N_w (semi-larghezza in campioni)

    Raises:
        WindowTooSmallError: Se dopo max_doublings le code superano ancora lambda/2
    """
    if threshold <= 0 or sampling_interval <= 0:
        raise InvalidArgumentError("threshold e sampling_interval devono essere positivi")

    reach = float(np.max(np.abs(model.centers))) if model.pulses else 0.0
    total = model.normalization * float(np.sum(np.abs(model.amplitudes)))
    envelope_seconds = reach + total / (model.band_edge * tail_ratio * threshold)
    seconds = min(envelope_seconds, max(max_seconds, reach + GRID_MARGIN_LOBES * np.pi / model.band_edge))
    half_width = max(1, int(math.ceil(seconds / sampling_interval)))

    for _ in range(max_doublings + 1):
        guard = max(1, int(math.ceil(guard_fraction * half_width)))
        n = np.arange(half_width - guard + 1, half_width + 1)
        tails = np.concatenate([model.evaluate(n * sampling_interval), model.evaluate(-n * sampling_interval)])
        if np.max(np.abs(tails)) < threshold / 2.0:
            return half_width
        logger.debug(f"Code oltre lambda/2 con N_w={half_width}, raddoppio la finestra")
        half_width *= 2

    raise WindowTooSmallError(
        f"Finestra insufficiente anche con N_w={half_width // 2}: code >= lambda/2"
    )


def sample(model: AnalogModel, sampling_interval: float, half_width: int) -> SampledSignal:
    """
    Campiona il modello in n*T_s per n = -N_w..N_w.

    Raises:
        InvalidArgumentError: Se T_s è sotto Nyquist o N_w < 0
    """
    if sampling_interval <= 0:
        raise InvalidArgumentError(f"T_s deve essere positivo, ricevuto {sampling_interval}")
    if 2.0 * np.pi / sampling_interval < 2.0 * model.band_edge * (1.0 - 1e-12):
        raise InvalidArgumentError(
            f"T_s={sampling_interval} sotto Nyquist per omega_m={model.band_edge}"
        )
    if half_width < 0:
        raise InvalidArgumentError(f"N_w non può essere negativo, ricevuto {half_width}")

    n = np.arange(-half_width, half_width + 1)
    return SampledSignal(
        samples=model.evaluate(n * sampling_interval),
        sampling_interval=sampling_interval,
        band_edge=model.band_edge,
    )


def modulo_fold(a: ArrayLike, threshold: float) -> Real:
    """
    Operatore modulo M_lambda(a) = (a + lambda) mod 2*lambda - lambda.

    Il risultato è sempre in [-lambda, lambda); gli ingressi già in
    [-lambda, lambda) sono restituiti bit a bit invariati.

    Raises:
        InvalidArgumentError: Se lambda <= 0
    """
    if threshold <= 0:
        raise InvalidArgumentError(f"lambda deve essere positivo, ricevuto {threshold}")
    a = np.asarray(a, dtype=float)
    period = 2.0 * threshold
    values = a - period * np.floor((a + threshold) / period)
    # il quoziente arrotondato può spostare i valori vicini ai bordi fuori intervallo
    values = np.where(values >= threshold, values - period, values)
    values = np.where(values < -threshold, values + period, values)
    return float(values) if values.ndim == 0 else values


def fold_signal(signal: SampledSignal, threshold: float) -> FoldedSignal:
    """Applica modulo_fold a ogni campione."""
    return FoldedSignal(
        samples=modulo_fold(signal.samples, threshold),
        sampling_interval=signal.sampling_interval,
        band_edge=signal.band_edge,
        threshold=threshold,
    )


def residual(signal: SampledSignal, folded: FoldedSignal) -> ResidualSequence:
    """
    Decompone f_lambda = f + z e ritorna z snappato sul reticolo 2*lambda*Z.

    Raises:
        InvalidArgumentError: Finestre diverse o campioni rumorosi
        InconsistencyError: Valore fuori reticolo oltre LATTICE_TOLERANCE
    """
    if signal.samples.shape != folded.samples.shape:
        raise InvalidArgumentError(
            f"Finestre incompatibili: {signal.samples.shape} vs {folded.samples.shape}"
        )
    if folded.noisy:
        raise InvalidArgumentError("Il residuo è definito solo per campioni senza rumore")

    period = 2.0 * folded.threshold
    diff = folded.samples - signal.samples
    multiples = np.rint(diff / period)
    deviation = np.max(np.abs(diff - multiples * period)) if diff.size else 0.0
    if deviation > LATTICE_TOLERANCE:
        raise InconsistencyError(f"Residuo fuori reticolo: scarto {deviation:.3e}")

    values = multiples * period
    nonzero = np.flatnonzero(multiples)
    half_width = (values.size - 1) // 2
    support = int(np.max(np.abs(nonzero - half_width))) if nonzero.size else 0
    return ResidualSequence(values=values, threshold=folded.threshold, support_bound=support)


def compute_support_bound(signal: SampledSignal, threshold: float) -> int:
    """
    Calcola N_lambda: il più piccolo N con |f[n]| < lambda per ogni |n| > N.

    Raises:
        WindowTooSmallError: Se un campione estremo è già >= lambda
    """
    if threshold <= 0:
        raise InvalidArgumentError(f"lambda deve essere positivo, ricevuto {threshold}")
    magnitude = np.abs(signal.samples)
    if magnitude[0] >= threshold or magnitude[-1] >= threshold:
        raise WindowTooSmallError(
            f"Campioni estremi oltre lambda={threshold}: finestra N_w={signal.half_width} troppo stretta"
        )
    over = np.flatnonzero(magnitude >= threshold)
    if over.size == 0:
        return 0
    return int(np.max(np.abs(over - signal.half_width)))


def add_noise(folded: FoldedSignal, snr_db: float, seed: int) -> FoldedSignal:
    """
    Aggiunge rumore gaussiano i.i.d. con SNR = 10 log10((||f_lambda||^2 / N) / sigma^2).

    snr_db = +inf è la sentinella "senza rumore": l'ingresso è ritornato invariato.

    Raises:
        InvalidArgumentError: Sequenza vuota o snr_db NaN / -inf
    """
    if folded.samples.size == 0:
        raise InvalidArgumentError("Sequenza vuota")
    if math.isnan(snr_db) or snr_db == -math.inf:
        raise InvalidArgumentError(f"snr_db non valido: {snr_db}")
    if snr_db == math.inf:
        return folded

    power = float(np.mean(folded.samples**2))
    variance = power / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, math.sqrt(variance), folded.samples.size)
    return replace(
        folded,
        samples=folded.samples + noise,
        noisy=True,
        noise_variance=folded.noise_variance + variance,
    )


def mse_db(estimate: ArrayLike, truth: ArrayLike) -> float:
    """
    MSE normalizzato in dB: 10 log10(||truth - estimate||^2 / ||truth||^2).

    Un rapporto sotto ROUNDOFF_FLOOR è riportato come MSE_FLOOR_DB.

    Raises:
        InvalidArgumentError: Lunghezze diverse o truth a norma nulla
    """
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise InvalidArgumentError(f"Lunghezze diverse: {estimate.shape} vs {truth.shape}")
    energy = float(np.dot(truth, truth))
    if energy == 0.0:
        raise InvalidArgumentError("truth ha norma nulla")
    error = truth - estimate
    ratio = float(np.dot(error, error)) / energy
    if ratio <= ROUNDOFF_FLOOR:
        return MSE_FLOOR_DB
    return max(10.0 * math.log10(ratio), MSE_FLOOR_DB)


def round_to_lattice(x: ArrayLike, threshold: float) -> Real:
    """
    Arrotonda al multiplo di 2*lambda più vicino (pareggi lontano da zero).

    Raises:
        InvalidArgumentError: Se lambda <= 0
    """
    if threshold <= 0:
        raise InvalidArgumentError(f"lambda deve essere positivo, ricevuto {threshold}")
    period = 2.0 * threshold
    q = np.asarray(x, dtype=float) / period
    values = np.sign(q) * np.floor(np.abs(q) + 0.5) * period
    return float(values) if values.ndim == 0 else values
