"""
B2R2: recupero del residuo dal contenuto spettrale fuori banda.

Per ogni livello N del supporto:
1. discesa proiettata con backtracking di Armijo su
   C(z) = 1/2 ||F_rho f_hat - F_rho z||^2, z in S_N
2. arrotondamento della stima al reticolo 2*lambda*Z
3. f_hat <- f_hat - z_hat, N <- N - 1 (peeling dai bordi verso l'interno)

Il costo è quadratico su S_N: C(z) = 1/2 (c - 2 z.g + z.A z) con
A = P_S F*_rho F_rho P_S. A è una Toeplitz simmetrica costruita dal nucleo
passa-alto della banda, quindi un'iterazione costa un solo prodotto A p.

A ha circa |S_N| / OF autovalori vicini a zero (sequenze concentrate in banda
sul supporto): la direzione di default è il gradiente coniugato, che li
risolve in un numero di iterazioni dell'ordine del loro conteggio.
"""

import logging
import math
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import toeplitz
from scipy.signal import fftconvolve

from ..sampling.errors import DivergenceError, InvalidArgumentError, WindowTooSmallError
from ..sampling.signals import FoldedSignal, round_to_lattice
from ..sampling.spectral import GRID_FACTOR, SpectralBand, highpass_project, out_of_band_energy
from .base import BaseRecovery, RecoveryOutcome, RecoveryRequest
from .registry import register_method

logger = logging.getLogger(__name__)

# Oltre questa dimensione di S_N il prodotto A p passa dalla matrice densa alla FFT
DENSE_LIMIT = 1601

# Ogni quante iterazioni il gradiente ristretto viene ricalcolato da zero
RESYNC_EVERY = 64

# Passo minimo del backtracking prima di considerare la discesa ferma
MIN_STEP = 1e-16


class PeelInit(str, Enum):
    """Punto iniziale della PGD dopo ogni peel."""

    PREVIOUS = "previous"  # stima non arrotondata riportata sul nuovo f_hat
    ROUNDED = "rounded"  # stima arrotondata proiettata su S_{N-1}
    FRESH = "fresh"  # init_guess sul nuovo f_hat


class Direction(str, Enum):
    """Direzione di discesa su S_N."""

    GRADIENT = "gradient"  # gradiente proiettato, primo tentativo gamma_init
    CONJUGATE = "conjugate"  # gradiente coniugato, primo tentativo il passo esatto


@dataclass(frozen=True)
class PgdOptions:
    """
    Parametri della discesa del gradiente proiettata.

    Attributes:
        max_iters: Iterazioni massime per peel
        rel_cost_tol: Soglia sulla diminuzione relativa del costo
        armijo_c: Costante di Armijo, in (0, 1/2)
        shrink: Fattore beta di riduzione del passo
        gamma_init: Passo iniziale del backtracking con direction="gradient"
        direction: "conjugate" (default) o "gradient"
        grad_tol: Arresto quando ||P_S grad C|| <= grad_tol * ||P_S F*_rho F_rho f_lambda||
    """

    max_iters: int = 2000
    rel_cost_tol: float = 1e-12
    armijo_c: float = 1e-4
    shrink: float = 0.5
    gamma_init: float = 2.0
    direction: str = Direction.CONJUGATE.value
    grad_tol: float = 1e-10

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidArgumentError(f"max_iters deve essere >= 1, ricevuto {self.max_iters}")
        if not 0.0 < self.shrink < 1.0:
            raise InvalidArgumentError(f"shrink deve essere in (0, 1), ricevuto {self.shrink}")
        if not 0.0 < self.armijo_c < 0.5:
            raise InvalidArgumentError(f"armijo_c deve essere in (0, 0.5), ricevuto {self.armijo_c}")
        if self.gamma_init <= 0:
            raise InvalidArgumentError(f"gamma_init deve essere positivo, ricevuto {self.gamma_init}")
        if self.rel_cost_tol < 0:
            raise InvalidArgumentError(f"rel_cost_tol non può essere negativo, ricevuto {self.rel_cost_tol}")
        if self.grad_tol < 0:
            raise InvalidArgumentError(f"grad_tol non può essere negativo, ricevuto {self.grad_tol}")
        try:
            Direction(self.direction)
        except ValueError:
            choices = ", ".join(d.value for d in Direction)
            raise InvalidArgumentError(f"direction non valida: {self.direction} (ammesse: {choices})")


@dataclass(frozen=True, eq=False)
class PgdResult:
    """Esito di una PGD su un singolo livello."""

    estimate: np.ndarray
    iterations: int
    cost: float
    converged: bool
    hit_max_iters: bool


@dataclass(frozen=True, eq=False)
class PeelRecord:
    """
    Diagnostica di un peel.

    Attributes:
        level: N del supporto S_N
        iterations: Iterazioni PGD usate
        cost: Costo finale della PGD
        converged: True se la PGD si è fermata su una tolleranza
        hit_max_iters: True se la PGD ha esaurito max_iters
        edge_margin: min ai bordi di 1 - |z - round(z)| / lambda, in [0, 1]
        snapshot: Stima arrotondata su S_N (None se non richiesta)
    """

    level: int
    iterations: int
    cost: float
    converged: bool
    hit_max_iters: bool
    edge_margin: float
    snapshot: Optional[np.ndarray] = None


@dataclass
class RecoveryTrace:
    """
    Sequenza dei peel con livelli N_lambda, N_lambda - 1, ..., 1.

    Il recupero è considerato convergente quando ogni PGD si è fermata su una
    tolleranza e ogni arrotondamento ai bordi ha margine almeno edge_margin_min.
    """

    records: List[PeelRecord] = field(default_factory=list)
    edge_margin_min: float = 0.5
    final_cost: float = 0.0

    @property
    def flagged(self) -> List[PeelRecord]:
        """Peel con margine ai bordi sotto soglia (arrotondamento a rischio)."""
        return [r for r in self.records if r.edge_margin < self.edge_margin_min]

    @property
    def stalled(self) -> List[PeelRecord]:
        """Peel la cui PGD ha esaurito max_iters."""
        return [r for r in self.records if r.hit_max_iters]

    @property
    def converged(self) -> bool:
        return not self.flagged and not self.stalled

    @property
    def levels(self) -> List[int]:
        return [r.level for r in self.records]

    @property
    def total_iterations(self) -> int:
        return sum(r.iterations for r in self.records)


class SupportOperator:
    """
    A = P_S F*_rho F_rho P_S ristretto a S_N.

    Per supporti piccoli è una matrice di Toeplitz densa; i livelli interni
    riusano sotto-blocchi della stessa matrice.
    """

    def __init__(self, band: SpectralBand, half_width: int, matrix: Optional[np.ndarray] = None):
        self.band = band
        self.half_width = half_width
        size = 2 * half_width + 1
        if matrix is None and size <= DENSE_LIMIT:
            matrix = toeplitz(band.lag_kernel(2 * half_width))
        self._matrix = matrix
        self._taps = None
        if matrix is None:
            lags = np.arange(-2 * half_width, 2 * half_width + 1)
            self._taps = band.kernel[lags % band.grid_size]

    def restricted(self, half_width: int) -> "SupportOperator":
        """Operatore su S_M con M <= N."""
        if half_width > self.half_width:
            raise InvalidArgumentError(f"Livello {half_width} oltre il supporto {self.half_width}")
        if self._matrix is None:
            return SupportOperator(self.band, half_width)
        k = self.half_width - half_width
        size = 2 * half_width + 1
        return SupportOperator(self.band, half_width, self._matrix[k : k + size, k : k + size])

    def matvec(self, v: np.ndarray) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix @ v
        n = self.half_width
        return fftconvolve(self._taps, v, mode="full")[2 * n : 4 * n + 1]


def _check_windows(z: np.ndarray, f: np.ndarray) -> None:
    if z.shape != f.shape:
        raise InvalidArgumentError(f"Finestre diverse: {z.shape} vs {f.shape}")


def cost(z, f_lambda, band: SpectralBand) -> float:
    """C(z) = 1/2 ||F_rho f_lambda - F_rho z||^2 con il peso della griglia."""
    z = np.asarray(z, dtype=float)
    f_lambda = np.asarray(f_lambda, dtype=float)
    _check_windows(z, f_lambda)
    return 0.5 * out_of_band_energy(f_lambda - z, band)


def gradient(z, f_lambda, band: SpectralBand) -> np.ndarray:
    """Gradiente di C: F*_rho F_rho (z - f_lambda)."""
    z = np.asarray(z, dtype=float)
    f_lambda = np.asarray(f_lambda, dtype=float)
    _check_windows(z, f_lambda)
    return highpass_project(z - f_lambda, band)


def support_project(y, half_width: int) -> np.ndarray:
    """Azzera i campioni con |n| > N."""
    if half_width < 0:
        raise InvalidArgumentError(f"N non può essere negativo, ricevuto {half_width}")
    y = np.asarray(y, dtype=float)
    center = (y.size - 1) // 2
    out = np.zeros_like(y)
    lo = max(0, center - half_width)
    hi = min(y.size, center + half_width + 1)
    out[lo:hi] = y[lo:hi]
    return out


def init_guess(f_lambda, half_width: int, band: SpectralBand) -> np.ndarray:
    """z0 = P_{S_N}(F*_rho F_rho f_lambda)."""
    return support_project(highpass_project(f_lambda, band), half_width)


def _descend(
    operator: SupportOperator,
    g: np.ndarray,
    zs: np.ndarray,
    current: float,
    opts: PgdOptions,
    history: Optional[List[float]] = None,
) -> Tuple[np.ndarray, int, float, bool]:
    """
    Discesa nelle coordinate di S_N, con zs modificato sul posto.

    Il gradiente ristretto è r = A zs - g. Ogni iterazione sceglie una
    direzione d (r, oppure r + beta d con beta di Polak-Ribière+), poi il
    passo con backtracking di Armijo finché
    C(zs - gamma d) <= C(zs) - c gamma <r, d>, valutando il costo di prova
    dallo sviluppo quadratico esatto
    C(zs - gamma d) = C(zs) - gamma <r, d> + gamma^2 / 2 <d, A d>.

    Returns:
        (zs, iterazioni, costo finale, convergenza su una tolleranza)
    """
    conjugate = Direction(opts.direction) is Direction.CONJUGATE
    level = operator.half_width
    g_norm = math.sqrt(float(np.dot(g, g)))

    r = operator.matvec(zs) - g
    d = r
    rr = float(np.dot(r, r))
    if history is not None:
        history.append(current)

    iterations = 0
    converged = False
    while iterations < opts.max_iters:
        if not math.isfinite(current) or not math.isfinite(rr):
            raise DivergenceError(f"Costo non finito al livello N={level}")
        if rr == 0.0 or math.sqrt(rr) <= opts.grad_tol * g_norm:
            converged = True
            break

        Ad = operator.matvec(d)
        slope = float(np.dot(r, d))
        curvature = float(np.dot(d, Ad))
        if slope <= 0.0:
            # d non è più di discesa: ripartenza dal gradiente
            d, Ad = r, operator.matvec(r)
            slope, curvature = rr, float(np.dot(r, Ad))
        if curvature <= 0.0:
            converged = True
            break

        gamma = slope / curvature if conjugate else opts.gamma_init
        decrease = -gamma * slope + 0.5 * gamma * gamma * curvature
        while decrease > -opts.armijo_c * gamma * slope:
            gamma *= opts.shrink
            if gamma < MIN_STEP:
                break
            decrease = -gamma * slope + 0.5 * gamma * gamma * curvature
        if not math.isfinite(decrease):
            raise DivergenceError(f"Passo non finito al livello N={level}")
        if gamma < MIN_STEP:
            converged = True
            break

        zs -= gamma * d
        r_prev, rr_prev = r, rr
        r = r - gamma * Ad
        iterations += 1
        if iterations % RESYNC_EVERY == 0:
            r = operator.matvec(zs) - g
        rr = float(np.dot(r, r))

        previous, current = current, max(current + decrease, 0.0)
        if history is not None:
            history.append(current)
        if previous > 0.0 and (previous - current) / previous < opts.rel_cost_tol:
            converged = True
            break

        if conjugate:
            beta = max(0.0, (rr - float(np.dot(r, r_prev))) / rr_prev)
            d = r + beta * d
        else:
            d = r

    if not math.isfinite(current):
        raise DivergenceError(f"Costo non finito al livello N={level}")
    return zs, iterations, current, converged


def run_pgd(
    f_lambda,
    half_width: int,
    band: SpectralBand,
    opts: Optional[PgdOptions] = None,
    z0=None,
    operator: Optional[SupportOperator] = None,
    history: Optional[List[float]] = None,
) -> PgdResult:
    """
    PGD su S_N con backtracking di Armijo.

    La proiezione su S_N è la restrizione alle coordinate |n| <= N, quindi la
    discesa lavora direttamente sui 2N+1 campioni del supporto. Con
    direction="gradient" ogni passo parte da gamma_init lungo il gradiente
    proiettato; con "conjugate" parte dal passo esatto lungo la direzione
    coniugata, che soddisfa Armijo per ogni armijo_c < 1/2.

    Args:
        f_lambda: Sequenza osservata sulla finestra
        half_width: N del supporto
        band: Banda rho
        opts: Parametri (default PgdOptions())
        z0: Punto iniziale in S_N (default zero)
        operator: Operatore A già costruito per S_N
        history: Se fornita, riceve il costo a ogni iterazione (incluso z0)

    Returns:
        PgdResult con la stima non arrotondata

    Raises:
        InvalidArgumentError: z0 fuori da S_N o N oltre la finestra
        DivergenceError: Costo non finito
    """
    opts = opts or PgdOptions()
    f_lambda = np.asarray(f_lambda, dtype=float)
    center = (f_lambda.size - 1) // 2
    if half_width < 0 or half_width > center:
        raise InvalidArgumentError(f"N={half_width} fuori dalla finestra di semi-larghezza {center}")

    window = slice(center - half_width, center + half_width + 1)
    z = np.zeros_like(f_lambda)
    if z0 is not None:
        z0 = np.asarray(z0, dtype=float)
        _check_windows(z0, f_lambda)
        outside = np.ones(f_lambda.size, dtype=bool)
        outside[window] = False
        if np.any(z0[outside]):
            raise InvalidArgumentError("z0 deve appartenere a S_N")
        z[window] = z0[window]

    if operator is None:
        operator = SupportOperator(band, half_width)
    g = highpass_project(f_lambda, band)[window]
    zs, iterations, current, converged = _descend(
        operator, g, z[window].copy(), cost(z, f_lambda, band), opts, history
    )

    z[window] = zs
    return PgdResult(
        estimate=z,
        iterations=iterations,
        cost=current,
        converged=converged,
        hit_max_iters=not converged and iterations >= opts.max_iters,
    )


def pgd_solve(f_lambda, half_width: int, band: SpectralBand, opts: PgdOptions, z0) -> np.ndarray:
    """Stima non arrotondata del residuo su S_N (vedi run_pgd)."""
    return run_pgd(f_lambda, half_width, band, opts, z0).estimate


def _edge_margin(unrounded: np.ndarray, rounded: np.ndarray, threshold: float) -> float:
    edges = [0, -1]
    gaps = np.abs(unrounded[edges] - rounded[edges]) / threshold
    return float(np.clip(1.0 - np.max(gaps), 0.0, 1.0))


def b2r2_recover(
    folded: FoldedSignal,
    n_lambda: int,
    band: SpectralBand,
    opts: Optional[PgdOptions] = None,
    *,
    peel_init: PeelInit = PeelInit.PREVIOUS,
    edge_margin_min: float = 0.5,
    keep_snapshots: bool = True,
) -> Tuple[np.ndarray, RecoveryTrace]:
    """
    Recupera i campioni veri dai campioni modulo con peeling del supporto.

    P_{S_N} F*_rho F_rho f_hat e C(0) sono calcolati una volta sulla finestra e
    poi aggiornati per linearità a ogni peel: sottrarre z_hat da f_hat toglie
    A z_hat dal primo e z_hat.(g - A z_hat / 2) dal secondo.

    Args:
        folded: Campioni modulo (eventualmente rumorosi)
        n_lambda: Semi-larghezza del supporto del residuo
        band: Banda rho compatibile con la finestra
        opts: Parametri PGD
        peel_init: Punto iniziale dopo ogni peel
        edge_margin_min: Margine sotto cui un peel è segnalato nel trace
        keep_snapshots: Conserva la stima arrotondata di ogni peel

    Returns:
        (campioni recuperati, trace)

    Raises:
        WindowTooSmallError: n_lambda oltre la semi-larghezza della finestra
        DivergenceError: Costo non finito (con la stima parziale allegata)
    """
    opts = opts or PgdOptions()
    peel_init = PeelInit(peel_init)
    if n_lambda < 0:
        raise InvalidArgumentError(f"N_lambda non può essere negativo, ricevuto {n_lambda}")
    if n_lambda > folded.half_width:
        raise WindowTooSmallError(
            f"N_lambda={n_lambda} oltre la semi-larghezza della finestra {folded.half_width}"
        )
    band.check_window(folded.samples.size)

    threshold = folded.threshold
    center = folded.half_width
    f_hat = folded.samples.copy()
    trace = RecoveryTrace(edge_margin_min=edge_margin_min)
    if n_lambda == 0:
        trace.final_cost = cost(np.zeros_like(f_hat), f_hat, band)
        return f_hat, trace

    operator = SupportOperator(band, n_lambda)
    g = highpass_project(f_hat, band)[center - n_lambda : center + n_lambda + 1]
    empty_cost = cost(np.zeros_like(f_hat), f_hat, band)
    level = n_lambda
    local = operator
    zs = g.copy()

    while level > 0:
        inner = slice(n_lambda - level, n_lambda + level + 1)
        local = local.restricted(level)
        g_level = g[inner]
        current = max(empty_cost - float(np.dot(zs, g_level)) + 0.5 * float(np.dot(zs, local.matvec(zs))), 0.0)
        try:
            zs, iterations, current, converged = _descend(local, g_level, zs, current, opts)
        except DivergenceError as exc:
            raise DivergenceError(str(exc), partial=f_hat.copy()) from exc

        rounded = round_to_lattice(zs, threshold)
        margin = _edge_margin(zs, rounded, threshold)
        hit_max_iters = not converged and iterations >= opts.max_iters
        trace.records.append(
            PeelRecord(
                level=level,
                iterations=iterations,
                cost=current,
                converged=converged,
                hit_max_iters=hit_max_iters,
                edge_margin=margin,
                snapshot=rounded.copy() if keep_snapshots else None,
            )
        )
        logger.debug(f"Peel N={level}: iterazioni={iterations}, costo={current:.3e}, margine={margin:.3f}")

        if np.any(rounded):
            step = np.zeros_like(g)
            step[inner] = rounded
            shift = operator.matvec(step)
            empty_cost = max(empty_cost - float(np.dot(step, g)) + 0.5 * float(np.dot(step, shift)), 0.0)
            g = g - shift
            f_hat[center - level : center + level + 1] -= rounded

        level -= 1
        if peel_init is PeelInit.PREVIOUS:
            zs = (zs - rounded)[1:-1]
        elif peel_init is PeelInit.ROUNDED:
            zs = rounded[1:-1].copy()
        else:
            zs = g[n_lambda - level : n_lambda + level + 1].copy()

    trace.final_cost = cost(np.zeros_like(f_hat), f_hat, band)
    if not trace.converged:
        logger.info(
            f"B2R2: {len(trace.flagged)}/{len(trace.records)} peel con margine sotto {edge_margin_min}, "
            f"{len(trace.stalled)} senza convergenza ({trace.total_iterations} iterazioni)"
        )
    return f_hat, trace


PGD_OPTION_NAMES = frozenset(f.name for f in fields(PgdOptions))


@register_method
class B2R2Method(BaseRecovery):
    """B2R2 come metodo del registry, con banda costruita sulla finestra della richiesta."""

    name = "b2r2"
    description = "PGD sul residuo fuori banda con arrotondamento a 2*lambda*Z e peeling"
    option_names = PGD_OPTION_NAMES | {"peel_init", "edge_margin_min", "grid_factor", "keep_snapshots"}

    def __init__(self, **options):
        super().__init__(**options)
        self.pgd = PgdOptions(**{k: v for k, v in options.items() if k in PGD_OPTION_NAMES})
        try:
            self.peel_init = PeelInit(options.get("peel_init", PeelInit.PREVIOUS))
        except ValueError:
            choices = ", ".join(p.value for p in PeelInit)
            raise InvalidArgumentError(f"peel_init non valido: {options['peel_init']} (ammessi: {choices})")
        self.edge_margin_min = float(options.get("edge_margin_min", 0.5))
        if not 0.0 <= self.edge_margin_min <= 1.0:
            raise InvalidArgumentError(f"edge_margin_min deve essere in [0, 1], ricevuto {self.edge_margin_min}")
        self.grid_factor = int(options.get("grid_factor", GRID_FACTOR))
        if self.grid_factor < 1:
            raise InvalidArgumentError(f"grid_factor deve essere >= 1, ricevuto {self.grid_factor}")
        self.keep_snapshots = bool(options.get("keep_snapshots", False))

    def band_for(self, folded: FoldedSignal) -> SpectralBand:
        return SpectralBand.for_window(
            folded.band_edge, folded.sampling_interval, folded.samples.size, self.grid_factor
        )

    def recover(self, request: RecoveryRequest) -> RecoveryOutcome:
        samples, trace = b2r2_recover(
            request.folded,
            request.n_lambda,
            self.band_for(request.folded),
            self.pgd,
            peel_init=self.peel_init,
            edge_margin_min=self.edge_margin_min,
            keep_snapshots=self.keep_snapshots,
        )
        message = (
            f"{len(trace.records)} peel, {trace.total_iterations} iterazioni, "
            f"{len(trace.flagged)} segnalati, {len(trace.stalled)} senza convergenza"
        )
        return RecoveryOutcome(
            samples=samples,
            converged=trace.converged,
            method=self.name,
            message=message,
            trace=trace,
        )
