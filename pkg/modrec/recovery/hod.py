"""
Baseline a differenze di ordine superiore (unlimited sampling).

Se ||Delta^K f||_inf < lambda, il modulo delle differenze K-esime dei campioni
modulo coincide con Delta^K f. La differenza tra i due è Delta^K del residuo,
che viene integrato K volte fissando ogni costante di integrazione sul
reticolo 2*lambda*Z con i campioni iniziali della finestra (fuori dal supporto
del residuo).
"""

import logging
import math
from dataclasses import dataclass, fields, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from ..sampling.errors import DivergenceError, InvalidArgumentError
from ..sampling.signals import FoldedSignal, modulo_fold, round_to_lattice
from .base import BaseRecovery, RecoveryOutcome, RecoveryRequest
from .registry import register_method

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HodOptions:
    """
    Parametri della baseline HOD.

    Attributes:
        order: Ordine K usato quando auto_order è False
        auto_order: Sceglie il K minimo con (T_s omega_m e)^K * bound <= lambda
        bound: Stima di ||f||_inf usata dalla scelta automatica
        growth_constant: Costante di crescita delle differenze (e di default)
        max_order: Tetto per K
        quiet_lead: Campioni iniziali usati per fissare le costanti di integrazione
    """

    order: int = 1
    auto_order: bool = True
    bound: float = 1.0
    growth_constant: float = math.e
    max_order: int = 12
    quiet_lead: int = 1

    def __post_init__(self):
        if self.order < 1:
            raise InvalidArgumentError(f"order deve essere >= 1, ricevuto {self.order}")
        if self.max_order < 1:
            raise InvalidArgumentError(f"max_order deve essere >= 1, ricevuto {self.max_order}")
        if self.bound <= 0 or self.growth_constant <= 0:
            raise InvalidArgumentError("bound e growth_constant devono essere positivi")
        if self.quiet_lead < 1:
            raise InvalidArgumentError(f"quiet_lead deve essere >= 1, ricevuto {self.quiet_lead}")


def finite_difference(x, order: int) -> np.ndarray:
    """
    Differenza in avanti di ordine K: (Delta x)[n] = x[n+1] - x[n], applicata K volte.

    Raises:
        InvalidArgumentError: K < 1 o sequenza più corta di K + 1
    """
    x = np.asarray(x, dtype=float)
    if order < 1:
        raise InvalidArgumentError(f"L'ordine deve essere >= 1, ricevuto {order}")
    if x.size <= order:
        raise InvalidArgumentError(f"Sequenza di {x.size} campioni troppo corta per K={order}")
    return np.diff(x, n=order)


def difference_anchors(x, order: int) -> np.ndarray:
    """Valori iniziali [x[0], (Delta x)[0], ..., (Delta^{K-1} x)[0]]."""
    x = np.asarray(x, dtype=float)
    anchors = [x[0]]
    for k in range(1, order):
        anchors.append(np.diff(x, n=k)[0])
    return np.array(anchors)


def anti_difference(d, order: int, anchors: Sequence[float]) -> np.ndarray:
    """
    Inverte finite_difference dati i valori iniziali di ogni stadio.

    Args:
        d: Differenze di ordine K
        order: K
        anchors: [x[0], (Delta x)[0], ..., (Delta^{K-1} x)[0]]

    Returns:
        Sequenza x di lunghezza len(d) + K
    """
    if len(anchors) != order:
        raise InvalidArgumentError(f"Servono {order} valori iniziali, ricevuti {len(anchors)}")
    current = np.asarray(d, dtype=float)
    for k in range(order - 1, -1, -1):
        current = anchors[k] + np.concatenate(([0.0], np.cumsum(current)))
    return current


def choose_order(
    sampling_interval: float,
    band_edge: float,
    threshold: float,
    bound: float = 1.0,
    growth_constant: float = math.e,
    max_order: int = 12,
) -> Tuple[int, bool]:
    """
    K minimo con (T_s omega_m growth)^K * bound <= lambda.

    Returns:
        (K, raggiungibile): raggiungibile è False se la condizione non è
        soddisfabile entro max_order (K = max_order in quel caso)
    """
    ratio = sampling_interval * band_edge * growth_constant
    if bound <= threshold:
        return 1, True
    if ratio >= 1.0:
        return max_order, False
    order = max(1, math.ceil(math.log(threshold / bound) / math.log(ratio)))
    if order > max_order:
        return max_order, False
    return order, True


def precondition_holds(truth, order: int, threshold: float) -> bool:
    """Verifica ||Delta^K f||_inf < lambda sui campioni veri."""
    truth = np.asarray(truth, dtype=float)
    if truth.size <= order:
        return False
    return bool(np.max(np.abs(finite_difference(truth, order))) < threshold)


def resolve_order(folded: FoldedSignal, opts: HodOptions) -> Tuple[int, bool]:
    """Ordine effettivo per un segnale (automatico o fissato)."""
    if not opts.auto_order:
        return opts.order, True
    return choose_order(
        folded.sampling_interval,
        folded.band_edge,
        folded.threshold,
        bound=opts.bound,
        growth_constant=opts.growth_constant,
        max_order=opts.max_order,
    )


def hod_recover(folded: FoldedSignal, opts: Optional[HodOptions] = None, anchor: Optional[float] = None) -> np.ndarray:
    """
    Recupera i campioni veri con differenze di ordine K e integrazione su reticolo.

    Args:
        folded: Campioni modulo
        opts: Parametri HOD
        anchor: Valore noto di f al primo indice (default: il campione modulo,
                corretto se il primo indice è fuori dal supporto del residuo)

    Returns:
        Stima dei campioni veri

    Raises:
        InvalidArgumentError: Finestra più corta di K + 1
    """
    opts = opts or HodOptions()
    order, reachable = resolve_order(folded, opts)
    if not reachable:
        logger.debug(f"HOD: condizione sull'ordine non soddisfacibile, uso K={order}")

    y = folded.samples
    threshold = folded.threshold
    if y.size <= order:
        raise InvalidArgumentError(f"Finestra di {y.size} campioni troppo corta per K={order}")

    diffs = finite_difference(y, order)
    # Delta^K del residuo, cambiato di segno: Delta^K f - Delta^K y
    stage = round_to_lattice(modulo_fold(diffs, threshold) - diffs, threshold)

    lead = max(1, min(opts.quiet_lead, y.size - order))
    for k in range(order - 1, -1, -1):
        partial = np.concatenate(([0.0], np.cumsum(stage)))
        if k == 0 and anchor is not None:
            constant = round_to_lattice(anchor - y[0], threshold)
        else:
            # i campioni iniziali sono fuori dal supporto: Delta^k del residuo vi è nullo
            constant = round_to_lattice(float(np.median(-partial[:lead])), threshold)
        stage = round_to_lattice(partial + constant, threshold)

    return y + stage


HOD_OPTION_NAMES = frozenset(f.name for f in fields(HodOptions))


@register_method
class HodMethod(BaseRecovery):
    """
    Baseline HOD come metodo del registry.

    Le costanti di integrazione usano i campioni iniziali fuori dal supporto
    N_lambda della richiesta; il recupero è segnalato come non convergente se
    l'ordine richiesto non è raggiungibile o se, con la verità disponibile,
    ||Delta^K f||_inf >= lambda.
    """

    name = "hod"
    description = "Differenze di ordine superiore con integrazione su reticolo (unlimited sampling)"
    option_names = HOD_OPTION_NAMES

    def __init__(self, **options):
        super().__init__(**options)
        self.hod = HodOptions(**options)

    def options_for(self, request: RecoveryRequest, order: int) -> HodOptions:
        quiet = request.folded.half_width - request.n_lambda - order
        return replace(self.hod, quiet_lead=max(self.hod.quiet_lead, quiet, 1))

    def precondition(self, request: RecoveryRequest) -> Tuple[bool, str]:
        order, reachable = resolve_order(request.folded, self.hod)
        if not reachable:
            return False, f"(T_s omega_m e)^K * bound > lambda per ogni K <= {self.hod.max_order}"
        if request.truth is not None and not precondition_holds(request.truth, order, request.folded.threshold):
            return False, f"||Delta^{order} f||_inf >= lambda"
        return True, f"K={order}"

    def recover(self, request: RecoveryRequest) -> RecoveryOutcome:
        order, _ = resolve_order(request.folded, self.hod)
        valid, message = self.precondition(request)
        samples = hod_recover(request.folded, self.options_for(request, order))
        if not np.all(np.isfinite(samples)):
            raise DivergenceError(f"HOD: valori non finiti con K={order}")
        if not valid:
            logger.debug(f"HOD: precondizione violata ({message})")
        return RecoveryOutcome(
            samples=samples,
            converged=valid,
            method=self.name,
            message=message,
            order=order,
        )
