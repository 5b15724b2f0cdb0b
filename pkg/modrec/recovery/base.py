"""
Classe base astratta per i metodi di recupero.

Ogni metodo deve estendere questa classe, definire name e implementare recover().
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Optional, Tuple
import logging

import numpy as np

from ..sampling.errors import InvalidArgumentError
from ..sampling.signals import FoldedSignal

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RecoveryRequest:
    """
    Input di un recupero.

    Attributes:
        folded: Campioni modulo (eventualmente rumorosi)
        n_lambda: Semi-larghezza del supporto del residuo
        truth: Campioni veri, se disponibili (solo diagnostica)
    """

    folded: FoldedSignal
    n_lambda: int
    truth: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class RecoveryOutcome:
    """
    Esito di un recupero.

    Attributes:
        samples: Campioni recuperati
        converged: False se il metodo ha segnalato un fallimento
        method: Nome del metodo
        message: Dettaglio leggibile
        trace: Diagnostica specifica del metodo (RecoveryTrace per B2R2)
        order: Ordine delle differenze (solo HOD)
    """

    samples: np.ndarray
    converged: bool
    method: str
    message: str = ""
    trace: Any = None
    order: Optional[int] = None


class BaseRecovery(ABC):
    """
    Classe base per i metodi di recupero da campioni modulo.

    Per aggiungere un metodo:
    1. Estendi questa classe
    2. Definisci name, description e option_names
    3. Implementa recover()
    4. Registra la classe con @register_method

    Esempio:
        @register_method
        class ClipMethod(BaseRecovery):
            name = "clip"
            option_names = frozenset({"gain"})

            def recover(self, request):
                return RecoveryOutcome(request.folded.samples, True, self.name)
    """

    # Identificatore unico del metodo (deve essere definito nelle sottoclassi)
    name: str = None

    # Descrizione per help CLI
    description: str = ""

    # Opzioni accettate dal costruttore
    option_names: FrozenSet[str] = frozenset()

    def __init__(self, **options):
        """Inizializza il metodo e valida le opzioni."""
        if not self.name:
            raise ValueError(f"{self.__class__.__name__} deve definire 'name'")
        unknown = sorted(set(options) - self.option_names)
        if unknown:
            raise InvalidArgumentError(
                f"Opzioni sconosciute per '{self.name}': {', '.join(unknown)}"
            )
        self.options: Dict[str, Any] = dict(options)

    @abstractmethod
    def recover(self, request: RecoveryRequest) -> RecoveryOutcome:
        """
        Recupera i campioni veri.

        Args:
            request: Campioni modulo, N_lambda e verità opzionale

        Returns:
            RecoveryOutcome

        Raises:
            ModuloError: Se il recupero non può essere completato
        """
        pass

    def precondition(self, request: RecoveryRequest) -> Tuple[bool, str]:
        """
        Verifica le condizioni di validità del metodo sulla richiesta.

        Returns:
            (valido, messaggio)
        """
        return True, ""

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__}(name='{self.name}')>"
