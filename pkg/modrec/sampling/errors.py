"""
Gerarchia di eccezioni del pacchetto modrec.

Tutte le eccezioni derivano da ModuloError, così chi chiama può intercettare
in un solo punto qualsiasi errore di dominio.
"""

from typing import Optional

import numpy as np


class ModuloError(Exception):
    """Errore base del dominio modulo-sampling."""


class InvalidArgumentError(ModuloError, ValueError):
    """Argomento fuori dominio (lambda <= 0, lunghezze incompatibili, ...)."""


class EmptyBandError(InvalidArgumentError):
    """La regione fuori banda rho è vuota (OF <= 1)."""


class WindowTooSmallError(ModuloError):
    """La finestra di campionamento non contiene code entro il range dinamico."""


class InconsistencyError(ModuloError):
    """Violazione di un invariante interno (residuo fuori reticolo, spettro non simmetrico)."""


class DivergenceError(ModuloError):
    """
    Costo non finito durante la discesa del gradiente.

    Attributes:
        partial: Ultima stima valida dei campioni, se disponibile
    """

    def __init__(self, message: str, partial: Optional[np.ndarray] = None):
        super().__init__(message)
        self.partial = partial


class TableParseError(ModuloError):
    """
    File CSV malformato.

    Attributes:
        line: Numero di riga (1-based) del file in cui è stato trovato l'errore
    """

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"riga {line}: {message}"
        super().__init__(message)
