"""
Registry dei metodi di recupero.

Gestisce la registrazione e la creazione dei metodi disponibili per nome.
"""

from typing import Dict, List, Mapping, Optional, Type
import logging

from ..sampling.errors import InvalidArgumentError
from .base import BaseRecovery

logger = logging.getLogger(__name__)

# Registry globale dei metodi
_methods: Dict[str, Type[BaseRecovery]] = {}


def register_method(method_class: type) -> type:
    """
    Decorator per registrare un metodo nel registry.

    Uso:
        @register_method
        class MyMethod(BaseRecovery):
            name = "my_method"
            ...

    Args:
        method_class: Classe che estende BaseRecovery

    Returns:
        La classe stessa (permette uso come decorator)
    """
    if not issubclass(method_class, BaseRecovery):
        raise TypeError(f"{method_class} deve estendere BaseRecovery")

    # Istanzia per validare il nome
    name = method_class().name

    if name in _methods:
        logger.warning(f"Metodo '{name}' già registrato, sovrascrivo")

    _methods[name] = method_class
    logger.debug(f"Metodo registrato: {name} -> {method_class.__name__}")

    return method_class


def get_method(name: str) -> Optional[Type[BaseRecovery]]:
    """
    Ottiene la classe di un metodo per nome.

    Returns:
        Classe del metodo o None se non trovato
    """
    method = _methods.get(name)
    if not method:
        logger.warning(f"Metodo '{name}' non trovato. Disponibili: {list(_methods.keys())}")
    return method


def create_method(name: str, options: Optional[Mapping] = None) -> BaseRecovery:
    """
    Istanzia un metodo con le sue opzioni.

    Raises:
        InvalidArgumentError: Metodo sconosciuto o opzioni non valide
    """
    method_class = _methods.get(name)
    if method_class is None:
        raise InvalidArgumentError(
            f"Metodo '{name}' sconosciuto. Disponibili: {', '.join(sorted(_methods))}"
        )
    return method_class(**dict(options or {}))


def list_methods() -> List[Dict[str, str]]:
    """
    Lista tutti i metodi registrati.

    Returns:
        [{'name': '...', 'description': '...'}, ...]
    """
    return [
        {'name': cls.name, 'description': cls.description}
        for cls in _methods.values()
    ]


def get_all_methods() -> Dict[str, Type[BaseRecovery]]:
    """Dict nome -> classe del metodo."""
    return _methods.copy()


# Auto-import dei metodi per registrarli
def _auto_register():
    """Importa i moduli dei metodi per registrarli."""
    from . import b2r2  # noqa: F401
    from . import hod  # noqa: F401


# Esegui auto-registrazione all'import del modulo
_auto_register()
