"""
Protocol interfaces per l'harness.

Permettono di iniettare un esecutore di trial alternativo in SweepService
(testing con implementazioni mock).
"""

from typing import Protocol, runtime_checkable

from .result_types import Cell, TrialReport


@runtime_checkable
class TrialRunnerProtocol(Protocol):
    """Protocollo per l'esecuzione di un singolo trial"""

    def __call__(self, config, cell: Cell, trial_index: int) -> TrialReport:
        """Esegue il trial (config, cella, indice) in modo deterministico"""
        ...
