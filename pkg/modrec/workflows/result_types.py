"""
Result types per l'harness Monte-Carlo.

Fornisce risultati tipizzati con:
- Cell: coordinate di una cella della griglia (lambda, OF, SNR, metodo)
- TrialReport immutabile per ogni trial
- CellSummary e SweepTable per l'aggregazione
"""

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

import pandas as pd

from ..sampling.errors import InconsistencyError

TABLE_COLUMNS = ["lambda", "of", "snr_db", "method", "trials", "failures", "mean_mse_db"]

RAW_COLUMNS = [
    "lambda",
    "of",
    "snr_db",
    "method",
    "trial",
    "seed",
    "mse_db",
    "converged",
    "n_lambda",
    "n_w",
    "wall_time_s",
]


@dataclass(frozen=True, order=True)
class Cell:
    """
    Coordinate di una cella.

    Attributes:
        threshold: lambda
        oversampling: OF
        snr_db: SNR in dB (math.inf = senza rumore)
        method: Nome del metodo nel registry
    """

    threshold: float
    oversampling: float
    snr_db: float
    method: str

    @property
    def noiseless(self) -> bool:
        return self.snr_db == math.inf


@dataclass(frozen=True)
class TrialReport:
    """
    Risultato di un singolo trial.

    Attributes:
        cell: Coordinate della cella
        trial: Indice del trial nella cella
        seed: Seed del rumore (hash di base_seed, cella e trial)
        mse_db: MSE normalizzato, sempre finito (MSE_FLOOR_DB per stime esatte;
            0.0 se la simulazione è fallita, vedi simulated)
        converged: False se il metodo ha segnalato o sollevato un errore
        n_lambda: Support bound usato dal metodo
        n_w: Semi-larghezza della finestra (0 se la simulazione è fallita)
        wall_time_s: Durata (esclusa dal confronto)
        error: Messaggio dell'eccezione catturata, se presente
    """

    cell: Cell
    trial: int
    seed: int
    mse_db: float
    converged: bool
    n_lambda: int
    n_w: int
    wall_time_s: float = field(default=0.0, compare=False)
    error: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if not math.isfinite(self.mse_db):
            raise InconsistencyError(f"mse_db non finito: {self.mse_db}")

    @property
    def simulated(self) -> bool:
        """False se il segnale non è stato generato: nessun MSE da aggregare."""
        return self.n_w > 0

    def to_row(self) -> Dict[str, object]:
        return {
            "lambda": self.cell.threshold,
            "of": self.cell.oversampling,
            "snr_db": self.cell.snr_db,
            "method": self.cell.method,
            "trial": self.trial,
            "seed": self.seed,
            "mse_db": self.mse_db,
            "converged": self.converged,
            "n_lambda": self.n_lambda,
            "n_w": self.n_w,
            "wall_time_s": self.wall_time_s,
        }


@dataclass(frozen=True)
class CellSummary:
    """Aggregato di una cella: media esatta dei trial e numero di fallimenti."""

    cell: Cell
    trials: int
    failures: int
    mean_mse_db: float

    @property
    def failure_rate(self) -> float:
        return self.failures / self.trials if self.trials else 0.0


@dataclass(frozen=True)
class SweepTable:
    """
    Tabella aggregata di uno sweep, una riga per cella nell'ordine di esecuzione.
    """

    cells: Tuple[CellSummary, ...] = ()

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self) -> Iterator[CellSummary]:
        return iter(self.cells)

    @classmethod
    def from_reports(cls, reports: Iterable[TrialReport], expected_trials: Optional[int] = None) -> "SweepTable":
        """
        Aggrega i report per cella.

        La media è calcolata con math.fsum sui report ordinati per indice di
        trial, quindi non dipende dall'ordine di arrivo. I trial con simulazione
        fallita contano come fallimenti ma restano fuori dalla media; una cella
        senza trial simulati ha media 0.0.

        Raises:
            InconsistencyError: Trial duplicati o mancanti in una cella
        """
        grouped: "OrderedDict[Cell, List[TrialReport]]" = OrderedDict()
        for report in reports:
            grouped.setdefault(report.cell, []).append(report)

        summaries = []
        for cell, items in grouped.items():
            items.sort(key=lambda r: r.trial)
            indices = [r.trial for r in items]
            if len(set(indices)) != len(indices):
                raise InconsistencyError(f"Trial duplicati nella cella {cell}")
            if expected_trials is not None and indices != list(range(expected_trials)):
                raise InconsistencyError(
                    f"Cella {cell}: attesi {expected_trials} trial, ricevuti {len(indices)}"
                )
            measured = [r.mse_db for r in items if r.simulated]
            mean = math.fsum(measured) / len(measured) if measured else 0.0
            summaries.append(
                CellSummary(
                    cell=cell,
                    trials=len(items),
                    failures=sum(1 for r in items if not r.converged),
                    mean_mse_db=mean,
                )
            )
        return cls(cells=tuple(summaries))

    def lookup(self, threshold: float, oversampling: float, snr_db: float, method: str) -> Optional[CellSummary]:
        """Cerca una cella per coordinate esatte."""
        target = Cell(threshold, oversampling, snr_db, method)
        for summary in self.cells:
            if summary.cell == target:
                return summary
        return None

    def methods(self) -> List[str]:
        return list(dict.fromkeys(s.cell.method for s in self.cells))

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "lambda": s.cell.threshold,
                "of": s.cell.oversampling,
                "snr_db": s.cell.snr_db,
                "method": s.cell.method,
                "trials": s.trials,
                "failures": s.failures,
                "mean_mse_db": s.mean_mse_db,
            }
            for s in self.cells
        ]
        return pd.DataFrame(rows, columns=TABLE_COLUMNS)

    def pivot(self) -> pd.DataFrame:
        """Vista per il report: righe (lambda, OF), colonne (metodo, SNR)."""
        frame = self.to_frame()
        if frame.empty:
            return frame
        return frame.pivot_table(
            index=["lambda", "of"],
            columns=["method", "snr_db"],
            values="mean_mse_db",
            aggfunc="first",
            sort=True,
        )
