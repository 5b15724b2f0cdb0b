"""
Persistenza CSV: tabelle di sweep, report per-trial, segnali e recuperi.

Tutti i file sono UTF-8, separatore ',', decimale '.', fine riga '\\n'.
I float sono scritti con la repr più corta che ne garantisce la rilettura
esatta; il caso senza rumore è 'inf'.
"""

import io
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from ..sampling.errors import ModuloError, TableParseError
from ..sampling.signals import FoldedSignal
from .result_types import RAW_COLUMNS, TABLE_COLUMNS, Cell, CellSummary, SweepTable, TrialReport

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SIGNAL_METADATA = (
    "lambda",
    "of",
    "band_edge",
    "sampling_interval",
    "snr_db",
    "seed",
    "n_lambda",
    "n_w",
    "noisy",
    "noise_variance",
)
REQUIRED_METADATA = ("lambda", "sampling_interval", "band_edge")


def format_float(value: float) -> str:
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def _format_bool(value: bool) -> str:
    return "true" if value else "false"


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1"):
        return True
    if lowered in ("false", "0"):
        return False
    raise ValueError(f"booleano non valido: {text!r}")


def _write_frame(frame: pd.DataFrame, path: PathLike, header_lines: Iterable[str] = ()) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        for line in header_lines:
            handle.write(f"{line}\n")
        frame.to_csv(handle, index=False, lineterminator="\n")


def _read_frame(source: Union[PathLike, io.StringIO], first_line: int = 1) -> pd.DataFrame:
    """Legge un CSV come stringhe; first_line è la riga del file che contiene l'header."""
    try:
        return pd.read_csv(source, dtype=str, na_filter=False, skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        raise TableParseError("file vuoto, header mancante", line=first_line)
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        line = first_line + int(match.group(1)) - 1 if match else None
        raise TableParseError(f"riga malformata ({e})", line=line)


def _check_header(frame: pd.DataFrame, expected: List[str], line: int) -> None:
    if list(frame.columns) != expected:
        raise TableParseError(
            f"header {','.join(map(str, frame.columns))} diverso da {','.join(expected)}", line=line
        )


def _parse_rows(frame: pd.DataFrame, first_row_line: int, parse_row: Callable[[Dict[str, str]], object]) -> list:
    parsed = []
    for offset, row in enumerate(frame.to_dict("records")):
        line = first_row_line + offset
        if any(not isinstance(v, str) or v == "" for v in row.values()):
            raise TableParseError("campo mancante", line=line)
        try:
            parsed.append(parse_row(row))
        except (ValueError, ModuloError) as e:
            raise TableParseError(str(e), line=line)
    return parsed


# === Tabella di sweep ===


def save_table(table: SweepTable, path: PathLike) -> None:
    """Scrive la tabella (solo header se vuota)."""
    frame = pd.DataFrame(
        [
            {
                "lambda": format_float(s.cell.threshold),
                "of": format_float(s.cell.oversampling),
                "snr_db": format_float(s.cell.snr_db),
                "method": s.cell.method,
                "trials": str(int(s.trials)),
                "failures": str(int(s.failures)),
                "mean_mse_db": format_float(s.mean_mse_db),
            }
            for s in table
        ],
        columns=TABLE_COLUMNS,
    )
    _write_frame(frame, path)
    logger.debug(f"Tabella salvata: {path} ({len(table)} celle)")


def _parse_summary(row: Dict[str, str]) -> CellSummary:
    trials, failures = int(row["trials"]), int(row["failures"])
    if trials < 1 or not 0 <= failures <= trials:
        raise ValueError(f"trials={trials}, failures={failures} non coerenti")
    return CellSummary(
        cell=Cell(float(row["lambda"]), float(row["of"]), float(row["snr_db"]), row["method"]),
        trials=trials,
        failures=failures,
        mean_mse_db=float(row["mean_mse_db"]),
    )


def load_table(path: PathLike) -> SweepTable:
    """
    Legge una tabella scritta da save_table (o equivalente a mano).

    Raises:
        TableParseError: Header o righe malformate, con numero di riga
        OSError: File non leggibile
    """
    frame = _read_frame(path)
    _check_header(frame, TABLE_COLUMNS, line=1)
    return SweepTable(cells=tuple(_parse_rows(frame, 2, _parse_summary)))


# === Report per-trial ===


def save_reports(reports: Iterable[TrialReport], path: PathLike) -> None:
    """CSV per-trial; wall_time_s è l'unica colonna non deterministica."""
    rows = []
    for r in reports:
        row = r.to_row()
        rows.append(
            {
                "lambda": format_float(row["lambda"]),
                "of": format_float(row["of"]),
                "snr_db": format_float(row["snr_db"]),
                "method": row["method"],
                "trial": str(row["trial"]),
                "seed": str(row["seed"]),
                "mse_db": format_float(row["mse_db"]),
                "converged": _format_bool(row["converged"]),
                "n_lambda": str(row["n_lambda"]),
                "n_w": str(row["n_w"]),
                "wall_time_s": f"{row['wall_time_s']:.6f}",
            }
        )
    _write_frame(pd.DataFrame(rows, columns=RAW_COLUMNS), path)


def _parse_report(row: Dict[str, str]) -> TrialReport:
    return TrialReport(
        cell=Cell(float(row["lambda"]), float(row["of"]), float(row["snr_db"]), row["method"]),
        trial=int(row["trial"]),
        seed=int(row["seed"]),
        mse_db=float(row["mse_db"]),
        converged=_parse_bool(row["converged"]),
        n_lambda=int(row["n_lambda"]),
        n_w=int(row["n_w"]),
        wall_time_s=float(row["wall_time_s"]),
    )


def load_reports(path: PathLike) -> List[TrialReport]:
    """Rilegge un CSV per-trial."""
    frame = _read_frame(path)
    _check_header(frame, RAW_COLUMNS, line=1)
    return _parse_rows(frame, 2, _parse_report)


# === Segnali ===


@dataclass(frozen=True, eq=False)
class SignalFile:
    """
    Contenuto di un signal CSV.

    Attributes:
        folded: Campioni modulo con i parametri di campionamento
        truth: Campioni veri (colonna f), se presenti
        metadata: Righe '# chiave=valore'
    """

    folded: FoldedSignal
    truth: Optional[np.ndarray] = None
    metadata: Dict[str, str] = field(default_factory=dict)

    @property
    def n_lambda(self) -> Optional[int]:
        value = self.metadata.get("n_lambda")
        return int(value) if value not in (None, "") else None

    @property
    def indices(self) -> np.ndarray:
        return self.folded.indices


def write_signal(
    path: PathLike,
    folded: FoldedSignal,
    truth: Optional[np.ndarray] = None,
    metadata: Optional[Dict[str, object]] = None,
) -> None:
    """
    Scrive un signal CSV: righe '# chiave=valore' poi colonne n,f,f_lambda.
    """
    meta: Dict[str, str] = {
        "lambda": format_float(folded.threshold),
        "of": format_float(folded.oversampling),
        "band_edge": format_float(folded.band_edge),
        "sampling_interval": format_float(folded.sampling_interval),
        "n_w": str(folded.half_width),
        "noisy": _format_bool(folded.noisy),
        "noise_variance": format_float(folded.noise_variance),
    }
    for key, value in (metadata or {}).items():
        meta[key] = format_float(value) if isinstance(value, float) else str(value)
    ordered = [k for k in SIGNAL_METADATA if k in meta] + sorted(k for k in meta if k not in SIGNAL_METADATA)

    columns = {"n": [str(int(n)) for n in folded.indices]}
    if truth is not None:
        truth = np.asarray(truth, dtype=float)
        if truth.shape != folded.samples.shape:
            raise ValueError(f"Lunghezze diverse: {truth.shape} vs {folded.samples.shape}")
        columns["f"] = [format_float(v) for v in truth]
    columns["f_lambda"] = [format_float(v) for v in folded.samples]

    _write_frame(pd.DataFrame(columns), path, header_lines=[f"# {k}={meta[k]}" for k in ordered])


def read_signal(path: PathLike) -> SignalFile:
    """
    Legge un signal CSV.

    Raises:
        TableParseError: Metadati mancanti, colonne errate o indici non contigui
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    metadata: Dict[str, str] = {}
    header_at = 0
    for number, line in enumerate(lines, start=1):
        if not line.startswith("#"):
            break
        header_at = number
        body = line[1:].strip()
        if not body:
            continue
        if "=" not in body:
            raise TableParseError(f"metadato senza '=': {body!r}", line=number)
        key, value = body.split("=", 1)
        metadata[key.strip()] = value.strip()

    missing = [k for k in REQUIRED_METADATA if k not in metadata]
    if missing:
        raise TableParseError(f"metadati mancanti: {', '.join(missing)}", line=header_at or 1)

    header_line = header_at + 1
    frame = _read_frame(io.StringIO("\n".join(lines[header_at:])), first_line=header_line)
    columns = list(frame.columns)
    if columns not in (["n", "f", "f_lambda"], ["n", "f_lambda"]):
        raise TableParseError(f"colonne attese n,f,f_lambda (f opzionale), trovate {','.join(columns)}", line=header_line)

    def parse_row(row):
        return int(row["n"]), float(row.get("f", "nan")), float(row["f_lambda"])

    rows = _parse_rows(frame, header_line + 1, parse_row)
    if not rows:
        raise TableParseError("nessun campione", line=header_line)
    n = np.array([r[0] for r in rows])
    half = (n.size - 1) // 2
    expected = np.arange(-half, half + 1)
    if n.size % 2 == 0 or not np.array_equal(n, expected):
        bad = int(np.flatnonzero(n != expected)[0]) if n.size == expected.size else n.size - 1
        raise TableParseError("indici n non contigui o finestra non centrata", line=header_line + 1 + bad)

    try:
        folded = FoldedSignal(
            samples=np.array([r[2] for r in rows]),
            sampling_interval=float(metadata["sampling_interval"]),
            band_edge=float(metadata["band_edge"]),
            threshold=float(metadata["lambda"]),
            noisy=_parse_bool(metadata.get("noisy", "false")),
            noise_variance=float(metadata.get("noise_variance", "0.0")),
        )
    except (ValueError, ModuloError) as e:
        raise TableParseError(f"segnale non valido: {e}")

    truth = np.array([r[1] for r in rows]) if "f" in columns else None
    return SignalFile(folded=folded, truth=truth, metadata=metadata)


def write_recovery(
    path: PathLike,
    estimate: np.ndarray,
    folded: FoldedSignal,
    truth: Optional[np.ndarray] = None,
) -> None:
    """Scrive n,f_hat,f_lambda[,f] per il confronto delle forme d'onda."""
    columns = {
        "n": [str(int(n)) for n in folded.indices],
        "f_hat": [format_float(v) for v in estimate],
        "f_lambda": [format_float(v) for v in folded.samples],
    }
    if truth is not None:
        columns["f"] = [format_float(v) for v in truth]
    _write_frame(pd.DataFrame(columns), path)
