"""
Configurazione degli esperimenti Monte-Carlo.

Fornisce:
- ExperimentConfig: griglia (lambda, OF, SNR), trial, seed, parametri di segnale e metodi
- ConfigLoader: parsing JSON con chiavi snake_case, validazione completa
  (tutti gli errori riportati insieme), default da AppConfig, preset desk/full
- Risoluzione delle griglie incluse nel pacchetto (fig2, fig3, fig4)
"""

import json
import math
import threading
from dataclasses import MISSING, dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from ..recovery import create_method, list_methods
from ..sampling.app_config import AppConfig, get_config
from ..sampling.errors import InvalidArgumentError

EXPERIMENTS_DIR = Path(__file__).resolve().parent.parent / "experiments"

PRESETS = ("desk", "full")


class ConfigurationError(Exception):
    """
    Eccezione per errori di configurazione.

    Attributes:
        errors: Lista di tutti i problemi rilevati
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors: List[str] = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Definizione di uno sweep.

    Attributes:
        lambdas: Soglie lambda
        ofs: Fattori di sovracampionamento (> 1)
        snr_dbs: SNR in dB, math.inf = senza rumore
        trials: Trial per cella
        base_seed: Seed di base
        num_pulses: Impulsi sinc per segnale
        center_spread: Ampiezza dell'intervallo dei centri (s)
        band_edge: omega_m (rad/s)
        tail_ratio: Regola dell'inviluppo per la finestra
        max_window_seconds: Tetto della finestra (s)
        n_lambda_margin: Campioni aggiunti a N_lambda prima del recupero
        methods: Nomi dei metodi
        method_options: Opzioni per metodo
        refine_inband: Proietta in banda le stime dei trial rumorosi
    """

    lambdas: Tuple[float, ...]
    ofs: Tuple[float, ...]
    snr_dbs: Tuple[float, ...]
    trials: int = 250
    base_seed: int = 0
    num_pulses: int = 32
    center_spread: float = 32.0
    band_edge: float = math.pi
    tail_ratio: float = 1e-4
    max_window_seconds: float = 240.0
    n_lambda_margin: int = 0
    methods: Tuple[str, ...] = ("b2r2", "hod")
    method_options: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    refine_inband: bool = True

    def __post_init__(self):
        for name in ("lambdas", "ofs", "snr_dbs", "methods"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        errors = self.problems()
        if errors:
            raise ConfigurationError(errors)

    def problems(self) -> List[str]:
        """Elenca tutti i vincoli violati."""
        return check_experiment({f.name: getattr(self, f.name) for f in fields(self)})

    @property
    def cell_count(self) -> int:
        return len(self.lambdas) * len(self.ofs) * len(self.snr_dbs) * len(self.methods)

    def options_for(self, method: str) -> Dict[str, Any]:
        return dict(self.method_options.get(method, {}))

    def with_preset(self, preset: Optional[str], desk_trials: int = 50) -> "ExperimentConfig":
        """
        Applica un preset: desk limita i trial per cella a desk_trials, full li lascia invariati.
        """
        if preset is None or preset == "full":
            return self
        if preset == "desk":
            return replace(self, trials=min(self.trials, desk_trials))
        raise ConfigurationError([f"Preset sconosciuto: {preset} (ammessi: {', '.join(PRESETS)})"])


FIELD_NAMES = tuple(f.name for f in fields(ExperimentConfig))
REQUIRED_KEYS = ("lambdas", "ofs", "snr_dbs")


def check_experiment(values: Mapping[str, Any]) -> List[str]:
    """
    Vincoli di ExperimentConfig su valori anche parziali.

    Le chiavi assenti prendono il default del campo; lambdas, ofs e snr_dbs
    assenti non sono controllate (from_dict le segnala come mancanti).
    """
    merged: Dict[str, Any] = {}
    for f in fields(ExperimentConfig):
        if f.default is not MISSING:
            merged[f.name] = f.default
        elif f.default_factory is not MISSING:
            merged[f.name] = f.default_factory()
    merged.update(values)

    errors = []
    for name in ("lambdas", "ofs", "snr_dbs", "methods"):
        if name in merged and not merged[name]:
            errors.append(f"'{name}' non può essere vuota")
    errors += [f"lambda deve essere positivo, ricevuto {v}" for v in merged.get("lambdas", ()) if not v > 0]
    errors += [f"OF deve essere > 1, ricevuto {v}" for v in merged.get("ofs", ()) if not v > 1]
    errors += [
        f"snr_db non valido: {v}" for v in merged.get("snr_dbs", ()) if math.isnan(v) or v == -math.inf
    ]
    if merged["trials"] < 1:
        errors.append(f"trials deve essere >= 1, ricevuto {merged['trials']}")
    if merged["base_seed"] < 0:
        errors.append(f"base_seed non può essere negativo, ricevuto {merged['base_seed']}")
    if merged["num_pulses"] < 1:
        errors.append(f"num_pulses deve essere >= 1, ricevuto {merged['num_pulses']}")
    if merged["center_spread"] < 0:
        errors.append(f"center_spread non può essere negativo, ricevuto {merged['center_spread']}")
    if not merged["band_edge"] > 0:
        errors.append(f"band_edge deve essere positivo, ricevuto {merged['band_edge']}")
    if not merged["tail_ratio"] > 0 or not merged["max_window_seconds"] > 0:
        errors.append("tail_ratio e max_window_seconds devono essere positivi")
    if merged["n_lambda_margin"] < 0:
        errors.append(f"n_lambda_margin non può essere negativo, ricevuto {merged['n_lambda_margin']}")

    known = {m["name"] for m in list_methods()}
    for method in merged["methods"]:
        if method not in known:
            errors.append(f"Metodo '{method}' sconosciuto. Disponibili: {', '.join(sorted(known))}")
    for method, options in merged["method_options"].items():
        if method not in known:
            errors.append(f"method_options per metodo sconosciuto '{method}'")
            continue
        try:
            create_method(method, options)
        except (InvalidArgumentError, TypeError) as e:
            errors.append(f"method_options.{method}: {e}")
    return errors


def parse_snr(value: Any) -> float:
    """Converte un SNR JSON: numeri, "inf" o null (senza rumore)."""
    if value is None:
        return math.inf
    if isinstance(value, bool):
        raise ValueError(f"SNR non valido: {value!r}")
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        raise ValueError(f"SNR non valido: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    raise ValueError(f"SNR non valido: {value!r}")


class ConfigLoader:
    """
    Gestione centralizzata delle configurazioni di esperimento.

    Singleton con cache LRU sui file letti. Thread-safe.
    """

    _instance = None
    _lock = threading.Lock()

    def __new__(cls):
        """Singleton pattern per cache configurazione"""
        if cls._instance is None:
            with cls._lock:
                if cls._instance is None:
                    cls._instance = super().__new__(cls)
        return cls._instance

    @staticmethod
    def resolve_path(name_or_path: str) -> Path:
        """
        Risolve un path esplicito o il nome di una griglia inclusa (fig2, fig3.json, ...).

        Raises:
            ConfigurationError: Se il file non esiste
        """
        path = Path(name_or_path)
        if path.exists():
            return path
        bundled = EXPERIMENTS_DIR / (path.name if path.suffix == ".json" else f"{path.name}.json")
        if bundled.exists():
            return bundled
        available = ", ".join(sorted(p.stem for p in EXPERIMENTS_DIR.glob("*.json")))
        raise ConfigurationError(
            [f"File configurazione non trovato: {name_or_path} (griglie incluse: {available})"]
        )

    @staticmethod
    def load(
        name_or_path: str,
        preset: Optional[str] = None,
        app_config: Optional[AppConfig] = None,
    ) -> ExperimentConfig:
        """
        Carica e valida una configurazione JSON.

        Args:
            name_or_path: Percorso file o nome di una griglia inclusa
            preset: desk | full | None
            app_config: Sorgente dei default (get_config() se None)

        Returns:
            ExperimentConfig completa

        Raises:
            ConfigurationError: Con la lista di tutti i problemi trovati
        """
        path = ConfigLoader.resolve_path(name_or_path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                raw = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError([f"Errore parsing JSON {path} (riga {e.lineno}): {e.msg}"])

        app_config = app_config or get_config()
        config = ConfigLoader.from_dict(raw, app_config)
        return config.with_preset(preset, app_config.bench.desk_trials)

    @staticmethod
    @lru_cache(maxsize=8)
    def load_cached(name_or_path: str, preset: Optional[str] = None) -> ExperimentConfig:
        """
        Carica configurazione con caching LRU.

        NOTA: Il cache NON si invalida se il file cambia.
        """
        return ConfigLoader.load(name_or_path, preset)

    @staticmethod
    def clear_cache():
        """Invalida cache configurazione"""
        ConfigLoader.load_cached.cache_clear()

    @staticmethod
    def from_dict(raw: Any, app_config: Optional[AppConfig] = None) -> ExperimentConfig:
        """
        Costruisce ExperimentConfig da un dizionario JSON.

        Chiavi sconosciute, tipi errati e vincoli violati sono raccolti e
        sollevati insieme.
        """
        if not isinstance(raw, Mapping):
            raise ConfigurationError(["La configurazione deve essere un oggetto JSON"])
        app_config = app_config or get_config()
        errors: List[str] = []

        unknown = sorted(set(raw) - set(FIELD_NAMES))
        errors += [f"Chiave sconosciuta: '{key}'" for key in unknown]
        errors += [f"Chiave mancante: '{key}'" for key in REQUIRED_KEYS if key not in raw]

        values: Dict[str, Any] = {
            "num_pulses": app_config.signal.num_pulses,
            "center_spread": app_config.signal.center_spread,
            "band_edge": app_config.signal.band_edge,
            "tail_ratio": app_config.signal.tail_ratio,
            "max_window_seconds": app_config.signal.max_window_seconds,
            "refine_inband": app_config.bench.refine_inband,
        }

        for key in ("lambdas", "ofs"):
            if key in raw:
                parsed_list = ConfigLoader._float_list(raw[key], key, errors)
                if parsed_list is not None:
                    values[key] = parsed_list
        if "snr_dbs" in raw:
            items = raw["snr_dbs"] if isinstance(raw["snr_dbs"], list) else None
            if items is None:
                errors.append("'snr_dbs' deve essere una lista")
            else:
                parsed = []
                for item in items:
                    try:
                        parsed.append(parse_snr(item))
                    except ValueError as e:
                        errors.append(str(e))
                values["snr_dbs"] = parsed

        for key in ("trials", "base_seed", "num_pulses", "n_lambda_margin"):
            if key in raw:
                if isinstance(raw[key], int) and not isinstance(raw[key], bool):
                    values[key] = raw[key]
                else:
                    errors.append(f"'{key}' deve essere un intero, ricevuto {raw[key]!r}")
        for key in ("center_spread", "band_edge", "tail_ratio", "max_window_seconds"):
            if key in raw:
                if isinstance(raw[key], (int, float)) and not isinstance(raw[key], bool):
                    values[key] = float(raw[key])
                else:
                    errors.append(f"'{key}' deve essere un numero, ricevuto {raw[key]!r}")
        if "refine_inband" in raw:
            if isinstance(raw["refine_inband"], bool):
                values["refine_inband"] = raw["refine_inband"]
            else:
                errors.append("'refine_inband' deve essere true o false")

        if "methods" in raw:
            methods = raw["methods"]
            if isinstance(methods, list) and all(isinstance(m, str) for m in methods):
                values["methods"] = methods
            else:
                errors.append("'methods' deve essere una lista di nomi")

        user_options = raw.get("method_options", {})
        if not isinstance(user_options, Mapping) or not all(
            isinstance(v, Mapping) for v in user_options.values()
        ):
            errors.append("'method_options' deve mappare nomi di metodo a oggetti")
            user_options = {}
        defaults = app_config.method_defaults()
        methods = values.get("methods", list(ExperimentConfig.__dataclass_fields__["methods"].default))
        options: Dict[str, Dict[str, Any]] = {}
        for method in dict.fromkeys(list(methods) + list(user_options)):
            merged = dict(defaults.get(method, {}))
            merged.update(user_options.get(method, {}))
            options[method] = merged
        values["method_options"] = options

        errors += check_experiment(values)
        if errors:
            raise ConfigurationError(errors)
        return ExperimentConfig(**values)

    @staticmethod
    def _float_list(value: Any, key: str, errors: List[str]) -> Optional[List[float]]:
        if not isinstance(value, list):
            errors.append(f"'{key}' deve essere una lista")
            return None
        result = []
        for item in value:
            if isinstance(item, (int, float)) and not isinstance(item, bool):
                result.append(float(item))
            else:
                errors.append(f"'{key}' contiene un valore non numerico: {item!r}")
        return result
