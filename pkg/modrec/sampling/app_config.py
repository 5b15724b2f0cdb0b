"""
Configurazione centralizzata per modrec.

Single source of truth per i parametri di default di segnali, recupero e
harness. Carica da config.yaml con override da variabili ambiente.
"""

import math
import os
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional
from pathlib import Path

import yaml
from dotenv import load_dotenv

logger = logging.getLogger(__name__)


@dataclass
class SignalConfig:
    """Parametri del modello di segnale e della finestra."""

    band_edge: float = math.pi  # omega_m in rad/s
    num_pulses: int = 32
    center_spread: float = 32.0  # Secondi
    tail_ratio: float = 1e-4  # |f| < tail_ratio * lambda ai bordi
    max_window_seconds: float = 240.0  # Tetto della regola dell'inviluppo


@dataclass
class SpectralConfig:
    """Griglia di frequenza."""

    grid_factor: int = 4  # M >= grid_factor * lunghezza finestra


@dataclass
class PgdConfig:
    """Parametri B2R2."""

    max_iters: int = 2000
    rel_cost_tol: float = 1e-12
    armijo_c: float = 1e-4
    shrink: float = 0.5
    gamma_init: float = 2.0
    direction: str = "conjugate"  # conjugate | gradient
    grad_tol: float = 1e-10
    peel_init: str = "previous"
    edge_margin_min: float = 0.5


@dataclass
class HodConfig:
    """Parametri della baseline HOD."""

    auto_order: bool = True
    order: int = 1
    bound: float = 1.0  # Stima di ||f||_inf (segnali a picco unitario)
    growth_constant: float = math.e
    max_order: int = 12


@dataclass
class BenchConfig:
    """Parametri dell'harness Monte-Carlo."""

    parallelism: int = 1
    executor: str = "process"  # process | thread
    desk_trials: int = 50  # Trial per cella con preset desk
    refine_inband: bool = True  # Proiezione in banda dei campioni recuperati (solo con rumore)


@dataclass
class LoggingConfig:
    """Configurazione logging."""

    level: str = "INFO"
    log_dir: str = "logs"
    log_to_file: bool = False


@dataclass
class AppConfig:
    """Configurazione principale dell'applicazione."""

    signal: SignalConfig = field(default_factory=SignalConfig)
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    pgd: PgdConfig = field(default_factory=PgdConfig)
    hod: HodConfig = field(default_factory=HodConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)

    @classmethod
    def load(cls, config_path: Optional[str] = None) -> "AppConfig":
        """
        Carica configurazione da YAML + env vars.

        Priorità:
        1. Variabili ambiente (massima priorità)
        2. File config.yaml
        3. Valori default

        Args:
            config_path: Path al file config.yaml. Se None, cerca in ordine:
                        - $MODREC_CONFIG
                        - ./config.yaml
                        - config.yaml nella root del progetto

        Returns:
            Istanza AppConfig configurata
        """
        load_dotenv()
        yaml_config: Dict[str, Any] = {}

        # Cerca config.yaml
        if config_path is None:
            possible_paths = [
                Path(os.getenv("MODREC_CONFIG", "")) if os.getenv("MODREC_CONFIG") else None,
                Path("config.yaml"),
                Path(__file__).parent.parent.parent / "config.yaml",  # Root progetto
            ]
            for p in possible_paths:
                if p is not None and p.exists():
                    config_path = str(p)
                    break

        # Carica YAML se trovato
        if config_path and Path(config_path).exists():
            try:
                with open(config_path, "r", encoding="utf-8") as f:
                    yaml_config = yaml.safe_load(f) or {}
                logger.debug(f"Configurazione caricata da {config_path}")
            except Exception as e:
                logger.warning(f"Errore caricamento {config_path}: {e}")

        return cls(
            signal=cls._load_signal_config(yaml_config),
            spectral=cls._load_spectral_config(yaml_config),
            pgd=cls._load_pgd_config(yaml_config),
            hod=cls._load_hod_config(yaml_config),
            bench=cls._load_bench_config(yaml_config),
            logging=cls._load_logging_config(yaml_config),
        )

    @classmethod
    def _load_signal_config(cls, yaml_config: dict) -> SignalConfig:
        """Carica configurazione segnale."""
        signal_yaml = yaml_config.get("signal", {})
        defaults = SignalConfig()

        return SignalConfig(
            band_edge=float(signal_yaml.get("band_edge", defaults.band_edge)),
            num_pulses=int(signal_yaml.get("num_pulses", defaults.num_pulses)),
            center_spread=float(signal_yaml.get("center_spread", defaults.center_spread)),
            tail_ratio=float(signal_yaml.get("tail_ratio", defaults.tail_ratio)),
            max_window_seconds=float(signal_yaml.get("max_window_seconds", defaults.max_window_seconds)),
        )

    @classmethod
    def _load_spectral_config(cls, yaml_config: dict) -> SpectralConfig:
        """Carica configurazione griglia spettrale."""
        spectral_yaml = yaml_config.get("spectral", {})

        return SpectralConfig(grid_factor=int(spectral_yaml.get("grid_factor", 4)))

    @classmethod
    def _load_pgd_config(cls, yaml_config: dict) -> PgdConfig:
        """Carica configurazione B2R2."""
        pgd_yaml = yaml_config.get("pgd", {})
        defaults = PgdConfig()

        return PgdConfig(
            max_iters=int(pgd_yaml.get("max_iters", defaults.max_iters)),
            rel_cost_tol=float(pgd_yaml.get("rel_cost_tol", defaults.rel_cost_tol)),
            armijo_c=float(pgd_yaml.get("armijo_c", defaults.armijo_c)),
            shrink=float(pgd_yaml.get("shrink", defaults.shrink)),
            gamma_init=float(pgd_yaml.get("gamma_init", defaults.gamma_init)),
            direction=str(pgd_yaml.get("direction", defaults.direction)),
            grad_tol=float(pgd_yaml.get("grad_tol", defaults.grad_tol)),
            peel_init=str(pgd_yaml.get("peel_init", defaults.peel_init)),
            edge_margin_min=float(pgd_yaml.get("edge_margin_min", defaults.edge_margin_min)),
        )

    @classmethod
    def _load_hod_config(cls, yaml_config: dict) -> HodConfig:
        """Carica configurazione HOD."""
        hod_yaml = yaml_config.get("hod", {})
        defaults = HodConfig()

        return HodConfig(
            auto_order=bool(hod_yaml.get("auto_order", defaults.auto_order)),
            order=int(hod_yaml.get("order", defaults.order)),
            bound=float(hod_yaml.get("bound", defaults.bound)),
            growth_constant=float(hod_yaml.get("growth_constant", defaults.growth_constant)),
            max_order=int(hod_yaml.get("max_order", defaults.max_order)),
        )

    @classmethod
    def _load_bench_config(cls, yaml_config: dict) -> BenchConfig:
        """Carica configurazione harness."""
        bench_yaml = yaml_config.get("bench", {})

        return BenchConfig(
            parallelism=int(os.getenv("MODREC_THREADS", bench_yaml.get("parallelism", 1))),
            executor=os.getenv("MODREC_EXECUTOR", bench_yaml.get("executor", "process")),
            desk_trials=int(bench_yaml.get("desk_trials", 50)),
            refine_inband=bool(bench_yaml.get("refine_inband", True)),
        )

    @classmethod
    def _load_logging_config(cls, yaml_config: dict) -> LoggingConfig:
        """Carica configurazione logging."""
        log_yaml = yaml_config.get("logging", {})

        return LoggingConfig(
            level=os.getenv("MODREC_LOG_LEVEL", log_yaml.get("level", "INFO")),
            log_dir=os.getenv("MODREC_LOG_DIR", log_yaml.get("log_dir", "logs")),
            log_to_file=bool(log_yaml.get("log_to_file", False)),
        )

    def method_defaults(self) -> Dict[str, Dict[str, Any]]:
        """Opzioni di default per metodo, nel formato del registry."""
        b2r2 = asdict(self.pgd)
        b2r2["grid_factor"] = self.spectral.grid_factor
        return {"b2r2": b2r2, "hod": asdict(self.hod)}


# Singleton per accesso globale
_config: Optional[AppConfig] = None


def get_config() -> AppConfig:
    """
    Ottiene l'istanza singleton della configurazione.

    Returns:
        AppConfig configurata
    """
    global _config
    if _config is None:
        _config = AppConfig.load()
    return _config


def reload_config(config_path: Optional[str] = None) -> AppConfig:
    """
    Ricarica la configurazione (utile per test).

    Args:
        config_path: Path opzionale al file config

    Returns:
        Nuova AppConfig
    """
    global _config
    _config = AppConfig.load(config_path)
    return _config
