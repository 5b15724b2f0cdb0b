"""
Logger factory per modrec.

Fornisce creazione centralizzata dei logger con:
- Configurazione coerente (LoggingConfig)
- Console handler su stderr (stdout è riservato ai dati della CLI)
- File handler opzionale
- Prevenzione duplicati
"""

import logging
import sys
from pathlib import Path
from typing import Dict, Optional

from ..sampling.app_config import LoggingConfig

FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class LoggerFactory:
    """
    Cache dei logger configurati.

    Un logger configurato una volta viene restituito invariato alle chiamate
    successive, salvo force_reconfigure. I worker di processo dello sweep non lo
    usano: loggano tramite logging.getLogger(__name__).
    """

    _configured_loggers: Dict[str, logging.Logger] = {}

    @classmethod
    def get_logger(
        cls,
        name: str,
        config: Optional[LoggingConfig] = None,
        log_file: Optional[str] = None,
        level: Optional[str] = None,
        force_reconfigure: bool = False,
    ) -> logging.Logger:
        """
        Ottiene o crea un logger configurato.

        Args:
            name: Nome del logger (tipicamente "modrec", padre dei logger di modulo)
            config: LoggingConfig (opzionale se il logger esiste già)
            log_file: Override path file log (abilita il file handler)
            level: Override livello log (DEBUG, INFO, WARNING, ERROR)
            force_reconfigure: Se True, riconfigura logger esistente

        Returns:
            Logger configurato
        """
        if name in cls._configured_loggers and not force_reconfigure:
            return cls._configured_loggers[name]

        log_config = config or LoggingConfig()
        actual_level = (level or log_config.level).upper()
        if not isinstance(getattr(logging, actual_level, None), int):
            actual_level = "INFO"
        actual_file = log_file
        if actual_file is None and log_config.log_to_file:
            actual_file = str(Path(log_config.log_dir) / f"{name}.log")

        logger = logging.getLogger(name)
        logger.setLevel(getattr(logging, actual_level))

        if force_reconfigure:
            for handler in list(logger.handlers):
                handler.close()
            logger.handlers.clear()

        if not logger.handlers:
            cls._add_handlers(logger, actual_file, actual_level)

        cls._configured_loggers[name] = logger
        return logger

    @staticmethod
    def _add_handlers(logger: logging.Logger, log_file: Optional[str], level: str) -> None:
        """Aggiunge console handler ed eventualmente file handler"""
        formatter = logging.Formatter(FORMAT)

        if log_file:
            log_path = Path(log_file)
            log_path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_path, encoding="utf-8")
            file_handler.setLevel(getattr(logging, level))
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(getattr(logging, level))
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    @classmethod
    def reset(cls):
        """Reset per testing - rimuove tutti i logger configurati"""
        for logger in cls._configured_loggers.values():
            for handler in list(logger.handlers):
                handler.close()
            logger.handlers.clear()
        cls._configured_loggers.clear()
