"""
Servizio di sweep Monte-Carlo.

Orchestra l'esecuzione di tutte le celle x trial di una ExperimentConfig:
1. Enumerazione dei task in ordine fisso (lambda -> OF -> SNR -> metodo -> trial)
2. Esecuzione inline o su executor (process/thread) con map che preserva l'ordine
3. Aggregazione deterministica in SweepTable

Features:
- Dependency Injection del trial runner (testabilità)
- Output indipendente dal parallelismo
"""

import logging
import time
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from itertools import product
from typing import Iterator, List, Optional, Tuple

from .config import ConfigurationError, ExperimentConfig
from .interfaces import TrialRunnerProtocol
from .result_types import Cell, SweepTable, TrialReport
from .trial import run_trial

logger = logging.getLogger(__name__)

EXECUTORS = ("process", "thread")

Task = Tuple[ExperimentConfig, Cell, int]


def _execute(task: Task) -> TrialReport:
    config, cell, trial_index = task
    return run_trial(config, cell, trial_index)


class SweepService:
    """
    Servizio orchestratore per uno sweep.

    Usage:
        service = SweepService(config)
        table = service.run(parallelism=4)
        reports = service.reports  # report per-trial dell'ultima esecuzione

        # Con runner custom (testing, solo inline o thread)
        service = SweepService(config, runner=fake_runner, executor="thread")
    """

    def __init__(
        self,
        config: ExperimentConfig,
        executor: str = "process",
        runner: Optional[TrialRunnerProtocol] = None,
        logger: Optional[logging.Logger] = None,
    ):
        """
        Args:
            config: Configurazione dello sweep
            executor: process | thread
            runner: Esecutore di trial alternativo (default run_trial)
            logger: Logger (opzionale)
        """
        if executor not in EXECUTORS:
            raise ConfigurationError([f"Executor sconosciuto: {executor} (ammessi: {', '.join(EXECUTORS)})"])
        self.config = config
        self.executor = executor
        self._runner = runner
        self.logger = logger or logging.getLogger(__name__)
        self.reports: List[TrialReport] = []
        self.duration_seconds = 0.0

    def cells(self) -> List[Cell]:
        """Celle nell'ordine di esecuzione."""
        cfg = self.config
        return [
            Cell(float(lam), float(of), float(snr), method)
            for lam, of, snr, method in product(cfg.lambdas, cfg.ofs, cfg.snr_dbs, cfg.methods)
        ]

    def tasks(self) -> Iterator[Task]:
        for cell in self.cells():
            for trial_index in range(self.config.trials):
                yield self.config, cell, trial_index

    def _pool(self, parallelism: int) -> Executor:
        if self.executor == "thread" or self._runner is not None:
            return ThreadPoolExecutor(max_workers=parallelism)
        return ProcessPoolExecutor(max_workers=parallelism)

    def run_reports(self, parallelism: int = 1) -> List[TrialReport]:
        """Esegue tutti i trial e ritorna i report nell'ordine dei task."""
        tasks = list(self.tasks())
        total = len(tasks)
        self.logger.info(
            f"Sweep: {len(self.cells())} celle x {self.config.trials} trial = {total} task, parallelismo {parallelism}"
        )
        started = time.perf_counter()

        if self._runner is not None:
            runner = self._runner

            def work(task: Task) -> TrialReport:
                return runner(*task)

        else:
            work = _execute

        if parallelism <= 1:
            reports = [work(task) for task in tasks]
        else:
            chunk = max(1, total // (parallelism * 8))
            with self._pool(parallelism) as pool:
                if isinstance(pool, ProcessPoolExecutor):
                    reports = list(pool.map(work, tasks, chunksize=chunk))
                else:
                    reports = list(pool.map(work, tasks))

        self.duration_seconds = time.perf_counter() - started
        failures = sum(1 for r in reports if not r.converged)
        self.logger.info(f"Sweep completato in {self.duration_seconds:.1f}s, {failures}/{total} trial non convergenti")
        self.reports = reports
        return reports

    def run(self, parallelism: int = 1) -> SweepTable:
        """Esegue lo sweep e aggrega i risultati."""
        reports = self.run_reports(parallelism)
        return SweepTable.from_reports(reports, expected_trials=self.config.trials)


def run_sweep(config: ExperimentConfig, parallelism: int = 1, executor: str = "process") -> SweepTable:
    """Esegue tutte le celle x trial; il risultato non dipende da parallelism."""
    return SweepService(config, executor=executor).run(parallelism)
