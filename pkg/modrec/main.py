#!/usr/bin/env python3
"""
CLI di modrec: simulazione, recupero e sweep Monte-Carlo del campionamento modulo.

Usage:
    modrec simulate --lambda 0.2 --of 6 --seed 1 --out sig.csv
    modrec recover --in sig.csv --out rec.csv --method b2r2
    modrec sweep --config fig3 --preset desk --out fig3.csv [--raw trials.csv]
    modrec report --in fig3.csv

Exit code: 0 successo, 1 errore di uso/IO/configurazione, 2 non convergenza segnalata.
"""

import argparse
import math
import sys
from typing import List, Optional

import pandas as pd

from modrec import __version__
from modrec.recovery import RecoveryRequest, create_method, list_methods
from modrec.recovery.b2r2 import PeelInit
from modrec.sampling.app_config import AppConfig, get_config
from modrec.sampling.errors import DivergenceError, ModuloError, TableParseError
from modrec.sampling.signals import SampledSignal, compute_support_bound, mse_db
from modrec.workflows.config import PRESETS, ConfigLoader, ConfigurationError, parse_snr
from modrec.workflows.logging import LoggerFactory
from modrec.workflows.service import SweepService
from modrec.workflows.storage import (
    format_float,
    load_table,
    read_signal,
    save_reports,
    save_table,
    write_recovery,
    write_signal,
)
from modrec.workflows.trial import refine_inband, simulate_signal

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FLAGGED = 2
EXIT_INTERRUPTED = 130


class _Parser(argparse.ArgumentParser):
    """ArgumentParser con errori di uso su exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: errore: {message}\n")


def _snr_arg(text: str) -> float:
    try:
        value = parse_snr(text if text.strip().lower() in ("inf", "+inf", "infinity") else float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"SNR non valido: {text!r}")
    if math.isnan(value) or value == -math.inf:
        raise argparse.ArgumentTypeError(f"SNR non valido: {text!r}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"numero non valido: {text!r}")
    if not value > 0 or math.isinf(value):
        raise argparse.ArgumentTypeError(f"deve essere positivo e finito: {text!r}")
    return value


def _non_negative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"intero non valido: {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"non può essere negativo: {text!r}")
    return value


def _positive_int(text: str) -> int:
    value = _non_negative_int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"deve essere >= 1: {text!r}")
    return value


def _status(message: str) -> None:
    """Messaggi per l'utente su stderr: stdout è riservato ai dati."""
    print(message, file=sys.stderr)


def build_parser(app: AppConfig) -> argparse.ArgumentParser:
    parser = _Parser(prog="modrec", description="Recupero di segnali bandlimited da campioni modulo")
    parser.add_argument("--version", action="version", version=f"modrec {__version__}")
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help=f"Livello di log (default: {app.logging.level})",
    )
    parser.add_argument("--config-file", help="config.yaml alternativo (default: $MODREC_CONFIG o ./config.yaml)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{simulate,recover,sweep,report}")

    # === simulate ===
    sim = sub.add_parser("simulate", help="Genera un segnale, lo campiona e ne fa il fold")
    sim.add_argument("--lambda", dest="threshold", type=_positive_float, required=True, help="Soglia lambda")
    sim.add_argument("--of", dest="oversampling", type=_positive_float, required=True, help="Fattore di sovracampionamento")
    sim.add_argument("--snr-db", type=_snr_arg, default=math.inf, help="SNR in dB (default: inf, senza rumore)")
    sim.add_argument("--seed", type=_non_negative_int, default=0, help="Seed di segnale e rumore")
    sim.add_argument("--num-pulses", type=_positive_int, default=app.signal.num_pulses)
    sim.add_argument("--center-spread", type=float, default=app.signal.center_spread)
    sim.add_argument("--band-edge", type=_positive_float, default=app.signal.band_edge, help="omega_m in rad/s")
    sim.add_argument("--out", required=True, help="Signal CSV di uscita")

    # === recover ===
    rec = sub.add_parser("recover", help="Recupera i campioni veri da un signal CSV")
    rec.add_argument("--in", dest="input", required=True, help="Signal CSV (n,f,f_lambda)")
    rec.add_argument("--out", required=True, help="CSV di uscita (n,f_hat,...)")
    rec.add_argument(
        "--method", default="b2r2", choices=[m["name"] for m in list_methods()], help="Metodo (default: b2r2)"
    )
    rec.add_argument("--n-lambda", type=_non_negative_int, help="Support bound (default: dai metadati o dalla colonna f)")
    rec.add_argument("--n-lambda-margin", type=_non_negative_int, default=0, help="Campioni aggiunti a N_lambda")
    rec.add_argument("--max-iters", type=_positive_int, help="Iterazioni PGD per peel")
    rec.add_argument("--peel-init", choices=[p.value for p in PeelInit], help="Inizializzazione dopo ogni peel")
    rec.add_argument("--order", type=_positive_int, help="Ordine HOD fissato (disattiva la scelta automatica)")

    # === sweep ===
    swp = sub.add_parser("sweep", help="Esegue uno sweep Monte-Carlo")
    swp.add_argument("--config", required=True, help="Config JSON o griglia inclusa (fig2, fig3, fig4)")
    swp.add_argument("--out", required=True, help="CSV della tabella aggregata")
    swp.add_argument(
        "--parallelism",
        type=_positive_int,
        default=max(1, app.bench.parallelism),
        help="Worker paralleli (default: $MODREC_THREADS o config.yaml)",
    )
    swp.add_argument("--preset", choices=PRESETS, default="full", help="desk limita i trial per cella")
    swp.add_argument("--raw", help="CSV opzionale con i report per-trial")

    # === report ===
    rpt = sub.add_parser("report", help="Stampa una tabella di sweep")
    rpt.add_argument("--in", dest="input", required=True, help="CSV della tabella")

    return parser


def cmd_simulate(args, app: AppConfig) -> int:
    data = simulate_signal(
        args.threshold,
        args.oversampling,
        args.snr_db,
        seed=args.seed,
        num_pulses=args.num_pulses,
        center_spread=args.center_spread,
        band_edge=args.band_edge,
        tail_ratio=app.signal.tail_ratio,
        max_window_seconds=app.signal.max_window_seconds,
    )
    write_signal(
        args.out,
        data.folded,
        data.truth.samples,
        metadata={
            "of": float(args.oversampling),
            "snr_db": float(args.snr_db),
            "seed": args.seed,
            "n_lambda": data.n_lambda,
        },
    )
    _status(f"✓ Segnale scritto in {args.out}: N_w={data.half_width}, N_lambda={data.n_lambda}")
    return EXIT_OK


def _method_options(args, app: AppConfig) -> dict:
    options = dict(app.method_defaults().get(args.method, {}))
    if args.method == "b2r2":
        if args.max_iters is not None:
            options["max_iters"] = args.max_iters
        if args.peel_init is not None:
            options["peel_init"] = args.peel_init
    if args.method == "hod" and args.order is not None:
        options["order"] = args.order
        options["auto_order"] = False
    return options


def cmd_recover(args, app: AppConfig) -> int:
    signal = read_signal(args.input)
    folded = signal.folded

    n_lambda = args.n_lambda if args.n_lambda is not None else signal.n_lambda
    if n_lambda is None:
        if signal.truth is not None:
            n_lambda = compute_support_bound(
                SampledSignal(signal.truth, folded.sampling_interval, folded.band_edge), folded.threshold
            )
        else:
            n_lambda = folded.half_width
            _status(f"⚠️  N_lambda non noto, uso la finestra intera ({n_lambda})")
    n_lambda = min(n_lambda + args.n_lambda_margin, folded.half_width)

    method = create_method(args.method, _method_options(args, app))
    request = RecoveryRequest(folded=folded, n_lambda=n_lambda, truth=signal.truth)
    try:
        outcome = method.recover(request)
        samples, converged, message = outcome.samples, outcome.converged, outcome.message
    except DivergenceError as e:
        if e.partial is None:
            raise
        samples, converged, message = e.partial, False, str(e)

    if folded.noisy and app.bench.refine_inband:
        samples = refine_inband(samples, folded)

    write_recovery(args.out, samples, folded, signal.truth)
    if signal.truth is not None:
        print(f"mse_db: {format_float(mse_db(samples, signal.truth))}")

    icon = "✓" if converged else "✗"
    _status(f"[{icon}] {method.name}: {message}")
    return EXIT_OK if converged else EXIT_FLAGGED


def cmd_sweep(args, app: AppConfig) -> int:
    config = ConfigLoader.load(args.config, preset=args.preset, app_config=app)
    _status("=" * 70)
    _status(f"  SWEEP {args.config} ({args.preset}): {config.cell_count} celle x {config.trials} trial")
    _status("=" * 70)

    service = SweepService(config, executor=app.bench.executor)
    table = service.run(args.parallelism)
    save_table(table, args.out)
    if args.raw:
        save_reports(service.reports, args.raw)

    failures = sum(s.failures for s in table)
    _status(f"  ✓ Tabella: {args.out} ({len(table)} celle, {failures} trial non convergenti)")
    _status(f"  ⏱️  Durata: {service.duration_seconds:.1f}s")
    return EXIT_OK


def cmd_report(args, app: AppConfig) -> int:
    table = load_table(args.input)
    if not len(table):
        print("(tabella vuota)")
        return EXIT_OK
    with pd.option_context("display.width", 200, "display.max_columns", None):
        print(table.pivot().round(2).to_string())
    print()
    frame = table.to_frame()
    summary = frame.groupby("method", sort=False)[["trials", "failures"]].sum()
    for method, row in summary.iterrows():
        print(f"{method}: {int(row['failures'])}/{int(row['trials'])} trial non convergenti")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "recover": cmd_recover,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; ritorna l'exit code."""
    # --config-file va letto prima di costruire il parser: ne fornisce i default
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config-file")
    known, _ = pre.parse_known_args(argv)
    app = AppConfig.load(known.config_file) if known.config_file else get_config()

    parser = build_parser(app)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    LoggerFactory.get_logger("modrec", app.logging, level=args.log_level, force_reconfigure=True)

    try:
        return COMMANDS[args.command](args, app)
    except ConfigurationError as e:
        _status("❌ Errore configurazione:")
        for error in e.errors:
            _status(f"   - {error}")
        return EXIT_ERROR
    except TableParseError as e:
        _status(f"❌ Errore di parsing: {e}")
        return EXIT_ERROR
    except ModuloError as e:
        _status(f"❌ {e}")
        return EXIT_ERROR
    except OSError as e:
        _status(f"❌ Errore IO: {e}")
        return EXIT_ERROR
    except KeyboardInterrupt:
        _status("\n⚠️  Interrotto dall'utente")
        return EXIT_INTERRUPTED


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
