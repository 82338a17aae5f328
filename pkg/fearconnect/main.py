"""
Haupteinstiegspunkt für fearconnect
Enthält die Kommandozeilenargumente und die CLI-Logik

Befehle:
    build-indexes   Tagesindizes, Sektorindex und Lückenbericht
    connectedness   Statische (--mode static) oder rollierende (--mode rolling) Verbundenheit
    predict         Prognoseregressionen der Makro- und Unsicherheitssuite
    gen-fixture     Synthetischer Black-Scholes-Datensatz mit lauffähiger Konfiguration

Exit-Codes: 0 Erfolg, 2 fachlicher Fehler (JSON-Datensatz auf stderr und in
<output>/error.json), 1 unerwarteter Fehler.
"""

import argparse
import json
import logging
import os
import sys
import time

from fearconnect import __version__
from fearconnect.config import ConfigManager, flatten_keys
from fearconnect.error_handler import ErrorHandler
from fearconnect.exceptions import FearConnectError
from fearconnect.file_operations import write_error_record
from fearconnect.fixtures import DEFAULT_NAMES, generate_fixture
from fearconnect.logging_setup import setup_logging
from fearconnect.pipeline import MODES, FearPipeline

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_DOMAIN_ERROR = 2


def _config_epilog() -> str:
    return "Konfigurationsschlüssel (YAML, Abschnitt.Schlüssel):\n  " + "\n  ".join(flatten_keys())


def build_parser() -> argparse.ArgumentParser:
    """
    Baut den Argumentparser mit allen Unterbefehlen

    Returns:
        argparse.ArgumentParser: Der Parser
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='PATH', default=ConfigManager.DEFAULT_CONFIG_PATH,
                        help='Konfigurationsdatei (YAML)')
    common.add_argument('--output', metavar='DIR', help='Ausgabeverzeichnis (überschreibt paths.output_dir)')
    common.add_argument('--threads', type=int, metavar='N',
                        help='Anzahl paralleler Prozesse (überschreibt runtime.threads, -1 = alle Kerne)')
    common.add_argument('-v', '--verbose', action='count', default=0,
                        help='Erhöht die Ausführlichkeit der Ausgabe (kann mehrfach verwendet werden)')

    parser = argparse.ArgumentParser(
        prog='fearconnect',
        description='fearconnect - Angst-Verbundenheit aus impliziten Volatilitätsindizes',
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command', required=True)

    subparsers.add_parser('build-indexes', parents=[common], epilog=_config_epilog(),
                          formatter_class=argparse.RawDescriptionHelpFormatter,
                          help='Berechnet die drei Indexpanels und den Sektorindex')

    conn = subparsers.add_parser('connectedness', parents=[common], epilog=_config_epilog(),
                                 formatter_class=argparse.RawDescriptionHelpFormatter,
                                 help='Statische oder rollierende Verbundenheit')
    conn.add_argument('--mode', choices=MODES, default='static', help='Analyseart')
    conn.add_argument('--lags', type=int, help='VAR-Ordnung (überschreibt connectedness.lags)')
    conn.add_argument('--horizon', type=int, help='Prognosehorizont (überschreibt connectedness.horizon)')
    conn.add_argument('--window', type=int, help='Fensterlänge (überschreibt rolling.window)')

    subparsers.add_parser('predict', parents=[common], epilog=_config_epilog(),
                          formatter_class=argparse.RawDescriptionHelpFormatter,
                          help='Prognoseregressionen')

    fixture = subparsers.add_parser('gen-fixture', parents=[common],
                                    help='Erzeugt einen synthetischen Datensatz')
    fixture.add_argument('--days', type=int, default=1000, help='Anzahl Handelstage')
    fixture.add_argument('--names', nargs='+', default=list(DEFAULT_NAMES), help='Basiswerte')
    fixture.add_argument('--seed', type=int, default=0, help='Startwert aller Zufallsgeneratoren')
    return parser


def _overrides(args) -> dict:
    overrides = {
        'paths.output_dir': os.path.abspath(args.output) if args.output else None,
        'runtime.threads': args.threads,
    }
    if args.command == 'connectedness':
        overrides.update({
            'connectedness.lags': args.lags,
            'connectedness.horizon': args.horizon,
            'rolling.window': args.window,
        })
    return overrides


def run_command(args) -> list:
    """
    Führt einen Unterbefehl aus

    Returns:
        list: Geschriebene Dateien
    """
    if args.command == 'gen-fixture':
        out_dir = args.output or 'fixture'
        paths = generate_fixture(out_dir, names=args.names, n_days=args.days, seed=args.seed)
        return list(paths.values())

    config_manager = ConfigManager(args.config)
    config = config_manager.apply_overrides(_overrides(args))
    setup_logging(config, args.verbose)
    pipeline = FearPipeline(config)

    if args.command == 'build-indexes':
        return pipeline.build_indexes()
    if args.command == 'connectedness':
        return pipeline.connectedness(args.mode)
    return pipeline.predict()


def main(argv=None) -> int:
    """
    Hauptfunktion des Programms
    Verarbeitet die Argumente und führt den entsprechenden Befehl aus

    Returns:
        int: Exit-Code
    """
    args = build_parser().parse_args(argv)
    start_time = time.time()
    logger = logging.getLogger('fearconnect')
    error_handler = ErrorHandler(logger)

    try:
        written = run_command(args)
        logger.info(f"{args.command}: {len(written)} Datei(en) geschrieben in {time.time() - start_time:.1f}s")
        for path in written:
            print(path)
        return EXIT_OK

    except FearConnectError as e:
        record = error_handler.handle_exception(e, context=args.command)
        output_dir = args.output or _configured_output(args)
        error_path = write_error_record(record, output_dir)
        if error_path:
            record = {**record, "error_file": error_path}
        print(json.dumps(record, sort_keys=True, ensure_ascii=False, default=str), file=sys.stderr)
        return EXIT_DOMAIN_ERROR

    except Exception as e:
        error_handler.handle_exception(e, context=args.command, level="critical")
        print(json.dumps({"error": type(e).__name__, "message": str(e)}, ensure_ascii=False), file=sys.stderr)
        return EXIT_UNEXPECTED


def _configured_output(args):
    """Ausgabeverzeichnis aus der Konfiguration, falls sie lesbar ist."""
    if args.command == 'gen-fixture':
        return None
    try:
        return ConfigManager(args.config).get_value('paths.output_dir')
    except FearConnectError:
        return None


if __name__ == '__main__':
    sys.exit(main())
