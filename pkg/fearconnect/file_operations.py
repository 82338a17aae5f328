"""
Dateioperationen für fearconnect
Verwaltet das Ausgabeverzeichnis und schreibt alle Ergebnisdateien
deterministisch: jede CSV-Datei beginnt mit einer Metadatenzeile
(Programmversion und Konfigurations-Hash), Zahlen werden mit festem
Format geschrieben, JSON-Berichte mit sortierten Schlüsseln. Ausgaben
enthalten keine Zeitstempel, Wiederholungsläufe sind byte-identisch.
"""

import json
import logging
import os
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from fearconnect import __version__
from fearconnect.vol_index import Flavor
from fearconnect.vol_panel import VolPanel

# Zahlenformate: Panels mit 6 Nachkommastellen, Maschinentabellen in voller Genauigkeit
PANEL_FLOAT_FORMAT = "%.6f"
TABLE_FLOAT_FORMAT = "%.10g"


class OutputWriter:
    """
    Schreibt Ergebnisdateien in ein Ausgabeverzeichnis.

    Diese Klasse ist verantwortlich für:
    - Anlegen des Ausgabeverzeichnisses
    - Metadatenzeile '# fearconnect <version> config=<hash>' in jeder CSV
    - Deterministische Zahlenformate und JSON-Ausgaben
    - Protokoll aller geschriebenen Dateien
    """

    def __init__(self, output_dir: str, config_digest: str):
        """
        Args:
            output_dir: Ausgabeverzeichnis
            config_digest: Konfigurations-Hash für die Metadatenzeile
        """
        self.output_dir = output_dir
        self.config_digest = config_digest
        self.logger = logging.getLogger(__name__)
        self.written: List[str] = []
        self._ensure_directory_exists()

    def _ensure_directory_exists(self):
        if not os.path.exists(self.output_dir):
            os.makedirs(self.output_dir)
            self.logger.info(f"Verzeichnis erstellt: {self.output_dir}")

    @property
    def header(self) -> str:
        return f"# fearconnect {__version__} config={self.config_digest}\n"

    def path(self, filename: str) -> str:
        return os.path.join(self.output_dir, filename)

    def write_frame(self, frame: pd.DataFrame, filename: str, float_format: str = TABLE_FLOAT_FORMAT,
                    index: bool = True) -> str:
        """
        Schreibt eine Tabelle als CSV mit Metadatenzeile.

        Returns:
            str: Pfad der geschriebenen Datei
        """
        target = self.path(filename)
        with open(target, "w", encoding="utf-8", newline="") as file:
            file.write(self.header)
            frame.to_csv(file, index=index, float_format=float_format, lineterminator="\n")
        self._register(target)
        return target

    def write_json(self, data: Dict[str, Any], filename: str) -> str:
        """Schreibt einen JSON-Bericht mit sortierten Schlüsseln."""
        target = self.path(filename)
        with open(target, "w", encoding="utf-8") as file:
            json.dump(_jsonable(data), file, indent=2, sort_keys=True, ensure_ascii=False)
            file.write("\n")
        self._register(target)
        return target

    def _register(self, target: str) -> None:
        self.written.append(target)
        self.logger.info(f"Datei geschrieben: {target}")


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if hasattr(value, "isoformat"):
        return value.isoformat()
    return value


def write_error_record(record: Dict[str, Any], output_dir: Optional[str]) -> Optional[str]:
    """
    Schreibt den Fehlerdatensatz eines abgebrochenen Laufs nach <output>/error.json.

    Returns:
        str: Pfad oder None, wenn das Verzeichnis nicht angelegt werden konnte
    """
    if not output_dir:
        return None
    try:
        os.makedirs(output_dir, exist_ok=True)
        target = os.path.join(output_dir, "error.json")
        with open(target, "w", encoding="utf-8") as file:
            json.dump(_jsonable(record), file, indent=2, sort_keys=True, ensure_ascii=False)
            file.write("\n")
        return target
    except OSError:
        return None


def read_frame(path: str, **kwargs) -> pd.DataFrame:
    """Liest eine von OutputWriter geschriebene CSV (Metadatenzeile wird übersprungen)."""
    return pd.read_csv(path, comment="#", **kwargs)


def read_panel_csv(path: str, flavor: Flavor) -> VolPanel:
    """
    Liest ein Panel (erste Spalte ISO-Datum, eine Spalte je Name).
    """
    frame = read_frame(path, index_col=0)
    frame.index = pd.to_datetime(frame.index, format="%Y-%m-%d")
    return VolPanel.from_frame(frame, flavor)
