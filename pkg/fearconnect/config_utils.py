"""
Hilfsfunktionen für die Konfigurationsverwaltung
Enthält Funktionen zum Aktualisieren, Prüfen und Abfragen von Konfigurationswerten.
"""

import copy
import hashlib
import logging
import os
from typing import Any, Dict, Iterable, List

import yaml

from fearconnect.config_defaults import create_default_config
from fearconnect.exceptions import ConfigError

logger = logging.getLogger(__name__)

# Abschnitte, deren Inhalt frei wählbare Schlüssel enthalten darf
_FREE_FORM_SECTIONS = {"chain_schema"}


def get_value(config: Dict[str, Any], key_path: str, default=None):
    """
    Holt einen Wert aus der Konfiguration mit Punktnotation (z.B. 'rolling.window')

    Args:
        config: Konfigurations-Dictionary
        key_path: Pfad zum Konfigurationsschlüssel mit Punkten getrennt
        default: Standardwert, falls der Schlüssel nicht existiert

    Returns:
        Der Wert aus der Konfiguration oder der Standardwert
    """
    value = config
    for key in key_path.split('.'):
        if isinstance(value, dict) and key in value:
            value = value[key]
        else:
            return default
    return value


def set_value(config: Dict[str, Any], key_path: str, value: Any) -> None:
    """
    Setzt einen Wert mit Punktnotation (für Kommandozeilen-Overrides)

    Args:
        config: Konfigurations-Dictionary
        key_path: Pfad zum Konfigurationsschlüssel
        value: Neuer Wert
    """
    keys = key_path.split('.')
    target = config
    for key in keys[:-1]:
        target = target.setdefault(key, {})
    target[keys[-1]] = value


def flatten_keys(config: Dict[str, Any] = None) -> List[str]:
    """
    Liefert alle Konfigurationsschlüssel in Punktnotation

    Args:
        config: Konfiguration (Standard: Standardkonfiguration)

    Returns:
        list: Sortierte Schlüsselliste, z.B. ['connectedness.horizon', ...]
    """
    config = config if config is not None else create_default_config()
    keys = []
    for section, values in config.items():
        if isinstance(values, dict):
            keys.extend(f"{section}.{key}" for key in values)
        else:
            keys.append(section)
    return sorted(keys)


def merge_with_defaults(user_config: Dict[str, Any]) -> Dict[str, Any]:
    """
    Ergänzt eine Benutzerkonfiguration um fehlende Standardwerte

    Unbekannte Abschnitte oder Schlüssel sind harte Fehler, damit
    Tippfehler nicht stillschweigend ignoriert werden.

    Args:
        user_config: Aus der YAML-Datei gelesene Konfiguration

    Returns:
        dict: Vollständige Konfiguration

    Raises:
        ConfigError: Bei unbekannten Abschnitten oder Schlüsseln
    """
    merged = create_default_config()
    for section, values in (user_config or {}).items():
        if section not in merged:
            raise ConfigError(f"Unbekannter Konfigurationsabschnitt: {section}",
                              {"key": section})
        if not isinstance(values, dict):
            raise ConfigError(f"Abschnitt {section} muss ein Dictionary sein",
                              {"key": section})
        for key, value in values.items():
            if section not in _FREE_FORM_SECTIONS and key not in merged[section]:
                raise ConfigError(f"Unbekannter Konfigurationsschlüssel: {section}.{key}",
                                  {"key": f"{section}.{key}"})
            merged[section][key] = value
    return merged


def _require_int(config, key_path, minimum, maximum=None):
    value = get_value(config, key_path)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key_path} muss eine ganze Zahl sein (ist {value!r})",
                          {"key": key_path, "value": value})
    if value < minimum or (maximum is not None and value > maximum):
        raise ConfigError(f"{key_path}={value} liegt außerhalb von [{minimum}, {maximum}]",
                          {"key": key_path, "value": value})
    return value


def validate_config(config: Dict[str, Any]) -> Dict[str, Any]:
    """
    Prüft die Wertebereiche aller numerischen und aufzählenden Optionen

    Args:
        config: Vollständige Konfiguration

    Returns:
        dict: Die unveränderte Konfiguration

    Raises:
        ConfigError: Bei ungültigen Werten
    """
    _require_int(config, "vol_index.target_days", 1, 365)
    _require_int(config, "vol_index.min_days_to_expiry", 0, 365)
    if get_value(config, "vol_index.gap_policy") not in ("drop", "error"):
        raise ConfigError("vol_index.gap_policy muss 'drop' oder 'error' sein",
                          {"key": "vol_index.gap_policy"})

    _require_int(config, "connectedness.lags", 1, 52)
    _require_int(config, "connectedness.horizon", 1, 250)
    for key in ("connectedness.sensitivity_lags", "connectedness.sensitivity_horizons"):
        values = get_value(config, key)
        if not isinstance(values, list) or not all(isinstance(v, int) and v >= 1 for v in values):
            raise ConfigError(f"{key} muss eine Liste positiver ganzer Zahlen sein", {"key": key})

    _require_int(config, "rolling.window", 10)
    _require_int(config, "rolling.step", 1)
    _require_int(config, "quarterly.window", 10)
    if get_value(config, "quarterly.source") not in ("quarterly", "rolling"):
        raise ConfigError("quarterly.source muss 'quarterly' oder 'rolling' sein",
                          {"key": "quarterly.source"})
    for bucket in get_value(config, "rolling.buckets") or []:
        if not isinstance(bucket, dict) or set(bucket) != {"label", "start", "end"}:
            raise ConfigError("rolling.buckets erwartet Einträge mit label/start/end",
                              {"key": "rolling.buckets"})

    hac = get_value(config, "predictive.hac_lags")
    if hac != "horizon" and (isinstance(hac, bool) or not isinstance(hac, int) or hac < 0):
        raise ConfigError("predictive.hac_lags muss 'horizon' oder eine ganze Zahl >= 0 sein",
                          {"key": "predictive.hac_lags", "value": hac})
    horizons = get_value(config, "predictive.horizons")
    if not isinstance(horizons, list) or not all(isinstance(h, int) and 1 <= h <= 24 for h in horizons):
        raise ConfigError("predictive.horizons muss ganze Zahlen in [1, 24] enthalten",
                          {"key": "predictive.horizons"})
    _require_int(config, "predictive.endo_lags", 1, 36)
    _require_int(config, "predictive.min_months", 1)
    allowed_sets = {"total", "pos_neg", "ratio"}
    if not set(get_value(config, "predictive.predictor_sets") or []) <= allowed_sets:
        raise ConfigError(f"predictive.predictor_sets erlaubt nur {sorted(allowed_sets)}",
                          {"key": "predictive.predictor_sets"})

    threads = get_value(config, "runtime.threads")
    if threads is not None and (isinstance(threads, bool) or not isinstance(threads, int) or threads == 0):
        raise ConfigError("runtime.threads muss null oder eine ganze Zahl ungleich 0 sein",
                          {"key": "runtime.threads"})
    return config


def require_paths(config: Dict[str, Any], keys: Iterable[str]) -> None:
    """
    Prüft, ob die für einen Befehl benötigten Eingabedateien existieren

    Args:
        config: Vollständige Konfiguration
        keys: Schlüssel im Abschnitt 'paths'

    Raises:
        ConfigError: Wenn ein Pfad fehlt, mit dem Pfad in den Details
    """
    for key in keys:
        path = get_value(config, f"paths.{key}")
        if not path or not os.path.exists(path):
            raise ConfigError(f"Eingabedatei paths.{key} existiert nicht: {path}",
                              {"key": f"paths.{key}", "path": path})


# Abschnitte ohne Einfluss auf die Ergebnisse (Pfade, Laufzeit, Logging)
_HASH_EXCLUDED_SECTIONS = ("paths", "runtime", "logging")


def config_hash(config: Dict[str, Any]) -> str:
    """
    Berechnet einen stabilen Hash der Konfiguration für die Metadatenzeile

    Pfade, Laufzeit- und Logging-Einstellungen gehen nicht ein, damit
    Läufe in andere Ausgabeverzeichnisse identische Dateien erzeugen.

    Args:
        config: Konfiguration

    Returns:
        str: Die ersten 12 Hex-Zeichen des SHA-256 des kanonischen YAML-Dumps
    """
    relevant = {k: v for k, v in config.items() if k not in _HASH_EXCLUDED_SECTIONS}
    canonical = yaml.safe_dump(copy.deepcopy(relevant), sort_keys=True, default_flow_style=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]
