"""
Konfigurationsverwaltung für fearconnect
Bündelt den ConfigManager und die Hilfsfunktionen zu einer Schnittstelle.

Die Konfiguration steuert die gesamte Pipeline: Eingabepfade, Spaltenzuordnung
der Optionsdaten, Indexkonstruktion, VAR-Einstellungen, rollierende Fenster
und die Prognoseregressionen.
"""

from fearconnect.config_core import ConfigManager as _ConfigManagerCore
from fearconnect.config_defaults import create_default_config
from fearconnect.config_utils import (
    config_hash,
    flatten_keys,
    get_value,
    require_paths,
    set_value,
    validate_config,
)


# Erweitere die ConfigManager-Klasse um die Hilfsfunktionen
class ConfigManagerExtended(_ConfigManagerCore):
    """
    Erweiterte Version der ConfigManager-Klasse mit zusätzlichen Hilfsfunktionen
    """

    def get_value(self, key_path, default=None):
        """
        Holt einen Wert aus der Konfiguration mit Punktnotation (z.B. 'rolling.window')

        Args:
            key_path: Pfad zum Konfigurationsschlüssel mit Punkten getrennt
            default: Standardwert, falls der Schlüssel nicht existiert

        Returns:
            Der Wert aus der Konfiguration oder der Standardwert
        """
        return get_value(self.config, key_path, default)

    def apply_overrides(self, overrides):
        """
        Übernimmt Kommandozeilenwerte (Flags haben Vorrang vor der Datei)

        Args:
            overrides: Dictionary {Punktschlüssel: Wert}; None-Werte werden ignoriert

        Returns:
            dict: Die geprüfte Konfiguration
        """
        for key_path, value in overrides.items():
            if value is not None:
                set_value(self.config, key_path, value)
        return validate_config(self.config)


# Override des ursprünglichen ConfigManager mit der erweiterten Version
ConfigManager = ConfigManagerExtended

__all__ = [
    'ConfigManager',
    'config_hash',
    'create_default_config',
    'flatten_keys',
    'get_value',
    'require_paths',
    'validate_config',
]
