"""
Kern-Konfigurationsmanagement für fearconnect
Enthält die ConfigManager-Klasse zum Laden der Pipeline-Konfiguration.

Anders als bei einer Desktop-Anwendung nennt jeder Kommandozeilenaufruf
seine eigene Konfigurationsdatei; deshalb gibt es pro Datei eine Instanz.
"""

import os
import logging
from typing import Any, Dict, Optional

import yaml

from fearconnect.config_defaults import create_default_config
from fearconnect.config_utils import merge_with_defaults, validate_config
from fearconnect.exceptions import ConfigError


class ConfigManager:
    """
    Verwaltet die Konfiguration einer fearconnect-Pipeline

    Lädt die YAML-Datei bei Bedarf (Lazy Loading), ergänzt fehlende Werte
    um die Standardkonfiguration und prüft alle Wertebereiche.
    """

    # Klassenattribut für den Pfad zur Konfigurationsdatei
    DEFAULT_CONFIG_PATH = "fearconnect_config.yaml"

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialisiert den ConfigManager

        Args:
            config_path: Pfad zur Konfigurationsdatei (optional)
        """
        self.config_path = config_path or self.DEFAULT_CONFIG_PATH
        self.logger = logging.getLogger(__name__)
        self._config = None  # Lazy Loading - wird erst bei Bedarf geladen

        self.logger.debug(f"ConfigManager initialisiert mit Pfad: {self.config_path}")

    @property
    def config(self) -> Dict[str, Any]:
        """
        Property-Getter für die Konfiguration mit Lazy Loading

        Returns:
            dict: Die aktuelle Konfiguration
        """
        if self._config is None:
            self._load_config()
        return self._config

    def get_config(self) -> Dict[str, Any]:
        """
        Gibt die aktuelle Konfiguration zurück

        Returns:
            dict: Die aktuelle Konfiguration
        """
        return self.config

    def _load_config(self) -> None:
        """
        Lädt die Konfiguration aus der YAML-Datei (intern)

        Raises:
            ConfigError: Wenn die Datei nicht lesbar oder ungültig ist
        """
        if not os.path.exists(self.config_path):
            self.logger.info(f"Konfigurationsdatei {self.config_path} nicht gefunden. "
                             f"Verwende Standardkonfiguration.")
            self._config = validate_config(create_default_config())
            return

        try:
            with open(self.config_path, 'r', encoding='utf-8') as file:
                user_config = yaml.safe_load(file) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Konfigurationsdatei {self.config_path} ist kein gültiges YAML: {e}",
                              {"path": self.config_path})

        if not isinstance(user_config, dict):
            raise ConfigError(f"Konfigurationsdatei {self.config_path} muss ein Mapping enthalten",
                              {"path": self.config_path})

        self._config = validate_config(merge_with_defaults(user_config))
        self._resolve_relative_paths()
        self.logger.info(f"Konfiguration aus {self.config_path} geladen.")

    def _resolve_relative_paths(self) -> None:
        """
        Löst relative Dateipfade relativ zum Verzeichnis der Konfigurationsdatei auf
        """
        base_dir = os.path.dirname(os.path.abspath(self.config_path))
        for key, value in self._config["paths"].items():
            if value and not os.path.isabs(value):
                self._config["paths"][key] = os.path.normpath(os.path.join(base_dir, value))
