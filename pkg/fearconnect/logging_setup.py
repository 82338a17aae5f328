"""
Logging-Konfiguration für fearconnect
Konfiguriert das Python-Logging-Modul basierend auf den Anwendungseinstellungen.
"""

import os
import logging
from logging.handlers import RotatingFileHandler

# Log-Levels aus der Verbose-Stufe der Kommandozeile
CMD_LOG_LEVELS = {
    0: None,             # Level aus der Konfiguration
    1: logging.INFO,     # -v
    2: logging.DEBUG,    # -vv
}


def setup_logging(config, verbose_level=0):
    """
    Richtet das Logging basierend auf der Konfiguration ein.

    Args:
        config (dict): Konfiguration mit Logging-Einstellungen
        verbose_level (int): Ausführlichkeitsstufe (0-2), überschreibt die Konfiguration

    Returns:
        logging.Logger: Konfigurierter Root-Logger
    """
    # Einstellungen aus der Konfiguration laden
    log_config = config.get('logging', {})
    log_level_str = str(log_config.get('level', 'info')).upper()
    file_logging = log_config.get('file_logging', False)
    console_logging = log_config.get('console_logging', True)
    max_log_files = log_config.get('max_log_files', 10)
    max_file_size_mb = log_config.get('max_file_size_mb', 5)

    # Log-Level bestimmen (Kommandozeile hat Vorrang)
    verbose_level = min(max(verbose_level, 0), max(CMD_LOG_LEVELS))
    log_level = CMD_LOG_LEVELS[verbose_level] or getattr(logging, log_level_str, logging.INFO)

    # Root-Logger konfigurieren
    logger = logging.getLogger()
    logger.setLevel(log_level)

    # Alte Handler entfernen (falls vorhanden)
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)

    # Log-Format
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    # Konsolen-Handler hinzufügen, wenn aktiviert
    if console_logging:
        console_handler = logging.StreamHandler()
        console_handler.setLevel(log_level)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    # Datei-Handler hinzufügen, wenn aktiviert
    log_file = None
    if file_logging:
        paths = config.get('paths', {})
        log_dir = paths.get('log_dir') or os.path.join(paths.get('output_dir', os.getcwd()), 'logs')

        # Sicherstellen, dass das Verzeichnis existiert
        if not os.path.exists(log_dir):
            os.makedirs(log_dir)

        log_file = os.path.join(log_dir, 'fearconnect.log')

        # Rotating File Handler für Log-Rotation
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=max_file_size_mb * 1024 * 1024,  # MB in Bytes umrechnen
            backupCount=max_log_files,
            encoding='utf-8',
        )
        file_handler.setLevel(log_level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    logger.info("Logging eingerichtet. Protokollebene: %s", logging.getLevelName(log_level))
    if log_file:
        logger.info("Protokolldatei: %s", log_file)

    return logger
