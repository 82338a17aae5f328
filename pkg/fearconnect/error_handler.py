"""
Zentrale Fehlerbehandlung für fearconnect
Bietet eine einheitliche Schnittstelle zur Fehlerbehandlung und -protokollierung
"""

import logging
import traceback
from typing import Any, Dict, Optional

from fearconnect.exceptions import FearConnectError


class ErrorHandler:
    """
    Zentrale Klasse zur Fehlerbehandlung in fearconnect.

    Ermöglicht einheitliche Fehlerbehandlung für verschiedene Arten von Fehlern:
    - Erfasst Ausnahmen und protokolliert sie mit passendem Schweregrad
    - Erzeugt maschinenlesbare Fehlerdatensätze für die Kommandozeile
    - Bietet Kontext-Manager für fehleranfällige Operationen
    - Sammelt alle behandelten Fehler für spätere Berichte
    """

    def __init__(self, logger: Optional[logging.Logger] = None):
        """
        Initialisiert den ErrorHandler

        Args:
            logger: Logger-Instanz (optional)
        """
        self.logger = logger or logging.getLogger(__name__)
        self.records = []
        # Fehlerklassen nach Schweregrad
        self.error_levels = {
            "critical": logging.CRITICAL,
            "error": logging.ERROR,
            "warning": logging.WARNING,
            "info": logging.INFO,
        }

    def handle_exception(self, exception: Exception, context: str = None,
                         level: str = "error") -> Dict[str, Any]:
        """
        Behandelt eine Exception und erzeugt einen Fehlerdatensatz

        Args:
            exception: Die aufgetretene Exception
            context: Kontextinformation zum Ort des Fehlers
            level: Schweregrad des Fehlers (critical, error, warning, info)

        Returns:
            dict: JSON-serialisierbarer Fehlerdatensatz
        """
        if isinstance(exception, FearConnectError):
            record = exception.to_record()
        else:
            record = {
                "error": type(exception).__name__,
                "message": str(exception),
                "details": {},
            }
        record["context"] = context

        error_msg = record["message"]
        if context:
            error_msg = f"{context}: {error_msg}"

        log_level = self.error_levels.get(level, logging.ERROR)
        self.logger.log(log_level, error_msg)
        # Stack-Trace nur für unerwartete Fehler
        if log_level >= logging.ERROR and not isinstance(exception, FearConnectError):
            self.logger.debug(f"Stack-Trace:\n{traceback.format_exc()}")

        self.records.append(record)
        return record

    def safe_operation(self, context: str = None, level: str = "error"):
        """
        Context-Manager für fehleranfällige Operationen

        Args:
            context: Kontextinformation zum Ort des Fehlers
            level: Schweregrad des Fehlers

        Returns:
            Ein Context-Manager, der fachliche Fehler protokolliert und unterdrückt
        """
        class SafeOperationContext:
            def __init__(self, handler, ctx, lvl):
                self.handler = handler
                self.context = ctx
                self.level = lvl
                self.record = None

            def __enter__(self):
                return self

            def __exit__(self, exc_type, exc_val, exc_tb):
                if isinstance(exc_val, FearConnectError):
                    self.record = self.handler.handle_exception(
                        exc_val, context=self.context, level=self.level)
                    return True  # Exception wurde behandelt
                return False

        return SafeOperationContext(self, context, level)
