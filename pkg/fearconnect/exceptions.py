"""
Ausnahmen für fearconnect
Definiert die Fehlerhierarchie aller Module.

Jede Ausnahme trägt einen maschinenlesbaren Code und ein Dictionary mit
Detailinformationen, damit die Kommandozeile einen JSON-Fehlerdatensatz
erzeugen kann.
"""

from typing import Any, Dict, Optional


class FearConnectError(Exception):
    """
    Basisklasse aller fachlichen Fehler in fearconnect.

    Attributes:
        code (str): Maschinenlesbarer Fehlercode
        details (dict): Zusätzliche, JSON-serialisierbare Informationen
    """

    code = "fearconnect_error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_record(self) -> Dict[str, Any]:
        """
        Wandelt den Fehler in einen JSON-tauglichen Datensatz um

        Returns:
            dict: Fehlercode, Meldung und Details
        """
        return {
            "error": self.code,
            "message": self.message,
            "details": self.details,
        }


# Konfiguration und Eingabedaten
class ConfigError(FearConnectError):
    code = "config_error"


class SchemaError(FearConnectError):
    code = "schema_error"


class EmptyInputError(FearConnectError):
    code = "empty_input"


class FormatError(FearConnectError):
    code = "format_error"


# Volatilitätsindex
class InsufficientChainError(FearConnectError):
    code = "insufficient_chain"


class ParityError(FearConnectError):
    code = "parity_error"


class NoStripError(FearConnectError):
    code = "no_strip"


class NonPositiveVarianceError(FearConnectError):
    code = "non_positive_variance"


class NegativeVarianceError(FearConnectError):
    code = "negative_interpolated_variance"


class MissingCapError(FearConnectError):
    code = "missing_cap"


class PanelError(FearConnectError):
    code = "panel_error"


# VAR-Schätzung und Varianzzerlegung
class CollinearityError(FearConnectError):
    code = "collinearity"


class DomainError(FearConnectError):
    code = "domain_error"


class DegenerateVarianceError(FearConnectError):
    code = "degenerate_variance"


class FlavorMismatchError(FearConnectError):
    code = "flavor_mismatch"


# Rollierende Auswertung und Prognoseregressionen
class EmptyBucketError(FearConnectError):
    code = "empty_bucket"


class InsufficientSampleError(FearConnectError):
    code = "insufficient_sample"


class SeparationError(FearConnectError):
    code = "perfect_separation"


class ConvergenceError(FearConnectError):
    code = "non_convergence"


class NumericalError(FearConnectError):
    code = "numerical_error"
