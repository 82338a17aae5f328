"""
fearconnect - Angst-Verbundenheit aus impliziten Volatilitätsindizes

Dieses Paket enthält alle Komponenten der Auswertung:
- Einlesen von Optionsketten, Zinskurven und Indikatoren
- Implizite Volatilitätsindizes (aggregiert, nur Calls, nur Puts)
- VAR-Schätzung und generalisierte Varianzzerlegung
- Statische und rollierende Verbundenheit, asymmetrische Angst-Verbundenheit
- Prognoseregressionen (OLS mit Newey-West, Probit)
"""

__version__ = '1.0.0'

# Hauptklassen für einfachen Import
from .config import ConfigManager
from .pipeline import FearPipeline

__all__ = [
    'ConfigManager',
    'FearPipeline',
]
