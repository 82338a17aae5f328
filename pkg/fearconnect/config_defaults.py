"""
Standard-Konfigurationswerte für fearconnect
Enthält die Standardkonfiguration und die erlaubten Wertebereiche
der einzelnen Konfigurationsschlüssel.
"""

from typing import Any, Dict


def create_default_config() -> Dict[str, Any]:
    """
    Erstellt eine Standardkonfiguration

    Die Werte für Lag-Ordnung, Horizont und Fensterlänge entsprechen den
    üblichen Einstellungen der Connectedness-Literatur (p=4, H=12, 200 Tage).

    Returns:
        dict: Die Standardkonfiguration
    """
    return {
        "paths": {
            "chains": "data/chains.csv",
            "rates": "data/rates.csv",
            "caps": "data/caps.csv",
            "indicators": "data/indicators.csv",
            "output_dir": "output",
            "log_dir": "",
        },
        # Spaltenzuordnung der Optionsdatei: interner Name -> Spalte in der Datei
        "chain_schema": {
            "date": "date",
            "expiry": "expiry",
            "strike": "strike",
            "right": "right",
            "bid": "bid",
            "ask": "ask",
            "underlier": "underlier",
        },
        "vol_index": {
            "target_days": 30,
            "min_days_to_expiry": 7,
            "gap_policy": "drop",
        },
        "connectedness": {
            "lags": 4,
            "horizon": 12,
            "log_transform": True,
            "sensitivity_lags": [2, 3, 4, 5],
            "sensitivity_horizons": [4, 6, 10, 14],
        },
        "rolling": {
            "window": 200,
            "step": 1,
            "crisis_start": "2007-12-01",
            "crisis_end": "2009-06-30",
            "buckets": [],
        },
        "quarterly": {
            "window": 60,
            "source": "quarterly",
        },
        "predictive": {
            "hac_lags": "horizon",
            "horizons": list(range(1, 13)),
            "endo_lags": 12,
            "min_months": 24,
            "predictor_sets": ["total", "pos_neg", "ratio"],
            "macro_targets": [],
            "uncertainty_targets": [],
        },
        "runtime": {
            "threads": None,
            "progress": False,
        },
        "logging": {
            "level": "info",
            "file_logging": False,
            "console_logging": True,
            "max_log_files": 10,
            "max_file_size_mb": 5,
        },
    }
