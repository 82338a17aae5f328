"""
FearPipeline für fearconnect
Hauptklasse der Auswertung

Diese Klasse koordiniert den gesamten Ablauf:
- Optionsketten, Zinskurven und Marktkapitalisierungen einlesen
- Tagesindizes (aggregiert, positiv, negativ) und Sektorindex berechnen
- Statische und rollierende Verbundenheit schätzen
- Monatliche Verbundenheit mit Indikatoren ausrichten und Prognosen schätzen
"""

import datetime as dt
import logging
import os
import time
from typing import Dict, List, Optional

import pandas as pd

from fearconnect.config_utils import config_hash, get_value, require_paths
from fearconnect.connectedness import afc, sensitivity_grid, static_analysis
from fearconnect.error_handler import ErrorHandler
from fearconnect.exceptions import ConfigError, PanelError
from fearconnect.file_operations import OutputWriter, read_frame, read_panel_csv
from fearconnect.market_data import (
    load_indicators,
    load_market_caps,
    load_option_chains,
    load_rate_curves,
)
from fearconnect.predictive import PredictorSet, align_monthly
from fearconnect.predictive_suite import run_suite, suite_specs
from fearconnect.report_generators import (
    generate_monthly_files,
    generate_panel_files,
    generate_predictive_files,
    generate_rolling_files,
    generate_static_files,
)
from fearconnect.rolling import (
    Bucket,
    RollingConfig,
    cumulative_ranking,
    default_buckets,
    monthly_from_rolling,
    quarterly_index,
    rolling_connectedness,
)
from fearconnect.vol_index import Flavor
from fearconnect.vol_panel import VolPanel, build_panels, sector_weights

MODES = ("static", "rolling")


def _as_date(value) -> dt.date:
    return pd.Timestamp(str(value)).date()


class FearPipeline:
    """
    Hauptklasse der Auswertung
    Koordiniert die Aktionen der verschiedenen Module
    """

    def __init__(self, config: Dict):
        """
        Initialisiert die Pipeline mit der geprüften Konfiguration

        Args:
            config (dict): Vollständige Konfiguration (siehe config_defaults)
        """
        self.config = config
        self.logger = logging.getLogger(__name__)
        self.error_handler = ErrorHandler(self.logger)
        self.output_dir = config["paths"]["output_dir"]
        self.writer = OutputWriter(self.output_dir, config_hash(config))

        threads = get_value(config, "runtime.threads")
        self.n_jobs = threads if threads is not None else -1
        self.progress = bool(get_value(config, "runtime.progress", False))

    # Indizes

    def build_indexes(self) -> List[str]:
        """
        Berechnet die drei Indexpanels und den Sektorindex

        Returns:
            list: Geschriebene Dateien
        """
        start_time = time.time()
        require_paths(self.config, ("chains", "rates", "caps"))
        paths = self.config["paths"]
        vol_cfg = self.config["vol_index"]

        loaded = load_option_chains(paths["chains"], schema=self.config["chain_schema"])
        curves = load_rate_curves(paths["rates"])
        caps = load_market_caps(paths["caps"])

        # Fehlende Kapitalisierungen vor der teuren Indexberechnung erkennen
        sector_weights(sorted({c.underlier for c in loaded.chains}), caps)

        panels, gap_report = build_panels(
            loaded.chains, curves,
            target_days=vol_cfg["target_days"],
            min_days=vol_cfg["min_days_to_expiry"],
            gap_policy=vol_cfg["gap_policy"],
            n_jobs=self.n_jobs,
        )
        written = generate_panel_files(self.writer, panels, caps)
        written.append(self.writer.write_json({
            "quotes": loaded.report.to_dict(),
            "gaps": gap_report.to_dict(),
        }, "gap_report.json"))
        self.logger.info(f"Indizes berechnet in {time.time() - start_time:.1f}s")
        return written

    def load_panels(self) -> Dict[Flavor, VolPanel]:
        """
        Liest die von build_indexes geschriebenen Panels

        Raises:
            PanelError: Wenn ein Panel fehlt
        """
        panels = {}
        for flavor in Flavor:
            path = self.writer.path(f"panel_{flavor.value}.csv")
            if not os.path.exists(path):
                raise PanelError(f"Panel {path} fehlt, zuerst build-indexes ausführen",
                                 {"path": path})
            panels[flavor] = read_panel_csv(path, flavor)
        return panels

    # Verbundenheit

    def connectedness(self, mode: str = "static") -> List[str]:
        """
        Statische oder rollierende Verbundenheit

        Args:
            mode: "static" oder "rolling"

        Returns:
            list: Geschriebene Dateien
        """
        if mode not in MODES:
            raise ConfigError(f"Unbekannter Modus '{mode}'", {"mode": mode, "allowed": list(MODES)})
        panels = self.load_panels()
        if mode == "static":
            return self._static(panels)
        return self._rolling(panels)

    def _static(self, panels) -> List[str]:
        conn_cfg = self.config["connectedness"]
        results = {
            flavor: static_analysis(panels[flavor], conn_cfg["lags"], conn_cfg["horizon"],
                                    conn_cfg["log_transform"])
            for flavor in Flavor
        }
        report = afc(results[Flavor.POSITIVE].summary, results[Flavor.NEGATIVE].summary)
        sensitivity = {
            flavor: sensitivity_grid(panels[flavor], conn_cfg["sensitivity_lags"],
                                     conn_cfg["sensitivity_horizons"], conn_cfg["log_transform"])
            for flavor in Flavor
        }
        for flavor in Flavor:
            self.logger.info(f"Gesamtverbundenheit {flavor.value}: {results[flavor].summary.total:.2f}")
        self.logger.info(f"AFC: {report.afc_total:.2f}")
        return generate_static_files(self.writer, results, report, sensitivity)

    def rolling_config(self, window: Optional[int] = None) -> RollingConfig:
        conn_cfg = self.config["connectedness"]
        return RollingConfig(
            window=window or self.config["rolling"]["window"],
            p=conn_cfg["lags"],
            H=conn_cfg["horizon"],
            log_transform=conn_cfg["log_transform"],
            step=self.config["rolling"]["step"],
        )

    def _buckets(self, dates) -> List[Bucket]:
        configured = self.config["rolling"]["buckets"]
        if configured:
            return [Bucket(str(b["label"]), _as_date(b["start"]), _as_date(b["end"])) for b in configured]
        return default_buckets(dates, _as_date(self.config["rolling"]["crisis_start"]),
                               _as_date(self.config["rolling"]["crisis_end"]))

    def _rolling(self, panels) -> List[str]:
        rolling = rolling_connectedness(panels, self.rolling_config(), n_jobs=self.n_jobs,
                                        progress=self.progress)
        buckets = self._buckets(list(rolling.dates))
        rankings = [cumulative_ranking(rolling, buckets, flavor) for flavor in Flavor] if buckets else []
        written = generate_rolling_files(self.writer, rolling, rankings)

        monthly = monthly_from_rolling(rolling)
        monthly.index = monthly.index.astype(str)
        monthly.index.name = "month"
        written.append(self.writer.write_frame(monthly, "monthly_rolling.csv"))
        return written

    # Prognosen

    def monthly_connectedness(self, panels) -> pd.DataFrame:
        """
        Monatliche Verbundenheit aus der konfigurierten Quelle

        Returns:
            pd.DataFrame: Monat × Variante
        """
        source = self.config["quarterly"]["source"]
        if source == "rolling":
            path = self.writer.path("monthly_rolling.csv")
            if not os.path.exists(path):
                raise PanelError(f"{path} fehlt, zuerst connectedness --mode rolling ausführen",
                                 {"path": path})
            frame = read_frame(path, index_col=0)
            frame.index = pd.PeriodIndex(frame.index, freq="M")
            return frame

        monthly, skipped = quarterly_index(panels, self.rolling_config(self.config["quarterly"]["window"]),
                                           n_jobs=self.n_jobs)
        generate_monthly_files(self.writer, monthly, skipped)
        return monthly

    def predict(self) -> List[str]:
        """
        Prognoseregressionen der Makro- und Unsicherheitssuite

        Returns:
            list: Geschriebene Dateien
        """
        pred_cfg = self.config["predictive"]
        suites = {
            "macro": list(pred_cfg["macro_targets"] or []),
            "uncertainty": list(pred_cfg["uncertainty_targets"] or []),
        }
        written_before = len(self.writer.written)
        if not any(suites.values()):
            self.logger.warning("Keine Zielreihen konfiguriert, Prognosetabellen bleiben leer")
            for suite in suites:
                generate_predictive_files(self.writer, suite, [])
            return self.writer.written[written_before:]

        require_paths(self.config, ("indicators",))
        indicators = {s.name: s for s in load_indicators(self.config["paths"]["indicators"])}
        wanted = [name for targets in suites.values() for name in targets]
        unknown = [name for name in wanted if name not in indicators]
        if unknown:
            raise ConfigError(f"Zielreihen ohne Indikatordaten: {', '.join(unknown)}",
                              {"key": "predictive", "unknown": unknown})

        monthly = self.monthly_connectedness(self.load_panels())
        panel = align_monthly(monthly, [indicators[n] for n in dict.fromkeys(wanted)],
                              min_months=pred_cfg["min_months"])
        hac = pred_cfg["hac_lags"]
        hac_lags = None if hac == "horizon" else int(hac)
        predictor_sets = [PredictorSet(p) for p in pred_cfg["predictor_sets"]]

        for suite, targets in suites.items():
            specs = suite_specs({name: panel.kinds[name] for name in targets}, pred_cfg["horizons"],
                                predictor_sets, pred_cfg["endo_lags"], hac_lags)
            cells = run_suite(specs, panel, self.error_handler)
            if cells and all(cell.failed for cell in cells):
                reasons = sorted({cell.error["error"] for cell in cells})
                self.logger.warning(f"Suite {suite}: alle {len(cells)} Zellen fehlgeschlagen ({', '.join(reasons)})")
            generate_predictive_files(self.writer, suite, cells)

        self.writer.write_json({
            "months": len(panel.frame),
            "dropped_months": panel.dropped_months,
            "failed_cells": [r for r in self.error_handler.records],
        }, "predict_report.json")
        return self.writer.written[written_before:]
