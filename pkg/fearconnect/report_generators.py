"""
Berichtserstellung für fearconnect
Formt die Ergebnisse der Pipeline zu Tabellen und schreibt sie über den
OutputWriter: Panels, Sektorindex, deskriptive Statistiken, statische
Verbundenheitstabellen, AFC, Sensitivität, rollierende Reihen,
Ranglisten, monatliche Verbundenheit und Prognosetabellen.
"""

import logging
from typing import Dict, List, Mapping, Sequence

import pandas as pd

from fearconnect.connectedness import AfcReport, StaticResult, summary_frame
from fearconnect.file_operations import PANEL_FLOAT_FORMAT, OutputWriter
from fearconnect.market_data import MarketCapTable
from fearconnect.predictive_suite import SuiteCell, results_frame, wide_table
from fearconnect.rolling import RankingReport, RollingSeries
from fearconnect.vol_index import Flavor
from fearconnect.vol_panel import VolPanel, describe_panel, sector_index

logger = logging.getLogger(__name__)


def generate_panel_files(writer: OutputWriter, panels: Mapping[Flavor, VolPanel],
                         caps: MarketCapTable) -> List[str]:
    """
    Schreibt die drei Panels (panel_<variante>.csv), den Sektorindex
    (wvix.csv) und die deskriptiven Statistiken (descriptives.csv).

    Returns:
        list: Geschriebene Pfade
    """
    written = []
    for flavor in Flavor:
        written.append(writer.write_frame(panels[flavor].to_frame(), f"panel_{flavor.value}.csv",
                                          float_format=PANEL_FLOAT_FORMAT))

    wvix = pd.concat([sector_index(panels[flavor], caps) for flavor in Flavor], axis=1)
    written.append(writer.write_frame(wvix, "wvix.csv", float_format=PANEL_FLOAT_FORMAT))

    stats = pd.concat({flavor.value: describe_panel(panels[flavor]) for flavor in Flavor},
                      names=["flavor", "name"])
    written.append(writer.write_frame(stats, "descriptives.csv"))
    return written


def generate_static_files(writer: OutputWriter, results: Mapping[Flavor, StaticResult],
                          report: AfcReport, sensitivity: Mapping[Flavor, pd.DataFrame]) -> List[str]:
    """
    Statische Analyse: eine Verbundenheitstabelle je Variante
    (static_<variante>.csv), den AFC-Bericht (afc.csv), die Gesamtwerte
    (static_totals.csv) und die Sensitivität über Lag-Ordnung und Horizont.
    """
    written = []
    for flavor in Flavor:
        written.append(writer.write_frame(summary_frame(results[flavor].summary), f"static_{flavor.value}.csv"))

    afc_frame = report.to_frame()
    written.append(writer.write_frame(afc_frame, "afc.csv"))

    totals = pd.DataFrame({
        "total": [results[f].summary.total for f in Flavor],
        "stable": [results[f].stable for f in Flavor],
        "spectral_radius": [results[f].radius for f in Flavor],
    }, index=pd.Index([f.value for f in Flavor], name="flavor"))
    totals.loc["afc"] = [report.afc_total, pd.NA, pd.NA]
    written.append(writer.write_frame(totals, "static_totals.csv"))

    grid = pd.concat({flavor.value: sensitivity[flavor] for flavor in Flavor}, names=["flavor", "lags"])
    written.append(writer.write_frame(grid, "sensitivity.csv"))
    return written


def rolling_totals_frame(rolling: RollingSeries) -> pd.DataFrame:
    """Datum × (C, C+, C-, AFC, ratio)."""
    frame = pd.DataFrame({
        "C": rolling.totals[Flavor.AGGREGATE.value],
        "C+": rolling.totals[Flavor.POSITIVE.value],
        "C-": rolling.totals[Flavor.NEGATIVE.value],
        "AFC": rolling.afc,
        "ratio": rolling.ratio,
    })
    frame.index.name = "date"
    return frame


def generate_rolling_files(writer: OutputWriter, rolling: RollingSeries,
                           rankings: Sequence[RankingReport]) -> List[str]:
    """
    Rollierende Ergebnisse: rolling_totals.csv, rolling_net_<variante>.csv,
    rolling_unstable.csv, ranking.csv und rolling_windows.json (verworfene Fenster).
    """
    written = [writer.write_frame(rolling_totals_frame(rolling), "rolling_totals.csv")]
    for flavor in Flavor:
        written.append(writer.write_frame(rolling.nets[flavor], f"rolling_net_{flavor.value}.csv"))
    written.append(writer.write_frame(rolling.unstable.astype(int), "rolling_unstable.csv"))

    if rankings:
        frames = []
        for report in rankings:
            table = report.table.copy()
            table.insert(0, "flavor", report.flavor.value)
            frames.append(table)
        written.append(writer.write_frame(pd.concat(frames, ignore_index=True), "ranking.csv", index=False))

    written.append(writer.write_json({
        "n_windows": len(rolling),
        "skipped": rolling.skipped,
        "n_unstable": {f.value: int(rolling.unstable[f.value].sum()) for f in Flavor},
        "top": {r.flavor.value: {label: {"transmitter": t, "receiver": rcv}
                                 for label, (t, rcv) in r.top.items()} for r in rankings},
    }, "rolling_windows.json"))
    return written


def generate_monthly_files(writer: OutputWriter, monthly: pd.DataFrame, skipped: List[Dict]) -> List[str]:
    """Monatliche Verbundenheit (monthly_connectedness.csv) und übersprungene Monate."""
    frame = monthly.copy()
    frame.index = frame.index.astype(str)
    frame.index.name = "month"
    return [
        writer.write_frame(frame, "monthly_connectedness.csv"),
        writer.write_json({"skipped": skipped}, "monthly_skipped.json"),
    ]


def generate_predictive_files(writer: OutputWriter, suite: str, cells: Sequence[SuiteCell]) -> List[str]:
    """
    Prognosetabellen einer Suite: lange Tabelle (predict_<suite>_long.csv)
    und Tabellenlayout mit Zeilen = Horizont (predict_<suite>.csv).
    """
    return [
        writer.write_frame(results_frame(cells), f"predict_{suite}_long.csv", index=False),
        writer.write_frame(wide_table(cells), f"predict_{suite}.csv"),
    ]
