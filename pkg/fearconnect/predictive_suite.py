"""
Prognose-Suiten für fearconnect
Erzeugt die Regressionszellen (Ziel × Horizont × Prädiktorsatz), schätzt
sie unabhängig voneinander und formt die Ergebnisse zu langen und breiten
Tabellen. Fehlgeschlagene Zellen werden markiert, die Suite läuft weiter.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from fearconnect.error_handler import ErrorHandler
from fearconnect.market_data import IndicatorKind
from fearconnect.predictive import (
    DesignPanel,
    PredictorSet,
    RegressionResult,
    RegressionSpec,
    fit_spec,
)

logger = logging.getLogger(__name__)

# Koeffizienten, die in der breiten Tabelle je Prädiktorsatz erscheinen
PREDICTOR_COEFFICIENTS = {
    PredictorSet.TOTAL: ("beta",),
    PredictorSet.POS_NEG: ("beta_neg", "beta_pos"),
    PredictorSet.RATIO: ("beta_ratio",),
}


@dataclass(frozen=True)
class SuiteCell:
    spec: RegressionSpec
    result: Optional[RegressionResult] = None
    error: Optional[Dict] = None

    @property
    def failed(self) -> bool:
        return self.result is None


def suite_specs(targets: Dict[str, IndicatorKind], horizons: Iterable[int] = range(1, 13),
                predictor_sets: Iterable[PredictorSet] = tuple(PredictorSet), endo_lags: int = 12,
                hac_lags: Optional[int] = None) -> List[RegressionSpec]:
    """
    Alle Zellen in fester Reihenfolge: Ziel, Prädiktorsatz, Horizont.

    Args:
        targets: {Zielreihe: Art}
        horizons: Prognosehorizonte in Monaten
        predictor_sets: Prädiktorsätze
        endo_lags: Anzahl eigener Lags der Zielreihe
        hac_lags: Fester Newey-West-Lag (None = Horizont)
    """
    horizons = list(horizons)
    predictor_sets = [PredictorSet(p) for p in predictor_sets]
    return [
        RegressionSpec(target=name, kind=kind, horizon=h, predictors=predictors,
                       endo_lags=endo_lags, hac_lags=hac_lags)
        for name, kind in targets.items()
        for predictors in predictor_sets
        for h in horizons
    ]


def run_suite(specs: Sequence[RegressionSpec], panel: DesignPanel,
              handler: Optional[ErrorHandler] = None) -> List[SuiteCell]:
    """
    Schätzt alle Zellen; Reihenfolge der Ausgabe = Reihenfolge der Specs.

    Args:
        specs: Regressionszellen
        panel: Ergebnis von align_monthly
        handler: ErrorHandler für fehlgeschlagene Zellen

    Returns:
        list: SuiteCell je Spec
    """
    handler = handler or ErrorHandler(logger)
    cells = []
    for spec in specs:
        context = f"{spec.target} h={spec.horizon} {spec.predictors.value}"
        with handler.safe_operation(context=context, level="warning") as operation:
            cells.append(SuiteCell(spec=spec, result=fit_spec(panel, spec)))
        if operation.record is not None:
            cells.append(SuiteCell(spec=spec, error=operation.record))
    n_failed = sum(cell.failed for cell in cells)
    logger.info(f"Prognose-Suite: {len(cells)} Zellen, davon {n_failed} fehlgeschlagen")
    return cells


def results_frame(cells: Sequence[SuiteCell]) -> pd.DataFrame:
    """
    Lange Tabelle: eine Zeile je (Zelle, Koeffizient) mit Schätzwert,
    Statistik, R² bzw. Log-Likelihood; fehlgeschlagene Zellen mit Fehlercode.
    """
    rows = []
    for cell in cells:
        base = {
            "target": cell.spec.target,
            "predictors": cell.spec.predictors.value,
            "horizon": cell.spec.horizon,
            "estimator": cell.spec.estimator.value,
        }
        if cell.failed:
            rows.append({**base, "coefficient": "", "estimate": np.nan, "stat": np.nan,
                         "r2": np.nan, "loglik": np.nan, "n_obs": 0, "status": cell.error["error"]})
            continue
        result = cell.result
        status = "degenerate" if result.degenerate else "ok"
        for name, estimate, stat in zip(result.names, result.coefficients, result.stats):
            rows.append({**base, "coefficient": name, "estimate": estimate, "stat": stat,
                         "r2": np.nan if result.r2 is None else result.r2,
                         "loglik": np.nan if result.loglik is None else result.loglik,
                         "n_obs": result.n_obs, "status": status})
    columns = ["target", "predictors", "horizon", "estimator", "coefficient", "estimate", "stat",
               "r2", "loglik", "n_obs", "status"]
    return pd.DataFrame(rows, columns=columns)


def wide_table(cells: Sequence[SuiteCell]) -> pd.DataFrame:
    """
    Breite Tabelle im Layout der Prognosetabellen: Zeilen = Horizont,
    Spalten = (Ziel, Prädiktorsatz, Feld) mit Feldern je Verbundenheitskoeffizient
    (Schätzwert und Statistik) sowie R² (OLS) bzw. Log-Likelihood (Probit).
    """
    records: Dict[int, Dict] = {}
    for cell in cells:
        row = records.setdefault(cell.spec.horizon, {})
        key = (cell.spec.target, cell.spec.predictors.value)
        for coef in PREDICTOR_COEFFICIENTS[cell.spec.predictors]:
            if cell.failed:
                row[key + (coef,)] = np.nan
                row[key + (f"{coef}_stat",)] = np.nan
            else:
                row[key + (coef,)] = cell.result.coefficient(coef)
                row[key + (f"{coef}_stat",)] = cell.result.stat(coef)
        fit_field = "loglik" if cell.spec.kind is IndicatorKind.BINARY else "r2"
        value = None if cell.failed else getattr(cell.result, fit_field)
        row[key + (fit_field,)] = np.nan if value is None else value
    if not records:
        return pd.DataFrame()
    frame = pd.DataFrame.from_dict(records, orient="index")
    frame.columns = pd.MultiIndex.from_tuples(frame.columns, names=["target", "predictors", "field"])
    frame.index.name = "horizon"
    return frame.sort_index()
