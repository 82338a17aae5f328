"""
Prognoseregressionen für fearconnect
Monatliche Ausrichtung von Verbundenheit und Indikatoren, OLS mit
Newey-West-Kovarianz (Bartlett-Kern) und Probit per gedämpftem
Newton-Verfahren.
"""

import enum
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg, special

from fearconnect.exceptions import (
    CollinearityError,
    ConvergenceError,
    InsufficientSampleError,
    NumericalError,
    SeparationError,
)
from fearconnect.market_data import IndicatorKind, IndicatorSeries

logger = logging.getLogger(__name__)

# Verbundenheitsspalten im Designpanel
CONN_COLUMNS = ("aggregate", "positive", "negative")

# Relative Toleranz der Log-Likelihood in der Schrittweitensuche
LOGLIK_RTOL = 1e-10


class Estimator(enum.Enum):
    OLS_HAC = "ols_hac"
    PROBIT = "probit"


class PredictorSet(enum.Enum):
    TOTAL = "total"
    POS_NEG = "pos_neg"
    RATIO = "ratio"

    def terms(self, frame: pd.DataFrame) -> Dict[str, pd.Series]:
        """Regressoren der Verbundenheit mit Koeffizientennamen."""
        if self is PredictorSet.TOTAL:
            return {"beta": frame["aggregate"]}
        if self is PredictorSet.POS_NEG:
            return {"beta_neg": frame["negative"], "beta_pos": frame["positive"]}
        return {"beta_ratio": frame["negative"] / frame["positive"].where(frame["positive"] != 0)}


@dataclass(frozen=True)
class RegressionSpec:
    """Eine Zelle der Prognosetabelle: Zielreihe × Horizont × Prädiktoren."""

    target: str
    kind: IndicatorKind
    horizon: int
    predictors: PredictorSet
    endo_lags: int = 12
    estimator: Optional[Estimator] = None
    hac_lags: Optional[int] = None

    def __post_init__(self):
        expected = Estimator.PROBIT if self.kind is IndicatorKind.BINARY else Estimator.OLS_HAC
        if self.estimator is None:
            object.__setattr__(self, "estimator", expected)
        elif self.estimator is not expected:
            raise ValueError(f"{self.target}: Schätzer {self.estimator.value} passt nicht zu {self.kind.value}")
        if self.horizon < 1:
            raise ValueError("Horizont muss mindestens 1 Monat sein")
        if self.endo_lags < 0:
            raise ValueError("endo_lags darf nicht negativ sein")

    @property
    def effective_hac_lags(self) -> int:
        return self.horizon if self.hac_lags is None else self.hac_lags


@dataclass(frozen=True)
class RegressionResult:
    """
    Schätzergebnis einer Regression.

    stats sind t-Statistiken (OLS, Newey-West) bzw. z-Statistiken (Probit).
    r2 nur für OLS, loglik nur für Probit. degenerate markiert einen
    perfekten Fit, dessen Statistiken nicht definiert sind.
    """

    names: Tuple[str, ...]
    coefficients: np.ndarray
    stats: np.ndarray
    n_obs: int
    estimator: Estimator
    r2: Optional[float] = None
    loglik: Optional[float] = None
    degenerate: bool = False
    iterations: int = 0
    covariance: Optional[np.ndarray] = None

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def stat(self, name: str) -> float:
        return float(self.stats[self.names.index(name)])


@dataclass
class DesignPanel:
    """Monatliches Panel aus Verbundenheit und geglätteten Indikatoren."""

    frame: pd.DataFrame
    kinds: Dict[str, IndicatorKind]
    dropped_rows: int = 0
    dropped_months: List[str] = field(default_factory=list)

    @property
    def targets(self) -> List[str]:
        return list(self.kinds)


def align_monthly(conn: pd.DataFrame, indicators: Sequence[IndicatorSeries], window: int = 3,
                  min_months: int = 24) -> DesignPanel:
    """
    Richtet monatliche Verbundenheit und Indikatoren aus.

    Jeder Indikator wird über das Quartal bis einschließlich des Monats
    gemittelt (gleitender Mittelwert über window Monate); binäre Reihen
    werden zu 1, wenn der Mittelwert 0.5 übersteigt. Monate mit einer
    Lücke in einer benötigten Spalte werden verworfen und gezählt.

    Args:
        conn: Monatliche Verbundenheit (PeriodIndex, Spalten je Variante)
        indicators: Indikatorreihen
        window: Anzahl gemittelter Monate
        min_months: Mindestanzahl vollständiger Monate

    Returns:
        DesignPanel

    Raises:
        InsufficientSampleError: Weniger als min_months vollständige Monate
    """
    columns = {}
    kinds = {}
    for indicator in indicators:
        raw = indicator.to_series()
        if raw.empty:
            continue
        full_index = pd.period_range(raw.index.min(), raw.index.max(), freq="M")
        smoothed = raw.reindex(full_index).rolling(window, min_periods=window).mean()
        if indicator.kind is IndicatorKind.BINARY:
            smoothed = (smoothed > 0.5).astype(float).where(smoothed.notna())
        columns[indicator.name] = smoothed
        kinds[indicator.name] = indicator.kind

    conn = conn[[c for c in CONN_COLUMNS if c in conn.columns]]
    frame = conn.join(pd.DataFrame(columns), how="inner") if columns else conn.copy()
    complete = frame.notna().all(axis=1)
    dropped = [str(m) for m in frame.index[~complete]]
    frame = frame[complete]
    if dropped:
        logger.info(f"{len(dropped)} Monate mit Lücken verworfen")
    if len(frame) < min_months:
        raise InsufficientSampleError(
            f"Nur {len(frame)} vollständige Monate, mindestens {min_months} nötig",
            {"complete_months": len(frame), "min_months": min_months})
    frame.index.name = "month"
    return DesignPanel(frame=frame, kinds=kinds, dropped_rows=len(dropped), dropped_months=dropped)


def design_matrix(panel: DesignPanel, spec: RegressionSpec) -> Tuple[np.ndarray, np.ndarray, Tuple[str, ...]]:
    """
    Zielvektor y_{t+h} und Regressoren {Konstante, Verbundenheit_t, Ind_t..Ind_{t-L+1}}.

    Verschiebungen laufen über die lückenlose Monatsachse, verworfene
    Monate erzeugen also fehlende Lags statt falscher Nachbarn.
    """
    frame = panel.frame
    full = frame.reindex(pd.period_range(frame.index.min(), frame.index.max(), freq="M"))
    target = full[spec.target]
    parts = {"y": target.shift(-spec.horizon), "const": pd.Series(1.0, index=full.index)}
    parts.update(spec.predictors.terms(full))
    for k in range(spec.endo_lags):
        parts[f"gamma_{k}"] = target.shift(k)
    data = pd.DataFrame(parts).dropna()
    names = tuple(c for c in data.columns if c != "y")
    return data["y"].to_numpy(), data[list(names)].to_numpy(), names


def _check_rank(X: np.ndarray) -> None:
    if X.shape[0] <= X.shape[1]:
        raise InsufficientSampleError(f"{X.shape[0]} Beobachtungen für {X.shape[1]} Regressoren",
                                      {"n_obs": X.shape[0], "n_params": X.shape[1]})
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise CollinearityError("Regressormatrix hat keinen vollen Spaltenrang", {"columns": X.shape[1]})


def hac_covariance(X: np.ndarray, residuals: np.ndarray, hac_lags: int) -> np.ndarray:
    """
    Newey-West-Sandwich (XᵀX)⁻¹ S (XᵀX)⁻¹ mit Bartlett-Gewichten
    w_l = 1 - l/(L+1), ohne Freiheitsgradkorrektur.
    """
    scores = X * residuals[:, np.newaxis]
    S = scores.T @ scores
    for lag in range(1, hac_lags + 1):
        weight = 1.0 - lag / (hac_lags + 1.0)
        gamma = scores[lag:].T @ scores[:-lag]
        S += weight * (gamma + gamma.T)
    bread = linalg.inv(X.T @ X)
    return bread @ S @ bread


def ols_hac(y, X, hac_lags: int, names: Optional[Sequence[str]] = None) -> RegressionResult:
    """
    OLS mit Newey-West-t-Statistiken.

    Args:
        y: Zielvektor
        X: Regressormatrix (Konstante bereits enthalten)
        hac_lags: Anzahl Lags im Bartlett-Kern (0 = White)
        names: Koeffizientennamen

    Returns:
        RegressionResult mit t-Statistiken und R²; bei perfektem Fit
        degenerate=True und NaN-Statistiken

    Raises:
        CollinearityError: X ohne vollen Spaltenrang
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    _check_rank(X)
    beta, _, _, _ = linalg.lstsq(X, y)
    residuals = y - X @ beta
    ssr = float(residuals @ residuals)
    centered = y - y.mean()
    sst = float(centered @ centered)
    r2 = 1.0 - ssr / sst if sst > 0 else float("nan")
    names = tuple(names) if names is not None else tuple(f"x{i}" for i in range(X.shape[1]))

    scale = max(sst, float(y @ y), 1.0)
    if ssr <= 1e-24 * scale:
        logger.debug("Perfekter Fit, t-Statistiken nicht definiert")
        return RegressionResult(names=names, coefficients=beta, stats=np.full(beta.shape, np.nan),
                                n_obs=len(y), estimator=Estimator.OLS_HAC, r2=r2, degenerate=True)

    covariance = hac_covariance(X, residuals, hac_lags)
    stats = beta / np.sqrt(np.diag(covariance))
    return RegressionResult(names=names, coefficients=beta, stats=stats, n_obs=len(y),
                            estimator=Estimator.OLS_HAC, r2=r2, covariance=covariance)


def probit_loglik(beta: np.ndarray, y: np.ndarray, X: np.ndarray) -> float:
    q = 2.0 * y - 1.0
    return float(special.log_ndtr(q * (X @ beta)).sum())


def _probit_derivatives(beta, y, X):
    q = 2.0 * y - 1.0
    xb = X @ beta
    # φ(q·xb)/Φ(q·xb) in Logarithmen, damit große |xb| nicht unterlaufen
    log_pdf = -0.5 * (q * xb) ** 2 - 0.5 * np.log(2.0 * np.pi)
    lam = q * np.exp(log_pdf - special.log_ndtr(q * xb))
    gradient = X.T @ lam
    hessian = -(X * (lam * (lam + xb))[:, np.newaxis]).T @ X
    return gradient, hessian


def probit_fit(y, X, names: Optional[Sequence[str]] = None, max_iter: int = 100,
               tol: float = 1e-8, max_coef: float = 50.0) -> RegressionResult:
    """
    Probit-Schätzung per gedämpftem Newton-Verfahren mit Schrittweitenhalbierung.

    Konvergenz, sobald die Maximumnorm des Gradienten oder des Newton-Schritts
    unter tol fällt oder die Schrittweitenhalbierung die Likelihood nur noch
    im Rahmen der Rundung verändert; z-Statistiken aus der inversen
    beobachteten Information.

    Raises:
        SeparationError: Koeffizienten divergieren bei steigender Likelihood
            oder die Daten werden perfekt getrennt
        ConvergenceError: Keine Konvergenz nach max_iter Iterationen
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("Probit benötigt eine binäre Zielgröße")
    if y.min() == y.max():
        raise InsufficientSampleError("Binäre Zielgröße hat nur eine Ausprägung",
                                      {"value": float(y[0]), "n_obs": len(y)})
    _check_rank(X)
    names = tuple(names) if names is not None else tuple(f"x{i}" for i in range(X.shape[1]))

    beta = np.zeros(X.shape[1])
    loglik = probit_loglik(beta, y, X)
    trace = []
    converged = False
    for iteration in range(1, max_iter + 1):
        gradient, hessian = _probit_derivatives(beta, y, X)
        trace.append({"iteration": iteration, "loglik": loglik, "max_gradient": float(np.abs(gradient).max())})
        if np.abs(gradient).max() < tol:
            converged = True
            break
        try:
            step = linalg.solve(-hessian, gradient, assume_a="pos")
        except linalg.LinAlgError:
            step = linalg.lstsq(-hessian, gradient)[0]
        if np.abs(step).max() < tol:
            converged = True
            break

        # Rundungsrauschen der Summe über alle Beobachtungen
        slack = LOGLIK_RTOL * abs(loglik)
        scale = 1.0
        candidate = beta + step
        new_loglik = probit_loglik(candidate, y, X)
        for _ in range(40):
            if new_loglik >= loglik - slack:
                break
            scale *= 0.5
            candidate = beta + scale * step
            new_loglik = probit_loglik(candidate, y, X)
        else:
            raise ConvergenceError("Keine Verbesserung der Likelihood durch Schrittweitenhalbierung",
                                   {"trace": trace})

        if np.abs(candidate).max() > max_coef and new_loglik > loglik:
            raise SeparationError("Perfekte Trennung: Koeffizienten divergieren",
                                  {"max_abs_coef": float(np.abs(candidate).max()), "iteration": iteration})
        stalled = abs(new_loglik - loglik) <= slack and scale * np.abs(step).max() < np.sqrt(tol)
        beta, loglik = candidate, new_loglik
        if stalled:
            converged = True
            break

    if not converged:
        raise ConvergenceError(f"Probit nach {max_iter} Iterationen nicht konvergiert", {"trace": trace})

    fitted = special.ndtr(X @ beta)
    if np.abs(fitted - y).max() < 1e-8:
        raise SeparationError("Perfekte Trennung: angepasste Wahrscheinlichkeiten gleich der Zielgröße",
                              {"iteration": len(trace)})

    _, hessian = _probit_derivatives(beta, y, X)
    covariance = linalg.inv(-hessian)
    stats = beta / np.sqrt(np.diag(covariance))
    return RegressionResult(names=names, coefficients=beta, stats=stats, n_obs=len(y),
                            estimator=Estimator.PROBIT, loglik=loglik, iterations=len(trace),
                            covariance=covariance)


def fit_spec(panel: DesignPanel, spec: RegressionSpec) -> RegressionResult:
    """
    Baut das Design einer Zelle und schätzt sie mit dem passenden Schätzer.

    Raises:
        NumericalError: Eine Matrixzerlegung ist numerisch gescheitert
    """
    y, X, names = design_matrix(panel, spec)
    try:
        if spec.estimator is Estimator.PROBIT:
            return probit_fit(y, X, names)
        return ols_hac(y, X, spec.effective_hac_lags, names)
    except linalg.LinAlgError as e:
        raise NumericalError(f"{spec.target} h={spec.horizon}: {e}",
                             {"target": spec.target, "horizon": spec.horizon, "n_obs": len(y)}) from e
