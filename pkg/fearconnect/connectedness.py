"""
Connectedness-Maße für fearconnect
Generalisierte Prognosefehler-Varianzzerlegung (unabhängig von der
Reihenfolge der Variablen) und die daraus abgeleiteten Maße: Gesamt-,
FROM-, TO-, NET- und paarweise Verbundenheit sowie die asymmetrische
Angst-Verbundenheit (AFC) aus positiver und negativer Variante.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from fearconnect.exceptions import DegenerateVarianceError, FlavorMismatchError
from fearconnect.var_engine import VarModel, fit_var, is_stable, ma_coefficients
from fearconnect.vol_index import Flavor

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FevdTable:
    """
    Varianzzerlegung zum Horizont H.

    theta_raw ist die ungenormte generalisierte Zerlegung (Zeilensummen
    ungleich 1), theta die zeilenweise normierte Fassung.
    """

    H: int
    theta_raw: np.ndarray
    theta: np.ndarray
    names: Tuple[str, ...]

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.ndim != 2 or theta.shape[0] != theta.shape[1] or theta.shape[0] != len(self.names):
            raise ValueError(f"theta-Form {theta.shape} passt nicht zu {len(self.names)} Namen")
        if np.any(theta < 0):
            raise ValueError("theta enthält negative Anteile")
        if not np.allclose(theta.sum(axis=1), 1.0, atol=1e-10, rtol=0):
            raise ValueError("Zeilen von theta summieren sich nicht zu 1")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "theta_raw", np.asarray(self.theta_raw, dtype=float))

    @classmethod
    def from_shares(cls, shares, names: Sequence[str], H: int = 0) -> "FevdTable":
        """
        Tabelle aus vorgegebenen Anteilen; jede Zeile wird auf 1 normiert.
        """
        raw = np.asarray(shares, dtype=float)
        return cls(H=H, theta_raw=raw, theta=raw / raw.sum(axis=1, keepdims=True), names=tuple(names))


@dataclass(frozen=True)
class ConnectednessSummary:
    """
    Verbundenheitsmaße einer Indexvariante in Prozent.

    from_ ist FROM (empfangen von anderen), to TO (an andere abgegeben),
    net = to - from_. pairwise[j, k] = 100 (theta[k, j] - theta[j, k]).
    shares enthält 100·theta für die Tabellenausgabe.
    """

    flavor: Flavor
    total: float
    from_: np.ndarray
    to: np.ndarray
    net: np.ndarray
    pairwise: np.ndarray
    shares: np.ndarray
    names: Tuple[str, ...]


@dataclass(frozen=True)
class AfcReport:
    """Asymmetrische Angst-Verbundenheit C⁺ − C⁻ samt vorzeichenbehafteter NET-Maße."""

    afc_total: float
    net_pos: np.ndarray
    net_neg: np.ndarray
    afc_net: np.ndarray
    names: Tuple[str, ...]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"net_pos": self.net_pos, "net_neg": self.net_neg, "afc_net": self.afc_net},
                             index=pd.Index(self.names, name="name"))
        return frame


@dataclass(frozen=True)
class StaticResult:
    """Ergebnis der statischen Analyse einer Variante über die volle Stichprobe."""

    model: VarModel
    table: FevdTable
    summary: ConnectednessSummary
    stable: bool
    radius: float


def _names_for(model: VarModel):
    return model.names if model.names is not None else tuple(f"y{i + 1}" for i in range(model.N))


def gfevd(model: VarModel, H: int) -> FevdTable:
    """
    Generalisierte Varianzzerlegung:

        theta_raw[j, k] = σ_kk⁻¹ Σ_{h=0..H} ((Ψ_h Σ)_{jk})² / Σ_{h=0..H} (Ψ_h Σ Ψ_hᵀ)_{jj}

    Die Summen laufen über h = 0..H einschließlich.

    Args:
        model: VAR-Modell
        H: Prognosehorizont

    Returns:
        FevdTable

    Raises:
        DegenerateVarianceError: Wenn eine Residuenvarianz σ_kk null ist
    """
    Sigma = model.Sigma
    sigma_diag = np.diag(Sigma)
    if np.any(sigma_diag <= 0):
        zero = [int(i) for i in np.flatnonzero(sigma_diag <= 0)]
        raise DegenerateVarianceError("Residuenvarianz null, Zerlegung nicht definiert",
                                      {"indices": zero})
    Psi = ma_coefficients(model, H).Psi
    psi_sigma = Psi @ Sigma
    numerator = (psi_sigma ** 2).sum(axis=0) / sigma_diag[np.newaxis, :]
    denominator = np.einsum("hjk,hjk->j", psi_sigma, Psi)
    theta_raw = numerator / denominator[:, np.newaxis]
    theta = theta_raw / theta_raw.sum(axis=1, keepdims=True)
    return FevdTable(H=H, theta_raw=theta_raw, theta=theta, names=_names_for(model))


def summarize(table: FevdTable, flavor: Flavor = Flavor.AGGREGATE) -> ConnectednessSummary:
    """
    Leitet alle Verbundenheitsmaße aus einer normierten Zerlegung ab.

    Richtungsmaße sind 100-fache Zeilen- bzw. Spaltensummen ohne Diagonale,
    der Gesamtindex ist 100 · Σ_{j≠k} theta[j, k] / N.
    """
    theta = table.theta
    n = theta.shape[0]
    off_diagonal = theta - np.diag(np.diag(theta))
    from_ = 100.0 * off_diagonal.sum(axis=1)
    to = 100.0 * off_diagonal.sum(axis=0)
    return ConnectednessSummary(
        flavor=flavor,
        total=float(100.0 * off_diagonal.sum() / n),
        from_=from_,
        to=to,
        net=to - from_,
        pairwise=100.0 * (theta.T - theta),
        shares=100.0 * theta,
        names=table.names,
    )


def afc(pos: ConnectednessSummary, neg: ConnectednessSummary) -> AfcReport:
    """
    Asymmetrische Angst-Verbundenheit AFC = C⁺ − C⁻.

    Raises:
        FlavorMismatchError: Falsche Varianten oder unterschiedliche Namensachsen
    """
    if pos.flavor is not Flavor.POSITIVE or neg.flavor is not Flavor.NEGATIVE:
        raise FlavorMismatchError(
            f"AFC benötigt positive und negative Variante, erhalten {pos.flavor.value}/{neg.flavor.value}",
            {"pos": pos.flavor.value, "neg": neg.flavor.value})
    if tuple(pos.names) != tuple(neg.names):
        raise FlavorMismatchError("Namensachsen der Varianten stimmen nicht überein",
                                  {"pos": list(pos.names), "neg": list(neg.names)})
    return AfcReport(afc_total=pos.total - neg.total, net_pos=pos.net, net_neg=neg.net,
                     afc_net=pos.net - neg.net, names=tuple(pos.names))


def static_analysis(panel, p: int = 4, H: int = 12, log_transform: bool = True,
                    flavor: Optional[Flavor] = None) -> StaticResult:
    """
    VAR-Schätzung, Zerlegung und Verbundenheitsmaße über die volle Stichprobe.

    Args:
        panel: VolPanel (oder T×N-Matrix mit explizitem flavor)
        p: Lag-Ordnung
        H: Prognosehorizont
        log_transform: Logarithmierte Indizes verwenden
        flavor: Variante (Standard: Variante des Panels)

    Returns:
        StaticResult
    """
    flavor = flavor or getattr(panel, "flavor", Flavor.AGGREGATE)
    model = fit_var(panel, p, log_transform)
    stable, radius = is_stable(model)
    if not stable:
        logger.warning(f"VAR für {flavor.value} ist instabil (Spektralradius {radius:.4f})")
    table = gfevd(model, H)
    return StaticResult(model=model, table=table, summary=summarize(table, flavor),
                        stable=stable, radius=radius)


def sensitivity_grid(panel, lags: Iterable[int] = (2, 3, 4, 5),
                     horizons: Iterable[int] = (4, 6, 10, 14),
                     log_transform: bool = True) -> pd.DataFrame:
    """
    Gesamtindex für jede Kombination aus Lag-Ordnung und Horizont.

    Returns:
        pd.DataFrame: Zeilen = Lag-Ordnung, Spalten = Horizont
    """
    horizons = list(horizons)
    rows = {}
    for p in lags:
        model = fit_var(panel, p, log_transform)
        rows[p] = [summarize(gfevd(model, H)).total for H in horizons]
    frame = pd.DataFrame.from_dict(rows, orient="index", columns=horizons)
    frame.index.name = "lags"
    frame.columns.name = "horizon"
    return frame


def summary_frame(summary: ConnectednessSummary) -> pd.DataFrame:
    """
    Tabellenlayout der statischen Analyse: Anteilsmatrix (Zeile empfängt
    von Spalte), FROM-Spalte, TO- und NET-Zeile, Gesamtindex in der Ecke
    TO/FROM.
    """
    names = list(summary.names)
    frame = pd.DataFrame(summary.shares, index=names, columns=names)
    frame["FROM"] = summary.from_
    frame.loc["TO"] = list(summary.to) + [summary.total]
    frame.loc["NET"] = list(summary.net) + [np.nan]
    frame.index.name = summary.flavor.value
    return frame
