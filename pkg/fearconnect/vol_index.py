"""
Implizite Volatilitätsindizes für fearconnect
Berechnet für einen Basiswert und einen Handelstag den aggregierten Index
aus dem vollständigen Strip aus dem Geld liegender Optionen sowie die
positive (nur Calls) und negative (nur Puts) Komponente.

Ablauf je Tag:
- Auswahl der beiden Verfallstermine um 30 Kalendertage
- Forward und Referenzstrike K0 aus der Put-Call-Parität
- Varianzstrip je Seite und Verfall
- Interpolation der beiden Varianzen auf 30 Tage
"""

import datetime as dt
import enum
import logging
import math
from dataclasses import dataclass
from typing import Dict, Mapping, Tuple

import numpy as np

from fearconnect.exceptions import (
    InsufficientChainError,
    NegativeVarianceError,
    NonPositiveVarianceError,
    NoStripError,
    ParityError,
)
from fearconnect.market_data import ChainSlice, OptionChainDay, RateCurveDay, Right, rate_for

logger = logging.getLogger(__name__)

DAYS_PER_YEAR = 365.0


class Side(enum.Enum):
    ALL = "all"
    CALLS_ONLY = "calls_only"
    PUTS_ONLY = "puts_only"


class Flavor(enum.Enum):
    AGGREGATE = "aggregate"
    POSITIVE = "positive"
    NEGATIVE = "negative"

    @property
    def side(self) -> Side:
        return _FLAVOR_SIDES[self]


_FLAVOR_SIDES = {
    Flavor.AGGREGATE: Side.ALL,
    Flavor.POSITIVE: Side.CALLS_ONLY,
    Flavor.NEGATIVE: Side.PUTS_ONLY,
}


@dataclass(frozen=True)
class ExpirySlice:
    """
    Seitengefilterter Strip eines Verfallstermins.

    strikes, quotes und gaps sind gleich lang; quotes sind Mittelkurse Q(K),
    gaps die Strike-Abstände ΔK über genau diesen Strip.
    """

    expiry: dt.date
    n_days: int
    T: float
    r: float
    F: float
    K0: float
    side: Side
    strikes: Tuple[float, ...]
    quotes: Tuple[float, ...]
    gaps: Tuple[float, ...]

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("Laufzeit T muss positiv sein")
        if self.K0 > self.F * (1 + 1e-12):
            raise ValueError(f"K0={self.K0} liegt über dem Forward {self.F}")
        if not (len(self.strikes) == len(self.quotes) == len(self.gaps)):
            raise ValueError("strikes, quotes und gaps müssen gleich lang sein")
        strikes = np.asarray(self.strikes)
        if np.any(np.diff(strikes) <= 0):
            raise ValueError("Strikes des Strips müssen streng steigen")
        if np.any(np.asarray(self.gaps) <= 0) or np.any(np.asarray(self.quotes) <= 0):
            raise ValueError("Strike-Abstände und Mittelkurse müssen positiv sein")

    @property
    def k0_term(self) -> float:
        """Beitrag ΔK·Q/K² des Referenzstrikes (0, wenn K0 nicht im Strip liegt)."""
        for strike, quote, gap in zip(self.strikes, self.quotes, self.gaps):
            if strike == self.K0:
                return gap * quote / strike ** 2
        return 0.0


@dataclass(frozen=True)
class VarianceResult:
    """Annualisierte risikoneutrale Varianz eines Verfalls für eine Seite."""

    sigma2: float
    side: Side
    n_strikes: int
    n_days: int
    T: float


@dataclass(frozen=True)
class DayIndexes:
    """Alle drei Indexwerte eines Basiswerts an einem Tag samt Zwischenergebnissen."""

    underlier: str
    quote_date: dt.date
    values: Dict[Flavor, float]
    slices: Dict[Flavor, Tuple[ExpirySlice, ExpirySlice]]
    variances: Dict[Flavor, Tuple[VarianceResult, VarianceResult]]
    target_days: int = 30


def usable_mids(chain_slice: ChainSlice) -> Tuple[Dict[float, float], Dict[float, float]]:
    """
    Mittelkurse je Strike für Calls und Puts.

    Notierungen mit Geldkurs 0 gelten als nicht handelbar und werden
    ausgeschlossen, weil sie die Mittelkurse verfälschen.

    Returns:
        tuple: (calls, puts) als Dictionaries Strike -> Mittelkurs
    """
    calls, puts = {}, {}
    for quote in chain_slice.quotes:
        if quote.bid <= 0:
            continue
        target = calls if quote.right is Right.CALL else puts
        target[quote.strike] = quote.mid
    return calls, puts


def _n_days(quote_date: dt.date, expiry: dt.date) -> int:
    return (expiry - quote_date).days


def select_expiries(chain: OptionChainDay, target_days: int = 30,
                    min_days: int = 7) -> Tuple[ChainSlice, ChainSlice]:
    """
    Wählt den nahen und den nächsten Verfall um target_days.

    near ist der späteste Verfall mit höchstens target_days Tagen, next der
    früheste danach. Gibt es keinen Verfall bis target_days, werden die
    beiden frühesten genommen, liegen alle darunter, die beiden spätesten.
    Verfälle mit weniger als min_days Tagen oder weniger als zwei
    verwendbaren Strikes werden übergangen.

    Args:
        chain: Optionskette des Tages
        target_days: Zielhorizont in Kalendertagen
        min_days: Mindestrestlaufzeit

    Returns:
        tuple: (near, next) mit N1 < N2

    Raises:
        InsufficientChainError: Bei weniger als zwei verwendbaren Verfällen
    """
    usable = []
    for chain_slice in chain.slices:
        n_days = _n_days(chain.quote_date, chain_slice.expiry)
        calls, puts = usable_mids(chain_slice)
        if n_days >= min_days and len(set(calls) | set(puts)) >= 2:
            usable.append((n_days, chain_slice))
    usable.sort(key=lambda item: item[0])

    if len(usable) < 2:
        raise InsufficientChainError(
            f"{chain.underlier} am {chain.quote_date}: nur {len(usable)} verwendbare(r) Verfall/Verfälle",
            {"underlier": chain.underlier, "date": chain.quote_date.isoformat()})

    below = [item for item in usable if item[0] <= target_days]
    above = [item for item in usable if item[0] > target_days]
    if below and above:
        return below[-1][1], above[0][1]
    if above:
        return usable[0][1], usable[1][1]
    return usable[-2][1], usable[-1][1]


def compute_forward(calls: Mapping[float, float], puts: Mapping[float, float],
                    r: float, T: float) -> Tuple[float, float]:
    """
    Forward aus der Put-Call-Parität und Referenzstrike K0.

    Der Forward wird am Strike mit der kleinsten Differenz |c - p| bestimmt:
    F = K + e^{rT}(c - p). K0 ist der größte Strike kleiner oder gleich F.

    Args:
        calls: Strike -> Call-Mittelkurs
        puts: Strike -> Put-Mittelkurs
        r: Zins
        T: Laufzeit in Jahren

    Returns:
        tuple: (F, K0)

    Raises:
        ParityError: Ohne Strike mit Call und Put oder ohne Strike unter F
    """
    common = sorted(set(calls) & set(puts))
    if not common:
        raise ParityError("Kein Strike mit Call- und Put-Notierung für die Put-Call-Parität")
    diffs = np.array([abs(calls[k] - puts[k]) for k in common])
    k_star = common[int(np.argmin(diffs))]
    forward = k_star + math.exp(r * T) * (calls[k_star] - puts[k_star])

    strikes = np.array(sorted(set(calls) | set(puts)))
    below = strikes[strikes <= forward]
    if below.size == 0:
        raise ParityError(f"Kein Strike unterhalb des Forwards {forward:.6g}",
                          {"forward": forward})
    return forward, float(below[-1])


def strike_gaps(strikes) -> np.ndarray:
    """
    Strike-Abstände ΔK eines Strips.

    Innen (K_{i+1} - K_{i-1}) / 2, an den Rändern der einfache Abstand
    zum Nachbarstrike.

    Args:
        strikes: Streng steigende Strikes (mindestens zwei)

    Returns:
        np.ndarray: ΔK je Strike

    Raises:
        NoStripError: Bei weniger als zwei Strikes
    """
    strikes = np.asarray(strikes, dtype=float)
    if strikes.size < 2:
        raise NoStripError("Für Strike-Abstände werden mindestens zwei Strikes benötigt",
                           {"n_strikes": int(strikes.size)})
    gaps = np.empty_like(strikes)
    gaps[1:-1] = 0.5 * (strikes[2:] - strikes[:-2])
    gaps[0] = strikes[1] - strikes[0]
    gaps[-1] = strikes[-1] - strikes[-2]
    return gaps


def _side_strip(calls, puts, k0, side: Side):
    strip = []
    if side is Side.ALL:
        strip.extend((k, puts[k]) for k in sorted(puts) if k < k0)
        at_k0 = [q[k0] for q in (calls, puts) if k0 in q]
        if at_k0:
            strip.append((k0, float(np.mean(at_k0))))
        strip.extend((k, calls[k]) for k in sorted(calls) if k > k0)
    elif side is Side.CALLS_ONLY:
        strip.extend((k, calls[k]) for k in sorted(calls) if k >= k0)
    else:
        strip.extend((k, puts[k]) for k in sorted(puts) if k <= k0)
    return strip


def build_slice(chain_slice: ChainSlice, quote_date: dt.date, curve: RateCurveDay,
                side: Side) -> ExpirySlice:
    """
    Baut den seitengefilterten Strip eines Verfalls.

    Args:
        chain_slice: Notierungen des Verfalls
        quote_date: Handelstag
        curve: Zinskurve des Tages
        side: ALL (OTM-Puts, K0-Mittel, OTM-Calls), CALLS_ONLY (K >= K0)
            oder PUTS_ONLY (K <= K0)

    Returns:
        ExpirySlice: Strip mit T, r, F, K0 und ΔK

    Raises:
        NoStripError: Wenn der gefilterte Strip weniger als zwei Strikes hat
    """
    n_days = _n_days(quote_date, chain_slice.expiry)
    T = n_days / DAYS_PER_YEAR
    r = rate_for(curve, n_days)
    calls, puts = usable_mids(chain_slice)
    forward, k0 = compute_forward(calls, puts, r, T)

    strip = _side_strip(calls, puts, k0, side)
    if len(strip) < 2:
        raise NoStripError(
            f"Strip für {side.value} am {quote_date} (Verfall {chain_slice.expiry}) zu kurz",
            {"side": side.value, "n_strikes": len(strip), "expiry": chain_slice.expiry.isoformat()})
    strikes = [k for k, _ in strip]
    return ExpirySlice(
        expiry=chain_slice.expiry, n_days=n_days, T=T, r=r, F=forward, K0=k0, side=side,
        strikes=tuple(strikes), quotes=tuple(q for _, q in strip),
        gaps=tuple(strike_gaps(strikes).tolist()),
    )


def variance_strip(expiry_slice: ExpirySlice) -> VarianceResult:
    """
    Risikoneutrale Varianz eines Verfalls:

        σ² = (2 e^{rT} / T) Σ ΔK_i / K_i² · Q(K_i) − (1/T) (F/K0 − 1)²

    Der Korrekturterm wird für alle drei Seiten abgezogen.

    Args:
        expiry_slice: Seitengefilterter Strip

    Returns:
        VarianceResult

    Raises:
        NoStripError: Bei leerem Strip
        NonPositiveVarianceError: Wenn σ² <= 0 (pathologische Kette)
    """
    s = expiry_slice
    if not s.strikes:
        raise NoStripError(f"Leerer Strip für {s.side.value}", {"side": s.side.value})
    strikes = np.asarray(s.strikes)
    contributions = np.asarray(s.gaps) / strikes ** 2 * np.asarray(s.quotes)
    sigma2 = (2.0 * math.exp(s.r * s.T) / s.T) * contributions.sum() \
        - (s.F / s.K0 - 1.0) ** 2 / s.T
    if not np.isfinite(sigma2) or sigma2 <= 0:
        raise NonPositiveVarianceError(
            f"Nicht positive Varianz {sigma2:.6g} für {s.side.value} (Verfall {s.expiry})",
            {"sigma2": float(sigma2), "side": s.side.value, "expiry": s.expiry.isoformat()})
    return VarianceResult(sigma2=float(sigma2), side=s.side, n_strikes=len(s.strikes),
                          n_days=s.n_days, T=s.T)


def _weights(n1: int, n2: int, target_days: int) -> Tuple[float, float]:
    return (n2 - target_days) / (n2 - n1), (target_days - n1) / (n2 - n1)


def interpolate_index(near: VarianceResult, nxt: VarianceResult, target_days: int = 30) -> float:
    """
    Interpoliert zwei Varianzen auf target_days und skaliert zum Index:

        100 · sqrt((365/30) [T1 σ²(T1) (N2−30)/(N2−N1) + T2 σ²(T2) (30−N1)/(N2−N1)])

    Args:
        near: Varianz des nahen Verfalls
        nxt: Varianz des nächsten Verfalls
        target_days: Zielhorizont in Tagen

    Returns:
        float: Indexwert in Volatilitätspunkten

    Raises:
        ValueError: Wenn N1 >= N2
        NegativeVarianceError: Wenn die interpolierte Varianz negativ ist
    """
    if near.n_days >= nxt.n_days:
        raise ValueError(f"N1={near.n_days} muss kleiner als N2={nxt.n_days} sein")
    w1, w2 = _weights(near.n_days, nxt.n_days, target_days)
    radicand = (DAYS_PER_YEAR / target_days) * (near.T * near.sigma2 * w1 + nxt.T * nxt.sigma2 * w2)
    if radicand < 0:
        raise NegativeVarianceError(
            f"Negative interpolierte Varianz {radicand:.6g}",
            {"near": {"sigma2": near.sigma2, "n_days": near.n_days},
             "next": {"sigma2": nxt.sigma2, "n_days": nxt.n_days}})
    return 100.0 * math.sqrt(radicand)


def day_indexes(chain: OptionChainDay, curve: RateCurveDay, target_days: int = 30,
                min_days: int = 7) -> DayIndexes:
    """
    Berechnet aggregierten, positiven und negativen Index eines Tages.

    Alle drei Varianten teilen Verfallsauswahl, Forward und K0.

    Args:
        chain: Optionskette des Basiswerts am Tag
        curve: Zinskurve des Tages
        target_days: Zielhorizont in Tagen
        min_days: Mindestrestlaufzeit eines Verfalls

    Returns:
        DayIndexes
    """
    near, nxt = select_expiries(chain, target_days, min_days)
    values, slices, variances = {}, {}, {}
    for flavor in Flavor:
        pair = tuple(build_slice(s, chain.quote_date, curve, flavor.side) for s in (near, nxt))
        results = tuple(variance_strip(s) for s in pair)
        slices[flavor] = pair
        variances[flavor] = results
        values[flavor] = interpolate_index(results[0], results[1], target_days)
    return DayIndexes(underlier=chain.underlier, quote_date=chain.quote_date, values=values,
                      slices=slices, variances=variances, target_days=target_days)


def decomposition_gap(day: DayIndexes) -> float:
    """
    Explizite Abweichung VIX² − (VIX⁺² + VIX⁻²) eines Tages.

    Der aggregierte Strip zählt K0 einmal mit dem Call/Put-Mittel und dem
    inneren Abstand, die beiden Teilstrips zählen K0 jeweils mit dem
    Randabstand; zusätzlich wird der Forward-Korrekturterm in beiden
    Teilstrips abgezogen. Die Differenz dieser Terme, über beide Verfälle
    interpoliert, ist genau die Abweichung.

    Exakt nur, wenn an K0 beider Verfälle sowohl ein Call- als auch ein
    Put-Mittelkurs vorliegt und die Strikeabstände abseits von K0 in allen
    drei Strips übereinstimmen. Fehlt an K0 eine Seite, verwendet der
    aggregierte Strip den vorhandenen Kurs statt des Mittels, und der
    Rückgabewert ist nur noch eine Näherung der tatsächlichen Abweichung.

    Args:
        day: Ergebnis von day_indexes

    Returns:
        float: Abweichung in quadrierten Volatilitätspunkten
    """
    gap = 0.0
    pairs = zip(day.slices[Flavor.AGGREGATE], day.slices[Flavor.POSITIVE], day.slices[Flavor.NEGATIVE])
    near_all, next_all = day.slices[Flavor.AGGREGATE]
    w1, w2 = _weights(near_all.n_days, next_all.n_days, day.target_days)
    for weight, (s_all, s_pos, s_neg) in zip((w1, w2), pairs):
        k0_diff = s_all.k0_term - s_pos.k0_term - s_neg.k0_term
        g = (2.0 * math.exp(s_all.r * s_all.T) / s_all.T) * k0_diff \
            + (s_all.F / s_all.K0 - 1.0) ** 2 / s_all.T
        gap += weight * s_all.T * g
    return 100.0 ** 2 * (DAYS_PER_YEAR / day.target_days) * gap
