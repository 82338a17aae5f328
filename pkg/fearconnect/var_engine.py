"""
VAR-Schätzung für fearconnect
Schätzt VAR(p)-Modelle gleichungsweise per Kleinste-Quadrate mit Konstante,
liefert die MA(∞)-Koeffizienten bis zum Horizont H und prüft die
Stabilität über die Begleitmatrix.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from fearconnect.exceptions import CollinearityError, DomainError, InsufficientSampleError

logger = logging.getLogger(__name__)

# Ab dieser Konditionszahl der Kreuzproduktmatrix wird per SVD gelöst
CONDITION_LIMIT = 1e10


@dataclass(frozen=True)
class VarModel:
    """
    Geschätztes (oder vorgegebenes) VAR(p)-Modell.

    Phi hat die Form (p, N, N), Phi[k-1] ist die Koeffizientenmatrix zu Lag k.
    Sigma ist die Residuenkovarianz mit Divisor T_eff.
    """

    p: int
    Phi: np.ndarray
    intercept: np.ndarray
    Sigma: np.ndarray
    T_eff: int
    names: Optional[Tuple[str, ...]] = None
    log_transform: bool = False

    def __post_init__(self):
        Phi = np.asarray(self.Phi, dtype=float)
        Sigma = np.asarray(self.Sigma, dtype=float)
        if Phi.ndim != 3 or Phi.shape[0] != self.p or Phi.shape[1] != Phi.shape[2]:
            raise ValueError(f"Phi muss die Form (p, N, N) haben, nicht {Phi.shape}")
        if Sigma.shape != Phi.shape[1:]:
            raise ValueError("Sigma passt nicht zur Dimension von Phi")
        if not np.allclose(Sigma, Sigma.T, atol=1e-10, rtol=0):
            raise ValueError("Sigma ist nicht symmetrisch")
        if np.any(np.diag(Sigma) < 0):
            raise ValueError("Sigma hat negative Diagonalelemente")
        object.__setattr__(self, "Phi", Phi)
        object.__setattr__(self, "Sigma", Sigma)
        object.__setattr__(self, "intercept", np.asarray(self.intercept, dtype=float))

    @property
    def N(self) -> int:
        return self.Phi.shape[1]

    @classmethod
    def from_coefficients(cls, Phi, Sigma, intercept=None, names=None) -> "VarModel":
        """
        Modell aus vorgegebenen Koeffizienten (für Simulationen und Vergleichsrechnungen).

        Args:
            Phi: N×N-Matrix (VAR(1)) oder Folge von p N×N-Matrizen
            Sigma: Innovationskovarianz
            intercept: Konstante (Standard: Nullvektor)
            names: Optionale Namensachse
        """
        Phi = np.asarray(Phi, dtype=float)
        if Phi.ndim == 2:
            Phi = Phi[np.newaxis]
        n = Phi.shape[1]
        intercept = np.zeros(n) if intercept is None else intercept
        return cls(p=Phi.shape[0], Phi=Phi, intercept=intercept, Sigma=Sigma, T_eff=0,
                   names=tuple(names) if names is not None else None)

    def companion(self) -> np.ndarray:
        """Np×Np-Begleitmatrix."""
        n, p = self.N, self.p
        comp = np.zeros((n * p, n * p))
        comp[:n, :] = np.hstack(list(self.Phi))
        if p > 1:
            comp[n:, :-n] = np.eye(n * (p - 1))
        return comp


@dataclass(frozen=True)
class MaCoefficients:
    """MA-Koeffizienten Psi_0..Psi_H mit Psi_0 = I, Form (H+1, N, N)."""

    H: int
    Psi: np.ndarray


def lagged_design(Y: np.ndarray, p: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Regressormatrix [1, y_{t-1}, ..., y_{t-p}] und Zielmatrix y_t für t = p..T-1.
    """
    T = Y.shape[0]
    blocks = [np.ones((T - p, 1))] + [Y[p - k:T - k] for k in range(1, p + 1)]
    return np.hstack(blocks), Y[p:]


def _solve_least_squares(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    XtX = X.T @ X
    cond = np.linalg.cond(XtX)
    if np.isfinite(cond) and cond <= CONDITION_LIMIT:
        try:
            return linalg.cho_solve(linalg.cho_factor(XtX), X.T @ Y)
        except linalg.LinAlgError:
            pass
    logger.debug(f"Konditionszahl {cond:.3g}, löse per SVD")
    coef, _, _, _ = linalg.lstsq(X, Y)
    return coef


def fit_var(panel, p: int, log_transform: bool = True,
            names: Optional[Sequence[str]] = None) -> VarModel:
    """
    Schätzt ein VAR(p) mit Konstante gleichungsweise per OLS.

    Args:
        panel: T×N-Matrix oder VolPanel
        p: Lag-Ordnung (>= 1)
        log_transform: Werte vor der Schätzung logarithmieren
        names: Namensachse (Standard: Namen des VolPanel)

    Returns:
        VarModel: Koeffizienten, Konstante und Residuenkovarianz (Divisor T_eff)

    Raises:
        DomainError: Nicht positive Werte bei log_transform
        InsufficientSampleError: T <= N·p + p + 1
        CollinearityError: Singuläre Regressormatrix (z.B. konstante Spalte)
    """
    if hasattr(panel, "values") and hasattr(panel, "names"):
        names = names if names is not None else panel.names
        data = panel.values
    else:
        data = panel
    Y = np.asarray(data, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, np.newaxis]
    if p < 1:
        raise ValueError("Lag-Ordnung p muss mindestens 1 sein")
    if log_transform:
        if np.any(Y <= 0):
            raise DomainError("Logarithmus nicht positiver Indexwerte",
                              {"n_non_positive": int(np.sum(Y <= 0))})
        Y = np.log(Y)

    T, n = Y.shape
    if T <= n * p + p + 1:
        raise InsufficientSampleError(
            f"Zu wenige Beobachtungen ({T}) für ein VAR({p}) mit {n} Variablen",
            {"T": T, "N": n, "p": p})

    X, Y_target = lagged_design(Y, p)
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise CollinearityError("Regressormatrix des VAR hat keinen vollen Rang",
                                {"columns": X.shape[1]})

    B = _solve_least_squares(X, Y_target)
    residuals = Y_target - X @ B
    T_eff = T - p
    Sigma = residuals.T @ residuals / T_eff
    Sigma = 0.5 * (Sigma + Sigma.T)

    Phi = np.stack([B[1 + k * n:1 + (k + 1) * n].T for k in range(p)])
    return VarModel(p=p, Phi=Phi, intercept=B[0], Sigma=Sigma, T_eff=T_eff,
                    names=tuple(names) if names is not None else None,
                    log_transform=log_transform)


def ma_coefficients(model: VarModel, H: int) -> MaCoefficients:
    """
    Psi_0 = I, Psi_h = Σ_{k=1..min(h,p)} Phi_k Psi_{h-k}.
    """
    if H < 1:
        raise ValueError("Horizont H muss mindestens 1 sein")
    n = model.N
    Psi = np.zeros((H + 1, n, n))
    Psi[0] = np.eye(n)
    for h in range(1, H + 1):
        for k in range(1, min(h, model.p) + 1):
            Psi[h] += model.Phi[k - 1] @ Psi[h - k]
    return MaCoefficients(H=H, Psi=Psi)


def is_stable(model: VarModel) -> Tuple[bool, float]:
    """
    Stabilität über den Spektralradius der Begleitmatrix.

    Returns:
        tuple: (stabil, Spektralradius)
    """
    radius = float(np.max(np.abs(np.linalg.eigvals(model.companion()))))
    return radius < 1.0, radius


def simulate_var(model: VarModel, T: int, seed: int = 0, burn: int = 200) -> np.ndarray:
    """
    Simuliert T Beobachtungen aus einem VAR mit normalverteilten Innovationen.

    Der Startwert ist der unbedingte Mittelwert (bei stabilen Modellen),
    die ersten burn Beobachtungen werden verworfen.

    Args:
        model: Modell mit Phi, intercept und Sigma
        T: Anzahl zurückgegebener Beobachtungen
        seed: Startwert des Zufallsgenerators
        burn: Einschwingphase

    Returns:
        np.ndarray: T×N-Matrix
    """
    rng = np.random.default_rng(seed)
    n, p = model.N, model.p
    try:
        chol = np.linalg.cholesky(model.Sigma)
    except np.linalg.LinAlgError:
        eigval, eigvec = np.linalg.eigh(model.Sigma)
        chol = eigvec * np.sqrt(np.clip(eigval, 0, None))

    stable, _ = is_stable(model)
    if stable:
        mean = np.linalg.solve(np.eye(n) - model.Phi.sum(axis=0), model.intercept)
    else:
        mean = np.zeros(n)

    total = T + burn
    Y = np.empty((total + p, n))
    Y[:p] = mean
    shocks = rng.standard_normal((total, n)) @ chol.T
    for t in range(p, total + p):
        value = model.intercept + shocks[t - p]
        for k in range(1, p + 1):
            value = value + model.Phi[k - 1] @ Y[t - k]
        Y[t] = value
    return Y[p + burn:]
