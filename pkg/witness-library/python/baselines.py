"""
Baselines - covariance-matrix entanglement criteria used for comparison.

Both criteria take the symmetrized covariance matrix of two modes ordered (x_a, p_a, x_b, p_b)
with x = (a + a^dag)/sqrt(2), so the vacuum has variance 1/2. Negative values flag entanglement.

Simon (partial transposition of the second moments):
    det A det B + (1/4 - |det C|)^2 - tr(A J C J B J C^T J) - (det A + det B)/4
for the blocks V = [[A, C], [C^T, B]] and J = [[0, 1], [-1, 0]].

Duan (EPR-type variance sum):
    min_a [ a^2 (tr A - 1) + (tr B - 1)/a^2 ] - 2 rho,
    rho = sqrt((C_xx - C_pp)^2 + (C_xp + C_px)^2),
which is Var(u) + Var(v) - (a^2 + 1/a^2) for u = a x_a + x_b'/a, v = a p_a - p_b'/a with the
local rotation of mode b chosen optimally.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from benchmark_configs import bell_state
from errors import InvalidCovariance
from fock_oracle import FockCutoff, choose_cutoff, covariance_matrix, state_to_fock, uncertainty_margin

logger = logging.getLogger(__name__)

UNCERTAINTY_TOLERANCE = -1e-6
DUAN_SCALE_RANGE = (1e-3, 1e3)
DUAN_GRID_POINTS = 121
# values within rounding of zero sit on the separable boundary
SIGN_TOLERANCE = 1e-9

_J = np.array([[0.0, 1.0], [-1.0, 0.0]])


class Criterion(str, Enum):
    SIMON = "simon"
    DUAN = "duan"


@dataclass(frozen=True)
class BaselineResult:
    """
    Value of a covariance criterion.

    Attributes:
        criterion (Criterion): Which test
        value (float): Criterion value, negative for detected entanglement
        entangled (bool): value < -SIGN_TOLERANCE
    """
    criterion: Criterion
    value: float
    entangled: bool

    @classmethod
    def of(cls, criterion: Criterion, value: float) -> "BaselineResult":
        return cls(criterion=criterion, value=float(value), entangled=bool(value < -SIGN_TOLERANCE))

    def to_json(self) -> dict:
        return {"criterion": self.criterion.value, "value": self.value, "entangled": self.entangled}


def check_uncertainty(cov: np.ndarray) -> np.ndarray:
    """
    Validate a two-mode covariance matrix.

    Returns:
        np.ndarray: The matrix as a real 4x4 array

    Raises:
        InvalidCovariance: If it is not symmetric 4x4 or violates V + (i/2) Omega >= 0
    """
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (4, 4):
        raise InvalidCovariance(f"Expected a 4x4 covariance matrix, got shape {cov.shape}")
    if np.max(np.abs(cov - cov.T)) > 1e-10:
        raise InvalidCovariance("Covariance matrix is not symmetric")
    margin = uncertainty_margin(cov)
    if margin < UNCERTAINTY_TOLERANCE:
        raise InvalidCovariance(f"Covariance matrix violates the uncertainty relation (eigenvalue {margin:.3g})")
    return cov


def simon_criterion(cov: np.ndarray) -> BaselineResult:
    """Simon's second-moment partial-transposition test."""
    cov = check_uncertainty(cov)
    a, b, c = cov[:2, :2], cov[2:, 2:], cov[:2, 2:]
    det_a, det_b, det_c = np.linalg.det(a), np.linalg.det(b), np.linalg.det(c)
    value = (det_a * det_b + (0.25 - abs(det_c)) ** 2
             - np.trace(a @ _J @ c @ _J @ b @ _J @ c.T @ _J)
             - 0.25 * (det_a + det_b))
    return BaselineResult.of(Criterion.SIMON, value)


def duan_criterion(cov: np.ndarray) -> BaselineResult:
    """Duan's EPR-variance test, minimized over the scaling a on a log grid and refined locally."""
    cov = check_uncertainty(cov)
    excess_a = np.trace(cov[:2, :2]) - 1.0
    excess_b = np.trace(cov[2:, 2:]) - 1.0
    c = cov[:2, 2:]
    rho = np.hypot(c[0, 0] - c[1, 1], c[0, 1] + c[1, 0])

    def variance_sum(log_a: float) -> float:
        a2 = np.exp(2 * log_a)
        return a2 * excess_a + excess_b / a2

    log_low, log_high = np.log(DUAN_SCALE_RANGE[0]), np.log(DUAN_SCALE_RANGE[1])
    grid = np.linspace(log_low, log_high, DUAN_GRID_POINTS)
    values = [variance_sum(x) for x in grid]
    best = int(np.argmin(values))
    lo, hi = grid[max(best - 1, 0)], grid[min(best + 1, len(grid) - 1)]
    refined = minimize_scalar(variance_sum, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    minimum = min(values[best], float(refined.fun))
    return BaselineResult.of(Criterion.DUAN, minimum - 2 * rho)


def state_covariance(state, cutoff: Optional[FockCutoff] = None) -> np.ndarray:
    """Covariance matrix of a two-mode state at a Fock cutoff where it has converged."""
    if state.n_modes != 2:
        raise ValueError(f"Covariance criteria need a two-mode state, got {state.n_modes} modes")
    cutoff = cutoff or choose_cutoff(state)
    return covariance_matrix(state_to_fock(state, cutoff))


def epsilon_disk_scan(gamma: float, radii: Sequence[float], angles: Sequence[float],
                      cutoff: Optional[FockCutoff] = None) -> List[dict]:
    """
    Simon and Duan values of the Bell-like state over a polar grid of epsilon.

    Args:
        gamma: Coherent amplitude of the state
        radii: Values of |epsilon| in (0, 1]
        angles: Values of arg(epsilon) in radians
        cutoff: Fock truncation (chosen separately for every grid point when omitted)

    Returns:
        list: Rows {"abs_epsilon", "arg_epsilon", "simon", "duan"}
    """
    rows = []
    for radius in radii:
        for angle in angles:
            state = bell_state(gamma, radius * np.exp(1j * angle))
            cov = state_covariance(state, cutoff)
            rows.append({"abs_epsilon": float(radius), "arg_epsilon": float(angle),
                         "simon": simon_criterion(cov).value, "duan": duan_criterion(cov).value})
            logger.debug("epsilon=%.3g exp(i %.3g): simon=%.4g duan=%.4g", radius, angle,
                         rows[-1]["simon"], rows[-1]["duan"])
    return rows
