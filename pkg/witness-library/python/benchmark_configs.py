"""
Benchmark Configurations - the reference states and witnesses with their reference values.

These configurations back the reproduce suite, the sample script and the tests.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from state_models import CoherentSuperposition, NoisyFourModeCat, PhotonSubtractedTmsv, Tmsv
from witness_core import PartitionSpec, WitnessSpec, bipartite_witness

BELL_GAMMA = 0.6
BELL_EPSILON = cmath.exp(0.75j * math.pi)
TMSV_XI = 0.5
FOURMODE_GAMMA = 0.4


def q_points(gamma: complex) -> Tuple[complex, complex, complex]:
    """
    Points Q_1, Q_2, Q_3 whose witness alpha_k = beta_k = Q_k has |gamma,-gamma> and
    |-gamma,gamma> as degenerate minimizers.
    """
    delta = (math.sqrt(2) - 1) ** (1.0 / 3.0)
    q1 = -math.sqrt(2) * gamma
    q2 = complex(delta + 1 / delta, math.sqrt(delta ** 2 + 1 / delta ** 2)) * gamma / 2
    return complex(q1), q2, q2.conjugate()


def bell_state(gamma: float = BELL_GAMMA, epsilon: complex = BELL_EPSILON) -> CoherentSuperposition:
    """(1 - |eps|/2)|gamma,-gamma> + (eps/2)|-gamma,gamma>, normalized from the overlaps."""
    return CoherentSuperposition(n_modes=2, terms=(
        (1 - abs(epsilon) / 2, (complex(gamma), complex(-gamma))),
        (epsilon / 2, (complex(-gamma), complex(gamma))),
    ))


def q_witness(gamma: float = BELL_GAMMA) -> WitnessSpec:
    """Witness with alpha_k = beta_k = Q_k."""
    q = q_points(gamma)
    return bipartite_witness(q, q)


def bell_witness(gamma: float = BELL_GAMMA) -> WitnessSpec:
    """Optimized witness for the Bell-like state: rows (Q1, Q1), (1.2 Q2, 0.8 Q2), (0.8 Q3, 1.2 Q3)."""
    q1, q2, q3 = q_points(gamma)
    return bipartite_witness([q1, 1.2 * q2, 0.8 * q3], [q1, 0.8 * q2, 1.2 * q3])


def tmsv_state(xi: complex = TMSV_XI) -> Tmsv:
    return Tmsv(xi=complex(xi))


def tmsv_circle_witness(r: float, xi: complex = TMSV_XI) -> WitnessSpec:
    """
    Three points on a circle of radius r: alpha_k = r exp(i[1/2 - 2(k-1)] pi/3), beta_k = alpha_k^*,
    rotated by arg(xi)/2 in both modes so that alpha_k beta_k follows the squeezing phase.
    """
    rotation = cmath.exp(0.5j * cmath.phase(complex(xi))) if xi != 0 else 1.0
    alphas = [r * cmath.exp(1j * (0.5 - 2 * k) * math.pi / 3) for k in range(3)]
    return bipartite_witness([a * rotation for a in alphas], [a.conjugate() * rotation for a in alphas])


def subtracted_global_state(xi: complex = TMSV_XI) -> PhotonSubtractedTmsv:
    return PhotonSubtractedTmsv(xi=complex(xi), kappa=0.5)


def subtracted_global_witness(r: float = 2.2, theta: float = math.pi / 5) -> WitnessSpec:
    """alpha = (r e^{i theta}, -i r, -r e^{-i theta}), beta_k = alpha_k^*."""
    alphas = [r * cmath.exp(1j * theta), -1j * r, -r * cmath.exp(-1j * theta)]
    return bipartite_witness(alphas, [a.conjugate() for a in alphas])


def subtracted_local_state(xi: complex = TMSV_XI, kappa: float = 1.0) -> PhotonSubtractedTmsv:
    return PhotonSubtractedTmsv(xi=complex(xi), kappa=kappa)


def subtracted_local_witness(r_a: float = 1.6, r_b: float = 2.2, swap: bool = False) -> WitnessSpec:
    """
    alpha = (r_a e^{i pi/3}, r_a e^{-i pi/3}, -r_a), beta_k = (r_b/r_a) alpha_k^*.

    swap exchanges the two modes, the configuration for subtraction from the second mode.
    """
    first = r_a * cmath.exp(1j * math.pi / 3)
    alphas = [first, first.conjugate(), complex(-r_a)]
    betas = [(r_b / r_a) * a.conjugate() for a in alphas]
    return bipartite_witness(betas, alphas) if swap else bipartite_witness(alphas, betas)


def fourmode_state(gamma: complex = FOURMODE_GAMMA, sigma: float = 0.0) -> NoisyFourModeCat:
    return NoisyFourModeCat(gamma=complex(gamma), sigma=sigma)


@dataclass(frozen=True)
class FourModeCase:
    """
    Four-mode witness for one partition with its reference values.

    Attributes:
        name (str): Short identifier
        blocks (tuple): 1-based partition blocks
        displacements (tuple): Rows are modes, columns are the displacement index k
        g_min (float): Reference separability bound
        expectation (float): Reference <L> for the pure cat
        g_min_digits (int): Printed decimals of g_min
        expectation_digits (int): Printed decimals of <L>
        sigma_crit (float): Reference critical noise level
    """
    name: str
    blocks: Tuple[Tuple[int, ...], ...]
    displacements: Tuple[Tuple[float, ...], ...]
    g_min: float
    expectation: float
    g_min_digits: int
    expectation_digits: int
    sigma_crit: float

    def witness(self) -> WitnessSpec:
        matrix = np.array(self.displacements, dtype=complex).T
        m = matrix.shape[0]
        return WitnessSpec(partition=PartitionSpec.from_labels(self.blocks), lambdas=tuple([1.0 / m] * m),
                           displacements=matrix)


FOURMODE_CASES: Dict[str, FourModeCase] = {case.name: case for case in (
    FourModeCase(
        name="four_partition", blocks=((1,), (2,), (3,), (4,)),
        displacements=((-1.3, -0.3, 0.7, 1.7, 2.7),
                       (-2.3, -1.3, -0.3, 0.7, 1.7),
                       (0.3, 1.3, -2.7, -1.7, -0.7),
                       (1.3, 2.3, -1.7, -0.7, 0.3)),
        g_min=1.22, expectation=1.03, g_min_digits=2, expectation_digits=2, sigma_crit=0.097),
    FourModeCase(
        name="tripartition", blocks=((1,), (2, 3), (4,)),
        displacements=((-0.7, 0.3, 1.3, 2.3),
                       (-2.0, -1.0, 0.0, 1.0),
                       (-2.0, -1.0, 0.0, 1.0),
                       (0.7, -2.3, -1.3, -0.3)),
        g_min=0.332, expectation=0.284, g_min_digits=3, expectation_digits=3, sigma_crit=0.061),
    FourModeCase(
        name="bipartition_12_34", blocks=((1, 2), (3, 4)),
        displacements=((-0.7, 0.3, 1.3),
                       (-0.7, 0.3, 1.3),
                       (0.7, -1.3, -0.3),
                       (0.7, -1.3, -0.3)),
        g_min=0.167, expectation=0.132, g_min_digits=3, expectation_digits=3, sigma_crit=0.103),
    FourModeCase(
        name="bipartition_1_234", blocks=((1,), (2, 3, 4)),
        displacements=((-0.7, 0.3, 1.3),
                       (0.7, -1.3, -0.3),
                       (0.7, -1.3, -0.3),
                       (0.7, -1.3, -0.3)),
        g_min=0.167, expectation=0.132, g_min_digits=3, expectation_digits=3, sigma_crit=0.103),
)}


def tolerance_for(digits: int) -> float:
    """One unit of the last printed decimal: 0.01 for two decimals, 0.001 for three."""
    return 10.0 ** (-digits)


def noise_grid(stop: float = 0.2, points: int = 21) -> Sequence[float]:
    """Evenly spaced noise levels from 0 to stop."""
    return list(np.linspace(0.0, stop, points))
