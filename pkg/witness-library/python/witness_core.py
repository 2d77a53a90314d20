"""
Witness Core - displaced photon-number witnesses and their separability bound.

A witness is the test operator

    L = scale * sum_k lambda_k prod_l N^(l)(alpha_k),   N^(l)(alpha_k) = sum_{j in block l} q_j n_j(alpha_kj)

for a K-partition of the modes. Its expectation over K-separable states is bounded from
below by g_min, the minimal separability eigenvalue. Because the separability eigenstates
of this family are products of coherent states, g_min is the minimum of

    g(beta) = scale * sum_k lambda_k prod_l sum_{j in block l} q_j |beta_j - alpha_kj|^2

over coherent amplitudes beta.

Key Features:
- Partition and witness value types with JSON (de)serialization
- Single-mode collapse of weighted displaced number operators
- Multistart block-alternating solver with a Newton polish of every distinct minimum
- Exact quintic path for collinear bipartite witnesses with three displacements
- Constant-loss transform and loss compensation
- Witness evaluation against any state model
"""

import itertools
import json
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import companion

import state_models
from errors import (DegenerateWeights, ModelMismatch, NoRealRoot, NonpositiveScale, NotCollinear,
                    NotConverged, SchemaError, ZeroEfficiency)
from state_models import complex_to_json, parse_complex

logger = logging.getLogger(__name__)

LAMBDA_TOLERANCE = 1e-12
DISTINCT_ROW_TOLERANCE = 1e-12
COLLINEAR_TOLERANCE = 1e-10
REAL_ROOT_TOLERANCE = 1e-8
CROSS_START_LIMIT = 64
START_SPREAD = 1.5


@dataclass(frozen=True)
class SolverConfig:
    """
    Tunables of the multistart separability-eigenvalue solver.

    Attributes:
        n_starts (int): Starting points of the full solve
        reduced_starts (int): Starting points used inside optimization loops
        tolerance (float): Relative objective change that ends the alternating sweeps
        max_sweeps (int): Sweep limit per start
        residual_tolerance (float): Largest stationarity residual accepted at the minimum, relative to
            max(1, |g_min|) times the displacement scale 1 + max |alpha|
        polish_iterations (int): Newton steps allowed per distinct minimum
        seed (int): Seed of the random starting points
    """
    n_starts: int = 64
    reduced_starts: int = 16
    tolerance: float = 1e-12
    max_sweeps: int = 10_000
    residual_tolerance: float = 1e-8
    polish_iterations: int = 50
    seed: int = 0


@dataclass(frozen=True)
class PartitionSpec:
    """
    K-partition of the modes {0, ..., n_modes-1} into disjoint non-empty blocks.

    Blocks are stored with 0-based indices; JSON files and labels use 1-based indices.
    """
    n_modes: int
    blocks: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(int(j) for j in block) for block in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if not blocks:
            raise ValueError("A partition needs at least one block")
        seen = [j for block in blocks for j in block]
        if any(len(block) == 0 for block in blocks):
            raise ValueError("Partition blocks must be non-empty")
        if len(seen) != len(set(seen)):
            raise ValueError(f"Partition blocks overlap: {self.label()}")
        if sorted(seen) != list(range(self.n_modes)):
            raise ValueError(f"Partition {self.label()} does not cover modes 1..{self.n_modes}")

    @classmethod
    def singletons(cls, n_modes: int) -> "PartitionSpec":
        """The finest partition {1}:{2}:...:{N}."""
        return cls(n_modes=n_modes, blocks=tuple((j,) for j in range(n_modes)))

    @classmethod
    def from_labels(cls, blocks: Sequence[Sequence[int]]) -> "PartitionSpec":
        """Build a partition from 1-based blocks such as [[1], [2, 3], [4]]."""
        zero_based = tuple(tuple(j - 1 for j in block) for block in blocks)
        return cls(n_modes=sum(len(b) for b in zero_based), blocks=zero_based)

    @property
    def k(self) -> int:
        return len(self.blocks)

    def block_of(self) -> np.ndarray:
        owner = np.empty(self.n_modes, dtype=int)
        for index, block in enumerate(self.blocks):
            owner[list(block)] = index
        return owner

    def label(self) -> str:
        return ":".join("{" + ",".join(str(j + 1) for j in block) + "}" for block in self.blocks)

    def to_json(self) -> List[List[int]]:
        return [[j + 1 for j in block] for block in self.blocks]


@dataclass(frozen=True, eq=False)
class WitnessSpec:
    """
    Full parameterization of a displaced photon-number test operator.

    Attributes:
        partition (PartitionSpec): Subsystems the separability bound refers to
        lambdas (tuple): m positive weights summing to 1
        displacements (np.ndarray): m x n_modes complex matrix, row k is the displacement alpha_k
        q_weights (tuple): Nonnegative per-mode weights; default 1/|block| for every mode of a block
        scale (float): Overall positive prefactor (carries detection efficiencies after apply_loss)
    """
    partition: PartitionSpec
    lambdas: Tuple[float, ...]
    displacements: np.ndarray
    q_weights: Optional[Tuple[float, ...]] = None
    scale: float = 1.0
    _weight_matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lambdas = tuple(float(v) for v in self.lambdas)
        displacements = np.array(self.displacements, dtype=complex)
        if displacements.ndim == 1:
            displacements = displacements[:, None]
        displacements.flags.writeable = False
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "displacements", displacements)
        n = self.partition.n_modes
        if self.q_weights is None:
            q = [0.0] * n
            for block in self.partition.blocks:
                for j in block:
                    q[j] = 1.0 / len(block)
            object.__setattr__(self, "q_weights", tuple(q))
        else:
            object.__setattr__(self, "q_weights", tuple(float(v) for v in self.q_weights))

        m = len(lambdas)
        if m < 1:
            raise ValueError("A witness needs at least one displacement row")
        if displacements.shape != (m, n):
            raise ModelMismatch(f"Displacements have shape {displacements.shape}, expected ({m}, {n}) "
                                f"for {m} weights and {n} modes")
        if not np.all(np.isfinite(displacements)):
            raise ValueError("Displacements must be finite")
        if any(v <= 0 for v in lambdas):
            raise ValueError(f"Weights lambda must be positive, got {lambdas}")
        if abs(sum(lambdas) - 1.0) > LAMBDA_TOLERANCE:
            raise ValueError(f"Weights lambda must sum to 1, got {sum(lambdas)!r}")
        if len(self.q_weights) != n or any(v < 0 for v in self.q_weights):
            raise ValueError(f"Expected {n} nonnegative q weights, got {self.q_weights}")
        if not self.scale > 0:
            raise NonpositiveScale(f"Witness scale must be positive, got {self.scale}")
        for a, b in itertools.combinations(range(m), 2):
            if np.max(np.abs(displacements[a] - displacements[b])) <= DISTINCT_ROW_TOLERANCE:
                raise ValueError(f"Displacement rows {a + 1} and {b + 1} coincide")

        weight_matrix = np.zeros((n, self.partition.k))
        weight_matrix[np.arange(n), self.partition.block_of()] = self.q_weights
        weight_matrix.flags.writeable = False
        object.__setattr__(self, "_weight_matrix", weight_matrix)

    @property
    def m(self) -> int:
        return len(self.lambdas)

    @property
    def n_modes(self) -> int:
        return self.partition.n_modes

    @property
    def weight_matrix(self) -> np.ndarray:
        """n_modes x K matrix holding q_j in the column of the block of mode j."""
        return self._weight_matrix

    def correlation_terms(self):
        """
        Expand L into single-mode correlation terms.

        Yields:
            tuple: (k, weight, row) where row holds the displacement of each measured mode
            and None for modes outside the term; weight includes scale, lambda_k and the q factors
        """
        for k in range(self.m):
            for choice in itertools.product(*self.partition.blocks):
                weight = self.scale * self.lambdas[k] * math.prod(self.q_weights[j] for j in choice)
                if weight == 0:
                    continue
                row = [None] * self.n_modes
                for j in choice:
                    row[j] = complex(self.displacements[k, j])
                yield k, weight, row

    def to_json(self) -> dict:
        return {
            "modes": self.n_modes,
            "partition": self.partition.to_json(),
            "q_weights": list(self.q_weights),
            "lambda": list(self.lambdas),
            "displacements": [[complex_to_json(a) for a in row] for row in self.displacements],
            "scale": self.scale,
        }


class SevMethod(str, Enum):
    MULTISTART_ALTERNATING = "multistart_alternating"
    COLLINEAR_QUINTIC = "collinear_quintic"


@dataclass(frozen=True)
class SevSolution:
    """
    Minimal separability eigenvalue with its separability eigenstate.

    Attributes:
        g_min (float): Minimal separability eigenvalue, equal to the objective at argmin
        argmin (tuple): Coherent amplitudes of the minimizing product state, one per mode
        stationary_points (tuple): Distinct (amplitudes, value) pairs found, sorted by value
        residual (float): Largest stationarity residual at argmin
        starts_used (int): Number of starting points (or quintic roots) examined
        method (SevMethod): Solver that produced the result
    """
    g_min: float
    argmin: Tuple[complex, ...]
    stationary_points: Tuple[Tuple[Tuple[complex, ...], float], ...]
    residual: float
    starts_used: int
    method: SevMethod

    def to_json(self) -> dict:
        return {
            "g_min": self.g_min,
            "argmin": [complex_to_json(a) for a in self.argmin],
            "stationary_points": [{"amplitudes": [complex_to_json(a) for a in amps], "value": value}
                                  for amps, value in self.stationary_points],
            "residual": self.residual,
            "starts_used": self.starts_used,
            "method": self.method.value,
        }


@dataclass(frozen=True)
class EvaluationReport:
    """
    Outcome of testing a state with a witness.

    Attributes:
        expectation (float): <L>
        g_min (float): Separability bound
        witness_value (float): <W> = <L> - g_min
        entangled (bool): True when <W> < 0
        margin_relative (float): R = g_min/<L> - 1, None when <L> <= 0
    """
    expectation: float
    g_min: float
    witness_value: float
    entangled: bool
    margin_relative: Optional[float]

    @classmethod
    def from_values(cls, expectation: float, g_min: float) -> "EvaluationReport":
        witness_value = expectation - g_min
        margin = g_min / expectation - 1.0 if expectation > 0 else None
        return cls(expectation=expectation, g_min=g_min, witness_value=witness_value,
                   entangled=bool(witness_value < 0), margin_relative=margin)

    def to_json(self) -> dict:
        return {
            "expectation": self.expectation,
            "g_min": self.g_min,
            "witness_value": self.witness_value,
            "entangled": self.entangled,
            "margin_relative": self.margin_relative,
        }


def collapse_single_mode(lambdas: Sequence[float], alphas: Sequence[complex]) -> Tuple[complex, float]:
    """
    Collapse a weighted sum of single-mode displaced number operators.

    sum_k lambda_k n(alpha_k) = n(mean) + offset * 1, with mean = sum_k lambda_k alpha_k and
    offset = sum_k lambda_k |alpha_k - mean|^2.

    Args:
        lambdas: Weights summing to 1
        alphas: Displacements

    Returns:
        tuple: (mean, offset)
    """
    lambdas = np.asarray(lambdas, dtype=float)
    alphas = np.asarray(alphas, dtype=complex)
    if abs(lambdas.sum() - 1.0) > LAMBDA_TOLERANCE:
        raise ValueError(f"Weights must sum to 1, got {lambdas.sum()!r}")
    mean = complex(lambdas @ alphas)
    offset = float(lambdas @ np.abs(alphas - mean) ** 2)
    return mean, offset


def _block_values(witness: WitnessSpec, betas: np.ndarray) -> np.ndarray:
    # (S, m, K): N_k^(l) at every start
    diff2 = np.abs(betas[:, None, :] - witness.displacements[None, :, :]) ** 2
    return diff2 @ witness.weight_matrix


def _objective_batch(witness: WitnessSpec, betas: np.ndarray) -> np.ndarray:
    return witness.scale * (np.prod(_block_values(witness, betas), axis=2) @ np.asarray(witness.lambdas))


def _other_block_weights(values: np.ndarray, lambdas: np.ndarray, block: int) -> np.ndarray:
    return lambdas * np.prod(np.delete(values, block, axis=-1), axis=-1)


def sev_objective(witness: WitnessSpec, amplitudes: Sequence[complex]) -> float:
    """
    Value of L on the coherent product state |beta_1, ..., beta_N>.

    Returns:
        float: scale * sum_k lambda_k prod_l sum_{j in block l} q_j |beta_j - alpha_kj|^2
    """
    betas = np.asarray(amplitudes, dtype=complex)
    if betas.shape != (witness.n_modes,):
        raise ModelMismatch(f"Expected {witness.n_modes} amplitudes, got {betas.size}")
    return float(_objective_batch(witness, betas[None, :])[0])


def alternating_update(witness: WitnessSpec, amplitudes: Sequence[complex], block: int) -> np.ndarray:
    """
    Exactly minimize the objective over the amplitudes of one block, the others fixed.

    With w_k = lambda_k prod_{l' != l} N_k^(l'), every mode j of block l moves to
    sum_k w_k alpha_kj / sum_k w_k.

    Args:
        witness: The witness
        amplitudes: Current amplitudes, one per mode
        block: Index of the block to update

    Returns:
        np.ndarray: Updated amplitudes

    Raises:
        DegenerateWeights: If all w_k vanish
    """
    betas = np.array(amplitudes, dtype=complex)
    values = _block_values(witness, betas[None, :])[0]
    weights = _other_block_weights(values, np.asarray(witness.lambdas), block)
    total = weights.sum()
    if total <= 0:
        raise DegenerateWeights(f"All weights vanish when updating block {block + 1}")
    modes = list(witness.partition.blocks[block])
    betas[modes] = weights @ witness.displacements[:, modes] / total
    return betas


def _sweep(witness: WitnessSpec, betas: np.ndarray) -> np.ndarray:
    lambdas = np.asarray(witness.lambdas)
    for block, modes in enumerate(witness.partition.blocks):
        weights = _other_block_weights(_block_values(witness, betas), lambdas, block)
        total = weights.sum(axis=1)
        # all-zero weights only occur at exact zeros of the objective; keep the block
        ok = total > 0
        modes = list(modes)
        betas[np.ix_(ok, modes)] = (weights[ok] @ witness.displacements[:, modes]) / total[ok, None]
    return betas


def _start_points(witness: WitnessSpec, n_starts: int, seed: int) -> np.ndarray:
    displacements = witness.displacements
    lambdas = np.asarray(witness.lambdas)
    blocks = [list(block) for block in witness.partition.blocks]
    m, k = witness.m, witness.partition.k

    def combination(rows: Sequence[int]) -> np.ndarray:
        point = np.empty(witness.n_modes, dtype=complex)
        for block, row in zip(blocks, rows):
            point[block] = displacements[row, block]
        return point

    center = lambdas @ displacements
    starts = [center] + list(displacements)
    starts += [combination([(index + shift) % m for index in range(k)]) for shift in range(m)]
    if m ** k <= CROSS_START_LIMIT:
        starts += [combination(rows) for rows in itertools.product(range(m), repeat=k)]
    spread = np.sqrt(lambdas @ np.abs(displacements - center) ** 2)
    rng = np.random.default_rng(seed)
    while len(starts) < n_starts:
        z = rng.standard_normal(witness.n_modes) + 1j * rng.standard_normal(witness.n_modes)
        starts.append(center + START_SPREAD * spread * z / math.sqrt(2))
    return np.array(starts[:n_starts])


def _gradient_hessian(witness: WitnessSpec, beta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # real coordinates (Re beta_1, Im beta_1, Re beta_2, ...)
    lambdas = np.asarray(witness.lambdas)
    k = witness.partition.k
    owner = np.repeat(witness.partition.block_of(), 2)
    q = np.repeat(np.asarray(witness.q_weights), 2)
    diff = beta[None, :] - witness.displacements
    values = _block_values(witness, beta[None, :])[0]
    without = np.stack([np.prod(np.delete(values, l, axis=1), axis=1) for l in range(k)], axis=1)
    without_pair = np.ones((witness.m, k, k))
    for l1, l2 in itertools.permutations(range(k), 2):
        without_pair[:, l1, l2] = np.prod(np.delete(values, [l1, l2], axis=1), axis=1)
    slopes = 2 * q * np.stack([diff.real, diff.imag], axis=2).reshape(witness.m, -1)
    gradient = ((lambdas[:, None] * without[:, owner]) * slopes).sum(axis=0)
    cross = np.einsum("k,kij,ki,kj->ij", lambdas, without_pair[:, owner][:, :, owner], slopes, slopes)
    hessian = cross * (owner[:, None] != owner[None, :]) + np.diag(2 * q * (lambdas @ without[:, owner]))
    return witness.scale * gradient, witness.scale * hessian


def _residual_from_gradient(gradient: np.ndarray) -> float:
    pairs = gradient.reshape(-1, 2)
    return float(np.max(np.hypot(pairs[:, 0], pairs[:, 1]))) / 2


def stationarity_residual(witness: WitnessSpec, amplitudes: Sequence[complex]) -> float:
    """
    Largest violation of the coupled amplitude equations at a product coherent state.

    Returns:
        float: max_j | scale * q_j * sum_k w_k (beta_j - alpha_kj) |
    """
    gradient, _ = _gradient_hessian(witness, np.asarray(amplitudes, dtype=complex))
    return _residual_from_gradient(gradient)


def _newton_polish(witness: WitnessSpec, beta: np.ndarray, iterations: int) -> Tuple[np.ndarray, float, float]:
    value = sev_objective(witness, beta)
    for _ in range(iterations):
        gradient, hessian = _gradient_hessian(witness, beta)
        if _residual_from_gradient(gradient) == 0.0:
            break
        step = -np.linalg.lstsq(hessian, gradient, rcond=None)[0]
        slope = gradient @ step
        if not slope < 0:
            step, slope = -gradient, -(gradient @ gradient)
        complex_step = step[0::2] + 1j * step[1::2]
        t = 1.0
        while t > 1e-12:
            trial = beta + t * complex_step
            trial_value = sev_objective(witness, trial)
            if trial_value <= value + 1e-4 * t * slope:
                break
            t /= 2
        else:
            break
        if np.max(np.abs(trial - beta)) == 0.0:
            break
        beta, value = trial, trial_value
    gradient, _ = _gradient_hessian(witness, beta)
    return beta, value, _residual_from_gradient(gradient)


def _distinct(points: List[Tuple[np.ndarray, float]], candidate: np.ndarray, tolerance: float) -> bool:
    return all(np.max(np.abs(candidate - p)) > tolerance for p, _ in points)


def solve_sev_multistart(witness: WitnessSpec, n_starts: int = 64, seed: int = 0,
                         config: Optional[SolverConfig] = None) -> SevSolution:
    """
    Minimal separability eigenvalue by cyclic block minimization from many starts.

    The starts are the weighted-mean displacement, every displacement row, block-wise
    combinations of rows, and random perturbations around the mean. All starts are swept
    together until the objective changes by less than the tolerance; every distinct minimum
    is then polished with safeguarded Newton steps.

    Args:
        witness: The witness
        n_starts: Number of starting points
        seed: Seed of the random starting points
        config: Solver tolerances (n_starts and seed arguments take precedence)

    Returns:
        SevSolution: Best minimum with all distinct stationary points found

    Raises:
        NotConverged: If the best point misses the residual tolerance after polishing
    """
    config = config or SolverConfig()
    if n_starts < 1:
        raise ValueError(f"n_starts must be at least 1, got {n_starts}")
    starts = _start_points(witness, n_starts, seed)
    betas = starts.copy()
    values = _objective_batch(witness, betas)
    active = np.ones(len(betas), dtype=bool)
    for sweep in range(config.max_sweeps):
        if not active.any():
            break
        index = np.flatnonzero(active)
        updated = _sweep(witness, betas[index])
        new_values = _objective_batch(witness, updated)
        done = np.abs(values[index] - new_values) <= config.tolerance * np.maximum(1.0, values[index])
        betas[index], values[index] = updated, new_values
        active[index[done]] = False
    if active.any():
        logger.debug("%d of %d starts hit the sweep limit of %d", active.sum(), len(betas), config.max_sweeps)

    tolerance = 1e-6 * (1.0 + np.max(np.abs(witness.displacements)))
    candidates: List[Tuple[np.ndarray, float]] = []
    for i in np.argsort(values, kind="stable"):
        if _distinct(candidates, betas[i], tolerance):
            candidates.append((betas[i], values[i]))

    polished: List[Tuple[np.ndarray, float, float]] = []
    for beta, _ in candidates:
        beta, value, residual = _newton_polish(witness, beta, config.polish_iterations)
        if _distinct([(p, v) for p, v, _ in polished], beta, tolerance):
            polished.append((beta, value, residual))
    polished.sort(key=lambda item: item[1])
    best, g_min, residual = polished[0]
    accepted = config.residual_tolerance * max(1.0, abs(g_min)) * (1.0 + np.max(np.abs(witness.displacements)))
    if residual >= accepted:
        raise NotConverged(f"Separability eigenvalue search did not converge: residual {residual:.3g} "
                           f"(accepted {accepted:.3g}) "
                           f"after {config.max_sweeps} sweeps and {config.polish_iterations} Newton steps")
    return SevSolution(
        g_min=float(g_min),
        argmin=tuple(complex(b) for b in best),
        stationary_points=tuple((tuple(complex(b) for b in p), float(v)) for p, v, _ in polished),
        residual=residual,
        starts_used=len(starts),
        method=SevMethod.MULTISTART_ALTERNATING,
    )


def _collinear_frame(values: np.ndarray, phase: Optional[float]) -> Tuple[complex, complex, np.ndarray]:
    if phase is None:
        origin = complex(values[0])
        offsets = values - origin
        direction = offsets[np.argmax(np.abs(offsets))]
        unit = direction / abs(direction) if abs(direction) > 0 else 1.0 + 0.0j
    else:
        origin, unit = 0.0j, complex(np.exp(1j * phase))
    rotated = (values - origin) / unit
    if np.max(np.abs(rotated.imag)) > COLLINEAR_TOLERANCE * max(1.0, np.max(np.abs(values))):
        raise NotCollinear(f"Displacements {values} do not lie on a common line")
    return origin, unit, rotated.real


def is_collinear_m3(witness: WitnessSpec) -> bool:
    """True when the witness is bipartite with three rows lying on one line per mode."""
    if witness.m != 3 or witness.partition.k != 2 or witness.n_modes != 2:
        return False
    try:
        for j in range(2):
            _collinear_frame(witness.displacements[:, j], None)
    except NotCollinear:
        return False
    return True


def solve_sev_collinear_m3(witness: WitnessSpec, phases: Optional[Tuple[float, float]] = None,
                           cross_check: bool = True, seed: int = 0) -> SevSolution:
    """
    Exact g_min of a bipartite three-row witness whose displacements are collinear per mode.

    Writing alpha_k = o_a + a_k u and beta_k = o_b + b_k v along the two lines, every
    stationary pair lies on the lines and its second coordinate y is a real root of the quintic

        sum_j lambda_j (y - b_j) T_j(y)^2 = 0,   T_j(y) = R0_j y^2 - 2 R1_j y + R2_j,
        R{l}_j = sum_k lambda_k (a_k - a_j) b_k^l,

    while the first coordinate follows from x = sum_k lambda_k a_k (y-b_k)^2 / sum_k lambda_k (y-b_k)^2.
    Roots come from the eigenvalues of the companion matrix.

    Args:
        witness: Bipartite witness with m = 3
        phases: Optional line directions (phi, theta) through the origin; fitted when omitted
        cross_check: Compare against the multistart solver and warn on disagreement
        seed: Seed for the cross-check

    Returns:
        SevSolution: Minimum over all stationary pairs

    Raises:
        NotCollinear: If the displacements are not collinear
        NoRealRoot: If the quintic has no usable real root
    """
    if witness.m != 3 or witness.partition.k != 2 or witness.n_modes != 2:
        raise NotCollinear("The quintic path needs a bipartite two-mode witness with three rows")
    origin_a, unit_a, a = _collinear_frame(witness.displacements[:, 0], None if phases is None else phases[0])
    origin_b, unit_b, b = _collinear_frame(witness.displacements[:, 1], None if phases is None else phases[1])
    lambdas = np.asarray(witness.lambdas)

    # polynomial coefficients in increasing order
    quintic = np.zeros(6)
    for j in range(3):
        r0, r1, r2 = (float(np.sum(lambdas * (a - a[j]) * b ** power)) for power in range(3))
        t = np.array([r2, -2 * r1, r0])
        quintic += lambdas[j] * np.convolve(np.convolve(t, t), np.array([-b[j], 1.0]))
    scale = np.max(np.abs(quintic))
    if scale == 0 or np.max(np.abs(quintic[1:])) <= 1e-14 * scale:
        raise NoRealRoot("Quintic is degenerate for this configuration")
    trimmed = np.trim_zeros(np.where(np.abs(quintic) <= 1e-14 * scale, 0.0, quintic), "b")
    roots = np.linalg.eigvals(companion(trimmed[::-1]))
    real_roots = roots.real[np.abs(roots.imag) <= REAL_ROOT_TOLERANCE * np.maximum(1.0, np.abs(roots))]

    points = []
    for y in real_roots:
        weights = lambdas * (y - b) ** 2
        if weights.sum() <= 0:
            continue
        x = float(weights @ a / weights.sum())
        amplitudes = np.array([origin_a + x * unit_a, origin_b + y * unit_b])
        points.append((amplitudes, sev_objective(witness, amplitudes)))
    if not points:
        raise NoRealRoot("Quintic has no real root")
    points.sort(key=lambda item: item[1])
    best, g_min = points[0]
    solution = SevSolution(
        g_min=float(g_min),
        argmin=tuple(complex(v) for v in best),
        stationary_points=tuple((tuple(complex(v) for v in p), float(g)) for p, g in points),
        residual=stationarity_residual(witness, best),
        starts_used=len(real_roots),
        method=SevMethod.COLLINEAR_QUINTIC,
    )
    if cross_check:
        reference = solve_sev_multistart(witness, seed=seed)
        if abs(reference.g_min - solution.g_min) > 1e-9 * max(1.0, solution.g_min):
            logger.warning("Quintic g_min %.12g disagrees with multistart g_min %.12g",
                           solution.g_min, reference.g_min)
    return solution


def solve_sev(witness: WitnessSpec, n_starts: int = 64, seed: int = 0,
              config: Optional[SolverConfig] = None) -> SevSolution:
    """Use the exact quintic for collinear bipartite three-row witnesses, multistart otherwise."""
    if is_collinear_m3(witness):
        try:
            return solve_sev_collinear_m3(witness, cross_check=False)
        except NoRealRoot:
            logger.debug("Quintic path degenerate, falling back to multistart")
    return solve_sev_multistart(witness, n_starts=n_starts, seed=seed, config=config)


def _check_etas(witness: WitnessSpec, etas: Sequence[float]) -> np.ndarray:
    etas = np.asarray(etas, dtype=float)
    if etas.shape != (witness.n_modes,):
        raise ModelMismatch(f"Expected {witness.n_modes} efficiencies, got {etas.size}")
    if np.any(etas <= 0):
        raise ZeroEfficiency(f"Detection efficiencies must be positive, got {etas.tolist()}")
    if np.any(etas > 1):
        raise ValueError(f"Detection efficiencies cannot exceed 1, got {etas.tolist()}")
    return etas


def apply_loss(witness: WitnessSpec, etas: Sequence[float]) -> WitnessSpec:
    """
    Express a measurement with lossy detectors as a witness on the lossless field.

    Detecting n(alpha) behind a loss eta equals eta * n(alpha / sqrt(eta)) on the source field.
    Per block the largest efficiency eta_ref moves into the scale and q_j picks up eta_j/eta_ref,
    so the separability bound of the result equals that of the input.

    Args:
        witness: Witness whose displacements are set at the detectors
        etas: Per-mode efficiencies in (0, 1]

    Returns:
        WitnessSpec: The transformed witness

    Raises:
        ZeroEfficiency: If an efficiency is not positive
    """
    etas = _check_etas(witness, etas)
    q = np.array(witness.q_weights)
    scale = witness.scale
    for block in witness.partition.blocks:
        reference = max(etas[j] for j in block)
        scale *= reference
        for j in block:
            q[j] *= etas[j] / reference
    return replace(witness, displacements=witness.displacements / np.sqrt(etas)[None, :],
                   q_weights=tuple(q), scale=scale)


def compensate_loss(witness: WitnessSpec, etas: Sequence[float]) -> WitnessSpec:
    """Scale the displacements to sqrt(eta) * alpha so the lossy measurement realizes prod(eta) * L."""
    etas = _check_etas(witness, etas)
    return replace(witness, displacements=witness.displacements * np.sqrt(etas)[None, :])


def affine_rescale(g_min: float, mu: float, nu: float) -> float:
    """
    Separability bound of mu * L + nu, given the bound g_min of L.

    Raises:
        NonpositiveScale: If mu <= 0
    """
    if not mu > 0:
        raise NonpositiveScale(f"Rescaling factor must be positive, got {mu}")
    return mu * g_min + nu


def evaluate(witness: WitnessSpec, state, solution: Optional[SevSolution] = None,
             n_starts: int = 64, seed: int = 0) -> EvaluationReport:
    """
    Test a state with a witness.

    Args:
        witness: The witness
        state: Any StateModel
        solution: Reuse an already solved bound (the bound does not depend on the state)
        n_starts: Starting points for the bound when it has to be solved
        seed: Seed for the bound

    Returns:
        EvaluationReport: <L>, g_min and the verdict
    """
    if witness.n_modes != state.n_modes:
        raise ModelMismatch(f"Witness has {witness.n_modes} modes but the state has {state.n_modes}")
    expectation = state_models.expectation_L(state, witness)
    if solution is None:
        solution = solve_sev(witness, n_starts=n_starts, seed=seed)
    return EvaluationReport.from_values(expectation, solution.g_min)


def bipartite_witness(alphas: Sequence[complex], betas: Sequence[complex],
                      lambdas: Optional[Sequence[float]] = None) -> WitnessSpec:
    """Two-mode witness with rows (alpha_k, beta_k); equal weights by default."""
    m = len(alphas)
    lambdas = lambdas if lambdas is not None else [1.0 / m] * m
    return WitnessSpec(partition=PartitionSpec.singletons(2), lambdas=tuple(lambdas),
                       displacements=np.column_stack([alphas, betas]))


def witness_from_json(data: dict) -> WitnessSpec:
    """
    Build a WitnessSpec from its JSON form.

    Raises:
        SchemaError: Naming the first offending field
    """
    if not isinstance(data, dict):
        raise SchemaError("witness: expected a JSON object")
    for key in ("modes", "partition", "lambda", "displacements"):
        if key not in data:
            raise SchemaError(f"witness: missing field \"{key}\"")
    modes = data["modes"]
    if isinstance(modes, bool) or not isinstance(modes, int) or modes < 1:
        raise SchemaError(f"witness.modes: expected a positive integer, got {modes!r}")
    try:
        partition = PartitionSpec(n_modes=modes, blocks=tuple(tuple(j - 1 for j in block)
                                                               for block in data["partition"]))
    except (TypeError, ValueError) as e:
        raise SchemaError(f"witness.partition: {e}")
    rows = data["displacements"]
    for key in ("displacements", "lambda"):
        if not isinstance(data[key], list):
            raise SchemaError(f"witness.{key}: expected a list")
    if len(rows) != len(data["lambda"]):
        raise SchemaError(f"witness.displacements: {len(rows)} rows for {len(data['lambda'])} lambda values")
    displacements = []
    for k, row in enumerate(rows):
        if not isinstance(row, list):
            raise SchemaError(f"witness.displacements[{k}]: expected a list of {modes} amplitudes, got {row!r}")
        if len(row) != modes:
            raise SchemaError(f"witness.displacements[{k}]: {len(row)} entries for {modes} modes")
        displacements.append([parse_complex(v, f"witness.displacements[{k}][{j}]") for j, v in enumerate(row)])
    try:
        return WitnessSpec(partition=partition, lambdas=tuple(data["lambda"]),
                           displacements=np.array(displacements, dtype=complex).reshape(len(rows), modes),
                           q_weights=tuple(data["q_weights"]) if data.get("q_weights") is not None else None,
                           scale=float(data.get("scale", 1.0)))
    except SchemaError:
        raise
    except (TypeError, ValueError) as e:
        raise SchemaError(f"witness: {e}")


def load_witness(path: str) -> WitnessSpec:
    """Read a witness JSON file."""
    with open(path, "r") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}")
    return witness_from_json(data)
