"""
Measurement Simulator - shot-level Monte Carlo of the randomized-displacement measurement.

Every shot draws a displacement row k with probability lambda_k, displaces each mode j by
-alpha_kj, counts photons in every mode and records prod_l sum_{j in block l} q_j n_j.
The shot average is an unbiased estimate of <L>.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import CutoffTooSmall, ModelMismatch
from fock_oracle import (DensityMatrix, FockCutoff, NumberDistribution, apply_loss_channel, choose_cutoff,
                         joint_displaced_number_distribution, state_to_fock)

logger = logging.getLogger(__name__)

OUTCOME_DEFICIT_TARGET = 1e-8
MAX_OUTCOME_ENTRIES = 2_000_000


@dataclass(frozen=True)
class MeasurementEstimate:
    """
    Monte Carlo estimate of <L>.

    Attributes:
        mean (float): Shot average
        stderr (float): Sample standard deviation divided by sqrt(shots)
        shots (int): Number of shots
        seed (int): Master seed
        per_k_counts (tuple): Shots that used each displacement row
        workers (int): Number of independent sampling streams
        mass_deficit (float): Largest probability mass lost above the photon-number cutoff
    """
    mean: float
    stderr: float
    shots: int
    seed: int
    per_k_counts: Tuple[int, ...]
    workers: int = 1
    mass_deficit: float = 0.0

    def to_json(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "shots": self.shots, "seed": self.seed,
                "per_k_counts": list(self.per_k_counts), "workers": self.workers,
                "mass_deficit": self.mass_deficit}


@dataclass(frozen=True)
class _RowSampler:
    cdf: np.ndarray
    outcomes: np.ndarray
    mass_deficit: float


def _row_distribution(rho: DensityMatrix, row: Sequence[complex]) -> Tuple[NumberDistribution, FockCutoff]:
    # grow the recorded photon numbers until the displaced mass is captured
    largest = max(abs(alpha) for alpha in row)
    n_out = max(rho.cutoff.n_max, int(math.ceil((math.sqrt(rho.cutoff.n_max) + largest) ** 2)))
    while True:
        cutoff = FockCutoff(n_out)
        try:
            distribution = joint_displaced_number_distribution(rho, row, cutoff)
        except CutoffTooSmall:
            distribution = None
        if distribution is not None and distribution.mass_deficit <= OUTCOME_DEFICIT_TARGET:
            return distribution, cutoff
        if (2 * n_out + 1) ** rho.n_modes > MAX_OUTCOME_ENTRIES:
            if distribution is None:
                raise CutoffTooSmall(f"Displaced photon numbers exceed n_max={n_out} at the entry limit")
            return distribution, cutoff
        n_out *= 2


def _outcome_values(witness, cutoff: FockCutoff) -> np.ndarray:
    counts = np.arange(cutoff.dim, dtype=float)
    n = witness.n_modes
    values = np.ones((cutoff.dim,) * n)
    for block in witness.partition.blocks:
        block_sum = np.zeros((cutoff.dim,) * n)
        for j in block:
            shape = [1] * n
            shape[j] = cutoff.dim
            block_sum = block_sum + witness.q_weights[j] * counts.reshape(shape)
        values = values * block_sum
    return witness.scale * values


def _samplers(witness, rho: DensityMatrix) -> List[_RowSampler]:
    samplers = []
    cache: Dict[int, np.ndarray] = {}
    for k in range(witness.m):
        distribution, cutoff = _row_distribution(rho, witness.displacements[k])
        if cutoff.n_max not in cache:
            cache[cutoff.n_max] = _outcome_values(witness, cutoff).reshape(-1)
        cdf = np.cumsum(distribution.probabilities.reshape(-1))
        cdf /= cdf[-1]
        samplers.append(_RowSampler(cdf=cdf, outcomes=cache[cutoff.n_max], mass_deficit=distribution.mass_deficit))
    return samplers


def _run_stream(samplers: List[_RowSampler], lambdas: np.ndarray, shots: int,
                seed_sequence: np.random.SeedSequence) -> Tuple[np.ndarray, float, float]:
    rng = np.random.default_rng(seed_sequence)
    counts = rng.multinomial(shots, lambdas)
    total, total_sq = 0.0, 0.0
    for sampler, count in zip(samplers, counts):
        if count == 0:
            continue
        index = np.searchsorted(sampler.cdf, rng.random(count), side="right")
        values = sampler.outcomes[np.minimum(index, sampler.outcomes.size - 1)]
        total += float(values.sum())
        total_sq += float(np.dot(values, values))
    return counts, total, total_sq


def simulate(witness, state, shots: int, seed: int = 0, cutoff: Optional[FockCutoff] = None,
             etas: Optional[Sequence[float]] = None, workers: int = 1) -> MeasurementEstimate:
    """
    Simulate the displaced photon-counting measurement of a witness.

    The joint displaced photon-number distribution is computed once per displacement row
    and sampled by inverse CDF. Shots are split across workers, each with its own stream
    spawned from the master seed, so the estimate is reproducible for a fixed worker count.

    Args:
        witness: WitnessSpec whose displacements are set at the detectors
        state: Any StateModel
        shots: Number of shots, at least 1
        seed: Master seed
        cutoff: Fock truncation of the state (chosen automatically when omitted)
        etas: Optional per-mode detection efficiencies applied to the state as constant loss
        workers: Number of sampling streams run in parallel threads

    Returns:
        MeasurementEstimate: Mean, standard error and bookkeeping

    Raises:
        CutoffTooSmall: If the truncation loses too much probability
    """
    if shots < 1:
        raise ValueError(f"shots must be at least 1, got {shots}")
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")
    if witness.n_modes != state.n_modes:
        raise ModelMismatch(f"Witness has {witness.n_modes} modes but the state has {state.n_modes}")
    cutoff = cutoff or choose_cutoff(state, witness)
    rho = state_to_fock(state, cutoff)
    if etas is not None:
        rho = apply_loss_channel(rho, etas)
    samplers = _samplers(witness, rho)
    deficit = max(s.mass_deficit for s in samplers) + rho.truncation_deficit
    logger.info("Simulation systematic error: state truncation %.3g, outcome truncation %.3g",
                rho.truncation_deficit, max(s.mass_deficit for s in samplers))

    streams = np.random.SeedSequence(seed).spawn(workers)
    split = [shots // workers + (1 if w < shots % workers else 0) for w in range(workers)]
    lambdas = np.asarray(witness.lambdas)
    lambdas = lambdas / lambdas.sum()
    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(lambda args: _run_stream(samplers, lambdas, *args), zip(split, streams)))

    counts = np.sum([r[0] for r in results], axis=0)
    total = sum(r[1] for r in results)
    total_sq = sum(r[2] for r in results)
    mean = total / shots
    if shots > 1:
        variance = max(total_sq - shots * mean ** 2, 0.0) / (shots - 1)
        stderr = math.sqrt(variance / shots)
    else:
        stderr = 0.0
    return MeasurementEstimate(mean=mean, stderr=stderr, shots=shots, seed=seed,
                               per_k_counts=tuple(int(c) for c in counts), workers=workers,
                               mass_deficit=deficit)
