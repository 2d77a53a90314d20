"""
Optimizer - witness parameter search, parameter sweeps and critical-parameter bisection.

Key Features:
- Real-coded genetic algorithm minimizing <L> - g_min for a target state
- Sweeps of a state family and/or witness family over a parameter grid, CSV output
- Bisection of the witness value for critical noise levels and radii
- Closed-form radius quantities of the circular two-mode squeezed-vacuum witness
"""

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

import benchmark_configs
from errors import NoSignChange, NotConverged
from state_models import StateModel, expectation_L
from witness_core import (EvaluationReport, PartitionSpec, SevSolution, SolverConfig, WitnessSpec,
                          evaluate, solve_sev, solve_sev_multistart)

logger = logging.getLogger(__name__)

DUPLICATE_ROW_TOLERANCE = 1e-6


@dataclass(frozen=True)
class GaConfig:
    """
    Hyperparameters of the genetic witness search.

    Attributes:
        population (int): Individuals per generation
        generations (int): Number of generations
        mutation_sigma (float): Initial standard deviation of the Gaussian mutation
        mutation_decay (float): Factor applied to the mutation width after every generation
        crossover_rate (float): Probability that a child mixes two parents gene by gene
        elite_count (int): Best individuals copied unchanged into the next generation
        tournament_size (int): Contestants per tournament selection
        seed (int): Master seed of every random draw
        bounds (tuple): Per-gene (low, high) intervals; None uses (-5, 5) for every gene
        optimize_lambdas (bool): Evolve the weights lambda as well (softmax-normalized)
        collinear_constraint (tuple): Per-mode phases; displacements of mode j are restricted to
            real multiples of exp(i phi_j)
        threads (int): Worker threads for fitness evaluation
    """
    population: int = 64
    generations: int = 200
    mutation_sigma: float = 0.1
    mutation_decay: float = 0.99
    crossover_rate: float = 0.7
    elite_count: int = 2
    tournament_size: int = 3
    seed: int = 0
    bounds: Optional[Tuple[Tuple[float, float], ...]] = None
    optimize_lambdas: bool = False
    collinear_constraint: Optional[Tuple[float, ...]] = None
    threads: int = 1

    def __post_init__(self):
        if self.population < 4:
            raise ValueError(f"population must be at least 4, got {self.population}")
        if not 0 <= self.elite_count < self.population:
            raise ValueError(f"elite_count must lie in [0, population), got {self.elite_count}")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError(f"crossover_rate must lie in [0, 1], got {self.crossover_rate}")
        if self.generations < 0 or self.mutation_sigma < 0:
            raise ValueError("generations and mutation_sigma must be nonnegative")
        if self.tournament_size < 1:
            raise ValueError(f"tournament_size must be positive, got {self.tournament_size}")

    @classmethod
    def from_json(cls, data: dict) -> "GaConfig":
        """Build a config from a JSON object whose keys mirror the attribute names."""
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"Unknown GA config keys: {sorted(unknown)}")
        data = dict(data)
        if data.get("bounds") is not None:
            data["bounds"] = tuple(tuple(float(v) for v in pair) for pair in data["bounds"])
        if data.get("collinear_constraint") is not None:
            data["collinear_constraint"] = tuple(float(v) for v in data["collinear_constraint"])
        return cls(**data)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class GaResult:
    """
    Best witness of a genetic search.

    Attributes:
        witness (WitnessSpec): Best witness found
        report (EvaluationReport): Its evaluation with the full number of solver starts
        fitness_history (tuple): Best fitness of every generation, starting with the initial population
    """
    witness: WitnessSpec
    report: EvaluationReport
    fitness_history: Tuple[float, ...]


class _Genome:
    """Maps gene vectors to witnesses for one (partition, m, config) combination."""

    def __init__(self, partition: PartitionSpec, m: int, config: GaConfig):
        self.partition = partition
        self.m = m
        self.config = config
        n = partition.n_modes
        self.per_entry = 1 if config.collinear_constraint is not None else 2
        if config.collinear_constraint is not None and len(config.collinear_constraint) != n:
            raise ValueError(f"collinear_constraint needs {n} phases, got {len(config.collinear_constraint)}")
        self.n_displacement = m * n * self.per_entry
        self.size = self.n_displacement + (m if config.optimize_lambdas else 0)
        if config.bounds is None:
            bounds = [(-5.0, 5.0)] * self.size
        elif len(config.bounds) != self.size:
            raise ValueError(f"bounds needs {self.size} intervals, got {len(config.bounds)}")
        else:
            bounds = list(config.bounds)
        self.low = np.array([b[0] for b in bounds], dtype=float)
        self.high = np.array([b[1] for b in bounds], dtype=float)

    def displacements(self, genes: np.ndarray) -> np.ndarray:
        n = self.partition.n_modes
        values = genes[:self.n_displacement]
        if self.per_entry == 1:
            return values.reshape(self.m, n) * np.exp(1j * np.asarray(self.config.collinear_constraint))[None, :]
        pairs = values.reshape(self.m, n, 2)
        return pairs[..., 0] + 1j * pairs[..., 1]

    def lambdas(self, genes: np.ndarray) -> Tuple[float, ...]:
        if not self.config.optimize_lambdas:
            return tuple([1.0 / self.m] * self.m)
        logits = genes[self.n_displacement:]
        weights = np.exp(logits - logits.max())
        weights = weights / weights.sum()
        # exact normalization for the witness invariant
        weights[-1] = 1.0 - weights[:-1].sum()
        return tuple(float(w) for w in weights)

    def decode(self, genes: np.ndarray) -> WitnessSpec:
        return WitnessSpec(partition=self.partition, lambdas=self.lambdas(genes),
                           displacements=self.displacements(genes))

    def encode(self, witness: WitnessSpec) -> np.ndarray:
        displacements = witness.displacements
        if self.per_entry == 1:
            values = (displacements * np.exp(-1j * np.asarray(self.config.collinear_constraint))[None, :]).real
        else:
            values = np.stack([displacements.real, displacements.imag], axis=2)
        genes = [values.reshape(-1)]
        if self.config.optimize_lambdas:
            genes.append(np.log(np.asarray(witness.lambdas)))
        return np.clip(np.concatenate(genes), self.low, self.high)

    def separate_rows(self, genes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Perturb rows that nearly coincide until all rows are distinct."""
        while True:
            rows = self.displacements(genes)
            clash = next(((a, b) for a in range(self.m) for b in range(a + 1, self.m)
                          if np.max(np.abs(rows[a] - rows[b])) < DUPLICATE_ROW_TOLERANCE), None)
            if clash is None:
                return genes
            logger.warning("Displacement rows %d and %d nearly coincide; perturbing", clash[0] + 1, clash[1] + 1)
            width = self.n_displacement // self.m
            start = clash[1] * width
            genes = genes.copy()
            genes[start:start + width] += rng.normal(0.0, 1e-3, width)
            genes = np.clip(genes, self.low, self.high)


def ga_optimize(state: StateModel, partition: PartitionSpec, m: int, config: Optional[GaConfig] = None,
                initial: Optional[WitnessSpec] = None, solver: Optional[SolverConfig] = None) -> GaResult:
    """
    Search witness parameters that minimize <L> - g_min for a state.

    Genes are the real and imaginary parts of all displacements (one real coordinate per
    entry under a collinear constraint), optionally followed by lambda logits. Selection is
    by tournament, crossover is uniform, mutation is Gaussian with a decaying width, and the
    elite is carried over with its fitness, so the best fitness never increases. During the
    search g_min uses the reduced number of solver starts; the returned report uses the full
    number.

    Args:
        state: Target state
        partition: Partition the witness refers to
        m: Number of displacement rows
        config: GA hyperparameters
        initial: Optional witness placed in the initial population
        solver: Separability solver tunables

    Returns:
        GaResult: Best witness, its report and the per-generation best fitness
    """
    config = config or GaConfig()
    solver = solver or SolverConfig(seed=config.seed)
    if m <= partition.k:
        logger.warning("m=%d does not exceed the number of subsystems K=%d; g_min will be 0", m, partition.k)
    if state.n_modes != partition.n_modes:
        raise ValueError(f"State has {state.n_modes} modes but the partition covers {partition.n_modes}")
    genome = _Genome(partition, m, config)
    rng = np.random.default_rng(config.seed)

    def fitness(genes: np.ndarray) -> float:
        witness = genome.decode(genes)
        try:
            g_min = solve_sev_multistart(witness, n_starts=solver.reduced_starts, seed=solver.seed,
                                         config=solver).g_min
        except NotConverged as e:
            # unresolved bounds never win a tournament
            logger.debug("Discarding individual: %s", e)
            return math.inf
        return expectation_L(state, witness) - g_min

    def evaluate_all(population: List[np.ndarray]) -> List[float]:
        if config.threads > 1:
            with ThreadPoolExecutor(max_workers=config.threads) as executor:
                return list(executor.map(fitness, population))
        return [fitness(genes) for genes in population]

    population = [rng.uniform(genome.low, genome.high) for _ in range(config.population)]
    if initial is not None:
        population[0] = genome.encode(initial)
    population = [genome.separate_rows(genes, rng) for genes in population]
    scores = evaluate_all(population)
    history = [min(scores)]
    sigma = config.mutation_sigma
    logger.info("Generation 0: best fitness %.6g", history[0])

    def tournament() -> np.ndarray:
        contestants = rng.choice(config.population, size=config.tournament_size, replace=False)
        return population[min(contestants, key=lambda i: scores[i])]

    for generation in range(1, config.generations + 1):
        order = np.argsort(scores, kind="stable")
        elite = [population[i] for i in order[:config.elite_count]]
        elite_scores = [scores[i] for i in order[:config.elite_count]]
        children = []
        while len(children) < config.population - config.elite_count:
            first, second = tournament(), tournament()
            if rng.random() < config.crossover_rate:
                mask = rng.random(genome.size) < 0.5
                child = np.where(mask, first, second)
            else:
                child = first.copy()
            child = np.clip(child + rng.normal(0.0, sigma, genome.size), genome.low, genome.high)
            children.append(genome.separate_rows(child, rng))
        population = elite + children
        scores = elite_scores + evaluate_all(children)
        history.append(min(scores))
        sigma *= config.mutation_decay
        logger.debug("Generation %d: best fitness %.6g, mutation width %.4g", generation, history[-1], sigma)
    logger.info("Genetic search finished after %d generations: best fitness %.6g", config.generations, history[-1])

    best = genome.decode(population[int(np.argmin(scores))])
    report = evaluate(best, state, n_starts=solver.n_starts, seed=solver.seed)
    return GaResult(witness=best, report=report, fitness_history=tuple(history))


@dataclass(frozen=True)
class SweepRow:
    param: float
    expectation: float
    g_min: float
    witness_value: float


@dataclass(frozen=True)
class SweepResult:
    """Witness evaluation along a parameter grid, rows sorted by parameter."""
    rows: Tuple[SweepRow, ...]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["param", "expectation", "g_min", "witness_value"])
        for row in self.rows:
            writer.writerow([repr(row.param), repr(row.expectation), repr(row.g_min), repr(row.witness_value)])
        return buffer.getvalue()

    def to_json(self) -> List[dict]:
        return [asdict(row) for row in self.rows]


StateFamily = Union[StateModel, Callable[[float], StateModel]]
WitnessFamily = Union[WitnessSpec, Callable[[float], WitnessSpec]]


def _at(family, parameter: float):
    return family(parameter) if callable(family) else family


def _point_evaluator(state_family: StateFamily, witness: WitnessFamily, n_starts: int, seed: int):
    fixed: Optional[SevSolution] = None
    if not callable(witness):
        fixed = solve_sev(witness, n_starts=n_starts, seed=seed)

    def evaluate_at(parameter: float) -> EvaluationReport:
        return evaluate(_at(witness, parameter), _at(state_family, parameter), solution=fixed,
                        n_starts=n_starts, seed=seed)

    return evaluate_at


def sweep(state_family: StateFamily, witness: WitnessFamily, grid: Sequence[float], n_starts: int = 64,
          seed: int = 0, threads: int = 1) -> SweepResult:
    """
    Evaluate a witness along a parameter grid.

    Either argument may be a fixed object or a function of the parameter. A fixed
    witness is solved once and its bound reused at every point.

    Args:
        state_family: State or parameter -> state
        witness: Witness or parameter -> witness
        grid: Non-empty, sorted parameter values
        n_starts: Separability solver starts
        seed: Separability solver seed
        threads: Worker threads for the grid points

    Returns:
        SweepResult: One row per grid point
    """
    grid = [float(p) for p in grid]
    if not grid:
        raise ValueError("Sweep grid must not be empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("Sweep grid must be sorted")
    evaluate_at = _point_evaluator(state_family, witness, n_starts, seed)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            reports = list(executor.map(evaluate_at, grid))
    else:
        reports = [evaluate_at(p) for p in grid]
    for p, report in zip(grid, reports):
        logger.debug("Sweep point %.6g: <L>=%.6g g_min=%.6g", p, report.expectation, report.g_min)
    return SweepResult(rows=tuple(SweepRow(param=p, expectation=r.expectation, g_min=r.g_min,
                                           witness_value=r.witness_value) for p, r in zip(grid, reports)))


def bisect_critical(state_family: StateFamily, witness: WitnessFamily, interval: Tuple[float, float],
                    tol: float = 1e-4, n_starts: int = 64, seed: int = 0) -> float:
    """
    Parameter at which the witness value <L> - g_min crosses zero.

    Args:
        state_family: State or parameter -> state
        witness: Witness or parameter -> witness
        interval: (lo, hi) with witness values of opposite sign at the ends
        tol: Width of the final bracket

    Returns:
        float: Midpoint of the final bracket

    Raises:
        NoSignChange: If the witness value has the same sign at both ends
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not tol > 0:
        raise ValueError(f"Tolerance must be positive, got {tol}")
    evaluate_at = _point_evaluator(state_family, witness, n_starts, seed)
    f_lo, f_hi = evaluate_at(lo).witness_value, evaluate_at(hi).witness_value
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise NoSignChange(f"Witness value has the same sign at {lo} ({f_lo:.6g}) and {hi} ({f_hi:.6g})")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = evaluate_at(mid).witness_value
        if f_mid == 0:
            return mid
        if math.copysign(1.0, f_mid) == math.copysign(1.0, f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        logger.debug("Bisection bracket [%.8g, %.8g]", lo, hi)
    logger.info("Critical parameter %.6g (bracket width %.2g)", 0.5 * (lo + hi), hi - lo)
    return 0.5 * (lo + hi)


def find_critical(state_family: StateFamily, witness: WitnessFamily, grid: Sequence[float], tol: float = 1e-4,
                  n_starts: int = 64, seed: int = 0, threads: int = 1) -> float:
    """
    Sweep a grid, then bisect inside the first interval where the witness value changes sign.

    Raises:
        NoSignChange: If no grid interval brackets a sign change
    """
    result = sweep(state_family, witness, grid, n_starts=n_starts, seed=seed, threads=threads)
    for left, right in zip(result.rows, result.rows[1:]):
        if left.witness_value == 0:
            return left.param
        if (left.witness_value < 0) != (right.witness_value < 0):
            return bisect_critical(state_family, witness, (left.param, right.param), tol=tol,
                                   n_starts=n_starts, seed=seed)
    raise NoSignChange(f"Witness value does not change sign on the grid [{grid[0]}, {grid[-1]}]")


def r_crit(xi: complex) -> float:
    """Smallest circle radius at which the three-point circular witness detects |xi>."""
    r = abs(xi)
    return 0.5 * math.sqrt(math.cosh(2 * r) * (math.exp(2 * r) - 1))


def r_max(xi: complex) -> float:
    """Circle radius maximizing the relative margin R."""
    return math.sqrt(2) * r_crit(xi)


def relative_margin_max(xi: complex) -> float:
    """
    R = g_min/<L> - 1 of the circular witness at r_max(xi).

    With s = sinh^2|xi| and c = sinh|2xi|/2 the witness gives <L> = r^4 - 2 b r^2 + a and
    g_min = r^4, where a = s^2 + c^2 and b = c - s, so the maximum is b^2 / (a - b^2).
    """
    r = abs(xi)
    s = math.sinh(r) ** 2
    c = 0.5 * math.sinh(2 * r)
    a, b = s ** 2 + c ** 2, c - s
    return b ** 2 / (a - b ** 2)


@dataclass(frozen=True)
class RadiusAnalysis:
    """
    Radius dependence of the circular witness for a squeezed vacuum.

    Attributes:
        r_crit (float): Closed-form critical radius
        r_max (float): Closed-form optimal radius sqrt(2) r_crit
        margin_at_r_max (float): R evaluated numerically at r_max
        best_radius (float): Grid point with the largest R
        best_margin (float): R at that grid point
        margins (tuple): R at every grid point
    """
    r_crit: float
    r_max: float
    margin_at_r_max: float
    best_radius: float
    best_margin: float
    margins: Tuple[float, ...] = field(repr=False)


def radius_analysis(xi: complex, r_grid: Sequence[float], n_starts: int = 64, seed: int = 0) -> RadiusAnalysis:
    """
    Evaluate R = g_min/<L> - 1 of the circular witness along a radius grid.

    Args:
        xi: Nonzero squeezing parameter
        r_grid: Sorted positive radii

    Returns:
        RadiusAnalysis: Closed-form radii and the numerical margins
    """
    if xi == 0:
        raise ValueError("Radius analysis needs a nonzero squeezing parameter")
    state = benchmark_configs.tmsv_state(xi)

    def margin(r: float) -> float:
        report = evaluate(benchmark_configs.tmsv_circle_witness(r, xi), state, n_starts=n_starts, seed=seed)
        return report.margin_relative if report.margin_relative is not None else -math.inf

    result = sweep(state, lambda r: benchmark_configs.tmsv_circle_witness(r, xi), r_grid, n_starts=n_starts, seed=seed)
    margins = tuple(row.g_min / row.expectation - 1.0 if row.expectation > 0 else -math.inf for row in result.rows)
    best = int(np.argmax(margins))
    return RadiusAnalysis(r_crit=r_crit(xi), r_max=r_max(xi), margin_at_r_max=margin(r_max(xi)),
                          best_radius=result.rows[best].param, best_margin=margins[best], margins=margins)
