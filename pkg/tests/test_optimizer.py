import math

import numpy as np
import pytest

import benchmark_configs as bench
from errors import NoSignChange
from optimizer import (GaConfig, bisect_critical, find_critical, ga_optimize, r_crit, r_max, radius_analysis,
                       relative_margin_max, sweep)
from state_models import NoisyFourModeCat, Tmsv
from witness_core import PartitionSpec, evaluate

SMALL_GA = GaConfig(population=8, generations=3, mutation_sigma=0.02, seed=7)


def test_closed_form_radii():
    assert r_crit(0.5) == pytest.approx(0.81416328439848007, rel=1e-12)
    assert r_max(0.5) == pytest.approx(1.1514007587825539, rel=1e-12)


def test_margin_at_optimal_radius_matches_closed_form():
    r = r_max(0.5)
    report = evaluate(bench.tmsv_circle_witness(r), bench.tmsv_state(0.5))
    assert report.margin_relative == pytest.approx(relative_margin_max(0.5), rel=1e-6)


def test_ga_config_validation():
    with pytest.raises(ValueError):
        GaConfig(population=3)
    with pytest.raises(ValueError):
        GaConfig.from_json({"population": 16, "mutation_rate": 0.1})
    config = GaConfig.from_json({"population": 16, "bounds": None, "seed": 3})
    assert config.population == 16 and config.seed == 3


def test_ga_keeps_best_fitness_for_bell_state():
    result = ga_optimize(bench.bell_state(), PartitionSpec.singletons(2), 3, config=SMALL_GA,
                         initial=bench.bell_witness())
    history = result.fitness_history
    assert len(history) == SMALL_GA.generations + 1
    assert all(b <= a for a, b in zip(history, history[1:]))
    assert history[0] <= -0.015
    assert result.witness.m == 3


def test_ga_keeps_best_fitness_for_squeezed_vacuum():
    initial = bench.tmsv_circle_witness(r_max(0.5))
    result = ga_optimize(bench.tmsv_state(), PartitionSpec.singletons(2), 3, config=SMALL_GA, initial=initial)
    assert result.fitness_history[-1] <= -0.40


def test_ga_collinear_constraint_keeps_displacements_on_lines():
    config = GaConfig(population=6, generations=1, seed=1, collinear_constraint=(0.0, math.pi / 2))
    result = ga_optimize(bench.bell_state(), PartitionSpec.singletons(2), 3, config=config)
    np.testing.assert_allclose(result.witness.displacements[:, 0].imag, 0.0, atol=1e-12)
    np.testing.assert_allclose(result.witness.displacements[:, 1].real, 0.0, atol=1e-12)


def test_ga_rejects_partition_of_other_size():
    with pytest.raises(ValueError):
        ga_optimize(bench.fourmode_state(), PartitionSpec.singletons(2), 3, config=SMALL_GA)


def test_sweep_rows_and_csv():
    witness = bench.tmsv_circle_witness(r_max(0.5))
    result = sweep(lambda xi: Tmsv(xi), witness, [0.3, 0.4, 0.5])
    assert [row.param for row in result.rows] == [0.3, 0.4, 0.5]
    assert result.to_csv().splitlines()[0] == "param,expectation,g_min,witness_value"
    assert len({row.g_min for row in result.rows}) == 1
    assert result.rows[-1].expectation == pytest.approx(1.3385, abs=1e-3)


def test_sweep_rejects_unsorted_grid():
    with pytest.raises(ValueError):
        sweep(bench.tmsv_state(), bench.tmsv_circle_witness(1.0), [0.5, 0.4])


def test_threaded_sweep_matches_serial():
    witness = bench.FOURMODE_CASES["bipartition_12_34"].witness()

    def family(sigma):
        return NoisyFourModeCat(gamma=bench.FOURMODE_GAMMA, sigma=sigma)

    serial = sweep(family, witness, [0.0, 0.05])
    threaded = sweep(family, witness, [0.0, 0.05], threads=2)
    assert serial.rows == threaded.rows


def test_bisection_finds_critical_radius():
    critical = bisect_critical(bench.tmsv_state(), lambda r: bench.tmsv_circle_witness(r), (0.5, 1.2), tol=1e-5)
    assert critical == pytest.approx(r_crit(0.5), abs=1e-4)


def test_critical_search_without_sign_change():
    with pytest.raises(NoSignChange):
        find_critical(bench.tmsv_state(), lambda r: bench.tmsv_circle_witness(r), [1.0, 1.1, 1.2])


def test_radius_analysis_peaks_near_optimal_radius():
    grid = np.linspace(0.9, 1.5, 13)
    analysis = radius_analysis(0.5, grid)
    assert abs(analysis.best_radius - analysis.r_max) <= grid[1] - grid[0]
    assert analysis.margin_at_r_max == pytest.approx(relative_margin_max(0.5), rel=1e-6)


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(bench.FOURMODE_CASES))
def test_fourmode_critical_noise(name):
    case = bench.FOURMODE_CASES[name]
    witness = case.witness()
    critical = find_critical(lambda sigma: bench.fourmode_state(sigma=sigma), witness, bench.noise_grid())
    assert critical == pytest.approx(case.sigma_crit, abs=0.005)
