import math

import pytest

import benchmark_configs as bench
from errors import ModelMismatch
from measurement_sim import simulate
from optimizer import r_max
from state_models import expectation_L
from witness_core import apply_loss

BELL_EXPECTATION = 0.275426


def test_estimate_agrees_with_closed_form():
    estimate = simulate(bench.bell_witness(), bench.bell_state(), shots=200_000, seed=1)
    assert estimate.stderr < 0.01
    assert abs(estimate.mean - BELL_EXPECTATION) < 5 * estimate.stderr
    assert sum(estimate.per_k_counts) == 200_000
    assert estimate.mass_deficit < 1e-6


def test_fixed_seed_is_reproducible():
    first = simulate(bench.bell_witness(), bench.bell_state(), shots=5_000, seed=42, workers=2)
    second = simulate(bench.bell_witness(), bench.bell_state(), shots=5_000, seed=42, workers=2)
    assert first == second
    other = simulate(bench.bell_witness(), bench.bell_state(), shots=5_000, seed=43, workers=2)
    assert other.mean != first.mean


def test_lossy_detection_matches_loss_transform():
    etas = (0.7, 0.8)
    witness = bench.bell_witness()
    estimate = simulate(witness, bench.bell_state(), shots=200_000, seed=3, etas=etas)
    expected = expectation_L(bench.bell_state(), apply_loss(witness, etas))
    assert abs(estimate.mean - expected) < 5 * estimate.stderr


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        simulate(bench.bell_witness(), bench.bell_state(), shots=0)
    with pytest.raises(ModelMismatch):
        simulate(bench.bell_witness(), bench.fourmode_state(), shots=10)


@pytest.mark.slow
def test_million_shots_on_bell_state():
    estimate = simulate(bench.bell_witness(), bench.bell_state(), shots=1_000_000, seed=0, workers=4)
    assert abs(estimate.mean - BELL_EXPECTATION) < 5 * estimate.stderr
    assert estimate.stderr < 5e-3


def test_estimates_are_unbiased_across_seeds():
    estimates = [simulate(bench.bell_witness(), bench.bell_state(), shots=5_000, seed=seed) for seed in range(20)]
    pooled = sum(e.mean for e in estimates) / len(estimates)
    pooled_stderr = math.sqrt(sum(e.stderr ** 2 for e in estimates)) / len(estimates)
    assert abs(pooled - BELL_EXPECTATION) < 5 * pooled_stderr


@pytest.mark.slow
def test_million_shots_on_squeezed_vacuum():
    witness = bench.tmsv_circle_witness(r_max(bench.TMSV_XI))
    state = bench.tmsv_state()
    estimate = simulate(witness, state, shots=1_000_000, seed=5, workers=4)
    assert abs(estimate.mean - expectation_L(state, witness)) < 5 * estimate.stderr
