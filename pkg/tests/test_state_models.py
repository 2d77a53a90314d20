import cmath
import math

import numpy as np
import pytest

import benchmark_configs as bench
from errors import ModelMismatch, SchemaError
from fock_oracle import (FockCutoff, choose_cutoff, displaced_number_matrix, state_to_fock, tensor_expectation,
                         witness_expectation)
from state_models import (FockDensity, NoisyFourModeCat, PhotonSubtractedTmsv, QuadratureRule, Tmsv,
                          coherent_superposition_correlation, expectation_L, mixture_expectation,
                          photon_subtracted_correlation, photon_subtracted_norm, rotate_phases, state_from_json,
                          state_to_json, superposition_norm, tmsv_correlation)
from witness_core import bipartite_witness


def oracle_correlation(state, row, n_max=30):
    cutoff = FockCutoff(n_max)
    rho = state_to_fock(state, cutoff)
    return tensor_expectation(rho, [None if a is None else displaced_number_matrix(a, cutoff) for a in row])


def test_tmsv_correlation_at_origin():
    s = math.sinh(0.5) ** 2
    assert tmsv_correlation(0.5, 0, 0) == pytest.approx(2 * s ** 2 + s, abs=1e-12)


@pytest.mark.parametrize("xi, alpha, beta", [
    (0.5, 0.3 - 0.2j, 0.1 + 0.4j),
    (0.4 * cmath.exp(0.9j), -0.6, 0.2j),
])
def test_tmsv_correlation_matches_oracle(xi, alpha, beta):
    expected = oracle_correlation(Tmsv(xi), [alpha, beta], n_max=30)
    assert tmsv_correlation(xi, alpha, beta) == pytest.approx(expected, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("kappa", [0.0, 0.5, 1.0])
def test_photon_subtracted_correlation_matches_oracle(kappa):
    state = PhotonSubtractedTmsv(xi=0.5, kappa=kappa)
    alpha, beta = 0.4, -0.3j
    expected = oracle_correlation(state, [alpha, beta], n_max=30)
    assert photon_subtracted_correlation(0.5, kappa, alpha, beta) == pytest.approx(expected, rel=1e-9)


def test_photon_subtracted_norm_is_mean_photon_number():
    assert photon_subtracted_norm(0.5) == pytest.approx(math.sinh(0.5) ** 2, rel=1e-12)


def test_superposition_matches_oracle():
    state = bench.bell_state()
    row = [0.3, -0.2j]
    assert coherent_superposition_correlation(state, row) == pytest.approx(oracle_correlation(state, row), rel=1e-7)
    assert coherent_superposition_correlation(state, [None, 0.5]) == pytest.approx(
        oracle_correlation(state, [None, 0.5]), rel=1e-7)


def test_superposition_norm_of_single_term():
    state = bench.bell_state(epsilon=0.0)
    assert superposition_norm(state) == pytest.approx(1.0, abs=1e-12)


def test_bell_expectation():
    assert expectation_L(bench.bell_state(), bench.bell_witness()) == pytest.approx(0.275426, abs=1e-4)


def test_subtracted_expectations():
    assert expectation_L(bench.subtracted_global_state(), bench.subtracted_global_witness()) == \
        pytest.approx(22.7245, abs=1e-3)
    assert expectation_L(bench.subtracted_local_state(), bench.subtracted_local_witness()) == \
        pytest.approx(12.2243, abs=1e-3)


def test_expectation_matches_oracle_for_fock_density():
    state = bench.bell_state()
    witness = bench.bell_witness()
    rho = state_to_fock(state, choose_cutoff(state, witness))
    assert expectation_L(FockDensity(rho), witness) == pytest.approx(expectation_L(state, witness), rel=1e-7)


def test_expectation_rejects_mode_mismatch():
    with pytest.raises(ModelMismatch):
        expectation_L(bench.fourmode_state(), bench.bell_witness())


def test_quadrature_weights_sum_to_one():
    gammas, weights = QuadratureRule.of_order(12).points(0.4, 0.1)
    assert weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.dot(weights, gammas) == pytest.approx(0.4, abs=1e-12)


def test_mixture_of_second_moment():
    gamma, sigma = 0.3 + 0.1j, 0.2
    value = mixture_expectation(gamma, sigma, lambda g: np.abs(g) ** 2, vectorized=True)
    assert value == pytest.approx(abs(gamma) ** 2 + 2 * sigma ** 2, abs=1e-12)
    assert mixture_expectation(gamma, 0.0, lambda g: abs(g) ** 2) == pytest.approx(0.1)


def test_noiseless_cat_expectation():
    case = bench.FOURMODE_CASES["four_partition"]
    assert expectation_L(bench.fourmode_state(), case.witness()) == pytest.approx(1.03415, abs=1e-3)


def test_rotate_tmsv_stays_in_family():
    rotated = rotate_phases(Tmsv(0.5), [0.3, 0.4])
    assert isinstance(rotated, Tmsv)
    assert rotated.xi == pytest.approx(0.5 * cmath.exp(0.7j))


def test_rotate_fock_density_matches_family_rotation():
    cutoff = FockCutoff(15)
    rotated = rotate_phases(FockDensity(state_to_fock(Tmsv(0.5), cutoff)), [0.3, 0.4])
    np.testing.assert_allclose(rotated.matrix.data, state_to_fock(Tmsv(0.5 * cmath.exp(0.7j)), cutoff).data,
                               atol=1e-12)


def test_rotate_without_cutoff_fails_for_subtracted_state():
    with pytest.raises(ValueError):
        rotate_phases(PhotonSubtractedTmsv(xi=0.5, kappa=0.5), [0.1, 0.2])


def test_state_json_round_trip():
    state = NoisyFourModeCat(gamma=0.4 + 0.1j, sigma=0.05)
    assert state_from_json(state_to_json(state)) == state


def test_state_json_errors_name_the_field():
    with pytest.raises(SchemaError, match="state.type"):
        state_from_json({"type": "squeezed_cat"})
    with pytest.raises(SchemaError, match="kappa"):
        state_from_json({"type": "photon_subtracted_tmsv", "xi": 0.5})


@pytest.mark.parametrize("state", [
    bench.bell_state(),
    Tmsv(0.4 * cmath.exp(0.3j)),
    PhotonSubtractedTmsv(xi=0.5, kappa=0.3),
])
def test_expectation_matches_oracle_on_random_witnesses(state):
    rng = np.random.default_rng(23)
    rho = state_to_fock(state, FockCutoff(30))
    for _ in range(5):
        rows = rng.uniform(-1, 1, size=(3, 2)) + 1j * rng.uniform(-1, 1, size=(3, 2))
        lambdas = rng.dirichlet(np.ones(3))
        lambdas[-1] = 1.0 - lambdas[:-1].sum()
        witness = bipartite_witness(rows[:, 0], rows[:, 1], lambdas)
        assert expectation_L(state, witness) == pytest.approx(witness_expectation(rho, witness), rel=1e-6)


@pytest.mark.slow
def test_fourmode_expectation_matches_oracle():
    state = bench.fourmode_state()
    rho = state_to_fock(state, FockCutoff(6))
    for case in bench.FOURMODE_CASES.values():
        witness = case.witness()
        assert expectation_L(state, witness) == pytest.approx(witness_expectation(rho, witness), rel=1e-4)
