import math

import numpy as np
import pytest

import benchmark_configs as bench
from errors import CutoffTooSmall, ModelMismatch
from fock_oracle import (FockCutoff, annihilation_matrix, apply_loss_channel, choose_cutoff, coherent_vector,
                         covariance_matrix, displaced_number_matrix, displacement_matrix,
                         joint_displaced_number_distribution, make_density, pure_density, state_to_fock,
                         tensor_expectation, uncertainty_margin, witness_expectation)
from state_models import Tmsv, expectation_L


def number_state(n, cutoff):
    vector = np.zeros(cutoff.dim, dtype=complex)
    vector[n] = 1.0
    return pure_density(vector, 1, cutoff)


def test_cutoff_rejects_zero():
    with pytest.raises(ValueError):
        FockCutoff(0)
    assert FockCutoff(4).dim == 5


def test_annihilation_entries():
    a = annihilation_matrix(FockCutoff(4)).data
    assert a[0, 1] == pytest.approx(1.0)
    assert a[2, 3] == pytest.approx(math.sqrt(3))
    assert np.count_nonzero(a) == 4


def test_displaced_number_diagonal_and_hermitian():
    cutoff = FockCutoff(6)
    alpha = 0.4 - 0.7j
    n_alpha = displaced_number_matrix(alpha, cutoff).data
    np.testing.assert_allclose(np.diag(n_alpha).real, np.arange(7) + abs(alpha) ** 2, atol=1e-12)
    np.testing.assert_allclose(n_alpha, n_alpha.conj().T, atol=1e-12)
    np.testing.assert_allclose(displaced_number_matrix(0, cutoff).data, np.diag(np.arange(7)), atol=1e-12)
    with pytest.raises(ValueError):
        n_alpha[0, 0] = 1.0


def test_displacement_of_vacuum_is_coherent():
    beta = 0.8 + 0.3j
    column = displacement_matrix(beta, FockCutoff(30), FockCutoff(1))[:, 0]
    np.testing.assert_allclose(column, coherent_vector(beta, FockCutoff(30)), atol=1e-12)
    assert np.linalg.norm(column) == pytest.approx(1.0, abs=1e-10)


def test_displacement_columns_are_normalized():
    d = displacement_matrix(-0.5j, FockCutoff(40), FockCutoff(5))
    np.testing.assert_allclose(d.conj().T @ d, np.eye(6), atol=1e-10)


def test_density_validation():
    cutoff = FockCutoff(1)
    with pytest.raises(ValueError):
        make_density(np.array([[1.0, 0.0], [0.0, -0.5]]), 1, cutoff)
    rho = make_density(np.diag([2.0, 2.0]), 1, cutoff)
    assert np.trace(rho.data).real == pytest.approx(1.0)


def test_tmsv_number_correlation():
    rho = state_to_fock(Tmsv(0.5), FockCutoff(20))
    n = displaced_number_matrix(0, rho.cutoff)
    s = math.sinh(0.5) ** 2
    assert tensor_expectation(rho, [n, n]) == pytest.approx(2 * s ** 2 + s, abs=1e-10)
    assert tensor_expectation(rho, [n, None]) == pytest.approx(s, abs=1e-10)


def test_tensor_expectation_checks_operator_count():
    rho = state_to_fock(Tmsv(0.5), FockCutoff(10))
    with pytest.raises(ModelMismatch):
        tensor_expectation(rho, [None])
    with pytest.raises(ModelMismatch):
        tensor_expectation(rho, [displaced_number_matrix(0, FockCutoff(5)), None])


def test_tmsv_covariance_blocks():
    cov = covariance_matrix(state_to_fock(Tmsv(0.5), FockCutoff(25)))
    c, s = math.cosh(1.0) / 2, math.sinh(1.0) / 2
    expected = np.array([[c, 0, -s, 0], [0, c, 0, s], [-s, 0, c, 0], [0, s, 0, c]])
    np.testing.assert_allclose(cov, expected, atol=1e-8)
    assert uncertainty_margin(cov) > -1e-8


def test_displaced_distribution_of_single_photon():
    rho = number_state(1, FockCutoff(3))
    distribution = joint_displaced_number_distribution(rho, [1.0], FockCutoff(30))
    p = distribution.probabilities
    assert p[0] == pytest.approx(math.exp(-1.0), abs=1e-10)
    assert p @ np.arange(31) == pytest.approx(2.0, abs=1e-8)
    assert distribution.mass_deficit < 1e-10


def test_loss_channel_on_single_photon():
    lossy = apply_loss_channel(number_state(1, FockCutoff(3)), [0.3])
    np.testing.assert_allclose(np.diag(lossy.data).real, [0.7, 0.3, 0.0, 0.0], atol=1e-12)


def test_loss_scales_mean_photon_number():
    rho = state_to_fock(Tmsv(0.5), FockCutoff(20))
    lossy = apply_loss_channel(rho, [0.6, 1.0])
    n = displaced_number_matrix(0, rho.cutoff)
    assert tensor_expectation(lossy, [n, None]) == pytest.approx(0.6 * math.sinh(0.5) ** 2, abs=1e-10)
    assert tensor_expectation(lossy, [None, n]) == pytest.approx(math.sinh(0.5) ** 2, abs=1e-10)


def test_choose_cutoff_converges_covariance():
    cutoff = choose_cutoff(Tmsv(0.5))
    cov = covariance_matrix(state_to_fock(Tmsv(0.5), cutoff))
    c, s = math.cosh(1.0) / 2, math.sinh(1.0) / 2
    expected = np.array([[c, 0, -s, 0], [0, c, 0, s], [-s, 0, c, 0], [0, s, 0, c]])
    np.testing.assert_allclose(cov, expected, atol=1e-10)


def test_choose_cutoff_converges_witness_expectation():
    state, witness = bench.bell_state(), bench.bell_witness()
    rho = state_to_fock(state, choose_cutoff(state, witness))
    assert witness_expectation(rho, witness) == pytest.approx(expectation_L(state, witness), rel=1e-9)


def test_choose_cutoff_raises_when_dimension_runs_out():
    with pytest.raises(CutoffTooSmall):
        choose_cutoff(Tmsv(0.5), max_dim=25)
