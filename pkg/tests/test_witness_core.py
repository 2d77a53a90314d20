import math

import numpy as np
import pytest

import benchmark_configs as bench
from errors import ModelMismatch, NonpositiveScale, NotCollinear, SchemaError, ZeroEfficiency
from fock_oracle import (FockCutoff, apply_loss_channel, choose_cutoff, displaced_number_matrix, state_to_fock,
                         witness_expectation)
from optimizer import r_max
from state_models import CoherentSuperposition, expectation_L
from witness_core import (PartitionSpec, SevMethod, WitnessSpec, affine_rescale, alternating_update, apply_loss,
                          bipartite_witness, collapse_single_mode, compensate_loss, evaluate, is_collinear_m3,
                          load_witness, sev_objective, solve_sev, solve_sev_collinear_m3, solve_sev_multistart,
                          stationarity_residual, witness_from_json)

COLLINEAR = bipartite_witness([-1.0, 0.2, 1.1], [0.5, -1.3, 0.9])


def test_collapse_single_mode_values():
    mean, offset = collapse_single_mode([0.5, 0.5], [1.0, -1.0])
    assert mean == pytest.approx(0.0)
    assert offset == pytest.approx(1.0)


def test_collapse_single_mode_operator_identity():
    cutoff = FockCutoff(8)
    lambdas, alphas = [0.2, 0.5, 0.3], [0.4 + 0.1j, -0.7j, 1.2]
    mean, offset = collapse_single_mode(lambdas, alphas)
    weighted = sum(w * displaced_number_matrix(a, cutoff).data for w, a in zip(lambdas, alphas))
    collapsed = displaced_number_matrix(mean, cutoff).data + offset * np.eye(cutoff.dim)
    np.testing.assert_allclose(weighted, collapsed, atol=1e-12)


def test_partition_labels_and_validation():
    partition = PartitionSpec.from_labels([[1], [2, 3], [4]])
    assert partition.k == 3
    assert partition.label() == "{1}:{2,3}:{4}"
    assert partition.to_json() == [[1], [2, 3], [4]]
    with pytest.raises(ValueError):
        PartitionSpec(n_modes=3, blocks=((0, 1), (1, 2)))
    with pytest.raises(ValueError):
        PartitionSpec(n_modes=3, blocks=((0,), (1,)))


def test_witness_validation():
    partition = PartitionSpec.singletons(2)
    rows = [[0.0, 1.0], [1.0, 0.0]]
    with pytest.raises(ValueError):
        WitnessSpec(partition=partition, lambdas=(0.5, 0.6), displacements=rows)
    with pytest.raises(ValueError):
        WitnessSpec(partition=partition, lambdas=(0.5, 0.5), displacements=[[1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(NonpositiveScale):
        WitnessSpec(partition=partition, lambdas=(0.5, 0.5), displacements=rows, scale=0.0)
    with pytest.raises(ModelMismatch):
        WitnessSpec(partition=partition, lambdas=(0.5, 0.5), displacements=[[0.0, 1.0, 2.0], [1.0, 0.0, 2.0]])


def test_default_q_weights_follow_block_sizes():
    witness = bench.FOURMODE_CASES["tripartition"].witness()
    assert witness.q_weights == (1.0, 0.5, 0.5, 1.0)


def test_objective_matches_coherent_expectation():
    witness = bench.bell_witness()
    betas = [0.3 - 0.2j, -0.5 + 0.1j]
    rho = state_to_fock(CoherentSuperposition(n_modes=2, terms=((1.0, tuple(betas)),)), FockCutoff(20))
    assert sev_objective(witness, betas) == pytest.approx(witness_expectation(rho, witness), rel=1e-8)


def test_alternating_update_does_not_increase_objective():
    witness = bench.bell_witness()
    betas = np.array([0.5 + 0.5j, -0.2j])
    before = sev_objective(witness, betas)
    for block in range(2):
        betas = alternating_update(witness, betas, block)
    assert sev_objective(witness, betas) <= before


def test_bell_bound():
    solution = solve_sev(bench.bell_witness())
    assert solution.g_min == pytest.approx(0.291824, abs=1e-5)
    assert sev_objective(bench.bell_witness(), solution.argmin) == pytest.approx(solution.g_min, rel=1e-12)
    assert stationarity_residual(bench.bell_witness(), solution.argmin) < 1e-9


def test_bound_vanishes_when_rows_do_not_exceed_subsystems():
    witness = bipartite_witness([0.3, -1.0], [1.2j, 0.4])
    assert solve_sev_multistart(witness).g_min == pytest.approx(0.0, abs=1e-12)


def test_local_displacement_leaves_witness_value_unchanged():
    witness = bench.bell_witness()
    shift = np.array([0.4 - 0.3j, 0.25j])
    shifted = WitnessSpec(partition=witness.partition, lambdas=witness.lambdas,
                          displacements=witness.displacements + shift[None, :])
    assert solve_sev(shifted).g_min == pytest.approx(solve_sev(witness).g_min, rel=1e-8)


def test_bound_vanishes_for_three_subsystems():
    rng = np.random.default_rng(5)
    partition = PartitionSpec.singletons(3)
    for m, lambdas in ((3, (0.2, 0.3, 0.5)), (2, (0.4, 0.6))):
        rows = rng.normal(size=(m, 3)) + 1j * rng.normal(size=(m, 3))
        witness = WitnessSpec(partition=partition, lambdas=lambdas, displacements=rows)
        assert solve_sev_multistart(witness).g_min == pytest.approx(0.0, abs=1e-12)


def test_local_displacement_shifts_the_minimizer():
    witness = bench.bell_witness()
    shift = np.array([0.4 - 0.3j, 0.25j])
    shifted = WitnessSpec(partition=witness.partition, lambdas=witness.lambdas,
                          displacements=witness.displacements + shift[None, :])
    solution = solve_sev(witness)
    moved = np.asarray(solve_sev(shifted).argmin) - shift
    assert sev_objective(witness, moved) == pytest.approx(solution.g_min, abs=1e-9)
    assert sev_objective(shifted, np.asarray(solution.argmin) + shift) == pytest.approx(solution.g_min, abs=1e-9)


def test_symmetric_witness_has_degenerate_minimizers():
    witness = bench.q_witness()
    gamma = bench.BELL_GAMMA
    g_min = solve_sev(witness).g_min
    assert g_min == pytest.approx(0.286374, abs=1e-6)
    assert sev_objective(witness, [gamma, -gamma]) == pytest.approx(g_min, abs=1e-9)
    assert sev_objective(witness, [-gamma, gamma]) == pytest.approx(g_min, abs=1e-9)
    superposition = bench.bell_state(epsilon=0.5)
    assert expectation_L(superposition, witness) == pytest.approx(g_min, abs=1e-9)


def test_quintic_agrees_with_multistart():
    assert is_collinear_m3(COLLINEAR)
    quintic = solve_sev_collinear_m3(COLLINEAR, cross_check=False)
    multistart = solve_sev_multistart(COLLINEAR)
    assert quintic.method == SevMethod.COLLINEAR_QUINTIC
    assert quintic.g_min == pytest.approx(multistart.g_min, rel=1e-8)
    assert solve_sev(COLLINEAR).method == SevMethod.COLLINEAR_QUINTIC


@pytest.mark.slow
def test_quintic_agrees_with_multistart_on_random_lines():
    rng = np.random.default_rng(17)
    for _ in range(100):
        alphas, betas = rng.uniform(-1.5, 1.5, size=(2, 3))
        lambdas = (0.2 + rng.dirichlet(np.ones(3))) / 1.6
        lambdas[-1] = 1.0 - lambdas[:-1].sum()
        witness = bipartite_witness(alphas, betas, lambdas)
        quintic = solve_sev_collinear_m3(witness, cross_check=False)
        assert quintic.g_min == pytest.approx(solve_sev_multistart(witness).g_min, rel=1e-8, abs=1e-12)


def test_quintic_on_a_rotated_line():
    line = np.exp(0.6j)
    rotated = bipartite_witness([0.2j + t * line for t in (-1.0, 0.2, 1.1)],
                                [-0.1 + t * np.conj(line) for t in (0.5, -1.3, 0.9)])
    assert solve_sev_collinear_m3(rotated, cross_check=False).g_min == pytest.approx(
        solve_sev_collinear_m3(COLLINEAR, cross_check=False).g_min, rel=1e-8)


def test_quintic_rejects_non_collinear_witness():
    assert not is_collinear_m3(bench.bell_witness())
    with pytest.raises(NotCollinear):
        solve_sev_collinear_m3(bench.bell_witness(), cross_check=False)


def test_tmsv_circle_bound():
    r = r_max(bench.TMSV_XI)
    report = evaluate(bench.tmsv_circle_witness(r), bench.tmsv_state())
    assert report.g_min == pytest.approx(r ** 4, rel=1e-6)
    assert report.expectation == pytest.approx(1.3385, abs=1e-3)
    assert report.entangled


@pytest.mark.parametrize("name, g_min", [
    ("four_partition", 1.21988),
    ("tripartition", 0.33221),
    ("bipartition_12_34", 0.16667),
    ("bipartition_1_234", 0.16667),
])
def test_fourmode_bounds(name, g_min):
    case = bench.FOURMODE_CASES[name]
    report = evaluate(case.witness(), bench.fourmode_state())
    assert report.g_min == pytest.approx(g_min, abs=1e-4)
    assert report.entangled


def test_loss_transform_preserves_bound():
    witness = bench.bell_witness()
    lossy = apply_loss(witness, [0.6, 0.9])
    assert lossy.scale == pytest.approx(0.54)
    assert solve_sev(lossy).g_min == pytest.approx(solve_sev(witness).g_min, rel=1e-9)


def random_bipartite_witness(rng):
    displacements = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    lambdas = rng.dirichlet(np.ones(3))
    lambdas[-1] = 1.0 - lambdas[:-1].sum()
    return WitnessSpec(partition=PartitionSpec.singletons(2), lambdas=tuple(lambdas), displacements=displacements)


def test_loss_transform_preserves_bound_of_random_witnesses():
    rng = np.random.default_rng(0)
    for _ in range(20):
        witness = random_bipartite_witness(rng)
        etas = rng.uniform(0.05, 1.0, size=2)
        lossy = solve_sev(apply_loss(witness, etas))
        assert lossy.g_min == pytest.approx(solve_sev(witness).g_min, rel=1e-9, abs=1e-9)


def test_loss_transform_matches_lossy_detection():
    state = bench.bell_state()
    etas = [0.6, 0.9]
    witness = bench.bell_witness()
    rho = state_to_fock(state, choose_cutoff(state, witness))
    detected = witness_expectation(apply_loss_channel(rho, etas), witness)
    assert expectation_L(state, apply_loss(witness, etas)) == pytest.approx(detected, rel=1e-7)


def test_loss_compensation_restores_displacements():
    state = bench.bell_state()
    etas = [0.6, 0.9]
    witness = bench.bell_witness()
    realized = apply_loss(compensate_loss(witness, etas), etas)
    np.testing.assert_allclose(realized.displacements, witness.displacements, atol=1e-12)
    assert expectation_L(state, realized) == pytest.approx(0.54 * expectation_L(state, witness), rel=1e-10)


def test_loss_rejects_zero_efficiency():
    with pytest.raises(ZeroEfficiency):
        apply_loss(bench.bell_witness(), [0.0, 0.5])


def test_affine_rescale():
    assert affine_rescale(0.3, 2.0, 1.0) == pytest.approx(1.6)
    with pytest.raises(NonpositiveScale):
        affine_rescale(0.3, 0.0, 1.0)


def test_evaluate_rejects_mode_mismatch():
    with pytest.raises(ModelMismatch):
        evaluate(bench.bell_witness(), bench.fourmode_state())


def test_library_witness_matches_benchmark(repo_root):
    witness = load_witness("library/bell_witness.json")
    np.testing.assert_allclose(witness.displacements, bench.bell_witness().displacements, atol=1e-12)


def test_witness_json_errors():
    with pytest.raises(SchemaError, match="lambda"):
        witness_from_json({"modes": 2, "partition": [[1], [2]], "displacements": [[0, 1]]})
    with pytest.raises(SchemaError, match="displacements"):
        witness_from_json({"modes": 2, "partition": [[1], [2]], "lambda": [1.0], "displacements": [[0, 1, 2]]})


def test_witness_json_round_trip():
    witness = bench.FOURMODE_CASES["tripartition"].witness()
    restored = witness_from_json(witness.to_json())
    assert restored.partition == witness.partition
    np.testing.assert_allclose(restored.displacements, witness.displacements)
    assert math.isclose(restored.scale, witness.scale)
