import math

import numpy as np
import pytest

import benchmark_configs as bench
from baselines import (SIGN_TOLERANCE, BaselineResult, Criterion, check_uncertainty, duan_criterion,
                       epsilon_disk_scan, simon_criterion, state_covariance)
from errors import InvalidCovariance
from state_models import Tmsv, rotate_phases


def tmsv_covariance(r):
    c, s = math.cosh(2 * r) / 2, math.sinh(2 * r) / 2
    return np.array([[c, 0, -s, 0], [0, c, 0, s], [-s, 0, c, 0], [0, s, 0, c]])


def test_vacuum_sits_on_the_boundary():
    vacuum = np.eye(4) / 2
    simon = simon_criterion(vacuum)
    duan = duan_criterion(vacuum)
    assert simon.value == pytest.approx(0.0, abs=1e-12)
    assert duan.value == pytest.approx(0.0, abs=1e-9)
    assert not simon.entangled and not duan.entangled


def test_squeezed_vacuum_is_detected_by_both():
    cov = tmsv_covariance(0.5)
    simon = simon_criterion(cov)
    duan = duan_criterion(cov)
    assert simon.value == pytest.approx((1 - math.cosh(2.0)) / 8, abs=1e-10)
    assert duan.value == pytest.approx(2 * (math.exp(-1.0) - 1), abs=1e-8)
    assert simon.entangled and duan.entangled
    assert duan.to_json() == {"criterion": "duan", "value": duan.value, "entangled": True}


def test_state_covariance_of_squeezed_vacuum():
    np.testing.assert_allclose(state_covariance(Tmsv(0.5)), tmsv_covariance(0.5), atol=1e-8)


def test_state_covariance_needs_two_modes():
    with pytest.raises(ValueError):
        state_covariance(bench.fourmode_state())


def test_invalid_covariances():
    with pytest.raises(InvalidCovariance):
        check_uncertainty(np.eye(4) / 10)
    with pytest.raises(InvalidCovariance):
        check_uncertainty(np.eye(2) / 2)
    skew = np.eye(4) / 2
    skew[0, 1] = 0.1
    with pytest.raises(InvalidCovariance):
        check_uncertainty(skew)


def test_epsilon_disk_scan_rows():
    rows = epsilon_disk_scan(bench.BELL_GAMMA, [0.5, 1.0], [0.0, math.pi])
    assert len(rows) == 4
    assert set(rows[0]) == {"abs_epsilon", "arg_epsilon", "simon", "duan"}
    assert rows[-1]["abs_epsilon"] == 1.0 and rows[-1]["arg_epsilon"] == pytest.approx(math.pi)
    assert Criterion("simon") is Criterion.SIMON


def test_bell_like_state_is_not_flagged():
    cov = state_covariance(bench.bell_state())
    simon = simon_criterion(cov)
    duan = duan_criterion(cov)
    assert simon.value >= -SIGN_TOLERANCE and not simon.entangled
    assert duan.value >= -SIGN_TOLERANCE and not duan.entangled


def test_rounding_below_zero_is_not_entanglement():
    assert not BaselineResult.of(Criterion.SIMON, -5.6e-17).entangled
    assert BaselineResult.of(Criterion.SIMON, -1e-6).entangled


def test_criteria_ignore_local_phases():
    state = Tmsv(0.5)
    rotated = rotate_phases(state, [0.7, -1.1])
    cov, rotated_cov = state_covariance(state), state_covariance(rotated)
    assert simon_criterion(rotated_cov).value == pytest.approx(simon_criterion(cov).value, abs=1e-9)
    assert duan_criterion(rotated_cov).value == pytest.approx(duan_criterion(cov).value, abs=1e-8)


def test_epsilon_disk_scan_converges_every_point():
    rows = epsilon_disk_scan(bench.BELL_GAMMA, [0.2, 1.0], [0.0, 2.0])
    for row in rows:
        epsilon = row["abs_epsilon"] * np.exp(1j * row["arg_epsilon"])
        cov = state_covariance(bench.bell_state(bench.BELL_GAMMA, epsilon))
        assert row["simon"] == pytest.approx(simon_criterion(cov).value, abs=1e-12)
        assert row["duan"] == pytest.approx(duan_criterion(cov).value, abs=1e-12)
