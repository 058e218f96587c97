import numpy as np
import pytest

from conftest import random_matrix
from vqsvd.circuit import AnsatzSpec
from vqsvd.estimator import EstimatorConfig
from vqsvd.linalg import classical_svd
from vqsvd.pauli import LcuDecomposition, pauli_decompose
from vqsvd.solver import VqsvdConfig
from vqsvd.verification import (
    distance_equality_check,
    epsilon_d,
    epsilon_v,
    error_bounds,
    hermitian_embedding,
    majorization_check,
    quality_report,
    vqfne_run,
)


def test_epsilon_d_examples():
    assert epsilon_d([3, 2], [3, 2]) == 0.0
    assert epsilon_d([3, 2], [2.5, 2]) == pytest.approx(0.25)
    bound, _ = error_bounds(13.0, [2.5, 2.0])
    assert bound == pytest.approx(2.75)
    assert epsilon_d([3, 2], [2.5, 2]) <= bound


def test_epsilon_d_length_mismatch():
    with pytest.raises(ValueError, match="length"):
        epsilon_d([1, 2], [1])


def test_embedding_spectrum(rng):
    m = random_matrix(rng, 4, 3, complex_=True)
    ev = np.sort(np.linalg.eigvalsh(hermitian_embedding(m)))
    d = np.linalg.svd(m, compute_uv=False)
    expected = np.sort(np.concatenate([d, -d, [0.0]]))
    np.testing.assert_allclose(ev, expected, atol=1e-12)


def test_epsilon_v_exact_inputs(rng):
    m = random_matrix(rng, 6, complex_=True)
    svd = classical_svd(m)
    d, u, v = svd.truncate(4)
    assert epsilon_v(m, d, u, v) < 1e-10


def test_epsilon_v_diagonal():
    m = np.diag([3.0, 2.0, 1.0])
    assert epsilon_v(m, [3, 2, 1], np.eye(3), np.eye(3)) == 0.0


def test_epsilon_v_perturbed_within_bound():
    m = np.diag([3.0, 2.0])
    theta = 0.1
    u = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    v = np.eye(2)
    vals = np.diag(u.T @ m @ v)
    ev = epsilon_v(m, vals, u, v)
    _, bound_v = error_bounds(13.0, vals)
    assert 0 < ev <= bound_v + 1e-12


def test_epsilon_v_rejects_non_unit():
    with pytest.raises(ValueError, match="unit"):
        epsilon_v(np.eye(2), [1], 2 * np.eye(2)[:, :1], np.eye(2)[:, :1])


def test_majorization_examples():
    res = majorization_check(np.diag([3.0, -2.0, 1.0]))
    assert res.ok and res.equality and res.is_diagonal
    np.testing.assert_allclose(res.margins, 0.0, atol=1e-12)
    res = majorization_check(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert res.ok and not res.equality
    assert res.margins[0] == pytest.approx(1.0)


def test_majorization_strict_for_non_diagonal(rng):
    res = majorization_check(random_matrix(rng, 5))
    assert res.ok and not res.is_diagonal and not res.equality


def test_distance_equality_examples(rng):
    u = np.linalg.qr(rng.normal(size=(4, 2)))[0]
    v = np.linalg.qr(rng.normal(size=(4, 2)))[0]
    assert distance_equality_check(u, v, u, v) == (0.0, 0.0)
    lhs, rhs = distance_equality_check(u[:, :1], v[:, :1], -u[:, :1], v[:, :1])
    assert lhs == pytest.approx(4.0) and rhs == pytest.approx(4.0)


def test_vqfne_zero_matrix():
    cfg = VqsvdConfig(rank=2, ansatz=AnsatzSpec("a", 2), seed=0)
    assert vqfne_run(LcuDecomposition([], 4), cfg).value == 0.0


def test_vqfne_full_rank_reaches_norm():
    m = np.array([[1.0, 2.0], [0.5, -1.0]])
    cfg = VqsvdConfig(rank=2, ansatz=AnsatzSpec("layers", 3, "complex"), max_iterations=400,
                      tolerance=1e-10, seed=1)
    res = vqfne_run(pauli_decompose(m), cfg)
    assert res.value == pytest.approx(np.sum(m**2), abs=0.05)


def test_vqfne_shot_readout_is_seeded():
    cfg = VqsvdConfig(rank=1, ansatz=AnsatzSpec("a", 2), max_iterations=20, seed=3,
                      estimator=EstimatorConfig("shots", 100))
    lcu = pauli_decompose(np.diag([2.0, 1.0, 0.5, 0.1]))
    assert vqfne_run(lcu, cfg).value == vqfne_run(lcu, cfg).value


def test_quality_report_exact_oracle():
    m = np.diag([3.0, 2.0, 1.0, 0.5])
    svd = classical_svd(m)
    rep = quality_report(m, *svd.truncate(2))
    assert rep.bounds_hold
    assert rep.bound_d == pytest.approx(0.0)
    assert rep.majorization_ok
    text = rep.to_text()
    assert "bounds_hold = True" in text
    assert "majorization_margins = " in text


def test_quality_report_folds_negative_values():
    m = np.diag([3.0, 2.0])
    # second value learned with the wrong sign
    rep = quality_report(m, [3.0, -2.0], np.diag([1.0, -1.0]), np.eye(2))
    np.testing.assert_allclose(rep.inferred_values, [3.0, 2.0])
    assert rep.epsilon_d_exact == pytest.approx(0.0)
    assert rep.bounds_hold


def test_quality_report_with_vqfne_value():
    m = np.diag([3.0, 2.0])
    rep = quality_report(m, [2.9], np.eye(2)[:, :1], np.eye(2)[:, :1], vqfne_value=9.0)
    assert rep.bound_source == "vqfne"
    assert rep.bound_d == pytest.approx(9.0 - 2.9**2)
