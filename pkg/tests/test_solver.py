from dataclasses import replace

import numpy as np
import pytest

from conftest import random_matrix, random_unitary
from vqsvd.circuit import AnsatzSpec, Gate, ParamCircuit, ansatz_candidate
from vqsvd.estimator import EstimatorConfig
from vqsvd.linalg import classical_svd, reconstruct_rank_t
from vqsvd.pauli import LcuDecomposition, PauliString, pauli_decompose
from vqsvd.solver import (
    VqsvdConfig,
    VqsvdProblem,
    extract_vectors,
    fold_signs,
    gradient,
    loss,
    loss_of_unitaries,
    run,
)

DIAG4 = np.diag([3.0, 2.0, 1.0, 0.5])


def _identity_config(n, rank, weights=None):
    return VqsvdConfig(rank=rank, weights=weights, ansatz=ParamCircuit(n, (), 0))


def test_loss_diagonal_identity_circuits():
    cfg = _identity_config(2, 2)
    assert loss(pauli_decompose(DIAG4), [], [], cfg) == pytest.approx(2 * 3 + 1 * 2)


def test_loss_zero_matrix(rng):
    cfg = VqsvdConfig(rank=2, ansatz=AnsatzSpec("a", 2))
    lcu = LcuDecomposition([], 4)
    a = rng.uniform(0, 6, 4)
    assert loss(lcu, a, a, cfg) == 0.0
    ga, gb = gradient(lcu, a, a, cfg)
    assert not np.any(ga) and not np.any(gb)


def test_loss_linear_in_weights(rng):
    m = random_matrix(rng, 4)
    lcu = pauli_decompose(m)
    spec = AnsatzSpec("a", 2)
    a = rng.uniform(0, 6, 4)
    b = rng.uniform(0, 6, 4)
    base = loss(lcu, a, b, VqsvdConfig(rank=3, weights=(3, 2, 1), ansatz=spec))
    scaled = loss(lcu, a, b, VqsvdConfig(rank=3, weights=(7.5, 5, 2.5), ansatz=spec))
    assert scaled == pytest.approx(2.5 * base)


def test_loss_of_unitaries_direct_sum():
    assert loss_of_unitaries(DIAG4, np.eye(4), np.eye(4), (4, 3, 2, 1)) == pytest.approx(20.5)


def test_loss_of_unitaries_rearrangement():
    v = np.eye(4)[:, [1, 0, 2, 3]]
    assert loss_of_unitaries(DIAG4, v, v, (4, 3, 2, 1)) < 20.5


def test_loss_of_unitaries_optimum_is_oracle(rng):
    m = random_matrix(rng, 6, complex_=True)
    svd = classical_svd(m)
    q = (3.0, 2.0, 1.0)
    expected = float(np.dot(q, svd.singular_values[:3]))
    assert loss_of_unitaries(m, svd.left_vectors, svd.right_vectors, q) == pytest.approx(expected, abs=1e-9)
    for _ in range(20):
        u, v = random_unitary(rng, 6), random_unitary(rng, 6)
        assert loss_of_unitaries(m, u, v, q) <= expected + 1e-9


def test_weights_validation():
    with pytest.raises(ValueError, match="decreasing"):
        VqsvdConfig(rank=2, weights=(1, 2))
    with pytest.raises(ValueError, match="weights for rank"):
        VqsvdConfig(rank=3, weights=(2, 1))
    with pytest.raises(ValueError, match="not unitary"):
        loss_of_unitaries(DIAG4, 2 * np.eye(4), np.eye(4), (1,))


def test_gradient_closed_form_one_qubit():
    # L(alpha) = Re <0| Ry(alpha)^dagger X |0> = sin(alpha / 2)
    lcu = LcuDecomposition([(1.0, PauliString("X"))], 2)
    ry = ParamCircuit(1, (Gate("RY", (0,), slot=0),), 1)
    cfg = VqsvdConfig(rank=1, ansatz=ry, v_ansatz=ParamCircuit(1, (), 0))
    for alpha in (0.0, 0.8, 2.5):
        assert loss(lcu, [alpha], [], cfg) == pytest.approx(np.sin(alpha / 2))
        ga, gb = gradient(lcu, [alpha], [], cfg)
        assert ga[0] == pytest.approx(0.5 * np.cos(alpha / 2))
        assert gb.size == 0
    ga, _ = gradient(lcu, [0.0], [], cfg)
    assert ga[0] == pytest.approx(0.5)


def _fd(problem, a, b, h=1e-5):
    ga = np.empty_like(a)
    for i in range(a.size):
        e = np.zeros_like(a)
        e[i] = h
        ga[i] = (problem.loss(a + e, b) - problem.loss(a - e, b)) / (2 * h)
    gb = np.empty_like(b)
    for i in range(b.size):
        e = np.zeros_like(b)
        e[i] = h
        gb[i] = (problem.loss(a, b + e) - problem.loss(a, b - e)) / (2 * h)
    return ga, gb


@pytest.mark.parametrize("mode", ["real", "complex"])
def test_gradient_vs_finite_difference_and_naive_shift(rng, mode):
    m = random_matrix(rng, 8, complex_=(mode == "complex"))
    circ = ansatz_candidate("d", 3, 1, mode)
    cfg = VqsvdConfig(rank=3, ansatz=circ)
    p = VqsvdProblem(pauli_decompose(m), cfg)
    a = rng.uniform(0, 2 * np.pi, circ.param_count)
    b = rng.uniform(0, 2 * np.pi, circ.param_count)
    ga, gb = p.gradient(a, b)
    fa, fb = _fd(p, a, b)
    np.testing.assert_allclose(ga, fa, atol=1e-6)
    np.testing.assert_allclose(gb, fb, atol=1e-6)
    # one loss evaluation per shifted angle, no adjoint sweep
    naive_a = [0.5 * p.loss(a + np.pi * (np.arange(a.size) == i), b) for i in range(a.size)]
    np.testing.assert_allclose(ga, naive_a, atol=1e-12)


def test_frobenius_gradient_vs_finite_difference(rng):
    m = random_matrix(rng, 4, complex_=True)
    circ = ansatz_candidate("a", 2, 2, "complex")
    p = VqsvdProblem(pauli_decompose(m), VqsvdConfig(rank=2, ansatz=circ))
    a = rng.uniform(0, 6, circ.param_count)
    b = rng.uniform(0, 6, circ.param_count)
    _, ga, gb = p.frobenius_gradient(a, b)
    h = 1e-5
    for i in range(a.size):
        e = np.zeros_like(a)
        e[i] = h
        fd = (p.frobenius_objective(a + e, b) - p.frobenius_objective(a - e, b)) / (2 * h)
        assert ga[i] == pytest.approx(fd, abs=1e-6)
    for i in range(b.size):
        e = np.zeros_like(b)
        e[i] = h
        fd = (p.frobenius_objective(a, b + e) - p.frobenius_objective(a, b - e)) / (2 * h)
        assert gb[i] == pytest.approx(fd, abs=1e-6)


def test_run_zero_matrix_converges_immediately():
    res = run(LcuDecomposition([], 4), VqsvdConfig(rank=2, ansatz=AnsatzSpec("a", 2), seed=0))
    assert res.converged
    assert res.iterations == 1
    assert res.loss_history == [0.0]


def test_run_reproducible_and_traced():
    lcu = pauli_decompose(DIAG4)
    cfg = VqsvdConfig(rank=2, ansatz=AnsatzSpec("a", 3), max_iterations=15, seed=4)
    seen = []
    r1 = run(lcu, cfg, callback=lambda it, val, m: seen.append(it))
    r2 = run(lcu, cfg)
    np.testing.assert_array_equal(r1.alpha, r2.alpha)
    assert r1.loss_history == r2.loss_history
    assert seen == list(range(1, r1.iterations + 1))
    assert r1.m_history.shape == (r1.iterations, 2)


def test_run_with_shot_estimator_is_seeded():
    lcu = pauli_decompose(np.diag([2.0, 1.0]))
    est = EstimatorConfig("shots", 64)
    cfg = VqsvdConfig(rank=2, ansatz=AnsatzSpec("layers", 1), max_iterations=5, seed=1, estimator=est)
    assert run(lcu, cfg).loss_history == run(lcu, cfg).loss_history


def test_converged_diagonal_vectors_are_basis():
    lcu = pauli_decompose(DIAG4)
    cfg = VqsvdConfig(rank=4, ansatz=AnsatzSpec("a", 20), max_iterations=500, tolerance=1e-9, seed=0)
    res = run(lcu, cfg)
    lefts, rights = extract_vectors(res)
    values, lefts, rights = fold_signs(res.m_values, lefts, rights)
    for j in range(4):
        assert abs(lefts[j, j]) > 0.99
        assert abs(rights[j, j]) > 0.99
    np.testing.assert_allclose(reconstruct_rank_t(values, lefts, rights, 4), DIAG4, atol=1e-3)


def test_extract_vectors_identity_circuits():
    cfg = _identity_config(2, 3)
    res = run(pauli_decompose(DIAG4), replace(cfg, max_iterations=1))
    lefts, rights = extract_vectors(res)
    np.testing.assert_array_equal(np.abs(lefts), np.eye(4)[:, :3])
    np.testing.assert_array_equal(np.abs(rights), np.eye(4)[:, :3])


def test_fold_signs_keeps_terms(rng):
    m = np.array([2.0, -3.0, 0.5])
    lefts = np.linalg.qr(rng.normal(size=(4, 3)))[0]
    rights = np.linalg.qr(rng.normal(size=(4, 3)))[0]
    vals, lf, rt = fold_signs(m, lefts, rights)
    np.testing.assert_array_equal(vals, [3.0, 2.0, 0.5])
    np.testing.assert_allclose(
        reconstruct_rank_t(vals, lf, rt, 3), (lefts * m) @ rights.T, atol=1e-14
    )


def test_rank_above_dimension_rejected():
    with pytest.raises(ValueError, match="exceeds"):
        VqsvdProblem(pauli_decompose(np.eye(2)), VqsvdConfig(rank=3))


def test_complex_mode_reaches_ky_fan_value_with_phased_determinant(rng):
    # det M carries a phase no Rz/Ry/CNOT circuit pair can cancel on its own
    m = np.diag([2.0, 1.0]) * np.exp(0.7j)
    cfg = VqsvdConfig(rank=2, ansatz=AnsatzSpec("layers", 2, "complex"), max_iterations=600,
                      tolerance=1e-12, seed=0)
    res = run(pauli_decompose(m), cfg)
    np.testing.assert_allclose(res.m_values, [2.0, 1.0], atol=1e-5)


def test_complex_gradient_includes_phase_slot(rng):
    m = random_matrix(rng, 4, complex_=True)
    cfg = VqsvdConfig(rank=2, ansatz=AnsatzSpec("a", 2, "complex"))
    p = VqsvdProblem(pauli_decompose(m), cfg)
    a = rng.uniform(0, 6, p.u_circuit.param_count)
    b = rng.uniform(0, 6, p.v_circuit.param_count)
    ga, gb = p.gradient(a, b)
    fa, fb = _fd(p, a, b)
    np.testing.assert_allclose(ga, fa, atol=1e-6)
    np.testing.assert_allclose(gb, fb, atol=1e-6)
    assert gb[-1] != 0.0
