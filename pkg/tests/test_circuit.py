import numpy as np
import pytest
from scipy.linalg import expm

from vqsvd.circuit import (
    EQUAL_BUDGET_BLOCKS,
    AnsatzSpec,
    Gate,
    ParamCircuit,
    ansatz_candidate,
    ansatz_hardware_efficient,
    apply_circuit,
    apply_circuit_adjoint,
    basis_state,
    realize_unitary,
)

Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0])


def _one(kind, n=1, q=0):
    return ParamCircuit(n, (Gate(kind, (q,), slot=0),), 1)


def test_empty_circuit_is_identity(rng):
    c = ParamCircuit(2, (), 0)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    np.testing.assert_array_equal(apply_circuit(c, [], psi), psi)
    np.testing.assert_array_equal(realize_unitary(c, []), np.eye(4))


def test_ry_pi_flips_zero():
    out = apply_circuit(_one("RY"), [np.pi], basis_state(1, 0))
    np.testing.assert_allclose(out, [0, 1], atol=1e-15)


def test_cnot_control_is_qubit_zero():
    c = ParamCircuit(2, (Gate("CNOT", (0, 1)),), 0)
    np.testing.assert_array_equal(apply_circuit(c, [], basis_state(2, 2)), basis_state(2, 3))
    np.testing.assert_array_equal(apply_circuit(c, [], basis_state(2, 1)), basis_state(2, 1))


def test_cnot_reverse_direction():
    c = ParamCircuit(3, (Gate("CNOT", (2, 0)),), 0)
    # |001> has qubit 2 set, so qubit 0 flips: |101>
    np.testing.assert_array_equal(apply_circuit(c, [], basis_state(3, 1)), basis_state(3, 5))


@pytest.mark.parametrize("theta", [0.0, 0.3, 2.0, -1.1])
def test_ry_closed_form(theta):
    u = realize_unitary(_one("RY"), [theta])
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    np.testing.assert_allclose(u, [[c, -s], [s, c]], atol=1e-15)
    np.testing.assert_allclose(u, expm(-0.5j * theta * Y), atol=1e-14)


def test_rz_additive():
    c = ParamCircuit(1, (Gate("RZ", (0,), slot=0), Gate("RZ", (0,), slot=1)), 2)
    np.testing.assert_allclose(
        realize_unitary(c, [0.4, 1.3]), expm(-0.5j * 1.7 * Z), atol=1e-12
    )


def test_rotation_on_middle_qubit_matches_kron():
    u = realize_unitary(_one("RY", n=3, q=1), [0.7])
    ref = np.kron(np.kron(np.eye(2), expm(-0.35j * Y)), np.eye(2))
    np.testing.assert_allclose(u, ref, atol=1e-14)


@pytest.mark.parametrize("mode", ["real", "complex"])
def test_adjoint_inverts(rng, mode):
    c = ansatz_hardware_efficient(3, 4, mode)
    theta = rng.uniform(0, 2 * np.pi, c.param_count)
    u = realize_unitary(c, theta)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-12)
    np.testing.assert_allclose(apply_circuit_adjoint(c, theta, u), np.eye(8), atol=1e-12)


def test_real_mode_is_real_orthogonal(rng):
    c = ansatz_hardware_efficient(3, 3, "real")
    u = realize_unitary(c, rng.uniform(0, 6, c.param_count))
    assert np.max(np.abs(u.imag)) == 0.0


def test_parameter_counts():
    assert ansatz_hardware_efficient(3, 8).param_count == 24
    assert ansatz_hardware_efficient(3, 20).param_count == 60
    small = ansatz_hardware_efficient(2, 1)
    assert [str(g).split()[0] for g in small.gates] == ["RY", "RY", "CNOT"]
    assert (small.gates[2].qubits) == (0, 1)


@pytest.mark.parametrize("which", "abcd")
def test_equal_budget(which):
    blocks = EQUAL_BUDGET_BLOCKS[which]
    assert ansatz_candidate(which, 3, blocks, "real").param_count == 24
    assert ansatz_candidate(which, 3, blocks, "complex").param_count == 72


def test_candidate_structures():
    c = ansatz_candidate("c", 3, 1)
    cnots = [g.qubits for g in c.gates if g.kind == "CNOT"]
    assert cnots == [(0, 1), (1, 2), (2, 0)]
    d = ansatz_candidate("d", 3, 1)
    assert sum(g.kind == "CNOT" for g in d.gates) == 4
    assert d.param_count == 6


def test_spec_build_and_errors():
    assert AnsatzSpec("a", 2).build(2).param_count == 4
    assert AnsatzSpec("a", 3).build(1).param_count == 3  # single qubit falls back to layers
    with pytest.raises(ValueError):
        ansatz_candidate("e", 3, 1)
    with pytest.raises(ValueError):
        ansatz_hardware_efficient(1, 2)
    with pytest.raises(ValueError, match="mode"):
        ansatz_hardware_efficient(2, 1, "imaginary")
    with pytest.raises(ValueError, match="parameters"):
        apply_circuit(ansatz_hardware_efficient(2, 1), [0.0], basis_state(2, 0))


def test_circuit_validation():
    with pytest.raises(ValueError, match="slot"):
        ParamCircuit(1, (Gate("RY", (0,), slot=1),), 1)
    with pytest.raises(ValueError, match="outside"):
        ParamCircuit(1, (Gate("CNOT", (0, 1)),), 0)


def test_complex_spec_appends_global_phase(rng):
    real = AnsatzSpec("a", 2, "real").build(2)
    cplx = AnsatzSpec("a", 2, "complex").build(2)
    assert cplx.param_count == 3 * real.param_count + 1
    assert cplx.gates[-1].kind == "PHASE"
    theta = rng.uniform(0, 6, cplx.param_count)
    u = realize_unitary(cplx, theta)
    base = realize_unitary(ansatz_candidate("a", 2, 2, "complex"), theta[:-1])
    np.testing.assert_allclose(u, np.exp(-0.5j * theta[-1]) * base, atol=1e-14)
    # the phase is what lets det U leave {+1, -1}
    assert abs(abs(np.linalg.det(u)) - 1) < 1e-12
    np.testing.assert_allclose(np.linalg.det(u), np.exp(-2j * theta[-1]) * np.linalg.det(base),
                               atol=1e-12)
