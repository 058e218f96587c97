"""Dense statevector simulation of parameterised circuits and the ansatz families.

Qubit 0 is the most significant bit of a basis index.  States are 1-D arrays
of length ``2**n`` or 2-D arrays whose columns are states (a batch).  Rotations
follow ``R_P(theta) = exp(-i theta P / 2)``.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_int

_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
GENERATORS = {"RY": _Y, "RZ": _Z}


def ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta):
    return np.array(
        [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex
    )


def gphase(theta):
    """``exp(-i theta I / 2)`` as a scalar."""
    return np.exp(-0.5j * theta)


_ROTATIONS = {"RY": ry, "RZ": rz}
_PARAMETRIC = ("RY", "RZ", "PHASE")


@dataclass(frozen=True)
class Gate:
    """One circuit instruction.

    ``kind`` is ``"RY"``, ``"RZ"``, ``"PHASE"``, ``"CNOT"`` or ``"FIXED"``.
    Rotations act on ``qubits[0]`` with angle ``params[slot]``; ``PHASE`` is
    the global rotation ``exp(-i theta I / 2)`` and takes ``qubits=()``;
    ``CNOT`` has ``qubits=(control, target)``; ``FIXED`` applies ``matrix`` to
    ``qubits`` (single-qubit only).
    """

    kind: str
    qubits: tuple
    slot: int = None
    matrix: np.ndarray = None

    def __str__(self):
        if self.kind in _ROTATIONS:
            return f"{self.kind} {self.qubits[0]} {self.slot}"
        if self.kind == "PHASE":
            return f"PHASE {self.slot}"
        if self.kind == "CNOT":
            return f"CNOT {self.qubits[0]} {self.qubits[1]}"
        return f"FIXED {' '.join(map(str, self.qubits))}"


@dataclass(frozen=True)
class ParamCircuit:
    n_qubits: int
    gates: tuple
    param_count: int

    def __post_init__(self):
        slots = [g.slot for g in self.gates if g.kind in _PARAMETRIC]
        if sorted(slots) != list(range(self.param_count)):
            raise ValueError("every parameter slot must be used by exactly one gate")
        for g in self.gates:
            if any(not 0 <= q < self.n_qubits for q in g.qubits):
                raise ValueError(f"gate {g} addresses a qubit outside 0..{self.n_qubits - 1}")
            if g.kind == "CNOT" and g.qubits[0] == g.qubits[1]:
                raise ValueError("CNOT control and target must differ")
            if g.kind == "FIXED" and len(g.qubits) != 1:
                raise ValueError("FIXED gates act on a single qubit")

    @property
    def dim(self):
        return 2**self.n_qubits

    def describe(self):
        """Debug listing, one gate per line."""
        return "\n".join(str(g) for g in self.gates)


class CircuitBuilder:
    """Accumulates gates and hands out parameter slots in insertion order."""

    def __init__(self, n_qubits):
        self.n_qubits = n_qubits
        self.gates = []
        self.n_params = 0

    def rotation(self, kind, q):
        self.gates.append(Gate(kind, (q,), slot=self.n_params))
        self.n_params += 1

    def single(self, q, mode):
        # complex mode: Rz Ry Rz as a matrix product, so Rz is applied first
        if mode == "real":
            self.rotation("RY", q)
        else:
            self.rotation("RZ", q)
            self.rotation("RY", q)
            self.rotation("RZ", q)

    def cnot(self, control, target):
        self.gates.append(Gate("CNOT", (control, target)))

    def build(self):
        return ParamCircuit(self.n_qubits, tuple(self.gates), self.n_params)


# ---------------------------------------------------------------------------
# kernels


def _apply_1q(state, mat, q, n):
    # view index as (high bits, qubit q, low bits + batch)
    s = state.reshape(2**q, 2, -1)
    return np.matmul(mat, s).reshape(state.shape)


def _apply_cnot(state, control, target, n):
    s = state.reshape((2,) * n + (-1,))
    out = s.copy()
    sel = [slice(None)] * (n + 1)
    sel[control] = 1
    sel = tuple(sel)
    axis = target if target < control else target - 1
    out[sel] = np.flip(s[sel], axis=axis)
    return out.reshape(state.shape)


def apply_gate(state, gate, params, n, adjoint=False):
    if gate.kind in _ROTATIONS:
        theta = params[gate.slot]
        mat = _ROTATIONS[gate.kind](-theta if adjoint else theta)
        return _apply_1q(state, mat, gate.qubits[0], n)
    if gate.kind == "PHASE":
        theta = params[gate.slot]
        return gphase(-theta if adjoint else theta) * state
    if gate.kind == "CNOT":
        return _apply_cnot(state, gate.qubits[0], gate.qubits[1], n)
    mat = np.asarray(gate.matrix, dtype=complex)
    if adjoint:
        mat = mat.conj().T
    return _apply_1q(state, mat, gate.qubits[0], n)


def apply_generator(state, gate, n):
    """Apply the Pauli generator of a rotation gate."""
    if gate.kind == "PHASE":
        return state
    return _apply_1q(state, GENERATORS[gate.kind], gate.qubits[0], n)


def _check_params(circuit, params):
    params = np.asarray(params, dtype=float)
    if params.shape != (circuit.param_count,):
        raise ValueError(
            f"expected {circuit.param_count} parameters, got shape {params.shape}"
        )
    return params


def apply_circuit(circuit, params, state):
    """Run ``circuit`` on ``state`` (a vector or a batch of column vectors)."""
    params = _check_params(circuit, params)
    state = np.asarray(state, dtype=complex)
    if state.shape[0] != circuit.dim:
        raise ValueError(
            f"state of dimension {state.shape[0]} for a {circuit.n_qubits}-qubit circuit"
        )
    out = state.copy()
    for g in circuit.gates:
        out = apply_gate(out, g, params, circuit.n_qubits)
    return out


def apply_circuit_adjoint(circuit, params, state):
    params = _check_params(circuit, params)
    out = np.asarray(state, dtype=complex).copy()
    for g in reversed(circuit.gates):
        out = apply_gate(out, g, params, circuit.n_qubits, adjoint=True)
    return out


def realize_unitary(circuit, params):
    """Dense unitary of the circuit; column ``j`` is the image of ``|j>``."""
    return apply_circuit(circuit, params, np.eye(circuit.dim, dtype=complex))


def basis_state(n_qubits, index):
    psi = np.zeros(2**n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


# ---------------------------------------------------------------------------
# ansatz families


def _check_mode(mode):
    if mode not in ("real", "complex"):
        raise ValueError(f"mode must be 'real' or 'complex', got {mode!r}")


def ansatz_hardware_efficient(n_qubits, depth, mode="real"):
    """``depth`` blocks of a rotation column followed by a nearest-neighbour CNOT chain."""
    if n_qubits < 2:
        raise ValueError("the hardware-efficient ansatz needs at least 2 qubits")
    check_positive_int(depth, "depth")
    _check_mode(mode)
    b = CircuitBuilder(n_qubits)
    for _ in range(depth):
        for q in range(n_qubits):
            b.single(q, mode)
        for q in range(n_qubits - 1):
            b.cnot(q, q + 1)
    return b.build()


def ansatz_rotation_layers(n_qubits, depth, mode="real"):
    """Rotation columns without entanglers; the only option for a single qubit."""
    check_positive_int(n_qubits, "n_qubits")
    check_positive_int(depth, "depth")
    _check_mode(mode)
    b = CircuitBuilder(n_qubits)
    for _ in range(depth):
        for q in range(n_qubits):
            b.single(q, mode)
    return b.build()


def _block_b(b, n, mode):
    # dressed CNOTs on each neighbouring pair
    for q in range(n - 1):
        b.single(q, mode)
        b.single(q + 1, mode)
        b.cnot(q, q + 1)
        b.single(q, mode)
        b.single(q + 1, mode)


def _block_c(b, n, mode):
    for q in range(n):
        b.single(q, mode)
    for q in range(n - 1):
        b.cnot(q, q + 1)
    b.cnot(n - 1, 0)


def _block_d(b, n, mode):
    for q in range(n):
        b.single(q, mode)
    for q in range(n - 1):
        b.cnot(q, q + 1)
    for q in range(n):
        b.single(q, mode)
    for q in range(n - 1):
        b.cnot(n - 1, q)


def ansatz_candidate(which, n_qubits=3, blocks=1, mode="real"):
    """Ansatz families ``a`` to ``d`` compared at equal parameter budget.

    ``a`` is the hardware-efficient block, ``b`` wraps each CNOT in rotations,
    ``c`` closes the CNOT chain into a ring and ``d`` has two rotation columns
    with a chain and a fan-in of CNOTs onto the last qubit's partners.
    """
    if which == "a":
        return ansatz_hardware_efficient(n_qubits, blocks, mode)
    builders = {"b": _block_b, "c": _block_c, "d": _block_d}
    if which not in builders:
        raise ValueError(f"unknown ansatz candidate {which!r}; expected a, b, c or d")
    if n_qubits < 2:
        raise ValueError(f"candidate {which} needs at least 2 qubits")
    check_positive_int(blocks, "blocks")
    _check_mode(mode)
    b = CircuitBuilder(n_qubits)
    for _ in range(blocks):
        builders[which](b, n_qubits, mode)
    return b.build()


#: block counts giving 24 real-mode parameters per 3-qubit circuit
EQUAL_BUDGET_BLOCKS = {"a": 8, "b": 3, "c": 8, "d": 4}


@dataclass(frozen=True)
class AnsatzSpec:
    """Recipe for building an ansatz once the qubit count is known.

    ``kind`` is ``"a"``-``"d"`` (``"a"`` is the hardware-efficient ansatz) or
    ``"layers"`` for entangler-free rotation columns.

    In complex mode one trainable global phase is appended.  Rz, Ry and CNOT
    all have determinant +-1, so without it ``det(U^dagger M V)`` keeps the
    phase of ``det M`` and the diagonal can never be made real and positive.
    """

    kind: str = "a"
    depth: int = 20
    mode: str = "real"

    def build(self, n_qubits):
        if self.kind == "layers" or n_qubits == 1:
            circuit = ansatz_rotation_layers(n_qubits, self.depth, self.mode)
        else:
            circuit = ansatz_candidate(self.kind, n_qubits, self.depth, self.mode)
        if self.mode == "complex":
            gates = circuit.gates + (Gate("PHASE", (), slot=circuit.param_count),)
            circuit = ParamCircuit(n_qubits, gates, circuit.param_count + 1)
        return circuit

    def to_dict(self):
        return {"kind": self.kind, "depth": self.depth, "mode": self.mode}
