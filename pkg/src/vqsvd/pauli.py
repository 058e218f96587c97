"""Linear combinations of unitaries: Pauli and cyclic-shift decompositions.

A matrix is represented as ``M = sum_k c_k A_k`` where each ``A_k`` is a Pauli
string (``"XZI"``), a cyclic shift ``P_k`` or an explicit unitary array.
Importance sampling draws term ``k`` with probability ``|c_k| / ||c||_1``.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_generator, check_square, n_qubits_for

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

#: coefficients with modulus below this are dropped by :func:`pauli_decompose`
PRUNE_TOL = 1e-14


@dataclass(frozen=True)
class PauliString:
    label: str

    def __post_init__(self):
        if not self.label or set(self.label) - set("IXYZ"):
            raise ValueError(f"invalid Pauli label {self.label!r}")

    @property
    def n_qubits(self):
        return len(self.label)

    def matrix(self):
        out = np.ones((1, 1), dtype=complex)
        for ch in self.label:
            out = np.kron(out, PAULI_MATRICES[ch])
        return out

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class CyclicShift:
    """``P_k`` sending basis vector ``e_i`` to ``e_{(i + k) mod dim}``."""

    k: int
    dim: int

    def matrix(self):
        return np.roll(np.eye(self.dim, dtype=complex), self.k % self.dim, axis=0)

    def __str__(self):
        return f"PERM {self.k}"


def term_matrix(unitary):
    if isinstance(unitary, (PauliString, CyclicShift)):
        return unitary.matrix()
    return np.asarray(unitary, dtype=complex)


def _term_dim(unitary):
    if isinstance(unitary, PauliString):
        return 2**unitary.n_qubits
    if isinstance(unitary, CyclicShift):
        return unitary.dim
    return np.asarray(unitary).shape[0]


@dataclass
class LcuDecomposition:
    """Terms ``(coefficient, unitary)`` of ``M = sum_k c_k A_k``.

    ``l1_norm`` is computed from the coefficients on construction.
    """

    terms: list
    dim: int
    l1_norm: float = field(init=False)

    def __post_init__(self):
        self.terms = [(complex(c), u) for c, u in self.terms]
        for _, u in self.terms:
            if _term_dim(u) != self.dim:
                raise ValueError(
                    f"term of dimension {_term_dim(u)} in a {self.dim}-dimensional LCU"
                )
        self.l1_norm = float(sum(abs(c) for c, _ in self.terms))

    @property
    def n_qubits(self):
        return n_qubits_for(self.dim)

    @property
    def coefficients(self):
        return np.array([c for c, _ in self.terms], dtype=complex)

    def __len__(self):
        return len(self.terms)

    def matrices(self):
        return [term_matrix(u) for _, u in self.terms]

    def phased_matrices(self):
        """Term unitaries with the coefficient phase absorbed, ``(c_k/|c_k|) A_k``."""
        out = []
        for c, u in self.terms:
            ph = c / abs(c) if c != 0 else 1.0
            out.append(ph * term_matrix(u))
        return out


def pauli_labels(n_qubits):
    """All ``4**n`` labels, lexicographic in ``IXYZ`` with qubit 0 leftmost."""
    return ["".join(p) for p in itertools.product("IXYZ", repeat=n_qubits)]


def pauli_decompose(m):
    """Coefficients ``c_P = Tr(P M) / 2**n`` over all Pauli strings ``P``."""
    arr = check_square(m)
    n = n_qubits_for(arr.shape[0], "matrix dimension")
    dim = arr.shape[0]
    if n == 0:
        return LcuDecomposition([], dim) if abs(arr[0, 0]) < PRUNE_TOL else (
            LcuDecomposition([(arr[0, 0], np.eye(1))], dim)
        )
    terms = []
    for label in pauli_labels(n):
        p = PauliString(label)
        # Tr(P M) without forming P M
        c = np.sum(p.matrix().T * arr) / dim
        if abs(c) >= PRUNE_TOL:
            terms.append((c, p))
    return LcuDecomposition(terms, dim)


def lcu_reconstruct(lcu):
    out = np.zeros((lcu.dim, lcu.dim), dtype=complex)
    for c, u in lcu.terms:
        out += c * term_matrix(u)
    return out


def circulant_decompose(c):
    """Circulant matrix with first row ``c`` as ``sum_k c_k P_k``."""
    c = np.asarray(c)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("circulant coefficients must be a non-empty 1-D vector")
    if not np.all(np.isfinite(c)):
        raise ValueError("circulant coefficients must be finite")
    d = c.size
    # row i of sum_k c_k P_k holds c_k at column (i - k) mod d; the first row
    # (c_0, c_1, ..., c_{d-1}) therefore needs weight c_k on P_{(d - k) mod d}
    terms = [(c[k], CyclicShift((d - k) % d, d)) for k in range(d)]
    return LcuDecomposition(terms, d)


def circulant_matrix(c):
    """Dense circulant matrix whose rows are successive right shifts of ``c``."""
    c = np.asarray(c)
    return np.array([np.roll(c, i) for i in range(c.size)])


def importance_sample_terms(lcu, count, seed=None):
    """Draw ``count`` term indices i.i.d. with probability ``|c_k| / ||c||_1``."""
    if count < 0:
        raise ValueError("count must be non-negative")
    weights = np.abs(lcu.coefficients)
    total = weights.sum()
    if total <= 0:
        raise ValueError("cannot sample from an LCU whose coefficients are all zero")
    if count == 0:
        return np.zeros(0, dtype=int)
    rng = as_generator(seed)
    return rng.choice(len(weights), size=count, p=weights / total)


def sample_count(l1, epsilon, delta):
    """Hoeffding sample size ``ceil(2 l1^2 ln(2/delta) / epsilon^2)``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if l1 < 0:
        raise ValueError("l1 must be non-negative")
    if l1 == 0:
        return 0
    return int(math.ceil(2.0 * l1 * l1 * math.log(2.0 / delta) / epsilon**2))
