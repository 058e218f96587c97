"""Estimators for ``Re <psi_j| U^dagger M V |psi_j>``.

Three backends share one interface:

``exact``
    dense inner products (the infinite-shot limit);
``shots``
    per-term Hadamard tests with ``shots_per_term`` binary outcomes each;
``sampled``
    ``term_samples`` LCU terms drawn with probability ``|c_k| / ||c||_1``,
    each contributing ``||c||_1 * Re(phase(c_k) <u|A_k|v>)``.

The controlled unitary of a Hadamard test is never built: the probability of
reading 0 on the ancilla follows from the overlap ``<psi|W|psi>`` and the
outcomes are drawn from it.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import as_generator
from .circuit import apply_circuit, basis_state
from .pauli import importance_sample_terms

MODES = ("exact", "shots", "sampled")


@dataclass(frozen=True)
class EstimatorConfig:
    mode: str = "exact"
    shots_per_term: int = 0
    term_samples: int = 0
    seed: object = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"estimator mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "shots" and self.shots_per_term < 1:
            raise ValueError("shots mode needs shots_per_term >= 1")
        if self.mode == "sampled" and self.term_samples < 1:
            raise ValueError("sampled mode needs term_samples >= 1")
        if self.shots_per_term < 0 or self.term_samples < 0:
            raise ValueError("shot and sample counts must be non-negative")

    def to_dict(self):
        seed = self.seed if isinstance(self.seed, (int, type(None))) else repr(self.seed)
        return {
            "mode": self.mode,
            "shots_per_term": self.shots_per_term,
            "term_samples": self.term_samples,
            "seed": seed,
        }


def exact_re_im(psi, w_applied):
    """Real and imaginary parts of ``<psi|w_applied>``."""
    psi = np.asarray(psi)
    w_applied = np.asarray(w_applied)
    if psi.shape != w_applied.shape:
        raise ValueError(f"dimension mismatch: {psi.shape} vs {w_applied.shape}")
    z = np.vdot(psi, w_applied)
    return float(z.real), float(z.imag)


def _bernoulli_mean(p0, shots, rng):
    """Mean of ``shots`` outcomes worth +1 (prob ``p0``) or -1."""
    p0 = min(max(p0, 0.0), 1.0)
    zeros = rng.binomial(shots, p0)
    return (2.0 * zeros - shots) / shots


def sample_re(overlap, shots, rng):
    # ancilla |+>, controlled-W, H: P(0) = (1 + Re<psi|W|psi>) / 2
    return _bernoulli_mean(0.5 * (1.0 + overlap.real), shots, rng)


def sample_im(overlap, shots, rng):
    # ancilla (|0> + i|1>)/sqrt(2), controlled-W, H: P(0) = (1 - Im<psi|W|psi>) / 2,
    # so the +1 label goes to outcome 1 to estimate +Im
    return -_bernoulli_mean(0.5 * (1.0 - overlap.imag), shots, rng)


def _overlap(psi, w):
    psi = np.asarray(psi, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if w.shape != (psi.size, psi.size):
        raise ValueError(f"unitary of shape {w.shape} for a state of length {psi.size}")
    return np.vdot(psi, w @ psi)


def _check_shots(shots):
    if shots < 1:
        raise ValueError("shots must be >= 1")


def hadamard_test_re(psi, w, shots, seed=None):
    """Shot estimate of ``Re <psi|W|psi>`` from a simulated Hadamard test."""
    _check_shots(shots)
    return sample_re(_overlap(psi, w), shots, as_generator(seed))


def hadamard_test_im(psi, w, shots, seed=None):
    """Shot estimate of ``Im <psi|W|psi>`` (phase-shifted ancilla)."""
    _check_shots(shots)
    return sample_im(_overlap(psi, w), shots, as_generator(seed))


# ---------------------------------------------------------------------------
# matrix elements


def term_overlaps(lcu, u_cols, v_cols):
    """``<u_j| A_k |v_j>`` for every term ``k`` and column ``j``; shape ``(K, T)``."""
    mats = lcu.matrices()
    out = np.empty((len(mats), u_cols.shape[1]), dtype=complex)
    for k, a in enumerate(mats):
        out[k] = np.einsum("ij,ij->j", u_cols.conj(), a @ v_cols)
    return out


def combine_overlaps(lcu, overlaps, config, rng):
    """Turn per-term overlaps into estimates of ``Re <u_j|M|v_j>`` per column."""
    coeffs = lcu.coefficients
    if config.mode == "exact":
        return (coeffs[:, None] * overlaps).sum(axis=0).real
    if config.mode == "shots":
        n_terms, n_cols = overlaps.shape
        out = np.zeros(n_cols)
        # fixed (column, term) order keeps results reproducible for a seed
        for j in range(n_cols):
            for k in range(n_terms):
                c = coeffs[k]
                re = sample_re(overlaps[k, j], config.shots_per_term, rng)
                val = c.real * re
                if c.imag != 0.0:
                    im = sample_im(overlaps[k, j], config.shots_per_term, rng)
                    val -= c.imag * im
                out[j] += val
        return out
    # sampled terms
    l1 = lcu.l1_norm
    phases = np.array([c / abs(c) if c != 0 else 1.0 for c in coeffs])
    n_cols = overlaps.shape[1]
    out = np.zeros(n_cols)
    for j in range(n_cols):
        idx = importance_sample_terms(lcu, config.term_samples, rng)
        phased = phases[idx] * overlaps[idx, j]
        if config.shots_per_term > 0:
            vals = np.array([sample_re(z, config.shots_per_term, rng) for z in phased])
        else:
            vals = phased.real
        out[j] = l1 * vals.mean()
    return out


def sampled_term_values(lcu, u_vec, v_vec, count, seed=None):
    """Individual importance-sampled values ``||c||_1 Re(phase(c_k) <u|A_k|v>)``.

    Their mean is an unbiased estimate of ``Re <u|M|v>`` and each value lies in
    ``[-||c||_1, ||c||_1]``.
    """
    rng = as_generator(seed)
    idx = importance_sample_terms(lcu, count, rng)
    mats = lcu.phased_matrices()
    overlaps = np.array([np.vdot(u_vec, mats[k] @ v_vec) for k in range(len(mats))])
    return lcu.l1_norm * overlaps[idx].real


def matrix_element(lcu, u_circuit, u_params, v_circuit, v_params, j, config=None, seed=None):
    """Estimate ``m_j = Re <psi_j| U^dagger M V |psi_j>`` for basis state ``j``.

    ``seed`` (or ``config.seed``) drives the shot and sampling randomness.
    """
    config = config or EstimatorConfig()
    if len(lcu) == 0:
        raise ValueError("the LCU has no terms")
    n = u_circuit.n_qubits
    if v_circuit.n_qubits != n or lcu.dim != 2**n:
        raise ValueError("circuit and LCU dimensions disagree")
    if not 0 <= j < lcu.dim:
        raise ValueError(f"basis index {j} out of range for dimension {lcu.dim}")
    psi = basis_state(n, j)
    u = apply_circuit(u_circuit, u_params, psi)[:, None]
    v = apply_circuit(v_circuit, v_params, psi)[:, None]
    rng = as_generator(config.seed if seed is None else seed)
    return float(combine_overlaps(lcu, term_overlaps(lcu, u, v), config, rng)[0])
