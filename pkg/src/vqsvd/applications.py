"""Drivers built on the solver: image compression, recommendation, polar factors
and the equal-budget ansatz comparison."""

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from ._validation import as_generator, check_matrix, check_square, n_qubits_for, pad_to_power_of_two
from .circuit import EQUAL_BUDGET_BLOCKS, AnsatzSpec, ansatz_candidate
from .linalg import classical_svd, frobenius_norm, reconstruct_rank_t
from .estimator import EstimatorConfig
from .pauli import LcuDecomposition, lcu_reconstruct, pauli_decompose
from .solver import VqsvdConfig, extract_vectors, fold_signs, run


def _solve(lcu, config, callback=None):
    """Run the solver and return ``(result, values, lefts, rights)`` with signs folded."""
    result = run(lcu, config, callback=callback)
    lefts, rights = extract_vectors(result)
    values, lefts, rights = fold_signs(result.m_values, lefts, rights)
    return result, values, lefts, rights


def _mode_for(matrix, mode):
    if mode == "auto":
        return "complex" if np.iscomplexobj(matrix) else "real"
    return mode


# ---------------------------------------------------------------------------
# image compression


@dataclass
class CompressionReport:
    rank: int
    depth: int
    distance: float
    classical_distance: float
    iterations: int
    seed: object
    converged: bool
    clamped_distance: float
    side: int
    learned_values: np.ndarray = field(repr=False, default=None)

    @property
    def bookkeeping_ratio(self):
        """``T / (2 side)``; 7.81% at T=5 on a 32-pixel side."""
        return self.rank / (2.0 * self.side)

    @property
    def storage_ratio(self):
        """Numbers kept by a rank-T factorisation over the pixel count."""
        return self.rank * (2.0 * self.side + 1.0) / self.side**2

    @property
    def distance_ratio(self):
        if self.classical_distance == 0.0:
            return 1.0 if self.distance < 1e-12 else np.inf
        return self.distance / self.classical_distance

    def to_dict(self):
        return {
            "rank": self.rank,
            "depth": self.depth,
            "side": self.side,
            "seed": self.seed,
            "iterations": self.iterations,
            "converged": self.converged,
            "distance": self.distance,
            "clamped_distance": self.clamped_distance,
            "classical_distance": self.classical_distance,
            "distance_ratio": float(self.distance_ratio),
            "bookkeeping_ratio": self.bookkeeping_ratio,
            "storage_ratio": self.storage_ratio,
        }

    def to_text(self):
        return "".join(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n"
                       for k, v in self.to_dict().items())


def compress_image(image, rank=5, depth=20, *, mode="real", max_iterations=200,
                   tolerance=1e-6, learning_rate=0.05, seed=None, ansatz="a",
                   estimator=None, callback=None):
    """Rank-``rank`` compression of a square power-of-two greyscale image.

    ``image`` holds values in ``[0, 1]``.  Returns ``(report, reconstruction)``
    where the reconstruction is clamped to ``[0, 1]``.  ``report.distance`` is
    measured before clamping, so it can never beat the classical truncation.
    """
    img = check_square(check_matrix(image, "image"), "image")
    if np.iscomplexobj(img):
        raise ValueError("image must be real")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("image values must lie in [0, 1]")
    n_qubits_for(img.shape[0], "image side")
    config = VqsvdConfig(
        rank=rank,
        ansatz=AnsatzSpec(ansatz, depth, mode),
        max_iterations=max_iterations,
        tolerance=tolerance,
        learning_rate=learning_rate,
        seed=seed,
        estimator=estimator or EstimatorConfig(),
    )
    result, values, lefts, rights = _solve(pauli_decompose(img), config, callback)
    approx = reconstruct_rank_t(values, lefts, rights, rank)
    distance = frobenius_norm(approx - img)
    clamped = np.clip(approx.real, 0.0, 1.0)
    svd = classical_svd(img)
    floor = frobenius_norm(
        reconstruct_rank_t(svd.singular_values, svd.left_vectors, svd.right_vectors, rank) - img
    )
    report = CompressionReport(
        rank=rank,
        depth=depth,
        distance=distance,
        classical_distance=floor,
        iterations=result.iterations,
        seed=seed,
        converged=result.converged,
        clamped_distance=frobenius_norm(clamped - img),
        side=img.shape[0],
        learned_values=values,
    )
    return report, clamped


# ---------------------------------------------------------------------------
# recommendation


class DegenerateProjectionError(ValueError):
    """The customer row is (numerically) orthogonal to the learned subspace."""


@dataclass
class RecommendationOutput:
    xi: np.ndarray
    norm: float
    probabilities: np.ndarray
    projected: np.ndarray
    samples: np.ndarray = None
    padding_mass: float = 0.0

    def to_dict(self):
        def num(z):
            return [float(z.real), float(z.imag)] if np.iscomplexobj(z) else float(z)

        return {
            "xi": [num(x) for x in self.xi],
            "norm": self.norm,
            "probabilities": [float(p) for p in self.probabilities],
            "padding_mass": self.padding_mass,
            "samples": None if self.samples is None else [int(s) for s in self.samples],
        }


def project_row(a_matrix, rights, row, samples=0, seed=None):
    """Project customer ``row`` of ``a_matrix`` onto the span of ``rights``.

    ``rights`` holds orthonormal item-space vectors as columns (possibly of a
    zero-padded size; the row is padded to match).  Probabilities are reported
    over the real items only and renormalised; the mass that leaked onto
    padding items is kept in ``padding_mass``.
    """
    a = check_matrix(a_matrix, "a_matrix")
    rights = np.asarray(rights)
    if not 0 <= row < a.shape[0]:
        raise IndexError(f"row {row} out of range for {a.shape[0]} customers")
    b = a[row]
    nb = np.linalg.norm(b)
    if nb == 0.0:
        raise ValueError(f"row {row} is zero; nothing to recommend from")
    items = a.shape[1]
    if rights.shape[0] < items:
        raise ValueError("right vectors are shorter than the item count")
    b = np.concatenate([b / nb, np.zeros(rights.shape[0] - items)])
    xi = rights.conj().T @ b
    g = float(np.sqrt(np.sum(np.abs(xi) ** 2)))
    if g < 1e-12:
        raise DegenerateProjectionError(
            f"row {row} is orthogonal to the learned subspace (G={g:.3g})"
        )
    projected = rights @ xi / g
    full = np.abs(projected) ** 2
    kept = full[:items]
    padding_mass = float(max(0.0, 1.0 - kept.sum()))
    probs = kept / kept.sum()
    drawn = None
    if samples:
        drawn = as_generator(seed).choice(items, size=int(samples), p=probs)
    if not np.any(xi.imag) and not np.any(projected.imag):
        xi = xi.real
        projected = projected.real
    return RecommendationOutput(xi, g, probs, projected[:items], drawn, padding_mass)


def recommend(a_matrix, rank, row, *, samples=0, depth=20, mode="auto", max_iterations=200,
              tolerance=1e-6, learning_rate=0.05, seed=None, ansatz="a",
              estimator=None, callback=None):
    """Train a rank-``rank`` VQSVD on the preference matrix, then :func:`project_row`."""
    a = check_matrix(a_matrix, "a_matrix")
    padded = pad_to_power_of_two(a)
    config = VqsvdConfig(
        rank=rank,
        ansatz=AnsatzSpec(ansatz, depth, _mode_for(a, mode)),
        max_iterations=max_iterations,
        tolerance=tolerance,
        learning_rate=learning_rate,
        seed=seed,
        estimator=estimator or EstimatorConfig(),
    )
    result, _, _, rights = _solve(pauli_decompose(padded), config, callback)
    out = project_row(a, rights, row, samples, seed)
    return out, result


# ---------------------------------------------------------------------------
# polar decomposition


@dataclass
class PolarResult:
    w: np.ndarray
    p: np.ndarray
    unitarity_residual: float
    min_eigenvalue: float
    product_residual: float
    relative_product_residual: float
    converged: bool = True
    iterations: int = 0

    def to_dict(self):
        return {
            "unitarity_residual": self.unitarity_residual,
            "min_eigenvalue": self.min_eigenvalue,
            "product_residual": self.product_residual,
            "relative_product_residual": self.relative_product_residual,
            "converged": self.converged,
            "iterations": self.iterations,
        }


def polar_from_factors(values, lefts, rights, matrix=None):
    """``W = U V^dagger`` and ``P = V D V^dagger`` from a full set of singular triples."""
    u = np.asarray(lefts)
    v = np.asarray(rights)
    d = np.asarray(values, dtype=float)
    dim = u.shape[0]
    if u.shape != (dim, dim) or v.shape != (dim, dim) or d.size != dim:
        raise ValueError("polar factors need a full set of singular triples")
    w = u @ v.conj().T
    p = (v * d) @ v.conj().T
    p = 0.5 * (p + p.conj().T)
    if matrix is None:
        matrix = (u * d) @ v.conj().T
    norm = frobenius_norm(matrix)
    resid = frobenius_norm(w @ p - matrix)
    return PolarResult(
        w=w,
        p=p,
        unitarity_residual=frobenius_norm(w.conj().T @ w - np.eye(dim)),
        min_eigenvalue=float(np.linalg.eigvalsh(p)[0]),
        product_residual=resid,
        relative_product_residual=resid / norm if norm else resid,
    )


def polar_via_vqsvd(matrix, *, rank=None, depth=20, mode="auto", max_iterations=1000,
                    tolerance=1e-14, learning_rate=0.05, refine_iterations=300,
                    seed=None, ansatz="a", estimator=None, callback=None):
    """Right polar decomposition ``M = W P`` from full-rank VQSVD factors.

    ``matrix`` may be a dense square power-of-two matrix or an
    :class:`LcuDecomposition`.  After the main run a second pass at a tenth of
    the learning rate tightens the factors (skip with ``refine_iterations=0``).
    ``converged`` reports the stopping test of the last stage that ran;
    ``iterations`` counts both stages.
    """
    if isinstance(matrix, LcuDecomposition):
        lcu = matrix
        dense = lcu_reconstruct(lcu)
    else:
        dense = check_square(check_matrix(matrix, "matrix"))
        n_qubits_for(dense.shape[0])
        lcu = pauli_decompose(dense)
    dim = dense.shape[0]
    rank = dim if rank is None else rank
    if rank < dim:
        raise ValueError(f"polar decomposition needs all {dim} singular triples, got rank {rank}")
    config = VqsvdConfig(
        rank=rank,
        ansatz=AnsatzSpec(ansatz, depth, _mode_for(dense, mode)),
        max_iterations=max_iterations,
        tolerance=tolerance,
        learning_rate=learning_rate,
        seed=seed,
        estimator=estimator or EstimatorConfig(),
    )
    result = run(lcu, config, callback=callback)
    iterations = result.iterations
    if refine_iterations:
        def shifted(it, value, m):
            callback(iterations + it, value, m)

        fine = replace(config, learning_rate=learning_rate / 10.0, max_iterations=refine_iterations)
        result = run(lcu, fine, init=(result.alpha, result.beta),
                     callback=shifted if callback else None)
        iterations += result.iterations
    lefts, rights = extract_vectors(result)
    values, lefts, rights = fold_signs(result.m_values, lefts, rights)
    out = polar_from_factors(values, lefts, rights, dense)
    out.converged = result.converged
    out.iterations = iterations
    return out


# ---------------------------------------------------------------------------
# ansatz benchmark

BENCH_FIELDS = (
    "candidate", "blocks", "params_per_circuit", "params_total",
    "distance", "floor", "iterations",
)


def benchmark_ansatz(matrix, candidates="abcd", mode="real", seed=0, iterations=200,
                     learning_rate=0.05, estimator=None):
    """Equal-budget comparison of the four 3-qubit candidates at full rank.

    Every candidate trains from the same seed for exactly ``iterations``
    steps with ``T = 8`` and weights ``(8, ..., 1)``; the table records the
    reconstruction distance ``||M_re - M||_F`` and the classical floor (0 at
    full rank).
    """
    m = check_square(check_matrix(matrix, "matrix"))
    if m.shape[0] != 8:
        raise ValueError("the equal-budget protocol uses 3-qubit (8x8) matrices")
    lcu = pauli_decompose(m)
    rows = []
    for which in candidates:
        if which not in EQUAL_BUDGET_BLOCKS:
            raise ValueError(f"unknown ansatz candidate {which!r}")
        blocks = EQUAL_BUDGET_BLOCKS[which]
        circuit = ansatz_candidate(which, 3, blocks, mode)
        config = VqsvdConfig(
            rank=8,
            ansatz=circuit,
            max_iterations=iterations,
            tolerance=0.0,
            learning_rate=learning_rate,
            seed=seed,
            estimator=estimator or EstimatorConfig(),
        )
        result, values, lefts, rights = _solve(lcu, config)
        dist = frobenius_norm(reconstruct_rank_t(values, lefts, rights, 8) - m)
        rows.append({
            "candidate": which,
            "blocks": blocks,
            "params_per_circuit": circuit.param_count,
            "params_total": 2 * circuit.param_count,
            "distance": dist,
            "floor": 0.0,
            "iterations": result.iterations,
        })
    return rows


def bench_table_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (format(v, ".17g") if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()
