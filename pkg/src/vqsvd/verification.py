"""Quality checks for learned singular values and vectors.

Errors of a learned triple ``(m_j, u_j, v_j)``:

* ``epsilon_d = sum_j (d_j - m_j)^2``
* ``epsilon_v = sum_j ||H e_j+ - m_j e_j+||^2 + ||H e_j- + m_j e_j-||^2`` with
  ``H = |0><1| (x) M + |1><0| (x) M^dagger`` and ``e_j+- = (|0>u_j +- |1>v_j)/sqrt 2``.

Both are bounded by ``sum_{j<=T} d_j^2 - sum_j m_j^2`` (the second by twice
that), so the top-``T`` Frobenius mass is all that is needed to certify a
result.  :func:`vqfne_run` estimates that mass variationally.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import as_generator, check_square
from .circuit import ParamCircuit, apply_circuit
from .estimator import sample_im, sample_re, term_overlaps
from .linalg import classical_svd
from .solver import VqsvdProblem, _streams, ascend, fold_signs, initial_parameters


def epsilon_d(exact_d, inferred_m):
    d = np.asarray(exact_d, dtype=float)
    m = np.asarray(inferred_m, dtype=float)
    if d.shape != m.shape:
        raise ValueError(f"length mismatch: {d.size} exact vs {m.size} inferred")
    return float(np.sum((d - m) ** 2))


def hermitian_embedding(m):
    """``[[0, M], [M^dagger, 0]]``; its eigenvalues are ``+-d_j``."""
    m = np.asarray(m)
    r, c = m.shape
    h = np.zeros((r + c, r + c), dtype=np.result_type(m, np.float64))
    h[:r, r:] = m
    h[r:, :r] = m.conj().T
    return h


def _unit_columns(x, name):
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    if x.shape[0] == 1 and x.shape[1] > 1:
        x = x.T
    norms = np.linalg.norm(x, axis=0)
    if not np.allclose(norms, 1.0, atol=1e-8):
        raise ValueError(f"{name} must hold unit vectors (norms {norms})")
    return x


def epsilon_v(m_matrix, inferred_m, lefts, rights):
    m_matrix = np.asarray(m_matrix)
    m = np.asarray(inferred_m, dtype=float)
    u = _unit_columns(lefts, "lefts")
    v = _unit_columns(rights, "rights")
    if u.shape[0] != m_matrix.shape[0] or v.shape[0] != m_matrix.shape[1]:
        raise ValueError("vector dimensions do not match the matrix")
    if not u.shape[1] == v.shape[1] == m.size:
        raise ValueError("need one left and one right vector per value")
    h = hermitian_embedding(m_matrix)
    total = 0.0
    for j in range(m.size):
        for sign in (1.0, -1.0):
            e = np.concatenate([u[:, j], sign * v[:, j]]) / np.sqrt(2.0)
            total += np.linalg.norm(h @ e - sign * m[j] * e) ** 2
    return float(total)


def error_bounds(top_mass, inferred_m):
    """``(bound_d, bound_v)`` from ``sum_{j<=T} d_j^2`` and the inferred values."""
    common = float(top_mass - np.sum(np.asarray(inferred_m, dtype=float) ** 2))
    return common, 2.0 * common


@dataclass
class MajorizationResult:
    """Partial sums of squared singular values against squared diagonal moduli."""

    ok: bool
    margins: np.ndarray
    singular_partial: np.ndarray
    diagonal_partial: np.ndarray
    equality: bool
    is_diagonal: bool


def majorization_check(m, atol=1e-10):
    m = check_square(m)
    d2 = classical_svd(m).singular_values ** 2
    diag2 = np.sort(np.abs(np.diag(m)) ** 2)[::-1]
    sp = np.cumsum(d2)
    dp = np.cumsum(diag2)
    margins = sp - dp
    scale = max(1.0, float(sp[-1]))
    off = m - np.diag(np.diag(m))
    return MajorizationResult(
        ok=bool(np.all(margins >= -atol * scale)),
        margins=margins,
        singular_partial=sp,
        diagonal_partial=dp,
        equality=bool(np.all(np.abs(margins) < 1e-12 * scale)),
        is_diagonal=bool(np.all(np.abs(off) <= 1e-12 * scale)),
    )


def distance_equality_check(u, v, u_hat, v_hat, atol=1e-10):
    """Both sides of the vector-distance identity, summed over columns.

    ``lhs = sum_j ||u_j - u^_j||^2 + ||v_j - v^_j||^2`` and ``rhs`` is the same
    distance between the embedded families ``e_j+-`` and ``e^_j+-``.
    """
    u, v = _unit_columns(u, "u"), _unit_columns(v, "v")
    uh, vh = _unit_columns(u_hat, "u_hat"), _unit_columns(v_hat, "v_hat")
    if u.shape != uh.shape or v.shape != vh.shape or u.shape[1] != v.shape[1]:
        raise ValueError("vector families have mismatched shapes")
    lhs = float(np.sum(np.abs(u - uh) ** 2) + np.sum(np.abs(v - vh) ** 2))
    rhs = 0.0
    for sign in (1.0, -1.0):
        e = np.vstack([u, sign * v]) / np.sqrt(2.0)
        eh = np.vstack([uh, sign * vh]) / np.sqrt(2.0)
        rhs += float(np.sum(np.abs(e - eh) ** 2))
    if abs(lhs - rhs) > atol * max(1.0, lhs):
        raise ArithmeticError(f"distance identity violated: {lhs!r} != {rhs!r}")
    return lhs, rhs


# ---------------------------------------------------------------------------
# variational Frobenius-mass estimate


@dataclass
class VqfneResult:
    value: float
    alpha: np.ndarray
    beta: np.ndarray
    history: list
    converged: bool
    iterations: int
    u_circuit: ParamCircuit = None
    v_circuit: ParamCircuit = None


def frobenius_mass_estimate(lcu, u_circuit, alpha, v_circuit, beta, rank, estimator, seed=None):
    """``sum_{j<T} |<u_j|M|v_j>|^2`` from per-term Re/Im estimates."""
    probe = np.eye(lcu.dim, dtype=complex)[:, :rank]
    u = apply_circuit(u_circuit, alpha, probe)
    v = apply_circuit(v_circuit, beta, probe)
    ov = term_overlaps(lcu, u, v)
    c = lcu.coefficients
    if estimator.mode == "exact":
        z = (c[:, None] * ov).sum(axis=0)
        return float(np.sum(np.abs(z) ** 2))
    if estimator.mode != "shots":
        raise ValueError("the Frobenius-mass estimate supports exact and shots modes")
    rng = as_generator(seed)
    shots = estimator.shots_per_term
    z = np.zeros(rank, dtype=complex)
    for j in range(rank):
        for k in range(len(lcu)):
            z[j] += c[k] * complex(sample_re(ov[k, j], shots, rng), sample_im(ov[k, j], shots, rng))
    return float(np.sum(np.abs(z) ** 2))


def vqfne_run(lcu, config, init=None):
    """Maximise ``F = sum_{j<=T} |<u_j|M|v_j>|^2`` over the configured ansatz.

    Training uses noiseless gradients; the reported value uses
    ``config.estimator`` (exact or shots).  At the global maximum ``F`` equals
    the sum of the ``T`` largest squared singular values.
    """
    problem = VqsvdProblem(lcu, config)
    init_rng, noise_rng = _streams(config.seed)
    if init is None:
        alpha, beta = initial_parameters(problem, init_rng)
    else:
        alpha, beta = (np.asarray(x, dtype=float).copy() for x in init)

    def objective(a, b):
        f, ga, gb = problem.frobenius_gradient(a, b)
        return f, ga, gb, None

    alpha, beta, history, converged, iters = ascend(objective, alpha, beta, config)
    value = frobenius_mass_estimate(
        lcu, problem.u_circuit, alpha, problem.v_circuit, beta,
        config.rank, config.estimator, noise_rng,
    )
    return VqfneResult(
        value, alpha, beta, history, converged, iters, problem.u_circuit, problem.v_circuit
    )


# ---------------------------------------------------------------------------
# report


@dataclass
class QualityReport:
    """Error bounds for one learned triple.

    ``bound_source`` is ``"oracle"`` (classical top-T mass) or ``"vqfne"``.
    The ``*_exact`` fields need the reference SVD and are ``None`` without it.
    """

    rank: int
    inferred_values: np.ndarray
    top_mass: float
    bound_source: str
    bound_d: float
    bound_v: float
    epsilon_d_exact: float = None
    epsilon_v_exact: float = None
    vqfne_value: float = None
    majorization_ok: bool = None
    majorization_margins: np.ndarray = field(default=None, repr=False)

    @property
    def bound_common(self):
        return self.bound_d

    @property
    def bounds_hold(self):
        if self.epsilon_d_exact is None:
            return None
        return bool(
            self.epsilon_d_exact <= self.bound_d + 1e-8
            and self.epsilon_v_exact <= self.bound_v + 1e-8
        )

    def to_dict(self):
        out = {
            "rank": self.rank,
            "inferred_values": [float(x) for x in self.inferred_values],
            "top_mass": self.top_mass,
            "bound_source": self.bound_source,
            "bound_common": self.bound_d,
            "bound_d": self.bound_d,
            "bound_v": self.bound_v,
            "epsilon_d_exact": self.epsilon_d_exact,
            "epsilon_v_exact": self.epsilon_v_exact,
            "bounds_hold": self.bounds_hold,
            "vqfne_value": self.vqfne_value,
            "majorization_ok": self.majorization_ok,
        }
        if self.majorization_margins is not None:
            out["majorization_margins"] = [float(x) for x in self.majorization_margins]
        return out

    def to_text(self):
        """Flat ``key = value`` block."""
        lines = []
        for key, val in self.to_dict().items():
            if isinstance(val, list):
                val = " ".join(repr(float(x)) for x in val)
            elif isinstance(val, float):
                val = repr(val)
            lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"


def quality_report(m_matrix, m_values, lefts, rights, vqfne_value=None, with_oracle=True):
    """Check learned triples against the value and vector error bounds.

    Values are sign-folded first (negative ``m_j`` flips ``u_j``), which leaves
    every rank-one term unchanged.  With ``vqfne_value`` the bound uses that
    estimate of the top-``T`` mass; otherwise the reference SVD supplies it.
    """
    m_matrix = np.asarray(m_matrix)
    m, u, v = fold_signs(m_values, lefts, rights)
    t = m.size
    svd = classical_svd(m_matrix) if (with_oracle or vqfne_value is None) else None
    if vqfne_value is not None:
        top_mass, source = float(vqfne_value), "vqfne"
    else:
        top_mass, source = float(np.sum(svd.singular_values[:t] ** 2)), "oracle"
    bound_d, bound_v = error_bounds(top_mass, m)
    report = QualityReport(
        rank=t,
        inferred_values=m,
        top_mass=top_mass,
        bound_source=source,
        bound_d=bound_d,
        bound_v=bound_v,
        vqfne_value=vqfne_value,
    )
    if svd is not None:
        report.epsilon_d_exact = epsilon_d(svd.singular_values[:t], m)
        report.epsilon_v_exact = epsilon_v(m_matrix, m, u, v)
        if m_matrix.shape[0] == m_matrix.shape[1]:
            maj = majorization_check(m_matrix)
            report.majorization_ok = maj.ok
            report.majorization_margins = maj.margins
    return report
