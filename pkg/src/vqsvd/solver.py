"""Training loop for the weighted singular-value loss.

Two circuits ``U(alpha)`` and ``V(beta)`` are trained so that
``L = sum_j q_j Re <j| U^dagger M V |j>`` (first ``T`` basis states, weights
``q_1 > ... > q_T > 0``) is maximal.  At the maximum the diagonal entries are
the ``T`` largest singular values in order and the circuit columns are the
singular vectors.

Every rotation is ``exp(-i theta P / 2)``, so the loss is a trigonometric
polynomial of degree 1/2 in each angle and

    dL/dtheta = L(theta + pi) / 2

for angles in either circuit.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_generator, check_positive_int, check_unitary
from .circuit import (
    AnsatzSpec,
    ParamCircuit,
    apply_circuit,
    apply_gate,
    apply_generator,
)
from .estimator import EstimatorConfig, combine_overlaps, term_overlaps
from .optim import Adam
from .pauli import lcu_reconstruct

logger = logging.getLogger(__name__)


def default_weights(rank):
    return tuple(float(rank - j) for j in range(rank))


def check_weights(weights):
    q = np.asarray(weights, dtype=float)
    if q.ndim != 1 or q.size == 0:
        raise ValueError("weights must be a non-empty 1-D sequence")
    if not np.all(q > 0) or not np.all(np.diff(q) < 0):
        raise ValueError("weights must be strictly decreasing and positive")
    return q


@dataclass
class VqsvdConfig:
    """Settings for one training run.

    ``ansatz`` and ``v_ansatz`` are :class:`AnsatzSpec` recipes or ready-made
    :class:`ParamCircuit` objects; ``v_ansatz=None`` reuses ``ansatz``.
    Convergence is declared when the loss moved by less than ``tolerance``
    over the last ``window`` iterations.
    """

    rank: int
    weights: tuple = None
    ansatz: object = field(default_factory=AnsatzSpec)
    v_ansatz: object = None
    max_iterations: int = 200
    tolerance: float = 1e-6
    learning_rate: float = 0.05
    seed: object = None
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    window: int = 10

    def __post_init__(self):
        check_positive_int(self.rank, "rank")
        if self.weights is None:
            self.weights = default_weights(self.rank)
        self.weights = tuple(float(w) for w in check_weights(self.weights))
        if len(self.weights) != self.rank:
            raise ValueError(f"{len(self.weights)} weights for rank {self.rank}")
        check_positive_int(self.max_iterations, "max_iterations", minimum=0)
        check_positive_int(self.window, "window")

    def circuits(self, n_qubits):
        def build(spec):
            if isinstance(spec, ParamCircuit):
                if spec.n_qubits != n_qubits:
                    raise ValueError(
                        f"{spec.n_qubits}-qubit circuit for a {n_qubits}-qubit problem"
                    )
                return spec
            return spec.build(n_qubits)

        u = build(self.ansatz)
        v = build(self.ansatz if self.v_ansatz is None else self.v_ansatz)
        return u, v

    def to_dict(self):
        def spec(s):
            if isinstance(s, ParamCircuit):
                return {"circuit": s.describe(), "n_qubits": s.n_qubits}
            return s.to_dict()

        return {
            "rank": self.rank,
            "weights": list(self.weights),
            "ansatz": spec(self.ansatz),
            "v_ansatz": None if self.v_ansatz is None else spec(self.v_ansatz),
            "max_iterations": self.max_iterations,
            "tolerance": self.tolerance,
            "learning_rate": self.learning_rate,
            "seed": self.seed if isinstance(self.seed, (int, type(None))) else repr(self.seed),
            "estimator": self.estimator.to_dict(),
            "window": self.window,
        }


@dataclass
class VqsvdResult:
    """Outcome of :func:`run`.

    ``m_values`` are the exact diagonal values ``Re <j|U^dagger M V|j>`` at the
    final parameters, sorted in descending order; ``column_order[i]`` is the
    circuit column that produced ``m_values[i]``.  Negative values (a poor
    local optimum) are kept as they are; see :attr:`has_negative`.
    """

    m_values: np.ndarray
    column_order: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    loss_history: list
    m_history: np.ndarray
    converged: bool
    iterations: int
    u_circuit: ParamCircuit
    v_circuit: ParamCircuit
    weights: tuple
    final_loss: float

    @property
    def rank(self):
        return len(self.m_values)

    @property
    def has_negative(self):
        return bool(np.any(self.m_values < 0))


def _adjoint_shift_overlaps(circuit, params, phi, lam):
    """Column sums ``<lam_l| (-i P_l) |phi_l>`` for every rotation slot ``l``.

    ``phi`` is the circuit output on the probe columns and ``lam`` the dual
    columns at the output; both are walked backwards through the gates.
    Returns an array of shape ``(param_count, n_columns)``.
    """
    n = circuit.n_qubits
    out = np.zeros((circuit.param_count, phi.shape[1]), dtype=complex)
    for g in reversed(circuit.gates):
        if g.slot is not None:
            hphi = apply_generator(phi, g, n)
            out[g.slot] = -1j * np.einsum("ij,ij->j", lam.conj(), hphi)
        phi = apply_gate(phi, g, params, n, adjoint=True)
        lam = apply_gate(lam, g, params, n, adjoint=True)
    return out


class VqsvdProblem:
    """An LCU, two circuits and the weights; evaluates the loss and its shifts."""

    def __init__(self, lcu, config, u_circuit=None, v_circuit=None):
        self.lcu = lcu
        self.config = config
        n = lcu.n_qubits
        built = config.circuits(n)
        self.u_circuit = u_circuit or built[0]
        self.v_circuit = v_circuit or built[1]
        self.rank = config.rank
        if self.rank > lcu.dim:
            raise ValueError(f"rank {self.rank} exceeds the matrix dimension {lcu.dim}")
        self.q = np.asarray(config.weights)
        self.matrix = lcu_reconstruct(lcu)
        self.probe = np.eye(lcu.dim, dtype=complex)[:, : self.rank]

    # columns u_j = U|j>, v_j = V|j>
    def u_columns(self, alpha):
        return apply_circuit(self.u_circuit, alpha, self.probe)

    def v_columns(self, beta):
        return apply_circuit(self.v_circuit, beta, self.probe)

    def diagonal(self, alpha, beta):
        """Complex ``<u_j|M|v_j>`` for ``j < T`` (dense, noiseless)."""
        u = self.u_columns(alpha)
        mv = self.matrix @ self.v_columns(beta)
        return np.einsum("ij,ij->j", u.conj(), mv)

    def m_values(self, alpha, beta, rng=None):
        """Per-column estimates of ``Re <u_j|M|v_j>`` under the configured estimator."""
        est = self.config.estimator
        if est.mode == "exact" or len(self.lcu) == 0:
            return self.diagonal(alpha, beta).real
        u = self.u_columns(alpha)
        v = self.v_columns(beta)
        return combine_overlaps(self.lcu, term_overlaps(self.lcu, u, v), est, rng)

    def loss(self, alpha, beta, rng=None):
        return float(self.q @ self.m_values(alpha, beta, rng))

    def shifted_losses(self, alpha, beta, rng=None):
        """Loss at ``alpha_l + pi`` for each ``l`` and at ``beta_k + pi`` for each ``k``.

        Exact mode computes all shifts in one adjoint sweep per circuit; the
        other estimators evaluate each shifted loss separately.
        """
        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        if self.config.estimator.mode == "exact" or len(self.lcu) == 0:
            u = self.u_columns(alpha)
            v = self.v_columns(beta)
            x = (self.matrix @ v) * self.q
            y = (self.matrix.conj().T @ u) * self.q
            sa = _adjoint_shift_overlaps(self.u_circuit, alpha, u, x).real.sum(axis=1)
            sb = _adjoint_shift_overlaps(self.v_circuit, beta, v, y).real.sum(axis=1)
            return sa, sb
        sa = np.empty(alpha.size)
        for l in range(alpha.size):
            a = alpha.copy()
            a[l] += np.pi
            sa[l] = self.loss(a, beta, rng)
        sb = np.empty(beta.size)
        for k in range(beta.size):
            b = beta.copy()
            b[k] += np.pi
            sb[k] = self.loss(alpha, b, rng)
        return sa, sb

    def gradient(self, alpha, beta, rng=None):
        sa, sb = self.shifted_losses(alpha, beta, rng)
        return 0.5 * sa, 0.5 * sb

    # Sum_j |<u_j|M|v_j>|^2, the Frobenius-mass objective
    def frobenius_objective(self, alpha, beta):
        return float(np.sum(np.abs(self.diagonal(alpha, beta)) ** 2))

    def frobenius_gradient(self, alpha, beta):
        """Gradient of ``sum_j |z_j|^2`` via ``dz_j = z_j(theta + pi) / 2`` per angle."""
        u = self.u_columns(alpha)
        v = self.v_columns(beta)
        mv = self.matrix @ v
        z = np.einsum("ij,ij->j", u.conj(), mv)
        mhu = self.matrix.conj().T @ u
        # shifted z for U angles is the conjugate of the swept overlap
        zu = np.conj(_adjoint_shift_overlaps(self.u_circuit, alpha, u, mv))
        zv = _adjoint_shift_overlaps(self.v_circuit, beta, v, mhu)
        ga = (np.conj(z)[None, :] * zu).real.sum(axis=1)
        gb = (np.conj(z)[None, :] * zv).real.sum(axis=1)
        return float(np.sum(np.abs(z) ** 2)), ga, gb


def _streams(seed):
    init, noise = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(init), np.random.default_rng(noise)


def initial_parameters(problem, seed):
    """Uniform ``[0, 2 pi)`` angles for both circuits, drawn from ``seed``."""
    rng = as_generator(seed)
    alpha = rng.uniform(0.0, 2.0 * np.pi, problem.u_circuit.param_count)
    beta = rng.uniform(0.0, 2.0 * np.pi, problem.v_circuit.param_count)
    return alpha, beta


def ascend(objective_and_grad, alpha, beta, config, callback=None, keep_best=False):
    """Adam ascent on a two-block parameter vector.

    ``objective_and_grad(alpha, beta)`` returns ``(value, grad_alpha,
    grad_beta, extra)``; ``extra`` is passed to ``callback``.  Adam minimises,
    so it is fed the negated gradient.  With ``keep_best`` the returned
    parameters are the evaluated point with the highest value rather than the
    last one; constant-step Adam keeps jittering around a maximum and now and
    then kicks away from it.
    """
    opt = Adam(lr=config.learning_rate)
    na = alpha.size
    theta = np.concatenate([alpha, beta])
    best_value, best_theta = -np.inf, theta
    history = []
    converged = False
    it = 0
    for it in range(1, config.max_iterations + 1):
        value, ga, gb, extra = objective_and_grad(theta[:na], theta[na:])
        history.append(value)
        if value > best_value:
            best_value, best_theta = value, theta
        if callback is not None:
            callback(it, value, extra)
        grad = np.concatenate([ga, gb])
        if not np.any(grad):
            converged = True
            break
        theta = opt.step(theta, -grad)
        w = config.window
        if len(history) > w and abs(history[-1] - history[-1 - w]) < config.tolerance:
            converged = True
            break
    if keep_best:
        theta = best_theta
    return theta[:na], theta[na:], history, converged, it


def run(lcu, config, init=None, callback=None):
    """Train both circuits on ``lcu`` and return a :class:`VqsvdResult`.

    ``init`` optionally supplies ``(alpha, beta)`` instead of the seeded
    uniform draw.  ``callback(iteration, loss, m_estimates)`` is called once
    per iteration.
    """
    problem = VqsvdProblem(lcu, config)
    init_rng, noise_rng = _streams(config.seed)
    if init is None:
        alpha, beta = initial_parameters(problem, init_rng)
    else:
        alpha = np.asarray(init[0], dtype=float).copy()
        beta = np.asarray(init[1], dtype=float).copy()
    m_trace = []

    def objective(a, b):
        m = problem.m_values(a, b, noise_rng)
        ga, gb = problem.gradient(a, b, noise_rng)
        return float(problem.q @ m), ga, gb, m

    def record(it, value, m):
        m_trace.append(np.asarray(m, dtype=float))
        if callback is not None:
            callback(it, value, m)

    # noisy values would bias a best-so-far pick, so only exact runs use it
    keep_best = config.estimator.mode == "exact"
    alpha, beta, history, converged, iters = ascend(objective, alpha, beta, config, record, keep_best)
    m_exact = problem.diagonal(alpha, beta).real
    order = np.argsort(-m_exact, kind="stable")
    logger.debug("finished after %d iterations, converged=%s", iters, converged)
    return VqsvdResult(
        m_values=m_exact[order],
        column_order=order,
        alpha=alpha,
        beta=beta,
        loss_history=history,
        m_history=np.array(m_trace).reshape(len(m_trace), config.rank),
        converged=converged,
        iterations=iters,
        u_circuit=problem.u_circuit,
        v_circuit=problem.v_circuit,
        weights=config.weights,
        final_loss=float(problem.q @ m_exact),
    )


def loss(lcu, u_params, v_params, config, seed=None):
    """Weighted loss ``sum_j q_j m_j`` under ``config.estimator``."""
    problem = VqsvdProblem(lcu, config)
    rng = as_generator(config.estimator.seed if seed is None else seed)
    return problem.loss(np.asarray(u_params, float), np.asarray(v_params, float), rng)


def gradient(lcu, u_params, v_params, config, seed=None):
    """Parameter-shift gradient ``(dL/dalpha, dL/dbeta)``."""
    problem = VqsvdProblem(lcu, config)
    rng = as_generator(config.estimator.seed if seed is None else seed)
    return problem.gradient(np.asarray(u_params, float), np.asarray(v_params, float), rng)


def loss_of_unitaries(m, u, v, weights):
    """``sum_j q_j Re (U^dagger M V)_jj`` for arbitrary unitaries ``U``, ``V``."""
    q = check_weights(weights)
    u = check_unitary(u, "U")
    v = check_unitary(v, "V")
    m = np.asarray(m)
    if u.shape[0] != m.shape[0] or v.shape[0] != m.shape[1]:
        raise ValueError("unitary sizes do not match the matrix")
    if q.size > min(m.shape):
        raise ValueError(f"{q.size} weights for a {m.shape} matrix")
    diag = np.einsum("ij,ij->j", u[:, : q.size].conj(), m @ v[:, : q.size]).real
    return float(q @ diag)


def extract_vectors(result, t=None):
    """Left and right vectors (columns) in the order of ``result.m_values``."""
    t = result.rank if t is None else int(t)
    cols = result.column_order[:t]
    dim = result.u_circuit.dim
    probe = np.eye(dim, dtype=complex)[:, cols]
    lefts = apply_circuit(result.u_circuit, result.alpha, probe)
    rights = apply_circuit(result.v_circuit, result.beta, probe)
    return lefts, rights


def fold_signs(m_values, lefts, rights):
    """Make every value non-negative by negating its left vector, then sort.

    ``m u v^dagger`` is unchanged term by term, so reconstructions agree.
    """
    m = np.asarray(m_values, dtype=float)
    sign = np.where(m < 0, -1.0, 1.0)
    folded = m * sign
    lefts = np.asarray(lefts) * sign
    order = np.argsort(-folded, kind="stable")
    return folded[order], lefts[:, order], np.asarray(rights)[:, order]
