"""scikit-learn style front end to the variational SVD."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_is_fitted, check_matrix, check_positive_int, pad_to_power_of_two
from .circuit import AnsatzSpec
from .estimator import EstimatorConfig
from .linalg import reconstruct_rank_t
from .pauli import circulant_decompose, circulant_matrix, lcu_reconstruct, pauli_decompose
from .solver import VqsvdConfig, extract_vectors, fold_signs, run


class VQSVD(TransformerMixin, BaseEstimator):
    """Top-``n_components`` singular triples learned by two parameterised circuits.

    The input matrix is zero-padded to the next square power-of-two size,
    written as a linear combination of unitaries and handed to the training
    loop.  After ``fit`` the estimator exposes the learned factors in the same
    layout as :class:`sklearn.decomposition.TruncatedSVD`.

    Parameters
    ----------
    n_components : int
        Number of singular triples ``T`` to learn.
    weights : sequence of float, optional
        Strictly decreasing positive loss weights; ``(T, T-1, ..., 1)`` if omitted.
    ansatz : {"a", "b", "c", "d", "layers"}
        Circuit family used for both ``U`` and ``V``.
    depth : int
        Number of ansatz blocks.
    mode : {"auto", "real", "complex"}
        ``"real"`` uses ``Ry`` rotations only, ``"complex"`` uses ``Rz Ry Rz``;
        ``"auto"`` picks by the dtype of ``X``.
    max_iter, tol, learning_rate
        Adam settings; training stops once the loss changes by less than
        ``tol`` over 10 iterations.
    estimator : {"exact", "shots", "sampled"}
        Backend for the loss and gradient evaluations during training.
    shots_per_term, term_samples : int
        Shot and term-sample budgets for the noisy backends.
    decomposition : {"pauli", "circulant"}
        How the matrix is written as a sum of unitaries.
    random_state : int or None
        Seed for the initial angles and the estimator noise.

    Attributes
    ----------
    singular_values_ : ndarray of shape (n_components,)
        Learned values, made non-negative and sorted in descending order.
    m_values_ : ndarray of shape (n_components,)
        Raw diagonal values ``Re <j|U^dagger M V|j>``, sorted, signs kept.
    components_ : ndarray of shape (n_components, n_features)
        Right singular vectors as rows.
    left_vectors_, right_vectors_ : ndarray
        Singular vectors as columns, restricted to the unpadded rows/columns.
    result_ : VqsvdResult
        Full training record (parameters, loss history, circuits).
    """

    def __init__(
        self,
        n_components=2,
        *,
        weights=None,
        ansatz="a",
        depth=20,
        mode="auto",
        max_iter=200,
        tol=1e-6,
        learning_rate=0.05,
        estimator="exact",
        shots_per_term=0,
        term_samples=0,
        decomposition="pauli",
        random_state=None,
    ):
        self.n_components = n_components
        self.weights = weights
        self.ansatz = ansatz
        self.depth = depth
        self.mode = mode
        self.max_iter = max_iter
        self.tol = tol
        self.learning_rate = learning_rate
        self.estimator = estimator
        self.shots_per_term = shots_per_term
        self.term_samples = term_samples
        self.decomposition = decomposition
        self.random_state = random_state

    def _config(self, is_complex):
        mode = self.mode
        if mode == "auto":
            mode = "complex" if is_complex else "real"
        return VqsvdConfig(
            rank=check_positive_int(self.n_components, "n_components"),
            weights=self.weights,
            ansatz=AnsatzSpec(self.ansatz, self.depth, mode),
            max_iterations=self.max_iter,
            tolerance=self.tol,
            learning_rate=self.learning_rate,
            seed=self.random_state,
            estimator=EstimatorConfig(
                self.estimator, self.shots_per_term, self.term_samples, self.random_state
            ),
        )

    def _lcu_for(self, padded):
        if self.decomposition == "pauli":
            return pauli_decompose(padded)
        if self.decomposition == "circulant":
            row = padded[0]
            if not np.allclose(circulant_matrix(row), padded, atol=1e-10, rtol=0):
                raise ValueError("decomposition='circulant' needs a circulant matrix")
            return circulant_decompose(row)
        raise ValueError(f"unknown decomposition {self.decomposition!r}")

    def fit(self, X, y=None):
        X = check_matrix(X, "X")
        padded = pad_to_power_of_two(X)
        if self.n_components > padded.shape[0]:
            raise ValueError(
                f"n_components={self.n_components} exceeds the padded size {padded.shape[0]}"
            )
        self.n_features_in_ = X.shape[1]
        self.shape_ = X.shape
        return self._fit_lcu(self._lcu_for(padded), np.iscomplexobj(X))

    def fit_lcu(self, lcu, is_complex=None):
        """Fit directly from an :class:`~vqsvd.pauli.LcuDecomposition`."""
        if is_complex is None:
            is_complex = bool(np.any(np.abs(lcu_reconstruct(lcu).imag) > 1e-12))
        self.n_features_in_ = lcu.dim
        self.shape_ = (lcu.dim, lcu.dim)
        return self._fit_lcu(lcu, is_complex)

    def _fit_lcu(self, lcu, is_complex):
        self.lcu_ = lcu
        self.config_ = self._config(is_complex)
        self.result_ = run(lcu, self.config_)
        lefts, rights = extract_vectors(self.result_)
        self.m_values_ = self.result_.m_values
        values, lefts, rights = fold_signs(self.m_values_, lefts, rights)
        self.singular_values_ = values
        self.padded_left_vectors_ = lefts
        self.padded_right_vectors_ = rights
        rows, cols = self.shape_
        self.left_vectors_ = lefts[:rows]
        self.right_vectors_ = rights[:cols]
        self.components_ = self.right_vectors_.T
        self.loss_history_ = np.asarray(self.result_.loss_history)
        self.n_iter_ = self.result_.iterations
        self.converged_ = self.result_.converged
        return self

    def transform(self, X):
        """Coordinates of the rows of ``X`` along the learned right vectors."""
        check_is_fitted(self, ["components_"])
        X = check_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X @ self.right_vectors_

    def inverse_transform(self, X):
        check_is_fitted(self, ["components_"])
        X = check_matrix(X, "X")
        return X @ self.right_vectors_.conj().T

    def reconstruct(self, t=None):
        """Rank-``t`` approximation of the fitted matrix (unpadded shape)."""
        check_is_fitted(self, ["singular_values_"])
        t = self.n_components if t is None else t
        return reconstruct_rank_t(
            self.singular_values_, self.left_vectors_, self.right_vectors_, t
        )
