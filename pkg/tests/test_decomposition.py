import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from vqsvd import VQSVD
from vqsvd.pauli import circulant_decompose, circulant_matrix

DIAG4 = np.diag([3.0, 2.0, 1.0, 0.5])


def test_get_params_and_clone():
    est = VQSVD(3, depth=5, random_state=4)
    params = est.get_params()
    assert params["n_components"] == 3 and params["depth"] == 5
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(depth=7)
    assert est.depth == 7


def test_not_fitted():
    with pytest.raises(NotFittedError):
        VQSVD().transform(np.eye(4))


def test_fit_transform_diagonal():
    est = VQSVD(4, max_iter=500, tol=1e-9, random_state=0).fit(DIAG4)
    np.testing.assert_allclose(est.singular_values_, [3, 2, 1, 0.5], atol=0.05)
    assert est.components_.shape == (4, 4)
    z = est.transform(DIAG4)
    np.testing.assert_allclose(est.inverse_transform(z), DIAG4, atol=0.05)
    np.testing.assert_allclose(est.reconstruct(), DIAG4, atol=0.05)


def test_non_power_of_two_shape():
    x = np.arange(12, dtype=float).reshape(3, 4) / 10
    est = VQSVD(1, depth=4, max_iter=200, random_state=1).fit(x)
    assert est.left_vectors_.shape == (3, 1)
    assert est.right_vectors_.shape == (4, 1)
    assert est.transform(x).shape == (3, 1)
    top = np.linalg.svd(x, compute_uv=False)[0]
    assert est.singular_values_[0] == pytest.approx(top, abs=0.05)


def test_errors():
    with pytest.raises(ValueError, match="exceeds"):
        VQSVD(5).fit(np.eye(4))
    with pytest.raises(ValueError, match="circulant"):
        VQSVD(1, decomposition="circulant").fit(DIAG4 + np.triu(np.ones((4, 4)), 1))
    est = VQSVD(1, max_iter=2, random_state=0).fit(np.eye(4))
    with pytest.raises(ValueError, match="features"):
        est.transform(np.eye(2))


def test_fit_lcu_circulant():
    row = [2.0, 1.0, 0.0, 0.5]
    est = VQSVD(2, max_iter=400, tol=1e-9, random_state=2, depth=10).fit_lcu(circulant_decompose(row))
    expected = np.linalg.svd(circulant_matrix(row), compute_uv=False)[:2]
    np.testing.assert_allclose(est.singular_values_, expected, atol=0.05)
