"""Input validation helpers shared by the public API."""

import numbers

import numpy as np
from sklearn.exceptions import NotFittedError


def check_matrix(m, name="matrix", allow_empty=False):
    """Return ``m`` as a finite 2-D complex or float ndarray.

    Complex input is kept complex; everything else becomes float64.
    Raises ``ValueError`` for non-finite entries or the wrong rank.
    """
    arr = np.asarray(m)
    if arr.dtype == object:
        raise ValueError(f"{name} has non-numeric entries")
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not allow_empty and arr.size == 0:
        raise ValueError(f"{name} is empty")
    if np.iscomplexobj(arr):
        arr = arr.astype(np.complex128, copy=False)
    else:
        arr = arr.astype(np.float64, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def check_square(m, name="matrix"):
    arr = check_matrix(m, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def n_qubits_for(dim, name="dimension"):
    """Number of qubits for a power-of-two ``dim``; ``ValueError`` otherwise."""
    dim = int(dim)
    if dim < 1 or dim & (dim - 1):
        raise ValueError(f"{name} {dim} is not a power of two")
    return dim.bit_length() - 1


def next_power_of_two(k):
    k = int(k)
    return 1 if k <= 1 else 1 << (k - 1).bit_length()


def pad_to_power_of_two(m):
    """Zero-pad a matrix to the smallest square power-of-two shape."""
    arr = check_matrix(m)
    side = next_power_of_two(max(arr.shape))
    if arr.shape == (side, side):
        return arr
    out = np.zeros((side, side), dtype=arr.dtype)
    out[: arr.shape[0], : arr.shape[1]] = arr
    return out


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_unitary(u, name="unitary", atol=1e-8):
    arr = check_square(u, name)
    resid = np.linalg.norm(arr.conj().T @ arr - np.eye(arr.shape[0]))
    if resid > atol:
        raise ValueError(f"{name} is not unitary (residual {resid:.3e})")
    return arr


def check_is_fitted(estimator, attributes):
    if not all(hasattr(estimator, a) for a in attributes):
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet. "
            "Call 'fit' with appropriate arguments first."
        )


def as_generator(seed):
    """Seed-like value to a ``numpy.random.Generator`` (generators pass through)."""
    return np.random.default_rng(seed)
