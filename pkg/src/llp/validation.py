"""Input validation helpers.

Small checks shared by the data types, the graph builder and the estimator.
All helpers return float64/int64 numpy arrays and raise ``ValueError`` with
a message naming the offending argument.
"""

import numpy as np


def as_feature_matrix(X, name="X"):
    """Coerce to a 2-D float64 array with finite entries."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def as_label_vector(y, n=None, name="labels"):
    """Coerce to a 1-D int64 vector of nonnegative class ids."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional")
    if y.size and not np.all(np.equal(np.mod(y, 1), 0)):
        raise ValueError(f"{name} must contain integers")
    y = y.astype(np.int64)
    if n is not None and y.shape[0] != n:
        raise ValueError(f"{name} has length {y.shape[0]}, expected {n}")
    if y.size and y.min() < 0:
        raise ValueError(f"{name} must be nonnegative class ids")
    return y


def as_assignment_vector(assignment, n=None):
    """Coerce a bag-assignment vector to 1-D int64."""
    return as_label_vector(assignment, n=n, name="assignment")


def as_soft_labels(f, name="f"):
    """Coerce soft labels to float64, 1-D (binary) or 2-D (multiclass)."""
    f = np.asarray(f, dtype=np.float64)
    if f.ndim not in (1, 2):
        raise ValueError(f"{name} must be a vector or a matrix, got ndim={f.ndim}")
    if not np.all(np.isfinite(f)):
        raise ValueError(f"{name} contains non-finite values")
    return f


def check_square(M, name="matrix"):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    return M


def check_probability(p, name="value"):
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")
    return p


def check_positive(x, name="value"):
    x = float(x)
    if not x > 0:
        raise ValueError(f"{name} must be positive, got {x}")
    return x
