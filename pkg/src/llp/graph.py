"""Similarity graph construction.

The graph is a dense Gaussian affinity matrix over all instances with the
self-affinity removed, plus its row-stochastic normalization.  Dense storage
is deliberate: the solvers factorize the propagation operator directly, and
the intended problem sizes (hundreds to a few thousand instances) fit
comfortably in memory.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .exceptions import ZeroDegreeError
from .validation import as_feature_matrix, check_positive


@dataclass(frozen=True)
class RowStochasticGraph:
    """Affinity matrix W, its row-normalized form S, and the row sums."""

    W: np.ndarray
    S: np.ndarray
    degree: np.ndarray

    @property
    def n(self):
        return self.S.shape[0]


def compute_similarity(points, gamma_kernel):
    """Gaussian affinity matrix: W[i, j] = exp(-gamma * ||x_i - x_j||^2).

    The diagonal is zeroed so instances never reinforce their own labels.
    Accepts a Dataset or a raw n-by-d array.
    """
    points = getattr(points, "points", points)
    X = as_feature_matrix(points)
    check_positive(gamma_kernel, name="gamma_kernel")
    d2 = cdist(X, X, metric="sqeuclidean")
    W = np.exp(-float(gamma_kernel) * d2)
    np.fill_diagonal(W, 0.0)
    return W


def row_normalize(W):
    """Normalize an affinity matrix to a row-stochastic operator.

    Raises :class:`ZeroDegreeError` when some row sums to zero (an instance
    with no similarity mass cannot receive label information).
    """
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError("W must be a square matrix")
    degree = W.sum(axis=1)
    dead = np.flatnonzero(degree <= 0.0)
    if dead.size:
        raise ZeroDegreeError(
            f"instance {int(dead[0])} has zero total similarity; "
            "decrease gamma_kernel or remove duplicate-free outliers"
        )
    S = W / degree[:, None]
    return RowStochasticGraph(W=W, S=S, degree=degree)


def build_graph(dataset, gamma_kernel, zscore=False):
    """Similarity graph for a dataset, optionally on standardized features.

    With ``zscore=True`` each feature is centered and scaled to unit variance
    before distances are computed (constant features are left centered).
    """
    points = getattr(dataset, "points", dataset)
    X = as_feature_matrix(points)
    if zscore:
        mu = X.mean(axis=0)
        sd = X.std(axis=0)
        sd[sd == 0.0] = 1.0
        X = (X - mu) / sd
    W = compute_similarity(X, gamma_kernel)
    return row_normalize(W)
