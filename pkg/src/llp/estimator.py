"""Estimator-style front end for proportion-supervised transduction.

Wraps graph construction plus the constrained propagation solver behind the
familiar fit / fit_predict surface.  The estimator is transductive: ``fit``
labels exactly the points it was given (stored in ``transduction_``), there
is no out-of-sample ``predict``.
"""

import numpy as np
from sklearn.base import BaseEstimator

from .data import BagStructure, bag_structure_from_proportions
from .graph import build_graph
from .propagation import (
    PropagationConfig,
    decide_labels,
    decide_labels_multiclass,
    propagate_constrained,
)
from .validation import as_feature_matrix


class ProportionPropagation(BaseEstimator):
    """Transductive classifier supervised only by bag-level class proportions.

    Parameters
    ----------
    alpha : float in (0, 1)
        Propagation mixing weight; larger values trust the graph more.
    gamma_kernel : float
        Gaussian affinity bandwidth, W[i, j] = exp(-gamma_kernel * ||xi - xj||^2).
    zscore : bool
        Standardize features before building the graph.
    inner_solver : {"closed_form", "power_iteration"}
    scaled_resolvent : bool
        Apply the (1 - alpha) factor inside the outer loop.
    outer_tol, outer_max_iter, ap_tol, ap_max_iter
        Convergence controls for the outer loop and the inner feasibility
        projections.

    Attributes (after fit)
    ----------------------
    graph_ : RowStochasticGraph over the fitted points.
    bags_ : the BagStructure actually used.
    soft_labels_ : converged soft labels (vector or n-by-c matrix).
    transduction_ : hard label per fitted point.
    diagnostics_ : PropagationDiagnostics of the solve.
    n_iter_ : outer iterations used.
    """

    def __init__(
        self,
        alpha=0.5,
        gamma_kernel=1.0,
        zscore=False,
        inner_solver="closed_form",
        scaled_resolvent=False,
        outer_tol=1e-5,
        outer_max_iter=200,
        ap_tol=1e-6,
        ap_max_iter=1000,
    ):
        self.alpha = alpha
        self.gamma_kernel = gamma_kernel
        self.zscore = zscore
        self.inner_solver = inner_solver
        self.scaled_resolvent = scaled_resolvent
        self.outer_tol = outer_tol
        self.outer_max_iter = outer_max_iter
        self.ap_tol = ap_tol
        self.ap_max_iter = ap_max_iter

    def _config(self):
        return PropagationConfig(
            alpha=self.alpha,
            inner_solver=self.inner_solver,
            outer_tol=self.outer_tol,
            outer_max_iter=self.outer_max_iter,
            ap_tol=self.ap_tol,
            ap_max_iter=self.ap_max_iter,
            scaled_resolvent=self.scaled_resolvent,
        )

    def _coerce_bags(self, bags, n):
        if isinstance(bags, BagStructure):
            structure = bags
        elif isinstance(bags, tuple) and len(bags) == 2:
            assignment, proportions = bags
            structure = bag_structure_from_proportions(assignment, proportions)
        else:
            raise TypeError(
                "bags must be a BagStructure or an (assignment, proportions) pair"
            )
        if structure.n != n:
            raise ValueError(
                f"bag structure covers {structure.n} instances, X has {n}"
            )
        return structure

    def fit(self, X, bags):
        """Label the points in X from their bag proportions.

        ``bags`` is a :class:`BagStructure` over the rows of X, or an
        ``(assignment, proportions)`` pair from which one is built.
        """
        X = as_feature_matrix(X, name="X")
        structure = self._coerce_bags(bags, X.shape[0])
        self.graph_ = build_graph(X, self.gamma_kernel, zscore=self.zscore)
        f, diag = propagate_constrained(self.graph_.S, structure, self._config())
        self.bags_ = structure
        self.soft_labels_ = f
        self.diagnostics_ = diag
        self.n_iter_ = diag.outer_iterations
        if f.ndim == 1:
            self.transduction_ = decide_labels(f)
        else:
            self.transduction_ = decide_labels_multiclass(f)
        self.classes_ = np.arange(structure.c, dtype=np.int64)
        return self

    def fit_predict(self, X, bags):
        return self.fit(X, bags).transduction_
