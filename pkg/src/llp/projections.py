"""Euclidean projections onto the label-feasibility sets.

Three building blocks: projection onto the affine bag-mass constraints,
projection onto the [0, 1] box (binary) or the per-row probability simplex
(multiclass), and the alternating-projection loop that combines them.

The mass projection distributes each bag's deficit equally over its members;
the box and simplex projections are the usual clip and sort-threshold maps.
Each sweep applies mass first and box/simplex second, so the returned
iterate always satisfies the box (or simplex) constraints exactly and the
reported residual measures only the remaining bag-mass violation.
"""

from typing import NamedTuple

import numpy as np

from .exceptions import NonConvergenceError
from .validation import as_soft_labels


class ProjectionResult(NamedTuple):
    value: np.ndarray
    iterations: int
    residual: float


def _bag_sums(f, assignment, K):
    if f.ndim == 1:
        return np.bincount(assignment, weights=f, minlength=K)
    return np.column_stack(
        [np.bincount(assignment, weights=f[:, h], minlength=K) for h in range(f.shape[1])]
    )


def _resolve_constraints(bags, target_mass, ndim):
    """Assignment vector and mass target from either constraint container.

    Accepts a BagConstraintSystem (explicit target) or a BagStructure, whose
    positive mass (vector iterates) or per-class mass (matrix iterates)
    becomes the default target.
    """
    assignment = bags.membership if hasattr(bags, "membership") else bags.assignment
    if target_mass is None:
        if hasattr(bags, "target_mass"):
            target_mass = bags.target_mass
        elif ndim == 1:
            target_mass = bags.positive_mass()
        else:
            target_mass = bags.class_mass()
    return assignment, np.asarray(target_mass, dtype=np.float64)


def project_bag_mass(f, bags, target_mass=None):
    """Project onto the affine set {f : per-bag mass equals the target}.

    For each bag the shortfall is split evenly across its members:
    f_i += (b_k - sum_{j in B_k} f_j) / |B_k|.  Works on vectors (one mass
    target per bag) and on n-by-c matrices (one target per bag and class,
    projecting each class column independently).
    """
    f = as_soft_labels(f)
    assignment, b = _resolve_constraints(bags, target_mass, f.ndim)
    K = int(assignment.max()) + 1
    sizes = np.bincount(assignment, minlength=K)
    sums = _bag_sums(f, assignment, K)
    if f.ndim == 1:
        shift = (b - sums) / sizes
        return f + shift[assignment]
    shift = (b - sums) / sizes[:, None]
    return f + shift[assignment, :]


def project_box(f):
    """Clip soft labels into [0, 1]."""
    return np.clip(as_soft_labels(f), 0.0, 1.0)


def project_row_simplex(F):
    """Project each row of an n-by-c matrix onto the probability simplex.

    Sort-and-threshold: with u the descending sort of a row, the threshold is
    theta = (cumsum(u)_rho - 1) / rho for the largest rho keeping
    u_rho + (1 - cumsum(u)_rho) / rho positive, and the projection is
    max(row - theta, 0).
    """
    F = np.asarray(F, dtype=np.float64)
    if F.ndim != 2:
        raise ValueError("project_row_simplex expects an n-by-c matrix")
    n, c = F.shape
    u = -np.sort(-F, axis=1)
    cs = np.cumsum(u, axis=1)
    j = np.arange(1, c + 1)
    cond = u + (1.0 - cs) / j > 0.0
    rho = c - np.argmax(cond[:, ::-1], axis=1) - 1
    theta = (cs[np.arange(n), rho] - 1.0) / (rho + 1.0)
    return np.maximum(F - theta[:, None], 0.0)


def _mass_residual(f, assignment, K, b):
    sums = _bag_sums(f, assignment, K)
    return float(np.max(np.abs(sums - b)))


def alternating_projections(f0, bags, target_mass=None, tol=1e-6, max_iter=1000):
    """Alternate mass and box/simplex projections until the masses agree.

    Vector input pairs the affine bag-mass projection with the box; matrix
    input pairs the per-class mass projection with the row simplex.  Stops
    when the worst bag-mass violation of the box-feasible iterate is at most
    ``tol`` and returns a :class:`ProjectionResult`.  If the sets do not
    intersect the iterates still converge, but to a point with a positive
    residual; that surfaces as :class:`NonConvergenceError` carrying the last
    iterate so callers can inspect how infeasible the specification was.
    """
    f = as_soft_labels(f0)
    assignment, b = _resolve_constraints(bags, target_mass, f.ndim)
    K = int(assignment.max()) + 1
    if f.ndim == 2 and b.ndim != 2:
        raise ValueError("matrix iterates need a K-by-c target mass")
    if f.ndim == 1 and b.ndim != 1:
        raise ValueError("vector iterates need a length-K target mass")

    shrink = project_box if f.ndim == 1 else project_row_simplex
    residual = _mass_residual(f, assignment, K, b)
    for it in range(1, max_iter + 1):
        f = project_bag_mass(f, bags, b)
        f = shrink(f)
        residual = _mass_residual(f, assignment, K, b)
        if residual <= tol:
            return ProjectionResult(value=f, iterations=it, residual=residual)
    raise NonConvergenceError(
        f"alternating projections stalled at residual {residual:.3e} "
        f"after {max_iter} sweeps (tol {tol:.1e})",
        residual=residual,
        iterations=max_iter,
        iterate=f,
    )
