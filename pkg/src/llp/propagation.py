"""Graph label-propagation solvers.

Two layers live here.  The classic semi-supervised solvers compute the
propagation fixed point F* = (1 - alpha) (I - alpha S)^-1 Y, either in closed
form or by power iteration.  On top of them, :func:`propagate_constrained`
recovers per-instance soft labels from bag-level class proportions: it
alternates the resolvent step f <- (I - alpha S)^-1 f with a projection of
the result onto the feasible set (bag masses correct, values in the box or
on the simplex) until the iterate stops moving.

The resolvent step is deliberately unscaled by default: the subsequent mass
projection renormalizes the iterate every outer pass, so the (1 - alpha)
factor is absorbed.  Set ``scaled_resolvent=True`` to apply it anyway.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve

from .data import BagConstraintSystem
from .exceptions import ConfigError, IllConditionedError, NonConvergenceError
from .projections import alternating_projections
from .validation import as_soft_labels, check_square

# (I - alpha*S) is strictly diagonally dominant for alpha < 1, so a reciprocal
# condition number this small can only mean alpha crept up against 1.
_RCOND_FLOOR = 1e-14

_INNER_SOLVERS = ("closed_form", "power_iteration")


@dataclass(frozen=True)
class PropagationConfig:
    """Knobs for the propagation solvers and the constrained outer loop."""

    alpha: float = 0.5
    inner_solver: str = "closed_form"
    outer_tol: float = 1e-5
    outer_max_iter: int = 200
    ap_tol: float = 1e-6
    ap_max_iter: int = 1000
    scaled_resolvent: bool = False
    track_objective: bool = False
    objective_mu: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.inner_solver not in _INNER_SOLVERS:
            raise ConfigError(
                f"inner_solver must be one of {_INNER_SOLVERS}, got {self.inner_solver!r}"
            )
        for name in ("outer_tol", "ap_tol"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("outer_max_iter", "ap_max_iter"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.objective_mu < 0:
            raise ConfigError("objective_mu must be nonnegative")


@dataclass
class PropagationDiagnostics:
    """Where the constrained solve stopped and how it got there."""

    outer_iterations: int = 0
    outer_residual: float = float("inf")
    converged: bool = False
    residual_trace: list = field(default_factory=list)
    ap_iterations: list = field(default_factory=list)
    objective_trace: list | None = None

    def to_dict(self):
        return {
            "outer_iterations": self.outer_iterations,
            "outer_residual": self.outer_residual,
            "converged": self.converged,
            "residual_trace": list(self.residual_trace),
            "ap_iterations": list(self.ap_iterations),
            "objective_trace": None
            if self.objective_trace is None
            else list(self.objective_trace),
        }


def _resolvent_factorization(S, alpha):
    """LU-factorize (I - alpha*S), checking its condition estimate."""
    S = check_square(S, name="S")
    M = np.eye(S.shape[0]) - float(alpha) * S
    anorm = np.abs(M).sum(axis=0).max()
    lu, piv = lu_factor(M)
    (gecon,) = get_lapack_funcs(("gecon",), (M,))
    rcond, info = gecon(lu, anorm)
    if info != 0 or rcond < _RCOND_FLOOR:
        raise IllConditionedError(
            f"(I - alpha*S) is numerically singular (rcond={rcond:.2e}); "
            "alpha is too close to 1",
            condition_estimate=float(1.0 / max(rcond, np.finfo(np.float64).tiny)),
        )
    return lu, piv


def propagate_closed_form(S, Y, alpha):
    """Propagation fixed point (1 - alpha)(I - alpha*S)^-1 Y.

    Solves the linear system rather than forming the inverse.  Y may be a
    vector or an n-by-c matrix of initial (e.g. one-hot) labels.
    """
    Y = as_soft_labels(Y, name="Y")
    lu, piv = _resolvent_factorization(S, alpha)
    return (1.0 - float(alpha)) * lu_solve((lu, piv), Y)


def propagate_power_iteration(S, Y, alpha, tol=1e-10, max_iter=10_000):
    """Same fixed point as :func:`propagate_closed_form`, by iteration.

    Runs F <- alpha*S*F + (1 - alpha)*Y from F = Y until the sup-norm update
    drops to ``tol``.  The map is an alpha-contraction, so this needs at most
    about log(tol)/log(alpha) passes; exceeding ``max_iter`` raises
    :class:`NonConvergenceError` with the last residual.
    """
    S = check_square(S, name="S")
    Y = as_soft_labels(Y, name="Y")
    alpha = float(alpha)
    F = Y.copy()
    base = (1.0 - alpha) * Y
    for it in range(1, int(max_iter) + 1):
        F_next = alpha * (S @ F) + base
        residual = float(np.max(np.abs(F_next - F)))
        F = F_next
        if residual <= tol:
            return F
    raise NonConvergenceError(
        f"power iteration still moving {residual:.3e} after {max_iter} steps",
        residual=residual,
        iterations=int(max_iter),
        iterate=F,
    )


def init_soft_labels(bags, as_matrix=False):
    """Seed every instance with its bag's class proportions.

    Binary default: a vector of positive-class proportions.  With
    ``as_matrix=True``: the full n-by-c matrix of proportion rows.
    """
    if as_matrix:
        return bags.proportions[bags.assignment, :].copy()
    return bags.proportions[bags.assignment, 1].copy()


def _inner_solve(f, S, lu_piv, config):
    """One resolvent application g = (I - alpha*S)^-1 f (optionally scaled)."""
    if config.inner_solver == "closed_form":
        g = lu_solve(lu_piv, f)
    else:
        # fixed point of g <- alpha*S*g + f, seeded at f
        alpha = config.alpha
        g = f.copy()
        tol = min(config.outer_tol, 1e-8) * 1e-2
        for _ in range(10_000):
            g_next = alpha * (S @ g) + f
            moved = float(np.max(np.abs(g_next - g)))
            g = g_next
            if moved <= tol:
                break
        else:
            raise NonConvergenceError(
                f"inner power iteration still moving {moved:.3e}",
                residual=moved,
                iterations=10_000,
                iterate=g,
            )
    if config.scaled_resolvent:
        g = (1.0 - config.alpha) * g
    return g


def propagate_constrained(S, bags, config=None, multiclass=None):
    """Recover soft labels from bag proportions on the similarity graph.

    Starting from every instance's bag proportion, repeat: diffuse the
    current soft labels through the resolvent, then project the result back
    onto the set where each bag carries its prescribed class mass and values
    are box- (binary) or simplex- (multiclass) feasible.  Stops once the
    iterate moves less than ``outer_tol`` in sup norm, or after
    ``outer_max_iter`` passes (the last feasible iterate is returned either
    way; ``diagnostics.converged`` records which happened).

    Returns ``(f, diagnostics)`` with f a length-n vector (binary) or n-by-c
    matrix (multiclass, one simplex row per instance).
    """
    if config is None:
        config = PropagationConfig()
    S = check_square(S, name="S")
    if multiclass is None:
        multiclass = bags.c > 2
    system = BagConstraintSystem.from_bags(bags, per_class=multiclass)

    f = init_soft_labels(bags, as_matrix=multiclass)
    lu_piv = _resolvent_factorization(S, config.alpha)

    diag = PropagationDiagnostics(
        objective_trace=[] if config.track_objective else None
    )
    y_ref = f.copy()
    for t in range(1, config.outer_max_iter + 1):
        g = _inner_solve(f, S, lu_piv, config)
        try:
            projected = alternating_projections(
                g,
                system,
                tol=config.ap_tol,
                max_iter=config.ap_max_iter,
            )
        except NonConvergenceError as err:
            err.diagnostics = diag
            raise
        f_next = projected.value
        residual = float(np.max(np.abs(f_next - f)))
        f = f_next
        diag.outer_iterations = t
        diag.outer_residual = residual
        diag.residual_trace.append(residual)
        diag.ap_iterations.append(projected.iterations)
        if config.track_objective:
            diag.objective_trace.append(
                evaluate_objective(f, S, y_ref, config.objective_mu)
            )
        if residual <= config.outer_tol:
            diag.converged = True
            break
    return f, diag


def decide_labels(f):
    """Threshold binary soft labels at 0.5; the tie f = 0.5 goes to class 1."""
    f = as_soft_labels(f)
    if f.ndim != 1:
        raise ValueError("decide_labels expects a vector; use decide_labels_multiclass")
    return (f >= 0.5).astype(np.int64)


def decide_labels_multiclass(F):
    """Row-wise argmax; ties go to the lowest class id."""
    F = as_soft_labels(F)
    if F.ndim != 2:
        raise ValueError("decide_labels_multiclass expects an n-by-c matrix")
    return np.argmax(F, axis=1).astype(np.int64)


def weighted_knn_baseline(S, soft_labels):
    """One-step smoothing: each instance averages its neighbors' soft labels.

    This is the first-order term of the propagation series (up to the alpha
    factor), i.e. a similarity-weighted nearest-neighbor vote.
    """
    S = check_square(S, name="S")
    return S @ as_soft_labels(soft_labels)


def evaluate_objective(f, S, y_ref, mu_reg):
    """Smoothness-plus-fidelity objective.

    sum_ij S[i, j] (f_i - f_j)^2 + mu_reg * sum_i ||f_i - y_ref_i||^2,
    evaluated for vector or matrix soft labels.
    """
    S = check_square(S, name="S")
    f = as_soft_labels(f)
    y_ref = as_soft_labels(y_ref, name="y_ref")
    if float(mu_reg) < 0:
        raise ValueError("mu_reg must be nonnegative")
    F = f if f.ndim == 2 else f[:, None]
    rs = S.sum(axis=1)
    cs = S.sum(axis=0)
    quad = float(np.einsum("i,ij->", rs, F * F) + np.einsum("j,ji->", cs, F * F))
    cross = float(2.0 * np.einsum("ik,ij,jk->", F, S, F))
    fit = float(np.sum((f - y_ref) ** 2))
    return quad - cross + float(mu_reg) * fit
