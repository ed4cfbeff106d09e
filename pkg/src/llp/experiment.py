"""Repeated-trial evaluation harness.

A trial: draw (or load) a labeled dataset, split it into proportion-true
bags plus one held-out test bag whose proportion is known, pick the kernel
bandwidth by an unsupervised smoothness score, solve, and grade the
predicted labels of the test bag against the hidden ground truth.  An
experiment repeats this over independent seeds and reports mean accuracy
with the sample standard deviation.

Ground-truth labels are used in exactly two places: composing the bags and
grading.  The solver path (:func:`solve_trial`) receives only points and
bag proportions, so the graded labels cannot leak into the predictions.
"""

import json
import time
from dataclasses import dataclass, field, fields

import numpy as np

from .data import RngSeed, load_dataset_csv
from .datasets import (
    BagSpec,
    assign_bags,
    bag_positive_counts,
    gen_half_kernel,
    gen_xor,
    preset_proportions,
    split_sizes,
)
from .exceptions import ConfigError, InfeasibleSpecError, LLPError
from .graph import build_graph
from .propagation import PropagationConfig, decide_labels, propagate_constrained
from .validation import as_feature_matrix

# Bandwidths above ~1e2 make the normalized graph so local that the
# smoothness score saturates near its maximum for any locally consistent
# labeling, which misleads the selector; the default grid stops there.
DEFAULT_GAMMA_GRID = tuple(np.logspace(-3.0, 2.0, 13).tolist())

_GENERATORS = ("xor", "half_kernel")
_DATASET_KEYS = {
    "xor": {"generator"},
    "half_kernel": {"generator", "noise_sd", "r_inner", "r_outer"},
    "csv": {"csv_path", "label_column"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one repeated experiment.

    ``dataset`` selects the source: ``{"generator": "xor"}``,
    ``{"generator": "half_kernel", "noise_sd": 0.5, ...}``, or
    ``{"csv_path": ..., "label_column": ...}`` for user data (the CSV must
    then hold exactly n_train + round(test_fraction * n_train) labeled rows).
    ``bag_config`` is a preset name ("A" or "B") or an explicit list of
    positive-class proportions, one per training bag.
    """

    dataset: dict
    bag_config: object = "A"
    n_train: int = 600
    test_fraction: float = 0.2
    repeats: int = 25
    alpha: float = 0.5
    gamma_grid: tuple = DEFAULT_GAMMA_GRID
    inner_solver: str = "closed_form"
    outer_tol: float = 1e-5
    outer_max_iter: int = 200
    ap_tol: float = 1e-6
    ap_max_iter: int = 1000
    scaled_resolvent: bool = False
    soft_gamma_score: bool = False
    zscore: bool = False
    eval_all: bool = False
    track_objective: bool = False
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        dataset = dict(self.dataset)
        kind = self._dataset_kind(dataset)
        allowed = _DATASET_KEYS[kind]
        unknown = set(dataset) - allowed
        if unknown:
            raise ConfigError(
                f"unknown dataset keys {sorted(unknown)}; "
                f"allowed for this source: {sorted(allowed)}"
            )
        object.__setattr__(self, "dataset", dataset)

        if isinstance(self.bag_config, str):
            proportions = preset_proportions(self.bag_config)
            label = self.bag_config
        else:
            proportions = tuple(float(p) for p in self.bag_config)
            if not proportions:
                raise ConfigError("bag_config must name a preset or list proportions")
            if any(not 0.0 <= p <= 1.0 for p in proportions):
                raise ConfigError("bag proportions must lie in [0, 1]")
            label = "custom"
        object.__setattr__(self, "bag_config", label if label != "custom" else list(proportions))
        object.__setattr__(self, "_proportions", proportions)
        object.__setattr__(self, "_bag_label", label)

        if int(self.repeats) < 1:
            raise ConfigError("repeats must be at least 1")
        object.__setattr__(self, "repeats", int(self.repeats))
        if int(self.n_train) < len(proportions):
            raise ConfigError("n_train must cover at least one instance per bag")
        object.__setattr__(self, "n_train", int(self.n_train))
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie in (0, 1)")
        grid = tuple(float(g) for g in self.gamma_grid)
        if not grid or any(g <= 0 for g in grid):
            raise ConfigError("gamma_grid must be a nonempty list of positive reals")
        object.__setattr__(self, "gamma_grid", grid)
        # delegate solver-knob validation
        self.propagation_config()
        if not self.name:
            source = self.dataset.get("generator", "csv")
            object.__setattr__(
                self, "name", f"{source}-{self.n_train}{self._bag_label}"
            )

    @staticmethod
    def _dataset_kind(dataset):
        if "generator" in dataset:
            gen = dataset["generator"]
            if gen not in _GENERATORS:
                raise ConfigError(
                    f"unknown generator {gen!r}; choose from {_GENERATORS}"
                )
            return gen
        if "csv_path" in dataset:
            return "csv"
        raise ConfigError("dataset needs either a 'generator' or a 'csv_path'")

    @property
    def proportions(self):
        return self._proportions

    @property
    def bag_label(self):
        return self._bag_label

    @property
    def n_test(self):
        return int(round(self.test_fraction * self.n_train))

    def propagation_config(self):
        return PropagationConfig(
            alpha=self.alpha,
            inner_solver=self.inner_solver,
            outer_tol=self.outer_tol,
            outer_max_iter=self.outer_max_iter,
            ap_tol=self.ap_tol,
            ap_max_iter=self.ap_max_iter,
            scaled_resolvent=self.scaled_resolvent,
            track_objective=self.track_objective,
        )

    @classmethod
    def from_dict(cls, raw):
        """Build a config from parsed JSON, rejecting unknown keys."""
        if not isinstance(raw, dict):
            raise ConfigError("experiment config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        if "dataset" not in raw:
            raise ConfigError("config is missing the 'dataset' entry")
        if not isinstance(raw["dataset"], dict):
            raise ConfigError("'dataset' must be a JSON object")
        return cls(**raw)

    def to_dict(self):
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["gamma_grid"] = list(self.gamma_grid)
        out["dataset"] = dict(self.dataset)
        return out


@dataclass
class TrialOutcome:
    """Solver-side result of one trial (no ground truth involved)."""

    predictions: np.ndarray
    soft_labels: np.ndarray
    gamma: float
    gamma_scores: list
    diagnostics: object


@dataclass
class RepeatRecord:
    """One repeat's grades and bookkeeping."""

    index: int
    accuracy: float = float("nan")
    train_accuracy: float = float("nan")
    accuracy_all: float | None = None
    gamma: float = float("nan")
    gamma_scores: list = field(default_factory=list)
    outer_iterations: int = 0
    converged: bool = False
    diagnostics: dict | None = None
    error: str | None = None

    def to_dict(self):
        return {
            "index": self.index,
            "accuracy": self.accuracy,
            "train_accuracy": self.train_accuracy,
            "accuracy_all": self.accuracy_all,
            "gamma": self.gamma,
            "gamma_scores": list(self.gamma_scores),
            "outer_iterations": self.outer_iterations,
            "converged": self.converged,
            "diagnostics": self.diagnostics,
            "error": self.error,
        }


@dataclass
class ExperimentResult:
    """Aggregated grades over all repeats of one configuration."""

    name: str
    config: ExperimentConfig
    records: list
    mean: float
    std: float
    completed: int
    wall_time: float

    @property
    def accuracies(self):
        return [r.accuracy for r in self.records if r.error is None]

    def to_dict(self):
        # wall_time is intentionally left out: serialized results must be
        # identical across runs of the same config and seed
        return {
            "name": self.name,
            "config": self.config.to_dict(),
            "mean": self.mean,
            "std": self.std,
            "completed": self.completed,
            "repeats": len(self.records),
            "records": [r.to_dict() for r in self.records],
        }


def accuracy(predicted, truth):
    """Fraction of positions where the two label vectors agree."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError(
            f"length mismatch: {predicted.shape} predictions vs {truth.shape} truths"
        )
    return float(np.mean(predicted == truth))


def smoothness_score(S, values):
    """Graph smoothness of a labeling: signed(f)^T S signed(f).

    ``values`` in [0, 1] (hard 0/1 labels or soft scores) are mapped to
    [-1, 1]; for hard labels on a row-stochastic graph the score is at most
    n, attained exactly when labels are constant on every component.
    """
    signed = 2.0 * np.asarray(values, dtype=np.float64) - 1.0
    return float(signed @ (S @ signed))


def _score_gamma(points, bags, gamma, pconfig, zscore, soft_score):
    """Run the solver at one bandwidth; (score, outcome) or (-inf, error)."""
    try:
        graph = build_graph(points, gamma, zscore=zscore)
        f, diag = propagate_constrained(graph.S, bags, pconfig)
    except LLPError as err:
        return float("-inf"), err
    predictions = decide_labels(f) if f.ndim == 1 else None
    scored = f if (soft_score or predictions is None) else predictions
    return smoothness_score(graph.S, scored), (f, predictions, diag)


def select_gamma(
    points,
    bags,
    gamma_grid=None,
    alpha=0.5,
    *,
    zscore=False,
    soft_score=False,
    propagation=None,
):
    """Pick the kernel bandwidth with the best unsupervised smoothness score.

    Runs the constrained solver at every grid value and scores the resulting
    labeling; grid points where the solver fails score -inf.  Returns
    ``(best_gamma, scores)`` with scores aligned to the grid; ties go to the
    smaller bandwidth.  Raises :class:`NonConvergenceError` only if every
    grid point fails.
    """
    best_gamma, scores, _ = _select_gamma_full(
        points, bags, gamma_grid, alpha, zscore, soft_score, propagation
    )
    return best_gamma, scores


def _select_gamma_full(points, bags, gamma_grid, alpha, zscore, soft_score, propagation):
    points = getattr(points, "points", points)
    points = as_feature_matrix(points)
    grid = tuple(float(g) for g in (gamma_grid if gamma_grid is not None else DEFAULT_GAMMA_GRID))
    if not grid or any(g <= 0 for g in grid):
        raise ConfigError("gamma_grid must be a nonempty list of positive reals")
    pconfig = propagation if propagation is not None else PropagationConfig(alpha=alpha)

    scores = []
    best = None  # (score, gamma, outcome)
    for gamma in grid:
        score, outcome = _score_gamma(points, bags, gamma, pconfig, zscore, soft_score)
        scores.append(score)
        if isinstance(outcome, LLPError):
            continue
        if best is None or score > best[0] or (score == best[0] and gamma < best[1]):
            best = (score, gamma, outcome)
    if best is None:
        raise ConfigError(
            f"solver failed at every gamma in the grid {list(grid)}"
        )
    return best[1], scores, best[2]


def solve_trial(points, bags, config):
    """Full unsupervised solve: pick gamma on the grid, return its labeling.

    ``config`` is an :class:`ExperimentConfig`; only its solver-side fields
    are read.  No ground-truth labels enter here.
    """
    gamma, scores, (f, predictions, diag) = _select_gamma_full(
        points,
        bags,
        config.gamma_grid,
        config.alpha,
        config.zscore,
        config.soft_gamma_score,
        config.propagation_config(),
    )
    if predictions is None:
        raise ConfigError("solve_trial supports the binary path only")
    return TrialOutcome(
        predictions=predictions,
        soft_labels=f,
        gamma=gamma,
        gamma_scores=scores,
        diagnostics=diag,
    )


def _generate_dataset(config, n_total, seed):
    dataset = config.dataset
    kind = ExperimentConfig._dataset_kind(dataset)
    if kind == "xor":
        return gen_xor(n_total, seed)
    if kind == "half_kernel":
        return gen_half_kernel(
            n_total,
            noise_sd=dataset.get("noise_sd", 0.5),
            seed=seed,
            r_inner=dataset.get("r_inner", 5.0),
            r_outer=dataset.get("r_outer", 8.0),
        )
    loaded = load_dataset_csv(dataset["csv_path"], dataset.get("label_column", "label"))
    if loaded.true_labels is None:
        raise ConfigError("CSV datasets need a label column to compose bags")
    if loaded.n != n_total:
        raise ConfigError(
            f"CSV holds {loaded.n} rows but n_train + test size = {n_total}"
        )
    return loaded


def compose_trial(config, repeat_index):
    """Generate one repeat's dataset and its bag layout.

    The training set splits into near-equal bags with the configured
    proportions; the remaining points form one extra test bag whose
    proportion follows from the leftover label pool.  Returns
    ``(dataset, bags, test_mask)``: ground truth stays on the dataset for
    grading and never reaches the solver.
    """
    seed = RngSeed.coerce(config.seed).child(repeat_index)
    n_test = config.n_test
    if n_test < 1:
        raise ConfigError("test_fraction leaves no test instances")
    n_total = config.n_train + n_test
    dataset = _generate_dataset(config, n_total, seed.child(0))

    labels = dataset.true_labels
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    train_sizes = split_sizes(config.n_train, len(config.proportions))
    train_counts = bag_positive_counts(
        config.proportions, train_sizes, n_pos, n_neg
    )
    test_positives = n_pos - int(train_counts.sum())
    if not 0 <= test_positives <= n_test:
        raise InfeasibleSpecError(
            f"training bags leave {test_positives} positives for a test bag of "
            f"size {n_test}",
            positive_deficit=max(0, -test_positives),
            negative_deficit=max(0, test_positives - n_test),
        )
    spec = BagSpec(
        proportions=tuple(config.proportions) + (test_positives / n_test,),
        sizes=tuple(train_sizes) + (n_test,),
        label=config.bag_label,
    )
    bags = assign_bags(dataset, spec, seed.child(1))
    test_mask = bags.assignment == len(config.proportions)
    return dataset, bags, test_mask


def run_repeat(config, repeat_index):
    """One seeded repeat: compose, solve, grade."""
    record = RepeatRecord(index=repeat_index)
    try:
        dataset, bags, test_mask = compose_trial(config, repeat_index)
        outcome = solve_trial(dataset.points, bags, config)
    except LLPError as err:
        record.error = f"{type(err).__name__}: {err}"
        return record
    truth = dataset.true_labels
    record.accuracy = accuracy(outcome.predictions[test_mask], truth[test_mask])
    record.train_accuracy = accuracy(outcome.predictions[~test_mask], truth[~test_mask])
    if config.eval_all:
        record.accuracy_all = accuracy(outcome.predictions, truth)
    record.gamma = outcome.gamma
    record.gamma_scores = list(outcome.gamma_scores)
    record.outer_iterations = outcome.diagnostics.outer_iterations
    record.converged = outcome.diagnostics.converged
    record.diagnostics = outcome.diagnostics.to_dict()
    return record


def run_experiment(config):
    """Run all repeats of a configuration and aggregate the grades.

    A repeat that fails (solver non-convergence, infeasible bag spec) is
    recorded with its error and skipped by the aggregates; the result's
    ``completed`` count says how many repeats the summary rests on.
    """
    if not isinstance(config, ExperimentConfig):
        config = ExperimentConfig.from_dict(config)
    start = time.perf_counter()
    records = [run_repeat(config, r) for r in range(config.repeats)]
    wall_time = time.perf_counter() - start
    scores = [r.accuracy for r in records if r.error is None]
    mean = float(np.mean(scores)) if scores else float("nan")
    std = float(np.std(scores, ddof=1)) if len(scores) > 1 else 0.0
    return ExperimentResult(
        name=config.name,
        config=config,
        records=records,
        mean=mean,
        std=std,
        completed=len(scores),
        wall_time=wall_time,
    )


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if isinstance(value, np.generic):
        return _json_safe(value.item())
    return value


def format_cell(mean, std):
    """Table cell in the two-decimal mean(std) convention."""
    return f"{mean:.2f}({std:.2f})"


def emit_results(results, format="csv", path=None):
    """Serialize experiment results as a table (csv) or in full (json).

    CSV carries one row per experiment in the mean(std) table convention;
    JSON preserves every repeat's record (non-finite scores become null, and
    timing is omitted so equal configs yield byte-equal files).  Returns the
    serialized string; writes it to ``path`` when given.
    """
    results = list(results)
    if not results:
        raise ValueError("no results to emit")
    if format == "csv":
        lines = ["name,accuracy,mean,std,completed,repeats"]
        for res in results:
            lines.append(
                f"{res.name},{format_cell(res.mean, res.std)},"
                f"{res.mean!r},{res.std!r},{res.completed},{len(res.records)}"
            )
        text = "\n".join(lines) + "\n"
    elif format == "json":
        payload = [_json_safe(res.to_dict()) for res in results]
        text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"
    else:
        raise ValueError(f"unknown format {format!r}; use 'csv' or 'json'")
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
