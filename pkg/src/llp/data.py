"""Core domain types and dataset I/O.

A :class:`Dataset` is a fixed point cloud with optionally known ground-truth
labels (kept only for evaluation; solvers never see them).  A
:class:`BagStructure` partitions the instances into disjoint bags and stores
each bag's class proportions, the only supervision available to the solvers.
All types are immutable after construction and safe to share across workers.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataFormatError, EmptyBagError
from .validation import as_assignment_vector, as_feature_matrix, as_label_vector

_ATOL = 1e-9


def _freeze(a):
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class RngSeed:
    """64-bit seed for a deterministic random stream.

    The same seed with the same configuration reproduces results bit for bit
    on a given build.  Child seeds derived via :meth:`child` are independent
    streams that are themselves reproducible.
    """

    seed: int

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def coerce(cls, value):
        if isinstance(value, cls):
            return value
        return cls(int(value))

    def generator(self):
        return np.random.default_rng(np.random.SeedSequence(self.seed))

    def child(self, index):
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(int(index),))
        return RngSeed(int(ss.generate_state(1, dtype=np.uint64)[0]))


@dataclass(frozen=True)
class Dataset:
    """An n-by-d point matrix with optional hidden ground-truth labels."""

    points: np.ndarray
    true_labels: np.ndarray | None = None
    c: int = 2

    def __post_init__(self):
        points = _freeze(as_feature_matrix(self.points, name="points"))
        object.__setattr__(self, "points", points)
        if self.true_labels is not None:
            labels = as_label_vector(self.true_labels, n=points.shape[0])
            c = max(int(self.c), int(labels.max()) + 1, 2)
            object.__setattr__(self, "true_labels", _freeze(labels))
            object.__setattr__(self, "c", c)
        else:
            if self.c < 2:
                raise ValueError("c must be at least 2")
            object.__setattr__(self, "c", int(self.c))

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]


@dataclass(frozen=True)
class BagStructure:
    """Disjoint partition of instances into bags with per-bag class proportions.

    ``counts[k, h]`` is the mass of class ``h`` in bag ``k``.  It is integral
    when derived from ground truth and may be fractional when the proportions
    were supplied directly; either way each row sums to the bag size and
    ``proportions = counts / sizes`` row-wise.
    """

    assignment: np.ndarray
    proportions: np.ndarray
    counts: np.ndarray
    sizes: np.ndarray = field(default=None)

    def __post_init__(self):
        assignment = as_assignment_vector(self.assignment)
        proportions = np.asarray(self.proportions, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.float64)
        if proportions.ndim != 2 or proportions.shape != counts.shape:
            raise ValueError("proportions and counts must be matching K-by-c matrices")
        K = proportions.shape[0]
        if assignment.size == 0:
            raise ValueError("assignment must be nonempty")
        if assignment.max() >= K:
            raise ValueError("assignment references a bag id beyond K-1")
        sizes = np.bincount(assignment, minlength=K).astype(np.int64)
        if np.any(sizes == 0):
            missing = int(np.flatnonzero(sizes == 0)[0])
            raise EmptyBagError(f"bag {missing} has no instances")
        if self.sizes is not None and not np.array_equal(
            np.asarray(self.sizes, dtype=np.int64), sizes
        ):
            raise ValueError("sizes inconsistent with assignment")
        if np.any(proportions < -_ATOL) or np.any(proportions > 1 + _ATOL):
            raise ValueError("proportions must lie in [0, 1]")
        if np.max(np.abs(proportions.sum(axis=1) - 1.0)) > _ATOL:
            raise ValueError("each row of proportions must sum to 1")
        if np.max(np.abs(counts.sum(axis=1) - sizes)) > _ATOL:
            raise ValueError("counts rows must sum to bag sizes")
        if np.max(np.abs(counts - proportions * sizes[:, None])) > _ATOL * np.maximum(
            1.0, sizes
        ).max():
            raise ValueError("counts must equal proportions * sizes")
        object.__setattr__(self, "assignment", _freeze(assignment))
        object.__setattr__(self, "proportions", _freeze(proportions))
        object.__setattr__(self, "counts", _freeze(counts))
        object.__setattr__(self, "sizes", _freeze(sizes))

    @property
    def n(self):
        return self.assignment.shape[0]

    @property
    def K(self):
        return self.proportions.shape[0]

    @property
    def c(self):
        return self.proportions.shape[1]

    def members(self, k):
        """Indices of the instances assigned to bag ``k``."""
        return np.flatnonzero(self.assignment == k)

    def positive_mass(self):
        """Per-bag target mass of class 1 (the binary constraint vector)."""
        return np.asarray(self.counts[:, 1])

    def class_mass(self):
        """Per-bag, per-class target mass (K-by-c)."""
        return np.asarray(self.counts)


@dataclass(frozen=True)
class BagConstraintSystem:
    """The linear system tying soft labels to bag mass.

    The K-by-n indicator matrix is stored sparsely as the assignment vector;
    ``target_mass`` is the per-bag mass vector (binary) or K-by-c matrix
    (one column per class).
    """

    membership: np.ndarray
    target_mass: np.ndarray

    def __post_init__(self):
        membership = _freeze(as_assignment_vector(self.membership))
        target = _freeze(np.asarray(self.target_mass, dtype=np.float64))
        if not np.all(np.isfinite(target)):
            raise ValueError("target_mass must be finite")
        object.__setattr__(self, "membership", membership)
        object.__setattr__(self, "target_mass", target)

    @classmethod
    def from_bags(cls, bags, per_class=False):
        mass = bags.class_mass() if per_class else bags.positive_mass()
        return cls(membership=bags.assignment, target_mass=mass)

    def dense_matrix(self):
        """Materialize the K-by-n 0/1 indicator matrix (for small n)."""
        K = int(self.membership.max()) + 1
        A = np.zeros((K, self.membership.shape[0]))
        A[self.membership, np.arange(self.membership.shape[0])] = 1.0
        return A


def make_bag_structure(assignment, true_labels, n_classes=None):
    """Build a :class:`BagStructure` by counting ground-truth labels per bag.

    Raises :class:`EmptyBagError` if some bag id in ``0..max(assignment)``
    has no instances.
    """
    assignment = as_assignment_vector(assignment)
    labels = as_label_vector(true_labels, n=assignment.shape[0])
    K = int(assignment.max()) + 1
    c = max(2, int(labels.max()) + 1, int(n_classes or 0))
    sizes = np.bincount(assignment, minlength=K)
    if np.any(sizes == 0):
        missing = int(np.flatnonzero(sizes == 0)[0])
        raise EmptyBagError(f"bag {missing} has no instances")
    counts = np.zeros((K, c))
    np.add.at(counts, (assignment, labels), 1.0)
    proportions = counts / sizes[:, None]
    return BagStructure(
        assignment=assignment, proportions=proportions, counts=counts, sizes=sizes
    )


def bag_structure_from_proportions(assignment, proportions):
    """Build a :class:`BagStructure` from user-supplied proportions.

    No ground truth is involved: the per-bag class mass is
    ``proportions * size`` and may be fractional.
    """
    assignment = as_assignment_vector(assignment)
    proportions = np.asarray(proportions, dtype=np.float64)
    if proportions.ndim == 1:
        # positive-class proportions for the binary case
        proportions = np.column_stack([1.0 - proportions, proportions])
    K = int(assignment.max()) + 1
    if proportions.shape[0] != K:
        raise ValueError(
            f"proportions has {proportions.shape[0]} rows, expected {K} bags"
        )
    sizes = np.bincount(assignment, minlength=K)
    if np.any(sizes == 0):
        missing = int(np.flatnonzero(sizes == 0)[0])
        raise EmptyBagError(f"bag {missing} has no instances")
    counts = proportions * sizes[:, None]
    return BagStructure(
        assignment=assignment, proportions=proportions, counts=counts, sizes=sizes
    )


def load_dataset_csv(path, label_column=None):
    """Load a dataset from a headed CSV file.

    Every non-label column must parse as a finite real.  If ``label_column``
    is given, that column must hold integer class ids and is attached as
    ground truth.  Errors name the offending data row (1-based, excluding
    the header).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        label_idx = None
        if label_column is not None:
            if label_column not in header:
                raise DataFormatError(
                    f"{path}: label column {label_column!r} not found in header"
                )
            label_idx = header.index(label_column)
        feature_idx = [j for j in range(len(header)) if j != label_idx]
        if not feature_idx:
            raise DataFormatError(f"{path}: no feature columns")

        rows, labels = [], []
        for r, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}: row {r}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                values = [float(row[j]) for j in feature_idx]
            except ValueError:
                raise DataFormatError(
                    f"{path}: row {r}: non-numeric feature value"
                ) from None
            if not all(np.isfinite(values)):
                raise DataFormatError(f"{path}: row {r}: non-finite feature value")
            rows.append(values)
            if label_idx is not None:
                try:
                    lv = float(row[label_idx])
                except ValueError:
                    raise DataFormatError(
                        f"{path}: row {r}: non-numeric label"
                    ) from None
                if not lv.is_integer():
                    raise DataFormatError(
                        f"{path}: row {r}: label must be an integer, got {row[label_idx]!r}"
                    )
                labels.append(int(lv))

    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    points = np.asarray(rows, dtype=np.float64)
    true_labels = np.asarray(labels, dtype=np.int64) if label_idx is not None else None
    return Dataset(points=points, true_labels=true_labels)


def write_dataset_csv(dataset, path, label_column="label"):
    """Write a dataset as CSV with columns f0..f{d-1} plus an optional label."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = [f"f{j}" for j in range(dataset.d)]
        if dataset.true_labels is not None:
            header.append(label_column)
        writer.writerow(header)
        for i in range(dataset.n):
            # repr of a Python float round-trips exactly
            row = [repr(float(v)) for v in dataset.points[i]]
            if dataset.true_labels is not None:
                row.append(str(int(dataset.true_labels[i])))
            writer.writerow(row)


def load_bag_csv(path, n=None):
    """Load a bag assignment from a CSV with columns instance_index,bag_id."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        if header[:2] != ["instance_index", "bag_id"]:
            raise DataFormatError(
                f"{path}: expected header instance_index,bag_id, got {header}"
            )
        pairs = []
        for r, row in enumerate(reader, start=1):
            try:
                pairs.append((int(row[0]), int(row[1])))
            except (ValueError, IndexError):
                raise DataFormatError(f"{path}: row {r}: malformed entry") from None
    if not pairs:
        raise DataFormatError(f"{path}: no data rows")
    size = n if n is not None else max(i for i, _ in pairs) + 1
    assignment = np.full(size, -1, dtype=np.int64)
    for i, k in pairs:
        if not 0 <= i < size:
            raise DataFormatError(f"{path}: instance_index {i} out of range")
        assignment[i] = k
    if np.any(assignment < 0):
        missing = int(np.flatnonzero(assignment < 0)[0])
        raise DataFormatError(f"{path}: instance {missing} has no bag id")
    return assignment


def write_bag_csv(assignment, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance_index", "bag_id"])
        for i, k in enumerate(assignment):
            writer.writerow([i, int(k)])
