"""Synthetic benchmark generators and randomized proportion-true bagging.

Two planted-structure datasets exercise the solvers: a four-Gaussian XOR
layout (clusters at the corners of a 10-by-10 square, diagonal corners
sharing a class, identity covariance) and a half-kernel layout (two nested
half-ring arcs with Gaussian jitter).  Both are balanced and deterministic
given a seed.

:func:`assign_bags` then partitions a labeled dataset into bags whose
realized class proportions match a requested spec up to integer rounding,
drawing the membership uniformly at random subject to those counts.
"""

from dataclasses import dataclass

import numpy as np

from .data import Dataset, RngSeed, make_bag_structure
from .exceptions import ConfigError, InfeasibleSpecError

# canonical three-bag positive-class proportion presets
PRESET_PROPORTIONS = {
    "A": (0.60, 0.40, 0.50),
    "B": (0.85, 0.25, 0.40),
}

_TIE_ATOL = 1e-9


@dataclass(frozen=True)
class BagSpec:
    """Requested bag layout: positive-class proportion and size per bag."""

    proportions: tuple
    sizes: tuple
    label: str = "custom"

    def __post_init__(self):
        proportions = tuple(float(p) for p in self.proportions)
        sizes = tuple(int(s) for s in self.sizes)
        if len(proportions) != len(sizes) or not proportions:
            raise ConfigError("proportions and sizes must be equal-length and nonempty")
        if any(not 0.0 <= p <= 1.0 for p in proportions):
            raise ConfigError("each bag proportion must lie in [0, 1]")
        if any(s < 1 for s in sizes):
            raise ConfigError("each bag size must be at least 1")
        object.__setattr__(self, "proportions", proportions)
        object.__setattr__(self, "sizes", sizes)

    @property
    def K(self):
        return len(self.sizes)

    @property
    def n(self):
        return sum(self.sizes)


def preset_proportions(label):
    """Positive-class proportions for a named preset ('A' or 'B')."""
    try:
        return PRESET_PROPORTIONS[label]
    except KeyError:
        raise ConfigError(
            f"unknown bag configuration {label!r}; choose from "
            f"{sorted(PRESET_PROPORTIONS)} or give explicit proportions"
        ) from None


def split_sizes(n, K):
    """Split n into K near-equal integer parts (largest remainder first)."""
    if K < 1 or n < K:
        raise ConfigError(f"cannot split {n} instances into {K} nonempty bags")
    base, rem = divmod(n, K)
    return tuple(base + 1 if k < rem else base for k in range(K))


def bag_positive_counts(proportions, sizes, n_positive, n_negative):
    """Integer positives per bag matching the proportions up to rounding.

    Each count starts at the nearest integer to p_k * s_k, so realized
    proportions stay within 0.5/|B_k| of the request.  Exact .5 fractions
    are flexible and are rounded up (in bag order) only as needed to make
    the totals match the available label pool.  Raises
    :class:`InfeasibleSpecError` when no rounding choice can work.
    """
    raw = np.asarray(proportions, dtype=np.float64) * np.asarray(sizes, dtype=np.float64)
    lo = np.floor(raw + _TIE_ATOL).astype(np.int64)
    frac = raw - lo
    counts = np.where(frac > 0.5 + _TIE_ATOL, lo + 1, lo)
    ties = np.abs(frac - 0.5) <= _TIE_ATOL

    t_min = int(counts.sum())
    t_max = t_min + int(ties.sum())
    if n_positive < t_min:
        raise InfeasibleSpecError(
            f"bags require at least {t_min} positives but only {n_positive} exist",
            positive_deficit=t_min - n_positive,
        )
    total = int(np.sum(sizes))
    if total - t_max > n_negative:
        raise InfeasibleSpecError(
            f"bags require at least {total - t_max} negatives "
            f"but only {n_negative} exist",
            negative_deficit=(total - t_max) - n_negative,
        )
    if n_positive > t_max and n_positive + n_negative == total:
        # whole pool must be consumed, but even rounding every tie up
        # leaves positives unplaced
        raise InfeasibleSpecError(
            f"bags can absorb at most {t_max} positives but {n_positive} exist",
            negative_deficit=n_positive - t_max,
        )
    need = min(n_positive - t_min, int(ties.sum()))
    for k in np.flatnonzero(ties):
        if need <= 0:
            break
        counts[k] += 1
        need -= 1
    return counts


def gen_xor(n_total, seed):
    """Four Gaussian clusters at the corners of a 10-by-10 square.

    Corners (0,0), (10,0), (0,10), (10,10) in block order; diagonal corners
    share a class, so labels run (0, 1, 1, 0).  Identity covariance; n_total
    must be a positive multiple of 4 so clusters and classes stay balanced.
    """
    n_total = int(n_total)
    if n_total < 4 or n_total % 4 != 0:
        raise ConfigError(f"n_total must be a multiple of 4 and >= 4, got {n_total}")
    rng = RngSeed.coerce(seed).generator()
    m = n_total // 4
    corners = np.array([(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0)])
    corner_labels = np.array([0, 1, 1, 0], dtype=np.int64)
    blocks = [corner + rng.standard_normal((m, 2)) for corner in corners]
    points = np.vstack(blocks)
    labels = np.repeat(corner_labels, m)
    return Dataset(points=points, true_labels=labels)


def gen_half_kernel(n_total, noise_sd=0.5, seed=0, r_inner=5.0, r_outer=8.0):
    """Two nested half-ring arcs with Gaussian jitter.

    Class 0 sits on the inner arc of radius ``r_inner``, class 1 on the
    outer arc of radius ``r_outer``; arc angles are uniform in [0, pi].
    With ``noise_sd=0`` every point lies exactly on its arc.  n_total must
    be a positive even number so the classes stay balanced.
    """
    n_total = int(n_total)
    if n_total < 2 or n_total % 2 != 0:
        raise ConfigError(f"n_total must be even and >= 2, got {n_total}")
    if noise_sd < 0:
        raise ConfigError("noise_sd must be nonnegative")
    if not 0 < r_inner < r_outer:
        raise ConfigError("radii must satisfy 0 < r_inner < r_outer")
    rng = RngSeed.coerce(seed).generator()
    m = n_total // 2
    blocks = []
    for radius in (r_inner, r_outer):
        t = rng.uniform(0.0, np.pi, size=m)
        arc = radius * np.column_stack([np.cos(t), np.sin(t)])
        blocks.append(arc + noise_sd * rng.standard_normal((m, 2)))
    points = np.vstack(blocks)
    labels = np.repeat(np.array([0, 1], dtype=np.int64), m)
    return Dataset(points=points, true_labels=labels)


def assign_bags(dataset, spec, seed):
    """Randomly bag a labeled dataset while hitting the spec's proportions.

    Every instance lands in exactly one bag; bag k receives the rounded
    count of positives implied by its requested proportion (realized
    proportions differ by at most 0.5/|B_k|).  Membership is uniform at
    random given those counts.  Binary labels only.
    """
    if dataset.true_labels is None:
        raise ValueError("assign_bags needs ground-truth labels")
    labels = dataset.true_labels
    if labels.max() > 1:
        raise ConfigError("assign_bags supports binary labels only")
    if spec.n != dataset.n:
        raise ConfigError(
            f"bag sizes sum to {spec.n} but the dataset has {dataset.n} instances"
        )
    pos_pool = np.flatnonzero(labels == 1)
    neg_pool = np.flatnonzero(labels == 0)
    counts = bag_positive_counts(
        spec.proportions, spec.sizes, pos_pool.size, neg_pool.size
    )
    leftover_pos = pos_pool.size - int(counts.sum())
    leftover_neg = neg_pool.size - int(np.sum(spec.sizes) - counts.sum())
    if leftover_pos or leftover_neg:
        raise InfeasibleSpecError(
            "rounded bag counts cannot absorb the label pool "
            f"({leftover_pos} positives, {leftover_neg} negatives unplaced)",
            positive_deficit=max(0, -leftover_pos),
            negative_deficit=max(0, -leftover_neg),
        )

    rng = RngSeed.coerce(seed).generator()
    pos_order = rng.permutation(pos_pool)
    neg_order = rng.permutation(neg_pool)
    assignment = np.empty(dataset.n, dtype=np.int64)
    p_at, n_at = 0, 0
    for k, (size, p_k) in enumerate(zip(spec.sizes, counts)):
        p_k = int(p_k)
        assignment[pos_order[p_at : p_at + p_k]] = k
        assignment[neg_order[n_at : n_at + (size - p_k)]] = k
        p_at += p_k
        n_at += size - p_k
    return make_bag_structure(assignment, labels)
