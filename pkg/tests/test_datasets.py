import numpy as np
import pytest
from scipy.spatial.distance import cdist

from llp.data import Dataset
from llp.datasets import (
    BagSpec,
    assign_bags,
    bag_positive_counts,
    gen_half_kernel,
    gen_xor,
    preset_proportions,
    split_sizes,
)
from llp.exceptions import ConfigError, InfeasibleSpecError

CORNERS = np.array([(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0)])


def loo_nearest_neighbor_accuracy(dataset):
    d = cdist(dataset.points, dataset.points)
    np.fill_diagonal(d, np.inf)
    nearest = np.argmin(d, axis=1)
    return float(np.mean(dataset.true_labels[nearest] == dataset.true_labels))


class TestGenXor:
    def test_minimal_instance_sits_on_corners(self):
        ds = gen_xor(4, seed=0)
        assert ds.n == 4
        # one draw per corner, unit jitter
        assert np.all(np.linalg.norm(ds.points - CORNERS, axis=1) < 6.0)
        np.testing.assert_array_equal(ds.true_labels, [0, 1, 1, 0])

    def test_balanced_classes(self):
        ds = gen_xor(120, seed=1)
        np.testing.assert_array_equal(np.bincount(ds.true_labels), [60, 60])

    def test_cluster_means_near_corners(self):
        ds = gen_xor(600, seed=2)
        m = 150
        for k, corner in enumerate(CORNERS):
            mean = ds.points[k * m : (k + 1) * m].mean(axis=0)
            assert np.linalg.norm(mean - corner) <= 3.0 / np.sqrt(m)

    def test_deterministic(self):
        a = gen_xor(40, seed=3)
        b = gen_xor(40, seed=3)
        np.testing.assert_array_equal(a.points, b.points)
        np.testing.assert_array_equal(a.true_labels, b.true_labels)

    @pytest.mark.parametrize("n", [0, 2, 5, 10])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ConfigError):
            gen_xor(n, seed=0)

    def test_not_linearly_separable(self):
        # a linear model should do roughly chance-level on this layout
        from sklearn.linear_model import LogisticRegression

        ds = gen_xor(600, seed=4)
        model = LogisticRegression().fit(ds.points, ds.true_labels)
        acc = model.score(ds.points, ds.true_labels)
        assert 0.45 <= acc <= 0.60


class TestGenHalfKernel:
    def test_noiseless_points_lie_on_arcs(self):
        ds = gen_half_kernel(40, noise_sd=0.0, seed=0)
        norms = np.linalg.norm(ds.points, axis=1)
        np.testing.assert_allclose(norms[ds.true_labels == 0], 5.0, atol=1e-12)
        np.testing.assert_allclose(norms[ds.true_labels == 1], 8.0, atol=1e-12)

    def test_arcs_stay_in_upper_half_plane(self):
        ds = gen_half_kernel(200, noise_sd=0.0, seed=1)
        assert np.all(ds.points[:, 1] >= -1e-12)

    def test_balanced_classes(self):
        ds = gen_half_kernel(120, seed=2)
        np.testing.assert_array_equal(np.bincount(ds.true_labels), [60, 60])

    def test_custom_radii(self):
        ds = gen_half_kernel(20, noise_sd=0.0, seed=3, r_inner=2.0, r_outer=3.0)
        norms = np.linalg.norm(ds.points, axis=1)
        np.testing.assert_allclose(np.unique(np.round(norms, 9)), [2.0, 3.0])

    def test_deterministic(self):
        a = gen_half_kernel(60, seed=4)
        b = gen_half_kernel(60, seed=4)
        np.testing.assert_array_equal(a.points, b.points)

    def test_locally_smooth_labels(self):
        # leave-one-out nearest neighbor should almost never cross arcs
        ds = gen_half_kernel(600, noise_sd=0.5, seed=5)
        assert loo_nearest_neighbor_accuracy(ds) >= 0.98

    @pytest.mark.parametrize("n", [0, 1, 7])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ConfigError):
            gen_half_kernel(n, seed=0)

    def test_rejects_bad_radii(self):
        with pytest.raises(ConfigError):
            gen_half_kernel(10, seed=0, r_inner=8.0, r_outer=5.0)
        with pytest.raises(ConfigError):
            gen_half_kernel(10, seed=0, noise_sd=-0.1)


class TestBagSpec:
    def test_presets(self):
        assert preset_proportions("A") == (0.60, 0.40, 0.50)
        assert preset_proportions("B") == (0.85, 0.25, 0.40)
        with pytest.raises(ConfigError):
            preset_proportions("C")

    def test_validation(self):
        with pytest.raises(ConfigError):
            BagSpec(proportions=(0.5, 1.2), sizes=(5, 5))
        with pytest.raises(ConfigError):
            BagSpec(proportions=(0.5,), sizes=(5, 5))
        with pytest.raises(ConfigError):
            BagSpec(proportions=(0.5,), sizes=(0,))

    def test_totals(self):
        spec = BagSpec(proportions=(0.6, 0.4), sizes=(10, 20))
        assert spec.K == 2
        assert spec.n == 30


class TestSplitSizes:
    def test_even_split(self):
        assert split_sizes(600, 3) == (200, 200, 200)

    def test_largest_remainder(self):
        assert split_sizes(10, 3) == (4, 3, 3)
        assert split_sizes(11, 3) == (4, 4, 3)

    def test_rejects_impossible(self):
        with pytest.raises(ConfigError):
            split_sizes(2, 3)


class TestBagPositiveCounts:
    def test_exact_proportions(self):
        counts = bag_positive_counts((0.6, 0.4), (5, 5), 5, 5)
        np.testing.assert_array_equal(counts, [3, 2])

    def test_half_ties_flex_upward_when_pool_demands(self):
        # raw counts (1.5, 1.5): the pool of 3 positives forces one tie up
        counts = bag_positive_counts((0.5, 0.5), (3, 3), 3, 3)
        assert counts.sum() == 3
        assert sorted(counts.tolist()) == [1, 2]

    def test_ties_stay_down_when_pool_is_small(self):
        counts = bag_positive_counts((0.5, 0.5), (3, 3), 2, 4)
        np.testing.assert_array_equal(counts, [1, 1])

    def test_positive_deficit_reported(self):
        with pytest.raises(InfeasibleSpecError) as exc_info:
            bag_positive_counts((1.0, 1.0), (5, 5), 3, 7)
        assert exc_info.value.positive_deficit == 7

    def test_negative_deficit_reported(self):
        # the bags need 10 negatives and the pool holds 2
        with pytest.raises(InfeasibleSpecError) as exc_info:
            bag_positive_counts((0.0, 0.0), (5, 5), 8, 2)
        assert exc_info.value.negative_deficit == 8

    def test_unabsorbable_positives(self):
        # pool must be fully consumed but the bags round to fewer positives
        with pytest.raises(InfeasibleSpecError):
            bag_positive_counts((0.2, 0.2), (5, 5), 8, 2)


class TestAssignBags:
    def test_rounding_example(self):
        ds = Dataset(
            points=np.arange(20.0).reshape(10, 2),
            true_labels=[1, 1, 1, 1, 1, 0, 0, 0, 0, 0],
        )
        spec = BagSpec(proportions=(0.6, 0.4), sizes=(5, 5))
        bags = assign_bags(ds, spec, seed=0)
        np.testing.assert_allclose(bags.counts[:, 1], [3, 2])
        np.testing.assert_array_equal(bags.sizes, [5, 5])

    def test_single_pure_bag_is_identity_partition(self):
        ds = Dataset(points=np.zeros((6, 1)), true_labels=np.ones(6, dtype=int))
        bags = assign_bags(ds, BagSpec(proportions=(1.0,), sizes=(6,)), seed=1)
        np.testing.assert_array_equal(bags.assignment, np.zeros(6))
        np.testing.assert_allclose(bags.proportions, [[0.0, 1.0]])

    def test_proportion_fidelity(self):
        rng = np.random.default_rng(2)
        ds = gen_xor(120, seed=2)
        for trial in range(20):
            K = int(rng.integers(2, 5))
            sizes = split_sizes(120, K)
            proportions = tuple(np.round(rng.uniform(0.3, 0.7, K), 3))
            try:
                bags = assign_bags(ds, BagSpec(proportions, sizes), seed=trial)
            except InfeasibleSpecError:
                continue
            realized = bags.counts[:, 1] / bags.sizes
            assert np.all(
                np.abs(realized - np.array(proportions)) <= 0.5 / bags.sizes + 1e-12
            )

    def test_deterministic_and_seed_sensitive(self):
        ds = gen_xor(40, seed=3)
        spec = BagSpec(proportions=(0.6, 0.4), sizes=(20, 20))
        a = assign_bags(ds, spec, seed=5)
        b = assign_bags(ds, spec, seed=5)
        c = assign_bags(ds, spec, seed=6)
        np.testing.assert_array_equal(a.assignment, b.assignment)
        assert not np.array_equal(a.assignment, c.assignment)

    def test_requires_labels(self):
        ds = Dataset(points=np.zeros((4, 1)))
        with pytest.raises(ValueError, match="labels"):
            assign_bags(ds, BagSpec(proportions=(0.5,), sizes=(4,)), seed=0)

    def test_requires_binary(self):
        ds = Dataset(points=np.zeros((4, 1)), true_labels=[0, 1, 2, 2])
        with pytest.raises(ConfigError, match="binary"):
            assign_bags(ds, BagSpec(proportions=(0.5,), sizes=(4,)), seed=0)

    def test_size_mismatch(self):
        ds = gen_xor(40, seed=4)
        with pytest.raises(ConfigError, match="sum"):
            assign_bags(ds, BagSpec(proportions=(0.5,), sizes=(30,)), seed=0)

    def test_infeasible_pool(self):
        ds = Dataset(points=np.zeros((4, 1)), true_labels=[0, 0, 0, 0])
        with pytest.raises(InfeasibleSpecError):
            assign_bags(ds, BagSpec(proportions=(1.0,), sizes=(4,)), seed=0)
