import itertools

import numpy as np
import pytest

from cvpool.dataset import (
    Dataset,
    FoldAssignment,
    HoldoutSplit,
    SynthConfig,
    stratified_holdout,
    stratified_kfold,
    synthesize_dataset,
)
from cvpool.errors import DataError
from cvpool.rng import derive_rng
from cvpool.selection import (
    LossTable,
    build_loss_table,
    enumerate_subsets,
    finalize_model,
    pool_losses,
    select_classic,
    select_pooled,
    train_cell,
    validate_subset,
)
from cvpool.svm import TrainConfig


def make_table(losses, subsets, val_counts=None):
    losses = np.asarray(losses, dtype=np.float64)
    K, S = losses.shape
    if val_counts is None:
        val_counts = np.full(K, 8, dtype=np.int64)
    return LossTable(
        losses=losses,
        val_counts=np.asarray(val_counts, dtype=np.int64),
        subsets=tuple(subsets),
        convergence_flags=np.ones((K, S), dtype=bool),
        degenerate_flags=np.zeros((K, S), dtype=bool),
    )


class TestEnumerateSubsets:
    def test_sixteen_choose_up_to_two_is_136(self):
        subsets = enumerate_subsets(16, 2)
        assert len(subsets) == 136
        assert subsets[:16] == [(j,) for j in range(16)]
        assert subsets[16] == (0, 1)
        assert subsets[-1] == (14, 15)

    def test_three_choose_up_to_two(self):
        assert enumerate_subsets(3, 2) == [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]

    def test_singletons_only(self):
        assert enumerate_subsets(5, 1) == [(j,) for j in range(5)]

    def test_size_then_lex_order(self):
        subsets = enumerate_subsets(6, 3)
        keys = [(len(s), s) for s in subsets]
        assert keys == sorted(keys)

    def test_preconditions(self):
        with pytest.raises(DataError):
            enumerate_subsets(0, 1)
        with pytest.raises(DataError):
            enumerate_subsets(4, 5)
        with pytest.raises(DataError):
            enumerate_subsets(4, 0)

    def test_validate_subset(self):
        assert validate_subset((1, 3), 5) == (1, 3)
        with pytest.raises(DataError):
            validate_subset((3, 1), 5)
        with pytest.raises(DataError):
            validate_subset((1, 5), 5)
        with pytest.raises(DataError):
            validate_subset((), 5)


@pytest.fixture(scope="module")
def paper_table():
    ds = synthesize_dataset(
        SynthConfig(n_per_class=(31, 25), d=16, planted=((10, 1.2),), seed=21)
    )
    split = stratified_holdout(ds.labels, 0.3, derive_rng(21, "holdout"))
    folds = stratified_kfold(ds.labels, split.dev_indices, 5, derive_rng(21, "folds"))
    subsets = enumerate_subsets(16, 2)
    table = build_loss_table(ds, split, folds, subsets)
    return ds, split, folds, table


class TestBuildLossTable:
    def test_shape_and_granularity(self, paper_table):
        _, _, _, table = paper_table
        assert table.losses.shape == (5, 136)
        assert table.val_counts.tolist() == [8, 8, 8, 8, 8]
        assert int(table.val_counts.sum()) == 40
        # every loss is a multiple of 1/8
        assert np.all(table.losses * 8 == np.round(table.losses * 8))
        assert np.all((table.losses >= 0) & (table.losses <= 1))

    def test_order_independence(self, paper_table):
        ds, split, folds, table = paper_table
        perm = np.random.default_rng(3).permutation(136)
        shuffled = [table.subsets[p] for p in perm]
        table2 = build_loss_table(ds, split, folds, shuffled)
        unshuffled = np.empty_like(table2.losses)
        unshuffled[:, perm] = table2.losses
        assert np.array_equal(unshuffled, table.losses)

    def test_planted_singleton_pools_low(self):
        for seed in range(5):
            ds = synthesize_dataset(
                SynthConfig(n_per_class=(31, 25), d=6, planted=((2, 6.0),), seed=seed)
            )
            split = stratified_holdout(ds.labels, 0.3, derive_rng(seed, "holdout"))
            folds = stratified_kfold(ds.labels, split.dev_indices, 5, derive_rng(seed, "folds"))
            subsets = enumerate_subsets(6, 2)
            table = build_loss_table(ds, split, folds, subsets)
            pooled = pool_losses(table)
            assert pooled[subsets.index((2,))] <= 0.1

    def test_degenerate_cell_flagged_not_fatal(self):
        # put the only negative dev sample in fold 0: training fold 0's cell
        # sees a single class and must score loss 1 with the flag set
        X = np.arange(12, dtype=np.float64).reshape(6, 2)
        ds = Dataset(X, [1, 1, 1, 1, 1, -1], ("a", "b"))
        split = HoldoutSplit(dev_indices=tuple(range(6)), test_indices=())
        folds = FoldAssignment(folds=((5, 0), (1, 2), (3, 4)))
        table = build_loss_table(ds, split, folds, [(0,), (1,)])
        assert np.all(table.losses[0] == 1.0)
        assert np.all(table.degenerate_flags[0])
        assert not np.any(table.degenerate_flags[1:])


class TestPoolLosses:
    def test_equal_folds_is_plain_mean(self):
        table = make_table(np.array([[0.25], [0.125], [0.25], [0.375], [0.25]]), [(0,)])
        assert pool_losses(table)[0] == 0.25

    def test_weighted_by_validation_counts(self):
        table = make_table(np.array([[0.25], [0.5]]), [(0,)], val_counts=[8, 4])
        assert abs(pool_losses(table)[0] - 1 / 3) < 1e-15

    def test_zero_column(self):
        table = make_table(np.zeros((3, 1)), [(0,)])
        assert pool_losses(table)[0] == 0.0

    def test_equals_direct_error_counting(self, paper_table):
        _, _, _, table = paper_table
        errors = np.round(table.losses * table.val_counts[:, None])
        expected = errors.sum(axis=0) / table.val_counts.sum()
        assert np.allclose(pool_losses(table), expected, atol=1e-12)


class TestSelectClassic:
    SUBSETS = [(0,), (1,), (0, 1)]

    def test_fold_tie_broken_low_then_subset(self):
        table = make_table([[0.25, 0.125, 0.25], [0.125, 0.25, 0.375]], self.SUBSETS)
        assert select_classic(table) == (0, 1)

    def test_unique_minimum(self):
        table = make_table([[0.5, 0.5], [0.25, 0.5]], [(0,), (1,)])
        assert select_classic(table) == (1, 0)

    def test_all_equal_degenerate_tie(self):
        table = make_table(np.full((3, 3), 0.5), self.SUBSETS)
        assert select_classic(table) == (0, 0)

    def test_subset_tie_prefers_smaller_size(self):
        # fold 0 best; sizes 2 and 1 tie on loss -> singleton wins
        table = make_table([[0.125, 0.125, 0.5]], [(0, 1), (2,), (0,)])
        k, s = select_classic(table)
        assert (k, s) == (0, 1)


class TestSelectPooled:
    def test_size_tie_break(self):
        table = make_table([[0.25, 0.25], [0.25, 0.25]], [(0,), (1, 2)])
        s, k = select_pooled(table)
        assert s == 0  # smaller subset
        assert k == 0

    def test_best_pooled_then_best_fold(self):
        table = make_table([[0.4, 0.0], [0.2, 0.2]], [(0,), (1,)])
        s, k = select_pooled(table)
        assert (s, k) == (1, 0)

    def test_lexicographic_tie_on_equal_size(self):
        table = make_table([[0.25, 0.25]], [(1,), (0,)])
        s, _ = select_pooled(table)
        assert table.subsets[s] == (0,)


class TestSelectorProperties:
    def test_permutation_invariance(self, rng):
        subsets = enumerate_subsets(5, 2)
        losses = rng.integers(0, 9, size=(4, len(subsets))) / 8.0
        table = make_table(losses, subsets)
        k0, s0 = select_classic(table)
        sp0, kp0 = select_pooled(table)
        for _ in range(10):
            perm = rng.permutation(len(subsets))
            shuffled = make_table(losses[:, perm], [subsets[p] for p in perm])
            k1, s1 = select_classic(shuffled)
            sp1, kp1 = select_pooled(shuffled)
            assert (k1, shuffled.subsets[s1]) == (k0, table.subsets[s0])
            assert (shuffled.subsets[sp1], kp1) == (table.subsets[sp0], kp0)

    def test_k1_table_both_recipes_agree(self, rng):
        subsets = enumerate_subsets(6, 2)
        losses = rng.integers(0, 9, size=(1, len(subsets))) / 8.0
        table = make_table(losses, subsets)
        k, s = select_classic(table)
        sp, kp = select_pooled(table)
        assert (k, s) == (kp, sp)

    def test_dominant_column_wins_both(self, rng):
        subsets = enumerate_subsets(4, 2)
        losses = rng.uniform(0.3, 1.0, size=(5, len(subsets)))
        losses[:, 7] = rng.uniform(0.0, 0.2, size=5)  # strictly dominates
        table = make_table(losses, subsets)
        _, s = select_classic(table)
        sp, _ = select_pooled(table)
        assert s == 7
        assert sp == 7


class TestFinalizeModel:
    def test_retraining_is_bit_identical(self, paper_table):
        ds, split, folds, table = paper_table
        k, s = select_classic(table)
        subset = table.subsets[s]
        train_idx = [i for i in split.dev_indices if i not in set(folds.folds[k])]
        cell_a = train_cell(ds, train_idx, folds.folds[k], subset, TrainConfig(), True)
        cell_b = finalize_model(ds, split, folds, k, subset)
        assert np.array_equal(cell_a.model.weights, cell_b.model.weights)
        assert np.array_equal(cell_a.model.alphas, cell_b.model.alphas)
        assert cell_a.model.bias == cell_b.model.bias
        assert cell_a.val_loss == table.losses[k, s]

    def test_test_loss_is_multiple_of_one_sixteenth(self, paper_table):
        ds, split, folds, table = paper_table
        s, k = select_pooled(table)
        cell = finalize_model(ds, split, folds, k, table.subsets[s])
        test_rows = np.asarray(split.test_indices)
        assert test_rows.size == 16
        from cvpool.svm import predict, zero_one_loss
        from cvpool.dataset import apply_standardizer

        Xt = np.ascontiguousarray(ds.features[test_rows][:, table.subsets[s]])
        Xt = apply_standardizer(cell.standardizer, Xt)
        loss = zero_one_loss(predict(cell.model, Xt), ds.labels[test_rows])
        assert loss * 16 == round(loss * 16)

    def test_fold_out_of_range(self, paper_table):
        ds, split, folds, _ = paper_table
        with pytest.raises(DataError):
            finalize_model(ds, split, folds, 7, (0,))


def test_pooled_selects_planted_feature_and_generalizes():
    from cvpool.dataset import apply_standardizer
    from cvpool.svm import predict, zero_one_loss

    subset_hits = 0
    loss_hits = 0
    seeds = 50
    for seed in range(seeds):
        ds = synthesize_dataset(
            SynthConfig(n_per_class=(16, 14), d=5, planted=((3, 6.0),), seed=seed)
        )
        split = stratified_holdout(ds.labels, 0.3, derive_rng(seed, "holdout"))
        folds = stratified_kfold(ds.labels, split.dev_indices, 5, derive_rng(seed, "folds"))
        table = build_loss_table(ds, split, folds, enumerate_subsets(5, 2))
        s, k = select_pooled(table)
        if 3 in table.subsets[s]:
            subset_hits += 1
        cell = finalize_model(ds, split, folds, k, table.subsets[s])
        rows = np.asarray(split.test_indices)
        Xt = np.ascontiguousarray(ds.features[rows][:, table.subsets[s]])
        Xt = apply_standardizer(cell.standardizer, Xt)
        if zero_one_loss(predict(cell.model, Xt), ds.labels[rows]) <= 0.2:
            loss_hits += 1
    assert subset_hits >= 0.9 * seeds
    assert loss_hits >= 0.9 * seeds
