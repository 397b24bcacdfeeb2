import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from mcmreg.dataset import (Dataset, DatasetError, ScalingParams, fit_scaling, kfold_split,
                            load_csv, load_features_csv, standardize, write_csv)


def write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_three_rows(tmp_path):
    d = load_csv(write(tmp_path, "1,2\n3,4\n5,6"))
    assert d.features.tolist() == [[1], [3], [5]]
    assert d.targets.tolist() == [2, 4, 6]
    assert d.feature_names is None


def test_load_with_header(tmp_path):
    d = load_csv(write(tmp_path, "x,y\n1,2\n"), has_header=True)
    assert (d.n_samples, d.n_features) == (1, 1)
    assert d.feature_names == ("x",)


@pytest.mark.parametrize("target,features,targets", [
    ("last", [[1, 2], [4, 5]], [3, 6]),
    (0, [[2, 3], [5, 6]], [1, 4]),
    (1, [[1, 3], [4, 6]], [2, 5]),
    (-2, [[1, 3], [4, 6]], [2, 5]),
])
def test_target_column_choice(tmp_path, target, features, targets):
    d = load_csv(write(tmp_path, "1,2,3\n4,5,6\n"), target_column=target)
    assert d.features.tolist() == features
    assert d.targets.tolist() == targets


@pytest.mark.parametrize("text,match", [
    ("1,2\n3,abc\n", r"'abc' at row 2, column 2"),
    ("1,2\n3,4,5\n", "row 2 has 3 cells"),
    ("", "no data rows"),
    ("1,nan\n", "NaN or Inf"),
    ("1\n2\n", "target column"),
])
def test_load_errors(tmp_path, text, match):
    with pytest.raises(DatasetError, match=match):
        load_csv(write(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(DatasetError, match="cannot read"):
        load_csv(tmp_path / "absent.csv")


def test_features_only_csv(tmp_path):
    assert load_features_csv(write(tmp_path, "")).shape == (0, 0)
    assert load_features_csv(write(tmp_path, "a,b\n1,2\n"), has_header=True).tolist() == [[1, 2]]


def test_dataset_invariants():
    with pytest.raises(DatasetError):
        Dataset(np.ones((3, 2)), np.ones(2))
    with pytest.raises(DatasetError):
        Dataset(np.zeros((0, 2)), np.zeros(0))
    d = Dataset([1.0, 2.0], [3.0, 4.0])
    assert d.features.shape == (2, 1)
    with pytest.raises(ValueError):
        d.features[0, 0] = 9.0


def test_two_point_targets():
    ds, params = standardize(Dataset([[0.0], [1.0]], [1.0, 3.0]))
    assert ds.targets == pytest.approx([-0.7071067811865475, 0.7071067811865475], abs=1e-12)
    assert params.target_std == pytest.approx(np.sqrt(2.0))  # sample std of {1, 3}


def test_constant_column_passes_through(caplog):
    d = Dataset([[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]], [1.0, 2.0, 3.0])
    with caplog.at_level(logging.WARNING):
        ds, params = standardize(d)
    assert ds.features[:, 0].tolist() == [5.0, 5.0, 5.0]
    assert params.feature_stds[0] == 1.0
    assert params.constant_columns == (0,)
    assert "constant" in caplog.text


def test_standardize_needs_two_samples():
    with pytest.raises(DatasetError):
        standardize(Dataset([[1.0]], [1.0]))


@settings(max_examples=50, deadline=None)
@given(hnp.arrays(np.float64, st.tuples(st.integers(2, 12), st.integers(1, 4)),
                  elements=st.floats(-1e3, 1e3)))
def test_standardize_round_trip(data):
    d = Dataset(data, data[:, 0] * 2.0 - 1.0)
    ds, params = standardize(d)
    back = params.invert(ds)
    assert np.max(np.abs(back.features - d.features)) <= 1e-12 * (1 + np.abs(data).max())
    assert np.max(np.abs(back.targets - d.targets)) <= 1e-12 * (1 + np.abs(d.targets).max())
    for j in range(d.n_features):
        if j not in params.constant_columns:
            assert ds.features[:, j].mean() == pytest.approx(0.0, abs=1e-9)
            assert ds.features[:, j].std(ddof=1) == pytest.approx(1.0, abs=1e-9)


def test_scaling_params_dict_round_trip():
    params = fit_scaling(Dataset([[1.0, 2.0], [3.0, 7.0], [4.0, 0.5]], [1.0, 0.0, 2.0]))
    again = ScalingParams.from_dict(params.to_dict())
    assert np.array_equal(again.feature_means, params.feature_means)
    assert np.array_equal(again.feature_stds, params.feature_stds)
    assert again.target_std == params.target_std


@pytest.mark.parametrize("M,k,sizes", [(10, 5, [2] * 5), (7, 5, [2, 2, 1, 1, 1]), (6, 6, [1] * 6)])
def test_fold_sizes(M, k, sizes):
    plan = kfold_split(M, k, seed=0)
    assert plan.sizes() == sizes
    folds = [set(plan.validation_indices(f).tolist()) for f in range(k)]
    assert set().union(*folds) == set(range(M))
    assert sum(len(f) for f in folds) == M


def test_fold_plan_deterministic():
    a = kfold_split(50, 5, seed=42).assignments
    b = kfold_split(50, 5, seed=42).assignments
    c = kfold_split(50, 5, seed=43).assignments
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_fold_plan_is_shuffled():
    assert not np.array_equal(kfold_split(40, 4, seed=1).assignments, np.arange(40) % 4)


@pytest.mark.parametrize("k", [1, 11])
def test_fold_count_errors(k):
    with pytest.raises(DatasetError):
        kfold_split(10, k, seed=0)


@settings(max_examples=40, deadline=None)
@given(M=st.integers(2, 60), k=st.integers(2, 60), seed=st.integers(0, 10**6))
def test_fold_partition_properties(M, k, seed):
    if k > M:
        return
    plan = kfold_split(M, k, seed)
    sizes = plan.sizes()
    assert sum(sizes) == M and min(sizes) >= 1 and max(sizes) - min(sizes) <= 1
    for f in range(k):
        train, val = plan.train_indices(f), plan.validation_indices(f)
        assert len(np.intersect1d(train, val)) == 0 and len(train) + len(val) == M


def test_write_then_load_is_identity(tmp_path):
    rng = np.random.default_rng(0)
    d = Dataset(rng.normal(size=(6, 3)) * 1e-7, rng.normal(size=6) * 1e9, ("a", "b", "c"))
    path = tmp_path / "out.csv"
    write_csv(d, path)
    back = load_csv(path, has_header=True)
    assert np.array_equal(back.features, d.features)
    assert np.array_equal(back.targets, d.targets)
    assert back.feature_names == d.feature_names
