import json
import math

import numpy as np
import pytest

from mcmreg.dataset import Dataset, fit_scaling, kfold_split
from mcmreg.harness import (CvReport, GridSearchError, HyperGrid, HyperPoint, _rank_key,
                            cross_validate, format_table, grid_search, loo_bound, report_json)
from mcmreg.mcm import Hyper, fit_linear, predict_linear


def line_data(M=50, slope=3.0, intercept=-2.0):
    x = np.linspace(-1, 1, M)
    return Dataset(x[:, None], slope * x + intercept)


def test_exact_line_cv():
    r = cross_validate(line_data(), HyperPoint(0.01, 100.0), k=5, seed=0, kind="linear")
    assert r.mse_mean <= 1e-3
    assert r.fold_failures == [None] * 5
    assert sum(r.fold_train_sizes) == 4 * 50


def test_leave_one_out():
    d = line_data(M=6)
    r = cross_validate(d, HyperPoint(0.05, 10.0), k=6, seed=0)
    assert r.fold_train_sizes == [5] * 6
    assert len(r.fold_mse) == 6


def test_no_leakage_into_scaling():
    # reproduce one fold by hand, with scaling fitted on its training part only
    rng = np.random.default_rng(3)
    X = rng.normal(size=(30, 2))
    y = X @ [1.0, -0.5] + 0.05 * rng.normal(size=30)
    plan = kfold_split(30, 5, seed=7)
    X[plan.validation_indices(2)[0]] = [50.0, -40.0]  # outlier seen only as validation in fold 2
    d = Dataset(X, y)
    r = cross_validate(d, HyperPoint(0.1, 1.0), k=5, seed=7)
    train, val = d.subset(plan.train_indices(2)), d.subset(plan.validation_indices(2))
    sc = fit_scaling(train)
    m = fit_linear(sc.apply(train), Hyper(0.1, 1.0))
    err = predict_linear(m, sc.transform_features(val.features)) - sc.transform_targets(val.targets)
    assert r.fold_mse[2] == pytest.approx(float(np.mean(err**2)), rel=1e-12)


def test_raw_units_rescale():
    d = line_data()
    a = cross_validate(d, HyperPoint(0.05, 1.0), seed=1)
    b = cross_validate(d, HyperPoint(0.05, 1.0), seed=1, raw_units=True)
    plan = kfold_split(d.n_samples, 5, seed=1)
    stds = [fit_scaling(d.subset(plan.train_indices(f))).target_std for f in range(5)]
    assert b.fold_mse == pytest.approx([m * s**2 for m, s in zip(a.fold_mse, stds)], rel=1e-12)


def test_singleton_grid_equals_cv():
    d = line_data()
    grid = HyperGrid(C_values=(10.0,), epsilon_values=(0.05,))
    best, rep, table = grid_search(d, grid, k=5, seed=3)
    direct = cross_validate(d, HyperPoint(0.05, 10.0, None), k=5, seed=3)
    assert best == rep.chosen_hyper == HyperPoint(0.05, 10.0, None)
    assert len(table) == 1
    assert rep.fold_mse == direct.fold_mse


def test_grid_order_and_kernel_points():
    grid = HyperGrid(C_values=(1.0, 10.0), epsilon_values=(0.1, 0.2), gamma_values=(0.5, 1.0))
    assert len(grid.points("linear")) == 4
    pts = grid.points("kernel")
    assert len(pts) == 8
    assert [(p.C, p.gamma, p.epsilon) for p in pts[:3]] == [(1.0, 0.5, 0.1), (1.0, 0.5, 0.2),
                                                           (1.0, 1.0, 0.1)]


@pytest.mark.parametrize("values", [(), (1.0, 0.5), (0.0, 1.0), (-1.0,)])
def test_grid_validation(values):
    with pytest.raises(ValueError):
        HyperGrid(C_values=values)


def report(mse, sv, C=1.0, gamma=1.0, eps=0.1):
    return CvReport("kernel", HyperPoint(eps, C, gamma), 2, 0, [mse, mse], [None, None], [10, 10],
                    [sv, sv])


def test_tie_break_order():
    a, b = report(0.5, 4), report(0.5, 3)
    assert min([a, b], key=_rank_key) is b
    c, d = report(0.5, 3, C=10.0), report(0.5, 3, C=1.0)
    assert min([c, d], key=_rank_key) is d
    e, f = report(0.5, 3, gamma=2.0), report(0.5, 3, gamma=0.5)
    assert min([e, f], key=_rank_key) is f
    g, h = report(0.4, 9), report(0.5, 1)
    assert min([g, h], key=_rank_key) is g


@pytest.mark.parametrize("sv,n,expected", [(0, 100, 0.0), (100, 100, 1.0), (26.8, 318, 0.0843)])
def test_loo_bound(sv, n, expected):
    assert loo_bound(sv, n) == pytest.approx(expected, abs=5e-5)


@pytest.mark.parametrize("sv,n", [(-1, 10), (11, 10), (0, 0)])
def test_loo_bound_domain(sv, n):
    with pytest.raises(ValueError):
        loo_bound(sv, n)


def test_report_aggregates():
    r = CvReport("kernel", HyperPoint(0.1, 1.0, 1.0), 3, 0, [1.0, 3.0, math.nan],
                 [None, None, "TrainingError: x"], [8, 8, 8], [2, 4, None])
    assert r.mse_mean == 2.0
    assert r.mse_std == pytest.approx(math.sqrt(2.0))
    assert r.sv_mean == 3.0
    assert r.loo_bound == pytest.approx(3.0 / 8.0)
    d = r.to_dict()
    assert d["fold_mse"][2] is None
    assert json.loads(json.dumps(d)) == d


def test_linear_report_has_no_loo_bound():
    r = cross_validate(line_data(), HyperPoint(0.05, 1.0), seed=0)
    assert math.isnan(r.loo_bound) and r.to_dict()["loo_bound"] is None


def test_gamma_recovery():
    rng = np.random.default_rng(0)
    X = rng.uniform(-3, 3, size=(60, 2))
    centers, a = rng.uniform(-3, 3, size=(8, 2)), rng.normal(size=8)
    true_gamma = 0.125
    y = np.exp(-true_gamma * ((X[:, None, :] - centers[None]) ** 2).sum(-1)) @ a
    grid = HyperGrid(C_values=(1.0,), epsilon_values=(0.05,),
                     gamma_values=tuple(2.0**p for p in range(-5, 3)))
    best, _, _ = grid_search(Dataset(X, y), grid, k=5, seed=0, kind="kernel", standardize=False)
    assert true_gamma / 2 <= best.gamma <= true_gamma * 2


def test_fold_failures_are_marked():
    # duplicated inputs with conflicting targets defeat the hard margin in every fold
    X = np.repeat(np.arange(5.0), 2)[:, None]
    y = np.tile([0.0, 5.0], 5)
    r = cross_validate(Dataset(X, y), HyperPoint(0.1), k=2, seed=0)
    assert all(f is not None and "InfeasibleTrainingError" in f for f in r.fold_failures)
    assert math.isnan(r.mse_mean)


def test_all_failed_grid_raises():
    X = np.repeat(np.arange(5.0), 2)[:, None]
    y = np.tile([0.0, 5.0], 5)
    grid = HyperGrid(C_values=(1e-6,), epsilon_values=(0.1,))
    with pytest.raises(GridSearchError) as info:
        grid_search(Dataset(X, y), grid, k=2, seed=0)
    assert len(info.value.diagnostics) == 1


def test_determinism():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(40, 3))
    d = Dataset(X, np.sin(X[:, 0]) + 0.1 * rng.normal(size=40))
    grid = HyperGrid(C_values=(0.1, 1.0), epsilon_values=(0.05, 0.1), gamma_values=(0.5, 1.0))
    runs = [report_json(*grid_search(d, grid, k=3, seed=5, kind="kernel")[1:],
                        include_timings=False) for _ in range(2)]
    assert runs[0] == runs[1]
    assert "wall_time" not in runs[0]


def test_format_table_marks_best():
    d = line_data()
    grid = HyperGrid(C_values=(1.0, 10.0), epsilon_values=(0.05,))
    _, best, table = grid_search(d, grid, k=3, seed=0)
    lines = format_table(table, best).splitlines()
    assert sum(line.startswith("*") for line in lines) == 1
    assert len(lines) == 2 + len(table)  # header and rule
