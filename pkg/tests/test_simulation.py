import math

import numpy as np
import pytest

from lexalign import data_model as dm
from lexalign import rng, simulation
from lexalign.alignment import prototype_matrix, similarity_matrix
from lexalign.simulation import AggregationGrid, _relative_strength
from lexalign.synthetic import aligned_system, null_system


def test_curve_exhaustive_k_trajectories_identical():
    # with k == all exemplars every trajectory's prototype is the full centroid,
    # for any subsample seed; residual CI width is pure permutation-sampling noise
    # (each simulation draws a fresh permutation sample by design).
    system = aligned_system(n_words=10, n_visual=4, n_linguistic=3, seed=0)
    for seed in (1, 2):
        view = dm.subsample(system, 4, 3, seed)
        protos = np.vstack([view.selected(i, "visual")[:4].mean(axis=0) for i in range(10)])
        full = np.vstack([system.words[i].visual.mean(axis=0) for i in range(10)])
        assert np.allclose(protos, full, atol=1e-12)
    curve = simulation.aggregate_curve(
        system, "visual", max_k=4, fixed_other=3, n_sims=8, n_perms=4000, seed=1
    )
    top = curve.levels[-1]
    assert top.k == 4
    assert top.ci_hi - top.ci_lo < 0.05


def test_curve_levels_strictly_increasing_and_ci_bounds():
    system = aligned_system(n_words=12, seed=2)
    curve = simulation.aggregate_curve(
        system, "linguistic", max_k=3, fixed_other=5, n_sims=20, n_perms=60, seed=3
    )
    ks = [l.k for l in curve.levels]
    assert ks == [1, 2, 3]
    for l in curve.levels:
        assert l.ci_lo <= l.mean_relative_strength <= l.ci_hi
        assert l.n_sims == 20


def test_curve_aligned_system_improves_and_saturates():
    system = aligned_system(n_words=30, noise=4.0, seed=42)
    curve = simulation.aggregate_curve(
        system, "visual", max_k=8, fixed_other=20, n_sims=200, n_perms=200, seed=9, threads=2
    )
    means = [l.mean_relative_strength for l in curve.levels]
    halves = [(l.ci_hi - l.ci_lo) / 2 for l in curve.levels]
    assert means[-1] >= means[0]
    assert means[-1] > 0.95
    for a, b, h in zip(means, means[1:], halves[1:]):
        assert b >= a - 2 * max(h, 1e-3)  # non-decreasing within bootstrap tolerance


def test_curve_deterministic_and_thread_invariant():
    system = aligned_system(n_words=10, seed=4)
    kw = dict(mode="visual", max_k=3, fixed_other=4, n_sims=10, n_perms=50, seed=5)
    a = simulation.aggregate_curve(system, **kw, threads=1)
    b = simulation.aggregate_curve(system, **kw, threads=2)
    c = simulation.aggregate_curve(system, **kw, threads=1)
    assert a == b == c


def test_curve_rejects_bad_mode_and_counts():
    system = null_system(n_words=4, n_visual=2, n_linguistic=2, seed=6)
    with pytest.raises(ValueError):
        simulation.aggregate_curve(system, "both", 2, 2, 4, 10, 0)
    with pytest.raises(dm.SubsampleError, match="w000"):
        simulation.aggregate_curve(system, "visual", 3, 2, 4, 10, 0)


def test_trajectory_consistency_prefix_prototypes():
    # the level-k prototype equals the mean of the first k selected exemplars
    system = aligned_system(n_words=8, n_visual=5, n_linguistic=6, seed=7)
    master_seed, sim = 13, 0
    sim_seed = rng.mix(master_seed, sim)
    view = dm.subsample(system, 3, 4, rng.mix(sim_seed, 0))
    for k in (1, 2, 3):
        manual_protos = np.vstack(
            [view.selected(i, "visual")[:k].mean(axis=0) for i in range(8)]
        )
        fixed = np.vstack([view.selected(i, "linguistic").mean(axis=0) for i in range(8)])
        manual = _relative_strength(manual_protos, fixed, 40, rng.mix(sim_seed, k))
        curve = simulation.aggregate_curve(
            system, "visual", max_k=3, fixed_other=4, n_sims=1, n_perms=40, seed=master_seed
        )
        assert curve.levels[k - 1].mean_relative_strength == manual


def test_grid_1x1_matches_single_exemplar_estimate():
    system = aligned_system(n_words=12, noise=2.0, seed=8)
    grid = simulation.aggregate_grid(system, 1, 1, n_sims=300, n_perms=100, seed=21, threads=2)
    # independent estimate through the public single-view path
    vals = []
    for s in range(300):
        view = dm.subsample(system, 1, 1, rng.mix(77, s))
        pv = prototype_matrix(view, "visual")
        pl = prototype_matrix(view, "linguistic")
        vals.append(_relative_strength(pv, pl, 100, rng.mix(177, s)))
    assert abs(grid.means[0, 0] - np.mean(vals)) < 0.05


def test_grid_corner_improves_on_aligned_system():
    system = aligned_system(n_words=16, noise=4.0, seed=9)
    grid = simulation.aggregate_grid(system, 8, 8, n_sims=40, n_perms=100, seed=10, threads=2)
    assert grid.means.shape == (8, 8)
    assert grid.means[7, 7] >= grid.means[0, 0]


def test_grid_deterministic_across_worker_counts():
    system = aligned_system(n_words=8, seed=11)
    kw = dict(max_v=2, max_l=3, n_sims=15, n_perms=60, seed=12)
    a = simulation.aggregate_grid(system, **kw, threads=1)
    b = simulation.aggregate_grid(system, **kw, threads=2)
    assert np.array_equal(a.means, b.means)


def test_grid_symmetric_system_is_symmetric_within_tolerance():
    system = aligned_system(
        n_words=14, dim_visual=10, dim_linguistic=10, n_visual=8, n_linguistic=8,
        noise=3.0, seed=13,
    )
    grid = simulation.aggregate_grid(system, 3, 3, n_sims=800, n_perms=100, seed=14, threads=2)
    for v in range(3):
        for l in range(v + 1, 3):
            assert abs(grid.means[v, l] - grid.means[l, v]) < 0.03


def test_gradient_constant_surface_zero():
    grid = AggregationGrid(3, 3, 10, np.full((3, 3), 0.7))
    out = simulation.gradient_field(grid)
    assert np.array_equal(out.grad_v, np.zeros((3, 3)))
    assert np.array_equal(out.grad_l, np.zeros((3, 3)))


def test_gradient_linear_surface_diagonal():
    v, l = np.meshgrid(np.arange(4, dtype=float), np.arange(4, dtype=float), indexing="ij")
    out = simulation.gradient_field(AggregationGrid(4, 4, 10, v + l))
    inner = math.sqrt(2) / 2
    for i in range(1, 3):
        for j in range(1, 3):
            assert abs(out.grad_v[i, j] - inner) < 1e-12
            assert abs(out.grad_l[i, j] - inner) < 1e-12


def test_gradient_axis_aligned():
    v, _ = np.meshgrid(np.arange(3, dtype=float), np.arange(3, dtype=float), indexing="ij")
    out = simulation.gradient_field(AggregationGrid(3, 3, 10, v))
    assert np.array_equal(out.grad_v, np.ones((3, 3)))
    assert np.array_equal(out.grad_l, np.zeros((3, 3)))


def test_gradient_unit_norm_or_zero():
    g = np.random.default_rng(15)
    out = simulation.gradient_field(AggregationGrid(5, 4, 10, g.uniform(size=(5, 4))))
    mags = np.hypot(out.grad_v, out.grad_l)
    assert ((np.abs(mags - 1.0) < 1e-12) | (mags == 0.0)).all()


def test_gradient_requires_2x2():
    with pytest.raises(ValueError):
        simulation.gradient_field(AggregationGrid(1, 3, 10, np.zeros((1, 3))))


def test_curve_csv_format(tmp_path):
    system = aligned_system(n_words=8, seed=16)
    curve = simulation.aggregate_curve(
        system, "visual", max_k=2, fixed_other=3, n_sims=5, n_perms=30, seed=17
    )
    path = tmp_path / "aggregation.csv"
    simulation.write_curve_csv(curve, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == simulation.AGGREGATION_CSV_HEADER
    cells = lines[1].split(",")
    assert cells[0] == "visual" and cells[1] == "1" and cells[2] == "3"
    assert float(cells[3]) == curve.levels[0].mean_relative_strength


def test_grid_csv_format(tmp_path):
    system = aligned_system(n_words=8, seed=18)
    grid = simulation.gradient_field(
        simulation.aggregate_grid(system, 2, 2, n_sims=4, n_perms=30, seed=19)
    )
    path = tmp_path / "aggregation.csv"
    simulation.write_grid_csv(grid, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == simulation.AGGREGATION_CSV_HEADER + ",grad_v,grad_l"
    assert len(lines) == 5
    cells = lines[1].split(",")
    assert cells[0] == "grid" and cells[4] == "" and cells[5] == ""
    assert float(cells[3]) == grid.means[0, 0]
