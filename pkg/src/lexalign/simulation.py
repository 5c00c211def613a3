"""Exemplar-aggregation campaigns: curves, 2-D grids, and gradient fields.

Each simulation is an incremental trajectory: one subsample of the system is
drawn per simulation and the level-k prototype is the mean of the first k
selected exemplars (the subsample's prefix property makes levels nested).
Relative alignment strength at each level is measured against a fresh sample
of permuted mappings.  Tasks are seeded as mix(master, cell_index, sim_index)
for grids and mix(master, sim_index) for curves, and results are reduced in
task order, so outputs are byte-identical for any worker count.

Permuted-vs-true comparisons run in the exact integer cross-sum domain (see
alignment): counting T_perm < T_true is the same ordering as comparing
Spearman values, with no floating-point tie hazards.
"""

from __future__ import annotations

import concurrent.futures
import multiprocessing
from dataclasses import dataclass

import numpy as np

from . import rng
from ._kernels import permuted_cross_sums
from .alignment import _RankedPair
from .data_model import LexicalSystem, SubsampleError, subsample
from .stats import DegenerateDataError, percentile_ci

_BOOT_TAG = 1 << 40
BOOTSTRAP_RESAMPLES = 1000
CI_LEVEL = 0.95


@dataclass(frozen=True)
class CurveLevel:
    k: int
    mean_relative_strength: float
    ci_lo: float
    ci_hi: float
    n_sims: int


@dataclass(frozen=True)
class AggregationCurve:
    mode: str
    fixed_other_count: int
    levels: tuple[CurveLevel, ...]


@dataclass(frozen=True)
class AggregationGrid:
    max_v: int
    max_l: int
    n_sims: int
    means: np.ndarray  # (max_v, max_l), cell (v, l) at [v-1, l-1]
    grad_v: np.ndarray | None = None
    grad_l: np.ndarray | None = None


_SHARED: dict = {}


def _check_counts(system: LexicalSystem, need_visual: int, need_linguistic: int) -> None:
    for w in system.words:
        if len(w.visual) < need_visual:
            raise SubsampleError(
                f"word {w.word!r}: needs {need_visual} visual exemplars, has {len(w.visual)}"
            )
        if len(w.linguistic) < need_linguistic:
            raise SubsampleError(
                f"word {w.word!r}: needs {need_linguistic} linguistic exemplars, "
                f"has {len(w.linguistic)}"
            )


def _prepare_shared(system: LexicalSystem) -> None:
    """Stash the system (and, for uniform exemplar counts, dense cubes) before
    the worker pool forks, so children inherit them copy-on-write."""
    _SHARED.clear()
    _SHARED["system"] = system
    for modality in ("visual", "linguistic"):
        mats = [system.exemplars(i, modality) for i in range(system.n_words)]
        if len({len(m) for m in mats}) == 1:
            _SHARED[f"cube_{modality}"] = np.stack(mats)


def _selected_stack(view, modality: str, k: int) -> np.ndarray:
    """(n_words, k, d) array of each word's first k selected exemplars."""
    cube = _SHARED.get(f"cube_{modality}")
    if cube is not None and cube.shape[0] == view.n_words:
        sel = view.visual_sel if modality == "visual" else view.linguistic_sel
        idx = np.stack(sel)[:, :k]
        return cube[np.arange(view.n_words)[:, None], idx]
    return np.stack([view.selected(i, modality)[:k] for i in range(view.n_words)])


def _cosine_triu(protos: np.ndarray) -> np.ndarray:
    """Strict upper triangle of the prototypes' cosine gram matrix.

    Lean path for the Monte Carlo inner loop: ranks only depend on the value
    order, so the clamping and exact mirroring of similarity_matrix are not
    needed here.
    """
    norms = np.linalg.norm(protos, axis=1)
    if (norms == 0.0).any():
        raise DegenerateDataError("zero-norm prototype in simulation")
    unit = protos / norms[:, None]
    iu = np.triu_indices(len(protos), k=1)
    return (unit @ unit.T)[iu]


def _relative_strength(proto_v: np.ndarray, proto_l: np.ndarray, n_perms: int, seed: int) -> float:
    """Fraction of permuted mappings ranked strictly below the true one.

    Comparisons run on exact integer cross-sums: T is a strictly increasing
    map of the Spearman statistic because the rank multisets are permutation
    invariant, so counting T_perm < T_true equals counting rho_perm < rho_true
    with no floating-point ties.
    """
    n = len(proto_v)
    ranked = _RankedPair.from_triu(_cosine_triu(proto_v), _cosine_triu(proto_l), n)
    t_true = float(ranked.x2 @ ranked.y2)
    perms = rng.nonidentity_permutations(seed, n_perms, n)
    sums = permuted_cross_sums(perms, ranked.x_full, ranked.y_full)
    return float(np.count_nonzero(sums < t_true)) / n_perms


def _curve_chunk(args) -> np.ndarray:
    mode, max_k, fixed_other, n_perms, seed, lo, hi = args
    system = _SHARED["system"]
    out = np.empty((hi - lo, max_k))
    for row, s in enumerate(range(lo, hi)):
        sim_seed = rng.mix(seed, s)
        if mode == "visual":
            view = subsample(system, max_k, fixed_other, rng.mix(sim_seed, 0))
        else:
            view = subsample(system, fixed_other, max_k, rng.mix(sim_seed, 0))
        varying = _selected_stack(view, mode, max_k)
        prefixes = np.cumsum(varying, axis=1) / np.arange(1, max_k + 1)[None, :, None]
        other_mod = "linguistic" if mode == "visual" else "visual"
        fixed_proto = _selected_stack(view, other_mod, fixed_other).mean(axis=1)
        for k in range(1, max_k + 1):
            vary_proto = prefixes[:, k - 1, :]
            pv, pl = (vary_proto, fixed_proto) if mode == "visual" else (fixed_proto, vary_proto)
            out[row, k - 1] = _relative_strength(pv, pl, n_perms, rng.mix(sim_seed, k))
    return out


def _grid_cell(args) -> float:
    v, l, cell_index, n_sims, n_perms, seed = args
    system = _SHARED["system"]
    total = 0.0
    for s in range(n_sims):
        task_seed = rng.mix(seed, cell_index, s)
        view = subsample(system, v, l, rng.mix(task_seed, 0))
        pv = _selected_stack(view, "visual", v).mean(axis=1)
        pl = _selected_stack(view, "linguistic", l).mean(axis=1)
        total += _relative_strength(pv, pl, n_perms, rng.mix(task_seed, 1))
    return total / n_sims


def _run_tasks(fn, args_list, threads: int) -> list:
    if threads <= 1 or len(args_list) <= 1:
        return [fn(a) for a in args_list]
    try:
        ctx = multiprocessing.get_context("fork")
    except ValueError:  # pragma: no cover - non-posix
        return [fn(a) for a in args_list]
    with concurrent.futures.ProcessPoolExecutor(max_workers=threads, mp_context=ctx) as ex:
        return list(ex.map(fn, args_list))


def _bootstrap_ci(values: np.ndarray, seed: int) -> tuple[float, float]:
    """Percentile bootstrap of the mean (with-replacement resamples)."""
    n = len(values)
    if (values == values[0]).all():
        return float(values[0]), float(values[0])
    u = rng.doubles(seed, BOOTSTRAP_RESAMPLES * n).reshape(BOOTSTRAP_RESAMPLES, n)
    idx = np.minimum((u * n).astype(np.int64), n - 1)
    means = values[idx].mean(axis=1)
    return percentile_ci(means, CI_LEVEL)


def aggregate_curve(
    system: LexicalSystem,
    mode: str,
    max_k: int,
    fixed_other: int = 20,
    n_sims: int = 1000,
    n_perms: int = 1000,
    seed: int = 0,
    threads: int = 1,
) -> AggregationCurve:
    """Relative alignment strength vs number of aggregated exemplars (one modality)."""
    if mode not in ("visual", "linguistic"):
        raise ValueError(f"mode must be visual or linguistic, got {mode!r}")
    if max_k < 1:
        raise ValueError("max_k must be >= 1")
    if mode == "visual":
        _check_counts(system, max_k, fixed_other)
    else:
        _check_counts(system, fixed_other, max_k)

    _prepare_shared(system)
    chunk = max(1, -(-n_sims // (max(threads, 1) * 8)))
    bounds = [(lo, min(lo + chunk, n_sims)) for lo in range(0, n_sims, chunk)]
    parts = _run_tasks(
        _curve_chunk,
        [(mode, max_k, fixed_other, n_perms, seed, lo, hi) for lo, hi in bounds],
        threads,
    )
    values = np.vstack(parts)  # (n_sims, max_k)

    levels = []
    for k in range(1, max_k + 1):
        col = values[:, k - 1]
        lo, hi = _bootstrap_ci(col, rng.mix(seed, _BOOT_TAG, k))
        levels.append(CurveLevel(k, float(col.mean()), lo, hi, n_sims))
    return AggregationCurve(mode, fixed_other, tuple(levels))


def aggregate_grid(
    system: LexicalSystem,
    max_v: int,
    max_l: int,
    n_sims: int = 500,
    n_perms: int = 1000,
    seed: int = 0,
    threads: int = 1,
) -> AggregationGrid:
    """Mean relative alignment strength over the (visual, linguistic) count grid."""
    if max_v < 1 or max_l < 1:
        raise ValueError("grid extents must be >= 1")
    _check_counts(system, max_v, max_l)

    _prepare_shared(system)
    tasks = []
    for v in range(1, max_v + 1):
        for l in range(1, max_l + 1):
            cell_index = (v - 1) * max_l + (l - 1)
            tasks.append((v, l, cell_index, n_sims, n_perms, seed))
    results = _run_tasks(_grid_cell, tasks, threads)
    means = np.asarray(results).reshape(max_v, max_l)
    return AggregationGrid(max_v, max_l, n_sims, means)


def gradient_field(grid: AggregationGrid) -> AggregationGrid:
    """Unit-normalised gradient of the mean surface, unit cell spacing.

    Central differences in the interior, one-sided at the edges; cells whose
    raw gradient is (0, 0) keep an exactly zero vector.
    """
    if grid.max_v < 2 or grid.max_l < 2:
        raise ValueError("gradient field needs a grid of at least 2x2")
    m = grid.means
    gv = np.empty_like(m)
    gl = np.empty_like(m)
    gv[1:-1, :] = (m[2:, :] - m[:-2, :]) / 2.0
    gv[0, :] = m[1, :] - m[0, :]
    gv[-1, :] = m[-1, :] - m[-2, :]
    gl[:, 1:-1] = (m[:, 2:] - m[:, :-2]) / 2.0
    gl[:, 0] = m[:, 1] - m[:, 0]
    gl[:, -1] = m[:, -1] - m[:, -2]
    mag = np.hypot(gv, gl)
    nonzero = mag > 0.0
    gv = np.where(nonzero, gv / np.where(nonzero, mag, 1.0), 0.0)
    gl = np.where(nonzero, gl / np.where(nonzero, mag, 1.0), 0.0)
    return AggregationGrid(grid.max_v, grid.max_l, grid.n_sims, m, gv, gl)


AGGREGATION_CSV_HEADER = "mode,k_visual,k_linguistic,mean_relative_strength,ci_lo,ci_hi,n_sims"


def write_curve_csv(curve: AggregationCurve, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(AGGREGATION_CSV_HEADER + "\n")
        for lv in curve.levels:
            kv = lv.k if curve.mode == "visual" else curve.fixed_other_count
            kl = lv.k if curve.mode == "linguistic" else curve.fixed_other_count
            f.write(
                f"{curve.mode},{kv},{kl},{lv.mean_relative_strength!r},"
                f"{lv.ci_lo!r},{lv.ci_hi!r},{lv.n_sims}\n"
            )


def write_grid_csv(grid: AggregationGrid, path) -> None:
    with_grad = grid.grad_v is not None
    header = AGGREGATION_CSV_HEADER + (",grad_v,grad_l" if with_grad else "")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(header + "\n")
        for v in range(1, grid.max_v + 1):
            for l in range(1, grid.max_l + 1):
                row = f"grid,{v},{l},{float(grid.means[v - 1, l - 1])!r},,,{grid.n_sims}"
                if with_grad:
                    row += f",{float(grid.grad_v[v - 1, l - 1])!r},{float(grid.grad_l[v - 1, l - 1])!r}"
                f.write(row + "\n")
