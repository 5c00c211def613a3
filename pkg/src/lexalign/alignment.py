"""Similarity matrices, alignment strength, and permutation baselines.

Alignment strength is the Spearman rank correlation between the strict upper
triangles (row-major) of the two modalities' cosine-similarity matrices.  The
permutation distribution relabels one modality's categories: because a
relabeling maps the set of unordered word pairs onto itself, the permuted
upper triangle is always the same multiset of similarities, so its ranks can
be precomputed once as an n x n table.  Each permuted correlation then needs
only the cross-sum sum_{i<j} xrank[i,j] * yrank[p(i), p(j)], evaluated by a
compiled kernel over doubled (integer-valued, hence exactly summed) ranks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import rng
from ._kernels import permuted_cross_sums
from .data_model import SystemView
from .metrics import centroid
from .stats import DegenerateDataError, TTestResult, doubled_ranks, pooled_t_test


@dataclass(frozen=True)
class SimilarityMatrix:
    modality: str
    values: np.ndarray  # (n, n) float64, symmetric, unit diagonal

    @property
    def n(self) -> int:
        return len(self.values)

    def upper_triangle(self) -> np.ndarray:
        iu = np.triu_indices(self.n, k=1)
        return self.values[iu]


@dataclass(frozen=True)
class AlignmentResult:
    rho_true: float
    permuted_rhos: np.ndarray
    relative_strength: float
    n_permutations: int
    seed: int


def prototype_matrix(view: SystemView, modality: str) -> np.ndarray:
    """Row i = centroid of word i's selected exemplars in the modality."""
    return np.vstack([centroid(view.selected(i, modality)) for i in range(view.n_words)])


def similarity_matrix(
    prototypes: np.ndarray, modality: str = "", labels: Sequence[str] | None = None
) -> SimilarityMatrix:
    """Pairwise cosine similarities; each unordered pair computed once."""
    p = np.asarray(prototypes, dtype=np.float64)
    if p.ndim != 2 or len(p) < 2:
        raise ValueError("similarity_matrix needs an (n >= 2, d) prototype matrix")
    norms = np.linalg.norm(p, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        name = labels[zero[0]] if labels is not None else f"#{zero[0]}"
        raise DegenerateDataError(f"zero-norm prototype for word {name}")
    unit = p / norms[:, None]
    s = unit @ unit.T
    # mirror the upper triangle and pin the diagonal so symmetry is exact
    iu = np.triu_indices(len(p), k=1)
    s[(iu[1], iu[0])] = s[iu]
    np.fill_diagonal(s, 1.0)
    np.clip(s, -1.0, 1.0, out=s)
    return SimilarityMatrix(modality, s)


class _RankedPair:
    """Doubled-rank reformulation shared by the true and permuted statistics."""

    def __init__(self, sv: SimilarityMatrix, sl: SimilarityMatrix):
        if sv.n != sl.n:
            raise ValueError("similarity matrices differ in size")
        iu = np.triu_indices(sv.n, k=1)
        self._init_from_triu(
            sv.values[iu], sl.values[iu], sv.n,
            (sv.modality or "first", sl.modality or "second"),
        )

    @classmethod
    def from_triu(cls, x_tri: np.ndarray, y_tri: np.ndarray, n: int) -> "_RankedPair":
        self = cls.__new__(cls)
        self._init_from_triu(x_tri, y_tri, n, ("first", "second"))
        return self

    def _init_from_triu(self, x_tri, y_tri, n, names) -> None:
        if n < 3:
            raise ValueError("alignment needs at least 3 categories")
        self.n = n
        iu = np.triu_indices(n, k=1)
        self.m = len(iu[0])
        self.x2 = doubled_ranks(x_tri)
        self.y2 = doubled_ranks(y_tri)
        for name, r in zip(names, (self.x2, self.y2)):
            if (r == r[0]).all():
                raise DegenerateDataError(
                    f"constant upper triangle in {name} similarities: correlation undefined"
                )
        self.sx = float(self.x2.sum())
        self.sy = float(self.y2.sum())
        self.sxx = float(self.x2 @ self.x2)
        self.syy = float(self.y2 @ self.y2)
        # full symmetric zero-diagonal rank matrices for the kernel
        self.x_full = np.zeros((n, n), dtype=np.float32)
        self.x_full[iu] = self.x2
        self.x_full[(iu[1], iu[0])] = self.x2
        self.y_full = np.zeros((n, n), dtype=np.float32)
        self.y_full[iu] = self.y2
        self.y_full[(iu[1], iu[0])] = self.y2

    def rho(self, t: np.ndarray | float):
        m = self.m
        cov = t - self.sx * self.sy / m
        var = (self.sxx - self.sx * self.sx / m) * (self.syy - self.sy * self.sy / m)
        return cov / np.sqrt(var)

    def rho_true(self) -> float:
        return float(self.rho(float(self.x2 @ self.y2)))


def alignment_strength(sv: SimilarityMatrix, sl: SimilarityMatrix) -> float:
    """Spearman correlation over the strict upper triangles."""
    return _RankedPair(sv, sl).rho_true()


def permutation_distribution(
    sv: SimilarityMatrix, sl: SimilarityMatrix, n_perms: int, seed: int
) -> np.ndarray:
    """Alignment strengths of n_perms uniformly drawn non-identity relabelings.

    Permutation i comes from stream mix(seed, i); the linguistic matrix is the
    permuted side.  Output is a pure function of (sv, sl, n_perms, seed).
    """
    ranked = _RankedPair(sv, sl)
    perms = rng.nonidentity_permutations(seed, n_perms, ranked.n)
    sums = permuted_cross_sums(perms, ranked.x_full, ranked.y_full)
    return np.asarray(ranked.rho(sums), dtype=np.float64)


def relative_alignment(rho_true: float, permuted: np.ndarray) -> float:
    """Fraction of permuted mappings strictly below the true mapping."""
    permuted = np.asarray(permuted)
    if permuted.size == 0:
        raise ValueError("relative_alignment needs a nonempty permuted sample")
    return float(np.count_nonzero(permuted < rho_true)) / permuted.size


def align(sv: SimilarityMatrix, sl: SimilarityMatrix, n_perms: int, seed: int) -> AlignmentResult:
    ranked = _RankedPair(sv, sl)
    perms = rng.nonidentity_permutations(seed, n_perms, ranked.n)
    rhos = np.asarray(ranked.rho(permuted_cross_sums(perms, ranked.x_full, ranked.y_full)))
    rho_true = ranked.rho_true()
    return AlignmentResult(
        rho_true=rho_true,
        permuted_rhos=rhos,
        relative_strength=relative_alignment(rho_true, rhos),
        n_permutations=n_perms,
        seed=seed,
    )


def rowwise_alignment(sv: SimilarityMatrix, sl: SimilarityMatrix, i: int) -> float:
    """Spearman between row i of each matrix with the self-similarity excluded."""
    if sv.n != sl.n:
        raise ValueError("similarity matrices differ in size")
    if sv.n < 4:
        raise ValueError("rowwise alignment needs at least 4 categories")
    if not 0 <= i < sv.n:
        raise IndexError(f"word index {i} out of range")
    keep = np.arange(sv.n) != i
    a = doubled_ranks(sv.values[i, keep])
    b = doubled_ranks(sl.values[i, keep])
    for r in (a, b):
        if (r == r[0]).all():
            raise DegenerateDataError("constant similarity row: correlation undefined")
    m = len(a)
    cov = float(a @ b) - a.sum() * b.sum() / m
    var = (float(a @ a) - a.sum() ** 2 / m) * (float(b @ b) - b.sum() ** 2 / m)
    return float(cov / np.sqrt(var))


def compare_true_vs_permuted(true_rhos, permuted_rhos) -> TTestResult:
    """Pooled two-sample t-test of true vs permuted alignment strengths."""
    return pooled_t_test(true_rhos, permuted_rhos)
