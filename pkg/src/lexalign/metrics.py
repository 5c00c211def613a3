"""Centroids, per-category variability and discriminability, system summaries.

Variability of a category is the mean Euclidean distance from its exemplars to
its centroid.  Discriminability of category i is the mean over categories j
(including j = i, as the defining sums run over every category) of the mean
distance from j's exemplars to i's centroid; with equal exemplar counts this
collapses to the standard double-average.  System-level values are arithmetic
means of the per-word column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import SystemView


@dataclass(frozen=True)
class WordMetrics:
    word: str
    word_type: str
    visual_variability: float
    visual_discriminability: float
    linguistic_variability: float
    linguistic_discriminability: float


@dataclass(frozen=True)
class MetricsReport:
    rows: tuple[WordMetrics, ...]
    mean_visual_variability: float
    mean_visual_discriminability: float
    mean_linguistic_variability: float
    mean_linguistic_discriminability: float


def centroid(exemplars: np.ndarray) -> np.ndarray:
    """Componentwise mean over exemplars, summed in stored order."""
    exemplars = np.asarray(exemplars, dtype=np.float64)
    if exemplars.ndim != 2 or len(exemplars) == 0:
        raise ValueError("centroid needs a nonempty (n, d) exemplar array")
    return np.add.reduce(exemplars, axis=0) / len(exemplars)


def category_variability(exemplars: np.ndarray) -> float:
    """Mean Euclidean distance from exemplars to their centroid."""
    exemplars = np.asarray(exemplars, dtype=np.float64)
    c = centroid(exemplars)
    return float(np.linalg.norm(exemplars - c, axis=1).mean())


def _centroid_matrix(view: SystemView, modality: str) -> np.ndarray:
    return np.vstack([centroid(view.selected(i, modality)) for i in range(view.n_words)])


def _mean_dists_to_centroids(view: SystemView, modality: str) -> np.ndarray:
    """M[j, i] = mean distance from word j's exemplars to word i's centroid."""
    cents = _centroid_matrix(view, modality)
    n = view.n_words
    out = np.empty((n, n))
    for j in range(n):
        ex = view.selected(j, modality)
        diff = ex[:, None, :] - cents[None, :, :]
        out[j] = np.sqrt(np.add.reduce(diff * diff, axis=2)).mean(axis=0)
    return out


def category_discriminability(view: SystemView, modality: str, category_index: int) -> float:
    """Mean over all categories of their mean exemplar distance to centroid i."""
    if not 0 <= category_index < view.n_words:
        raise IndexError(f"category index {category_index} out of range")
    cents = _centroid_matrix(view, modality)
    c = cents[category_index]
    total = 0.0
    for j in range(view.n_words):
        ex = view.selected(j, modality)
        total += float(np.linalg.norm(ex - c, axis=1).mean())
    return total / view.n_words


def system_metrics(view: SystemView) -> MetricsReport:
    """Per-word and system-level variability/discriminability for both modalities."""
    n = view.n_words
    vv = np.array([category_variability(view.selected(i, "visual")) for i in range(n)])
    lv = np.array([category_variability(view.selected(i, "linguistic")) for i in range(n)])
    vd = _mean_dists_to_centroids(view, "visual").mean(axis=0)
    ld = _mean_dists_to_centroids(view, "linguistic").mean(axis=0)

    rows = tuple(
        WordMetrics(
            word=w.word,
            word_type=w.word_type,
            visual_variability=float(vv[i]),
            visual_discriminability=float(vd[i]),
            linguistic_variability=float(lv[i]),
            linguistic_discriminability=float(ld[i]),
        )
        for i, w in enumerate(view.base.words)
    )
    return MetricsReport(
        rows=rows,
        mean_visual_variability=float(vv.mean()),
        mean_visual_discriminability=float(vd.mean()),
        mean_linguistic_variability=float(lv.mean()),
        mean_linguistic_discriminability=float(ld.mean()),
    )


METRICS_CSV_HEADER = (
    "word,type,visual_variability,visual_discriminability,"
    "linguistic_variability,linguistic_discriminability"
)


def write_metrics_csv(report: MetricsReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(METRICS_CSV_HEADER + "\n")
        for r in report.rows:
            f.write(
                f"{r.word},{r.word_type},{r.visual_variability:.17g},"
                f"{r.visual_discriminability:.17g},{r.linguistic_variability:.17g},"
                f"{r.linguistic_discriminability:.17g}\n"
            )
