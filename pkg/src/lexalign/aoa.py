"""Age-of-Acquisition regression: feature assembly, training and reporting.

The feature table joins per-word metrics, per-word alignment, caregiver-speech
frequency and AoA targets on the word label; rows missing any field are
excluded and logged rather than imputed.  Frequency stays raw: trees are
invariant to monotone transforms of a feature, so log-scaling cannot change
the fitted structure.  The model is fitted and explained in-sample.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .data_model import LexAlignError, LoadError
from .explain import FeatureImportance, ShapExplanation, global_importance, tree_shap
from .gbt import BoostedModel, BoosterParams, predict, train
from .metrics import MetricsReport

FEATURE_COLUMNS = (
    "frequency",
    "type",
    "visual_variability",
    "visual_discriminability",
    "linguistic_variability",
    "linguistic_discriminability",
    "alignment",
)


@dataclass
class FeatureTable:
    words: list[str]
    features: np.ndarray  # (n, 7) in FEATURE_COLUMNS order
    aoa: np.ndarray  # months
    excluded: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class RegressionReport:
    table: FeatureTable
    model: BoostedModel
    predictions: np.ndarray
    explanations: list[ShapExplanation]
    importance: FeatureImportance
    rmse: float
    r2: float


def _read_two_column_csv(path, header: tuple[str, str], value_parser):
    out: dict[str, float] = {}
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            first = next(reader)
        except StopIteration:
            raise LoadError(f"{path}: empty file") from None
        rows = [first] if tuple(h.strip() for h in first) != header else []
        for lineno, row in enumerate(rows + list(reader), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise LoadError(f"{path} line {lineno}: expected 2 columns, got {len(row)}")
            word = row[0].strip()
            if word in out:
                raise LoadError(f"{path} line {lineno}: duplicate word {word!r}")
            out[word] = value_parser(word, row[1].strip(), lineno)
    return out


def load_aoa(path) -> dict[str, float]:
    """word -> age of acquisition in months (strictly positive)."""

    def parse(word, text, lineno):
        try:
            v = float(text)
        except ValueError:
            raise LoadError(f"{path} line {lineno}: bad AoA value {text!r}") from None
        if not v > 0 or not math.isfinite(v):
            raise LoadError(f"{path} line {lineno}: word {word!r}: AoA must be positive, got {v}")
        return v

    return _read_two_column_csv(path, ("word", "aoa_months"), parse)


def load_frequency(path) -> dict[str, int]:
    """word -> nonnegative occurrence count in caregiver speech."""

    def parse(word, text, lineno):
        try:
            v = int(text)
        except ValueError:
            raise LoadError(f"{path} line {lineno}: bad count {text!r}") from None
        if v < 0:
            raise LoadError(f"{path} line {lineno}: word {word!r}: negative count {v}")
        return v

    return _read_two_column_csv(path, ("word", "count"), parse)


def assemble_features(
    metrics_report: MetricsReport,
    alignment_rows: dict[str, float],
    freq: dict[str, float],
    aoa: dict[str, float],
) -> FeatureTable:
    """Inner-join on word, in metrics (manifest) row order; log exclusions."""
    words: list[str] = []
    rows: list[list[float]] = []
    targets: list[float] = []
    excluded: list[tuple[str, str]] = []
    for r in metrics_report.rows:
        missing = []
        if r.word not in freq:
            missing.append("no frequency")
        if r.word not in alignment_rows:
            missing.append("no alignment")
        if r.word not in aoa:
            missing.append("no AoA")
        if missing:
            excluded.append((r.word, "; ".join(missing)))
            continue
        words.append(r.word)
        rows.append(
            [
                float(freq[r.word]),
                1.0 if r.word_type == "verb" else 0.0,
                r.visual_variability,
                r.visual_discriminability,
                r.linguistic_variability,
                r.linguistic_discriminability,
                float(alignment_rows[r.word]),
            ]
        )
        targets.append(float(aoa[r.word]))
    if not words:
        raise LexAlignError("feature join produced no rows")
    return FeatureTable(words, np.asarray(rows), np.asarray(targets), excluded)


def run_regression(table: FeatureTable, params: BoosterParams) -> RegressionReport:
    """Fit on all rows, explain every word, summarise global importance."""
    if len(table.words) < 10:
        raise LexAlignError(f"regression needs >= 10 rows, got {len(table.words)}")
    model = train(table.features, table.aoa, params, list(FEATURE_COLUMNS))
    preds = predict(model, table.features)
    explanations = [tree_shap(model, x) for x in table.features]
    importance = global_importance(explanations)
    resid = preds - table.aoa
    rmse = float(np.sqrt(np.mean(resid**2)))
    ss_res = float((resid**2).sum())
    ss_tot = float(((table.aoa - table.aoa.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 and ss_res == 0.0 else 1.0 - ss_res / ss_tot if ss_tot else 0.0
    return RegressionReport(table, model, preds, explanations, importance, rmse, r2)


def write_predictions_csv(report: RegressionReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("word,aoa_true,aoa_pred\n")
        for w, t, p in zip(report.table.words, report.table.aoa, report.predictions):
            f.write(f"{w},{float(t)!r},{float(p)!r}\n")


def write_shap_csv(report: RegressionReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("word,feature,feature_value,shap_value\n")
        for w, e in zip(report.table.words, report.explanations):
            for j, name in enumerate(FEATURE_COLUMNS):
                f.write(f"{w},{name},{float(e.x[j])!r},{float(e.phi[j])!r}\n")


def write_importance_csv(report: RegressionReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("feature,mean_abs_shap,sign\n")
        for j, name in enumerate(FEATURE_COLUMNS):
            f.write(
                f"{name},{float(report.importance.mean_abs_shap[j])!r},"
                f"{int(report.importance.sign[j])}\n"
            )


def write_exclusions_log(table: FeatureTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for word, reason in table.excluded:
            f.write(f"{word}\t{reason}\n")
