"""From-scratch gradient-boosted regression trees (squared error, exact greedy).

Per round with squared-error loss the gradients are g_i = yhat_i - y_i and all
hessians are 1, so node cover equals its sample count.  Splits are searched
exactly over midpoints of consecutive distinct feature values with gain

    0.5 * (GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda)) - gamma

and leaf weight -G/(H+lambda).  Rows with a missing (NaN) split feature are
routed to the child with the larger non-missing cover (ties left), both during
the gain evaluation and at prediction time.  Trees store unshrunk leaf values;
shrinkage is applied when predictions are accumulated.  Gain ties are broken
toward the lowest feature index, then the lowest threshold, so training is
bit-for-bit deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .data_model import LexAlignError


@dataclass(frozen=True)
class BoosterParams:
    n_rounds: int = 10000
    max_depth: int = 10
    learning_rate: float = 0.02
    reg_lambda: float = 1.0
    gamma: float = 0.0
    min_child_weight: float = 1.0
    base_score: float | None = None  # None: mean of the training targets

    def __post_init__(self):
        if self.n_rounds < 0:
            raise ValueError("n_rounds must be >= 0")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if self.reg_lambda < 0.0 or self.gamma < 0.0 or self.min_child_weight < 0.0:
            raise ValueError("regularisers must be >= 0")


@dataclass
class RegressionTree:
    """Flat node arrays; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # unshrunk leaf weight (0 at internal nodes)
    cover: np.ndarray  # training rows reaching the node
    default_left: np.ndarray

    def predict_one(self, x: np.ndarray) -> float:
        node = 0
        while self.feature[node] >= 0:
            xv = x[self.feature[node]]
            if math.isnan(xv):
                node = self.left[node] if self.default_left[node] else self.right[node]
            elif xv < self.threshold[node]:
                node = self.left[node]
            else:
                node = self.right[node]
        return float(self.value[node])

    def expected_value(self) -> float:
        """Cover-weighted mean output (the tree's training-distribution mean)."""
        leaves = self.feature < 0
        return float((self.value[leaves] * self.cover[leaves]).sum() / self.cover[0])


@dataclass
class BoostedModel:
    params: BoosterParams
    base_score: float
    trees: list[RegressionTree] = field(default_factory=list)
    feature_names: list[str] | None = None

    @property
    def n_features(self) -> int:
        return self._n_features

    def __post_init__(self):
        self._n_features = len(self.feature_names) if self.feature_names else -1


class _TreeBuilder:
    def __init__(self, X, g, params: BoosterParams):
        self.X = X
        self.g = g
        self.p = params
        self.nodes: list[list] = []  # feature, threshold, left, right, value, cover, default_left

    def build(self, idx: np.ndarray) -> int:
        return self._grow(idx, depth=0)

    def _grow(self, idx: np.ndarray, depth: int) -> int:
        node_id = len(self.nodes)
        self.nodes.append([-1, 0.0, -1, -1, 0.0, float(len(idx)), True])
        g_node = self.g[idx]
        G = float(g_node.sum())
        H = float(len(idx))
        lam = self.p.reg_lambda

        best = None
        if depth < self.p.max_depth and len(idx) >= 2:
            best = self._best_split(idx, g_node, G, H)
        if best is None:
            self.nodes[node_id][4] = -G / (H + lam)
            return node_id

        f, thr, default_left = best
        col = self.X[idx, f]
        miss = np.isnan(col)
        go_left = np.where(miss, default_left, col < thr)
        left_idx = idx[go_left]
        right_idx = idx[~go_left]
        left_id = self._grow(left_idx, depth + 1)
        right_id = self._grow(right_idx, depth + 1)
        self.nodes[node_id][:4] = [f, thr, left_id, right_id]
        self.nodes[node_id][6] = bool(default_left)
        return node_id

    def _best_split(self, idx, g_node, G, H):
        lam = self.p.reg_lambda
        mcw = self.p.min_child_weight
        parent_term = G * G / (H + lam)
        best_gain = 0.0
        best = None
        for f in range(self.X.shape[1]):
            col = self.X[idx, f]
            miss = np.isnan(col)
            vals = col[~miss]
            if len(vals) < 2:
                continue
            gv = g_node[~miss]
            order = np.argsort(vals, kind="stable")
            sv = vals[order]
            sg = gv[order]
            pos = np.flatnonzero(sv[1:] != sv[:-1])
            if pos.size == 0:
                continue
            thresholds = (sv[pos] + sv[pos + 1]) / 2.0
            gl = np.cumsum(sg)[pos]
            hl = (pos + 1).astype(np.float64)
            g_nm = float(sg.sum())
            h_nm = float(len(sv))
            g_miss = G - g_nm
            h_miss = H - h_nm
            default_left = hl >= (h_nm - hl)
            gl_tot = gl + np.where(default_left, g_miss, 0.0)
            hl_tot = hl + np.where(default_left, h_miss, 0.0)
            gr_tot = G - gl_tot
            hr_tot = H - hl_tot
            gain = (
                0.5
                * (
                    gl_tot * gl_tot / (hl_tot + lam)
                    + gr_tot * gr_tot / (hr_tot + lam)
                    - parent_term
                )
                - self.p.gamma
            )
            gain[(hl_tot < mcw) | (hr_tot < mcw)] = -np.inf
            j = int(np.argmax(gain))  # first max -> lowest threshold
            if gain[j] > best_gain:
                best_gain = float(gain[j])
                best = (f, float(thresholds[j]), bool(default_left[j]))
        return best

    def finish(self) -> RegressionTree:
        arr = list(zip(*self.nodes))
        return RegressionTree(
            feature=np.asarray(arr[0], dtype=np.int32),
            threshold=np.asarray(arr[1], dtype=np.float64),
            left=np.asarray(arr[2], dtype=np.int32),
            right=np.asarray(arr[3], dtype=np.int32),
            value=np.asarray(arr[4], dtype=np.float64),
            cover=np.asarray(arr[5], dtype=np.float64),
            default_left=np.asarray(arr[6], dtype=bool),
        )


def _tree_predict(tree: RegressionTree, X: np.ndarray) -> np.ndarray:
    return np.array([tree.predict_one(row) for row in X])


def train(
    features: np.ndarray,
    targets: np.ndarray,
    params: BoosterParams,
    feature_names: list[str] | None = None,
) -> BoostedModel:
    """Boost params.n_rounds regression trees on (n, m) features."""
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("features must be (n, m) with matching targets")
    if len(X) < 2:
        raise LexAlignError("training needs at least 2 rows")
    if np.isnan(y).any():
        raise LexAlignError("targets must not contain NaN")
    if feature_names is not None and len(feature_names) != X.shape[1]:
        raise ValueError("feature_names length mismatch")

    base = float(np.mean(y)) if params.base_score is None else float(params.base_score)
    model = BoostedModel(params, base, [], feature_names or [f"f{j}" for j in range(X.shape[1])])
    preds = np.full(len(y), base)
    all_idx = np.arange(len(y))
    for _ in range(params.n_rounds):
        g = preds - y
        builder = _TreeBuilder(X, g, params)
        builder.build(all_idx)
        tree = builder.finish()
        model.trees.append(tree)
        preds += params.learning_rate * _tree_predict(tree, X)
    return model


def predict(model: BoostedModel, x: np.ndarray) -> float | np.ndarray:
    """base_score + learning_rate * sum of tree outputs."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if model.feature_names and X.shape[1] != len(model.feature_names):
        raise ValueError(
            f"feature count {X.shape[1]} != model's {len(model.feature_names)}"
        )
    out = np.full(len(X), model.base_score)
    for tree in model.trees:
        out += model.params.learning_rate * _tree_predict(tree, X)
    return float(out[0]) if single else out


SERIALIZATION_VERSION = 1


def to_json_dict(model: BoostedModel) -> dict:
    return {
        "format_version": SERIALIZATION_VERSION,
        "shrinkage_convention": "trees store unshrunk values; prediction scales by learning_rate",
        "params": {
            "n_rounds": model.params.n_rounds,
            "max_depth": model.params.max_depth,
            "learning_rate": model.params.learning_rate,
            "reg_lambda": model.params.reg_lambda,
            "gamma": model.params.gamma,
            "min_child_weight": model.params.min_child_weight,
            "base_score": model.params.base_score,
        },
        "base_score": model.base_score,
        "feature_names": model.feature_names,
        "trees": [
            {
                "feature": t.feature.tolist(),
                "threshold": t.threshold.tolist(),
                "left": t.left.tolist(),
                "right": t.right.tolist(),
                "value": t.value.tolist(),
                "cover": t.cover.tolist(),
                "default_left": t.default_left.tolist(),
            }
            for t in model.trees
        ],
    }


def from_json_dict(doc: dict) -> BoostedModel:
    if doc.get("format_version") != SERIALIZATION_VERSION:
        raise LexAlignError(f"unsupported model format {doc.get('format_version')!r}")
    p = doc["params"]
    params = BoosterParams(
        n_rounds=p["n_rounds"],
        max_depth=p["max_depth"],
        learning_rate=p["learning_rate"],
        reg_lambda=p["reg_lambda"],
        gamma=p["gamma"],
        min_child_weight=p["min_child_weight"],
        base_score=p["base_score"],
    )
    trees = [
        RegressionTree(
            feature=np.asarray(t["feature"], dtype=np.int32),
            threshold=np.asarray(t["threshold"], dtype=np.float64),
            left=np.asarray(t["left"], dtype=np.int32),
            right=np.asarray(t["right"], dtype=np.int32),
            value=np.asarray(t["value"], dtype=np.float64),
            cover=np.asarray(t["cover"], dtype=np.float64),
            default_left=np.asarray(t["default_left"], dtype=bool),
        )
        for t in doc["trees"]
    ]
    return BoostedModel(params, doc["base_score"], trees, doc["feature_names"])


def save_model(model: BoostedModel, path, extra: dict | None = None) -> None:
    doc = to_json_dict(model)
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def load_model(path) -> BoostedModel:
    with open(path, "r", encoding="utf-8") as f:
        return from_json_dict(json.load(f))
