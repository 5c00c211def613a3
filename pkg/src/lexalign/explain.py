"""Path-dependent TreeSHAP attributions plus a brute-force Shapley oracle.

Both attribute the same game: features absent from a coalition are
marginalised by descending both children weighted by their training cover,
while present features follow the explained sample (NaN follows the node's
default branch).  tree_shap computes the Shapley values of that game in
polynomial time with the extend/unwind path-weight recursion; brute_force_shap
enumerates all 2^m coalitions and is the verification oracle for small m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gbt import BoostedModel, RegressionTree


@dataclass(frozen=True)
class ShapExplanation:
    x: np.ndarray  # the explained feature vector
    phi: np.ndarray  # per-feature attributions
    base_value: float  # cover-weighted expected model output

    @property
    def prediction(self) -> float:
        return float(self.base_value + self.phi.sum())


def expected_value(model: BoostedModel) -> float:
    return model.base_score + model.params.learning_rate * sum(
        t.expected_value() for t in model.trees
    )


# path entries are [feature, zero_fraction, one_fraction, pweight]


def _extend(path: list, pz: float, po: float, pi: int) -> None:
    l = len(path)
    path.append([pi, pz, po, 1.0 if l == 0 else 0.0])
    for i in range(l - 1, -1, -1):
        path[i + 1][3] += po * path[i][3] * (i + 1) / (l + 1)
        path[i][3] = pz * path[i][3] * (l - i) / (l + 1)


def _unwind(path: list, i: int) -> None:
    l = len(path) - 1
    one = path[i][2]
    zero = path[i][1]
    n = path[l][3]
    if one != 0.0:
        for j in range(l - 1, -1, -1):
            tmp = n * (l + 1) / ((j + 1) * one)
            n = path[j][3] - tmp * zero * (l - j) / (l + 1)
            path[j][3] = tmp
    else:
        for j in range(l - 1, -1, -1):
            path[j][3] = path[j][3] * (l + 1) / (zero * (l - j))
    for j in range(i, l):
        path[j][0] = path[j + 1][0]
        path[j][1] = path[j + 1][1]
        path[j][2] = path[j + 1][2]
    path.pop()


def _unwound_sum(path: list, i: int) -> float:
    """Sum of pweights after unwinding entry i, without mutating the path."""
    l = len(path) - 1
    one = path[i][2]
    zero = path[i][1]
    total = 0.0
    if one != 0.0:
        n = path[l][3]
        for j in range(l - 1, -1, -1):
            tmp = n * (l + 1) / ((j + 1) * one)
            total += tmp
            n = path[j][3] - tmp * zero * (l - j) / (l + 1)
    else:
        for j in range(l - 1, -1, -1):
            total += path[j][3] * (l + 1) / (zero * (l - j))
    return total


def _hot_cold(tree: RegressionTree, node: int, x: np.ndarray) -> tuple[int, int]:
    xv = x[tree.feature[node]]
    left, right = int(tree.left[node]), int(tree.right[node])
    if math.isnan(xv):
        return (left, right) if tree.default_left[node] else (right, left)
    return (left, right) if xv < tree.threshold[node] else (right, left)


def _tree_shap_recurse(
    tree: RegressionTree, x: np.ndarray, phi: np.ndarray, node: int, path: list,
    pz: float, po: float, pi: int,
) -> None:
    path = [entry.copy() for entry in path]
    _extend(path, pz, po, pi)
    if tree.feature[node] < 0:
        leaf_value = float(tree.value[node])
        for i in range(1, len(path)):
            w = _unwound_sum(path, i)
            phi[path[i][0]] += w * (path[i][2] - path[i][1]) * leaf_value
        return
    hot, cold = _hot_cold(tree, node, x)
    feat = int(tree.feature[node])
    iz, io = 1.0, 1.0
    for k in range(1, len(path)):
        if path[k][0] == feat:
            iz, io = path[k][1], path[k][2]
            _unwind(path, k)
            break
    cover = tree.cover[node]
    _tree_shap_recurse(tree, x, phi, hot, path, iz * tree.cover[hot] / cover, io, feat)
    _tree_shap_recurse(tree, x, phi, cold, path, iz * tree.cover[cold] / cover, 0.0, feat)


def tree_shap(model: BoostedModel, x: np.ndarray) -> ShapExplanation:
    """Per-feature attributions; base + sum(phi) equals the model prediction."""
    x = np.asarray(x, dtype=np.float64)
    m = len(model.feature_names) if model.feature_names else len(x)
    if len(x) != m:
        raise ValueError(f"feature count {len(x)} != model's {m}")
    phi = np.zeros(m)
    for tree in model.trees:
        tree_phi = np.zeros(m)
        _tree_shap_recurse(tree, x, tree_phi, 0, [], 1.0, 1.0, -1)
        phi += model.params.learning_rate * tree_phi
    return ShapExplanation(x=x, phi=phi, base_value=expected_value(model))


def _tree_coalition_value(tree: RegressionTree, x: np.ndarray, mask: int, node: int) -> float:
    feat = int(tree.feature[node])
    if feat < 0:
        return float(tree.value[node])
    if mask & (1 << feat):
        hot, _ = _hot_cold(tree, node, x)
        return _tree_coalition_value(tree, x, mask, hot)
    left, right = int(tree.left[node]), int(tree.right[node])
    cover = tree.cover[node]
    return (
        tree.cover[left] * _tree_coalition_value(tree, x, mask, left)
        + tree.cover[right] * _tree_coalition_value(tree, x, mask, right)
    ) / cover


def brute_force_shap(model: BoostedModel, x: np.ndarray) -> np.ndarray:
    """Exact Shapley values by coalition enumeration; requires <= 15 features."""
    x = np.asarray(x, dtype=np.float64)
    m = len(model.feature_names) if model.feature_names else len(x)
    if m > 15:
        raise ValueError(f"brute force limited to 15 features, got {m}")
    lr = model.params.learning_rate
    v = np.empty(1 << m)
    for mask in range(1 << m):
        v[mask] = model.base_score + lr * sum(
            _tree_coalition_value(t, x, mask, 0) for t in model.trees
        )
    fact = [math.factorial(i) for i in range(m + 1)]
    phi = np.zeros(m)
    for j in range(m):
        bit = 1 << j
        for mask in range(1 << m):
            if mask & bit:
                continue
            s = bin(mask).count("1")
            weight = fact[s] * fact[m - s - 1] / fact[m]
            phi[j] += weight * (v[mask | bit] - v[mask])
    return phi


@dataclass(frozen=True)
class FeatureImportance:
    mean_abs_shap: np.ndarray
    sign: np.ndarray  # sign of corr(feature value, phi) per feature


def global_importance(explanations: list[ShapExplanation]) -> FeatureImportance:
    """Mean |phi| per feature, signed by how attributions track feature values."""
    if not explanations:
        raise ValueError("global_importance needs at least one explanation")
    phis = np.vstack([e.phi for e in explanations])
    xs = np.vstack([e.x for e in explanations])
    if phis.shape != xs.shape:
        raise ValueError("inconsistent feature counts across explanations")
    mean_abs = np.abs(phis).mean(axis=0)
    xc = xs - xs.mean(axis=0)
    pc = phis - phis.mean(axis=0)
    sign = np.sign(np.einsum("ij,ij->j", xc, pc))
    return FeatureImportance(mean_abs_shap=mean_abs, sign=sign)
