"""C4.5-style decision tree: gain-ratio splits, multiway branches on
discrete features, binary midpoint thresholds on numeric ones, and
pessimistic error-based pruning (no subtree raising).
"""

from __future__ import annotations

import numpy as np

from ..dataset import NUMERIC, Dataset
from ..special import normal_sf
from .base import TrainedClassifier, encode_column, fit_level_map

_GAIN_EPS = 1e-12


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _entropy_vec(pos: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Binary entropy for count vectors, vectorized over candidate splits."""
    with np.errstate(divide="ignore", invalid="ignore"):
        p = pos / n
        q = 1.0 - p
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(q > 0, q * np.log2(q), 0.0))
    return np.where(n > 0, h, 0.0)


def _best_numeric_split(sub: np.ndarray, suby: np.ndarray, node_entropy: float, min_instances: int):
    """Best admissible threshold of one numeric feature: (gain, ratio, threshold)."""
    order = np.argsort(sub, kind="stable")
    sv = sub[order]
    sy = suby[order]
    changes = np.flatnonzero(np.diff(sv) > 0)
    if len(changes) == 0:
        return None
    n = len(sv)
    pos_prefix = np.cumsum(sy)
    total_pos = pos_prefix[-1]
    left_n = changes + 1.0
    right_n = n - left_n
    admissible = (left_n >= min_instances) & (right_n >= min_instances)
    if not admissible.any():
        return None
    left_pos = pos_prefix[changes]
    right_pos = total_pos - left_pos
    weighted = (left_n * _entropy_vec(left_pos, left_n) + right_n * _entropy_vec(right_pos, right_n)) / n
    gain = node_entropy - weighted
    pl = left_n / n
    split_info = -(pl * np.log2(pl) + (1.0 - pl) * np.log2(1.0 - pl))
    ratio = np.where((gain > _GAIN_EPS) & (split_info > 0), gain / split_info, -np.inf)
    ratio = np.where(admissible, ratio, -np.inf)
    best = int(np.argmax(ratio))  # argmax keeps the smallest threshold on ties
    if not np.isfinite(ratio[best]):
        return None
    threshold = (sv[changes[best]] + sv[changes[best] + 1]) / 2.0
    return float(gain[best]), float(ratio[best]), threshold


def _upper_error(errors: float, n: float, z: float) -> float:
    """Upper confidence bound on the error rate, times n (C4.5 pessimistic count)."""
    if n <= 0:
        return 0.0
    f = errors / n
    z2 = z * z
    bound = (f + z2 / (2 * n) + z * np.sqrt(f / n - f * f / n + z2 / (4 * n * n))) / (1 + z2 / n)
    return float(n * min(1.0, bound))


def _z_from_confidence(cf: float) -> float:
    lo, hi = 0.0, 10.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if normal_sf(mid) > cf:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class _Node:
    __slots__ = ("counts", "feature", "kind", "threshold", "children")

    def __init__(self, counts: np.ndarray):
        self.counts = counts
        self.feature: str | None = None
        self.kind: str | None = None
        self.threshold: float | None = None
        self.children: list["_Node"] | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def to_doc(self) -> dict:
        doc: dict = {"counts": self.counts.tolist()}
        if not self.is_leaf:
            doc.update(
                feature=self.feature,
                kind=self.kind,
                threshold=self.threshold,
                children=[c.to_doc() for c in self.children],
            )
        return doc

    @staticmethod
    def from_doc(doc: dict) -> "_Node":
        node = _Node(np.asarray(doc["counts"], dtype=float))
        if "feature" in doc:
            node.feature = doc["feature"]
            node.kind = doc["kind"]
            node.threshold = doc["threshold"]
            node.children = [_Node.from_doc(c) for c in doc["children"]]
        return node


def grow_tree(
    dataset: Dataset,
    *,
    min_instances: int = 2,
    max_depth: int | None = None,
    rng: np.random.Generator | None = None,
    n_feature_sample: int | None = None,
) -> _Node:
    """Grow an unpruned tree.

    A split is admissible when at least two branches hold ``min_instances``
    rows. ``n_feature_sample`` draws a random feature subset per node (used
    by the forest). Among candidates whose gain reaches the mean positive
    gain, the highest gain ratio wins; ties keep the earlier feature and
    smaller threshold.
    """
    y = dataset.target
    features = []
    for col in dataset.columns:
        if col.kind == NUMERIC:
            features.append((col.name, NUMERIC, col.values, 0))
        else:
            features.append((col.name, "discrete", col.codes(), col.n_levels))

    def build(idx: np.ndarray, depth: int) -> _Node:
        counts = np.bincount(y[idx], minlength=2).astype(float)
        node = _Node(counts)
        if counts.min() == 0 or len(idx) < 2 * min_instances:
            return node
        if max_depth is not None and depth >= max_depth:
            return node
        node_entropy = _entropy(counts)
        if node_entropy == 0.0:
            return node

        if n_feature_sample is not None and n_feature_sample < len(features):
            pick = rng.choice(len(features), size=n_feature_sample, replace=False)
            pick.sort()
            cand_features = [features[i] for i in pick]
        else:
            cand_features = features

        # One candidate per feature (its best split), then the mean-gain
        # filter and gain-ratio maximization across features.
        candidates = []  # (gain, ratio, feature pos, threshold)
        for pos, (name, kind, values, n_levels) in enumerate(cand_features):
            sub = values[idx]
            if kind == NUMERIC:
                entry = _best_numeric_split(sub, y[idx], node_entropy, min_instances)
                if entry is not None:
                    candidates.append((entry[0], entry[1], pos, entry[2]))
            else:
                branch_counts = [
                    np.bincount(y[idx][sub == lvl], minlength=2).astype(float)
                    for lvl in range(n_levels)
                ]
                entry = _evaluate(node_entropy, branch_counts, len(sub), min_instances)
                if entry is not None:
                    candidates.append((*entry, pos, None))

        if not candidates:
            return node
        gains = np.asarray([c[0] for c in candidates])
        mean_gain = gains.mean()
        best = None
        for gain, ratio, pos, threshold in candidates:
            if gain + _GAIN_EPS < mean_gain:
                continue
            if best is None or ratio > best[1] + _GAIN_EPS:
                best = (gain, ratio, pos, threshold)
        gain, ratio, pos, threshold = best
        name, kind, values, n_levels = cand_features[pos]
        sub = values[idx]
        node.feature = name
        node.kind = kind
        node.threshold = threshold
        if kind == NUMERIC:
            left = idx[sub <= threshold]
            right = idx[sub > threshold]
            node.children = [build(left, depth + 1), build(right, depth + 1)]
        else:
            node.children = []
            for lvl in range(n_levels):
                branch = idx[sub == lvl]
                if len(branch) == 0:
                    node.children.append(_Node(counts.copy()))  # inherit parent's mix
                else:
                    node.children.append(build(branch, depth + 1))
        return node

    return build(np.arange(dataset.n_rows), 0)


def _evaluate(node_entropy, branch_counts, n, min_instances):
    sizes = np.asarray([c.sum() for c in branch_counts])
    nonempty = sizes > 0
    if nonempty.sum() < 2 or (sizes >= min_instances).sum() < 2:
        return None
    weighted = sum(s / n * _entropy(c) for s, c in zip(sizes, branch_counts) if s > 0)
    gain = node_entropy - weighted
    if gain <= _GAIN_EPS:
        return None
    p = sizes[nonempty] / n
    split_info = float(-(p * np.log2(p)).sum())
    if split_info <= 0:
        return None
    return gain, gain / split_info


def prune_tree(node: _Node, z: float) -> None:
    """Bottom-up pessimistic pruning: collapse a subtree when the node's own
    estimated errors do not exceed the sum over its leaves."""
    if node.is_leaf:
        return
    for child in node.children:
        prune_tree(child, z)
    n = node.counts.sum()
    leaf_errors = _upper_error(n - node.counts.max(), n, z)
    subtree_errors = _subtree_errors(node, z)
    if leaf_errors <= subtree_errors + 1e-9:
        node.feature = None
        node.kind = None
        node.threshold = None
        node.children = None


def _subtree_errors(node: _Node, z: float) -> float:
    if node.is_leaf:
        n = node.counts.sum()
        return _upper_error(n - node.counts.max(), n, z)
    return sum(_subtree_errors(c, z) for c in node.children)


def row_arrays(dataset: Dataset, levels_map: dict) -> dict:
    """Per-column prediction arrays encoded against fit-time levels."""
    arrays = {}
    for col in dataset.columns:
        if col.kind == NUMERIC:
            arrays[col.name] = col.values
        else:
            arrays[col.name] = encode_column(col, levels_map[col.name])
    return arrays


def tree_predict_counts(node: _Node, row_values: dict) -> np.ndarray:
    """Walk one row down, falling back to the node distribution on unseen levels."""
    while not node.is_leaf:
        value = row_values[node.feature]
        if node.kind == NUMERIC:
            node = node.children[0] if value <= node.threshold else node.children[1]
        else:
            if value < 0 or value >= len(node.children):
                break
            node = node.children[int(value)]
    return node.counts


class C45Tree(TrainedClassifier):
    algorithm = "c45_tree"

    def __init__(
        self,
        seed: int = 0,
        prune: bool = True,
        confidence: float = 0.25,
        min_instances: int = 2,
        max_depth: int | None = None,
    ) -> None:
        super().__init__(seed=seed)
        self.prune = prune
        self.confidence = confidence
        self.min_instances = min_instances
        self.max_depth = max_depth

    def _fit(self, dataset: Dataset) -> None:
        self.root_ = grow_tree(
            dataset, min_instances=self.min_instances, max_depth=self.max_depth
        )
        if self.prune:
            prune_tree(self.root_, _z_from_confidence(self.confidence))
        self.levels_map_ = fit_level_map(dataset)

    def _row_iter(self, dataset: Dataset):
        arrays = row_arrays(dataset, self.levels_map_)
        for i in range(dataset.n_rows):
            yield {name: arr[i] for name, arr in arrays.items()}

    def _predict_proba(self, dataset: Dataset) -> np.ndarray:
        out = np.empty((dataset.n_rows, 2))
        for i, row in enumerate(self._row_iter(dataset)):
            counts = tree_predict_counts(self.root_, row)
            total = counts.sum()
            out[i] = counts / total if total > 0 else np.array([0.5, 0.5])
        return out

    def _fitted_doc(self) -> dict:
        return {
            "prune": self.prune,
            "confidence": self.confidence,
            "min_instances": self.min_instances,
            "max_depth": self.max_depth,
            "levels_map": {k: (list(v) if v is not None else None) for k, v in self.levels_map_.items()},
            "root": self.root_.to_doc(),
        }

    def _load_fitted(self, doc: dict) -> None:
        self.prune = doc["prune"]
        self.confidence = doc["confidence"]
        self.min_instances = doc["min_instances"]
        self.max_depth = doc["max_depth"]
        self.levels_map_ = {
            k: (tuple(v) if v is not None else None) for k, v in doc["levels_map"].items()
        }
        self.root_ = _Node.from_doc(doc["root"])
