"""Binary CART classification trees.

Splits minimize weighted Gini impurity. Internally each candidate split is
scored with

    score = sum(left_counts**2) / n_left + sum(right_counts**2) / n_right

which is an increasing function of the impurity decrease at a fixed node
(both sides integer-exact before one float division each), so ties under
this score are ties in impurity decrease. Ties break toward the lowest
feature index, then the lowest threshold. Candidate thresholds are the
midpoints between consecutive distinct sorted values; a sample goes left
when ``value <= threshold``.

A node becomes a leaf when it is pure, has fewer than ``min_samples_split``
samples, sits at ``max_depth``, or no split strictly increases the score.

When ``max_features`` is set, each node considers a without-replacement
sample of features drawn from a stream derived from ``(seed, node index)``,
where node indices follow depth-first pre-order creation. That keeps trees
reproducible no matter how construction is scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError, EmptyDataError
from .rng import child_generator

LEAF = -1


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = None
    min_samples_split: int = 2
    max_features: int | None = None  # None = all
    seed: int = 0

    def __post_init__(self):
        if self.min_samples_split < 2:
            raise ConfigError("min_samples_split must be >= 2")
        if self.max_depth is not None and self.max_depth < 0:
            raise ConfigError("max_depth must be >= 0")
        if self.max_features is not None and self.max_features < 1:
            raise ConfigError("max_features must be >= 1")


@dataclass
class TreeNode:
    counts: np.ndarray        # per-class sample counts, int64
    feature_index: int = LEAF  # -1 for leaves
    threshold: float = float("nan")
    left: int = LEAF
    right: int = LEAF

    @property
    def is_leaf(self) -> bool:
        return self.feature_index == LEAF

    @property
    def n_samples(self) -> int:
        return int(self.counts.sum())


@dataclass
class DecisionTreeModel:
    nodes: list[TreeNode]
    feature_count: int
    class_count: int
    params: TreeParams
    root: int = 0
    # flat arrays for vectorized prediction, rebuilt on construction
    _feature: np.ndarray = field(init=False, repr=False)
    _threshold: np.ndarray = field(init=False, repr=False)
    _left: np.ndarray = field(init=False, repr=False)
    _right: np.ndarray = field(init=False, repr=False)
    _counts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._feature = np.array([n.feature_index for n in self.nodes], dtype=np.int32)
        self._threshold = np.array([n.threshold for n in self.nodes], dtype=np.float64)
        self._left = np.array([n.left for n in self.nodes], dtype=np.int32)
        self._right = np.array([n.right for n in self.nodes], dtype=np.int32)
        self._counts = np.stack([n.counts for n in self.nodes]).astype(np.int64)

    def depth(self) -> int:
        depths = {self.root: 0}
        best = 0
        for idx, node in enumerate(self.nodes):
            d = depths[idx]
            best = max(best, d)
            if not node.is_leaf:
                depths[node.left] = d + 1
                depths[node.right] = d + 1
        return best

    def tobytes(self) -> bytes:
        """Canonical byte serialization (used for determinism checks)."""
        return (self._feature.tobytes() + self._threshold.tobytes()
                + self._left.tobytes() + self._right.tobytes()
                + self._counts.tobytes())


def gini(counts) -> float:
    """Gini impurity 1 - sum(p_k^2) of a class-count vector."""
    counts = np.asarray(counts, dtype=np.int64)
    n = counts.sum()
    if n == 0:
        return 0.0
    return 1.0 - float((counts * counts).sum()) / (float(n) * float(n))


def _best_split(x_node, y_node, candidate_features, class_count):
    """Best (score, feature, threshold) over candidate features, or None.

    ``candidate_features`` must be in ascending order so the tie-break
    falls out of strict comparisons.
    """
    n = y_node.shape[0]
    onehot = np.zeros((n, class_count), dtype=np.int64)
    onehot[np.arange(n), y_node] = 1
    total = onehot.sum(axis=0)
    parent_score = float((total * total).sum()) / n

    best_score = parent_score
    best = None
    for f in candidate_features:
        values = x_node[:, f]
        order = np.argsort(values, kind="stable")
        sorted_values = values[order]
        boundaries = np.nonzero(sorted_values[:-1] < sorted_values[1:])[0]
        if boundaries.size == 0:
            continue
        left_counts = np.cumsum(onehot[order], axis=0)[boundaries]
        n_left = boundaries + 1
        n_right = n - n_left
        right_counts = total - left_counts
        scores = ((left_counts * left_counts).sum(axis=1) / n_left
                  + (right_counts * right_counts).sum(axis=1) / n_right)
        pick = int(np.argmax(scores))  # first max = lowest threshold
        if scores[pick] > best_score:
            best_score = float(scores[pick])
            b = boundaries[pick]
            threshold = (sorted_values[b] + sorted_values[b + 1]) / 2.0
            best = (best_score, int(f), float(threshold))
    return best


def fit_tree(features, labels, params: TreeParams,
             class_count: int | None = None) -> DecisionTreeModel:
    """Grow a CART tree on an (n, f) feature matrix."""
    x = np.ascontiguousarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDataError("feature matrix must be (n, f) with n >= 1")
    y = np.asarray(labels, dtype=np.int64)
    if y.shape != (x.shape[0],):
        raise DimensionError("labels must align with feature rows")
    if y.min() < 0:
        raise DimensionError("labels must be nonnegative class indices")
    if class_count is None:
        class_count = int(y.max()) + 1
    elif y.max() >= class_count:
        raise DimensionError(f"label {y.max()} out of range for {class_count} classes")
    n_features = x.shape[1]
    if params.max_features is not None and params.max_features > n_features:
        raise ConfigError(
            f"max_features={params.max_features} exceeds {n_features} features"
        )

    nodes: list[TreeNode] = []
    # stack of (row indices, depth, parent node index, attach side)
    stack = [(np.arange(x.shape[0]), 0, -1, "")]
    while stack:
        idx, depth, parent, side = stack.pop()
        node_index = len(nodes)
        y_node = y[idx]
        counts = np.bincount(y_node, minlength=class_count).astype(np.int64)
        node = TreeNode(counts=counts)
        nodes.append(node)
        if parent >= 0:
            if side == "left":
                nodes[parent].left = node_index
            else:
                nodes[parent].right = node_index

        if (np.count_nonzero(counts) <= 1
                or idx.size < params.min_samples_split
                or (params.max_depth is not None and depth >= params.max_depth)):
            continue

        if params.max_features is None or params.max_features >= n_features:
            candidates = np.arange(n_features)
        else:
            rng = child_generator(params.seed, node_index)
            candidates = np.sort(rng.choice(n_features, size=params.max_features,
                                            replace=False))
        best = _best_split(x[idx], y_node, candidates, class_count)
        if best is None:
            continue
        _, f, threshold = best
        node.feature_index = f
        node.threshold = threshold
        go_left = x[idx, f] <= threshold
        # push right first so the left subtree is created next (pre-order)
        stack.append((idx[~go_left], depth + 1, node_index, "right"))
        stack.append((idx[go_left], depth + 1, node_index, "left"))

    return DecisionTreeModel(nodes=nodes, feature_count=n_features,
                             class_count=class_count, params=params)


def _check_vector(model: DecisionTreeModel, vector) -> np.ndarray:
    v = np.asarray(vector, dtype=np.float64)
    if v.shape != (model.feature_count,):
        raise DimensionError(
            f"expected a vector of length {model.feature_count}, got shape {v.shape}"
        )
    return v


def leaf_indices(model: DecisionTreeModel, matrix: np.ndarray) -> np.ndarray:
    """Leaf node index for every row of an (m, f) feature matrix."""
    matrix = np.asarray(matrix, dtype=np.float64)
    node = np.full(matrix.shape[0], model.root, dtype=np.int64)
    active = model._feature[node] != LEAF
    while active.any():
        rows = np.nonzero(active)[0]
        current = node[rows]
        f = model._feature[current]
        go_left = matrix[rows, f] <= model._threshold[current]
        node[rows] = np.where(go_left, model._left[current], model._right[current])
        active = model._feature[node] != LEAF
    return node


def predict_batch(model: DecisionTreeModel, matrix) -> tuple[np.ndarray, np.ndarray]:
    """Predicted classes and class distributions for each matrix row."""
    leaves = leaf_indices(model, np.asarray(matrix, dtype=np.float64))
    counts = model._counts[leaves].astype(np.float64)
    dists = counts / counts.sum(axis=1, keepdims=True)
    return np.argmax(dists, axis=1), dists


def predict(model: DecisionTreeModel, vector) -> tuple[int, np.ndarray]:
    """Predicted class (argmax, lowest index on ties) and distribution."""
    v = _check_vector(model, vector)
    classes, dists = predict_batch(model, v[None, :])
    return int(classes[0]), dists[0]


def trace_path(model: DecisionTreeModel, vector) -> list[int]:
    """Node indices visited from root to leaf, inclusive."""
    v = _check_vector(model, vector)
    path = [model.root]
    node = model.nodes[model.root]
    while not node.is_leaf:
        nxt = node.left if v[node.feature_index] <= node.threshold else node.right
        path.append(nxt)
        node = model.nodes[nxt]
    return path


def aggregate_flows(model: DecisionTreeModel, tagged_vectors):
    """Per-edge, per-tag counts of traced samples.

    ``tagged_vectors`` is an iterable of (feature vector, tag). Returns
    ``{(parent, child): {tag: count}}``.
    """
    flows: dict[tuple[int, int], dict[str, int]] = {}
    for vector, tag in tagged_vectors:
        path = trace_path(model, vector)
        for parent, child in zip(path, path[1:]):
            per_tag = flows.setdefault((parent, child), {})
            per_tag[tag] = per_tag.get(tag, 0) + 1
    return flows


def _node_impurity_decrease(model: DecisionTreeModel, node: TreeNode) -> float:
    left = model.nodes[node.left]
    right = model.nodes[node.right]
    n = node.n_samples
    return gini(node.counts) - (left.n_samples / n) * gini(left.counts) \
        - (right.n_samples / n) * gini(right.counts)


def feature_importance(model: DecisionTreeModel) -> np.ndarray:
    """Impurity-decrease importance per feature, normalized to sum 1.

    Each internal node contributes its sample fraction times its impurity
    decrease to the feature it splits on. A single-leaf tree yields zeros.
    """
    raw = np.zeros(model.feature_count, dtype=np.float64)
    n_root = model.nodes[model.root].n_samples
    for node in model.nodes:
        if node.is_leaf:
            continue
        raw[node.feature_index] += (node.n_samples / n_root) \
            * _node_impurity_decrease(model, node)
    total = raw.sum()
    if total > 0:
        raw /= total
    return raw


def feature_usage(model: DecisionTreeModel) -> np.ndarray:
    """Number of internal nodes splitting on each feature."""
    usage = np.zeros(model.feature_count, dtype=np.int64)
    for node in model.nodes:
        if not node.is_leaf:
            usage[node.feature_index] += 1
    return usage
