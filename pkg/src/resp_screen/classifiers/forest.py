"""Bootstrap random forest of weighted-gini trees."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .balance import balanced_weights, class_counts
from ._tree import apply_tree, grow_tree, rank_encode


@dataclass(frozen=True)
class RfConfig:
    n_trees: int = 50
    max_features: str = "sqrt"  # or an int
    class_weight: str = "balanced"  # or "none"
    bootstrap: bool = True

    def resolve_max_features(self, n_features):
        if self.max_features == "sqrt":
            return max(1, int(np.floor(np.sqrt(n_features))))
        return int(self.max_features)


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    count: np.ndarray  # n_nodes x 2 raw class multiplicities
    seed: int

    @property
    def n_nodes(self):
        return self.feature.shape[0]

    def apply(self, X):
        return apply_tree(self.feature, self.threshold, self.left, self.right, X)


@dataclass
class RfModel:
    trees: list
    class_weight: np.ndarray
    n_features: int
    config: RfConfig = field(default_factory=RfConfig)
    seed: int = 0

    kind = "rf"

    def tree_proba(self, tree, X):
        leaves = tree.apply(X)
        weighted = tree.count[leaves] * self.class_weight
        return weighted[:, 1] / weighted.sum(axis=1)

    def predict_proba(self, X):
        X = np.ascontiguousarray(X, dtype=np.float64)
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += self.tree_proba(tree, X)
        return total / len(self.trees)


def tree_seeds(seed, n_trees):
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n_trees)]


def bootstrap_counts(n_rows, tree_seed, bootstrap=True):
    """Multiplicity of each row in the bootstrap sample drawn for one tree."""
    if not bootstrap:
        return np.ones(n_rows, dtype=np.int64)
    rng = np.random.default_rng(tree_seed)
    return np.bincount(rng.integers(0, n_rows, size=n_rows), minlength=n_rows).astype(np.int64)


def _fit_tree(codes, values, y, class_weight, max_features, tree_seed, bootstrap):
    mult = bootstrap_counts(y.shape[0], tree_seed, bootstrap)
    feature, threshold, left, right, count, _ = grow_tree(
        codes, values, y, mult, class_weight, max_features, tree_seed)
    return Tree(feature, threshold, left, right, count, tree_seed)


def train_rf(frames, seed=0, config=RfConfig(), n_jobs=1):
    class_counts(frames.labels)
    if config.class_weight == "balanced":
        cw = balanced_weights(frames.labels)
    elif config.class_weight == "none":
        cw = np.ones(2)
    else:
        raise ValueError(f"unknown class_weight {config.class_weight!r}")
    Xt = np.ascontiguousarray(frames.features.T, dtype=np.float64)
    y = frames.labels.astype(np.int64)
    max_features = config.resolve_max_features(Xt.shape[0])
    seeds = tree_seeds(seed, config.n_trees)
    codes, values = rank_encode(Xt)

    def fit(s):
        return _fit_tree(codes, values, y, cw, max_features, s, config.bootstrap)

    if n_jobs == 1:
        trees = [fit(s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(fit, seeds))
    return RfModel(trees, cw, Xt.shape[0], config, seed)
