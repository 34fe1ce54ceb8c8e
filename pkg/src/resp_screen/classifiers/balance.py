"""Frame sets, class-balancing weights and minority oversampling."""

from dataclasses import dataclass

import numpy as np

from ..errors import SingleClass


@dataclass
class LabeledFrameSet:
    features: np.ndarray
    labels: np.ndarray
    file_ids: np.ndarray = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if self.file_ids is None:
            self.file_ids = np.arange(self.labels.shape[0]).astype(str)
        self.file_ids = np.asarray(self.file_ids)
        n = self.features.shape[0]
        if self.labels.shape != (n,) or self.file_ids.shape != (n,):
            raise ValueError("features, labels and file_ids disagree on row count")
        if not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")

    def __len__(self):
        return self.labels.shape[0]


def class_counts(labels):
    labels = np.asarray(labels)
    counts = np.array([np.sum(labels == 0), np.sum(labels == 1)])
    if counts.min() == 0:
        raise SingleClass(f"need both classes, got counts {counts.tolist()}")
    return counts


def balanced_weights(labels):
    """(w_neg, w_pos) with w_c = M / (2 * count_c)."""
    counts = class_counts(labels)
    return counts.sum() / (2.0 * counts)


def oversample(frames, seed=0):
    """Duplicate minority-class rows (drawn with replacement) until both classes have equal counts.

    Majority rows keep their original order; the extra minority rows are appended.
    """
    counts = class_counts(frames.labels)
    if counts[0] == counts[1]:
        return frames
    minority = int(np.argmin(counts))
    deficit = int(counts.max() - counts.min())
    pool = np.flatnonzero(frames.labels == minority)
    rng = np.random.default_rng(seed)
    extra = pool[rng.integers(0, pool.size, size=deficit)]
    rows = np.concatenate([np.arange(len(frames)), extra])
    return LabeledFrameSet(frames.features[rows], frames.labels[rows], frames.file_ids[rows])


@dataclass
class Standardizer:
    """Per-feature z-scoring fitted on training frames."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X):
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        return cls(mean, scale)

    @classmethod
    def identity(cls, n_features):
        return cls(np.zeros(n_features), np.ones(n_features))

    def transform(self, X):
        return (X - self.mean) / self.scale
