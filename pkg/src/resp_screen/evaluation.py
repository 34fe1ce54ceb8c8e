"""Threshold-grid ROC, AUC, specificity at a target sensitivity, and score-file I/O."""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import IdMismatch, OutOfRangeProbability, ParseError, SingleClassLabels

GRID_STEPS = 10000
SCORE_HEADER = ("id", "probability")


def threshold_grid(steps=GRID_STEPS):
    """Thresholds 0, 1/steps, ..., 1 (inclusive at both ends)."""
    return np.arange(steps + 1) / steps


@dataclass
class RocSummary:
    thresholds: np.ndarray  # threshold of each point; +inf for the (0, 0) anchor
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float  # percent
    spec_at_80_sens: float  # percent

    @property
    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def _check_labels(labels):
    labels = np.asarray(labels).astype(np.int64)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise SingleClassLabels(f"need both classes, got {n_pos} positive and {n_neg} negative")
    return labels, n_pos, n_neg


def grid_rates(scores, labels, thresholds=None):
    """(FPR, TPR) at each threshold, classifying positive iff score >= threshold."""
    if thresholds is None:
        thresholds = threshold_grid()
    scores = np.asarray(scores, dtype=np.float64)
    labels, n_pos, n_neg = _check_labels(labels)
    pos = np.sort(scores[labels == 1])
    neg = np.sort(scores[labels == 0])
    tp = n_pos - np.searchsorted(pos, thresholds, side="left")
    fp = n_neg - np.searchsorted(neg, thresholds, side="left")
    return fp / n_neg, tp / n_pos


def roc_curve(scores, labels, steps=GRID_STEPS):
    """ROC points over the threshold grid, ordered by descending threshold, with a (0, 0) anchor."""
    grid = threshold_grid(steps)[::-1]
    fpr, tpr = grid_rates(scores, labels, grid)
    thr = np.concatenate([[np.inf], grid])
    fpr = np.concatenate([[0.0], fpr])
    tpr = np.concatenate([[0.0], tpr])
    keep = np.ones(thr.shape[0], dtype=bool)
    keep[1:] = (fpr[1:] != fpr[:-1]) | (tpr[1:] != tpr[:-1])
    return thr[keep], fpr[keep], tpr[keep]


def auc(fpr, tpr):
    """Trapezoidal area under the curve, in percent."""
    fpr = np.asarray(fpr, dtype=np.float64)
    tpr = np.asarray(tpr, dtype=np.float64)
    return float(100.0 * np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))


def specificity_at_sensitivity(fpr, tpr, target=0.8):
    """Best specificity (percent) among operating points with TPR >= target."""
    if not 0 < target <= 1:
        raise ValueError("target sensitivity must lie in (0, 1]")
    fpr = np.asarray(fpr, dtype=np.float64)
    tpr = np.asarray(tpr, dtype=np.float64)
    ok = tpr >= target - 1e-12
    if not ok.any():
        return float("nan")
    return float(100.0 * (1.0 - fpr[ok].min()))


def evaluate(scores, labels, steps=GRID_STEPS, target_sensitivity=0.8):
    thr, fpr, tpr = roc_curve(scores, labels, steps)
    return RocSummary(thr, fpr, tpr, auc(fpr, tpr), specificity_at_sensitivity(fpr, tpr, target_sensitivity))


def align(scores, labels):
    """Join ``{id: score}`` and ``{id: label}`` into parallel arrays, ordered by id.

    Every labelled id must be scored and vice versa.
    """
    missing = sorted(set(labels) - set(scores))
    extra = sorted(set(scores) - set(labels))
    if missing:
        raise IdMismatch(f"no score for id(s): {', '.join(missing)}")
    if extra:
        raise IdMismatch(f"no label for id(s): {', '.join(extra)}")
    ids = sorted(labels)
    return ids, np.array([scores[i] for i in ids]), np.array([labels[i] for i in ids])


def write_scores(scores, path):
    """Write ``{id: probability}`` as CSV with fixed six-decimal probabilities, in insertion order."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCORE_HEADER)
        for file_id, p in scores.items():
            p = float(p)
            if not 0.0 <= p <= 1.0:
                raise OutOfRangeProbability(f"{file_id}: probability {p} outside [0, 1]")
            writer.writerow([file_id, f"{p:.6f}"])


def read_scores(path):
    with open(path, newline="") as fh:
        text = fh.read()
    if not text.strip():
        return {}
    rows = list(csv.reader(text.splitlines()))
    if tuple(c.strip() for c in rows[0]) != SCORE_HEADER:
        raise ParseError(f"{path}: expected header 'id,probability', got {rows[0]!r}")
    scores = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ParseError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
        file_id, raw = row[0].strip(), row[1].strip()
        try:
            p = float(raw)
        except ValueError:
            raise ParseError(f"{path}:{lineno}: bad probability {raw!r}") from None
        if not 0.0 <= p <= 1.0:
            raise OutOfRangeProbability(f"{path}:{lineno}: probability {p} outside [0, 1]")
        if file_id in scores:
            raise ParseError(f"{path}:{lineno}: duplicate id {file_id!r}")
        scores[file_id] = p
    return scores


def write_roc_csv(summary, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["threshold", "fpr", "tpr"])
        for t, f, p in zip(summary.thresholds, summary.fpr, summary.tpr):
            writer.writerow(["inf" if np.isinf(t) else f"{t:.4f}", f"{f:.6f}", f"{p:.6f}"])


def plot_roc(curves, path, title=None):
    """Save ROC curves ``{label: RocSummary}`` to an image (format from the file extension)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(4, 4))
    for name, summary in curves.items():
        ax.plot(summary.fpr, summary.tpr, label=f"{name} (AUC {summary.auc:.2f}%)")
    ax.plot([0, 1], [0, 1], linestyle="--", color="grey", linewidth=0.8)
    ax.set_xlabel("False positive rate")
    ax.set_ylabel("True positive rate")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    if title:
        ax.set_title(title)
    ax.legend(loc="lower right", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None} if str(path).endswith(".svg") else None)
    plt.close(fig)
