"""Data preparation: peak normalisation, sample-level sound activity detection, edge trim."""

from dataclasses import dataclass

import numpy as np

from .audio import AudioClip
from .errors import AllZeroSignal, ClipTooShort, EmptyClip, NoActivity


@dataclass(frozen=True)
class SadConfig:
    amplitude_threshold: float = 0.01
    margin: float = 0.050  # seconds kept either side of an active sample
    edge_trim: float = 0.020  # seconds dropped from each end after SAD

    def __post_init__(self):
        if not self.amplitude_threshold > 0:
            raise ValueError("amplitude_threshold must be > 0")
        if self.margin < 0 or self.edge_trim < 0:
            raise ValueError("margin and edge_trim must be >= 0")


def normalize_amplitude(clip):
    if len(clip) == 0:
        raise EmptyClip("cannot normalise an empty clip")
    peak = np.max(np.abs(clip.samples))
    if peak == 0:
        raise AllZeroSignal("peak amplitude is zero")
    return AudioClip(clip.samples / peak, clip.sample_rate)


def activity_mask(samples, threshold, margin_samples):
    """Boolean mask of samples within ``margin_samples`` of any sample above ``threshold``."""
    n = samples.shape[0]
    active = np.flatnonzero(np.abs(samples) > threshold)
    if active.size == 0:
        return np.zeros(n, dtype=bool)
    # +1 at each window start, -1 one past each window end, then prefix-sum
    edges = np.zeros(n + 1, dtype=np.int64)
    np.add.at(edges, np.maximum(active - margin_samples, 0), 1)
    np.add.at(edges, np.minimum(active + margin_samples + 1, n), -1)
    return np.cumsum(edges[:n]) > 0


def sound_activity_detect(clip, cfg=SadConfig()):
    """Keep samples above threshold plus a margin around them; drop the rest."""
    if len(clip) == 0:
        raise EmptyClip("cannot run SAD on an empty clip")
    margin_samples = int(np.floor(cfg.margin * clip.sample_rate))
    mask = activity_mask(clip.samples, cfg.amplitude_threshold, margin_samples)
    if not mask.any():
        raise NoActivity(f"no sample exceeds {cfg.amplitude_threshold}")
    return AudioClip(clip.samples[mask], clip.sample_rate)


def trim_edges(clip, edge_trim):
    n_trim = int(np.floor(edge_trim * clip.sample_rate))
    if n_trim == 0:
        if len(clip) == 0:
            raise ClipTooShort("clip is empty")
        return clip
    if len(clip) <= 2 * n_trim:
        raise ClipTooShort(f"{len(clip)} samples cannot lose {n_trim} from each end")
    return AudioClip(clip.samples[n_trim:-n_trim], clip.sample_rate)


def preprocess(clip, cfg=SadConfig()):
    clip = normalize_amplitude(clip)
    clip = sound_activity_detect(clip, cfg)
    return trim_edges(clip, cfg.edge_trim)
