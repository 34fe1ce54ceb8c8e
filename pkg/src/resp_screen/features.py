"""Frame-level MFCC + delta + delta-delta features, and an on-disk feature cache."""

import hashlib
import json
import os
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from .errors import BadWidth, EmptyClip

LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class FeatureConfig:
    n_mfcc: int = 39
    frame_length: int = 1024
    hop_length: int = 441
    n_mels: int = 128
    fmin: float = 0.0
    fmax: float = None  # None means sample_rate / 2
    delta_width: int = 9

    def __post_init__(self):
        if not 0 < self.n_mfcc <= self.n_mels:
            raise ValueError("need 0 < n_mfcc <= n_mels")
        if self.frame_length <= 0 or not 0 < self.hop_length <= self.frame_length:
            raise ValueError("need frame_length > 0 and 0 < hop_length <= frame_length")
        if self.delta_width < 3 or self.delta_width % 2 == 0:
            raise BadWidth(f"delta_width must be odd and >= 3, got {self.delta_width}")

    @property
    def n_features(self):
        return 3 * self.n_mfcc

    def fingerprint(self):
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=16)
def mel_filterbank(sample_rate, n_fft, n_mels, fmin=0.0, fmax=None):
    """Triangular filters on the mel scale, each scaled to unit area (n_mels x n_fft//2+1).

    The returned array is read-only and shared between callers.
    """
    if fmax is None:
        fmax = sample_rate / 2.0
    bin_hz = np.fft.rfftfreq(n_fft, d=1.0 / sample_rate)
    edges_hz = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    widths = np.diff(edges_hz)
    # distance of every FFT bin from every edge
    offsets = edges_hz[:, None] - bin_hz[None, :]
    rising = -offsets[:-2] / widths[:-1, None]
    falling = offsets[2:] / widths[1:, None]
    fb = np.maximum(0.0, np.minimum(rising, falling))
    fb *= (2.0 / (edges_hz[2:] - edges_hz[:-2]))[:, None]
    fb.setflags(write=False)
    return fb


@lru_cache(maxsize=4)
def _periodic_hann(n):
    w = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
    w.setflags(write=False)
    return w


def frame_count(n_samples, hop_length):
    return 1 + n_samples // hop_length


def power_spectrogram(samples, frame_length, hop_length):
    """Centered, reflect-padded, Hann-windowed |FFT|^2, one row per frame."""
    pad = frame_length // 2
    padded = np.pad(samples, pad, mode="reflect")
    n_frames = frame_count(samples.shape[0], hop_length)
    frames = np.lib.stride_tricks.sliding_window_view(padded, frame_length)[::hop_length][:n_frames]
    spec = np.fft.rfft(frames * _periodic_hann(frame_length), n=frame_length, axis=1)
    return spec.real ** 2 + spec.imag ** 2


def log_mel(clip, cfg):
    power = power_spectrogram(clip.samples, cfg.frame_length, cfg.hop_length)
    fb = mel_filterbank(clip.sample_rate, cfg.frame_length, cfg.n_mels, cfg.fmin, cfg.fmax)
    return 10.0 * np.log10(np.maximum(power @ fb.T, LOG_FLOOR))


def mfcc(clip, cfg=FeatureConfig()):
    """T x n_mfcc matrix of cepstral coefficients, T = 1 + len(clip) // hop_length."""
    if len(clip) == 0:
        raise EmptyClip("cannot extract MFCCs from an empty clip")
    coeffs = scipy.fft.dct(log_mel(clip, cfg), type=2, norm="ortho", axis=1)
    return coeffs[:, :cfg.n_mfcc]


def deltas(m, width=9):
    """Regression deltas along axis 0, edges padded by replication."""
    if width < 3 or width % 2 == 0:
        raise BadWidth(f"width must be odd and >= 3, got {width}")
    m = np.asarray(m, dtype=np.float64)
    if m.shape[0] < 1:
        raise EmptyClip("deltas need at least one frame")
    half = (width - 1) // 2
    padded = np.pad(m, [(half, half)] + [(0, 0)] * (m.ndim - 1), mode="edge")
    n_frames = m.shape[0]
    out = np.zeros_like(m)
    for k in range(1, half + 1):
        out += k * (padded[half + k:half + k + n_frames] - padded[half - k:half - k + n_frames])
    return out / (2.0 * sum(k * k for k in range(1, half + 1)))


def extract_features(clip, cfg=FeatureConfig()):
    """[mfcc | delta | delta-delta] for a preprocessed clip."""
    if len(clip) < cfg.frame_length:
        raise EmptyClip(f"clip of {len(clip)} samples is shorter than one frame ({cfg.frame_length})")
    m = mfcc(clip, cfg)
    d1 = deltas(m, cfg.delta_width)
    d2 = deltas(d1, cfg.delta_width)
    return np.hstack([m, d1, d2])


class FeatureCache:
    """One file per id: a JSON header line followed by row-major float32 frames.

    A record whose header names a different FeatureConfig is treated as missing.
    """

    def __init__(self, root, cfg):
        self.root = os.fspath(root)
        self.cfg = cfg
        self.fingerprint = cfg.fingerprint()
        os.makedirs(self.root, exist_ok=True)

    def _path(self, file_id):
        return os.path.join(self.root, f"{file_id}.feat")

    def get(self, file_id):
        path = self._path(file_id)
        if not os.path.exists(path):
            return None
        with open(path, "rb") as fh:
            header = json.loads(fh.readline())
            if header.get("config_hash") != self.fingerprint:
                return None
            rows, cols = header["shape"]
            data = np.frombuffer(fh.read(), dtype="<f4")
        if data.size != rows * cols:
            return None
        return data.reshape(rows, cols)

    def put(self, file_id, frames):
        frames = np.ascontiguousarray(frames, dtype="<f4")
        header = {
            "config": asdict(self.cfg),
            "config_hash": self.fingerprint,
            "shape": list(frames.shape),
        }
        tmp = self._path(file_id) + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
            fh.write(frames.tobytes())
        os.replace(tmp, self._path(file_id))
