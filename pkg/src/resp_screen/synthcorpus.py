"""Synthetic cough-like corpora with a tunable class separation.

Each file is a train of 2-6 decaying noise bursts over a faint noise floor.
Negative-class bursts are band-passed around 800 Hz with a -6 dB/octave
broadband tilt; positive-class bursts move the band centre up by
``separability * 600`` Hz and flatten the tilt by ``separability * 6`` dB/octave.
Every file also draws its own band centre (sd 250 Hz) and tilt (sd 3 dB/octave)
offsets, so small separabilities give overlapping classes. Durations and peak
levels are drawn identically for both classes, so only the spectral shape
carries the label.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .audio import AudioClip, encode_wav
from .pipeline import FoldSplit, Manifest, ManifestEntry, write_folds, write_manifest

BASE_CENTER_HZ = 800.0
CENTER_SHIFT_HZ = 600.0
BASE_TILT_DB_PER_OCT = -6.0
TILT_SHIFT_DB_PER_OCT = 6.0
BAND_WIDTH_HZ = 150.0
FILE_JITTER_HZ = 250.0
FILE_TILT_JITTER_DB = 3.0
BURST_JITTER_HZ = 30.0
NOISE_FLOOR = 0.001


@dataclass(frozen=True)
class CorpusSpec:
    n_neg: int = 100
    n_pos: int = 100
    duration_range: tuple = (1.0, 2.0)
    sample_rate: int = 44100
    separability: float = 1.0
    seed: int = 0
    n_folds: int = 5

    def __post_init__(self):
        if not 0.0 <= self.separability <= 1.0:
            raise ValueError("separability must lie in [0, 1]")
        if self.n_neg <= 0 or self.n_pos <= 0:
            raise ValueError("class counts must be positive")
        lo, hi = self.duration_range
        if not 0.2 < lo <= hi:
            raise ValueError("durations must exceed 0.2 s and be ordered")
        if self.n_folds < 2 or min(self.n_neg, self.n_pos) < self.n_folds:
            raise ValueError("each class needs at least one file per fold")


def _shaped_burst(rng, n_samples, rate, center_hz, tilt_db_per_oct):
    spectrum = np.fft.rfft(rng.standard_normal(n_samples))
    freqs = np.fft.rfftfreq(n_samples, 1.0 / rate)
    band = np.exp(-0.5 * ((freqs - center_hz) / BAND_WIDTH_HZ) ** 2)
    tilt = 0.05 * (np.maximum(freqs, 50.0) / 1000.0) ** (tilt_db_per_oct / (20.0 * np.log10(2.0)))
    burst = np.fft.irfft(spectrum * (band + tilt), n=n_samples)
    attack = min(int(0.005 * rate), n_samples)
    env = np.exp(-np.arange(n_samples) / (n_samples / 3.0))
    env[:attack] *= np.linspace(0.0, 1.0, attack, endpoint=False)
    burst *= env
    return burst / np.max(np.abs(burst))


def synthesize(label, rng, spec):
    """Samples for one file of the given class (0 or 1)."""
    rate = spec.sample_rate
    shift = spec.separability if label == 1 else 0.0
    center = max(BASE_CENTER_HZ + shift * CENTER_SHIFT_HZ + rng.normal(0.0, FILE_JITTER_HZ), 200.0)
    tilt = BASE_TILT_DB_PER_OCT + shift * TILT_SHIFT_DB_PER_OCT + rng.normal(0.0, FILE_TILT_JITTER_DB)

    duration = rng.uniform(*spec.duration_range)
    n = int(round(duration * rate))
    y = NOISE_FLOOR * rng.standard_normal(n)
    guard = int(0.03 * rate)
    for _ in range(rng.integers(2, 7)):
        length = min(int(rng.uniform(0.05, 0.3) * rate), n - 2 * guard)
        onset = rng.integers(guard, n - guard - length + 1)
        gain = rng.uniform(0.5, 1.0)
        c = center + rng.normal(0.0, BURST_JITTER_HZ)
        y[onset:onset + length] += gain * _shaped_burst(rng, length, rate, c, tilt)
    return y * (rng.uniform(0.3, 0.9) / np.max(np.abs(y)))


def stratified_split(ids, labels, n_folds, rng):
    """Random fold assignment with each class spread evenly over the folds."""
    ids = np.asarray(ids)
    labels = np.asarray(labels)
    fold_of = {}
    for cls in (0, 1):
        members = ids[labels == cls]
        for pos, file_id in enumerate(members[rng.permutation(members.size)]):
            fold_of[str(file_id)] = pos % n_folds
    folds = []
    for k in range(n_folds):
        val = [str(i) for i in ids if fold_of[str(i)] == k]
        train = [str(i) for i in ids if fold_of[str(i)] != k]
        folds.append((train, val))
    return FoldSplit(folds)


def generate_corpus(spec, out_dir, n_jobs=1):
    """Write WAV files, ``manifest.csv`` and ``folds/`` under out_dir; return (manifest, split)."""
    out_dir = os.fspath(out_dir)
    audio_dir = os.path.join(out_dir, "audio")
    os.makedirs(audio_dir, exist_ok=True)

    master = np.random.SeedSequence(spec.seed)
    label_seq, split_seq, file_seq = master.spawn(3)
    n_files = spec.n_neg + spec.n_pos
    labels = np.array([0] * spec.n_neg + [1] * spec.n_pos)
    labels = labels[np.random.default_rng(label_seq).permutation(n_files)]
    ids = [f"file_{i:04d}" for i in range(n_files)]
    file_seeds = file_seq.spawn(n_files)

    def make(i):
        rng = np.random.default_rng(file_seeds[i])
        clip = AudioClip(synthesize(int(labels[i]), rng, spec), spec.sample_rate)
        encode_wav(clip, os.path.join(audio_dir, f"{ids[i]}.wav"))

    if n_jobs == 1:
        for i in range(n_files):
            make(i)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            list(pool.map(make, range(n_files)))

    entries = [ManifestEntry(ids[i], os.path.join("audio", f"{ids[i]}.wav"), int(labels[i]))
               for i in range(n_files)]
    manifest = Manifest(entries, out_dir)
    write_manifest(manifest, os.path.join(out_dir, "manifest.csv"))
    split = stratified_split(ids, labels, spec.n_folds, np.random.default_rng(split_seq))
    write_folds(split, os.path.join(out_dir, "folds"))
    return manifest, split
