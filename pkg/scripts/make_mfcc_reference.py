"""Regenerate tests/data/mfcc_reference.npz with librosa.

Run once, offline; the package never imports librosa. The reference uses the
same documented configuration: n_fft 1024, hop 441, periodic Hann, centered
reflect padding, 128 HTK-formula mel bands with area normalisation, 10*log10
with a 1e-10 floor and no top_db clipping, orthonormal DCT-II, 39 coefficients,
and first-order regression deltas (width 9, edge replication) applied twice.
"""

import os
import sys

import librosa
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(HERE, "..", "tests"))
from mfcc_signals import RATE, reference_signals  # noqa: E402


def reference_features(y):
    S = librosa.feature.melspectrogram(
        y=y, sr=RATE, n_fft=1024, hop_length=441, window="hann", center=True,
        pad_mode="reflect", power=2.0, n_mels=128, htk=True, norm="slaney",
    )
    L = librosa.power_to_db(S, ref=1.0, amin=1e-10, top_db=None)
    M = librosa.feature.mfcc(S=L, n_mfcc=39, dct_type=2, norm="ortho")
    d1 = librosa.feature.delta(M, width=9, mode="nearest", axis=-1)
    d2 = librosa.feature.delta(d1, width=9, mode="nearest", axis=-1)
    return np.vstack([M, d1, d2]).T


def main():
    out = {}
    for name, y in reference_signals().items():
        out[f"{name}__features"] = reference_features(y).astype(np.float32)
        out[f"{name}__probe"] = y[:64]
    dest = os.path.join(HERE, "..", "tests", "data", "mfcc_reference.npz")
    np.savez_compressed(dest, librosa_version=librosa.__version__, **out)
    print(f"wrote {len(out) // 2} references to {dest}")


if __name__ == "__main__":
    main()
