"""Audio decoding, encoding and sample-rate conversion.

WAV (PCM 8/16/24/32-bit integer and 32/64-bit float) is always supported.
FLAC is decoded through ``soundfile`` when that package is importable.
"""

import os
import struct
import warnings
from dataclasses import dataclass
from math import gcd

import numpy as np
import scipy.io.wavfile
from scipy import signal

from .errors import CorruptStream, EmptyClip, UnsupportedFormat

CANONICAL_RATE = 44100

# stop-band attenuation of the anti-aliasing filter, in dB
STOPBAND_DB = 80.0
# transition band as a fraction of the lower Nyquist frequency
TRANSITION = 0.1


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"AudioClip must be mono, got shape {samples.shape}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self):
        return len(self) / self.sample_rate


def _pcm_to_float(data):
    if data.dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    if data.dtype == np.int16:
        return data.astype(np.float64) / 32768.0
    if data.dtype == np.int32:
        # scipy left-justifies 24-bit samples into int32
        return data.astype(np.float64) / 2147483648.0
    if data.dtype == np.int64:
        return data.astype(np.float64) / 9223372036854775808.0
    if data.dtype.kind == "f":
        return data.astype(np.float64)
    raise UnsupportedFormat(f"unsupported sample type {data.dtype}")


def _to_mono(data):
    if data.ndim == 1:
        return data
    return data.mean(axis=1)


def _read_wav(path):
    with open(path, "rb") as fh:
        head = fh.read(12)
    if len(head) < 12:
        raise CorruptStream(f"{path}: truncated RIFF header")
    if head[:4] not in (b"RIFF", b"RIFX", b"RF64") or head[8:12] != b"WAVE":
        raise UnsupportedFormat(f"{path}: not a RIFF/WAVE file")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            rate, data = scipy.io.wavfile.read(path)
        except (struct.error, EOFError) as exc:
            raise CorruptStream(f"{path}: {exc}") from exc
        except ValueError as exc:
            msg = str(exc)
            if "Unknown wave file format" in msg or "Unsupported" in msg or "not understood" in msg:
                raise UnsupportedFormat(f"{path}: {msg}") from exc
            raise CorruptStream(f"{path}: {msg}") from exc
    for w in caught:
        if "EOF" in str(w.message) or "prematurely" in str(w.message):
            raise CorruptStream(f"{path}: {w.message}")
    if rate <= 0:
        raise CorruptStream(f"{path}: invalid sample rate {rate}")
    return AudioClip(_to_mono(_pcm_to_float(data)), int(rate))


def _read_flac(path):
    try:
        import soundfile
    except ImportError as exc:
        raise UnsupportedFormat(f"{path}: FLAC support needs the 'soundfile' package") from exc
    try:
        data, rate = soundfile.read(path, dtype="float64", always_2d=False)
    except RuntimeError as exc:
        raise CorruptStream(f"{path}: {exc}") from exc
    return AudioClip(_to_mono(data), int(rate))


def decode_audio(path):
    """Decode a WAV or FLAC file into a mono clip at its native rate."""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == b"fLaC":
        return _read_flac(path)
    if magic in (b"RIFF", b"RIFX", b"RF64"):
        return _read_wav(path)
    if len(magic) < 4:
        raise CorruptStream(f"{path}: file too short to identify")
    raise UnsupportedFormat(f"{path}: unrecognised container {magic!r}")


def encode_wav(clip, path, bits=16):
    """Write ``clip`` as PCM WAV with the given integer bit depth (16 or 32), or float (bits=-32)."""
    x = clip.samples
    if bits == 16:
        data = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2")
    elif bits == 32:
        data = np.clip(np.round(x * 2147483648.0), -2147483648, 2147483647).astype("<i4")
    elif bits == -32:
        data = x.astype("<f4")
    else:
        raise ValueError(f"unsupported bit depth {bits}")
    scipy.io.wavfile.write(os.fspath(path), clip.sample_rate, data)


def load_clip(path, target_rate=CANONICAL_RATE):
    """Decode a file and bring it to ``target_rate``."""
    return resample(decode_audio(path), target_rate)


def _design_lowpass(up, down):
    """Kaiser-windowed sinc low-pass for rational resampling by up/down."""
    factor = max(up, down)
    width = TRANSITION / factor
    numtaps, beta = signal.kaiserord(STOPBAND_DB, width)
    numtaps |= 1
    cutoff = (1.0 - TRANSITION / 2) / factor
    return up * signal.firwin(numtaps, cutoff, window=("kaiser", beta))


def resample(clip, target_rate):
    """Polyphase windowed-sinc rate conversion.

    Output length is ``round(len(clip) * target_rate / clip.sample_rate)``.
    """
    if len(clip) == 0:
        raise EmptyClip("cannot resample an empty clip")
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    source_rate = clip.sample_rate
    if target_rate == source_rate:
        return AudioClip(clip.samples.copy(), source_rate)

    g = gcd(int(source_rate), int(target_rate))
    up, down = int(target_rate) // g, int(source_rate) // g
    h = _design_lowpass(up, down)
    delay = (len(h) - 1) // 2
    # pre-pad so the group delay lands on an output sample
    pre = (-delay) % down
    h = np.concatenate([np.zeros(pre), h])
    offset = (delay + pre) // down

    n_out = int(round(len(clip) * target_rate / source_rate))
    y = signal.upfirdn(h, clip.samples, up, down)[offset:offset + n_out]
    if len(y) < n_out:
        y = np.concatenate([y, np.zeros(n_out - len(y))])
    return AudioClip(y, int(target_rate))
