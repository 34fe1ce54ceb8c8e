"""Acoustic COVID-19 screening baseline: preprocessing, MFCC features, balanced classifiers, ROC evaluation."""

from .audio import AudioClip, decode_audio, encode_wav, load_clip, resample
from .evaluation import evaluate, read_scores, roc_curve, write_scores
from .features import FeatureConfig, deltas, extract_features, mfcc
from .pipeline import (FoldSplit, Manifest, RunReport, ensemble_score, load_folds, load_manifest, run_cv,
                       score_file)
from .preprocess import SadConfig, normalize_amplitude, preprocess, sound_activity_detect, trim_edges

__version__ = "0.1.0"
