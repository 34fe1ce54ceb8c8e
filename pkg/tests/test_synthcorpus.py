import os

import numpy as np
import pytest

from resp_screen.audio import decode_audio, load_clip
from resp_screen.pipeline import load_folds, load_manifest
from resp_screen.preprocess import preprocess
from resp_screen.synthcorpus import CorpusSpec, generate_corpus, synthesize


def tree_bytes(root):
    out = {}
    for dirpath, _, names in os.walk(root):
        for name in names:
            path = os.path.join(dirpath, name)
            out[os.path.relpath(path, root)] = open(path, "rb").read()
    return out


def test_same_seed_gives_identical_bytes(tmp_path):
    spec = CorpusSpec(n_neg=5, n_pos=5, seed=11)
    generate_corpus(spec, tmp_path / "a")
    generate_corpus(spec, tmp_path / "b", n_jobs=3)
    a, b = tree_bytes(tmp_path / "a"), tree_bytes(tmp_path / "b")
    assert a.keys() == b.keys() and len(a) == 10 + 1 + 10
    assert a == b


def test_different_seed_differs(tmp_path):
    generate_corpus(CorpusSpec(n_neg=5, n_pos=5, seed=1), tmp_path / "a")
    generate_corpus(CorpusSpec(n_neg=5, n_pos=5, seed=2), tmp_path / "b")
    assert tree_bytes(tmp_path / "a") != tree_bytes(tmp_path / "b")


def test_null_corpus_classes_share_generator():
    spec = CorpusSpec(separability=0.0)
    for seed in range(3):
        neg = synthesize(0, np.random.default_rng(seed), spec)
        pos = synthesize(1, np.random.default_rng(seed), spec)
        np.testing.assert_array_equal(neg, pos)


def test_separability_changes_positive_class_only():
    spec = CorpusSpec(separability=1.0)
    null = CorpusSpec(separability=0.0)
    np.testing.assert_array_equal(synthesize(0, np.random.default_rng(4), spec),
                                  synthesize(0, np.random.default_rng(4), null))
    assert not np.array_equal(synthesize(1, np.random.default_rng(4), spec),
                              synthesize(1, np.random.default_rng(4), null))


def spectral_centroid(x, rate=44100):
    mag = np.abs(np.fft.rfft(x))
    freqs = np.fft.rfftfreq(x.size, 1 / rate)
    return np.sum(freqs * mag) / np.sum(mag)


def test_positive_class_sits_higher_in_frequency():
    spec = CorpusSpec(separability=1.0)
    neg = [spectral_centroid(synthesize(0, np.random.default_rng(s), spec)) for s in range(20)]
    pos = [spectral_centroid(synthesize(1, np.random.default_rng(100 + s), spec)) for s in range(20)]
    assert np.median(pos) > np.median(neg) + 300


def test_corpus_layout_and_invariants(small_corpus):
    root, manifest, split = small_corpus
    loaded = load_manifest(os.path.join(root, "manifest.csv"))
    assert loaded.entries == manifest.entries
    assert sum(loaded.labels.values()) == 10 and len(loaded) == 20
    folds = load_folds(os.path.join(root, "folds"))
    folds.validate(loaded)
    assert folds.folds == split.folds
    # stratified: two of each class validate in every fold
    for _, val in split.folds:
        assert sorted(loaded.labels[i] for i in val) == [0, 0, 1, 1]


def test_every_file_survives_preprocessing(small_corpus):
    root, manifest, _ = small_corpus
    for file_id in manifest.ids:
        raw = decode_audio(manifest.resolve(file_id))
        assert raw.sample_rate == 44100
        peak = np.max(np.abs(raw.samples))
        assert 0.3 - 1e-4 <= peak <= 0.9 + 1e-4
        assert 1.0 <= len(raw) / 44100 <= 2.0
        assert len(preprocess(load_clip(manifest.resolve(file_id)))) >= 1024


def test_duration_and_peak_do_not_depend_on_label():
    spec = CorpusSpec(separability=1.0)
    for seed in range(5):
        a = synthesize(0, np.random.default_rng(seed), spec)
        b = synthesize(1, np.random.default_rng(seed), spec)
        assert a.size == b.size
        assert np.max(np.abs(a)) == pytest.approx(np.max(np.abs(b)), rel=1e-12)


def test_spec_validation():
    with pytest.raises(ValueError):
        CorpusSpec(separability=1.5)
    with pytest.raises(ValueError):
        CorpusSpec(n_pos=0)
    with pytest.raises(ValueError):
        CorpusSpec(duration_range=(0.1, 1.0))
    with pytest.raises(ValueError):
        CorpusSpec(n_neg=3, n_pos=3)
