"""Manifests, fold lists, file scoring, cross-validation runs and run directories."""

import csv
import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import evaluation
from .audio import CANONICAL_RATE, load_clip
from .classifiers import LabeledFrameSet, load_model, predict_frames, save_model, train_model
from .errors import (DuplicateId, FoldLeak, InvalidSplit, MissingFile, ParseError, PreprocessError,
                     UnscorableFile, WrongModelCount)
from .features import FeatureCache, FeatureConfig, extract_features
from .preprocess import SadConfig, preprocess

log = logging.getLogger(__name__)

N_FOLDS = 5
LABEL_TOKENS = {"p": 1, "n": 0}


@dataclass(frozen=True)
class ManifestEntry:
    file_id: str
    path: str
    label: int = None  # 1 COVID, 0 non-COVID, None for blind sets


@dataclass
class Manifest:
    entries: list
    root: str = "."

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.file_id in seen:
                raise DuplicateId(f"duplicate id {e.file_id!r}")
            seen.add(e.file_id)
        self._by_id = {e.file_id: e for e in self.entries}

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, file_id):
        return self._by_id[file_id]

    def __contains__(self, file_id):
        return file_id in self._by_id

    @property
    def ids(self):
        return [e.file_id for e in self.entries]

    @property
    def labeled(self):
        return all(e.label is not None for e in self.entries)

    @property
    def labels(self):
        return {e.file_id: e.label for e in self.entries if e.label is not None}

    def resolve(self, file_id):
        path = self._by_id[file_id].path
        return path if os.path.isabs(path) else os.path.join(self.root, path)


def load_manifest(path, check_files=True):
    """Read an ``id,path[,label]`` CSV; relative paths resolve against the manifest's directory."""
    root = os.path.dirname(os.path.abspath(path))
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty manifest")
    header = [c.strip() for c in rows[0]]
    if header not in (["id", "path"], ["id", "path", "label"]):
        raise ParseError(f"{path}: expected header 'id,path[,label]', got {rows[0]!r}")
    has_label = len(header) == 3
    entries = []
    seen = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        file_id, file_path = row[0].strip(), row[1].strip()
        if not file_id or not file_path:
            raise ParseError(f"{path}:{lineno}: empty id or path")
        if file_id in seen:
            raise DuplicateId(f"{path}:{lineno}: duplicate id {file_id!r}")
        seen.add(file_id)
        label = None
        if has_label:
            token = row[2].strip()
            if token not in LABEL_TOKENS:
                raise ParseError(f"{path}:{lineno}: label must be 'p' or 'n', got {token!r}")
            label = LABEL_TOKENS[token]
        entries.append(ManifestEntry(file_id, file_path, label))
    manifest = Manifest(entries, root)
    if check_files:
        for e in entries:
            if not os.path.exists(manifest.resolve(e.file_id)):
                raise MissingFile(f"{path}: {e.file_id} -> {e.path} does not exist")
    return manifest


def write_manifest(manifest, path, with_labels=True):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if with_labels:
            writer.writerow(["id", "path", "label"])
            for e in manifest.entries:
                writer.writerow([e.file_id, e.path, "p" if e.label == 1 else "n"])
        else:
            writer.writerow(["id", "path"])
            for e in manifest.entries:
                writer.writerow([e.file_id, e.path])


@dataclass
class FoldSplit:
    folds: list  # [(train_ids, val_ids), ...]

    def __len__(self):
        return len(self.folds)

    def validate(self, manifest=None, n_folds=N_FOLDS):
        if n_folds is not None and len(self.folds) != n_folds:
            raise InvalidSplit(f"expected {n_folds} folds, got {len(self.folds)}")
        owner = {}
        for k, (train, val) in enumerate(self.folds, start=1):
            leaked = sorted(set(train) & set(val))
            if leaked:
                raise FoldLeak(f"fold {k}: id(s) in both train and validation: {', '.join(leaked)}")
            for file_id in val:
                if file_id in owner:
                    raise FoldLeak(f"{file_id} validates in folds {owner[file_id]} and {k}")
                owner[file_id] = k
        every = set(owner)
        for train, _ in self.folds:
            every.update(train)
        missing = sorted(every - set(owner))
        if missing:
            raise InvalidSplit(f"id(s) never used for validation: {', '.join(missing)}")
        if manifest is not None:
            unknown = sorted(i for i in every if i not in manifest)
            if unknown:
                raise InvalidSplit(f"id(s) not in manifest: {', '.join(unknown)}")


def _read_ids(path):
    with open(path) as fh:
        return [line.strip() for line in fh if line.strip()]


def load_folds(folds_dir, n_folds=N_FOLDS):
    folds = []
    for k in range(1, n_folds + 1):
        train_path = os.path.join(folds_dir, f"train_fold_{k}.txt")
        val_path = os.path.join(folds_dir, f"val_fold_{k}.txt")
        for p in (train_path, val_path):
            if not os.path.exists(p):
                raise MissingFile(f"fold list {p} does not exist")
        folds.append((_read_ids(train_path), _read_ids(val_path)))
    return FoldSplit(folds)


def write_folds(split, folds_dir):
    os.makedirs(folds_dir, exist_ok=True)
    for k, (train, val) in enumerate(split.folds, start=1):
        for name, ids in (("train", train), ("val", val)):
            with open(os.path.join(folds_dir, f"{name}_fold_{k}.txt"), "w") as fh:
                fh.writelines(f"{i}\n" for i in ids)


def clip_features(clip, sad_cfg=SadConfig(), feat_cfg=FeatureConfig()):
    """Preprocess a clip and return its frame features, rounded through float32."""
    frames = extract_features(preprocess(clip, sad_cfg), feat_cfg)
    return frames.astype(np.float32).astype(np.float64)


def file_features(manifest, ids=None, sad_cfg=SadConfig(), feat_cfg=FeatureConfig(), cache_dir=None,
                  n_jobs=1):
    """Map each id to its feature matrix, or to the PreprocessError that made it unscorable."""
    ids = manifest.ids if ids is None else list(ids)
    cache = FeatureCache(os.path.join(cache_dir, _sad_fingerprint(sad_cfg)), feat_cfg) if cache_dir else None

    def work(file_id):
        if cache is not None:
            hit = cache.get(file_id)
            if hit is not None:
                return hit.astype(np.float64)
        try:
            frames = clip_features(load_clip(manifest.resolve(file_id), CANONICAL_RATE), sad_cfg, feat_cfg)
        except PreprocessError as exc:
            return exc
        if cache is not None:
            cache.put(file_id, frames)
        return frames

    if n_jobs == 1:
        results = [work(i) for i in ids]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(work, ids))
    return dict(zip(ids, results))


def _sad_fingerprint(sad_cfg):
    return hashlib.sha256(json.dumps(asdict(sad_cfg), sort_keys=True).encode()).hexdigest()[:12]


def frame_set(ids, features, labels):
    """Stack the frames of every scorable file in ``ids``; each frame inherits its file's label."""
    mats, ys, owners = [], [], []
    for file_id in ids:
        frames = features[file_id]
        if isinstance(frames, Exception):
            log.warning("skipping unscorable training file %s: %s", file_id, frames)
            continue
        mats.append(frames)
        ys.append(np.full(frames.shape[0], labels[file_id], dtype=np.int64))
        owners.append(np.full(frames.shape[0], file_id))
    return LabeledFrameSet(np.vstack(mats), np.concatenate(ys), np.concatenate(owners))


def score_frames(model, frames):
    return float(np.mean(predict_frames(model, frames)))


def score_file(model, clip, sad_cfg=SadConfig(), feat_cfg=FeatureConfig(), file_id="<clip>"):
    """Mean frame probability of one clip."""
    try:
        frames = clip_features(clip, sad_cfg, feat_cfg)
    except PreprocessError as exc:
        raise UnscorableFile(file_id, exc) from exc
    return score_frames(model, frames)


def check_ensemble(models, expected=N_FOLDS):
    if len(models) != expected:
        raise WrongModelCount(f"expected {expected} fold models, got {len(models)}")
    kinds = {m.kind for m in models}
    if len(kinds) != 1:
        raise WrongModelCount(f"fold models mix kinds {sorted(kinds)}")


def ensemble_frames(models, frames, expected=N_FOLDS):
    check_ensemble(models, expected)
    return float(np.mean([score_frames(m, frames) for m in models]))


def ensemble_score(models, clip, sad_cfg=SadConfig(), feat_cfg=FeatureConfig(), file_id="<clip>",
                   expected=N_FOLDS):
    """Average of the per-model file scores."""
    check_ensemble(models, expected)
    try:
        frames = clip_features(clip, sad_cfg, feat_cfg)
    except PreprocessError as exc:
        raise UnscorableFile(file_id, exc) from exc
    return ensemble_frames(models, frames, expected)


def summarize(fold_aucs):
    """(mean, standard error) with the standard error = sample sd / sqrt(n)."""
    a = np.asarray(fold_aucs, dtype=np.float64)
    return float(a.mean()), float(a.std(ddof=1) / np.sqrt(a.size))


def format_avg_stderr(mean, stderr):
    return f"{mean:.2f} (±{stderr:.2f})"


@dataclass
class RunReport:
    model_kind: str
    fold_aucs: list
    fold_spec_at_80_sens: list
    seed: int
    config_fingerprint: str
    model_paths: list = field(default_factory=list)
    unscorable: dict = field(default_factory=dict)

    @property
    def mean_auc(self):
        return summarize(self.fold_aucs)[0]

    @property
    def std_err(self):
        return summarize(self.fold_aucs)[1]

    def to_dict(self):
        d = asdict(self)
        d["mean_auc"] = self.mean_auc
        d["std_err"] = self.std_err
        return d

    @classmethod
    def from_dict(cls, d):
        d = {k: v for k, v in d.items() if k not in ("mean_auc", "std_err")}
        return cls(**d)


def render_table(reports, sound="Cough"):
    """Text table with one row per model: fold AUCs and 'Avg.Val (Std. Err.)'."""
    n = max(len(r.fold_aucs) for r in reports)
    head = ["Sound", "Model"] + [f"Fold {k}" for k in range(1, n + 1)] + ["Avg.Val (Std. Err.)"]
    rows = []
    for i, r in enumerate(reports):
        rows.append([sound if i == 0 else "", r.model_kind.upper()]
                    + [f"{a:.2f}" for a in r.fold_aucs]
                    + [format_avg_stderr(r.mean_auc, r.std_err)])
    widths = [max(len(str(x)) for x in col) for col in zip(head, *rows)]
    line = "-" * (sum(widths) + 2 * (len(widths) - 1))
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    out = [line, fmt.format(*head).rstrip(), line] + [fmt.format(*row).rstrip() for row in rows] + [line]
    return "\n".join(out)


def fold_seed(seed, fold):
    return int(np.random.SeedSequence([seed, fold]).generate_state(1)[0])


def config_fingerprint(model_kind, seed, sad_cfg, feat_cfg, model_config=None):
    blob = json.dumps({
        "model": model_kind, "seed": seed, "sad": asdict(sad_cfg), "features": asdict(feat_cfg),
        "model_config": asdict(model_config) if model_config is not None else None,
    }, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_cv(manifest, split, model_kind, seed=0, sad_cfg=SadConfig(), feat_cfg=FeatureConfig(),
           run_dir=None, features=None, model_config=None, n_jobs=1, cache_dir=None):
    """Train one model per fold, score its validation files and report validation AUCs.

    ``features`` may hold precomputed per-file features (as from file_features).
    When ``run_dir`` is given, models, validation scores and the report are written there.
    """
    if not manifest.labeled:
        raise ValueError("cross-validation needs a fully labelled manifest")
    split.validate(manifest, n_folds=None)
    if features is None:
        features = file_features(manifest, None, sad_cfg, feat_cfg, cache_dir, n_jobs)
    labels = manifest.labels
    fingerprint = config_fingerprint(model_kind, seed, sad_cfg, feat_cfg, model_config)

    if run_dir is not None:
        os.makedirs(os.path.join(run_dir, "models"), exist_ok=True)
        os.makedirs(os.path.join(run_dir, "scores"), exist_ok=True)

    aucs, specs, paths, priors, unscorable = [], [], [], [], {}
    for k, (train_ids, val_ids) in enumerate(split.folds, start=1):
        train_set = frame_set(train_ids, features, labels)
        leaked = set(np.unique(train_set.file_ids)) & set(val_ids)
        if leaked:
            raise FoldLeak(f"fold {k}: validation frames in training set: {sorted(leaked)}")
        model = train_model(model_kind, train_set, fold_seed(seed, k), model_config, n_jobs)
        prior = float(np.mean([labels[i] for i in train_ids]))
        priors.append(prior)

        scores = {}
        for file_id in val_ids:
            frames = features[file_id]
            if isinstance(frames, Exception):
                log.warning("fold %d: %s unscorable (%s); using training prior %.4f", k, file_id, frames, prior)
                unscorable[file_id] = str(frames)
                scores[file_id] = prior
            else:
                scores[file_id] = score_frames(model, frames)
        ids, s, y = evaluation.align(scores, {i: labels[i] for i in val_ids})
        summary = evaluation.evaluate(s, y)
        aucs.append(summary.auc)
        specs.append(summary.spec_at_80_sens)
        log.info("fold %d: %s AUC %.2f", k, model_kind, summary.auc)

        if run_dir is not None:
            path = os.path.join("models", f"fold_{k}.json")
            save_model(model, os.path.join(run_dir, path))
            paths.append(path)
            evaluation.write_scores(scores, os.path.join(run_dir, "scores", f"val_fold_{k}.csv"))

    report = RunReport(model_kind, aucs, specs, seed, fingerprint, paths, unscorable)
    if run_dir is not None:
        _dump_json({
            "model": model_kind, "seed": seed, "n_folds": len(split),
            "sad_config": asdict(sad_cfg), "feature_config": asdict(feat_cfg),
            "model_config": asdict(model_config) if model_config is not None else None,
            "fold_priors": priors, "fingerprint": fingerprint,
        }, os.path.join(run_dir, "config.json"))
        _dump_json(report.to_dict(), os.path.join(run_dir, "report.json"))
        with open(os.path.join(run_dir, "report.txt"), "w") as fh:
            fh.write(render_table([report]) + "\n")
    return report


def load_run(run_dir):
    """(models, config) for a finished run directory."""
    with open(os.path.join(run_dir, "config.json")) as fh:
        config = json.load(fh)
    model_dir = os.path.join(run_dir, "models")
    names = sorted(n for n in os.listdir(model_dir) if n.startswith("fold_") and n.endswith(".json")) \
        if os.path.isdir(model_dir) else []
    models = [load_model(os.path.join(model_dir, n)) for n in names]
    return models, config


def score_blind(run_dir, manifest, n_jobs=1, cache_dir=None):
    """Ensemble-score every file of ``manifest`` with the fold models stored in ``run_dir``.

    Unscorable files receive the mean training prior of the folds.
    """
    models, config = load_run(run_dir)
    check_ensemble(models, config.get("n_folds", N_FOLDS))
    sad_cfg = SadConfig(**config["sad_config"])
    feat_cfg = FeatureConfig(**config["feature_config"])
    prior = float(np.mean(config["fold_priors"]))
    features = file_features(manifest, None, sad_cfg, feat_cfg, cache_dir, n_jobs)
    scores = {}
    for file_id in manifest.ids:
        frames = features[file_id]
        if isinstance(frames, Exception):
            log.warning("%s unscorable (%s); using training prior %.4f", file_id, frames, prior)
            scores[file_id] = prior
        else:
            scores[file_id] = ensemble_frames(models, frames, len(models))
    return scores
