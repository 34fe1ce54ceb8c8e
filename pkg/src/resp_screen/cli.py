"""Command-line entry point: ``resp-screen {gen,train,score,eval}``.

Exit status is 0 on success, 1 on runtime failure and 2 on usage errors.
"""

import argparse
import logging
import os
import sys

from . import evaluation
from .classifiers import MODEL_KINDS
from .errors import ScreeningError
from .features import FeatureConfig
from .pipeline import (load_folds, load_manifest, render_table, run_cv, score_blind)
from .preprocess import SadConfig
from .synthcorpus import CorpusSpec, generate_corpus

RUN_DIR_ENV = "RESP_SCREEN_RUN_DIR"

log = logging.getLogger("resp_screen")


def _add_common(p):
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="worker threads (default: available cores)")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_overrides(p):
    g = p.add_argument_group("feature / SAD overrides")
    g.add_argument("--n-mfcc", type=int, default=FeatureConfig.n_mfcc)
    g.add_argument("--n-mels", type=int, default=FeatureConfig.n_mels)
    g.add_argument("--frame-length", type=int, default=FeatureConfig.frame_length)
    g.add_argument("--hop-length", type=int, default=FeatureConfig.hop_length)
    g.add_argument("--delta-width", type=int, default=FeatureConfig.delta_width)
    g.add_argument("--sad-threshold", type=float, default=SadConfig.amplitude_threshold)
    g.add_argument("--sad-margin", type=float, default=SadConfig.margin, help="seconds")
    g.add_argument("--edge-trim", type=float, default=SadConfig.edge_trim, help="seconds")


def build_parser():
    parser = argparse.ArgumentParser(prog="resp-screen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic labelled corpus with a 5-fold split")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n", type=int, default=100, help="files per class")
    p.add_argument("--n-pos", type=int, default=None, help="positive files (default: --n)")
    p.add_argument("--delta", type=float, default=1.0, help="class separability in [0, 1]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-duration", type=float, default=1.0)
    p.add_argument("--max-duration", type=float, default=2.0)
    _add_common(p)

    p = sub.add_parser("train", help="5-fold cross-validated training")
    p.add_argument("--manifest", required=True)
    p.add_argument("--folds", default=None, help="fold-list directory (default: <manifest dir>/folds)")
    p.add_argument("--model", required=True, choices=MODEL_KINDS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--run-dir", default=os.environ.get(RUN_DIR_ENV),
                   help=f"output run directory (default: ${RUN_DIR_ENV})")
    p.add_argument("--cache-dir", default=None, help="optional on-disk feature cache")
    _add_overrides(p)
    _add_common(p)

    p = sub.add_parser("score", help="ensemble-score a blind manifest with a run's fold models")
    p.add_argument("--run-dir", default=os.environ.get(RUN_DIR_ENV))
    p.add_argument("--manifest", required=True)
    p.add_argument("--scores", default=None, help="output CSV (default: <run-dir>/scores/blind.csv)")
    p.add_argument("--cache-dir", default=None)
    _add_common(p)

    p = sub.add_parser("eval", help="AUC and specificity at 80%% sensitivity for a score file")
    p.add_argument("--scores", required=True)
    p.add_argument("--labels", required=True, help="labelled manifest CSV")
    p.add_argument("--plot", default=None, help="write the ROC to this .png/.svg")
    p.add_argument("--roc-csv", default=None, help="write (threshold, fpr, tpr) rows here")
    _add_common(p)
    return parser


def cmd_gen(args):
    spec = CorpusSpec(n_neg=args.n, n_pos=args.n if args.n_pos is None else args.n_pos,
                      duration_range=(args.min_duration, args.max_duration),
                      separability=args.delta, seed=args.seed)
    generate_corpus(spec, args.out, n_jobs=args.jobs)
    print(os.path.join(args.out, "manifest.csv"))
    return 0


def cmd_train(args):
    manifest = load_manifest(args.manifest)
    folds_dir = args.folds or os.path.join(os.path.dirname(os.path.abspath(args.manifest)), "folds")
    split = load_folds(folds_dir)
    split.validate(manifest)
    sad_cfg = SadConfig(args.sad_threshold, args.sad_margin, args.edge_trim)
    feat_cfg = FeatureConfig(n_mfcc=args.n_mfcc, frame_length=args.frame_length, hop_length=args.hop_length,
                             n_mels=args.n_mels, delta_width=args.delta_width)
    os.makedirs(args.run_dir, exist_ok=True)
    failed = os.path.join(args.run_dir, "FAILED")
    if os.path.exists(failed):
        os.remove(failed)
    try:
        report = run_cv(manifest, split, args.model, args.seed, sad_cfg, feat_cfg, run_dir=args.run_dir,
                        n_jobs=args.jobs, cache_dir=args.cache_dir)
    except Exception as exc:
        with open(failed, "w") as fh:
            fh.write(f"{type(exc).__name__}: {exc}\n")
        raise
    print(render_table([report]))
    return 0


def cmd_score(args):
    manifest = load_manifest(args.manifest)
    scores = score_blind(args.run_dir, manifest, n_jobs=args.jobs, cache_dir=args.cache_dir)
    out = args.scores or os.path.join(args.run_dir, "scores", "blind.csv")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    evaluation.write_scores(scores, out)
    print(out)
    return 0


def cmd_eval(args):
    scores = evaluation.read_scores(args.scores)
    labels = load_manifest(args.labels, check_files=False).labels
    ids, s, y = evaluation.align(scores, labels)
    summary = evaluation.evaluate(s, y)
    print(f"files: {len(ids)} ({int(y.sum())} positive)")
    print(f"AUC: {summary.auc:.2f}")
    print(f"Specificity at 80% sensitivity: {summary.spec_at_80_sens:.2f}")
    if args.roc_csv:
        evaluation.write_roc_csv(summary, args.roc_csv)
    if args.plot:
        evaluation.plot_roc({os.path.basename(args.scores): summary}, args.plot)
    return 0


COMMANDS = {"gen": cmd_gen, "train": cmd_train, "score": cmd_score, "eval": cmd_eval}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "run_dir", "unset") is None:
        parser.error(f"--run-dir is required (or set ${RUN_DIR_ENV})")
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        return COMMANDS[args.command](args)
    except (ScreeningError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
