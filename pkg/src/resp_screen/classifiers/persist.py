"""Versioned JSON persistence for trained models.

Floats are written with 17 significant digits so every parameter round-trips
bit-exactly.
"""

import json
import math
from dataclasses import asdict

import numpy as np

from ..errors import ModelFormatError
from .balance import Standardizer
from .forest import RfConfig, RfModel, Tree
from .logistic import LrConfig, LrModel
from .mlp import MlpConfig, MlpModel

FORMAT = "resp_screen.model"
VERSION = 1


def _encode(obj):
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return json.dumps(obj if not isinstance(obj, np.bool_) else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            raise ValueError(f"refusing to serialise non-finite parameter {obj}")
        return format(float(obj), ".17g")
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _scaler(s):
    return {"mean": s.mean, "scale": s.scale}


def model_to_dict(model):
    doc = {"format": FORMAT, "version": VERSION, "kind": model.kind}
    if model.kind == "lr":
        doc["config"] = asdict(model.config)
        doc["seed"] = None
        doc["params"] = {"weights": model.weights, "bias": model.bias,
                         "scaler": _scaler(model.scaler), "n_iter": model.n_iter}
    elif model.kind == "mlp":
        doc["config"] = asdict(model.config)
        doc["seed"] = model.seed
        doc["params"] = {"hidden_weights": model.hidden_weights, "hidden_bias": model.hidden_bias,
                         "output_weights": model.output_weights, "output_bias": model.output_bias,
                         "scaler": _scaler(model.scaler), "n_epochs": model.n_epochs}
    elif model.kind == "rf":
        doc["config"] = asdict(model.config)
        doc["seed"] = model.seed
        doc["params"] = {
            "class_weight": model.class_weight,
            "n_features": model.n_features,
            "trees": [{"seed": t.seed, "feature": t.feature, "threshold": t.threshold,
                       "left": t.left, "right": t.right, "count": t.count} for t in model.trees],
        }
    else:
        raise ValueError(f"unknown model kind {model.kind!r}")
    return doc


def dumps(model):
    return _encode(model_to_dict(model))


def save_model(model, path):
    with open(path, "w") as fh:
        fh.write(dumps(model))
        fh.write("\n")


def _arr(x, dtype=np.float64):
    return np.asarray(x, dtype=dtype)


def model_from_dict(doc):
    if doc.get("format") != FORMAT:
        raise ModelFormatError(f"not a model document: format={doc.get('format')!r}")
    if doc.get("version") != VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")
    kind, p = doc.get("kind"), doc["params"]
    if kind in ("lr", "mlp"):
        scaler = Standardizer(_arr(p["scaler"]["mean"]), _arr(p["scaler"]["scale"]))
    if kind == "lr":
        return LrModel(_arr(p["weights"]), float(p["bias"]), scaler, LrConfig(**doc["config"]), p["n_iter"])
    if kind == "mlp":
        W1 = _arr(p["hidden_weights"])
        return MlpModel(W1, _arr(p["hidden_bias"]), _arr(p["output_weights"]), float(p["output_bias"]),
                        scaler, MlpConfig(**doc["config"]), doc["seed"], p["n_epochs"])
    if kind == "rf":
        trees = [Tree(_arr(t["feature"], np.int32), _arr(t["threshold"]), _arr(t["left"], np.int32),
                      _arr(t["right"], np.int32), _arr(t["count"]).reshape(-1, 2), t["seed"])
                 for t in p["trees"]]
        return RfModel(trees, _arr(p["class_weight"]), p["n_features"], RfConfig(**doc["config"]), doc["seed"])
    raise ModelFormatError(f"unknown model kind {kind!r}")


def loads(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    return model_from_dict(doc)


def load_model(path):
    with open(path) as fh:
        return loads(fh.read())
