"""Versioned JSON model files."""
from __future__ import annotations

import hashlib
import json

from ..actions import ActionLabel
from ..features import SCHEMA_VERSION
from .iforest import IsolationForest
from .lof import LofModel
from .oneclass import OneClassBundle, OneClassModel
from .softmax import SoftmaxModel

FORMAT = "qxg-model"
FORMAT_VERSION = 1

_KINDS = {"iforest": IsolationForest, "lof": LofModel, "softmax": SoftmaxModel}


class ModelFileError(ValueError):
    pass


class ModelVersionError(ModelFileError):
    pass


class CorruptModelError(ModelFileError):
    pass


def model_to_dict(model) -> dict:
    doc = {"format": FORMAT, "version": FORMAT_VERSION, "schema": SCHEMA_VERSION}
    if isinstance(model, OneClassBundle):
        doc.update({
            "kind": "bundle",
            "model_kind": model.kind,
            "contamination": model.contamination,
            "seed": model.seed,
            "skipped": list(model.skipped),
            "models": {
                action.value: {"threshold": m.threshold, "score_range": list(m.score_range),
                               "model": m.model.to_dict()}
                for action, m in model.models.items()
            },
        })
    elif type(model).kind in _KINDS:
        doc.update({"kind": model.kind, "model": model.to_dict()})
    else:
        raise TypeError(f"cannot serialise {type(model).__name__}")
    return doc


def model_from_dict(doc: dict):
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise CorruptModelError("not a model file")
    if doc.get("version") != FORMAT_VERSION or doc.get("schema") != SCHEMA_VERSION:
        raise ModelVersionError(
            f"model file version {doc.get('version')!r} / schema {doc.get('schema')!r} does not "
            f"match {FORMAT_VERSION} / {SCHEMA_VERSION}")
    try:
        kind = doc["kind"]
        if kind == "bundle":
            cls = _KINDS[doc["model_kind"]]
            stored = {ActionLabel(a): m for a, m in doc["models"].items()}
            # keys are sorted on disk; restore the label enumeration order
            models = {
                a: OneClassModel(cls.from_dict(stored[a]["model"]), float(stored[a]["threshold"]),
                                 tuple(stored[a]["score_range"]))
                for a in ActionLabel if a in stored
            }
            return OneClassBundle(doc["model_kind"], models, float(doc["contamination"]),
                                  int(doc["seed"]), list(doc["skipped"]))
        return _KINDS[kind].from_dict(doc["model"])
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise CorruptModelError(f"malformed model file: {exc!r}") from exc


def dumps_model(model) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True)


def model_id(model) -> str:
    """Short content hash identifying a trained model."""
    return hashlib.sha256(dumps_model(model).encode("utf-8")).hexdigest()[:12]


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_model(model))


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptModelError(f"model file is not valid JSON: {exc}") from exc
    return model_from_dict(doc)
