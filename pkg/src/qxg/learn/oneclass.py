"""Per-action one-class models and recall/precision evaluation."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from ..actions import ActionLabel
from .iforest import train_iforest
from .lof import train_lof
from .softmax import SoftmaxModel

log = logging.getLogger(__name__)

ONE_CLASS_KINDS = ("iforest", "lof")


@dataclass
class OneClassModel:
    """An anomaly model plus its decision threshold.

    ``model`` is anything with ``score(X)`` returning anomaly scores (higher
    is more anomalous). Points scoring above ``threshold`` are outliers.
    ``score_range`` is the calibration range used to normalise scores into
    relevance values.
    """

    model: Any
    threshold: float
    score_range: tuple[float, float] = (0.0, 1.0)

    def score(self, X) -> np.ndarray:
        return np.asarray(self.model.score(X), dtype=np.float64)

    def is_inlier(self, X) -> np.ndarray:
        return self.score(X) <= self.threshold


@dataclass
class OneClassBundle:
    kind: str
    models: dict[ActionLabel, OneClassModel]
    contamination: float = 0.1
    seed: int = 0
    skipped: list[str] = field(default_factory=list)

    def __contains__(self, action) -> bool:
        return ActionLabel(action) in self.models

    def __getitem__(self, action) -> OneClassModel:
        action = ActionLabel(action)
        if action not in self.models:
            raise KeyError(f"no model for action {action.value}")
        return self.models[action]


def action_seed(seed: int, action: ActionLabel) -> int:
    return int(np.random.SeedSequence([seed, list(ActionLabel).index(action)]).generate_state(1)[0])


def fit_anomaly_model(X, kind: str, seed: int, *, n_trees: int = 100, subsample: int = 256,
                      k: int = 20):
    if kind == "iforest":
        return train_iforest(X, n_trees=n_trees, subsample=subsample, seed=seed)
    if kind == "lof":
        return train_lof(X, k=min(k, len(X) - 1))
    raise ValueError(f"unknown one-class model kind {kind!r}; expected one of {ONE_CLASS_KINDS}")


def train_one_class(X, labels: Sequence, kind: str = "iforest", contamination: float = 0.1,
                    seed: int = 0, actions: Optional[Sequence] = None, **params) -> OneClassBundle:
    """Fit one anomaly model per action on that action's vectors only.

    The threshold is the (1 - contamination) quantile of the model's training
    scores, so a fraction ``contamination`` of training points lands above it.
    Actions with fewer than two samples are skipped and recorded.
    """
    if not 0.0 <= contamination < 1.0:
        raise ValueError("contamination must lie in [0, 1)")
    X = np.asarray(X, dtype=np.float64)
    labels = [ActionLabel(lab) for lab in labels]
    wanted = [ActionLabel(a) for a in actions] if actions is not None else list(ActionLabel)
    bundle = OneClassBundle(kind, {}, contamination, seed)
    for action in wanted:
        rows = np.flatnonzero([lab == action for lab in labels])
        if len(rows) < 2:
            if len(rows) or actions is not None:
                msg = f"{action.value}: {len(rows)} sample(s), need at least 2"
                log.warning("skipping one-class model: %s", msg)
                bundle.skipped.append(msg)
            continue
        Xa = X[rows]
        model = fit_anomaly_model(Xa, kind, action_seed(seed, action), **params)
        train_scores = model.training_scores(Xa)
        tau = float(np.quantile(train_scores, 1.0 - contamination))
        if kind == "iforest":
            score_range = (0.0, 1.0)
        else:
            score_range = (float(train_scores.min()), float(train_scores.max()))
        bundle.models[action] = OneClassModel(model, tau, score_range)
    return bundle


# --- evaluation ---------------------------------------------------------------

@dataclass
class ActionMetrics:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def recall(self) -> Optional[float]:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else None

    @property
    def precision(self) -> Optional[float]:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else None


UNDEFINED = "undefined"


@dataclass
class Metrics:
    per_action: dict[ActionLabel, ActionMetrics]

    def __getitem__(self, action) -> ActionMetrics:
        return self.per_action[ActionLabel(action)]

    def to_csv(self) -> str:
        def fmt(x):
            return UNDEFINED if x is None else f"{x:.6f}"

        rows = ["action,recall,precision,tp,fp,fn,tn"]
        for action, m in self.per_action.items():
            rows.append(f"{action.value},{fmt(m.recall)},{fmt(m.precision)},"
                        f"{m.tp},{m.fp},{m.fn},{m.tn}")
        return "\n".join(rows) + "\n"


def confusion(predicted_positive, actual_positive) -> ActionMetrics:
    pred = np.asarray(predicted_positive, dtype=bool)
    act = np.asarray(actual_positive, dtype=bool)
    return ActionMetrics(tp=int((pred & act).sum()), fp=int((pred & ~act).sum()),
                         fn=int((~pred & act).sum()), tn=int((~pred & ~act).sum()))


def evaluate(model, X, labels: Sequence) -> Metrics:
    """Per-action confusion counts.

    For a one-class bundle, action ``a`` counts a window as predicted
    positive when it is an inlier under ``a``'s model; every other window in
    the pool is a negative for ``a``. For a softmax model the counts are
    one-vs-rest over the argmax prediction.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = [ActionLabel(lab) for lab in labels]
    if len(labels) == 0:
        raise ValueError("empty test set")
    per_action = {}
    if isinstance(model, OneClassBundle):
        for action, ocm in model.models.items():
            per_action[action] = confusion(ocm.is_inlier(X), [lab == action for lab in labels])
    elif isinstance(model, SoftmaxModel):
        predicted = model.predict(X)
        for action in ActionLabel:
            per_action[action] = confusion([p == action for p in predicted],
                                           [lab == action for lab in labels])
    else:
        raise TypeError(f"cannot evaluate {type(model).__name__}")
    return Metrics(per_action)
