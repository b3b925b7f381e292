"""Ego action labels from motion thresholds, and labeled relation-chain windows."""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .calculi import RelationTuple, parse_relation, relation_text
from .graph import Pair, Qxg
from .scene import EGO_ID, EgoState, Scene

DEFAULT_WINDOW = 5
# strict positivity of a measured magnitude
ACCEL_POSITIVE_TOL = 1e-9
ABSENT = "-"


class ActionLabel(str, Enum):
    STOP = "Stop"
    ACCELERATE = "Accelerate"
    STEERING_RIGHT = "SteeringRight"
    STEERING_LEFT = "SteeringLeft"
    CRUISING = "Cruising"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "ActionLabel":
        key = text.replace(" ", "").replace("_", "").lower()
        for label in cls:
            if label.value.lower() == key:
                return label
        raise ValueError(f"unknown action {text!r}; expected one of {[a.value for a in cls]}")


@dataclass(frozen=True)
class ActionThresholds:
    eps_v: float = 0.2
    eps_a: float = 0.1
    eps_omega_right: float = 0.1
    eps_omega_left: float = 0.1
    v_zero_tol: float = 0.05

    def __post_init__(self):
        for name in ("eps_v", "eps_a", "eps_omega_right", "eps_omega_left", "v_zero_tol"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")


DEFAULT_THRESHOLDS = ActionThresholds()


def label_frame(ego: EgoState, th: ActionThresholds = DEFAULT_THRESHOLDS) -> ActionLabel:
    """Label one ego state. Rules are tried in order Stop, SteeringRight,
    SteeringLeft, Accelerate, and Cruising is the fallback."""
    v = ego.speed
    a = ego.accel_magnitude
    omega = ego.angular_velocity_z
    if v < th.eps_v and a < th.eps_a:
        return ActionLabel.STOP
    accelerating = a > ACCEL_POSITIVE_TOL
    if accelerating and omega > th.eps_omega_right:
        return ActionLabel.STEERING_RIGHT
    if accelerating and omega < -th.eps_omega_left:
        return ActionLabel.STEERING_LEFT
    if accelerating and (v > th.eps_v or v < th.v_zero_tol):
        return ActionLabel.ACCELERATE
    return ActionLabel.CRUISING


def label_scene(scene: Scene, th: ActionThresholds = DEFAULT_THRESHOLDS,
                n: int = DEFAULT_WINDOW) -> list[tuple[int, ActionLabel]]:
    """One label per n-frame window, taken from the window's last frame."""
    if n < 1:
        raise ValueError("window length must be positive")
    if len(scene.frames) < n:
        raise ValueError(f"scene {scene.scene_id!r} has {len(scene.frames)} frames, "
                         f"fewer than the window length {n}")
    return [(k, label_frame(scene.frames[k].ego, th)) for k in range(n - 1, len(scene.frames))]


@dataclass(frozen=True)
class LabeledWindow:
    scene_id: str
    end_frame: int
    label: ActionLabel
    pair: Pair
    chain: tuple[Optional[RelationTuple], ...]

    def to_json(self) -> str:
        return json.dumps({
            "scene_id": self.scene_id,
            "end_frame": self.end_frame,
            "label": self.label.value,
            "pair": list(self.pair),
            "chain": [ABSENT if r is None else relation_text(r) for r in self.chain],
        })

    @classmethod
    def from_json(cls, line: str) -> "LabeledWindow":
        d = json.loads(line)
        return cls(
            scene_id=d["scene_id"],
            end_frame=int(d["end_frame"]),
            label=ActionLabel(d["label"]),
            pair=tuple(d["pair"]),
            chain=tuple(None if t == ABSENT else parse_relation(t) for t in d["chain"]),
        )


def make_windows(scene: Scene, qxg: Qxg, th: ActionThresholds = DEFAULT_THRESHOLDS,
                 n: int = DEFAULT_WINDOW, *, ego_only: bool = False) -> list[LabeledWindow]:
    windows = []
    for end_frame, label in label_scene(scene, th, n):
        for pair in qxg.pairs_at(end_frame):
            if ego_only and EGO_ID not in pair:
                continue
            windows.append(LabeledWindow(scene.scene_id, end_frame, label, pair,
                                         tuple(qxg.chain(pair[0], pair[1], end_frame, n))))
    return windows


def labels_csv(scene_id: str, labels: list[tuple[int, ActionLabel]]) -> str:
    rows = ["scene_id,end_frame,label"] + [f"{scene_id},{k},{lab.value}" for k, lab in labels]
    return "\n".join(rows) + "\n"
