"""Qualitative explainable graphs for tracked driving scenes."""
from .actions import ActionLabel, ActionThresholds, LabeledWindow, label_frame, label_scene, make_windows
from .calculi import CalculiConfig, RelationTuple, relate
from .explain import ExplanationQuery, ExplanationReport, explain, render_chain
from .features import EncodingSchema, decode, encode
from .graph import BuildStats, Qxg, build
from .scenarios import ScenarioSpec, generate
from .scene import Scene, load_scene, parse_scene, serialize_scene

__version__ = "0.1.0"

__all__ = [
    "ActionLabel", "ActionThresholds", "BuildStats", "CalculiConfig", "EncodingSchema",
    "ExplanationQuery", "ExplanationReport", "LabeledWindow", "Qxg", "RelationTuple", "Scene",
    "ScenarioSpec", "build", "decode", "encode", "explain", "generate", "label_frame",
    "label_scene", "load_scene", "make_windows", "parse_scene", "relate", "render_chain",
    "serialize_scene",
]
