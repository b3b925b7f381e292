"""Tracked scene domain types and the canonical JSON scene format."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

EGO_ID = "ego"
EGO_CATEGORY = "ego"
DEFAULT_EGO_SIZE = (4.5, 2.0)


class SceneError(ValueError):
    """Base class for scene parsing problems."""


class SceneSyntaxError(SceneError):
    """The document is not well-formed JSON of the expected shape."""


class SceneValidationError(SceneError):
    """The document parsed but violates a scene invariant."""


Vec2 = tuple[float, float]


@dataclass(frozen=True)
class AABB:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)


@dataclass(frozen=True)
class TrackedObject:
    id: str
    category: str
    center: Vec2
    size: Vec2  # (length, width)
    yaw_rad: float = 0.0

    def __post_init__(self):
        if not self.id:
            raise SceneValidationError("object id must be a non-empty string")
        if not (self.size[0] > 0 and self.size[1] > 0):
            raise SceneValidationError(f"object {self.id!r}: size components must be > 0")


@dataclass(frozen=True)
class EgoState:
    position: Vec2
    yaw_rad: float
    velocity: Vec2 = (0.0, 0.0)
    acceleration: Vec2 = (0.0, 0.0)
    # signed, positive = turning right
    angular_velocity_z: float = 0.0

    def __post_init__(self):
        values = (*self.position, self.yaw_rad, *self.velocity, *self.acceleration,
                  self.angular_velocity_z)
        if not all(math.isfinite(v) for v in values):
            raise SceneValidationError("ego state components must be finite")

    @property
    def speed(self) -> float:
        return math.hypot(*self.velocity)

    @property
    def accel_magnitude(self) -> float:
        return math.hypot(*self.acceleration)


@dataclass(frozen=True)
class Frame:
    """One timestamped frame. ``objects`` excludes the ego, see :meth:`all_objects`."""

    index: int
    timestamp_us: int
    ego: EgoState
    objects: tuple[TrackedObject, ...] = ()
    ego_size: Vec2 = DEFAULT_EGO_SIZE

    def ego_object(self) -> TrackedObject:
        return TrackedObject(EGO_ID, EGO_CATEGORY, self.ego.position, self.ego_size,
                             self.ego.yaw_rad)

    def all_objects(self) -> tuple[TrackedObject, ...]:
        return (self.ego_object(), *self.objects)


@dataclass(frozen=True)
class Scene:
    scene_id: str
    frame_rate_hz: float
    frames: tuple[Frame, ...] = field(default_factory=tuple)

    def __post_init__(self):
        validate_scene(self)

    def __len__(self) -> int:
        return len(self.frames)


def validate_scene(scene: Scene) -> None:
    if not (isinstance(scene.frame_rate_hz, (int, float)) and scene.frame_rate_hz > 0
            and math.isfinite(scene.frame_rate_hz)):
        raise SceneValidationError("frame_rate_hz must be a positive finite number")
    prev_ts = None
    for k, frame in enumerate(scene.frames):
        if frame.index != k:
            raise SceneValidationError(f"frame index {frame.index} out of sequence at frame {k}")
        if frame.timestamp_us < 0:
            raise SceneValidationError(f"negative timestamp at frame {k}")
        if prev_ts is not None and frame.timestamp_us <= prev_ts:
            raise SceneValidationError(f"timestamps not increasing at frame {k}")
        prev_ts = frame.timestamp_us
        seen = {EGO_ID}
        for obj in frame.objects:
            if obj.id in seen:
                raise SceneValidationError(f"duplicate object id {obj.id!r} at frame {k}")
            seen.add(obj.id)


def to_aabb(obj: TrackedObject) -> AABB:
    """Smallest axis-aligned box containing the oriented footprint of ``obj``."""
    c, s = abs(math.cos(obj.yaw_rad)), abs(math.sin(obj.yaw_rad))
    half_l, half_w = obj.size[0] / 2.0, obj.size[1] / 2.0
    hx = half_l * c + half_w * s
    hy = half_l * s + half_w * c
    x, y = obj.center
    return AABB(x - hx, x + hx, y - hy, y + hy)


def objects_at(scene: Scene, k: int) -> tuple[TrackedObject, ...]:
    if not 0 <= k < len(scene.frames):
        raise IndexError(f"frame index {k} out of range for {len(scene.frames)} frames")
    return scene.frames[k].all_objects()


# --- canonical file format -------------------------------------------------

_SCENE_KEYS = {"scene_id", "frame_rate_hz", "frames"}
_FRAME_KEYS = {"index", "timestamp_us", "ego", "objects"}
_EGO_KEYS = {"position", "yaw_rad", "velocity", "acceleration", "angular_velocity_z"}
_OBJECT_KEYS = {"id", "category", "center", "size", "yaw_rad"}


def _reject_constant(name):
    raise SceneSyntaxError(f"non-finite number {name} not allowed")


def _check_keys(doc: Any, allowed: set[str], where: str, strict: bool) -> None:
    if not isinstance(doc, dict):
        raise SceneSyntaxError(f"{where}: expected an object")
    missing = allowed - doc.keys()
    if missing:
        raise SceneSyntaxError(f"{where}: missing key(s) {sorted(missing)}")
    if strict:
        extra = doc.keys() - allowed
        if extra:
            raise SceneSyntaxError(f"{where}: unknown key(s) {sorted(extra)}")


def _num(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SceneSyntaxError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _int(v: Any, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SceneSyntaxError(f"{where}: expected an integer, got {v!r}")
    return v


def _vec(v: Any, where: str) -> Vec2:
    if not isinstance(v, list) or len(v) != 2:
        raise SceneSyntaxError(f"{where}: expected a 2-element array")
    return (_num(v[0], where), _num(v[1], where))


def _str(v: Any, where: str) -> str:
    if not isinstance(v, str):
        raise SceneSyntaxError(f"{where}: expected a string")
    return v


def parse_scene(data: bytes | str, *, strict: bool = True,
                ego_size: Vec2 = DEFAULT_EGO_SIZE) -> Scene:
    """Parse and validate a scene document.

    Raises :class:`SceneSyntaxError` for malformed documents and
    :class:`SceneValidationError` when an invariant is violated.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SceneSyntaxError(f"not UTF-8: {exc}") from exc
    try:
        doc = json.loads(data, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SceneSyntaxError(f"malformed JSON: {exc}") from exc

    _check_keys(doc, _SCENE_KEYS, "scene", strict)
    if not isinstance(doc["frames"], list):
        raise SceneSyntaxError("scene.frames: expected an array")
    frames = []
    for k, fdoc in enumerate(doc["frames"]):
        where = f"frame {k}"
        _check_keys(fdoc, _FRAME_KEYS, where, strict)
        edoc = fdoc["ego"]
        _check_keys(edoc, _EGO_KEYS, f"{where}.ego", strict)
        ego = EgoState(
            position=_vec(edoc["position"], f"{where}.ego.position"),
            yaw_rad=_num(edoc["yaw_rad"], f"{where}.ego.yaw_rad"),
            velocity=_vec(edoc["velocity"], f"{where}.ego.velocity"),
            acceleration=_vec(edoc["acceleration"], f"{where}.ego.acceleration"),
            angular_velocity_z=_num(edoc["angular_velocity_z"], f"{where}.ego.angular_velocity_z"),
        )
        if not isinstance(fdoc["objects"], list):
            raise SceneSyntaxError(f"{where}.objects: expected an array")
        objects = []
        for odoc in fdoc["objects"]:
            _check_keys(odoc, _OBJECT_KEYS, f"{where} object", strict)
            oid = _str(odoc["id"], f"{where} object id")
            if not oid:
                raise SceneValidationError(f"empty object id at frame {k}")
            size = _vec(odoc["size"], f"{where} object {oid!r} size")
            if not (size[0] > 0 and size[1] > 0):
                raise SceneValidationError(f"object {oid!r} has non-positive size at frame {k}")
            objects.append(TrackedObject(
                id=oid,
                category=_str(odoc["category"], f"{where} object {oid!r} category"),
                center=_vec(odoc["center"], f"{where} object {oid!r} center"),
                size=size,
                yaw_rad=_num(odoc["yaw_rad"], f"{where} object {oid!r} yaw_rad"),
            ))
        frames.append(Frame(
            index=_int(fdoc["index"], f"{where}.index"),
            timestamp_us=_int(fdoc["timestamp_us"], f"{where}.timestamp_us"),
            ego=ego,
            objects=tuple(objects),
            ego_size=tuple(ego_size),
        ))
    return Scene(
        scene_id=_str(doc["scene_id"], "scene_id"),
        frame_rate_hz=_num(doc["frame_rate_hz"], "frame_rate_hz"),
        frames=tuple(frames),
    )


def scene_to_dict(scene: Scene) -> dict:
    return {
        "scene_id": scene.scene_id,
        "frame_rate_hz": scene.frame_rate_hz,
        "frames": [
            {
                "index": f.index,
                "timestamp_us": f.timestamp_us,
                "ego": {
                    "position": list(f.ego.position),
                    "yaw_rad": f.ego.yaw_rad,
                    "velocity": list(f.ego.velocity),
                    "acceleration": list(f.ego.acceleration),
                    "angular_velocity_z": f.ego.angular_velocity_z,
                },
                "objects": [
                    {"id": o.id, "category": o.category, "center": list(o.center),
                     "size": list(o.size), "yaw_rad": o.yaw_rad}
                    for o in f.objects
                ],
            }
            for f in scene.frames
        ],
    }


def serialize_scene(scene: Scene) -> bytes:
    return json.dumps(scene_to_dict(scene), allow_nan=False).encode("utf-8")


def load_scene(path, **kwargs) -> Scene:
    with open(path, "rb") as fh:
        return parse_scene(fh.read(), **kwargs)
