import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from qxg.scene import (
    AABB,
    SceneSyntaxError,
    SceneValidationError,
    TrackedObject,
    objects_at,
    parse_scene,
    serialize_scene,
    to_aabb,
)

from conftest import make_scene, obj, random_scene


def _doc(frames):
    return {"scene_id": "s", "frame_rate_hz": 2.0, "frames": frames}


def _frame(k, ts, objects=()):
    return {
        "index": k, "timestamp_us": ts,
        "ego": {"position": [0, 0], "yaw_rad": 0, "velocity": [0, 0],
                "acceleration": [0, 0], "angular_velocity_z": 0},
        "objects": list(objects),
    }


def _o(oid, x=1.0, y=2.0):
    return {"id": oid, "category": "car", "center": [x, y], "size": [4, 2], "yaw_rad": 0}


def test_minimal_scene_has_only_ego():
    scene = parse_scene(json.dumps(_doc([_frame(0, 0)])).encode())
    assert len(scene.frames) == 1
    objs = objects_at(scene, 0)
    assert [o.id for o in objs] == ["ego"]
    assert objs[0].size == (4.5, 2.0)
    assert objs[0].category == "ego"


def test_decreasing_timestamps_rejected():
    doc = _doc([_frame(0, 500_000), _frame(1, 0)])
    with pytest.raises(SceneValidationError, match="timestamps not increasing at frame 1"):
        parse_scene(json.dumps(doc))


def test_duplicate_id_rejected():
    doc = _doc([_frame(0, 0, [_o("car_1"), _o("car_1", 5, 5)])])
    with pytest.raises(SceneValidationError, match="car_1"):
        parse_scene(json.dumps(doc))


def test_reserved_ego_id_rejected():
    with pytest.raises(SceneValidationError, match="ego"):
        parse_scene(json.dumps(_doc([_frame(0, 0, [_o("ego")])])))


@pytest.mark.parametrize("text", ["{", "[]", '{"scene_id": "s"}'])
def test_malformed_documents(text):
    with pytest.raises(SceneSyntaxError):
        parse_scene(text)


def test_non_finite_numbers_rejected():
    text = json.dumps(_doc([_frame(0, 0)])).replace('"yaw_rad": 0', '"yaw_rad": NaN')
    with pytest.raises(SceneSyntaxError):
        parse_scene(text)


def test_unknown_keys_strict_and_lenient():
    doc = _doc([_frame(0, 0, [dict(_o("a"), color="red")])])
    with pytest.raises(SceneSyntaxError, match="unknown"):
        parse_scene(json.dumps(doc))
    scene = parse_scene(json.dumps(doc), strict=False)
    assert [o.id for o in objects_at(scene, 0)] == ["ego", "a"]


def test_non_positive_size_rejected():
    bad = dict(_o("a"), size=[0, 1])
    with pytest.raises(SceneValidationError):
        parse_scene(json.dumps(_doc([_frame(0, 0, [bad])])))


def test_frame_index_gap_rejected():
    doc = _doc([_frame(0, 0), _frame(2, 10)])
    with pytest.raises(SceneValidationError, match="frame 1"):
        parse_scene(json.dumps(doc))


def test_custom_ego_footprint():
    scene = parse_scene(json.dumps(_doc([_frame(0, 0)])), ego_size=(5.0, 2.2))
    assert objects_at(scene, 0)[0].size == (5.0, 2.2)


def test_objects_at_bounds():
    scene = make_scene([[obj("p1", 1, 1), obj("p2", 2, 2)]])
    assert len(objects_at(scene, 0)) == 3
    with pytest.raises(IndexError):
        objects_at(scene, 1)
    with pytest.raises(IndexError):
        objects_at(scene, -1)


def test_aabb_examples():
    assert to_aabb(obj("a", 0, 0, (2, 1))) == AABB(-1, 1, -0.5, 0.5)
    b = to_aabb(obj("a", 0, 0, (2, 2), math.pi / 4))
    r2 = math.sqrt(2)
    for got, want in zip((b.x_min, b.x_max, b.y_min, b.y_max), (-r2, r2, -r2, r2)):
        assert got == pytest.approx(want, abs=1e-9)
    b = to_aabb(obj("a", 5, 5, (2, 1), math.pi / 2))
    for got, want in zip((b.x_min, b.x_max, b.y_min, b.y_max), (4.5, 5.5, 4, 6)):
        assert got == pytest.approx(want, abs=1e-9)


def _corner_aabb(o: TrackedObject) -> AABB:
    # independent oracle: rotate the four corners
    c, s = math.cos(o.yaw_rad), math.sin(o.yaw_rad)
    xs, ys = [], []
    for sx in (-1, 1):
        for sy in (-1, 1):
            lx, ly = sx * o.size[0] / 2, sy * o.size[1] / 2
            xs.append(o.center[0] + c * lx - s * ly)
            ys.append(o.center[1] + s * lx + c * ly)
    return AABB(min(xs), max(xs), min(ys), max(ys))


sizes = st.floats(0.1, 10)
coords = st.floats(-100, 100)
yaws = st.floats(-10, 10)


@given(coords, coords, sizes, sizes, yaws)
def test_aabb_matches_corner_oracle_and_is_pi_symmetric(x, y, l, w, yaw):
    o = obj("a", x, y, (l, w), yaw)
    box, oracle = to_aabb(o), _corner_aabb(o)
    flipped = to_aabb(obj("a", x, y, (l, w), yaw + math.pi))
    for a, b, c in zip(vars(box).values(), vars(oracle).values(), vars(flipped).values()):
        assert a == pytest.approx(b, abs=1e-9)
        assert a == pytest.approx(c, abs=1e-9)


@given(sizes, sizes, yaws)
def test_aabb_area_bound(l, w, yaw):
    area = to_aabb(obj("a", 0, 0, (l, w), yaw)).area
    assert area >= l * w * (1 - 1e-12)
    aligned = min(abs(math.sin(yaw)), abs(math.cos(yaw))) < 1e-12
    if not aligned and min(abs(math.sin(2 * yaw)), 1) > 1e-6:
        assert area > l * w


def test_aabb_area_equality_when_axis_aligned():
    for k in range(4):
        assert to_aabb(obj("a", 0, 0, (3, 1), k * math.pi / 2)).area == pytest.approx(3.0)


@settings(max_examples=30)
@given(st.integers(0, 10_000))
def test_serialize_round_trip(seed):
    scene = random_scene(seed)
    assert parse_scene(serialize_scene(scene)) == scene
