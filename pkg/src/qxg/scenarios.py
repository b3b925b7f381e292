"""Deterministic synthetic driving scenes.

All scenes share one road layout: the ego drives north (+y) in the right
lane centred at x = lane_width / 2, the opposite lane is centred at
x = -lane_width / 2, and sidewalks start 1 m outside each lane edge.

``crosswalk``
    The ego brakes to a halt before a crosswalk while a pedestrian crosses
    from the left sidewalk to the right one, waits until the pedestrian has
    cleared its lane and drives off. A red car approaches fast from behind,
    offset to the left as if about to overtake, and stops behind the ego.
``close_vru``
    Two pedestrians stand on the right sidewalk. One darts towards the lane
    and is pulled back by the other. The ego stops next to them while a red
    car overtakes in the opposite lane.
``random_traffic``
    ``objects`` cars and pedestrians on seeded constant-velocity tracks.

The ego's velocity, acceleration and yaw rate are finite differences of
its generated positions (central in the interior, one-sided at the ends).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .scene import EgoState, Frame, Scene, TrackedObject

KINDS = ("crosswalk", "close_vru", "random_traffic")

CAR_SIZE = (4.5, 2.0)
PED_SIZE = (0.6, 0.6)


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    seed: Optional[int] = None
    frames: int = 40
    frame_rate_hz: float = 2.0
    lane_width: float = 3.5
    # crosswalk / close_vru
    ego_speed: float = 8.0
    red_car_speed: float = 14.0
    ped_speed: float = 1.4
    # random_traffic
    objects: int = 20
    area: float = 100.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if self.frames < 5:
            raise ValueError("a scenario needs at least 5 frames")
        if not self.frame_rate_hz > 0:
            raise ValueError("frame_rate_hz must be positive")
        if self.kind == "random_traffic" and self.seed is None:
            raise ValueError("random_traffic needs a seed")
        if self.objects < 0:
            raise ValueError("objects must be non-negative")
        for name in ("lane_width", "ego_speed", "red_car_speed", "ped_speed", "area"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def motion_1d(times: np.ndarray, x0: float, v0: float,
              phases: Sequence[tuple[float, float]]) -> np.ndarray:
    """Positions under piecewise-constant acceleration.

    ``phases`` lists (start_time, acceleration) in time order; acceleration
    is 0 before the first phase. Braking never reverses: once the speed
    reaches 0 under a negative acceleration the object stays put until the
    next phase.
    """
    bounds = [(0.0, 0.0)] + [(float(t), float(a)) for t, a in phases]
    out = np.empty(len(times))
    for i, t in enumerate(times):
        x, v = x0, v0
        for j, (ts, acc) in enumerate(bounds):
            te = bounds[j + 1][0] if j + 1 < len(bounds) else math.inf
            if t <= ts:
                break
            dt = min(t, te) - ts
            if acc < 0 and v + acc * dt < 0:
                x += v * v / (-2.0 * acc)
                v = 0.0
            else:
                x += v * dt + 0.5 * acc * dt * dt
                v += acc * dt
        out[i] = x
    return out


def _headings(xy: np.ndarray, initial: float) -> np.ndarray:
    """Direction of travel per frame, held while the object does not move."""
    yaw = np.empty(len(xy))
    d = np.gradient(xy, axis=0) if len(xy) > 1 else np.zeros_like(xy)
    last = initial
    for k, (dx, dy) in enumerate(d):
        if math.hypot(dx, dy) > 1e-6:
            last = math.atan2(dy, dx)
        yaw[k] = last
    return yaw


def ego_states(xy: np.ndarray, dt: float, initial_yaw: float = math.pi / 2) -> list[EgoState]:
    """Ego states whose motion terms are finite differences of ``xy``.

    Positive angular velocity means a right turn, i.e. decreasing yaw.
    """
    n = len(xy)
    vel = np.gradient(xy, dt, axis=0)
    acc = np.zeros_like(xy)
    if n >= 3:
        acc[1:-1] = (xy[2:] - 2.0 * xy[1:-1] + xy[:-2]) / (dt * dt)
        acc[0], acc[-1] = acc[1], acc[-2]
    yaw = np.unwrap(_headings(xy, initial_yaw))
    yaw_rate = np.gradient(yaw, dt) if n > 1 else np.zeros(n)
    return [
        EgoState(position=(float(xy[k, 0]), float(xy[k, 1])), yaw_rad=float(yaw[k]),
                 velocity=(float(vel[k, 0]), float(vel[k, 1])),
                 acceleration=(float(acc[k, 0]), float(acc[k, 1])),
                 angular_velocity_z=float(-yaw_rate[k]))
        for k in range(n)
    ]


def _assemble(scene_id: str, spec: ScenarioSpec, ego_xy: np.ndarray,
              tracks: dict[str, tuple[str, tuple[float, float], np.ndarray, float]]) -> Scene:
    """Build a scene from the ego path and per-object (category, size, xy, initial yaw)."""
    dt = 1.0 / spec.frame_rate_hz
    egos = ego_states(ego_xy, dt)
    yaws = {oid: _headings(xy, yaw0) for oid, (_, _, xy, yaw0) in tracks.items()}
    frames = []
    for k in range(spec.frames):
        objects = tuple(
            TrackedObject(oid, cat, (float(xy[k, 0]), float(xy[k, 1])), size, float(yaws[oid][k]))
            for oid, (cat, size, xy, _) in sorted(tracks.items())
        )
        frames.append(Frame(index=k, timestamp_us=int(round(k * 1e6 / spec.frame_rate_hz)),
                            ego=egos[k], objects=objects))
    return Scene(scene_id, spec.frame_rate_hz, tuple(frames))


def _jitter(rng: Optional[np.random.Generator], lo: float, hi: float, default: float) -> float:
    return default if rng is None else float(rng.uniform(lo, hi))


def _crosswalk(spec: ScenarioSpec, rng) -> Scene:
    t = np.arange(spec.frames) / spec.frame_rate_hz
    lane_x = spec.lane_width / 2.0
    crosswalk_y = 40.0 + _jitter(rng, -3.0, 3.0, 0.0)

    v0 = spec.ego_speed * _jitter(rng, 0.85, 1.15, 1.0)
    decel = _jitter(rng, 2.0, 3.0, 2.5)
    t_brake = _jitter(rng, 2.0, 3.5, 3.0)
    t_stop = t_brake + v0 / decel
    y_stop = crosswalk_y - 5.0
    y0 = y_stop - v0 * t_brake - v0 * v0 / (2.0 * decel)

    # pedestrian: left sidewalk to right sidewalk, entering the road shortly
    # before the ego has to stop
    walk = spec.ped_speed * _jitter(rng, 0.85, 1.15, 1.0)
    x_start = -spec.lane_width - 2.5
    x_end = spec.lane_width + 2.5
    t_walk = t_stop - _jitter(rng, 1.5, 3.0, 2.0)
    ped_x = np.clip(x_start + walk * (t - t_walk), x_start, x_end)
    ped_x[t < t_walk] = x_start
    ped_y = np.full_like(t, crosswalk_y + _jitter(rng, -0.5, 0.5, 0.0))
    # ego waits until the pedestrian is clear of its lane
    t_clear = t_walk + (spec.lane_width + 1.0 - x_start) / walk
    t_go = max(t_clear, t_stop) + _jitter(rng, 0.5, 1.5, 1.0)
    ego_y = motion_1d(t, y0, v0, [(t_brake, -decel), (t_go, 1.5)])

    # red car closing in fast on the ego's tail, offset to the left as if
    # about to overtake; it brakes hard and queues behind the halted ego
    vr = spec.red_car_speed * _jitter(rng, 0.9, 1.1, 1.0)
    decel_r = _jitter(rng, 3.5, 4.5, 4.0)
    gap = _jitter(rng, 1.5, 6.0, 2.5)
    t_rstop = t_stop + _jitter(rng, 1.0, 6.0, 2.0)
    t_rbrake = t_rstop - vr / decel_r
    y_rstop = y_stop - CAR_SIZE[0] - gap
    yr0 = y_rstop - vr * t_rbrake - vr * vr / (2.0 * decel_r)
    red_y = motion_1d(t, yr0, vr, [(t_rbrake, -decel_r), (max(t_go, t_rstop) + 1.0, 1.5)])
    red_x = lane_x - _jitter(rng, 0.0, 1.5, 0.5)

    ego_xy = np.column_stack([np.full_like(t, lane_x), ego_y])
    tracks = {
        "ped_cross": ("pedestrian", PED_SIZE, np.column_stack([ped_x, ped_y]), 0.0),
        "car_red": ("car", CAR_SIZE, np.column_stack([np.full_like(t, red_x), red_y]),
                    math.pi / 2),
    }
    return _assemble(_scene_id(spec), spec, ego_xy, tracks)


def _close_vru(spec: ScenarioSpec, rng) -> Scene:
    t = np.arange(spec.frames) / spec.frame_rate_hz
    lane_x = spec.lane_width / 2.0
    curb_x = spec.lane_width + 1.7
    ped_y = 40.0 + _jitter(rng, -3.0, 3.0, 0.0)

    v0 = spec.ego_speed * _jitter(rng, 0.85, 1.15, 1.0)
    decel = _jitter(rng, 2.5, 3.5, 3.0)
    t_brake = _jitter(rng, 2.0, 3.5, 3.0)
    t_stop = t_brake + v0 / decel
    y_stop = ped_y - 1.0
    y0 = y_stop - v0 * t_brake - v0 * v0 / (2.0 * decel)

    # darting pedestrian: towards the lane edge, a pause, then pulled back
    dart_x = spec.lane_width - 0.3
    t_dart = t_stop - _jitter(rng, 1.0, 2.0, 1.5)
    dart_speed = spec.ped_speed * _jitter(rng, 0.9, 1.2, 1.1)
    t_reach = t_dart + (curb_x - dart_x) / dart_speed
    t_back = t_reach + _jitter(rng, 1.5, 3.0, 2.0)
    dart = np.where(t < t_dart, curb_x,
                    np.where(t < t_reach, curb_x - dart_speed * (t - t_dart),
                             np.where(t < t_back, dart_x,
                                      np.minimum(curb_x, dart_x + 1.0 * (t - t_back)))))
    t_go = t_back + (curb_x - dart_x) / 1.0 + _jitter(rng, 0.5, 1.5, 1.0)
    ego_y = motion_1d(t, y0, v0, [(t_brake, -decel), (max(t_go, t_stop), 1.5)])

    other_x = np.full_like(t, curb_x + 0.9)
    other_y = np.full_like(t, ped_y + 0.4)

    vr = spec.red_car_speed * _jitter(rng, 0.9, 1.1, 1.0)
    t_pass = t_stop + _jitter(rng, 0.0, 2.0, 1.0)
    red_y = (y_stop - vr * t_pass) + vr * t

    ego_xy = np.column_stack([np.full_like(t, lane_x), ego_y])
    tracks = {
        "ped_dart": ("pedestrian", PED_SIZE, np.column_stack([dart, np.full_like(t, ped_y)]),
                     math.pi),
        "ped_other": ("pedestrian", PED_SIZE, np.column_stack([other_x, other_y]), math.pi),
        "car_red": ("car", CAR_SIZE, np.column_stack([np.full_like(t, -lane_x), red_y]),
                    math.pi / 2),
    }
    return _assemble(_scene_id(spec), spec, ego_xy, tracks)


def _random_traffic(spec: ScenarioSpec, rng: np.random.Generator) -> Scene:
    t = np.arange(spec.frames) / spec.frame_rate_hz
    ego_heading = float(rng.uniform(-math.pi, math.pi))
    ego_speed = float(rng.uniform(0.0, 15.0))
    ego_xy = np.column_stack([ego_speed * math.cos(ego_heading) * t,
                              ego_speed * math.sin(ego_heading) * t])
    tracks = {}
    width = len(str(max(spec.objects - 1, 0)))
    for i in range(spec.objects):
        is_ped = rng.random() < 0.3
        start = rng.uniform(-spec.area, spec.area, size=2)
        heading = float(rng.uniform(-math.pi, math.pi))
        speed = float(rng.uniform(0.0, 2.0) if is_ped else rng.uniform(0.0, 15.0))
        xy = start + np.outer(t, [speed * math.cos(heading), speed * math.sin(heading)])
        size = PED_SIZE if is_ped else (float(rng.uniform(3.5, 5.5)), float(rng.uniform(1.6, 2.2)))
        tracks[f"obj_{i:0{width}d}"] = ("pedestrian" if is_ped else "car", size, xy, heading)
    return _assemble(_scene_id(spec), spec, ego_xy, tracks)


def _scene_id(spec: ScenarioSpec) -> str:
    return spec.kind if spec.seed is None else f"{spec.kind}-{spec.seed}"


def generate(spec: ScenarioSpec) -> Scene:
    """Generate the scene described by ``spec``.

    For crosswalk and close_vru, ``seed=None`` gives the nominal geometry
    and a seed draws jittered timings, speeds and positions around it.
    """
    rng = None if spec.seed is None else np.random.default_rng(spec.seed)
    if spec.kind == "crosswalk":
        return _crosswalk(spec, rng)
    if spec.kind == "close_vru":
        return _close_vru(spec, rng)
    return _random_traffic(spec, rng)
