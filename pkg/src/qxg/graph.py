"""The qualitative explainable graph and its incremental builder."""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional

from .calculi import (
    CalculiConfig,
    DEFAULT_CONFIG,
    RelationTuple,
    converse,
    parse_relation,
    relate,
    relation_text,
)
from .scene import EGO_ID, Frame, Scene, to_aabb

Pair = tuple[str, str]


def canonical_pair(id1: str, id2: str) -> Pair:
    return (id1, id2) if id1 < id2 else (id2, id1)


@dataclass
class ObjectRecord:
    category: str
    first_frame: int
    last_frame: int


@dataclass
class FrameStat:
    index: int
    objects: int
    pairs: int
    elapsed_us: float


@dataclass
class BuildStats:
    per_frame: list[FrameStat] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["frame,objects,pairs,elapsed_us"]
        lines += [f"{s.index},{s.objects},{s.pairs},{s.elapsed_us:.1f}" for s in self.per_frame]
        return "\n".join(lines) + "\n"


class Qxg:
    """Objects plus per-pair relation chains.

    ``edges`` maps a canonical pair (smaller id first) to a dict from frame
    index to the relation of the first object towards the second.
    """

    def __init__(self, scene_id: str = "", config: CalculiConfig = DEFAULT_CONFIG):
        self.scene_id = scene_id
        self.config = config
        self.objects: dict[str, ObjectRecord] = {}
        self.edges: dict[Pair, dict[int, RelationTuple]] = {}
        self.frame_count = 0

    def __repr__(self) -> str:
        return (f"Qxg(scene_id={self.scene_id!r}, frames={self.frame_count}, "
                f"objects={len(self.objects)}, edges={len(self.edges)})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Qxg):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def present_at(self, k: int) -> list[str]:
        """Ids whose chains or records show presence at frame ``k``."""
        ids = {i for pair, chain in self.edges.items() if k in chain for i in pair}
        ids.update(i for i, r in self.objects.items() if r.last_frame == k)
        return sorted(ids)

    def pairs_at(self, k: int) -> list[Pair]:
        return sorted(pair for pair, chain in self.edges.items() if k in chain)

    def step(self, frame: Frame, prev_frame: Optional[Frame] = None, *,
             max_pair_distance: Optional[float] = None,
             parallel_pairs: int = 0) -> int:
        """Extend the graph by one frame. Returns the number of related pairs."""
        if frame.index != self.frame_count:
            raise ValueError(f"expected frame {self.frame_count}, got frame {frame.index}")
        k = frame.index
        current = frame.all_objects()
        for obj in current:
            rec = self.objects.get(obj.id)
            if rec is None:
                self.objects[obj.id] = ObjectRecord(obj.category, k, k)
            else:
                rec.last_frame = k
        prev = {}
        if prev_frame is not None:
            prev = {o.id: o for o in prev_frame.all_objects()}

        ordered = sorted(current, key=lambda o: o.id)
        boxes = [to_aabb(o) for o in ordered]
        heading = frame.ego.yaw_rad
        cfg = self.config
        jobs = []
        for i, j in combinations(range(len(ordered)), 2):
            o1, o2 = ordered[i], ordered[j]
            if max_pair_distance is not None and math.hypot(
                    o1.center[0] - o2.center[0], o1.center[1] - o2.center[1]) > max_pair_distance:
                continue
            jobs.append((i, j))

        def run(chunk):
            return [
                relate(prev.get(ordered[i].id), ordered[i], prev.get(ordered[j].id), ordered[j],
                       cfg, heading, (boxes[i], boxes[j]))
                for i, j in chunk
            ]

        if parallel_pairs > 1 and len(jobs) > 1:
            size = math.ceil(len(jobs) / parallel_pairs)
            chunks = [jobs[s:s + size] for s in range(0, len(jobs), size)]
            with ThreadPoolExecutor(max_workers=parallel_pairs) as pool:
                results = [r for part in pool.map(run, chunks) for r in part]
        else:
            results = run(jobs)

        edges = self.edges
        for (i, j), rel in zip(jobs, results):
            pair = (ordered[i].id, ordered[j].id)
            chain = edges.get(pair)
            if chain is None:
                edges[pair] = {k: rel}
            else:
                chain[k] = rel
        self.frame_count = k + 1
        return len(jobs)

    def evict(self, window: int) -> "Qxg":
        """Keep only the ``window`` most recent frames. Mutates and returns self."""
        if window < 1:
            raise ValueError("window must be >= 1")
        cutoff = self.frame_count - window
        if cutoff <= 0:
            return self
        for pair in list(self.edges):
            chain = self.edges[pair]
            for k in [k for k in chain if k < cutoff]:
                del chain[k]
            if not chain:
                del self.edges[pair]
        linked = {i for pair in self.edges for i in pair}
        for oid in list(self.objects):
            if oid == EGO_ID or oid in linked:
                continue
            if self.objects[oid].last_frame < cutoff:
                del self.objects[oid]
        return self

    def chain(self, id1: str, id2: str, end_frame: int, n: int) -> list[Optional[RelationTuple]]:
        """Relations of ``id1`` towards ``id2`` for frames end_frame-n+1 .. end_frame.

        Frames where the pair was not co-present yield ``None``.
        """
        for oid in (id1, id2):
            if oid not in self.objects:
                raise KeyError(f"unknown object id {oid!r}")
        if n < 1:
            raise ValueError("n must be positive")
        pair = canonical_pair(id1, id2)
        stored = self.edges.get(pair, {})
        flip = pair[0] != id1
        out = []
        for k in range(end_frame - n + 1, end_frame + 1):
            rel = stored.get(k)
            if rel is not None and flip:
                rel = converse(rel)
            out.append(rel)
        return out

    def total_entries(self) -> int:
        return sum(len(c) for c in self.edges.values())

    # --- serialization ---

    def to_dict(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "frame_count": self.frame_count,
            "objects": {
                oid: {"category": r.category, "first_frame": r.first_frame,
                      "last_frame": r.last_frame}
                for oid, r in sorted(self.objects.items())
            },
            "edges": [
                {"a": a, "b": b,
                 "chain": {str(k): relation_text(rel) for k, rel in sorted(chain.items())}}
                for (a, b), chain in sorted(self.edges.items())
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, doc: dict, config: CalculiConfig = DEFAULT_CONFIG) -> "Qxg":
        g = cls(doc["scene_id"], config)
        g.frame_count = int(doc["frame_count"])
        for oid, r in doc["objects"].items():
            g.objects[oid] = ObjectRecord(r["category"], int(r["first_frame"]), int(r["last_frame"]))
        for e in doc["edges"]:
            a, b = e["a"], e["b"]
            if (a, b) != canonical_pair(a, b) or a == b:
                raise ValueError(f"edge ({a}, {b}) not in canonical order")
            if a not in g.objects or b not in g.objects:
                raise ValueError(f"edge ({a}, {b}) references an unknown object")
            g.edges[(a, b)] = {int(k): parse_relation(t) for k, t in e["chain"].items()}
        return g


def step(qxg: Qxg, frame: Frame, prev_frame: Optional[Frame] = None, **kwargs) -> Qxg:
    qxg.step(frame, prev_frame, **kwargs)
    return qxg


def evict(qxg: Qxg, window: int) -> Qxg:
    return qxg.evict(window)


def iter_steps(scene: Scene, qxg: Qxg, **kwargs) -> Iterable[tuple[Frame, int, float]]:
    """Step through ``scene`` yielding (frame, pairs, elapsed microseconds)."""
    prev = None
    for frame in scene.frames:
        t0 = time.perf_counter_ns()
        pairs = qxg.step(frame, prev, **kwargs)
        elapsed = (time.perf_counter_ns() - t0) / 1000.0
        yield frame, pairs, elapsed
        prev = frame


def build(scene: Scene, cfg: CalculiConfig = DEFAULT_CONFIG, *,
          window: Optional[int] = None, **kwargs) -> tuple[Qxg, BuildStats]:
    """Build the graph of a whole scene, one :meth:`Qxg.step` per frame.

    With ``window`` set, the graph is trimmed after every frame so that it
    only ever holds the most recent ``window`` frames.
    """
    qxg = Qxg(scene.scene_id, cfg)
    stats = BuildStats()
    for frame, pairs, elapsed in iter_steps(scene, qxg, **kwargs):
        if window is not None:
            qxg.evict(window)
        stats.per_frame.append(FrameStat(frame.index, len(frame.objects) + 1, pairs, elapsed))
    return qxg, stats


def load_graph(path, config: CalculiConfig = DEFAULT_CONFIG) -> Qxg:
    with open(path, encoding="utf-8") as fh:
        return Qxg.from_dict(json.load(fh), config)
