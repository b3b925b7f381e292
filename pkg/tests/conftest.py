import math

import numpy as np
import pytest

from qxg.scene import EgoState, Frame, Scene, TrackedObject

ACCEPTANCE_LINES: list[str] = []


def report(criterion: str, ok: bool, detail: str) -> None:
    """Record one acceptance line; printed in the terminal summary."""
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def ego(x=0.0, y=0.0, yaw=0.0, v=(0.0, 0.0), a=(0.0, 0.0), w=0.0) -> EgoState:
    return EgoState((x, y), yaw, v, a, w)


def obj(oid, x, y, size=(1.0, 1.0), yaw=0.0, category="thing") -> TrackedObject:
    return TrackedObject(oid, category, (float(x), float(y)), size, yaw)


def make_scene(frames_objects, egos=None, scene_id="test", rate=2.0) -> Scene:
    """Scene from a list of per-frame object lists (ego at the origin by default)."""
    frames = []
    for k, objects in enumerate(frames_objects):
        e = egos[k] if egos is not None else ego()
        frames.append(Frame(k, int(k * 1e6 / rate), e, tuple(objects)))
    return Scene(scene_id, rate, tuple(frames))


def random_scene(seed: int, frames: int = 8, pool: int = 6) -> Scene:
    """Objects that wander and randomly appear and disappear; coordinates on a
    coarse grid so that exact ties between box edges occur."""
    rng = np.random.default_rng(seed)
    pos = rng.integers(-20, 20, size=(pool, 2)).astype(float)
    sizes = rng.integers(1, 5, size=(pool, 2)).astype(float)
    yaws = rng.choice([0.0, math.pi / 2, math.pi / 4], size=pool)
    out, egos = [], []
    for k in range(frames):
        pos += rng.integers(-2, 3, size=pos.shape)
        present = rng.random(pool) < 0.7
        out.append([obj(f"o{i}", *pos[i], size=tuple(sizes[i]), yaw=float(yaws[i]))
                    for i in range(pool) if present[i]])
        egos.append(ego(float(k), 0.0, float(rng.uniform(-3, 3))))
    return make_scene(out, egos, scene_id=f"random-{seed}")


@pytest.fixture
def two_static_frames():
    return make_scene([[obj("car", 5, 0)], [obj("car", 5, 0)]])


def random_relation(rng: np.random.Generator):
    """Uniformly drawn relation tuple; about one in five has undefined QTC."""
    from qxg.calculi import (AllenRelation, QdcLevel, QtcRelation, QtcSign, RaRelation,
                             RelationTuple, StarSector)
    pick = lambda seq: seq[int(rng.integers(len(seq)))]  # noqa: E731
    allen, signs = list(AllenRelation), list(QtcSign)
    qtc = None if rng.random() < 0.2 else QtcRelation(pick(signs), pick(signs))
    return RelationTuple(RaRelation(pick(allen), pick(allen)), qtc,
                         pick(list(QdcLevel)), pick(list(StarSector)))


def random_chain(rng: np.random.Generator, n: int = 5, p_absent: float = 0.25):
    return [None if rng.random() < p_absent else random_relation(rng) for _ in range(n)]


def clustered_onehots(seed: int, n_in: int = 500, n_out: int = 25):
    """Encoded chains: a tight cluster around one base chain (each inlier
    perturbs at most one block) plus uniformly random outlier chains.
    Returns (X, is_outlier)."""
    from qxg.features import encode_values, EncodingSchema
    rng = np.random.default_rng(seed)
    schema = EncodingSchema(5)
    base = [random_relation(rng) for _ in range(5)]
    base = [r if r.qtc is not None else r._replace(qtc=random_relation(rng).qtc) for r in base]
    rows = []
    for _ in range(n_in):
        chain = list(base)
        if rng.random() < 0.5:
            f = int(rng.integers(5))
            other = random_relation(rng)
            field_name = ("qdc", "star")[int(rng.integers(2))]
            chain[f] = chain[f]._replace(**{field_name: getattr(other, field_name)})
        rows.append(encode_values(chain, schema))
    for _ in range(n_out):
        rows.append(encode_values(random_chain(rng, 5, p_absent=0.1), schema))
    flags = np.r_[np.zeros(n_in, bool), np.ones(n_out, bool)]
    return np.array(rows), flags


class LookupScorer:
    """Model stub: anomaly score looked up by the exact encoded vector."""

    kind = "stub"

    def __init__(self, table: dict, default: float = 1.0):
        self.table = {np.asarray(k, dtype=np.float64).tobytes(): v for k, v in table}
        self.default = default

    def score(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.array([self.table.get(row.tobytes(), self.default) for row in X])


def fig2_graph():
    """Three objects; o1 relates to o2 (pedestrian-like, very close) and to o3 (far)."""
    from qxg.calculi import (AllenRelation as A, QdcLevel, QtcRelation, QtcSign, RaRelation,
                             RelationTuple, StarSector)
    from qxg.graph import ObjectRecord, Qxg
    g = Qxg("fig2")
    g.frame_count = 5
    for oid, cat in (("o1", "car"), ("o2", "pedestrian"), ("o3", "car")):
        g.objects[oid] = ObjectRecord(cat, 0, 4)
    still = QtcRelation(QtcSign.STABLE, QtcSign.STABLE)
    near = RelationTuple(RaRelation(A.CONTAINS, A.CONTAINS), still, QdcLevel.VERY_CLOSE,
                         StarSector.NORTH)
    far = RelationTuple(RaRelation(A.BEFORE, A.BEFORE), still, QdcLevel.FAR, StarSector.NORTH)
    g.edges[("o1", "o2")] = {k: near for k in range(5)}
    g.edges[("o1", "o3")] = {k: far for k in range(5)}
    return g
