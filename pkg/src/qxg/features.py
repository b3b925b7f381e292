"""One-hot encoding of relation chains into fixed-length feature vectors.

Every frame of a chain takes 47 slots, oldest frame first::

    allen_x  14  (13 Allen relations + absent)
    allen_y  14
    qtc_a     4  (-, 0, +, undefined/absent)
    qtc_b     4
    qdc       5  (4 levels + absent)
    star      6  (4 sectors + same_point + absent)

An absent frame sets the last slot of every block. A present frame whose
trajectory relation is undefined sets only the last slot of the two qtc
blocks, so the two cases stay distinguishable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .actions import ActionLabel, LabeledWindow
from .calculi import (
    AllenRelation,
    QdcLevel,
    QtcRelation,
    QtcSign,
    RaRelation,
    RelationTuple,
    StarSector,
)

SCHEMA_VERSION = "qxg-onehot-v1"

_ALLEN = list(AllenRelation)
_QTC = list(QtcSign)
_QDC = list(QdcLevel)
_STAR = [StarSector.NORTH, StarSector.EAST, StarSector.SOUTH, StarSector.WEST,
         StarSector.SAME_POINT]

# (name, number of categories excluding the absent slot)
BLOCKS = (
    ("allen_x", len(_ALLEN)),
    ("allen_y", len(_ALLEN)),
    ("qtc_a", len(_QTC)),
    ("qtc_b", len(_QTC)),
    ("qdc", len(_QDC)),
    ("star", len(_STAR)),
)
FRAME_WIDTH = sum(size + 1 for _, size in BLOCKS)
assert FRAME_WIDTH == 47

_OFFSETS = []
_pos = 0
for _name, _size in BLOCKS:
    _OFFSETS.append(_pos)
    _pos += _size + 1
_OFFSETS = tuple(_OFFSETS)
_ABSENT_SLOTS = tuple(off + size for off, (_, size) in zip(_OFFSETS, BLOCKS))

_ALLEN_IDX = {r: i for i, r in enumerate(_ALLEN)}
_QTC_IDX = {s: i for i, s in enumerate(_QTC)}
_QDC_IDX = {q: i for i, q in enumerate(_QDC)}
_STAR_IDX = {s: i for i, s in enumerate(_STAR)}


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class EncodingSchema:
    n: int = 5
    version: str = SCHEMA_VERSION

    @property
    def dim(self) -> int:
        return self.n * FRAME_WIDTH


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    provenance: Optional[tuple] = None  # (scene_id, pair, end_frame)


def _frame_slots(rel: Optional[RelationTuple]) -> tuple[int, ...]:
    if rel is None:
        return _ABSENT_SLOTS
    if rel.qtc is None:
        qa = qb = len(_QTC)
    else:
        qa, qb = _QTC_IDX[rel.qtc.a], _QTC_IDX[rel.qtc.b]
    return (
        _OFFSETS[0] + _ALLEN_IDX[rel.ra.x],
        _OFFSETS[1] + _ALLEN_IDX[rel.ra.y],
        _OFFSETS[2] + qa,
        _OFFSETS[3] + qb,
        _OFFSETS[4] + _QDC_IDX[rel.qdc],
        _OFFSETS[5] + _STAR_IDX[rel.star],
    )


def encode_values(chain: Sequence[Optional[RelationTuple]], schema: EncodingSchema) -> np.ndarray:
    if len(chain) != schema.n:
        raise EncodingError(f"chain length {len(chain)} does not match schema n={schema.n}")
    out = np.zeros(schema.dim, dtype=np.float64)
    for f, rel in enumerate(chain):
        base = f * FRAME_WIDTH
        for slot in _frame_slots(rel):
            out[base + slot] = 1.0
    return out


def encode(chain: Sequence[Optional[RelationTuple]], schema: EncodingSchema = EncodingSchema(),
           provenance: Optional[tuple] = None) -> FeatureVector:
    return FeatureVector(encode_values(chain, schema), provenance)


def _hot(block: np.ndarray, name: str, frame: int) -> int:
    if not np.all((block == 0) | (block == 1)) or block.sum() != 1:
        raise EncodingError(f"malformed {name} block at frame {frame}: {block.tolist()}")
    return int(np.argmax(block))


def decode(v, schema: EncodingSchema = EncodingSchema()) -> list[Optional[RelationTuple]]:
    values = np.asarray(getattr(v, "values", v), dtype=np.float64)
    if values.shape != (schema.dim,):
        raise EncodingError(f"expected a vector of length {schema.dim}, got shape {values.shape}")
    chain: list[Optional[RelationTuple]] = []
    for f in range(schema.n):
        seg = values[f * FRAME_WIDTH:(f + 1) * FRAME_WIDTH]
        idx = [_hot(seg[off:off + size + 1], name, f)
               for off, (name, size) in zip(_OFFSETS, BLOCKS)]
        absent = [i == size for i, (_, size) in zip(idx, BLOCKS)]
        if absent[0]:
            if not all(absent):
                raise EncodingError(f"frame {f} is partially absent")
            chain.append(None)
            continue
        if absent[1] or absent[4] or absent[5]:
            raise EncodingError(f"frame {f} is partially absent")
        if absent[2] != absent[3]:
            raise EncodingError(f"frame {f} has a half-undefined trajectory relation")
        qtc = None if absent[2] else QtcRelation(_QTC[idx[2]], _QTC[idx[3]])
        chain.append(RelationTuple(RaRelation(_ALLEN[idx[0]], _ALLEN[idx[1]]), qtc,
                                   _QDC[idx[4]], _STAR[idx[5]]))
    return chain


# --- datasets ------------------------------------------------------------------

@dataclass
class Dataset:
    """Encoded windows: a feature matrix plus labels and provenance."""

    schema: EncodingSchema
    X: np.ndarray
    labels: list[ActionLabel]
    provenance: list[tuple]

    def __len__(self) -> int:
        return len(self.labels)

    def subset(self, mask) -> "Dataset":
        idx = np.flatnonzero(np.asarray(mask))
        return Dataset(self.schema, self.X[idx], [self.labels[i] for i in idx],
                       [self.provenance[i] for i in idx])

    def for_action(self, action: ActionLabel) -> "Dataset":
        return self.subset([lab == action for lab in self.labels])

    @property
    def actions(self) -> list[ActionLabel]:
        present = set(self.labels)
        return [a for a in ActionLabel if a in present]


def encode_windows(windows: Iterable[LabeledWindow], n: int = 5) -> Dataset:
    schema = EncodingSchema(n)
    windows = list(windows)
    X = np.zeros((len(windows), schema.dim), dtype=np.float64)
    for i, w in enumerate(windows):
        X[i] = encode_values(w.chain, schema)
    return Dataset(schema, X, [w.label for w in windows],
                   [(w.scene_id, tuple(w.pair), w.end_frame) for w in windows])


def concat(datasets: Sequence[Dataset]) -> Dataset:
    if not datasets:
        raise ValueError("nothing to concatenate")
    schema = datasets[0].schema
    if any(d.schema != schema for d in datasets):
        raise ValueError("datasets use different schemas")
    return Dataset(schema, np.vstack([d.X for d in datasets]),
                   [lab for d in datasets for lab in d.labels],
                   [p for d in datasets for p in d.provenance])


def write_dataset(ds: Dataset, fh) -> None:
    fh.write(json.dumps({"schema": ds.schema.version, "n": ds.schema.n, "dim": ds.schema.dim}) + "\n")
    for row, label, (scene_id, pair, end_frame) in zip(ds.X, ds.labels, ds.provenance):
        packed = "".join("1" if x else "0" for x in row)
        fh.write(json.dumps({
            "label": label.value,
            "provenance": {"scene_id": scene_id, "pair": list(pair), "end_frame": end_frame},
            "values": packed,
        }) + "\n")


def read_dataset(fh) -> Dataset:
    header_line = fh.readline()
    try:
        header = json.loads(header_line)
    except json.JSONDecodeError as exc:
        raise EncodingError(f"bad dataset header: {exc}") from exc
    if header.get("schema") != SCHEMA_VERSION:
        raise EncodingError(f"unsupported dataset schema {header.get('schema')!r}")
    schema = EncodingSchema(int(header["n"]))
    rows, labels, prov = [], [], []
    for lineno, line in enumerate(fh, start=2):
        if not line.strip():
            continue
        d = json.loads(line)
        packed = d["values"]
        if len(packed) != schema.dim or set(packed) - {"0", "1"}:
            raise EncodingError(f"line {lineno}: bad packed vector")
        rows.append(np.frombuffer(packed.encode("ascii"), dtype=np.uint8) - ord("0"))
        labels.append(ActionLabel(d["label"]))
        p = d["provenance"]
        prov.append((p["scene_id"], tuple(p["pair"]), int(p["end_frame"])))
    X = np.array(rows, dtype=np.float64).reshape(len(rows), schema.dim)
    return Dataset(schema, X, labels, prov)
