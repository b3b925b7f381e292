import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qxg.actions import make_windows
from qxg.calculi import StarSector
from qxg.features import (
    FRAME_WIDTH,
    EncodingError,
    EncodingSchema,
    concat,
    decode,
    encode,
    encode_windows,
    read_dataset,
    write_dataset,
)
from qxg.graph import build

from conftest import random_chain, random_relation, random_scene


def test_frame_width_and_dim():
    assert FRAME_WIDTH == 47
    assert EncodingSchema(5).dim == 235
    assert EncodingSchema(3).dim == 141


def test_all_absent_chain():
    v = encode([None] * 5).values
    assert v.sum() == 30
    assert decode(v) == [None] * 5


def test_star_change_flips_two_coordinates():
    rel = random_relation(np.random.default_rng(1))
    a = [rel] * 4 + [rel._replace(star=StarSector.EAST)]
    b = [rel] * 4 + [rel._replace(star=StarSector.WEST)]
    assert int(np.sum(encode(a).values != encode(b).values)) == 2


def test_length_mismatch():
    with pytest.raises(EncodingError):
        encode([None] * 4)


def test_zeroed_block_rejected():
    v = encode(random_chain(np.random.default_rng(2), p_absent=0)).values.copy()
    v[0:14] = 0
    with pytest.raises(EncodingError):
        decode(v)


def test_partially_absent_frame_rejected():
    v = encode(random_chain(np.random.default_rng(3), p_absent=0)).values.copy()
    v[0:14] = 0
    v[13] = 1  # allen_x absent while the other blocks are concrete
    with pytest.raises(EncodingError):
        decode(v)


@settings(max_examples=200)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_round_trip_and_segment_sums(seed, n):
    rng = np.random.default_rng(seed)
    schema = EncodingSchema(n)
    chain = random_chain(rng, n)
    v = encode(chain, schema).values
    assert v.shape == (n * FRAME_WIDTH,)
    assert set(np.unique(v)) <= {0.0, 1.0}
    assert all(v[f * 47:(f + 1) * 47].sum() == 6 for f in range(n))
    assert decode(v, schema) == chain
    assert np.array_equal(encode(decode(v, schema), schema).values, v)


def _dataset(seeds=(1, 2)):
    parts = []
    for s in seeds:
        scene = random_scene(s, frames=7)
        parts.append(encode_windows(make_windows(scene, build(scene)[0])))
    return concat(parts)


def test_dataset_deterministic_and_round_trip():
    a, b = _dataset(), _dataset()
    assert np.array_equal(a.X, b.X) and a.labels == b.labels and a.provenance == b.provenance
    buf = io.StringIO()
    write_dataset(a, buf)
    buf.seek(0)
    back = read_dataset(buf)
    assert back.schema == a.schema
    assert np.array_equal(back.X, a.X)
    assert back.labels == a.labels and back.provenance == a.provenance


def test_dataset_subsets():
    ds = _dataset()
    for action in ds.actions:
        sub = ds.for_action(action)
        assert len(sub) == ds.labels.count(action)
        assert set(sub.labels) == {action}


def test_read_dataset_rejects_bad_header():
    with pytest.raises(EncodingError):
        read_dataset(io.StringIO('{"schema": "other", "n": 5}\n'))
