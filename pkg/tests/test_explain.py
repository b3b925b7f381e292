import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qxg.actions import ActionLabel
from qxg.explain import ExplanationQuery, explain, relevance_from_scores, render_chain
from qxg.features import encode_values, EncodingSchema
from qxg.graph import build
from qxg.learn import train_one_class
from qxg.learn.oneclass import OneClassBundle, OneClassModel

from conftest import LookupScorer, fig2_graph, make_scene, obj, random_scene

L = ActionLabel


def _fig2_bundle(g, s12=0.2, s13=0.8, threshold=0.5):
    schema = EncodingSchema(5)
    table = [(encode_values(g.chain("o1", "o2", 4, 5), schema), s12),
             (encode_values(g.chain("o1", "o3", 4, 5), schema), s13)]
    return OneClassBundle("stub", {L.STOP: OneClassModel(LookupScorer(table), threshold)})


def test_fig2_shape():
    g = fig2_graph()
    report = explain(g, ExplanationQuery("o1", L.STOP, 4), _fig2_bundle(g))
    assert [e.pair for e in report.entries] == [("o1", "o2"), ("o1", "o3")]
    assert report.entries[0].relevance == pytest.approx(0.8)
    assert report.entries[1].relevance == pytest.approx(0.2)
    assert [e.verdict for e in report.entries] == ["affirms", "rejects"]


def test_actor_without_neighbours():
    g = fig2_graph()
    g.objects["o4"] = g.objects["o3"]
    assert explain(g, ExplanationQuery("o4", L.STOP, 4), _fig2_bundle(g)).entries == []


def test_all_rejected():
    g = fig2_graph()
    report = explain(g, ExplanationQuery("o1", L.STOP, 4), _fig2_bundle(g, 0.9, 0.95, 0.5))
    assert {e.verdict for e in report.entries} == {"rejects"}


def test_errors():
    g = fig2_graph()
    bundle = _fig2_bundle(g)
    with pytest.raises(KeyError):
        explain(g, ExplanationQuery("nobody", L.STOP, 4), bundle)
    with pytest.raises(KeyError):
        explain(g, ExplanationQuery("o1", L.CRUISING, 4), bundle)
    with pytest.raises(ValueError):
        explain(g, ExplanationQuery("o1", L.STOP, 2), bundle)


def test_actor_shown_first_with_converse_chain():
    g = fig2_graph()
    report = explain(g, ExplanationQuery("o2", L.STOP, 4), _fig2_bundle(g))
    (entry,) = report.entries
    assert entry.pair == ("o2", "o1")
    assert entry.chain.split(";")[0] == "B|QTC(0,0)|QDC(very_close)|STAR(south)"


def test_render_chain():
    g = fig2_graph()
    chain = g.chain("o1", "o2", 4, 5)
    assert render_chain(chain[:1]) == "RA(di,di)|QTC(0,0)|QDC(very_close)|STAR(north)"
    flipped = g.chain("o2", "o1", 4, 5)
    assert render_chain([flipped[0]._replace(star=flipped[0].star.NORTH)]) == \
        "B|QTC(0,0)|QDC(very_close)|STAR(north)"
    assert render_chain([None]) == "-"
    assert len(render_chain(chain).split(";")) == 5


def _random_bundle(seed):
    rng = np.random.default_rng(seed)
    scores = {}

    class Hashy:
        kind = "stub"

        def score(self, X):
            out = []
            for row in np.atleast_2d(X):
                key = row.tobytes()
                if key not in scores:
                    scores[key] = float(rng.random())
                out.append(scores[key])
            return np.array(out)

    return Hashy()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 1000))
def test_every_pair_once_and_monotone_invariance(seed):
    scene = random_scene(seed, frames=6, pool=6)
    g, _ = build(scene)
    base = _random_bundle(seed)
    q = ExplanationQuery("ego", L.STOP, 5, top_k=None)
    b1 = OneClassBundle("stub", {L.STOP: OneClassModel(base, 0.5)})
    r1 = explain(g, q, b1)
    assert len(r1.entries) == len([p for p in g.pairs_at(5) if "ego" in p])
    assert len({e.pair for e in r1.entries}) == len(r1.entries)

    class Cubed:
        kind = "stub"

        def score(self, X):
            return base.score(X) ** 3 * 100 + 7

    b2 = OneClassBundle("stub", {L.STOP: OneClassModel(Cubed(), 0.5 ** 3 * 100 + 7,
                                                       (7.0, 107.0))})
    r2 = explain(g, q, b2)
    assert [e.pair for e in r1.entries] == [e.pair for e in r2.entries]
    assert [e.verdict for e in r1.entries] == [e.verdict for e in r2.entries]
    rel = [e.relevance for e in r1.entries]
    assert rel == sorted(rel, reverse=True)
    assert all(0.0 <= r <= 1.0 for r in rel)


def test_relevance_from_scores_bounds():
    r = relevance_from_scores(np.array([0.3, 0.5]), (0.0, 1.0))
    assert r.tolist() == pytest.approx([0.7, 0.5])
    assert relevance_from_scores(np.array([2.0]), (2.0, 2.0)).tolist() == [1.0]


def test_end_to_end_deterministic_report():
    scene = random_scene(21, frames=10, pool=5)
    g, _ = build(scene)
    X = np.vstack([encode_values(g.chain(a, b, k, 5), EncodingSchema(5))
                   for k in range(4, 10) for a, b in g.pairs_at(k)])
    bundle = train_one_class(X, [L.STOP] * len(X), seed=3)
    q = ExplanationQuery("ego", L.STOP, 9, top_k=2)
    r1, r2 = explain(g, q, bundle, model_id="m"), explain(g, q, bundle, model_id="m")
    assert r1.to_json() == r2.to_json()
    assert len(r1.entries) <= 2
    doc = json.loads(r1.to_json())
    assert doc["query"]["action"] == "Stop" and doc["model_id"] == "m"
    text = r1.to_text()
    assert text.startswith("action Stop by ego at frame 9")
    all_pairs = explain(g, ExplanationQuery("ego", L.STOP, 9, top_k=None), bundle, all_pairs=True)
    assert len(all_pairs.entries) == len(g.pairs_at(9))


def test_empty_report_text():
    scene = make_scene([[obj("a", 1, 1)]] * 5)
    g, _ = build(scene)
    g.objects["lonely"] = g.objects["a"]
    bundle = OneClassBundle("stub", {L.STOP: OneClassModel(LookupScorer([]), 0.5)})
    report = explain(g, ExplanationQuery("lonely", L.STOP, 4), bundle)
    assert "no co-present object pairs" in report.to_text()
