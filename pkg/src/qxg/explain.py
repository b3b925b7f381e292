"""Ranked explanations of an observed action from an action-annotated graph."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .actions import ABSENT, ActionLabel
from .calculi import RelationTuple, relation_text
from .features import EncodingSchema, encode_values
from .graph import Pair, Qxg, canonical_pair
from .learn.oneclass import OneClassBundle


def render_chain(chain: Sequence[Optional[RelationTuple]]) -> str:
    """Frames joined by ``;``, containment shown as ``B`` and absent frames as ``-``."""
    return ";".join(ABSENT if rel is None else relation_text(rel, human=True) for rel in chain)


@dataclass(frozen=True)
class ExplanationQuery:
    actor: str
    action: ActionLabel
    end_frame: int
    n: int = 5
    top_k: Optional[int] = 3


@dataclass
class ExplanationEntry:
    pair: Pair
    relevance: float
    anomaly_score: float
    verdict: str  # "affirms" | "rejects"
    chain: str


@dataclass
class ExplanationReport:
    query: ExplanationQuery
    model_id: str
    entries: list[ExplanationEntry] = field(default_factory=list)

    def to_dict(self) -> dict:
        q = asdict(self.query)
        q["action"] = self.query.action.value
        return {
            "query": q,
            "model_id": self.model_id,
            "entries": [
                {"pair": list(e.pair), "relevance": e.relevance, "anomaly_score": e.anomaly_score,
                 "verdict": e.verdict, "chain": e.chain}
                for e in self.entries
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        q = self.query
        lines = [f"action {q.action.value} by {q.actor} at frame {q.end_frame} "
                 f"(last {q.n} frames, model {self.model_id})"]
        if not self.entries:
            lines.append("  no co-present object pairs")
            return "\n".join(lines) + "\n"
        pair_w = max(len(f"{a}-{b}") for a, b in (e.pair for e in self.entries))
        lines.append(f"  {'rank':>4}  {'pair':<{pair_w}}  {'score':>5}  {'verdict':<7}  chain")
        for rank, e in enumerate(self.entries, start=1):
            pair = f"{e.pair[0]}-{e.pair[1]}"
            lines.append(f"  {rank:>4}  {pair:<{pair_w}}  {e.relevance:5.3f}  {e.verdict:<7}  "
                         f"{e.chain}")
        return "\n".join(lines) + "\n"


def relevance_from_scores(scores: np.ndarray, score_range: tuple[float, float]) -> np.ndarray:
    """Map anomaly scores to [0, 1], inliers high.

    The normalisation range is the model's calibration range widened to
    cover the candidate scores, so the map is strictly decreasing.
    """
    lo = min(score_range[0], float(scores.min()))
    hi = max(score_range[1], float(scores.max()))
    if hi <= lo:
        return np.ones_like(scores)
    return 1.0 - (scores - lo) / (hi - lo)


def explain(qxg: Qxg, query: ExplanationQuery, bundle: OneClassBundle, *,
            model_id: str = "", all_pairs: bool = False) -> ExplanationReport:
    if query.actor not in qxg.objects:
        raise KeyError(f"unknown actor {query.actor!r}")
    if query.end_frame < query.n - 1:
        raise ValueError(f"end_frame {query.end_frame} leaves fewer than {query.n} frames")
    ocm = bundle[query.action]
    schema = EncodingSchema(query.n)

    pairs = [p for p in qxg.pairs_at(query.end_frame) if all_pairs or query.actor in p]
    report = ExplanationReport(query, model_id)
    if not pairs:
        return report
    chains = [qxg.chain(a, b, query.end_frame, query.n) for a, b in pairs]
    X = np.vstack([encode_values(c, schema) for c in chains])
    scores = ocm.score(X)
    relevance = relevance_from_scores(scores, ocm.score_range)

    entries = []
    for pair, chain, s, r in zip(pairs, chains, scores, relevance):
        shown = pair
        if not all_pairs and pair[0] != query.actor:
            # present the actor first; scoring used the canonical orientation
            shown = (pair[1], pair[0])
            chain = qxg.chain(shown[0], shown[1], query.end_frame, query.n)
        entries.append(ExplanationEntry(
            pair=shown,
            relevance=float(r),
            anomaly_score=float(s),
            verdict="affirms" if s <= ocm.threshold else "rejects",
            chain=render_chain(chain),
        ))
    entries.sort(key=lambda e: (-e.relevance, canonical_pair(*e.pair)))
    if query.top_k is not None:
        entries = entries[:query.top_k]
    report.entries = entries
    return report
