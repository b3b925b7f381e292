"""Qualitative relations between two tracked objects.

Four calculi are combined into one :class:`RelationTuple` per object pair and
frame: the rectangle algebra (a pair of Allen relations over the x and y
projections), the basic trajectory calculus over centroids, a four-level
distance calculus, and a four-sector star calculus.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

from .scene import AABB, TrackedObject, to_aabb


class AllenRelation(str, Enum):
    BEFORE = "b"
    MEETS = "m"
    OVERLAPS = "o"
    STARTS = "s"
    DURING = "d"
    FINISHES = "f"
    EQUALS = "eq"
    AFTER = "bi"
    MET_BY = "mi"
    OVERLAPPED_BY = "oi"
    STARTED_BY = "si"
    CONTAINS = "di"
    FINISHED_BY = "fi"

    def __str__(self) -> str:
        return self.value


A = AllenRelation
ALLEN_CONVERSE = {
    A.BEFORE: A.AFTER, A.AFTER: A.BEFORE,
    A.MEETS: A.MET_BY, A.MET_BY: A.MEETS,
    A.OVERLAPS: A.OVERLAPPED_BY, A.OVERLAPPED_BY: A.OVERLAPS,
    A.STARTS: A.STARTED_BY, A.STARTED_BY: A.STARTS,
    A.DURING: A.CONTAINS, A.CONTAINS: A.DURING,
    A.FINISHES: A.FINISHED_BY, A.FINISHED_BY: A.FINISHES,
    A.EQUALS: A.EQUALS,
}


class QdcLevel(str, Enum):
    VERY_CLOSE = "very_close"
    CLOSE = "close"
    MEDIUM = "medium"
    FAR = "far"

    def __str__(self) -> str:
        return self.value

    @property
    def rank(self) -> int:
        return _QDC_ORDER.index(self)

    def __lt__(self, other):
        if not isinstance(other, QdcLevel):
            return NotImplemented
        return self.rank < other.rank


_QDC_ORDER = list(QdcLevel)


class QtcSign(str, Enum):
    TOWARDS = "-"
    STABLE = "0"
    AWAY = "+"

    def __str__(self) -> str:
        return self.value


class StarSector(str, Enum):
    NORTH = "north"
    EAST = "east"
    SOUTH = "south"
    WEST = "west"
    SAME_POINT = "same_point"

    def __str__(self) -> str:
        return self.value


STAR_CONVERSE = {
    StarSector.NORTH: StarSector.SOUTH, StarSector.SOUTH: StarSector.NORTH,
    StarSector.EAST: StarSector.WEST, StarSector.WEST: StarSector.EAST,
    StarSector.SAME_POINT: StarSector.SAME_POINT,
}


class RaRelation(NamedTuple):
    x: AllenRelation
    y: AllenRelation


class QtcRelation(NamedTuple):
    a: QtcSign
    b: QtcSign


# first co-present frame of a pair: no motion to reason about yet
QTC_UNDEFINED = None


class RelationTuple(NamedTuple):
    """Relations of an ordered pair at one frame, in the order RA, QTC, QDC, STAR."""

    ra: RaRelation
    qtc: Optional[QtcRelation]
    qdc: QdcLevel
    star: StarSector

    def to_text(self) -> str:
        return relation_text(self)


@dataclass(frozen=True)
class CalculiConfig:
    qdc_bounds: tuple[float, float, float] = (2.0, 10.0, 25.0)
    qtc_epsilon: float = 0.05
    star_reference: str = "global_axes"  # or "ego_heading"

    def __post_init__(self):
        b = self.qdc_bounds
        if len(b) != 3 or not (0 < b[0] < b[1] < b[2]):
            raise ValueError(f"qdc_bounds must be 3 strictly increasing positive values, got {b}")
        if not self.qtc_epsilon >= 0:
            raise ValueError("qtc_epsilon must be non-negative")
        if self.star_reference not in ("global_axes", "ego_heading"):
            raise ValueError(f"unknown star_reference {self.star_reference!r}")


DEFAULT_CONFIG = CalculiConfig()


def allen(i1: tuple[float, float], i2: tuple[float, float]) -> AllenRelation:
    """Allen relation of ``i1`` relative to ``i2``; endpoints compared exactly.

    Point intervals ``[c, c]`` are accepted. Meets/met-by require both
    intervals to be proper, so that a point touching an interval boundary
    resolves to starts/finishes (or their inverses) and the 13 relations
    stay pairwise disjoint.
    """
    a1, a2 = i1
    b1, b2 = i2
    if a1 != a1 or a2 != a2 or b1 != b1 or b2 != b2:
        raise ValueError("NaN interval endpoint")
    if a1 > a2 or b1 > b2:
        raise ValueError(f"malformed interval {i1} or {i2}")
    if a2 < b1:
        return A.BEFORE
    if b2 < a1:
        return A.AFTER
    if a1 == b1:
        if a2 == b2:
            return A.EQUALS
        return A.STARTS if a2 < b2 else A.STARTED_BY
    if a2 == b2:
        return A.FINISHES if a1 > b1 else A.FINISHED_BY
    if a2 == b1:
        # a1 < b1 here; degenerate cases were resolved above
        return A.MEETS
    if b2 == a1:
        return A.MET_BY
    if a1 < b1:
        return A.OVERLAPS if a2 < b2 else A.CONTAINS
    return A.DURING if a2 < b2 else A.OVERLAPPED_BY


def ra(b1: AABB, b2: AABB) -> RaRelation:
    return RaRelation(allen((b1.x_min, b1.x_max), (b2.x_min, b2.x_max)),
                      allen((b1.y_min, b1.y_max), (b2.y_min, b2.y_max)))


def qdc(c1, c2, cfg: CalculiConfig = DEFAULT_CONFIG) -> QdcLevel:
    d = math.hypot(c1[0] - c2[0], c1[1] - c2[1])
    lo, mid, hi = cfg.qdc_bounds
    if d < lo:
        return QdcLevel.VERY_CLOSE
    if d < mid:
        return QdcLevel.CLOSE
    if d < hi:
        return QdcLevel.MEDIUM
    return QdcLevel.FAR


def _qtc_sign(delta: float, eps: float) -> QtcSign:
    if delta < -eps:
        return QtcSign.TOWARDS
    if delta > eps:
        return QtcSign.AWAY
    return QtcSign.STABLE


def qtc(prev1, cur1, prev2, cur2, cfg: CalculiConfig = DEFAULT_CONFIG) -> QtcRelation:
    """Basic trajectory relation (QTC_B11) over centroids.

    Each component compares an object's distance to the other object's
    previous position before and after its own move.
    """
    eps = cfg.qtc_epsilon
    d_a = (math.hypot(cur1[0] - prev2[0], cur1[1] - prev2[1])
           - math.hypot(prev1[0] - prev2[0], prev1[1] - prev2[1]))
    d_b = (math.hypot(cur2[0] - prev1[0], cur2[1] - prev1[1])
           - math.hypot(prev2[0] - prev1[0], prev2[1] - prev1[1]))
    return QtcRelation(_qtc_sign(d_a, eps), _qtc_sign(d_b, eps))


_QUARTER = math.pi / 4
_THREE_QUARTERS = 3 * math.pi / 4


def star(c_from, c_to, heading_rad: float = 0.0,
         cfg: CalculiConfig = DEFAULT_CONFIG) -> StarSector:
    dx = c_to[0] - c_from[0]
    dy = c_to[1] - c_from[1]
    if math.hypot(dx, dy) < 1e-9:
        return StarSector.SAME_POINT
    theta = math.atan2(dy, dx)
    if cfg.star_reference == "ego_heading" and heading_rad:
        # wrap into (-pi, pi]
        theta = math.atan2(math.sin(theta - heading_rad), math.cos(theta - heading_rad))
    if -_QUARTER <= theta < _QUARTER:
        return StarSector.EAST
    if _QUARTER <= theta < _THREE_QUARTERS:
        return StarSector.NORTH
    if -_THREE_QUARTERS <= theta < -_QUARTER:
        return StarSector.SOUTH
    return StarSector.WEST


def relate(o1_prev: Optional[TrackedObject], o1: TrackedObject,
           o2_prev: Optional[TrackedObject], o2: TrackedObject,
           cfg: CalculiConfig = DEFAULT_CONFIG, heading_rad: float = 0.0,
           boxes: Optional[tuple[AABB, AABB]] = None) -> RelationTuple:
    """Relation tuple of ``o1`` towards ``o2`` at the current frame.

    ``heading_rad`` is the reference heading used by the star calculus when
    ``cfg.star_reference == "ego_heading"``. ``boxes`` lets callers pass
    precomputed axis-aligned boxes.
    """
    if o1.id == o2.id:
        raise ValueError(f"cannot relate object {o1.id!r} to itself")
    b1, b2 = boxes if boxes is not None else (to_aabb(o1), to_aabb(o2))
    if o1_prev is None or o2_prev is None:
        motion = QTC_UNDEFINED
    else:
        motion = qtc(o1_prev.center, o1.center, o2_prev.center, o2.center, cfg)
    return RelationTuple(
        ra(b1, b2),
        motion,
        qdc(o1.center, o2.center, cfg),
        star(o1.center, o2.center, heading_rad, cfg),
    )


def converse(rel: RelationTuple) -> RelationTuple:
    """The same relation seen from the second object."""
    return RelationTuple(
        RaRelation(ALLEN_CONVERSE[rel.ra.x], ALLEN_CONVERSE[rel.ra.y]),
        None if rel.qtc is None else QtcRelation(rel.qtc.b, rel.qtc.a),
        rel.qdc,
        STAR_CONVERSE[rel.star],
    )


# --- text form ---------------------------------------------------------------

QTC_UNDEFINED_TEXT = "undefined"
INSIDE_ALIAS = "B"


def relation_text(rel: RelationTuple, *, human: bool = False) -> str:
    """Compact text, e.g. ``RA(d,d)|QTC(0,0)|QDC(very_close)|STAR(north)``.

    With ``human=True`` the containment relation ``RA(d,d)`` is shown as ``B``.
    """
    if human and rel.ra.x is A.DURING and rel.ra.y is A.DURING:
        ra_txt = INSIDE_ALIAS
    else:
        ra_txt = f"RA({rel.ra.x.value},{rel.ra.y.value})"
    qtc_txt = (QTC_UNDEFINED_TEXT if rel.qtc is None
               else f"{rel.qtc.a.value},{rel.qtc.b.value}")
    return f"{ra_txt}|QTC({qtc_txt})|QDC({rel.qdc.value})|STAR({rel.star.value})"


_TEXT_RE = re.compile(
    r"^(?:RA\((?P<x>[a-z]+),(?P<y>[a-z]+)\)|(?P<inside>B))"
    r"\|QTC\((?:(?P<qa>[-0+]),(?P<qb>[-0+])|(?P<qu>undefined))\)"
    r"\|QDC\((?P<qdc>[a-z_]+)\)\|STAR\((?P<star>[a-z_]+)\)$"
)


def parse_relation(text: str) -> RelationTuple:
    m = _TEXT_RE.match(text.strip())
    if m is None:
        raise ValueError(f"malformed relation text {text!r}")
    try:
        if m["inside"]:
            ra_rel = RaRelation(A.DURING, A.DURING)
        else:
            ra_rel = RaRelation(AllenRelation(m["x"]), AllenRelation(m["y"]))
        motion = None if m["qu"] else QtcRelation(QtcSign(m["qa"]), QtcSign(m["qb"]))
        return RelationTuple(ra_rel, motion, QdcLevel(m["qdc"]), StarSector(m["star"]))
    except ValueError as exc:
        raise ValueError(f"malformed relation text {text!r}: {exc}") from exc
