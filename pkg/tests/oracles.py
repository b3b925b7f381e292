"""Independent oracles for the qualitative calculi, written from the
endpoint-order and half-plane definitions rather than from the implementation."""
from qxg.calculi import AllenRelation as A, StarSector

# Endpoint-order definitions of the 13 Allen relations, used as the oracle.
# Meets/met-by require two proper intervals so that point intervals stay JEPD.
ALLEN_PREDICATES = {
    A.BEFORE: lambda a1, a2, b1, b2: a2 < b1,
    A.AFTER: lambda a1, a2, b1, b2: b2 < a1,
    A.MEETS: lambda a1, a2, b1, b2: a2 == b1 and a1 < a2 and b1 < b2,
    A.MET_BY: lambda a1, a2, b1, b2: b2 == a1 and a1 < a2 and b1 < b2,
    A.OVERLAPS: lambda a1, a2, b1, b2: a1 < b1 < a2 < b2,
    A.OVERLAPPED_BY: lambda a1, a2, b1, b2: b1 < a1 < b2 < a2,
    A.STARTS: lambda a1, a2, b1, b2: a1 == b1 and a2 < b2,
    A.STARTED_BY: lambda a1, a2, b1, b2: a1 == b1 and b2 < a2,
    A.DURING: lambda a1, a2, b1, b2: b1 < a1 and a2 < b2,
    A.CONTAINS: lambda a1, a2, b1, b2: a1 < b1 and b2 < a2,
    A.FINISHES: lambda a1, a2, b1, b2: a2 == b2 and b1 < a1,
    A.FINISHED_BY: lambda a1, a2, b1, b2: a2 == b2 and a1 < b1,
    A.EQUALS: lambda a1, a2, b1, b2: a1 == b1 and a2 == b2,
}

# interval archetypes relative to the reference [0, 2]
ARCHETYPES = {
    A.BEFORE: (-3, -1), A.MEETS: (-2, 0), A.OVERLAPS: (-1, 1), A.STARTS: (0, 1),
    A.DURING: (0.5, 1.5), A.FINISHES: (1, 2), A.EQUALS: (0, 2), A.AFTER: (3, 4),
    A.MET_BY: (2, 3), A.OVERLAPPED_BY: (1, 3), A.STARTED_BY: (0, 3), A.CONTAINS: (-1, 3),
    A.FINISHED_BY: (-1, 2),
}


def oracle_allen(i1, i2):
    hits = [r for r, p in ALLEN_PREDICATES.items() if p(*i1, *i2)]
    assert len(hits) == 1, (i1, i2, hits)
    return hits[0]



def oracle_star(dx, dy):
    if dx == 0 and dy == 0:
        return StarSector.SAME_POINT
    if dx > 0 and -dx <= dy < dx:
        return StarSector.EAST
    if dy > 0 and -dy < dx <= dy:
        return StarSector.NORTH
    if dx < 0 and dx < dy <= -dx:
        return StarSector.WEST
    return StarSector.SOUTH
