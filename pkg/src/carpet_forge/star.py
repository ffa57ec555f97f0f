"""Star neighbourhoods of cells in a partition.

Cells are closed: two cells touch when they share any point, a single vertex
included.  A partition is either a plain sequence of cells (brute-force touch
tests) or any object exposing ``neighbors(cell)`` and ``__contains__``.
"""
from __future__ import annotations

from .geom import Polygon, Rect, polygons_meet
from .regionops import Shape, union_all


class StarError(ValueError):
    pass


def cell_polygon(cell) -> Polygon:
    if isinstance(cell, Polygon):
        return cell
    if isinstance(cell, Rect):
        return cell.polygon()
    return cell.polygon


def cells_touch(a, b) -> bool:
    return polygons_meet(cell_polygon(a), cell_polygon(b))


class ListPartition:
    """A finite partition held in memory, with cached touch lists."""

    def __init__(self, cells):
        self.cells = list(cells)
        self._index = {c: i for i, c in enumerate(self.cells)}
        self._nbrs = {}

    def __contains__(self, cell):
        return cell in self._index

    def __iter__(self):
        return iter(self.cells)

    def __len__(self):
        return len(self.cells)

    def neighbors(self, cell):
        i = self._index[cell]
        if i not in self._nbrs:
            pc = cell_polygon(cell)
            self._nbrs[i] = [c for c in self.cells if polygons_meet(pc, cell_polygon(c))]
        return self._nbrs[i]


def _as_partition(P):
    if hasattr(P, "neighbors"):
        return P
    return ListPartition(P)


def star(p, P, i: int = 1) -> list:
    """``st^i(p, P)``: cells reachable from ``p`` by ``i`` rounds of touching."""
    if i < 1:
        raise StarError("star index must be positive")
    P = _as_partition(P)
    if p not in P:
        raise StarError("cell not in partition")
    seen = {p: None}
    frontier = [p]
    for _ in range(i):
        nxt = []
        for c in frontier:
            for d in P.neighbors(c):
                if d not in seen:
                    seen[d] = None
                    nxt.append(d)
        frontier = nxt
    return list(seen)


def star_union(p, P, i: int = 1) -> Shape:
    """``st^i(p, P)*`` as an exact planar set."""
    return union_all(cell_polygon(c) for c in star(p, P, i))
