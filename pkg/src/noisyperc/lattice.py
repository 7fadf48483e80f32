"""Finite Z^2 windows, edge indexing, boxes and dense edge sets.

Vertices of a ``width x height`` window are numbered ``v = y * width + x``.
Edges are numbered horizontals first (row-major over ``(height, width - 1)``),
then verticals (row-major over ``(height - 1, width)``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple

import numpy as np

EAST = "E"
NORTH = "N"
BOUNDARY_MODES = ("open_box", "half_plane")


class GeometryError(ValueError):
    """A vertex, box or scale does not fit the window."""


class Vertex(NamedTuple):
    x: int
    y: int


class Edge(NamedTuple):
    origin: Vertex
    direction: str  # EAST or NORTH

    @property
    def target(self) -> Vertex:
        if self.direction == EAST:
            return Vertex(self.origin.x + 1, self.origin.y)
        return Vertex(self.origin.x, self.origin.y + 1)


@dataclass(frozen=True)
class LatticeWindow:
    width: int
    height: int
    boundary_mode: str = "open_box"

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise GeometryError(f"window must be at least 2x2, got {self.width}x{self.height}")
        if self.boundary_mode not in BOUNDARY_MODES:
            raise ValueError(f"unknown boundary mode {self.boundary_mode!r}")

    @property
    def n_vertices(self) -> int:
        return self.width * self.height

    @property
    def n_horizontal(self) -> int:
        return (self.width - 1) * self.height

    @property
    def n_vertical(self) -> int:
        return self.width * (self.height - 1)

    @property
    def n_edges(self) -> int:
        return self.n_horizontal + self.n_vertical

    def contains(self, v: Vertex) -> bool:
        return 0 <= v[0] < self.width and 0 <= v[1] < self.height

    def vertex_index(self, v: Vertex) -> int:
        if not self.contains(v):
            raise GeometryError(f"vertex {tuple(v)} outside {self.width}x{self.height} window")
        return v[1] * self.width + v[0]

    def vertex_at(self, index: int) -> Vertex:
        return Vertex(index % self.width, index // self.width)

    def on_boundary(self, v: Vertex) -> bool:
        """Whether ``v`` sits on the part of the window edge that stands in for infinity.

        In ``half_plane`` mode the bottom row is the true boundary line of the
        half-plane, so it does not count.
        """
        x, y = v
        bottom = y == 0 and self.boundary_mode == "open_box"
        return x == 0 or x == self.width - 1 or y == self.height - 1 or bottom


def edge_index(window: LatticeWindow, e: Edge) -> int:
    (x, y), d = e
    if d == EAST:
        if not (0 <= x < window.width - 1 and 0 <= y < window.height):
            raise GeometryError(f"edge {e} outside window")
        return y * (window.width - 1) + x
    if d == NORTH:
        if not (0 <= x < window.width and 0 <= y < window.height - 1):
            raise GeometryError(f"edge {e} outside window")
        return window.n_horizontal + y * window.width + x
    raise ValueError(f"unknown direction {d!r}")


def edge_at(window: LatticeWindow, index: int) -> Edge:
    if not 0 <= index < window.n_edges:
        raise GeometryError(f"edge index {index} outside 0..{window.n_edges - 1}")
    if index < window.n_horizontal:
        y, x = divmod(index, window.width - 1)
        return Edge(Vertex(x, y), EAST)
    y, x = divmod(index - window.n_horizontal, window.width)
    return Edge(Vertex(x, y), NORTH)


def edge_between(window: LatticeWindow, u: Vertex, v: Vertex) -> int:
    """Index of the edge joining nearest neighbours ``u`` and ``v``."""
    dx, dy = v[0] - u[0], v[1] - u[1]
    if abs(dx) + abs(dy) != 1:
        raise ValueError(f"{tuple(u)} and {tuple(v)} are not nearest neighbours")
    lo = u if (dx, dy) in ((1, 0), (0, 1)) else v
    return edge_index(window, Edge(Vertex(*lo), EAST if dy == 0 else NORTH))


@lru_cache(maxsize=64)
def edge_endpoints(window: LatticeWindow) -> tuple[np.ndarray, np.ndarray]:
    """Vertex indices ``(u, v)`` of every edge, in edge-index order."""
    w, h = window.width, window.height
    vid = np.arange(w * h, dtype=np.int64).reshape(h, w)
    hu, hv = vid[:, :-1].ravel(), vid[:, 1:].ravel()
    vu, vv = vid[:-1, :].ravel(), vid[1:, :].ravel()
    u = np.concatenate([hu, vu])
    v = np.concatenate([hv, vv])
    u.flags.writeable = False
    v.flags.writeable = False
    return u, v


def l1_distance(u: Vertex, v: Vertex) -> int:
    return abs(u[0] - v[0]) + abs(u[1] - v[1])


@dataclass(frozen=True)
class BoxRegion:
    """Vertices within ``side // 2`` of ``center`` in both coordinates, clipped to the window."""

    window: LatticeWindow
    center: Vertex
    side: int
    x0: int = field(init=False)
    x1: int = field(init=False)
    y0: int = field(init=False)
    y1: int = field(init=False)
    clipped: bool = field(init=False)

    def __post_init__(self):
        if self.side < 1:
            raise ValueError("box side must be >= 1")
        r = self.side // 2
        cx, cy = self.center
        bounds = (max(cx - r, 0), min(cx + r, self.window.width - 1),
                  max(cy - r, 0), min(cy + r, self.window.height - 1))
        for name, val in zip(("x0", "x1", "y0", "y1"), bounds):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "clipped", bounds != (cx - r, cx + r, cy - r, cy + r))

    @property
    def half(self) -> int:
        return self.side // 2

    @property
    def empty(self) -> bool:
        return self.x0 > self.x1 or self.y0 > self.y1

    @property
    def rect(self) -> tuple[int, int, int, int]:
        return self.x0, self.x1, self.y0, self.y1

    def __contains__(self, v) -> bool:
        return self.x0 <= v[0] <= self.x1 and self.y0 <= v[1] <= self.y1

    def __len__(self) -> int:
        if self.empty:
            return 0
        return (self.x1 - self.x0 + 1) * (self.y1 - self.y0 + 1)

    def vertices(self) -> Iterator[Vertex]:
        for y in range(self.y0, self.y1 + 1):
            for x in range(self.x0, self.x1 + 1):
                yield Vertex(x, y)

    def issubset(self, other: BoxRegion) -> bool:
        if self.empty:
            return True
        return (other.x0 <= self.x0 and self.x1 <= other.x1
                and other.y0 <= self.y0 and self.y1 <= other.y1)


def box_region(window: LatticeWindow, center: Vertex, side: int) -> BoxRegion:
    return BoxRegion(window, Vertex(*center), side)


def region_mask(window: LatticeWindow, *regions: BoxRegion) -> np.ndarray:
    """Boolean vertex mask of shape ``(height, width)`` for the union of ``regions``."""
    mask = np.zeros((window.height, window.width), dtype=bool)
    for r in regions:
        if r.window != window:
            raise ValueError("regions live in different windows")
        if not r.empty:
            mask[r.y0:r.y1 + 1, r.x0:r.x1 + 1] = True
    return mask


def edges_within(region: BoxRegion, union_with: BoxRegion | None = None) -> set[Edge]:
    """Edges with both endpoints in ``region`` (or in the union with ``union_with``)."""
    window = region.window
    regions = [region] if union_with is None else [region, union_with]
    inside = region_mask(window, *regions).ravel()
    u, v = edge_endpoints(window)
    idx = np.flatnonzero(inside[u] & inside[v])
    return {edge_at(window, int(i)) for i in idx}


@dataclass
class EdgeSet:
    """Dense presence map over all edges of a window (one flag per edge index)."""

    window: LatticeWindow
    bits: np.ndarray

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool)
        if self.bits.shape != (self.window.n_edges,):
            raise ValueError(f"expected {self.window.n_edges} edge flags, got shape {self.bits.shape}")

    @classmethod
    def empty(cls, window: LatticeWindow) -> EdgeSet:
        return cls(window, np.zeros(window.n_edges, dtype=bool))

    @classmethod
    def full(cls, window: LatticeWindow) -> EdgeSet:
        return cls(window, np.ones(window.n_edges, dtype=bool))

    @classmethod
    def from_edges(cls, window: LatticeWindow, edges: Iterable[Edge]) -> EdgeSet:
        es = cls.empty(window)
        for e in edges:
            es.bits[edge_index(window, e)] = True
        return es

    @property
    def horizontal(self) -> np.ndarray:
        """View of the horizontal flags, shape ``(height, width - 1)``."""
        w = self.window
        return self.bits[:w.n_horizontal].reshape(w.height, w.width - 1)

    @property
    def vertical(self) -> np.ndarray:
        """View of the vertical flags, shape ``(height - 1, width)``."""
        w = self.window
        return self.bits[w.n_horizontal:].reshape(w.height - 1, w.width)

    def count(self) -> int:
        return int(self.bits.sum())

    def copy(self) -> EdgeSet:
        return EdgeSet(self.window, self.bits.copy())

    def __contains__(self, e: Edge) -> bool:
        return bool(self.bits[edge_index(self.window, e)])

    def edges(self) -> Iterator[Edge]:
        for i in np.flatnonzero(self.bits):
            yield edge_at(self.window, int(i))

    def _check(self, other: EdgeSet):
        if other.window != self.window:
            raise ValueError("edge sets live in different windows")

    def __and__(self, other: EdgeSet) -> EdgeSet:
        self._check(other)
        return EdgeSet(self.window, self.bits & other.bits)

    def __or__(self, other: EdgeSet) -> EdgeSet:
        self._check(other)
        return EdgeSet(self.window, self.bits | other.bits)

    def __le__(self, other: EdgeSet) -> bool:
        self._check(other)
        return not np.any(self.bits & ~other.bits)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EdgeSet):
            return NotImplemented
        return self.window == other.window and np.array_equal(self.bits, other.bits)

    def packed(self) -> bytes:
        return np.packbits(self.bits).tobytes()
