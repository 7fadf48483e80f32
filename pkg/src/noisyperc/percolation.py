"""Bernoulli addition/thinning, cluster labeling, box-restricted connectivity and renormalization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels, rng
from .lattice import BoxRegion, GeometryError, EdgeSet, LatticeWindow, Vertex, box_region, edge_endpoints

LEFT, RIGHT, BOTTOM, TOP = 1, 2, 4, 8


@dataclass(frozen=True)
class BernoulliParams:
    epsilon: float = 0.0
    q: float = 1.0
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        # closed intervals: the eps = 0 and q = 1 limits are used as controls
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")


def add_bernoulli(X: EdgeSet, params: BernoulliParams) -> EdgeSet:
    """Y = X plus each absent edge independently with probability epsilon."""
    u = rng.uniforms(params.seed, params.stream_id, rng.LANE_ADD, X.window.n_edges)
    return EdgeSet(X.window, X.bits | (u < params.epsilon))


def thin_bernoulli(E: EdgeSet, params: BernoulliParams) -> EdgeSet:
    """Keep each present edge independently with probability q.

    The uniforms do not depend on q, so for a fixed stream the result grows with q.
    """
    u = rng.uniforms(params.seed, params.stream_id, rng.LANE_THIN, E.window.n_edges)
    return EdgeSet(E.window, E.bits & (u < params.q))


@dataclass
class ClusterLabeling:
    window: LatticeWindow
    labels: np.ndarray  # per vertex, 0..n_clusters-1
    sizes: np.ndarray  # per cluster
    touches: np.ndarray  # per cluster bitmask of LEFT/RIGHT/BOTTOM/TOP

    @property
    def n_clusters(self) -> int:
        return self.sizes.shape[0]

    @property
    def touches_boundary(self) -> np.ndarray:
        sides = LEFT | RIGHT | TOP
        if self.window.boundary_mode == "open_box":
            sides |= BOTTOM
        return (self.touches & sides) != 0

    def label(self, v: Vertex) -> int:
        return int(self.labels[self.window.vertex_index(v)])

    def connected(self, u: Vertex, v: Vertex) -> bool:
        return self.label(u) == self.label(v)

    def has_crossing(self, axis: str = "x") -> bool:
        """Some cluster touches both left and right sides (axis 'x') or bottom and top ('y')."""
        both = LEFT | RIGHT if axis == "x" else BOTTOM | TOP
        return bool(np.any((self.touches & both) == both))


def _side_flags(window: LatticeWindow) -> tuple[np.ndarray, np.ndarray]:
    w, h = window.width, window.height
    flags = np.zeros((h, w), dtype=np.uint8)
    flags[:, 0] |= LEFT
    flags[:, -1] |= RIGHT
    flags[0, :] |= BOTTOM
    flags[-1, :] |= TOP
    flat = flags.ravel()
    idx = np.flatnonzero(flat)
    return idx, flat[idx]


def clusters(E: EdgeSet) -> ClusterLabeling:
    window = E.window
    u, v = edge_endpoints(window)
    labels, k = _kernels.uf_labels(window.n_vertices, u, v, E.bits)
    sizes = np.bincount(labels, minlength=k)
    touches = np.zeros(k, dtype=np.uint8)
    idx, flags = _side_flags(window)
    np.bitwise_or.at(touches, labels[idx], flags)
    return ClusterLabeling(window, labels, sizes, touches)


def _rects(regions) -> np.ndarray:
    return np.array([r.rect for r in regions if not r.empty], dtype=np.int64).reshape(-1, 4)


def local_connected(Y: EdgeSet, x: Vertex, y: Vertex, region) -> bool:
    """Is there a Y-path from x to y visiting only vertices of ``region``?

    ``region`` is a BoxRegion or a tuple of BoxRegions (their union).
    """
    regions = (region,) if isinstance(region, BoxRegion) else tuple(region)
    for r in regions:
        if r.window != Y.window:
            raise ValueError("region and edge set live in different windows")
    for p in (x, y):
        if not any(p in r for r in regions):
            raise GeometryError(f"endpoint {tuple(p)} outside region")
    w = Y.window
    return bool(_kernels.connected_in_rects(w.width, w.height, Y.bits, _rects(regions),
                                            w.vertex_index(x), w.vertex_index(y)))


def close_connection_boxes(window: LatticeWindow, x_coarse: Vertex, y_coarse: Vertex,
                           n: int) -> tuple[Vertex, Vertex, BoxRegion, BoxRegion]:
    if abs(x_coarse[0] - y_coarse[0]) + abs(x_coarse[1] - y_coarse[1]) != 1:
        raise ValueError("coarse endpoints must be nearest neighbours")
    nx = Vertex(n * x_coarse[0], n * x_coarse[1])
    ny = Vertex(n * y_coarse[0], n * y_coarse[1])
    for p in (nx, ny):
        if not window.contains(p):
            raise GeometryError(f"scaled point {tuple(p)} outside window")
    return nx, ny, box_region(window, nx, n), box_region(window, ny, n)


def closely_connected(Y: EdgeSet, x_coarse: Vertex, y_coarse: Vertex, n: int) -> bool:
    """Event A_n: nx and ny joined by a Y-path inside the union of their side-n boxes."""
    nx, ny, bx, by = close_connection_boxes(Y.window, x_coarse, y_coarse, n)
    return local_connected(Y, nx, ny, (bx, by))


@dataclass
class CoarseEdgeSet:
    """Renormalized configuration on the coarse lattice ``{(i, j)}`` anchored at ``(n*i, n*j)``.

    ``valid`` marks coarse edges whose two boxes fit inside the fine window;
    the others are dropped and always absent.
    """

    scale: int
    edges: EdgeSet  # over the coarse LatticeWindow
    valid: np.ndarray

    @property
    def window(self) -> LatticeWindow:
        return self.edges.window

    @property
    def bits(self) -> np.ndarray:
        return self.edges.bits


def coarse_window(window: LatticeWindow, n: int) -> tuple[LatticeWindow, np.ndarray]:
    """Coarse window and the mask of coarse edges whose boxes are unclipped."""
    if n < 2:
        raise ValueError("renormalization scale must be >= 2")
    cw, ch = window.width // n, window.height // n
    if cw < 2 or ch < 2:
        raise GeometryError(f"scale {n} too large for a {window.width}x{window.height} window")
    coarse = LatticeWindow(cw, ch)
    h = n // 2
    okx = np.array([n * i - h >= 0 and n * i + h <= window.width - 1 for i in range(cw)])
    oky = np.array([n * j - h >= 0 and n * j + h <= window.height - 1 for j in range(ch)])
    ok = (oky[:, None] & okx[None, :]).ravel()
    u, v = edge_endpoints(coarse)
    return coarse, ok[u] & ok[v]


def renormalize(Y: EdgeSet, n: int) -> CoarseEdgeSet:
    coarse, valid = coarse_window(Y.window, n)
    out = EdgeSet.empty(coarse)
    w = Y.window
    h = n // 2
    u, v = edge_endpoints(coarse)
    for e in np.flatnonzero(valid):
        a, b = coarse.vertex_at(int(u[e])), coarse.vertex_at(int(v[e]))
        rects = np.array([[n * p[0] - h, n * p[0] + h, n * p[1] - h, n * p[1] + h] for p in (a, b)],
                         dtype=np.int64)
        src = n * a[1] * w.width + n * a[0]
        dst = n * b[1] * w.width + n * b[0]
        out.bits[e] = _kernels.connected_in_rects(w.width, w.height, Y.bits, rects, src, dst)
    return CoarseEdgeSet(n, out, valid)
