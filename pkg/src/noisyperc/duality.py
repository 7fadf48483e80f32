"""Planar dual of a window configuration, dual forests and the boundary-walk path.

Dual vertices are the bounded faces ``(i, j)`` with corners ``(i, j)`` and
``(i + 1, j + 1)``. Only primal edges with a bounded face on both sides carry a
dual edge; the outer face is left out except in :func:`has_outer_dual_cycle`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import _kernels
from .lattice import EdgeSet, GeometryError, LatticeWindow, Vertex, edge_between


class Face(NamedTuple):
    i: int
    j: int


class UnclosableWalk(RuntimeError):
    """The boundary walk cannot be closed inside the window."""


def n_faces(window: LatticeWindow) -> int:
    return (window.width - 1) * (window.height - 1)


def face_index(window: LatticeWindow, f: Face) -> int:
    if not (0 <= f[0] < window.width - 1 and 0 <= f[1] < window.height - 1):
        raise GeometryError(f"face {tuple(f)} outside window")
    return f[1] * (window.width - 1) + f[0]


@lru_cache(maxsize=64)
def dual_structure(window: LatticeWindow) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(primal, f1, f2)``: interior primal edge indices and the two faces each one separates."""
    w, h = window.width, window.height
    fw = w - 1
    # horizontal primal (x, y), 1 <= y <= h-2: faces (x, y-1) and (x, y)
    hy, hx = np.mgrid[1:h - 1, 0:w - 1]
    h_idx = (hy * (w - 1) + hx).ravel()
    h_f1 = ((hy - 1) * fw + hx).ravel()
    h_f2 = (hy * fw + hx).ravel()
    # vertical primal (x, y), 1 <= x <= w-2: faces (x-1, y) and (x, y)
    vy, vx = np.mgrid[0:h - 1, 1:w - 1]
    v_idx = (window.n_horizontal + vy * w + vx).ravel()
    v_f1 = (vy * fw + vx - 1).ravel()
    v_f2 = (vy * fw + vx).ravel()
    primal = np.concatenate([h_idx, v_idx]).astype(np.int64)
    f1 = np.concatenate([h_f1, v_f1]).astype(np.int64)
    f2 = np.concatenate([h_f2, v_f2]).astype(np.int64)
    for a in (primal, f1, f2):
        a.flags.writeable = False
    return primal, f1, f2


@dataclass
class DualEdgeSet:
    """Presence flags for interior dual edges, ordered like their crossing primal edges."""

    window: LatticeWindow
    bits: np.ndarray

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool)
        expected = dual_structure(self.window)[0].shape
        if self.bits.shape != expected:
            raise ValueError(f"expected {expected[0]} dual edge flags, got {self.bits.shape}")

    def count(self) -> int:
        return int(self.bits.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, DualEdgeSet):
            return NotImplemented
        return self.window == other.window and np.array_equal(self.bits, other.bits)


def to_dual(E: EdgeSet) -> DualEdgeSet:
    primal = dual_structure(E.window)[0]
    return DualEdgeSet(E.window, ~E.bits[primal])


def from_dual(D: DualEdgeSet, boundary: EdgeSet | None = None) -> EdgeSet:
    """Primal configuration whose interior is dual to ``D``.

    Boundary edges are copied from ``boundary`` (all present when omitted).
    """
    primal = dual_structure(D.window)[0]
    E = boundary.copy() if boundary is not None else EdgeSet.full(D.window)
    E.bits[primal] = ~D.bits
    return E


def has_dual_cycle(D: DualEdgeSet) -> bool:
    _, f1, f2 = dual_structure(D.window)
    return bool(_kernels.uf_has_cycle(n_faces(D.window), f1, f2, D.bits))


def has_outer_dual_cycle(E: EdgeSet) -> bool:
    """Cycle check on the dual with the outer face included as one extra vertex.

    Boundary primal edges that are absent join their face to the outer face.
    Reported separately from :func:`has_dual_cycle`: on a finite window, sets
    like a row foliation are cut off from each other through the outer face.
    """
    window = E.window
    w, h = window.width, window.height
    primal, f1, f2 = dual_structure(window)
    outer = n_faces(window)
    fw = w - 1
    bi, bf = [], []
    for x in range(w - 1):
        bi += [x, (h - 1) * (w - 1) + x]
        bf += [x, (h - 2) * fw + x]
    for y in range(h - 1):
        bi += [window.n_horizontal + y * w, window.n_horizontal + y * w + w - 1]
        bf += [y * fw, y * fw + w - 2]
    bi = np.array(bi, dtype=np.int64)
    us = np.concatenate([f1, np.array(bf, dtype=np.int64)])
    vs = np.concatenate([f2, np.full(bi.shape[0], outer, dtype=np.int64)])
    present = ~E.bits[np.concatenate([primal, bi])]
    return bool(_kernels.uf_has_cycle(outer + 1, us, vs, present))


@dataclass
class DualClusterLabeling:
    window: LatticeWindow
    labels: np.ndarray  # per face
    sizes: np.ndarray
    bbox: np.ndarray  # per cluster (imin, imax, jmin, jmax)

    def label(self, f: Face) -> int:
        return int(self.labels[face_index(self.window, f)])

    def size_of(self, f: Face) -> int:
        return int(self.sizes[self.label(f)])

    def touches_boundary(self, label: int) -> bool:
        imin, imax, jmin, jmax = self.bbox[label]
        return bool(imin == 0 or jmin == 0 or imax == self.window.width - 2
                    or jmax == self.window.height - 2)


def dual_labels(D: DualEdgeSet) -> tuple[np.ndarray, np.ndarray]:
    """Per-face component labels and component sizes, without bounding boxes."""
    _, f1, f2 = dual_structure(D.window)
    labels, k = _kernels.uf_labels(n_faces(D.window), f1, f2, D.bits)
    return labels, np.bincount(labels, minlength=k)


def dual_clusters(D: DualEdgeSet) -> DualClusterLabeling:
    window = D.window
    nf = n_faces(window)
    labels, sizes = dual_labels(D)
    k = sizes.shape[0]
    fi = np.arange(nf) % (window.width - 1)
    fj = np.arange(nf) // (window.width - 1)
    bbox = np.empty((k, 4), dtype=np.int64)
    bbox[:, 0] = bbox[:, 2] = nf
    bbox[:, 1] = bbox[:, 3] = -1
    np.minimum.at(bbox[:, 0], labels, fi)
    np.maximum.at(bbox[:, 1], labels, fi)
    np.minimum.at(bbox[:, 2], labels, fj)
    np.maximum.at(bbox[:, 3], labels, fj)
    return DualClusterLabeling(window, labels, sizes, bbox)


def crossing_faces(window: LatticeWindow, x: Vertex, y: Vertex) -> tuple[Face, Face] | None:
    """The two faces separated by the primal edge xy, or None for a boundary edge."""
    e = edge_between(window, x, y)
    primal, f1, f2 = dual_structure(window)
    pos = np.searchsorted(primal, e)
    if pos >= primal.shape[0] or primal[pos] != e:
        return None
    fw = window.width - 1
    a, b = int(f1[pos]), int(f2[pos])
    return Face(a % fw, a // fw), Face(b % fw, b // fw)


def dual_bbox_within(bbox, center: Vertex, side: int) -> bool:
    """Face centres of ``bbox`` lie in the real box ``center + [-(side)/2, side/2]^2``.

    Face (i, j) has centre (i + 1/2, j + 1/2); compare in doubled coordinates.
    """
    imin, imax, jmin, jmax = (int(b) for b in bbox)
    cx, cy = 2 * center[0], 2 * center[1]
    return (cx - side <= 2 * imin + 1 and 2 * imax + 1 <= cx + side
            and cy - side <= 2 * jmin + 1 and 2 * jmax + 1 <= cy + side)


def walk_component(Y: EdgeSet, x: Vertex, y: Vertex) -> tuple[DualClusterLabeling, int]:
    """Dual labeling of Y* and the label of the component T* through the dual of xy."""
    faces = crossing_faces(Y.window, x, y)
    if faces is None:
        raise UnclosableWalk(f"edge {tuple(x)}-{tuple(y)} lies on the window boundary")
    lab = dual_clusters(to_dual(Y))
    return lab, lab.label(faces[0])


def boundary_walk_path(Y: EdgeSet, x: Vertex, y: Vertex) -> list[Vertex]:
    """Y-path from x to y around the dual component of the missing edge xy.

    Starts as if arriving at x from y and always takes the right-most available
    Y-edge, which traces the face of Y that contains the segment xy. Raises
    UnclosableWalk when the dual component reaches the window boundary, or when
    x lies on an island of Y enclosed by it (x and y then share no Y-path).
    """
    x, y = Vertex(*x), Vertex(*y)
    if x == y:
        return [x]
    window = Y.window
    if Y.bits[edge_between(window, x, y)]:
        return [x, y]
    lab, t = walk_component(Y, x, y)
    if lab.touches_boundary(t):
        raise UnclosableWalk("dual component touches the window boundary")
    w = window.width
    hbits, vbits = Y.horizontal, Y.vertical

    def open_step(v, d):
        if d == (1, 0):
            return v.x + 1 < w and hbits[v.y, v.x]
        if d == (-1, 0):
            return v.x > 0 and hbits[v.y, v.x - 1]
        if d == (0, 1):
            return v.y + 1 < window.height and vbits[v.y, v.x]
        return v.y > 0 and vbits[v.y - 1, v.x]

    heading = (x.x - y.x, x.y - y.y)
    v = x
    path = [x]
    seen = set()
    while v != y:
        state = (v, heading)
        if state in seen:
            raise UnclosableWalk(f"{tuple(x)} and {tuple(y)} are not joined around the dual component")
        seen.add(state)
        dx, dy = heading
        for d in ((dy, -dx), (dx, dy), (-dy, dx), (-dx, -dy)):
            if open_step(v, d):
                heading = d
                v = Vertex(v.x + d[0], v.y + d[1])
                path.append(v)
                break
        else:
            raise UnclosableWalk(f"{tuple(x)} is isolated in Y")
    return path
