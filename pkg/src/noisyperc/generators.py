"""Everywhere-percolating configurations X and the predicates that define them."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import _kernels, rng
from .lattice import EAST, NORTH, Edge, EdgeSet, LatticeWindow, Vertex, edge_index
from .percolation import clusters

KINDS = ("foliation_horizontal", "foliation_vertical", "spanning_tree", "comb")
ALIASES = {
    "foliation-h": "foliation_horizontal",
    "foliation-v": "foliation_vertical",
    "spanning-tree": "spanning_tree",
}


def canonical_kind(kind: str) -> str:
    kind = ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise ValueError(f"unknown generator kind {kind!r}")
    return kind


def cli_name(kind: str) -> str:
    inverse = {v: k for k, v in ALIASES.items()}
    return inverse.get(kind, kind)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str = "foliation_horizontal"
    spacing: int = 1  # comb only: columns between teeth
    seed: int = 0  # spanning_tree only

    def __post_init__(self):
        object.__setattr__(self, "kind", canonical_kind(self.kind))
        if self.spacing < 1:
            raise ValueError("spacing must be >= 1")


def _comb(window: LatticeWindow, spacing: int) -> EdgeSet:
    """Bottom row, vertical teeth every ``spacing`` columns, bristles to the right of each tooth.

    With spacing 1 this is the bottom row plus all vertical edges.
    """
    X = EdgeSet.empty(window)
    X.horizontal[0, :] = True
    teeth = np.arange(window.width) % spacing == 0
    X.vertical[:, teeth] = True
    # horizontal edge (x, y)-(x+1, y) joins x+1 to its tooth when x+1 is not a tooth
    X.horizontal[1:, ~teeth[1:]] = True
    return X


def spanning_tree(window: LatticeWindow, seed: int) -> EdgeSet:
    nxt = _kernels.wilson_tree(window.width, window.height,
                               np.uint64(rng.stream_key(seed, 0, rng.LANE_TREE)))
    v = np.arange(window.n_vertices)[1:]
    p = nxt[1:]
    lo, hi = np.minimum(v, p), np.maximum(v, p)
    w = window.width
    horiz = hi - lo == 1
    idx = np.where(horiz, (lo // w) * (w - 1) + lo % w, window.n_horizontal + lo)
    X = EdgeSet.empty(window)
    X.bits[idx] = True
    return X


def generate(spec: GeneratorSpec, window: LatticeWindow) -> EdgeSet:
    if spec.kind == "foliation_horizontal":
        X = EdgeSet.empty(window)
        X.horizontal[:] = True
        return X
    if spec.kind == "foliation_vertical":
        X = EdgeSet.empty(window)
        X.vertical[:] = True
        return X
    if spec.kind == "comb":
        return _comb(window, spec.spacing)
    return spanning_tree(window, spec.seed)


def percolating_vertices(X: EdgeSet) -> np.ndarray:
    """Vertex mask (height, width) of clusters touching the window boundary."""
    lab = clusters(X)
    return lab.touches_boundary[lab.labels].reshape(X.window.height, X.window.width)


def is_everywhere_percolating(X: EdgeSet) -> bool:
    return bool(percolating_vertices(X).all())


def is_densely_percolating(X: EdgeSet, R: int) -> bool:
    """Every L1 ball of radius R (clipped to the window) meets a boundary-touching cluster."""
    if R < 1:
        raise ValueError("R must be >= 1")
    good = percolating_vertices(X)
    if not good.any():
        return False
    # taxicab distance to the nearest percolating vertex; inside a rectangle the
    # grid path distance equals the L1 distance
    dist = ndimage.distance_transform_cdt(~good, metric="taxicab")
    return bool(dist.max() <= R)


def write_edge_list(X: EdgeSet, path) -> None:
    lines = [f"# {X.window.width}x{X.window.height} window, {X.count()} edges"]
    lines += [f"{e.origin.x} {e.origin.y} {e.direction}" for e in X.edges()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path, window: LatticeWindow) -> EdgeSet:
    """Parse ``x y {E|N}`` lines; ``#`` starts a comment."""
    X = EdgeSet.empty(window)
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[2].upper() not in (EAST, NORTH):
            raise ValueError(f"{path}:{lineno}: expected 'x y E|N', got {raw!r}")
        e = Edge(Vertex(int(parts[0]), int(parts[1])), parts[2].upper())
        X.bits[edge_index(window, e)] = True
    return X
