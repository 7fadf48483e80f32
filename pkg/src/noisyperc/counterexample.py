"""Randomly placed thin-threaded annuli: an invariant X with p_c(X + eps noise) = 1.

Annulus W(x, n) is the box of side 2**n minus the box of side
2**n - ceil(2**(n/2)), both resolved with the ``side // 2`` rule. Activations
are kept only if no other activation of equal or smaller scale has an
overlapping annulus; every kept annulus loses its internal edges except those on
the horizontal line through its centre (the "thread").
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng
from .lattice import Edge, EdgeSet, GeometryError, LatticeWindow, Vertex, box_region, edge_at, edge_endpoints
from .montecarlo import mean_se, run_replicates
from .percolation import BernoulliParams, add_bernoulli, clusters


def ceil_sqrt_pow2(n: int) -> int:
    """ceil(2 ** (n / 2)), exactly."""
    r = math.isqrt(2 ** n)
    return r if r * r == 2 ** n else r + 1


def annulus_radii(n: int) -> tuple[int, int]:
    """``(inner_half, outer_half)``: the annulus is ``inner_half < |v - x|_inf <= outer_half``."""
    if n < 1:
        raise ValueError("annulus scale must be >= 1")
    outer = 2 ** n
    inner = outer - ceil_sqrt_pow2(n)
    return inner // 2, outer // 2


@dataclass(frozen=True)
class AnnulusRegion:
    window: LatticeWindow
    center: Vertex
    scale: int
    outer_side: int = field(init=False)
    inner_side: int = field(init=False)

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError("annulus scale must be >= 1")
        object.__setattr__(self, "center", Vertex(*self.center))
        object.__setattr__(self, "outer_side", 2 ** self.scale)
        object.__setattr__(self, "inner_side", 2 ** self.scale - ceil_sqrt_pow2(self.scale))

    @property
    def radii(self) -> tuple[int, int]:
        return self.inner_side // 2, self.outer_side // 2

    @property
    def outer(self):
        return box_region(self.window, self.center, self.outer_side)

    @property
    def inner(self):
        # side 0 (scale 1) resolves to the centre alone, same as side 1
        return box_region(self.window, self.center, max(self.inner_side, 1))

    def __contains__(self, v) -> bool:
        ri, ro = self.radii
        d = max(abs(v[0] - self.center.x), abs(v[1] - self.center.y))
        return ri < d <= ro and self.window.contains(v)

    def vertex_mask(self) -> np.ndarray:
        ri, ro = self.radii
        ys, xs = np.mgrid[0:self.window.height, 0:self.window.width]
        d = np.maximum(np.abs(xs - self.center.x), np.abs(ys - self.center.y))
        return (d > ri) & (d <= ro)

    def rects(self) -> np.ndarray:
        """The ring as four disjoint rectangles ``(x0, x1, y0, y1)``, unclipped."""
        return _ring_rects(np.array([self.center.x]), np.array([self.center.y]),
                           *self.radii)[0]

    def removed_mask(self, keep_thread: bool = True) -> np.ndarray:
        """Edge mask of W'(x, n) (or of all internal edges when ``keep_thread`` is False)."""
        inside = self.vertex_mask().ravel()
        u, v = edge_endpoints(self.window)
        mask = inside[u] & inside[v]
        if keep_thread:
            w = self.window.width
            mask &= ~((u // w == self.center.y) & (v // w == self.center.y))
        return mask


def annulus_region(window: LatticeWindow, x: Vertex, n: int) -> AnnulusRegion:
    return AnnulusRegion(window, Vertex(*x), n)


def removed_edge_set(region: AnnulusRegion, keep_thread: bool = True) -> set[Edge]:
    return {edge_at(region.window, int(i)) for i in np.flatnonzero(region.removed_mask(keep_thread))}


@dataclass(frozen=True)
class AnnulusActivation:
    center: Vertex
    scale: int
    a_flag: bool = True
    b_flag: bool = False


@dataclass(frozen=True)
class CounterexampleConfig:
    window: LatticeWindow
    n_max: int
    epsilon: float = 0.3
    seed: int = 0
    replicates: int = 1

    def __post_init__(self):
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")
        if 2 ** self.n_max > min(self.window.width, self.window.height):
            raise GeometryError(f"2**{self.n_max} exceeds the {self.window.width}x{self.window.height} window")


def sample_activations(config: CounterexampleConfig) -> list[AnnulusActivation]:
    """Independent a(x, n) = 1 with probability 4**-n, for every window site and 1 <= n <= n_max."""
    window = config.window
    out = []
    for n in range(1, config.n_max + 1):
        u = rng.uniforms(config.seed, n, rng.LANE_ACTIVATION, window.n_vertices)
        for v in np.flatnonzero(u < 4.0 ** -n):
            out.append(AnnulusActivation(window.vertex_at(int(v)), n))
    out.sort(key=lambda a: (a.scale, a.center.x, a.center.y))
    return out


def _ring_rects(cx: np.ndarray, cy: np.ndarray, ri, ro) -> np.ndarray:
    """Rectangles of shape (m, 4, 4) for rings with centres (cx, cy) and radii (ri, ro)."""
    cx, cy = np.asarray(cx), np.asarray(cy)
    ri = np.broadcast_to(ri, cx.shape)
    ro = np.broadcast_to(ro, cx.shape)
    return np.stack([
        np.stack([cx - ro, cx + ro, cy - ro, cy - ri - 1], -1),  # bottom
        np.stack([cx - ro, cx + ro, cy + ri + 1, cy + ro], -1),  # top
        np.stack([cx - ro, cx - ri - 1, cy - ri, cy + ri], -1),  # left
        np.stack([cx + ri + 1, cx + ro, cy - ri, cy + ri], -1),  # right
    ], axis=1)


def rings_intersect(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise: does ring ``a[k]`` meet ring ``b[k]``? Both of shape (m, 4, 4)."""
    A = a[:, :, None, :]
    B = b[:, None, :, :]
    ox = np.maximum(A[..., 0], B[..., 0]) <= np.minimum(A[..., 1], B[..., 1])
    oy = np.maximum(A[..., 2], B[..., 2]) <= np.minimum(A[..., 3], B[..., 3])
    return (ox & oy).any(axis=(1, 2))


def resolve_b_flags(activations: list[AnnulusActivation]) -> list[AnnulusActivation]:
    """b(x, n) = 1 iff no other activation (y, k) with k <= n has W(y, k) meeting W(x, n)."""
    if not activations:
        return []
    cx = np.array([a.center.x for a in activations])
    cy = np.array([a.center.y for a in activations])
    k = np.array([a.scale for a in activations])
    radii = np.array([annulus_radii(s) for s in k])
    rects = _ring_rects(cx, cy, radii[:, 0], radii[:, 1])
    ro = radii[:, 1]
    out = []
    for i, act in enumerate(activations):
        reach = ro + ro[i]
        near = (k <= act.scale) & (np.abs(cx - cx[i]) <= reach) & (np.abs(cy - cy[i]) <= reach)
        near[i] = False
        rivals = np.flatnonzero(near)
        hit = rings_intersect(np.repeat(rects[i:i + 1], rivals.shape[0], axis=0), rects[rivals])
        out.append(replace(act, b_flag=not bool(hit.any())))
    return out


def build_X(config: CounterexampleConfig, activations: list[AnnulusActivation] | None = None) -> EdgeSet:
    """Full configuration minus W'(x, n) for every activation with a = b = 1."""
    if activations is None:
        activations = resolve_b_flags(sample_activations(config))
    X = EdgeSet.full(config.window)
    for act in activations:
        if act.a_flag and act.b_flag:
            X.bits &= ~annulus_region(config.window, act.center, act.scale).removed_mask()
    return X


@dataclass(frozen=True)
class BridgeEstimate:
    scale: int
    epsilon: float
    replicates: int
    estimate: float  # thread removed
    stderr: float
    estimate_thread: float  # thread intact
    stderr_thread: float


def bridge_window(n: int) -> tuple[LatticeWindow, Vertex]:
    """Smallest window holding W(x, n) with one ring of outside vertices, and its centre."""
    _, ro = annulus_radii(n)
    return LatticeWindow(2 * ro + 3, 2 * ro + 3), Vertex(ro + 1, ro + 1)


def bridging_probability(n: int, epsilon: float, replicates: int, seed: int = 0,
                         window: LatticeWindow | None = None, threads: int = 1) -> BridgeEstimate:
    """P(inner box joined to the outside of a single carved annulus) after eps-addition.

    With the thread removed every internal annulus edge is deleted from the
    full configuration; the thread-intact variant uses W'. Both variants share
    the same per-replicate randomness.
    """
    if n < 1:
        raise ValueError("annulus scale must be >= 1")
    default, center = bridge_window(n)
    if window is None:
        window = default
    else:
        _, ro = annulus_radii(n)
        if min(window.width, window.height) < 2 * ro + 3:
            raise GeometryError(f"window {window.width}x{window.height} too small for scale {n}")
        center = Vertex(window.width // 2, window.height // 2)
    region = annulus_region(window, center, n)
    full = EdgeSet.full(window)
    X_cut = EdgeSet(window, full.bits & ~region.removed_mask(keep_thread=False))
    X_thread = EdgeSet(window, full.bits & ~region.removed_mask(keep_thread=True))
    ci = window.vertex_index(center)
    _, ro = region.radii
    far = window.vertex_index(Vertex(center.x + ro + 1, center.y))

    def one(r):
        params = BernoulliParams(epsilon=epsilon, seed=seed, stream_id=r)
        row = []
        for X in (X_cut, X_thread):
            lab = clusters(add_bernoulli(X, params))
            row.append(lab.labels[ci] == lab.labels[far])
        return row

    samples = run_replicates(one, replicates, threads)
    mean, se = mean_se(samples)
    return BridgeEstimate(n, epsilon, replicates, float(mean[0]), float(se[0]),
                          float(mean[1]), float(se[1]))
