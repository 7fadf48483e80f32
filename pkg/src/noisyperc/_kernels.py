"""Compiled inner loops. Everything here works on flat integer/boolean arrays."""
import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(nogil=True, cache=True)
def hashed_uniforms(key, n):
    """Uniforms in [0, 1): the i-th value depends only on (key, i)."""
    out = np.empty(n, dtype=np.float64)
    k = np.uint64(key)
    for i in range(n):
        z = _mix(k + np.uint64(i + 1) * _GOLDEN)
        out[i] = np.float64(z >> _S11) * _INV53
    return out


@njit(cache=True, inline="always")
def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


@njit(nogil=True, cache=True)
def uf_labels(n, us, vs, present):
    """Union-find (path halving, union by size). Labels numbered by first vertex seen."""
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    for e in range(us.shape[0]):
        if present[e]:
            a = _find(parent, us[e])
            b = _find(parent, vs[e])
            if a != b:
                if size[a] < size[b]:
                    a, b = b, a
                parent[b] = a
                size[a] += size[b]
    labels = np.empty(n, dtype=np.int64)
    root_label = np.full(n, -1, dtype=np.int64)
    k = 0
    for v in range(n):
        r = _find(parent, v)
        if root_label[r] < 0:
            root_label[r] = k
            k += 1
        labels[v] = root_label[r]
    return labels, k


@njit(nogil=True, cache=True)
def uf_has_cycle(n, us, vs, present):
    parent = np.arange(n)
    for e in range(us.shape[0]):
        if present[e]:
            a = _find(parent, us[e])
            b = _find(parent, vs[e])
            if a == b:
                return True
            parent[b] = a
    return False


@njit(nogil=True, cache=True)
def connected_in_rects(w, h, bits, rects, src, dst):
    """BFS from ``src`` to ``dst`` using only vertices inside the union of ``rects``.

    ``rects`` has rows ``(x0, x1, y0, y1)``, inclusive and already clipped.
    """
    if src == dst:
        return True
    nh = (w - 1) * h
    bx0 = rects[:, 0].min()
    bx1 = rects[:, 1].max()
    by0 = rects[:, 2].min()
    by1 = rects[:, 3].max()
    bw = bx1 - bx0 + 1
    visited = np.zeros(bw * (by1 - by0 + 1), dtype=np.bool_)
    queue = np.empty(visited.shape[0], dtype=np.int64)
    head = 0
    tail = 0
    queue[tail] = src
    tail += 1
    visited[(src // w - by0) * bw + src % w - bx0] = True
    while head < tail:
        v = queue[head]
        head += 1
        x = v % w
        y = v // w
        for d in range(4):
            if d == 0:
                if x + 1 >= w or not bits[y * (w - 1) + x]:
                    continue
                nx, ny = x + 1, y
            elif d == 1:
                if x == 0 or not bits[y * (w - 1) + x - 1]:
                    continue
                nx, ny = x - 1, y
            elif d == 2:
                if y + 1 >= h or not bits[nh + y * w + x]:
                    continue
                nx, ny = x, y + 1
            else:
                if y == 0 or not bits[nh + (y - 1) * w + x]:
                    continue
                nx, ny = x, y - 1
            inside = False
            for r in range(rects.shape[0]):
                if rects[r, 0] <= nx <= rects[r, 1] and rects[r, 2] <= ny <= rects[r, 3]:
                    inside = True
                    break
            if not inside:
                continue
            slot = (ny - by0) * bw + nx - bx0
            if visited[slot]:
                continue
            u = ny * w + nx
            if u == dst:
                return True
            visited[slot] = True
            queue[tail] = u
            tail += 1
    return False


@njit(nogil=True, cache=True)
def wilson_tree(w, h, key):
    """Uniform spanning tree of the w x h grid by loop-erased random walks.

    Returns ``nxt`` with ``nxt[v]`` the parent of ``v`` (root 0 has -1).
    """
    n = w * h
    in_tree = np.zeros(n, dtype=np.bool_)
    nxt = np.full(n, -1, dtype=np.int64)
    in_tree[0] = True
    state = np.uint64(key)
    nbrs = np.empty(4, dtype=np.int64)
    for start in range(n):
        u = start
        while not in_tree[u]:
            x = u % w
            y = u // w
            deg = 0
            if x + 1 < w:
                nbrs[deg] = u + 1
                deg += 1
            if x > 0:
                nbrs[deg] = u - 1
                deg += 1
            if y + 1 < h:
                nbrs[deg] = u + w
                deg += 1
            if y > 0:
                nbrs[deg] = u - w
                deg += 1
            state = state + _GOLDEN
            z = _mix(state)
            nb = nbrs[np.int64(z % np.uint64(deg))]
            nxt[u] = nb
            u = nb
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = nxt[u]
    return nxt
