import numpy as np
import pytest
from hypothesis import given, strategies as st

from noisyperc.duality import has_dual_cycle, to_dual
from noisyperc.generators import (KINDS, GeneratorSpec, canonical_kind, generate, is_densely_percolating,
                                  is_everywhere_percolating, read_edge_list, write_edge_list)
from noisyperc.lattice import EdgeSet, GeometryError, LatticeWindow
from noisyperc.percolation import clusters
from oracles import adjacency, bfs_components


def test_aliases():
    assert canonical_kind("foliation-h") == "foliation_horizontal"
    assert canonical_kind("spanning-tree") == "spanning_tree"
    with pytest.raises(ValueError):
        GeneratorSpec("spiral")
    with pytest.raises(ValueError):
        GeneratorSpec("comb", spacing=0)


def test_row_foliation():
    X = generate(GeneratorSpec("foliation_horizontal"), LatticeWindow(4, 4))
    assert X.horizontal.all() and not X.vertical.any()
    assert X.count() == 12


@given(st.integers(2, 24), st.integers(2, 24), st.integers(0, 10 ** 6))
def test_spanning_tree_is_a_tree(w, h, seed):
    window = LatticeWindow(w, h)
    X = generate(GeneratorSpec("spanning_tree", seed=seed), window)
    assert X.count() == w * h - 1
    comp = bfs_components(adjacency(X))
    assert len(set(comp.values())) == 1


def test_spanning_tree_depends_on_seed():
    window = LatticeWindow(16, 16)
    a = generate(GeneratorSpec("spanning_tree", seed=1), window)
    assert a == generate(GeneratorSpec("spanning_tree", seed=1), window)
    assert a != generate(GeneratorSpec("spanning_tree", seed=2), window)


def test_comb_spacing_one():
    window = LatticeWindow(4, 4)
    X = generate(GeneratorSpec("comb", spacing=1), window)
    assert X.horizontal[0].all() and X.vertical.all()
    assert not X.horizontal[1:].any()
    comp = bfs_components(adjacency(X))
    assert all(comp[(x, y)] == comp[(0, 0)] for x in range(4) for y in range(4))


@given(st.sampled_from(KINDS), st.integers(3, 20), st.integers(3, 20), st.integers(1, 5),
       st.integers(0, 1000))
def test_generators_percolate_everywhere_with_dual_forest(kind, w, h, spacing, seed):
    X = generate(GeneratorSpec(kind, spacing, seed), LatticeWindow(w, h))
    assert is_everywhere_percolating(X)
    assert not has_dual_cycle(to_dual(X))


def test_everywhere_percolating_examples():
    assert is_everywhere_percolating(EdgeSet.full(LatticeWindow(5, 5)))
    assert not is_everywhere_percolating(EdgeSet.empty(LatticeWindow(3, 3)))


def test_densely_percolating_examples():
    window = LatticeWindow(6, 6)
    X = EdgeSet.empty(window)
    X.horizontal[::2] = True
    assert is_densely_percolating(X, 1)
    assert not is_densely_percolating(EdgeSet.empty(LatticeWindow(5, 5)), 1)
    full = EdgeSet.full(LatticeWindow(7, 7))
    assert all(is_densely_percolating(full, R) for R in (1, 2, 5))


def test_densely_percolating_against_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(30):
        window = LatticeWindow(9, 9)
        X = EdgeSet(window, rng.random(window.n_edges) < 0.35)
        lab = clusters(X)
        good = lab.touches_boundary[lab.labels].reshape(9, 9)
        for R in (1, 2, 3):
            brute = all(any(good[y, x] for y in range(9) for x in range(9)
                            if abs(x - cx) + abs(y - cy) <= R)
                        for cy in range(9) for cx in range(9))
            assert is_densely_percolating(X, R) == brute


def test_edge_list_round_trip(tmp_path):
    window = LatticeWindow(8, 5)
    X = generate(GeneratorSpec("spanning_tree", seed=4), window)
    path = tmp_path / "x.txt"
    write_edge_list(X, path)
    assert read_edge_list(path, window) == X


def test_edge_list_errors(tmp_path):
    window = LatticeWindow(4, 4)
    p = tmp_path / "bad.txt"
    p.write_text("# comment\n0 0 E\n1 1 Q\n")
    with pytest.raises(ValueError):
        read_edge_list(p, window)
    p.write_text("3 0 E\n")
    with pytest.raises(GeometryError):
        read_edge_list(p, window)
    p.write_text("0 0 E  # trailing comment\n\n1 2 n\n")
    X = read_edge_list(p, window)
    assert X.count() == 2
