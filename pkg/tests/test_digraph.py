import random

import pytest

from hamorient.digraph import (CyclePattern, Digraph, Embedding, OrientedPath, PartialEmbedding, complete_digraph,
                               cycle_distance, min_semidegree, sink_count, validate_embedding, validate_partial)
from hamorient.generators import directed_cycle, f_family

from conftest import random_digraph, random_pattern


def triangle():
    return Digraph.from_arcs(3, [(0, 1), (1, 2), (2, 0)])


# ------------------------------------------------------------ Digraph

def test_in_adj_is_transpose(rng):
    G = random_digraph(9, 0.4, rng)
    for u in range(9):
        for v in range(9):
            assert (G.out_adj[u] >> v & 1) == (G.in_adj[v] >> u & 1)


def test_self_loops_rejected():
    with pytest.raises(ValueError):
        Digraph.from_arcs(3, [(1, 1)])


def test_digons_are_two_arcs():
    G = Digraph.from_arcs(2, [(0, 1), (1, 0)])
    assert G.arc_count() == 2


@pytest.mark.parametrize("G, expected", [
    (complete_digraph(6), 5),
    (f_family(1, 3), 3),
    (directed_cycle(3), 1),
])
def test_min_semidegree(G, expected):
    assert min_semidegree(G) == expected


def test_text_format_is_bit_exact():
    G = Digraph.from_arcs(3, [(2, 0), (0, 1), (1, 2), (0, 2)])
    assert G.to_text() == "digraph v1\nn 3\ne 0 1\ne 0 2\ne 1 2\ne 2 0\n"
    assert Digraph.from_text(G.to_text()) == G


def test_text_format_rejects_garbage():
    with pytest.raises(ValueError):
        Digraph.from_text("graph\nn 3\n")


# ------------------------------------------------------------ patterns

@pytest.mark.parametrize("s, expected", [("F" * 8, 0), ("FBFBFB", 3), ("FFBFBB", 2)])
def test_sink_count(s, expected):
    C = CyclePattern(s)
    # independent count: positions with cycle in-degree two
    by_degree = sum(1 for p in range(C.n) if C.dirs[p - 1] and not C.dirs[p])
    assert by_degree == expected
    assert sink_count(C) == expected == len(C.sources())


def test_pattern_predicates(rng):
    for n in range(3, 11):
        for _ in range(20):
            C = random_pattern(n, rng)
            assert len(C.sinks()) == len(C.sources())
            if C.is_antidirected():
                assert n % 2 == 0 and sink_count(C) == n // 2
            if C.is_consistent():
                assert sink_count(C) == 0


def test_pattern_string_roundtrip():
    assert str(CyclePattern("FFBF")) == "FFBF"


@pytest.mark.parametrize("n, i, j, expected", [(10, 0, 9, 9), (10, 9, 0, 1), (10, 4, 4, 0)])
def test_cycle_distance(n, i, j, expected):
    assert cycle_distance(CyclePattern("F" * n), i, j) == expected


def test_cycle_distance_out_of_range():
    with pytest.raises(ValueError):
        cycle_distance(CyclePattern("FFF"), 0, 3)


# ------------------------------------------------------------ validation

def test_validate_embedding_examples():
    assert validate_embedding(triangle(), CyclePattern("FFF"), Embedding((0, 1, 2)))
    assert not validate_embedding(triangle(), CyclePattern("BBB"), Embedding((0, 1, 2)))
    K5 = complete_digraph(5)
    rng = random.Random(3)
    for _ in range(10):
        perm = list(range(5))
        rng.shuffle(perm)
        assert validate_embedding(K5, random_pattern(5, rng), Embedding(tuple(perm)))


def test_validate_embedding_rejects_bad_images():
    K4 = complete_digraph(4)
    assert not validate_embedding(K4, CyclePattern("FFFF"), Embedding((0, 1, 1, 2)))
    with pytest.raises(ValueError):
        validate_embedding(K4, CyclePattern("FFF"), Embedding((0, 1, 2)))


def test_validate_partial_examples():
    G = triangle()
    C = CyclePattern("FFF")
    assert validate_partial(G, C, PartialEmbedding(1, (2,)))
    assert validate_partial(G, C, PartialEmbedding(0, (0, 1)))
    assert not validate_partial(G, C, PartialEmbedding(0, (0, 0)))
    with pytest.raises(ValueError):
        validate_partial(G, C, PartialEmbedding(0, (0, 1, 2, 0)))


def test_rotation_and_transpose_invariance(rng):
    for _ in range(40):
        n = rng.randint(4, 8)
        G = random_digraph(n, 0.7, rng)
        C = random_pattern(n, rng)
        perm = list(range(n))
        rng.shuffle(perm)
        E = Embedding(tuple(perm))
        v = validate_embedding(G, C, E)
        k = rng.randrange(n)
        assert validate_embedding(G, C.rotated(k), Embedding(E.images[k:] + E.images[:k])) == v
        assert validate_embedding(G.reverse(), C.reversed(), E) == v


def test_oriented_path_validity():
    G = triangle()
    assert OrientedPath((0, 1, 2), (True, True)).is_valid(G)
    assert not OrientedPath((0, 1, 2), (False, True)).is_valid(G)
    with pytest.raises(ValueError):
        OrientedPath((0, 1), ())
