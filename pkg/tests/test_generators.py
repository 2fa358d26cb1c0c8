import math

import pytest

from hamorient.digraph import CyclePattern, Digraph, complete_digraph, min_semidegree
from hamorient.generators import (FAMILIES, build_family, canonical_arcs, complete_bipartite_digraph, f_family,
                                  f_family_classes, random_min_semidegree, search_antidirected_obstructions,
                                  synthetic_AB, synthetic_ABST, synthetic_ST, two_cliques, two_cliques_matching)
from hamorient.oracle import oracle_embed
from hamorient.structure import CLASSIFY, COVER, DESK, certify_partition, classify


def connected(G: Digraph) -> bool:
    seen, stack = {0}, [0]
    while stack:
        u = stack.pop()
        for v in range(G.n):
            if v not in seen and (G.has_arc(u, v) or G.has_arc(v, u)):
                seen.add(v)
                stack.append(v)
    return len(seen) == G.n


def test_two_cliques():
    G = two_cliques(6)
    assert min_semidegree(G) == 2 and not connected(G)
    assert oracle_embed(two_cliques(8), CyclePattern("F" * 8)) is None
    with pytest.raises(ValueError):
        two_cliques(7)


def test_two_cliques_classifies_as_st():
    assert classify(two_cliques(60), DESK).tag == "STExtremal"


def test_complete_bipartite():
    G = complete_bipartite_digraph(7)
    assert min_semidegree(G) == 3
    assert oracle_embed(G, CyclePattern("FFBFFBF")) is None
    G8 = complete_bipartite_digraph(8)
    for s in ("F" * 8, "FFBBFFBB", "FFFBFFFB"):
        assert oracle_embed(G8, CyclePattern(s)) is not None
    assert classify(complete_bipartite_digraph(60), DESK).tag == "ABExtremal"


@pytest.mark.parametrize("variant", [1, 2])
@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_f_family_caption_constraints(variant, m):
    G = f_family(variant, m)
    A, B = f_family_classes(m)
    assert G.n == 2 * m and min_semidegree(G) == m
    assert len(A) == len(B) == m - 1
    assert not any(G.has_arc(u, v) for X in (A, B) for u in X for v in X)
    assert oracle_embed(G, CyclePattern("FB" * m)) is None
    assert oracle_embed(G, CyclePattern("F" * 2 * m)) is not None


def test_f_family_missing_resource():
    with pytest.raises(FileNotFoundError):
        f_family(1, 40)


def test_census_m2():
    found = list(search_antidirected_obstructions(2))
    assert found
    for G in found:
        assert min_semidegree(G) >= 2
        assert oracle_embed(G, CyclePattern("FBFB")) is None


def test_census_m3_contains_resources():
    found = {canonical_arcs(G) for G in search_antidirected_obstructions(3)}
    for variant in (1, 2):
        assert canonical_arcs(f_family(variant, 3)) in found


def test_random_min_semidegree():
    assert random_min_semidegree(7, 6, seed=3) == complete_digraph(7)
    for seed in range(100):
        G = random_min_semidegree(8, 4, seed=seed)
        assert min_semidegree(G) >= 4 and G.arc_count() >= 8 * 4
    assert random_min_semidegree(9, 5, seed=11) == random_min_semidegree(9, 5, seed=11)


def test_synthetic_instances_certify():
    G, P = synthetic_AB(400, DESK, seed=1)
    assert certify_partition(G, P, "ABExtremal", DESK).passed
    G, P = synthetic_ABST(600, DESK, seed=1)
    assert certify_partition(G, P, "ABSTExtremal", DESK).passed
    assert min(P.a, P.b, P.s, P.t) >= DESK.tau * 600
    G, P = synthetic_ST(300, DESK, seed=1)
    cert = certify_partition(G, P, "STExtremal", DESK)
    assert cert.passed and P.a + P.b <= DESK.eps3 * 300
    assert 2 * min_semidegree(G) >= G.n


@pytest.mark.parametrize("profile", [DESK, CLASSIFY, COVER])
def test_synthetic_deterministic(profile):
    assert synthetic_AB(300, profile, seed=4) == synthetic_AB(300, profile, seed=4)


def test_two_cliques_matching():
    G, P = two_cliques_matching(40)
    assert min_semidegree(G) == 20
    assert certify_partition(G, P, "STExtremal", DESK).passed


def test_build_family_by_name():
    for name in FAMILIES:
        params = {"m": 3} if name in ("f1", "f2") else {"n": 300 if name.startswith("synthetic") else 8}
        G = build_family(name, **params)
        assert G.n == params.get("n", 6)
    with pytest.raises(ValueError):
        build_family("nope", n=4)
