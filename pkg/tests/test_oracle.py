import itertools
import random

import pytest

from hamorient.digraph import CyclePattern, Digraph, Embedding, complete_digraph, validate_embedding
from hamorient.generators import complete_bipartite_digraph, directed_cycle, f_family
from hamorient.oracle import (OracleLimitExceeded, SearchStats, enumerate_patterns, oracle_embed, patterns_of_class,
                              threshold_scan)

from conftest import brute_force_embed, random_digraph, random_pattern


def test_directed_cycle_found():
    G = directed_cycle(7)
    E = oracle_embed(G, CyclePattern("F" * 7))
    assert E == Embedding((0, 1, 2, 3, 4, 5, 6))


def test_f1_antidirected_absent():
    assert oracle_embed(f_family(1, 3), CyclePattern("FBFBFB")) is None


def test_odd_complete_bipartite_has_no_hamilton_cycle():
    G = complete_bipartite_digraph(7)
    for s in ("F" * 7, "FFBFFBB"):
        assert oracle_embed(G, CyclePattern(s)) is None


def test_limit_exceeded():
    with pytest.raises(OracleLimitExceeded):
        oracle_embed(complete_digraph(15), CyclePattern("F" * 15))
    assert oracle_embed(complete_digraph(15), CyclePattern("F" * 15), limit=15) is not None


def test_length_mismatch():
    with pytest.raises(ValueError):
        oracle_embed(complete_digraph(5), CyclePattern("FFFF"))


def test_agrees_with_permutation_search(rng):
    for _ in range(60):
        n = rng.randint(3, 6)
        G = random_digraph(n, rng.choice((0.3, 0.5, 0.7)), rng)
        C = random_pattern(n, rng)
        E = oracle_embed(G, C)
        assert (E is None) == (brute_force_embed(G, C) is None)
        if E is not None:
            assert validate_embedding(G, C, E)


def test_relabelling_and_reversal_invariance(rng):
    for _ in range(30):
        n = rng.randint(5, 8)
        G = random_digraph(n, 0.55, rng)
        C = random_pattern(n, rng)
        found = oracle_embed(G, C) is not None
        perm = list(range(n))
        rng.shuffle(perm)
        assert (oracle_embed(G.relabel(perm), C) is not None) == found
        assert (oracle_embed(G.reverse(), C.reversed()) is not None) == found


def test_stats_recorded():
    st = SearchStats()
    oracle_embed(complete_digraph(6), CyclePattern("FFBFFB"), stats=st)
    assert st.nodes > 0


# ------------------------------------------------------------- patterns

def burnside_orbits(n: int) -> int:
    seqs = list(itertools.product((False, True), repeat=n))
    seen, orbits = set(), 0
    for s in seqs:
        if s in seen:
            continue
        orbits += 1
        frontier = [s]
        while frontier:
            x = frontier.pop()
            if x in seen:
                continue
            seen.add(x)
            frontier.append(x[1:] + x[:1])
            frontier.append(tuple(not x[(-j - 1) % n] for j in range(n)))
    return orbits


def test_enumerate_raw():
    pats = list(enumerate_patterns(3))
    assert len(pats) == 8 and len(set(pats)) == 8


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_enumerate_up_to_symmetry(n):
    assert len(list(enumerate_patterns(n, up_to_symmetry=True))) == burnside_orbits(n)


def test_antidirected_representative_iff_even():
    for n in range(3, 11):
        assert bool(patterns_of_class(n, "antidirected")) == (n % 2 == 0)


def test_small_n_rejected():
    with pytest.raises(ValueError):
        list(enumerate_patterns(2))


# ---------------------------------------------------------------- scans

def test_scan_two_cliques_nothing_embeds():
    rep = threshold_scan("two_cliques", [{"n": 6}, {"n": 8}], "all")
    assert rep.rows and all(r.exists == "absent" for r in rep.rows)


def test_scan_f1_antidirected_absent():
    rep = threshold_scan("f1", [{"m": m} for m in (2, 3, 4)], "antidirected")
    assert len(rep.rows) == 3 and all(r.exists == "absent" for r in rep.rows)


def test_scan_random_reports_rate():
    params = [{"n": n, "seed": s} for n in (6, 7, 8) for s in range(10)]
    rep = threshold_scan("random", params, "non_antidirected")
    exists = sum(r.exists == "exists" for r in rep.rows)
    assert exists + len(rep.absences()) == len(rep.rows) > 0


def test_scan_csv_without_timings_is_deterministic():
    a = threshold_scan("f2", [{"m": 3}], "all").to_csv(timings=False)
    b = threshold_scan("f2", [{"m": 3}], "all").to_csv(timings=False)
    assert a == b and a.startswith("family,params,pattern_class,pattern,exists,nodes_expanded,millis\n")


def test_scan_skips_oversized():
    rep = threshold_scan("complete", [{"n": 20}], "consistent")
    assert not rep.rows and rep.skipped
