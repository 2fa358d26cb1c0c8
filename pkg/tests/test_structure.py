import random
import warnings

import pytest

from hamorient.digraph import Digraph, bits, complete_digraph, mask_of
from hamorient.generators import (complete_bipartite_digraph, directed_cycle, synthetic_AB, synthetic_ABST,
                                  synthetic_ST, two_cliques)
from hamorient.structure import (CLASSIFY, DESK, ConstantsProfile, VertexPartition, certify_partition, classify,
                                 cross_density, find_violating_set, robust_outneighbourhood)

from conftest import random_digraph

SMALL = ConstantsProfile(nu=0.05, tau=0.3, name="small")


def in_count_oracle(G, S, nu):
    """Direct count with the ceil convention, independent of the library."""
    import math
    thr = math.ceil(nu * G.n)
    return {x for x in range(G.n) if sum(1 for s in bits(S) if G.has_arc(s, x)) >= thr}


# ------------------------------------------------- robust outneighbourhood

def test_robust_outneighbourhood_complete():
    G = complete_digraph(10)
    S = mask_of([0, 1, 2])
    assert in_count_oracle(G, S, 0.2) == set(range(10))
    assert robust_outneighbourhood(G, S, 0.2) == G.full


def test_robust_outneighbourhood_empty_set():
    assert robust_outneighbourhood(complete_digraph(7), 0, 0.3) == 0


def test_robust_outneighbourhood_directed_cycle():
    G = directed_cycle(6)
    S = mask_of([0, 1, 2])
    assert in_count_oracle(G, S, 0.15) == {1, 2, 3}
    assert set(bits(robust_outneighbourhood(G, S, 0.15))) == {1, 2, 3}


def test_robust_outneighbourhood_monotone(rng):
    for _ in range(30):
        G = random_digraph(12, 0.5, rng)
        S = rng.getrandbits(12)
        S2 = S | rng.getrandbits(12)
        R, R2 = robust_outneighbourhood(G, S, 0.1), robust_outneighbourhood(G, S2, 0.1)
        assert R & ~R2 == 0


# ------------------------------------------------------- violating sets

def test_violating_set_two_cliques():
    G = two_cliques(10)
    res = find_violating_set(G, SMALL)
    assert res.exact
    assert set(bits(res.X)) in ({0, 1, 2, 3, 4}, {5, 6, 7, 8, 9})
    assert robust_outneighbourhood(G, res.X, 0.05).bit_count() == 5


def test_violating_set_none_in_complete_digraph():
    res = find_violating_set(complete_digraph(12), DESK)
    assert res.exact and res.X is None


def test_violating_set_complete_bipartite():
    G = complete_bipartite_digraph(10)
    res = find_violating_set(G, SMALL)
    X = res.X
    # one class: no arcs inside X, and RN+(X) is the other class
    assert G.count_arcs(X, X) == 0 and X.bit_count() == 5
    assert robust_outneighbourhood(G, X, 0.05) == G.full & ~X


def test_exact_search_agrees_with_enumeration(rng):
    import math
    for _ in range(5):
        G = random_digraph(10, 0.45, rng)
        res = find_violating_set(G, SMALL)
        lo, hi, thr = 0.3 * 10, 0.7 * 10, math.ceil(0.05 * 10)
        exists = False
        for X in range(1 << 10):
            k = X.bit_count()
            if lo < k < hi:
                rn = sum(1 for x in range(10) if (G.in_adj[x] & X).bit_count() >= thr)
                if rn < k + 0.5:
                    exists = True
                    break
        assert (res.X is not None) == exists


# --------------------------------------------------------- classification

def test_classify_two_cliques():
    G = two_cliques(60)
    c = classify(G, DESK)
    assert c.tag == "STExtremal" and c.partition.a == c.partition.b == 0
    assert c.certificate.passed


def test_classify_complete_bipartite():
    c = classify(complete_bipartite_digraph(60), DESK)
    assert c.tag == "ABExtremal" and c.partition.s == c.partition.t == 0
    assert c.certificate.passed


def test_classify_random_dense_is_expander_candidate():
    rng = random.Random(1)
    G = random_digraph(40, 0.6, rng)
    assert classify(G, DESK).tag == "ExpanderCandidate"
    small = random_digraph(14, 0.6, random.Random(2))
    res = find_violating_set(small, DESK)
    assert res.exact and res.X is None


@pytest.mark.parametrize("gen, tag", [(synthetic_ST, "STExtremal"), (synthetic_AB, "ABExtremal"),
                                      (synthetic_ABST, "ABSTExtremal")])
def test_classify_synthetic(gen, tag):
    G, _ = gen(300, CLASSIFY, seed=1)
    c = classify(G, CLASSIFY, seed=1)
    assert c.tag == tag and c.certificate.passed
    P = c.partition
    assert P.a <= P.b and P.s <= P.t
    H = G.reverse() if c.reversed else G
    assert cross_density(H, P) < CLASSIFY.eps * G.n ** 2


def test_classify_relabelling_invariance():
    G, _ = synthetic_AB(300, DESK, seed=2)
    c = classify(G, DESK)
    perm = list(range(G.n))
    random.Random(5).shuffle(perm)
    c2 = classify(G.relabel(perm), DESK)
    assert c2.tag == c.tag
    P, Q = c.partition.permuted(perm), c2.partition
    assert {P.A, P.B} == {Q.A, Q.B} and {P.S, P.T} == {Q.S, Q.T}


def test_classify_warns_on_low_semidegree():
    c = classify(two_cliques(20), DESK)
    assert any("semidegree" in w for w in c.warnings)


# --------------------------------------------------------- certification

def test_certify_synthetic_st():
    G, P = synthetic_ST(300, DESK, seed=1)
    cert = certify_partition(G, P, "STExtremal", DESK)
    assert cert.passed, cert.failed()
    assert {c.clause for c in cert.clauses} >= {f"P{i}" for i in range(1, 8)}


def test_certify_two_cliques_partition():
    G = two_cliques(40)
    P = VertexPartition.from_sets(40, S=range(20), T=range(20, 40))
    assert certify_partition(G, P, "STExtremal", DESK).passed


def test_certify_complete_bipartite_as_st_fails_p3():
    G = complete_bipartite_digraph(40)
    P = VertexPartition.from_sets(40, S=range(20), T=range(20, 40))
    assert "P3" in certify_partition(G, P, "STExtremal", DESK).failed()


def test_certify_unknown_tag():
    G = two_cliques(8)
    P = VertexPartition.from_sets(8, S=range(4), T=range(4, 8))
    with pytest.raises(ValueError):
        certify_partition(G, P, "Bogus", DESK)


def test_certificate_json_shape():
    G, P = synthetic_AB(300, DESK, seed=0)
    js = certify_partition(G, P, "ABExtremal", DESK).to_json()
    assert js["pass"] and all(set(c) >= {"clause", "pass", "measured", "required"} for c in js["clauses"])


# ------------------------------------------------------------- profiles

def test_partition_rejects_overlap_and_gaps():
    with pytest.raises(ValueError):
        VertexPartition(3, 0b011, 0b110, 0, 0)
    with pytest.raises(ValueError):
        VertexPartition(3, 0b001, 0b010, 0, 0)


def test_profile_text_roundtrip(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text(DESK.to_text())
    # the desk defaults put tau above eps3, so loading them warns
    with pytest.warns(UserWarning, match="tau=0.25 > eps3=0.08"):
        assert ConstantsProfile.load(path) == DESK


def test_profile_chain_warning(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("eps=0.3\neps1=0.01\n")
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        ConstantsProfile.load(path)
    assert any("hierarchy" in str(w.message) for w in rec)


def test_profile_range_checked():
    with pytest.raises(ValueError):
        ConstantsProfile(nu=0.0)
    with pytest.raises(ValueError):
        ConstantsProfile(nu=0.5, tau=0.25)
