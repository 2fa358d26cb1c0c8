import pytest

from hamorient.covers import (NotFound, balance_matching, check_balance, check_dedges, check_disjoint,
                              d_plus_one_matching, exceptional_cover_AB, exceptional_cover_ABST,
                              find_four_long_runs, find_long_runs, good_path_system, is_run, linking_ST,
                              p_partition, rep_counts, sink_source_embed, two_disjoint_st_edges, useful_links,
                              useful_tripartition)
from hamorient.covers.engine import Layout, edge_demand, plan_window, realize
from hamorient.covers.patterns import Subpath
from hamorient.digraph import CyclePattern, Digraph, OrientedPath, bits, sink_count, validate_embedding, \
    validate_partial
from hamorient.generators import (complete_bipartite_digraph, synthetic_AB, synthetic_ABST, synthetic_ST,
                                  two_cliques, two_cliques_matching)
from hamorient.dense import PreconditionError
from hamorient.structure import COVER, DESK, VertexPartition


def alternating_ff(n):
    return CyclePattern(("FB" * n)[: n - 2] + "FF")


# ---------------------------------------------------------------- rep counts

@pytest.mark.parametrize("form,expected", [
    ("ABABAB", (0, 0)),
    ("ABBA", (0, 1)),
    ("ASBTA", (0, 0)),
    ("AABBB", (1, 2)),
    ("ASA", (1, 0)),
    ("", (0, 0)),
])
def test_rep_counts(form, expected):
    assert rep_counts(form) == expected


# ---------------------------------------------------------------- matchings

def test_two_disjoint_edges_variant_i_returns_the_cross_arcs():
    G0 = two_cliques(20)
    G = Digraph.from_arcs(20, G0.arcs() + [(0, 10), (11, 1)])
    P = VertexPartition.from_sets(20, S=range(10), T=range(10, 20))
    assert two_disjoint_st_edges(G, P, "i", ("ST", "TS")) == ((0, 10), (11, 1))
    with pytest.raises(NotFound):
        two_disjoint_st_edges(G, P, "i", ("ST", "ST"))


def test_two_disjoint_edges_variants_ii_and_iv():
    G, P = synthetic_ST(300, DESK, seed=1, ab=(0, 2))
    e1, e2 = two_disjoint_st_edges(G, P, "ii")
    assert check_disjoint([e1, e2])
    for u, v in (e1, e2):
        assert G.has_arc(u, v) and P.label_of(u) == "T" and P.label_of(v) == "S"
    f1, f2 = two_disjoint_st_edges(G, P, "iv")
    assert check_disjoint([f1, f2])
    for u, v in (f1, f2):
        assert G.has_arc(u, v)
        assert (P.label_of(u), P.label_of(v)) in {("S", "T"), ("S", "A"), ("T", "S"), ("T", "B")}


def test_two_disjoint_edges_checks_variant_hypothesis():
    G, P = synthetic_ST(300, DESK, seed=1, ab=(1, 4))
    with pytest.raises(PreconditionError):
        two_disjoint_st_edges(G, P, "ii")
    with pytest.raises(PreconditionError):
        two_disjoint_st_edges(G, P, "i")


def test_d_plus_one_matching_d_zero_prefers_ts_edge():
    G, P = synthetic_ST(300, DESK, seed=1, ab=(0, 0))
    M = d_plus_one_matching(G, P, 0)
    assert len(M) == 1
    u, v = M[0]
    assert (P.label_of(u), P.label_of(v)) == ("T", "S")


def test_d_plus_one_matching_d_three():
    G, P = synthetic_ST(300, DESK, seed=1, ab=(1, 4))
    M = d_plus_one_matching(G, P, 3)
    assert len(M) == 4
    assert check_dedges(P, M, 3, G.count_arcs(P.T, P.S), G) == []


def test_check_dedges_flags_shared_endpoint():
    P = VertexPartition.from_sets(8, A=[0], B=[1, 2], S=[3, 4], T=[5, 6, 7])
    bad = check_dedges(P, [(5, 3), (6, 3)], 1, 1)
    assert any("not distinct" in b for b in bad)


def test_d_plus_one_matching_precondition():
    G, P = synthetic_ST(300, DESK, seed=1, ab=(1, 4))
    with pytest.raises(PreconditionError):
        d_plus_one_matching(G, P, P.s - 1)
    with pytest.raises(PreconditionError):
        d_plus_one_matching(G, P, 2)


def test_balance_matching_on_synthetic_ab():
    G, P = synthetic_AB(400, DESK, seed=1, d=1)
    assert P.b - P.a == 1
    M = balance_matching(G, P, 1)
    assert len(M) == 3 and check_disjoint(M)
    assert check_balance(G, P, M, 1) == []


def _bipartite_with_b_arcs(arcs):
    n = 21
    base = complete_bipartite_digraph(n)
    G = Digraph.from_arcs(n, base.arcs() + arcs)
    P = VertexPartition.from_sets(n, A=range(10), B=range(10, 21))
    return G, P


def test_balance_matching_on_complete_bipartite():
    G, P = _bipartite_with_b_arcs([(11, 12), (13, 14), (15, 16)])
    M = balance_matching(G, P, 1)
    assert sorted(M) == [(11, 12), (13, 14), (15, 16)]
    G2, P2 = _bipartite_with_b_arcs([(11, 12), (13, 14)])
    with pytest.raises(NotFound):
        balance_matching(G2, P2, 1)


def test_balance_matching_needs_positive_d():
    G, P = synthetic_AB(400, DESK, seed=1, d=0)
    with pytest.raises(PreconditionError):
        balance_matching(G, P, 0)


# ----------------------------------------------------------------- long runs

def test_long_runs_all_forward():
    r = find_long_runs(CyclePattern("F" * 100), 30)
    assert r.starts == (0, 30) and r.forward and not r.reflected


def test_long_runs_avoid_turn():
    C = CyclePattern("F" * 50 + "B" * 10 + "F" * 140)
    r = find_long_runs(C, 60)
    assert (r.starts[1] - r.starts[0]) % 200 == 60
    for p in r.starts:
        assert is_run(C, p)
        assert not (p < 50 < p + 20) and not (p < 60 < p + 20)
    assert C.d(r.starts[0])


def test_long_runs_backward_pattern_is_reflected():
    C = CyclePattern("B" * 100)
    r = find_long_runs(C, 30)
    assert r.reflected
    assert all(is_run(C, p) for p in r.starts)


def test_long_runs_alternating_fails():
    with pytest.raises(NotFound, match="densest sink interval"):
        find_long_runs(CyclePattern("FB" * 50), 30)


def test_long_runs_distance_precondition():
    with pytest.raises(PreconditionError):
        find_long_runs(CyclePattern("F" * 100), 10)


def test_four_long_runs():
    r = find_four_long_runs(CyclePattern("F" * 100))
    assert r.starts == (0, 25, 50, 75)


# ------------------------------------------------------ useful tripartition

def test_tripartition_alternating_48():
    C = CyclePattern("FB" * 50)
    t = useful_tripartition(Subpath(C, 0, 48))
    assert t.violations() == []
    assert min(len(t.Q1), len(t.Q2), len(t.Q3)) >= 2
    links = t.links(2)
    assert links
    x = links[0]
    assert sum(q < x for q in t.Q2) >= len(t.Q2) / 3
    assert sum(q > x + 2 for q in t.Q2) >= len(t.Q2) / 3
    with pytest.raises(ValueError):
        t.links(3)


def test_tripartition_sinks_in_first_part():
    C = CyclePattern("FB" * 30 + "F" * 140)
    t = useful_tripartition(Subpath(C, 0, 150))
    assert t.violations() == []


def test_tripartition_too_few_sinks():
    C = CyclePattern("FB" * 11 + "F" * 78)
    P = Subpath(C, 0, 60)
    assert len(P.sinks()) == 11
    with pytest.raises(PreconditionError):
        useful_tripartition(P)


# ------------------------------------------------------- sink/source embed

@pytest.fixture(scope="module")
def sinksource_setup():
    G, P = synthetic_AB(400, COVER, seed=3, st=(2, 3), d=0)
    C = CyclePattern("".join("FB"[i % 2] for i in range(398)) + "FF")
    path = Subpath(C, 0, 120)
    trip = useful_tripartition(path)
    off = [x for x in trip.links(8) if x % 2 == 0][0]
    dirs = tuple(path.d(off + i) for i in range(8))
    A, B = list(bits(P.A)), list(bits(P.B))
    bb = [(u, v) for u in B for v in bits(G.out_adj[u] & P.B)]
    lay = Layout(G, {"A": P.A, "B": P.B, "S": P.S, "T": P.T}, (("A", "B"), ("B", "A")),
                 {"A": P.A & ~(1 << A[0]), "B": P.B})
    plan = plan_window(lay, lambda k: dirs[k], ("c", "A"), [edge_demand(*bb[0])],
                       lambda st: st.k == 9 and st.lastAB == "B", 9)
    L = OrientedPath(tuple(realize(lay, lambda k: dirs[k], plan.slots)), dirs)
    assert L.is_valid(G)
    return G, P, C, path, trip, L, A[0]


def _labels(P, images):
    return "".join(P.label_of(v) for v in images)


def test_sink_source_covers_all_four_sets(sinksource_setup):
    G, P, C, path, trip, L, a1 = sinksource_setup
    Ss, Ts = list(bits(P.S)), list(bits(P.T))
    emb = sink_source_embed(G, P, 1 << Ss[0], 1 << Ss[1], 1 << Ts[0], 1 << Ts[1], a1, path, trip, L)
    assert validate_partial(G, C, emb)
    assert emb.images[0] == a1
    assert set(Ss[:2] + Ts[:2]) <= set(emb.images)
    # path length 120 is even: the final vertex lies in B
    assert P.label_of(emb.images[-1]) == "B"
    rA, rB = rep_counts(_labels(P, L.vertices))
    assert rep_counts(_labels(P, emb.images)) == (1 + 1 + rA, 1 + 1 + rB)
    s = L.vertices
    assert any(emb.images[i:i + len(s)] == s for i in range(len(emb.images)))


def test_sink_source_single_s_a(sinksource_setup):
    G, P, C, path, trip, L, a1 = sinksource_setup
    Ss = list(bits(P.S))
    emb = sink_source_embed(G, P, 1 << Ss[0], 0, 0, 0, a1, path, trip, L)
    assert validate_partial(G, C, emb)
    pos = emb.images.index(Ss[0])
    assert pos in path.sinks()
    rA, rB = rep_counts(_labels(P, L.vertices))
    assert rep_counts(_labels(P, emb.images)) == (1 + rA, rB)


def test_sink_source_empty_sets(sinksource_setup):
    G, P, C, path, trip, L, a1 = sinksource_setup
    emb = sink_source_embed(G, P, 0, 0, 0, 0, a1, path, trip, L)
    assert validate_partial(G, C, emb)
    assert rep_counts(_labels(P, emb.images)) == rep_counts(_labels(P, L.vertices))
    assert set(_labels(P, emb.images)) <= {"A", "B"}


def test_sink_source_rejects_a1_outside_a(sinksource_setup):
    G, P, C, path, trip, L, a1 = sinksource_setup
    with pytest.raises(PreconditionError):
        sink_source_embed(G, P, 0, 0, 0, 0, next(bits(P.B)), path, trip, L)


# ------------------------------------------------------------ AB covers

@pytest.fixture(scope="module")
def ab_instance():
    return synthetic_AB(400, DESK, seed=1, d=1)


def test_cover_ab_all_forward(ab_instance):
    G, P = ab_instance
    C = CyclePattern("F" * 400)
    cov = exceptional_cover_AB(G, P, C, DESK)
    assert cov.case == "excover1"
    assert cov.bound == 21 * DESK.F("eps4") * 400
    checks = cov.ec_checks(G, C)
    assert all(checks.values()), checks
    js = cov.to_json(G, C)
    assert {"start_pos", "images", "class_sequence", "rep_A", "rep_B", "ec_checks"} <= set(js)


def test_cover_ab_alternating_with_ff(ab_instance):
    G, P = ab_instance
    C = alternating_ff(400)
    assert sink_count(C) == 199
    cov = exceptional_cover_AB(G, P, C, DESK)
    assert cov.case.startswith("excover2")
    assert cov.bound == 2 * DESK.F("eps4") * 400
    assert cov.passed(G, C)


def test_cover_ab_rejects_antidirected(ab_instance):
    G, P = ab_instance
    with pytest.raises(PreconditionError):
        exceptional_cover_AB(G, P, CyclePattern("FB" * 200), DESK)


def test_ec3_two_way_agreement(ab_instance):
    G, P = ab_instance
    cov = exceptional_cover_AB(G, P, CyclePattern("F" * 400), DESK)
    used = set(cov.images)
    a_left = sum(1 for v in bits(P.A) if v not in used)
    b_left = sum(1 for v in bits(P.B) if v not in used)
    rA, rB = cov.rep_counts()
    assert b_left - a_left == P.b - P.a - rB + rA + 1 == 1


# ---------------------------------------------------------- ABST covers

@pytest.fixture(scope="module")
def abst_instance():
    return synthetic_ABST(600, DESK, seed=1)


def test_useful_links_forms():
    G, P = synthetic_ABST(400, COVER, seed=2)
    F, AD = (True,) * 8, (True, False) * 4
    L1, L2 = useful_links(G, P, F, AD, ("AB", "AB"))
    assert L1.is_valid(G) and L2.is_valid(G)
    assert not set(L1.vertices) & set(L2.vertices)
    f1, f2 = _labels(P, L1.vertices), _labels(P, L2.vertices)
    assert f1.count("S") + f1.count("T") == 1 and f1[0] == "A" and f1[-1] == "B"
    assert f2[0] == "A" and f2[-1] == "B"
    # an antidirected fragment changes parity only through an atypical edge
    # into S from B+T or into T from A+S
    steps = zip(L2.vertices, L2.vertices[1:], L2.dirs)
    arcs = [(u, v) if d else (v, u) for u, v, d in steps]
    assert any((P.label_of(u), P.label_of(v)) in {("B", "S"), ("T", "S"), ("A", "T"), ("S", "T")}
               for u, v in arcs)
    for form in (f1, f2):
        assert rep_counts(form) == (0, 0)
        assert (form.count("S") + form.count("T")) % 2 == 1


def test_cover_abst_few_sinks(abst_instance):
    G, P = abst_instance
    C = CyclePattern("F" * 600)
    cov = exceptional_cover_ABST(G, P, C, DESK)
    assert cov.case == "ABST1"
    assert cov.measure_name == "ab_usage"
    assert cov.ab_usage <= 2 * DESK.F("eta1") ** 2 * 600
    assert cov.passed(G, C)
    assert cov.info["d_prime"] == cov.info["d"]
    assert cov.info["p0_reps"][0] == 0


def test_cover_abst_many_sinks(abst_instance):
    G, P = abst_instance
    C = CyclePattern(("F" * 20 + "FB" * 10) * 15)
    assert sink_count(C) >= DESK.F("eps2") * 600
    cov = exceptional_cover_ABST(G, P, C, DESK)
    assert cov.case.startswith("ABST2")
    assert cov.ab_usage <= 5 * DESK.F("eps2") * 600
    assert cov.passed(G, C)


def test_cover_abst_usage_cap(abst_instance):
    G, P = abst_instance
    C = CyclePattern("F" * 600)
    cov = exceptional_cover_ABST(G, P, C, DESK, usage_cap=8)
    assert cov.bound == 8
    assert cov.info["branch_bound"] == float(2 * DESK.F("eta1") ** 2 * 600)
    assert cov.passed(G, C)


# ---------------------------------------------------------------- ST linking

@pytest.fixture(scope="module")
def two_cliques_instance():
    return two_cliques_matching(300)


def test_linking_many_sinks(two_cliques_instance):
    G, P = two_cliques_instance
    C = alternating_ff(300)
    L = linking_ST(G, P, C, DESK)
    assert L.branch == "linking1"
    assert validate_embedding(G, C, L.embedding)
    assert P.label_of(L.R1.vertices[0]) == "S" and P.label_of(L.R1.vertices[-1]) == "T"
    assert P.label_of(L.R2.vertices[0]) == "T" and P.label_of(L.R2.vertices[-1]) == "S"
    assert len(L.R1.vertices) - 1 <= 3 and len(L.R2.vertices) - 1 <= 3
    assert L.P_T[1] == L.T_star.bit_count()


def test_linking_all_forward_has_empty_path_system(two_cliques_instance):
    G, P = two_cliques_instance
    C = CyclePattern("F" * 300)
    L = linking_ST(G, P, C, DESK)
    assert L.branch == "linking2"
    assert L.good_paths.paths == ()
    assert validate_embedding(G, C, L.embedding)


def test_good_path_system_covers_a_and_b():
    G, P = synthetic_ST(300, DESK, seed=1, ab=(2, 2))
    gps = good_path_system(G, P)
    assert gps.violations(G, P) == []
    assert (P.A | P.B) & ~gps.covered == 0
    for p in gps.paths:
        assert len(p) - 1 <= 6
    pp = p_partition(P, gps)
    assert sum(pp.sizes.values()) == 300
    int_S = int_T = 0
    for p in gps.paths:
        inner = sum(1 << v for v in p[1:-1])
        if P.label_of(p[0]) == "S":
            int_S |= inner
        else:
            int_T |= inner
    assert pp.S == (P.S | int_S) & ~int_T
    assert pp.T == (P.T | int_T) & ~int_S


def test_linking_with_path_system():
    G, P = synthetic_ST(300, DESK, seed=1, ab=(2, 2))
    C = CyclePattern("F" * 300)
    L = linking_ST(G, P, C, DESK)
    assert L.branch == "linking2"
    assert L.good_paths.violations(G, P) == []
    assert validate_embedding(G, C, L.embedding)
