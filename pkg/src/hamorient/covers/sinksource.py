"""Covering prescribed S/T vertices by sink and source positions of a subpath."""

from __future__ import annotations

from ..dense import PreconditionError
from ..digraph import Digraph, OrientedPath, PartialEmbedding, bits, mask_of
from ..structure import VertexPartition
from .engine import AB, Demand, Layout, NotFound, PlannerBudget, plan_window, realize, rep_counts, single
from .patterns import Subpath, UsefulTripartition

SS_DENSE = (("A", "B"), ("B", "A"))


def restricted_digraph(G: Digraph, P: VertexPartition, S_A: int, S_B: int, T_A: int, T_B: int,
                       link: OrientedPath | None) -> Digraph:
    """G' with arcs E(A, B+S_A) + E(B, A+T_B) + E(T_A, A) + E(S_B, B) + E(L)."""
    out = [0] * G.n
    for u in range(G.n):
        bit = 1 << u
        if P.A & bit:
            out[u] = G.out_adj[u] & (P.B | S_A)
        elif P.B & bit:
            out[u] = G.out_adj[u] & (P.A | T_B)
        elif T_A & bit:
            out[u] = G.out_adj[u] & P.A
        elif S_B & bit:
            out[u] = G.out_adj[u] & P.B
    if link is not None:
        vs = link.vertices
        for i, d in enumerate(link.dirs):
            u, v = (vs[i], vs[i + 1]) if d else (vs[i + 1], vs[i])
            out[u] |= 1 << v
    return Digraph(G.n, out)


def _final_class(path_len: int, link_classes: str) -> str:
    flips = len(link_classes) > 0 and link_classes[0] != link_classes[-1]
    return "A" if (path_len % 2 == 0) != flips else "B"


def sink_source_embed(G: Digraph, P: VertexPartition, S_A: int, S_B: int, T_A: int, T_B: int,
                      a1: int, path: Subpath, trip: UsefulTripartition | None, L_host: OrientedPath,
                      link_at: int | None = None, eps: float | None = None, eta: float | None = None,
                      thr: int = 2, budget: int = 200_000) -> PartialEmbedding:
    """Embed `path` starting at a1 in A so that S_A and T_B sit on sinks,
    S_B and T_A on sources, and L_host occupies a link of the tripartition.

    Only arcs of the restricted digraph G' are used, so every repeated A or B
    comes either from an exceptional vertex or from L_host itself.
    """
    n = G.n
    if not P.A >> a1 & 1:
        raise PreconditionError(f"a1={a1} is not in A")
    sets = {"S_A": S_A, "S_B": S_B, "T_A": T_A, "T_B": T_B}
    for name, X in sets.items():
        home = P.S if name[0] == "S" else P.T
        if X & ~home:
            raise PreconditionError(f"{name} is not contained in {name[0]}")
    total = 0
    for X in sets.values():
        if total & X:
            raise PreconditionError("S_A, S_B, T_A, T_B must be disjoint")
        total |= X
    if eta is not None and path.length > eta * eta * n:
        raise PreconditionError(f"|P|={path.length} > eta^2 n={eta * eta * n:.2f}")
    sinks = path.sinks()
    if eps is not None and len(sinks) < 200 * eps * n:
        raise PreconditionError(f"P has {len(sinks)} sinks < 200 eps n={200 * eps * n:.2f}")
    if not L_host.is_valid(G):
        raise PreconditionError("L_host is not a path of G")
    H = restricted_digraph(G, P, S_A, S_B, T_A, T_B, L_host)
    for name, X, need_in, need_out in (("S_A", S_A, P.A, 0), ("T_B", T_B, P.B, 0),
                                       ("S_B", S_B, 0, P.B), ("T_A", T_A, 0, P.A)):
        for x in bits(X):
            deg = (G.in_adj[x] & need_in).bit_count() if need_in else (G.out_adj[x] & need_out).bit_count()
            if deg < thr:
                raise PreconditionError(f"{name} vertex {x} has only {deg} neighbours on its side")
    link_mask = mask_of(L_host.vertices)
    pools = {"A": P.A & ~link_mask & ~(1 << a1), "B": P.B & ~link_mask}
    layout = Layout(H, {"A": P.A, "B": P.B, "S": P.S, "T": P.T}, SS_DENSE, pools, thr=thr)
    link_classes = "".join(P.label_of(v) for v in L_host.vertices)
    # the link sits at a prescribed offset: the first link of matching orientation
    if link_at is None:
        if trip is None:
            raise PreconditionError("either trip or link_at is required")
        Lh = len(L_host)
        offs = [x for x in trip.links(Lh) if tuple(path.d(x + i) for i in range(Lh)) == L_host.dirs]
        if not offs:
            raise NotFound("sinksource", f"no link of length {Lh} in P2 matches the orientation of L_host")
        link_at = offs[0]
    if tuple(path.d(link_at + i) for i in range(len(L_host))) != L_host.dirs:
        raise PreconditionError(f"L_host orientation differs from P at offset {link_at}")
    if link_at < 1:
        raise PreconditionError("the link must start after a1")
    demands = [single(x, name) for name, X in sets.items() for x in bits(X)]
    fixed = {link_at: Demand((tuple(L_host.vertices),), True, "link")}
    target = path.length + 1
    first = ("v", a1)
    end_class = _final_class(path.length, link_classes)

    def goal(st):
        return st.k == target and st.lastAB == end_class

    try:
        plan = plan_window(layout, path.d, first, demands, goal, target, AB, budget=budget,
                           case="sinksource", fixed=fixed)
    except PlannerBudget as e:
        raise NotFound("sinksource", e.reason) from None
    if plan is None:
        raise NotFound("sinksource", "no assignment of sinks and sources covers the four sets")
    images = realize(layout, path.d, plan.slots, case="sinksource")
    if images is None:
        raise NotFound("sinksource", "class slots could not be realised")
    emb = PartialEmbedding(path.start, tuple(images))
    labels = [P.label_of(v) for v in images]
    rA, rB = rep_counts(labels)
    lA, lB = rep_counts(link_classes)
    sA, sB, tA, tB = (X.bit_count() for X in (S_A, S_B, T_A, T_B))
    assert (rA, rB) == (sA + tA + lA, sB + tB + lB), "repeat ledger mismatch"
    assert labels[-1] == end_class
    for x in bits(S_A | T_B):
        assert path.d(images.index(x) - 1) and not path.d(images.index(x)), f"{x} not on a sink"
    for x in bits(S_B | T_A):
        assert not path.d(images.index(x) - 1) and path.d(images.index(x)), f"{x} not on a source"
    return emb
