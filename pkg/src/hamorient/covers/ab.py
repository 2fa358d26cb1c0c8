"""Exceptional covers for AB-extremal digraphs."""

from __future__ import annotations

from fractions import Fraction

from ..dense import PreconditionError
from ..digraph import CyclePattern, Digraph, PartialEmbedding, bits, mask_of, sink_count
from ..structure import ConstantsProfile, VertexPartition, certify_partition
from .basics import ExceptionalCover, _arcs_between, balance_matching
from .engine import (Demand, Layout, NotFound, PlannerBudget, edge_demand, pattern_dirs, plan_window,
                     realize, run_starts, single, sink_density_starts)

AB_DENSE = (("A", "B"), ("B", "A"))


def longest_antidirected_run(C: CyclePattern) -> int:
    """Length (in edges) of the longest antidirected subpath of C."""
    n = C.n
    if C.is_antidirected():
        return n
    best = cur = 1
    # start right after a consistent pair so the scan never wraps mid-run
    start = next(i for i in range(n) if C.d(i) == C.d(i + 1)) + 1
    for j in range(1, n):
        if C.d(start + j) != C.d(start + j - 1):
            cur += 1
        else:
            cur = 1
        best = max(best, cur)
    return best


def bipartite_low(G: Digraph, A: int, B: int, slack: float = 0.0) -> int:
    """Vertices of A+B whose semidegree into the other class falls below
    (7m+2)/8 + slack, where m = |B| (the bipartite completion threshold)."""
    m = B.bit_count()
    thr = Fraction(7 * m + 2, 8) + Fraction(slack)
    low = 0
    for X, Y in ((A, B), (B, A)):
        for v in bits(X):
            if min((G.out_adj[v] & Y).bit_count(), (G.in_adj[v] & Y).bit_count()) < thr:
                low |= 1 << v
    return low


def ab_case(G: Digraph, P: VertexPartition, C: CyclePattern, profile: ConstantsProfile) -> tuple[str, Fraction]:
    """Branch label and its length bound, dispatched literally on sigma(C)."""
    n = G.n
    e4n = profile.F("eps4") * n
    if sink_count(C) < e4n:
        return "excover1", 21 * e4n
    if P.a < P.b or P.s < P.t:
        return "excover2-case1", 2 * e4n
    close = longest_antidirected_run(C) >= 500 * profile.F("eps3") * n
    E = (_arcs_between(G, P.T, P.B) or _arcs_between(G, P.B, P.S)
         or _arcs_between(G, P.S, P.A) or _arcs_between(G, P.A, P.T))
    if close and E:
        return "excover2-case2.1", 2 * e4n
    return "excover2-case2.2", 2 * e4n


def _check_pre(G: Digraph, P: VertexPartition, C: CyclePattern, profile: ConstantsProfile, tag: str,
               certified: bool):
    if C.n != G.n or P.n != G.n:
        raise ValueError("pattern, partition and digraph sizes differ")
    if C.is_antidirected():
        raise PreconditionError("antidirected patterns are excluded")
    if not certified:
        cert = certify_partition(G, P, tag, profile)
        if not cert.passed:
            raise PreconditionError(f"{tag} clauses failed: {', '.join(cert.failed())}")


def exceptional_cover_AB(G: Digraph, P: VertexPartition, C: CyclePattern, profile: ConstantsProfile,
                         certified: bool = False, starts: int = 6, budget: int = 200_000) -> ExceptionalCover:
    """Cover S+T by a short path whose ends lie in A and whose repeated
    A/B occurrences restore |B - V(P)| = |A - V(P)| + 1."""
    _check_pre(G, P, C, profile, "ABExtremal", certified)
    n = G.n
    d = P.b - P.a
    if d < 0:
        raise PreconditionError(f"partition not normalised: a={P.a} > b={P.b}")
    case, bound = ab_case(G, P, C, profile)
    low = bipartite_low(G, P.A, P.B, slack=0.02 * n)

    demands: list[Demand] = []
    extra_edges: list[tuple[int, int]] = []
    if d > 0:
        try:
            extra_edges = balance_matching(G, P, d)
        except NotFound:
            extra_edges = []
    else:
        extra_edges = _small_matching(G, _arcs_between(G, P.B | P.T, P.B), 2)
        extra_edges += _small_matching(G, _arcs_between(G, P.A & ~low, P.A | P.T), 2,
                                       avoid={v for e in extra_edges for v in e})
    # demand vertices never fill class slots, so they must not count towards
    # the capability of a pinned vertex either
    busy = mask_of(v for e in extra_edges for v in e)
    pools = {"A": P.A & ~low & ~busy, "B": P.B & ~low & ~busy}
    # pinned vertices attach to a class only through a dense relation; a few
    # sprinkled side arcs would leave the realiser almost no choice
    layout = Layout(G, {"A": P.A, "B": P.B, "S": P.S, "T": P.T}, AB_DENSE, pools, thr=max(3, n // 40))
    by_t: dict[int, list[tuple[int, int]]] = {}
    for u, v in extra_edges:
        for x in (u, v):
            if (P.S | P.T) >> x & 1:
                by_t.setdefault(x, []).append((u, v))
    for x in bits(P.S | P.T):
        variants = [(x,)]
        for u, v in by_t.get(x, []):
            variants += [(u, v), (v, u)]
        demands.append(Demand(tuple(variants), True, "ST-vertex"))
    for u, v in extra_edges:
        if not ((P.S | P.T) >> u & 1 or (P.S | P.T) >> v & 1):
            demands.append(edge_demand(u, v, "balance-edge", required=False))

    max_len = int(min(bound + 1, 40 + 8 * (P.s + P.t + d)))
    max_len = min(max_len, n - 2)

    def goal(st):
        return st.last == ("c", "A") and st.rB - st.rA == d and st.k >= 1

    if sink_count(C) >= profile.F("eps4") * n:
        cand = sink_density_starts(C, max_len, starts)
    else:
        cand = run_starts(C, starts - 1) + [0]
    cand = list(dict.fromkeys(cand))
    reasons = []
    for start in cand:
        dirs = pattern_dirs(C, start)
        try:
            plan = plan_window(layout, dirs, ("c", "A"), demands, goal, max_len, ("A", "B"),
                               budget=budget, case=case, target_diff=d)
        except PlannerBudget as e:
            reasons.append(f"start {start}: {e.reason}")
            continue
        if plan is None:
            reasons.append(f"start {start}: no window of at most {max_len} vertices balances rep(B)-rep(A)={d}")
            continue
        try:
            images = realize(layout, dirs, plan.slots, reserved=low, case=case)
        except NotFound as e:
            reasons.append(f"start {start}: {e.reason}")
            continue
        if images is None:
            reasons.append(f"start {start}: class slots could not be realised")
            continue
        cov = ExceptionalCover(PartialEmbedding(start, tuple(images)), P, case, bound, "length",
                               {"sigma": sink_count(C), "d": d})
        checks = cov.ec_checks(G, C)
        if not all(checks.values()):
            raise NotFound(case, f"constructed cover failed its own checks {checks}")
        return cov
    raise NotFound(case, "; ".join(reasons) or "no start position")


def _small_matching(G: Digraph, arcs: list[tuple[int, int]], k: int, avoid: set[int] | None = None):
    seen = set(avoid or ())
    out = []
    for u, v in arcs:
        if u in seen or v in seen:
            continue
        out.append((u, v))
        seen.update((u, v))
        if len(out) == k:
            break
    return out
