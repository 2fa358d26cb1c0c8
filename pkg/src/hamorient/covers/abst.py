"""Exceptional covers for ABST-extremal digraphs and useful AB/BA links."""

from __future__ import annotations

import math
from fractions import Fraction

from ..dense import HamiltonNotFound, PreconditionError, any_orientation_hamilton_path
from ..digraph import CyclePattern, Digraph, OrientedPath, PartialEmbedding, bits, mask_of, sink_count
from ..structure import ConstantsProfile, VertexPartition
from .ab import _check_pre, bipartite_low
from .basics import ExceptionalCover, _arcs_between, d_plus_one_matching
from .engine import (Demand, Layout, NotFound, PlannerBudget, edge_demand, pattern_dirs, plan_window,
                     realize, rep_counts, run_starts, single, sink_density_starts)

ABST_DENSE = (("A", "B"), ("B", "A"), ("A", "S"), ("S", "B"), ("B", "T"), ("T", "A"),
              ("S", "S"), ("T", "T"))
ORDER = ("A", "B", "S", "T")

# class of the vertex just before / after a segment, by edge orientation
ENTRY = {("T", True): "B", ("T", False): "A", ("S", True): "A", ("S", False): "B"}
EXIT = {("T", True): "A", ("T", False): "B", ("S", True): "B", ("S", False): "A"}


def dense_part(G: Digraph, X: int, slack: float = 0.0) -> int:
    """Vertices of X with semidegree inside X at least 7|X|/8 + slack."""
    thr = Fraction(7 * X.bit_count(), 8) + Fraction(slack)
    return sum(1 << v for v in bits(X)
               if min((G.out_adj[v] & X).bit_count(), (G.in_adj[v] & X).bit_count()) >= thr)


def _layout(G: Digraph, P: VertexPartition, n: int) -> tuple[Layout, int, int]:
    lowAB = bipartite_low(G, P.A, P.B, slack=0.02 * n)
    S_hi = dense_part(G, P.S, 0.01 * n)
    T_hi = dense_part(G, P.T, 0.01 * n)
    pools = {"A": P.A & ~lowAB, "B": P.B & ~lowAB, "S": S_hi, "T": T_hi}
    layout = Layout(G, {"A": P.A, "B": P.B, "S": P.S, "T": P.T}, ABST_DENSE, pools)
    return layout, lowAB, (P.S & ~S_hi) | (P.T & ~T_hi)


# ------------------------------------------------------------ useful links

def useful_links(G: Digraph, P: VertexPartition, L1: tuple[bool, ...], L2: tuple[bool, ...],
                 ends: tuple[str, str] = ("AB", "AB"), budget: int = 100_000) -> tuple[OrientedPath, OrientedPath]:
    """Disjoint copies of two length-8 fragments, each an AB- or BA-path with
    no repeated A or B and an odd number of S+T vertices."""
    n = G.n
    layout, lowAB, lowST = _layout(G, P, n)
    S_hi, T_hi = layout.pools["S"], layout.pools["T"]
    edges = _arcs_between(G, P.B | P.T, S_hi) + _arcs_between(G, P.A | P.S, T_hi)
    out: list[OrientedPath] = []
    taken = lowAB | lowST
    for frag, end in zip((L1, L2), ends):
        frag = tuple(bool(x) for x in frag)
        if len(frag) != 8:
            raise ValueError("link fragments have length eight")
        if end not in ("AB", "BA"):
            raise ValueError(f"endpoint classes must be AB or BA, got {end!r}")
        # atypical edges let antidirected fragments change between S and T parity
        opt, seen = [], taken
        for u, v in edges:
            if not (seen >> u & 1 or seen >> v & 1):
                opt.append(edge_demand(u, v, "link-edge", required=False))
                seen |= 1 << u | 1 << v
            if len(opt) == 4:
                break
        lay = Layout(G, layout.classes, ABST_DENSE, {X: m & ~taken for X, m in layout.pools.items()})

        # fewest exceptional vertices first: one S or T vertex, then three, ...
        plan = None
        for want in (1, 3, 5, 7, 9):
            def goal(st, end=end, want=want):
                return (st.k == 9 and st.last == ("c", end[1]) and st.rA == st.rB == 0
                        and st.used["S"] + st.used["T"] == want)

            try:
                plan = plan_window(lay, lambda k: frag[k], ("c", end[0]), opt, goal, 9, ORDER, budget=budget,
                                   track=("S", "T"), max_reps=0, case="links")
            except PlannerBudget as e:
                raise NotFound("links", e.reason) from None
            if plan is not None:
                break
        if plan is None:
            raise NotFound("links", f"no useful {end}-path for fragment "
                                    f"{''.join('F' if x else 'B' for x in frag)}; atypical edges available: {len(opt)}")
        images = realize(lay, lambda k: frag[k], plan.slots, reserved=taken, case="links")
        if images is None:
            raise NotFound("links", "class slots could not be realised")
        path = OrientedPath(tuple(images), frag)
        labels = [P.label_of(v) for v in images]
        assert path.is_valid(G) and rep_counts(labels) == (0, 0)
        assert sum(lab in "ST" for lab in labels) % 2 == 1
        assert labels[0] == end[0] and labels[-1] == end[1]
        out.append(path)
        for v in images:
            taken |= 1 << v
    assert not set(out[0].vertices) & set(out[1].vertices)
    return out[0], out[1]


# -------------------------------------------------------------- case label

def _antidirected_path(C: CyclePattern, start: int, length: int) -> bool:
    return all(C.d(start + i) != C.d(start + i + 1) for i in range(length - 1))


def abst_case(C: CyclePattern, P: VertexPartition, profile: ConstantsProfile) -> tuple[str, Fraction]:
    """Branch label and A+B usage bound, dispatched literally on sigma(C)."""
    n = C.n
    e2n = profile.F("eps2") * n
    if sink_count(C) < e2n:
        return "ABST1", 2 * profile.F("eta1") ** 2 * n
    bound = 5 * e2n
    ell = 2 * math.ceil(e2n) - 1
    s_star = P.s - math.ceil(math.sqrt(profile.eps1) * n)
    q2 = None
    for p in range(n):
        if C.d(p) and _antidirected_path(C, p, ell):
            q2 = p
            break
    if q2 is None:
        need = profile.eps1 ** (1 / 3) * n
        for p in range(n):
            if C.is_sink(p + 1) and sum(C.is_sink(p + i) for i in range(1, ell)) >= need:
                q2 = p
                break
    if q2 is None:
        return "ABST2-case3", bound
    q1 = (q2 - (2 * s_star + ell) - ell) % n      # d_C(Q1, Q2) = 2 s* + ell
    e = ((q1 + ell - 2) % n, (q1 + ell - 1) % n)  # final two edges of Q1
    f = (q2, (q2 + 1) % n)                        # initial two edges of Q2
    q1_anti = _antidirected_path(C, q1, ell)
    q2_anti = _antidirected_path(C, q2, ell)
    if q1_anti and q2_anti and ((C.d(e[1]) == C.d(f[0])) == (n % 2 == 0)):
        return "ABST2-case1", bound
    for ei in e:
        for fi in f:
            dist = (fi - ei) % n
            if C.d(ei) == C.d(fi) and (n - dist) % 2 == 0:
                return "ABST2-case2", bound
    return "ABST2-case3", bound


# ------------------------------------------------------------------ cover

def _heads(C: CyclePattern, start: int, seg: str, cross: list[tuple[int, int]],
           label) -> list[tuple[list, int | None]]:
    """Short alternating A/B prefixes starting in A that can enter the first
    segment: the plain one through a dense arc, and one per crossing arc
    between A+B and the segment class.  On antidirected stretches only a
    crossing arc changes which dense arcs remain available, so a cover
    whose segments meet there needs one in its head.

    Each entry is (slots, pinned first vertex of the segment or None)."""
    out: list[tuple[list, int | None]] = []
    for h in range(1, 6):
        cls = ["A" if i % 2 == 0 else "B" for i in range(h)]
        if cls[-1] == ENTRY[(seg, C.d(start + h - 1))]:
            out.append(([("c", X) for X in cls], None))
            break
    for u, v in cross:
        x, y = (u, v) if label(v) == seg else (v, u)
        fwd = x == u
        for h in range(1, 6):
            cls = ["A" if i % 2 == 0 else "B" for i in range(h)]
            if cls[-1] == label(x) and C.d(start + h - 1) == fwd:
                out.append(([("c", X) for X in cls[:-1]] + [("v", x)], y))
                break
    return out


def _atypical_edges(G: Digraph, P: VertexPartition, S_hi: int, T_hi: int, avoid: int, per: int = 3):
    """A few disjoint arcs of each atypical kind; they let a connector
    absorb an odd number of S+T vertices without repeated A or B."""
    out, seen = [], avoid
    for X, Y in ((P.B, S_hi), (P.A, T_hi), (P.T, S_hi), (P.S, T_hi)):
        got = 0
        for u, v in _arcs_between(G, X, Y):
            if got == per:
                break
            if not (seen >> u & 1 or seen >> v & 1):
                out.append((u, v))
                seen |= 1 << u | 1 << v
                got += 1
    return out


def exceptional_cover_ABST(G: Digraph, P: VertexPartition, C: CyclePattern, profile: ConstantsProfile,
                           certified: bool = False, starts: int = 6, budget: int = 40_000,
                           usage_cap: Fraction | int | None = None) -> ExceptionalCover:
    """Cover S+T by a short A/B head, one long path in the first of G[T] and
    G[S], a connector window absorbing the atypical vertices and edges, one
    long path in the other class and a final A.

    `usage_cap` raises the A+B usage bound to at least the given value; the
    cover then reports the raised bound and keeps the branch bound in
    info["branch_bound"].
    """
    _check_pre(G, P, C, profile, "ABSTExtremal", certified)
    n = G.n
    d = P.b - P.a
    if d < 0:
        raise PreconditionError(f"partition not normalised: a={P.a} > b={P.b}")
    case, bound = abst_case(C, P, profile)
    branch_bound = bound
    if usage_cap is not None:
        bound = max(bound, Fraction(usage_cap))
    layout, lowAB, lowST = _layout(G, P, n)
    try:
        M = d_plus_one_matching(G, P, d)
    except (NotFound, PreconditionError):
        M = []
    extra = M + [e for e in _atypical_edges(G, P, layout.pools["S"], layout.pools["T"], lowAB) if e not in M]
    attach: dict[int, list[tuple[int, int]]] = {}
    free_edges = []
    used_v: set[int] = set()
    for u, v in extra:
        if u in used_v or v in used_v or (lowAB >> u & 1) or (lowAB >> v & 1):
            continue
        used_v.update((u, v))
        hit = [x for x in (u, v) if lowST >> x & 1]
        if hit:
            attach.setdefault(hit[0], []).append((u, v))
        else:
            free_edges.append((u, v))
    demands: list[Demand] = []
    for x in bits(lowST):
        variants = [(x,)]
        for u, v in attach.get(x, []):
            variants += [(u, v), (v, u)]
        demands.append(Demand(tuple(variants), True, "low-ST"))
    for u, v in free_edges:
        demands.append(edge_demand(u, v, "atypical-edge", required=False))

    avoid = lowAB | lowST | sum(1 << v for v in used_v)
    S_hi, T_hi = layout.pools["S"], layout.pools["T"]
    cross = {"T": _small(_arcs_between(G, layout.pools["A"], T_hi) + _arcs_between(G, T_hi, layout.pools["B"]),
                         avoid),
             "S": _small(_arcs_between(G, layout.pools["B"], S_hi) + _arcs_between(G, S_hi, layout.pools["A"]),
                         avoid)}
    sizes = {"S": P.s, "T": P.t}
    low_in = {X: (P.get(X) & lowST).bit_count() for X in "ST"}
    max_len = int(min(bound, 24 + 8 * len(demands) + 4 * d))
    if sink_count(C) >= profile.F("eps2") * n:
        cand = sink_density_starts(C, max(max_len, 10), starts)
    else:
        cand = run_starts(C, starts - 1) + [0]
    cand = list(dict.fromkeys(cand + [(p + 1) % n for p in cand]))
    reasons = []
    # iterative deepening keeps connector windows short
    limits = sorted({min(max_len, L) for L in (12, 24, max_len)})
    for limit in limits:
        reasons = []
        for start in cand:
            dirs = pattern_dirs(C, start)
            for seg1, seg2 in (("T", "S"), ("S", "T")):
                for head, entry in _heads(C, start, seg1, cross[seg1], P.label_of):
                    cov = _try_head(G, P, C, layout, lowAB, demands, start, dirs, seg1, seg2, head, entry,
                                    sizes, low_in, d, n, bound, limit, budget, case, reasons)
                    if cov is not None:
                        if bound != branch_bound:
                            cov.info["branch_bound"] = float(branch_bound)
                        return cov
            reasons.append(f"start {start}: no connector window balances rep(B)-rep(A)={d} "
                           f"within the A+B usage bound {float(bound):.1f}")
    raise NotFound(case, "; ".join(reasons) or "no start position")


def _small(arcs: list[tuple[int, int]], avoid: int, k: int = 3) -> list[tuple[int, int]]:
    out, seen = [], avoid
    for u, v in arcs:
        if not (seen >> u & 1 or seen >> v & 1):
            out.append((u, v))
            seen |= 1 << u | 1 << v
            if len(out) == k:
                break
    return out


def _try_head(G, P, C, layout, lowAB, demands, start, dirs, seg1, seg2, head, entry, sizes, low_in, d, n,
              bound, limit, budget, case, reasons) -> ExceptionalCover | None:
    h = len(head)
    last_lab = head[-1][1] if head[-1][0] == "c" else P.label_of(head[-1][1])
    pinned = {s[1] for s in head if s[0] == "v"} | ({entry} if entry is not None else set())
    dem = [dm for dm in demands if not (dm.vertices & pinned)]
    if any(dm.required for dm in demands if dm.vertices & pinned):
        return None
    lay = Layout(G, layout.classes, ABST_DENSE, {X: m & ~mask_of(pinned) for X, m in layout.pools.items()})
    for u in range(low_in[seg1], low_in[seg1] + 4):
        l1 = sizes[seg1] - u
        base = h + l1
        X1 = EXIT[(seg1, dirs(base - 1))]
        rep0 = (1 if last_lab == X1 else 0) * (1 if X1 == "B" else -1)

        def goal(st, base=base, u=u, rep0=rep0, l1=l1):
            if st.used[seg1] != u or st.last[0] != "c" or st.last[1] not in "AB":
                return None
            off = base + st.k
            if st.last[1] != ENTRY[(seg2, dirs(off - 1))]:
                return None
            l2 = sizes[seg2] - st.used[seg2]
            if l2 < 1:
                return None
            X2 = EXIT[(seg2, dirs(off + l2 - 1))]
            tail = [X2] + (["A"] if X2 == "B" else [])
            if off + l2 + len(tail) > n - 24:
                return None
            rep2 = (1 if st.last[1] == X2 else 0) * (1 if X2 == "B" else -1)
            if rep0 + (st.rB - st.rA) + rep2 != d:
                return None
            if h + st.k - st.used["S"] - st.used["T"] + len(tail) > bound:
                return None
            return {"order": (seg1, seg2), "head": head, "entry": entry, "lens": (l1, l2), "off2": off,
                    "tail": tail}

        try:
            plan = plan_window(lay, lambda j, base=base: dirs(base + j), ("c", X1), dem, goal, limit, ORDER,
                               budget=budget, track=("S", "T"), case=case,
                               class_caps={seg1: u, seg2: low_in[seg2] + 3})
        except PlannerBudget as e:
            reasons.append(f"start {start} {seg1}{seg2} u={u}: {e.reason}")
            continue
        if plan is None:
            continue
        try:
            cov = _realize_cover(G, P, C, lay, lowAB, start, plan, case, bound)
        except NotFound as e:
            reasons.append(f"start {start} {seg1}{seg2} u={u}: {e.reason}")
            continue
        checks = cov.ec_checks(G, C)
        if not all(checks.values()):
            raise NotFound(case, f"constructed cover failed its own checks {checks}")
        return cov
    return None


def _realize_cover(G, P, C, layout, lowAB, start, plan, case, bound) -> ExceptionalCover:
    suf = plan.extra
    seg1, seg2 = suf["order"]
    l1, l2 = suf["lens"]
    h = len(suf["head"])

    def segment(X: str, L: int, first=None) -> list:
        m = layout.pools[X]
        a = ("m", m) if first is None else ("v", first)
        if L == 1:
            return [a]
        return [a] + ([("skip", L - 2)] if L > 2 else []) + [("m", m)]

    slots = list(suf["head"]) + segment(seg1, l1, suf["entry"]) + list(plan.slots)
    slots += segment(seg2, l2) + [("c", X) for X in suf["tail"]]
    dirs = pattern_dirs(C, start)
    images = realize(layout, dirs, slots, reserved=lowAB, case=case)
    if images is None:
        raise NotFound(case, "class slots could not be realised")
    placed = {v for v in images if v is not None}
    for X, off, L in ((seg1, h, l1), (seg2, suf["off2"], l2)):
        if L < 3:
            continue
        x, y = images[off], images[off + L - 1]
        members = P.get(X) & ~sum(1 << v for v in placed if v not in (x, y))
        if members.bit_count() != L:
            raise NotFound(case, f"segment {X} expects {L} vertices, {members.bit_count()} remain")
        seg_dirs = [dirs(off + i) for i in range(L - 1)]
        try:
            path = any_orientation_hamilton_path(G, x, y, seg_dirs, vertices=members, strict=False)
        except (HamiltonNotFound, PreconditionError) as e:
            raise NotFound(case, f"Hamilton path in G[{X}] failed: {e}") from None
        images[off:off + L] = list(path.vertices)
        placed.update(path.vertices)
    if any(v is None for v in images):
        raise NotFound(case, "unfilled positions remain")
    labels = [P.label_of(v) for v in images]
    p0 = labels[h - 1:]
    rA, rB = rep_counts(p0)
    info = {"sigma": sink_count(C), "d": P.b - P.a, "segments": seg1 + seg2,
            "p0_form": _compress(p0), "p0_reps": [rA, rB], "d_prime": (P.b - P.a) - (rB - rA)}
    return ExceptionalCover(PartialEmbedding(start, tuple(images)), P, case, bound, "ab_usage", info)


def _compress(labels: list[str]) -> str:
    out, i = [], 0
    while i < len(labels):
        j = i
        while j < len(labels) and labels[j] == labels[i]:
            j += 1
        out.append(labels[i] if j - i == 1 else f"({labels[i]})^{j - i}")
        i = j
    return "".join(out)
