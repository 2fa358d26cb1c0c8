"""Linking structures and the full embedding for ST-extremal digraphs."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..dense import HamiltonNotFound, PreconditionError, any_orientation_hamilton_path
from ..digraph import CyclePattern, Digraph, Embedding, OrientedPath, bits, mask_of, sink_count
from ..generators import two_cliques_matching  # noqa: F401  re-exported
from ..structure import ConstantsProfile, VertexPartition
from .ab import _check_pre
from .abst import dense_part
from .basics import _arcs_between
from .engine import (Layout, NotFound, PlannerBudget, edge_demand, path_demand, pattern_dirs,
                     plan_window, realize, run_starts, single, sink_density_starts)

ST_DENSE = (("S", "S"), ("T", "T"), ("T", "A"), ("A", "S"), ("S", "B"), ("B", "T"))
MAX_GOOD = 6


# -------------------------------------------------------- good path systems

@dataclass(frozen=True)
class GoodPathSystem:
    """Disjoint consistently oriented S- and T-paths of length at most six,
    each with both ends in the same class and at least one vertex of A+B."""

    paths: tuple[tuple[int, ...], ...]

    def violations(self, G: Digraph, P: VertexPartition) -> list[str]:
        bad = []
        seen: set[int] = set()
        for p in self.paths:
            if len(p) - 1 > MAX_GOOD:
                bad.append(f"path {p} is longer than {MAX_GOOD}")
            if any(not G.has_arc(p[i], p[i + 1]) for i in range(len(p) - 1)):
                bad.append(f"path {p} is not a forward path of G")
            ends = {P.label_of(p[0]), P.label_of(p[-1])}
            if len(ends) != 1 or ends - {"S", "T"}:
                bad.append(f"path {p} does not start and end in the same one of S, T")
            if not any((P.A | P.B) >> v & 1 for v in p):
                bad.append(f"path {p} has no vertex of A+B")
            if seen & set(p):
                bad.append(f"path {p} meets an earlier path")
            seen.update(p)
        return bad

    @property
    def covered(self) -> int:
        return mask_of(v for p in self.paths for v in p)


@dataclass(frozen=True)
class PPartition:
    A: int
    B: int
    S: int
    T: int

    @property
    def sizes(self) -> dict[str, int]:
        return {X: getattr(self, X).bit_count() for X in "ABST"}


def p_partition(P: VertexPartition, gps: GoodPathSystem) -> PPartition:
    """The partition induced by a good path system: interior vertices of
    S-paths join S, interior vertices of T-paths join T."""
    int_S = int_T = 0
    for p in gps.paths:
        inner = mask_of(p[1:-1])
        if P.S >> p[0] & 1:
            int_S |= inner
        else:
            int_T |= inner
    S = (P.S | int_S) & ~int_T
    T = (P.T | int_T) & ~int_S
    A = P.A & ~(int_S | int_T)
    B = P.B & ~(int_S | int_T)
    out = PPartition(A, B, S, T)
    assert sum(out.sizes.values()) == P.n
    assert not (A & B or A & S or A & T or B & S or B & T or S & T)
    return out


def _short_paths(G: Digraph, P: VertexPartition, x: int, free: int, max_len: int = 4):
    """Consistent forward paths through x whose ends share a class in S+T and
    whose other vertices are free, shortest first, lowest ids first."""
    ST = P.S | P.T
    out = []
    # grow backwards from x to an S/T start, then forwards to a matching end
    for back_len in range(1, max_len):
        for pre in _walks(G.in_adj, x, back_len, free):
            start = pre[-1]
            if not ST >> start & 1:
                continue
            cls = P.S if P.S >> start & 1 else P.T
            for fwd_len in range(1, max_len - back_len + 1):
                for post in _walks(G.out_adj, x, fwd_len, free & ~mask_of(pre)):
                    if cls >> post[-1] & 1:
                        out.append(tuple(pre[::-1]) + tuple(post[1:]))
                if out:
                    return sorted(out)
    return out


def _walks(adj, x: int, length: int, free: int):
    """Paths x = v0, v1, ..., v_length following adj, interior and end free."""
    def rec(path, used):
        if len(path) == length + 1:
            yield list(path)
            return
        for w in bits(adj[path[-1]] & free & ~used):
            path.append(w)
            yield from rec(path, used | 1 << w)
            path.pop()
    yield from rec([x], 1 << x)


def good_path_system(G: Digraph, P: VertexPartition, avoid: int = 0, cover: int | None = None) -> GoodPathSystem:
    """Greedy good path system covering `cover` (default A+B minus avoid).

    A B-vertex and an A-vertex are paired first (s->b->t->a->s'), leftover
    vertices get the shortest consistent S- or T-path through an atypical
    arc, lowest ids first."""
    todo = (P.A | P.B) & ~avoid if cover is None else cover
    free = G.full & ~avoid & ~todo
    ST = P.S | P.T
    paths: list[tuple[int, ...]] = []
    As, Bs = list(bits(todo & P.A)), list(bits(todo & P.B))
    while As and Bs:
        a, b = As[0], Bs[0]
        found = None
        for s in bits(G.in_adj[b] & P.S & free):
            for t in bits(G.out_adj[b] & G.in_adj[a] & P.T & free):
                for s2 in bits(G.out_adj[a] & P.S & free & ~(1 << s)):
                    found = (s, b, t, a, s2)
                    break
                if found:
                    break
            if found:
                break
        if found is None:
            break
        paths.append(found)
        free &= ~mask_of(found)
        As.pop(0)
        Bs.pop(0)
    for x in As + Bs:
        # endpoints and interior come from S+T; the other exceptional vertices stay out
        cand = _short_paths(G, P, x, free & ST)
        if not cand:
            raise NotFound("goodpaths", f"no consistent S- or T-path of length <= 4 through vertex {x}")
        p = cand[0]
        paths.append(p)
        free &= ~mask_of(p)
    gps = GoodPathSystem(tuple(paths))
    bad = gps.violations(G, P)
    if bad:
        raise NotFound("goodpaths", "; ".join(bad))
    return gps


# ------------------------------------------------------------------ linking

@dataclass
class LinkingST:
    branch: str
    S_star: int
    T_star: int
    R1: OrientedPath
    R2: OrientedPath
    P_S: tuple[int, int]          # (first position, vertex count), cyclic
    P_T: tuple[int, int]
    good_paths: GoodPathSystem | None
    p_partition: PPartition | None
    embedding: Embedding
    info: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = {"branch": self.branch, "S_star": list(bits(self.S_star)), "T_star": list(bits(self.T_star)),
             "R1": list(self.R1.vertices), "R2": list(self.R2.vertices),
             "P_S": list(self.P_S), "P_T": list(self.P_T), "info": self.info}
        if self.good_paths is not None:
            d["good_paths"] = [list(p) for p in self.good_paths.paths]
        if self.p_partition is not None:
            d["p_partition_sizes"] = self.p_partition.sizes
        return d


def linking_ST(G: Digraph, P: VertexPartition, C: CyclePattern, profile: ConstantsProfile,
               certified: bool = False, starts: int = 6, budget: int = 60_000) -> LinkingST:
    """Split C into an S-part and a T-part joined by two short connectors
    R1 (S to T) and R2 (T to S), absorb A+B and the low-degree S/T vertices,
    and complete both parts by Hamilton paths inside G[S] and G[T]."""
    _check_pre(G, P, C, profile, "STExtremal", certified)
    n = G.n
    many = sink_count(C) >= profile.F("eps4") * n
    branch = "linking1" if many else "linking2"
    order = (branch, "linking2" if many else "linking1")
    reasons = []
    for br in order:
        try:
            out = _linking(G, P, C, br, starts, budget)
        except NotFound as e:
            reasons.append(f"{br}: {e.reason}")
            continue
        if br != branch:
            out.info["fallback_from"] = branch
        return out
    raise NotFound(branch, "; ".join(reasons))


def _linking(G: Digraph, P: VertexPartition, C: CyclePattern, branch: str, starts: int,
             budget: int) -> LinkingST:
    n = G.n
    S_hi, T_hi = dense_part(G, P.S, 0.01 * n), dense_part(G, P.T, 0.01 * n)
    lowST = (P.S & ~S_hi) | (P.T & ~T_hi)
    AB = P.A | P.B
    # R2 edge candidates of both orientations, kept out of the window
    ts = [(u, v) for u, v in _arcs_between(G, T_hi, S_hi)]
    st = [(u, v) for u, v in _arcs_between(G, S_hi, T_hi)]
    r2_edges: list[tuple[int, int]] = []
    seen = 0
    for pool in (ts, st):
        got = 0
        for u, v in pool:
            if not (seen >> u & 1 or seen >> v & 1):
                r2_edges.append((u, v))
                seen |= 1 << u | 1 << v
                got += 1
                if got == 2:
                    break
    # R1 bridges: edges between S and T, traversed either way
    bridges = []
    for u, v in (st + ts):
        if not (seen >> u & 1 or seen >> v & 1):
            bridges.append((u, v))
            seen |= 1 << u | 1 << v
            if len(bridges) == 4:
                break
    resources: list[tuple[str, object]] = [("edge", None)]
    resources += [("vertex", v) for v in bits(P.A)][:2] + [("vertex", v) for v in bits(P.B)][:2]
    if not r2_edges:
        resources = resources[1:]
    gps = None
    reasons = []
    dirs_all = C.dirs
    if branch == "linking1":
        cand = sink_density_starts(C, 40, starts)
    else:
        cand = run_starts(C, starts - 1) + [0]
    cand = list(dict.fromkeys(cand))
    for kind, r in resources:
        r_mask = 0 if r is None else 1 << r
        cover = AB & ~r_mask
        reserved = mask_of(v for e in r2_edges for v in e) if kind == "edge" else 0
        if branch == "linking2":
            try:
                gps = good_path_system(G, P, avoid=reserved | r_mask | mask_of(v for e in bridges for v in e),
                                       cover=cover)
            except NotFound as e:
                reasons.append(e.reason)
                continue
            demands = [path_demand(p, "good-path") for p in gps.paths]
            in_paths = gps.covered
        else:
            gps = None
            demands = [single(x, "AB-vertex") for x in bits(cover)]
            in_paths = 0
        demands += [single(x, "low-ST") for x in bits(lowST & ~in_paths & ~reserved)]
        demands += [edge_demand(u, v, "R1", required=False, bridge=True) for u, v in bridges]
        pools = {"A": 0, "B": 0, "S": S_hi & ~reserved & ~in_paths, "T": T_hi & ~reserved & ~in_paths}
        layout = Layout(G, {"A": P.A, "B": P.B, "S": P.S, "T": P.T}, ST_DENSE, pools, thr=max(3, n // 60))
        max_len = min(n - 8, 16 + 8 * len([d for d in demands if d.required]))
        for start in cand:
            dirs = pattern_dirs(C, start)

            def goal(stt, kind=kind, r=r):
                if stt.last != ("c", "T"):
                    return None
                RT, RS = P.t - stt.used["T"], P.s - stt.used["S"]
                if kind == "vertex":
                    q = stt.k + RT
                    if RT < 2 or RS < 2:
                        return None
                    need_in = G.in_adj[r] if dirs(q - 1) else G.out_adj[r]
                    need_out = G.out_adj[r] if dirs(q) else G.in_adj[r]
                    if (need_in & pools["T"]).bit_count() >= 2 and (need_out & pools["S"]).bit_count() >= 2:
                        return {"kind": "vertex", "r": r, "RT": RT, "RS": RS}
                    return None
                q = stt.k + RT - 1
                if RT < 2 or RS < 2:
                    return None
                for u, v in r2_edges:
                    t_, s_ = (u, v) if P.T >> u & 1 else (v, u)
                    if (G.has_arc(t_, s_) if dirs(q) else G.has_arc(s_, t_)):
                        return {"kind": "edge", "edge": (t_, s_), "RT": RT, "RS": RS}
                return None

            try:
                plan = plan_window(layout, dirs, ("c", "S"), demands, goal, max_len, ("S", "T"),
                                   budget=budget, track=("S", "T"), contexts=True, case=branch)
            except PlannerBudget as e:
                reasons.append(f"start {start}: {e.reason}")
                continue
            if plan is None:
                reasons.append(f"start {start} R2={kind}{'' if r is None else ' ' + str(r)}: no window")
                continue
            try:
                return _complete(G, P, C, layout, start, plan, branch, gps, reserved, r2_edges)
            except NotFound as e:
                reasons.append(f"start {start}: {e.reason}")
    raise NotFound(branch, "; ".join(reasons[:6]) or "no resources")


def _complete(G, P, C, layout, start, plan, branch, gps, reserved, r2_edges) -> LinkingST:
    n = G.n
    res = plan.extra
    k = len(plan.slots)
    RT, RS = res["RT"], res["RS"]
    slots = list(plan.slots)
    if res["kind"] == "vertex":
        r = res["r"]
        slots += ([("skip", RT - 1)] if RT > 1 else []) + [("m", layout.pools["T"]), ("v", r),
                                                           ("m", layout.pools["S"])]
        slots += [("skip", RS - 1)] if RS > 1 else []
        q = k + RT
        R2_pos = (q - 1, q, q + 1)
    else:
        t_, s_ = res["edge"]
        slots += ([("skip", RT - 1)] if RT > 1 else []) + [("v", t_), ("v", s_)]
        slots += [("skip", RS - 1)] if RS > 1 else []
        q = k + RT - 1
        R2_pos = (q, q + 1)
    dirs = pattern_dirs(C, start)
    if sum(s[1] if s[0] == "skip" else 1 for s in slots) != n:
        raise NotFound(branch, "window and runs do not add up to n positions")
    images = realize(layout, dirs, slots, case=branch)
    if images is None:
        raise NotFound(branch, "class slots could not be realised")
    placed = {v for v in images if v is not None}
    # T-run: from the last window slot to the vertex just before R2
    t0, t1 = k - 1, R2_pos[0]
    s0, s1 = R2_pos[-1], n          # S-run wraps around to the window start
    for X, a, b in (("T", t0, t1), ("S", s0, s1)):
        L = b - a + 1
        x = images[a]
        y = images[b % n]
        members = P.get(X) & ~mask_of(v for v in placed if v not in (x, y))
        if members.bit_count() != L:
            raise NotFound(branch, f"{X}-run expects {L} vertices, {members.bit_count()} remain")
        if L >= 3:
            seg_dirs = [dirs(a + i) for i in range(L - 1)]
            try:
                path = any_orientation_hamilton_path(G, x, y, seg_dirs, vertices=members, strict=False)
            except (HamiltonNotFound, PreconditionError) as e:
                raise NotFound(branch, f"Hamilton path in G[{X}] failed: {e}") from None
            for i, v in enumerate(path.vertices[:-1] if b == n else path.vertices):
                images[a + i] = v
            placed.update(path.vertices)
    if any(v is None for v in images):
        raise NotFound(branch, "unfilled positions remain")
    emb = Embedding(tuple(images[(-start + i) % n] for i in range(n)))
    # structural read-out: positions between R1 and R2 form the T-part
    labels = [P.label_of(v) for v in images]
    bridge_vs = {v for dm in plan.placed if dm.bridge for v in dm.vertices}
    r1_idx = [i for i in range(k) if images[i] in bridge_vs]
    if not r1_idx:
        raise NotFound(branch, "window has no S-to-T bridge")
    lo, hi = max(min(r1_idx) - 1, 0), min(max(r1_idx) + 1, k - 1)
    R1 = OrientedPath(tuple(images[lo:hi + 1]), tuple(dirs(i) for i in range(lo, hi)))
    R2 = OrientedPath(tuple(images[i] for i in R2_pos), tuple(dirs(i) for i in R2_pos[:-1]))
    T_pos = range(hi, R2_pos[0] + 1)
    T_star = mask_of(images[i] for i in T_pos)
    S_star = G.full & ~T_star & ~mask_of(R1.vertices[1:-1]) & ~mask_of(R2.vertices[1:-1])
    P_T = ((start + hi) % n, len(T_pos))
    P_S = ((start + R2_pos[-1]) % n, n - len(T_pos) - (len(R1) - 1) - (len(R2) - 1))
    assert P_T[1] == T_star.bit_count()
    assert P_S[1] == S_star.bit_count()
    ppart = p_partition(P, gps) if gps is not None else None
    info = {"sigma": sink_count(C), "window": k, "R2_kind": res["kind"],
            "class_sequence_window": "".join(labels[:k])}
    if ppart is not None:
        info["t_star"] = ppart.sizes["T"]
    return LinkingST(branch, S_star, T_star, R1, R2, P_S, P_T, gps, ppart, emb, info)
