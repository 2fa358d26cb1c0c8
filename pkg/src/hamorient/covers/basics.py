"""Exceptional covers, the rep(A)/rep(B) ledger and the matching constructions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from ..dense import PreconditionError
from ..digraph import CyclePattern, Digraph, PartialEmbedding, bits, validate_partial
from ..structure import VertexPartition
from .engine import NotFound, rep_counts

Arc = tuple[int, int]


def class_sequence(P: VertexPartition, images) -> str:
    return "".join(P.label_of(v) for v in images)


@dataclass
class ExceptionalCover:
    """A partial embedding covering S and T, with both ends in A and
    |A - V(P)| + 1 = |B - V(P)|."""

    cover: PartialEmbedding
    partition: VertexPartition
    case: str = ""
    bound: Fraction | None = None
    measure_name: str = "length"
    info: dict = field(default_factory=dict)

    @property
    def images(self) -> tuple[int, ...]:
        return self.cover.images

    @property
    def length(self) -> int:
        return len(self.cover.images) - 1

    @property
    def ab_usage(self) -> int:
        P = self.partition
        return sum(1 for v in self.images if (P.A | P.B) >> v & 1)

    @property
    def measure(self) -> int:
        return self.length if self.measure_name == "length" else self.ab_usage

    def class_sequence(self) -> str:
        return class_sequence(self.partition, self.images)

    def rep_counts(self) -> tuple[int, int]:
        return rep_counts(self.class_sequence())

    def ec_checks(self, G: Digraph | None = None, C: CyclePattern | None = None) -> dict[str, bool]:
        P = self.partition
        used = 0
        for v in self.images:
            used |= 1 << v
        ec1 = (P.S | P.T) & ~used == 0
        ec2 = bool(self.images) and P.A >> self.images[0] & 1 == 1 and P.A >> self.images[-1] & 1 == 1
        a_left = (P.A & ~used).bit_count()
        b_left = (P.B & ~used).bit_count()
        ec3 = a_left + 1 == b_left
        # the repeats identity, re-derived from the class sequence; it holds
        # whenever both ends lie in A
        rA, rB = self.rep_counts()
        repeats = (b_left - a_left) == (P.b - P.a - rB + rA + 1) if ec2 else False
        out = {"EC1": ec1, "EC2": ec2, "EC3": ec3, "repeats": repeats}
        if self.bound is not None:
            out["bound"] = self.measure <= self.bound
        if G is not None and C is not None:
            out["embedded"] = validate_partial(G, C, self.cover)
        return out

    def passed(self, G: Digraph | None = None, C: CyclePattern | None = None) -> bool:
        return all(self.ec_checks(G, C).values())

    def to_json(self, G: Digraph | None = None, C: CyclePattern | None = None) -> dict:
        rA, rB = self.rep_counts()
        d = {
            "start_pos": self.cover.start_pos,
            "images": list(self.images),
            "class_sequence": self.class_sequence(),
            "rep_A": rA,
            "rep_B": rB,
            "ec_checks": self.ec_checks(G, C),
            "case": self.case,
            self.measure_name: self.measure,
        }
        if self.bound is not None:
            d["bound"] = float(self.bound)
        if self.info:
            d["info"] = self.info
        return d


# ---------------------------------------------------------------- matchings

def _arcs_between(G: Digraph, X: int, Y: int) -> list[Arc]:
    return [(u, v) for u in bits(X) for v in bits(G.out_adj[u] & Y)]


def check_disjoint(edges: list[Arc]) -> bool:
    seen: set[int] = set()
    for u, v in edges:
        if u == v or u in seen or v in seen:
            return False
        seen.update((u, v))
    return True


def two_disjoint_st_edges(G: Digraph, P: VertexPartition, variant: str,
                          directions: tuple[str, str] = ("ST", "ST")) -> tuple[Arc, Arc]:
    """Two vertex-disjoint arcs from the family guaranteed by the variant.

    (i) needs a = b in {0, 1} and returns arcs between S and T in the
    requested directions ("ST" means S->T, "TS" means T->S); (ii) needs A
    empty and (iii) needs a = 1 <= b - 1; both return TS-arcs; (iv) returns
    arcs from E(S, T+A) + E(T, S+B).
    """
    a, b = P.a, P.b
    if variant == "i":
        if not (a == b and a in (0, 1)):
            raise PreconditionError(f"variant i needs a = b in {{0,1}}, got a={a}, b={b}")
        fam = {"ST": _arcs_between(G, P.S, P.T), "TS": _arcs_between(G, P.T, P.S)}
        for dname in directions:
            if dname not in fam:
                raise ValueError(f"direction must be ST or TS, got {dname!r}")
        first, second = fam[directions[0]], fam[directions[1]]
    elif variant in ("ii", "iii"):
        if variant == "ii" and a != 0:
            raise PreconditionError(f"variant ii needs A empty, got a={a}")
        if variant == "iii" and not (a == 1 and b >= 2):
            raise PreconditionError(f"variant iii needs a=1 and b>=2, got a={a}, b={b}")
        first = second = _arcs_between(G, P.T, P.S)
    elif variant == "iv":
        first = second = _arcs_between(G, P.S, P.T | P.A) + _arcs_between(G, P.T, P.S | P.B)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    for e1 in first:
        for e2 in second:
            if len({*e1, *e2}) == 4:
                return e1, e2
    raise NotFound(f"2edges-{variant}", "no two disjoint edges in the guaranteed family")


def check_dedges(P: VertexPartition, M: list[Arc], d: int, e_ts: int, G: Digraph | None = None) -> list[str]:
    """Independent checker for the d+1 edge collection; returns violations."""
    bad = []
    if len(M) != d + 1:
        bad.append(f"|M|={len(M)} != d+1={d + 1}")
    if len(set(M)) != len(M):
        bad.append("repeated edge")
    outside: list[int] = []
    tb: dict[int, int] = {}
    bs: dict[int, int] = {}
    for u, v in M:
        if G is not None and not G.has_arc(u, v):
            bad.append(f"{u}->{v} is not an arc")
        lu, lv = P.label_of(u), P.label_of(v)
        if not ((lu == "T" and lv in "SB") or (lu == "B" and lv == "S")):
            bad.append(f"{u}->{v} is a {lu}{lv}-edge, outside E(T,S+B)+E(B,S)")
            continue
        for x, lab in ((u, lu), (v, lv)):
            if lab != "B":
                outside.append(x)
        if lv == "B":
            tb[v] = tb.get(v, 0) + 1
        if lu == "B":
            bs[u] = bs.get(u, 0) + 1
    if len(outside) != len(set(outside)):
        bad.append("endvertices outside B are not distinct")
    if any(c > 1 for c in tb.values()):
        bad.append("a B-vertex ends two TB-edges")
    if any(c > 1 for c in bs.values()):
        bad.append("a B-vertex starts two BS-edges")
    if e_ts > 0 and not any(P.label_of(u) == "T" and P.label_of(v) == "S" for u, v in M):
        bad.append("e(T,S) > 0 but M has no TS-edge")
    return bad


def d_plus_one_matching(G: Digraph, P: VertexPartition, d: int) -> list[Arc]:
    """d+1 arcs in E(T, S+B) + E(B, S) via a maximum matching in the auxiliary
    bipartite graph between S' = S+B and T' = T+B."""
    if not (P.t >= P.s >= d + 2):
        raise PreconditionError(f"needs t >= s >= d+2, got t={P.t}, s={P.s}, d={d}")
    if P.b != P.a + d:
        raise PreconditionError(f"needs b = a + d, got b={P.b}, a={P.a}, d={d}")
    # Integer node labels (S' side x, T' side n + y): networkx iterates the
    # bipartite sides as sets, and tuple labels would make the result depend
    # on the string hash seed.
    n = G.n
    H = nx.Graph()
    left = list(bits(P.S | P.B))
    H.add_nodes_from(left, bipartite=0)
    H.add_nodes_from((n + y for y in bits(P.T | P.B)), bipartite=1)
    for y in bits(P.T):
        for x in bits(G.out_adj[y] & (P.S | P.B)):
            H.add_edge(x, n + y)
    for y in bits(P.B):
        for x in bits(G.out_adj[y] & P.S):
            H.add_edge(x, n + y)
    match = nx.bipartite.hopcroft_karp_matching(H, top_nodes=left)
    arcs = sorted((y - n, x) for x, y in match.items() if x < n)
    if len(arcs) < d + 1:
        raise NotFound("dedges", f"maximum matching has {len(arcs)} < d+1 = {d + 1} edges")
    ts = [(u, v) for u in bits(P.T) for v in bits(G.out_adj[u] & P.S)]
    M = arcs[: d + 1]
    if ts and not any(P.T >> u & 1 and P.S >> v & 1 for u, v in M):
        e = ts[0]
        rest = [f for f in arcs if not set(f) & set(e)]
        if len(rest) < d:
            raise NotFound("dedges", f"only {len(rest)} matching edges avoid the TS-edge, need d={d}")
        M = [e] + rest[:d]
    bad = check_dedges(P, M, d, len(ts), G)
    if bad:
        raise NotFound("dedges", "; ".join(bad))
    return M


def check_balance(G: Digraph, P: VertexPartition, M: list[Arc], d: int) -> list[str]:
    bad = []
    if len(M) != d + 2:
        bad.append(f"|M|={len(M)} != d+2={d + 2}")
    if not check_disjoint(M):
        bad.append("edges are not vertex-disjoint")
    for u, v in M:
        if not G.has_arc(u, v):
            bad.append(f"{u}->{v} is not an arc")
        if not ((P.B | P.T) >> u & 1 and P.B >> v & 1):
            bad.append(f"{u}->{v} is outside E(B+T, B)")
    return bad


def balance_matching(G: Digraph, P: VertexPartition, d: int) -> list[Arc]:
    """A matching of size d+2 in E(B+T, B): greedy first, exact maximum
    matching only when the greedy pass falls short."""
    if d <= 0:
        raise PreconditionError(f"needs d > 0, got d={d}")
    if P.b != P.a + d:
        raise PreconditionError(f"needs b = a + d, got b={P.b}, a={P.a}, d={d}")
    arcs = _arcs_between(G, P.B | P.T, P.B)
    M: list[Arc] = []
    seen = 0
    for u, v in arcs:
        if not (seen >> u & 1 or seen >> v & 1):
            M.append((u, v))
            seen |= 1 << u | 1 << v
            if len(M) == d + 2:
                break
    if len(M) < d + 2:
        H = nx.Graph()
        for u, v in arcs:
            if not H.has_edge(u, v):
                H.add_edge(u, v, arc=(u, v))
        mate = nx.max_weight_matching(H, maxcardinality=True)
        M = sorted(H.edges[u, v]["arc"] for u, v in mate)[: d + 2]
        if len(M) < d + 2:
            raise NotFound("balance", f"maximum matching in E(B+T,B) has {len(M)} < d+2 = {d + 2} edges")
    bad = check_balance(G, P, M, d)
    if bad:
        raise NotFound("balance", "; ".join(bad))
    return M
