"""Instance factories: extremal families, certified synthetic instances, random digraphs."""

from __future__ import annotations

import itertools
import math
import random
from importlib import resources
from typing import Iterator

import numpy as np

from .digraph import CyclePattern, Digraph, complete_digraph, mask_of, min_semidegree
from .oracle import oracle_embed
from .structure import (DESK, PROFILES, BudgetExhausted, ConstantsProfile, VertexPartition,
                        certify_partition)


# ---------------------------------------------------------------- families

def two_cliques(n: int) -> Digraph:
    if n % 2 or n < 4:
        raise ValueError("two_cliques needs an even n >= 4")
    h = n // 2
    return Digraph.from_arcs(n, ((u, v) for u in range(n) for v in range(n)
                                 if u != v and (u < h) == (v < h)))


def complete(n: int) -> Digraph:
    return complete_digraph(n)


def two_cliques_matching(n: int) -> tuple[Digraph, VertexPartition]:
    """Two complete digraphs on n/2 vertices joined by the digons i <-> n/2 + i."""
    if n % 2 or n < 4:
        raise ValueError("n must be even and at least 4")
    h = n // 2
    out = []
    for v in range(n):
        block = ((1 << h) - 1) << (h if v >= h else 0)
        partner = v + h if v < h else v - h
        out.append((block & ~(1 << v)) | 1 << partner)
    G = Digraph(n, out)
    P = VertexPartition(n, 0, 0, (1 << h) - 1, ((1 << h) - 1) << h)
    return G, P


def complete_bipartite_digraph(n: int) -> Digraph:
    if n < 4:
        raise ValueError("n >= 4 required")
    h = n // 2
    return Digraph.from_arcs(n, ((u, v) for u in range(n) for v in range(n) if (u < h) != (v < h)))


def directed_cycle(n: int) -> Digraph:
    return Digraph.from_arcs(n, ((i, (i + 1) % n) for i in range(n)))


def _read_resource(name: str) -> str | None:
    try:
        return resources.files("hamorient.resources").joinpath(name).read_text()
    except FileNotFoundError:
        return None


def f_family_classes(m: int) -> tuple[list[int], list[int]]:
    """The independent classes A, B of the shipped F-family resources."""
    return list(range(m - 1)), list(range(m - 1, 2 * m - 2))


def f_family(variant: int, m: int, verify: bool | None = None) -> Digraph:
    """Load F^variant_{2m} from its edge-list resource and check the caption constraints.

    The antidirected check runs the oracle, so by default it is done only for m <= 5.
    """
    if variant not in (1, 2) or m < 2:
        raise ValueError("variant must be 1 or 2 and m >= 2")
    text = _read_resource(f"f{variant}_m{m}.dg")
    if text is None:
        raise FileNotFoundError(f"no resource for F{variant} with m={m}")
    if f"# family f{variant} m={m}" not in text.splitlines():
        raise ValueError("resource header does not match the request")
    G = Digraph.from_text(text)
    A, B = f_family_classes(m)
    if G.n != 2 * m or min_semidegree(G) != m:
        raise AssertionError(f"F{variant}_{2 * m}: semidegree is not m")
    for X in (A, B):
        if any(G.has_arc(u, v) for u in X for v in X):
            raise AssertionError(f"F{variant}_{2 * m}: class {X} is not independent")
    if verify if verify is not None else m <= 5:
        if oracle_embed(G, CyclePattern("FB" * m)) is not None:
            raise AssertionError(f"F{variant}_{2 * m} has an antidirected Hamilton cycle")
    return G


def f_family_arcs(variant: int, m: int) -> list[tuple[int, int]]:
    """Block description used to write the resource files.

    A, B independent of size m-1 with all arcs between them both ways; x, y
    the two remaining vertices.
    """
    A, B = f_family_classes(m)
    x, y = 2 * m - 2, 2 * m - 1
    arcs = [(u, v) for u in A for v in B] + [(v, u) for u in A for v in B]
    if variant == 1:
        arcs += [(u, x) for u in A] + [(x, v) for v in B] + [(v, y) for v in B] + [(y, u) for u in A]
        arcs += [(x, y), (y, x)]
    else:
        arcs += [(v, x) for v in B] + [(x, u) for u in A] + [(u, y) for u in A] + [(y, v) for v in B]
        arcs += [(x, y), (A[0], x), (y, A[0])]
    return sorted(set(arcs))


def canonical_arcs(G: Digraph) -> tuple[tuple[int, int], ...]:
    """Lexicographically least relabelled arc list (brute force, tiny n only)."""
    arcs = G.arcs()
    best = None
    for p in itertools.permutations(range(G.n)):
        key = tuple(sorted((p[u], p[v]) for u, v in arcs))
        if best is None or key < best:
            best = key
    return best


def search_antidirected_obstructions(m: int, budget: int = 2_000_000) -> Iterator[Digraph]:
    """All 2m-vertex digraphs with semidegree >= m and no antidirected Hamilton cycle.

    Out-neighbourhoods are assigned vertex by vertex with non-increasing
    out-degree (every digraph has such a labelling), pruning on reachable
    in-degree.  Results are deduplicated up to isomorphism.
    """
    if m < 2 or 2 * m > 8:
        raise ValueError("census supports 2 <= m <= 4")
    n = 2 * m
    C = CyclePattern("FB" * m)
    choices = []
    for v in range(n):
        others = [u for u in range(n) if u != v]
        cs = [mask_of(c) for k in range(n - 1, m - 1, -1) for c in itertools.combinations(others, k)]
        choices.append(cs)
    out = [0] * n
    indeg = [0] * n
    seen: dict[tuple, Digraph] = {}
    leaves = 0

    def rec(v: int, maxdeg: int):
        nonlocal leaves
        if v == n:
            leaves += 1
            if leaves > budget:
                raise BudgetExhausted(f"census for m={m} exceeded {budget} leaves")
            if min(indeg) < m:
                return
            G = Digraph(n, out)
            if oracle_embed(G, C) is None:
                key = canonical_arcs(G)
                if key not in seen:
                    seen[key] = Digraph.from_arcs(n, key)
            return
        later = n - v - 1
        for c in choices[v]:
            if c.bit_count() > maxdeg:
                continue
            if any(indeg[u] + (c >> u & 1) + later - (1 if u > v else 0) < m for u in range(n)):
                continue
            out[v] = c
            for u in range(n):
                indeg[u] += c >> u & 1
            rec(v + 1, c.bit_count())
            for u in range(n):
                indeg[u] -= c >> u & 1

    rec(0, n - 1)
    for key in sorted(seen):
        yield seen[key]


def random_min_semidegree(n: int, delta: int, seed: int = 0, p: float = 0.5) -> Digraph:
    """Random arcs with probability p, then lowest-id repair up to semidegree delta."""
    if not (0 <= delta <= n - 1):
        raise ValueError("need 0 <= delta <= n-1")
    rng = random.Random(seed)
    out = [0] * n
    for u in range(n):
        for v in range(n):
            if u != v and rng.random() < p:
                out[u] |= 1 << v
    for v in range(n):
        w = 0
        while out[v].bit_count() < delta:
            if w != v and not out[v] >> w & 1:
                out[v] |= 1 << w
            w += 1
    indeg = [0] * n
    for u in range(n):
        for v in range(n):
            indeg[v] += out[u] >> v & 1
    for v in range(n):
        w = 0
        while indeg[v] < delta:
            if w != v and not out[w] >> v & 1:
                out[w] |= 1 << v
                indeg[v] += 1
            w += 1
    G = Digraph(n, out)
    assert min_semidegree(G) >= delta
    return G


# ------------------------------------------------------ synthetic extremal

class _Builder:
    """Block-structured adjacency matrix with degree-aware noise."""

    def __init__(self, n: int, sizes: dict[str, int], seed: int):
        self.n = n
        self.rng = np.random.default_rng(seed)
        self.M = np.zeros((n, n), dtype=bool)
        start = 0
        self.idx: dict[str, np.ndarray] = {}
        for lab in ("A", "B", "S", "T"):
            self.idx[lab] = np.arange(start, start + sizes.get(lab, 0))
            start += sizes.get(lab, 0)
        assert start == n

    def full(self, X: str, Y: str):
        self.M[np.ix_(self.idx[X], self.idx[Y])] = True
        np.fill_diagonal(self.M, False)

    def circulant(self, X: str, Y: str, k: int, shift: int = 0):
        """Each vertex of X gets k consecutive out-neighbours in Y (cyclically)."""
        xs, ys = self.idx[X], self.idx[Y]
        if len(ys) == 0 or k <= 0:
            return
        for i, u in enumerate(xs):
            j, added = i + shift, 0
            while added < min(k, len(ys) - (1 if X == Y else 0)):
                v = ys[j % len(ys)]
                j += 1
                if u != v and not self.M[u, v]:
                    self.M[u, v] = True
                    added += 1
                elif u != v:
                    added += 1

    def sprinkle(self, X: str, Y: str, prob: float, cap_in: int | None = None, cap_out: int | None = None):
        xs, ys = self.idx[X], self.idx[Y]
        if not len(xs) or not len(ys) or prob <= 0:
            return
        R = self.rng.random((len(xs), len(ys))) < prob
        for i, j in zip(*np.nonzero(R)):
            u, v = xs[i], ys[j]
            if u == v or self.M[u, v]:
                continue
            if cap_out is not None and self.M[u, ys].sum() >= cap_out:
                continue
            if cap_in is not None and self.M[xs, v].sum() >= cap_in:
                continue
            self.M[u, v] = True

    def thin(self, X: str, Y: str, prob: float, floor: int, per_vertex: int):
        """Delete X->Y arcs at random while every degree stays >= floor."""
        xs, ys = self.idx[X], self.idx[Y]
        if not len(xs) or not len(ys) or prob <= 0:
            return
        lost_out = np.zeros(self.n, dtype=int)
        lost_in = np.zeros(self.n, dtype=int)
        R = self.rng.random((len(xs), len(ys))) < prob
        outd = self.M.sum(axis=1)
        ind = self.M.sum(axis=0)
        for i, j in zip(*np.nonzero(R)):
            u, v = xs[i], ys[j]
            if not self.M[u, v] or outd[u] <= floor or ind[v] <= floor:
                continue
            if lost_out[u] >= per_vertex or lost_in[v] >= per_vertex:
                continue
            self.M[u, v] = False
            outd[u] -= 1
            ind[v] -= 1
            lost_out[u] += 1
            lost_in[v] += 1

    def repair(self, pools: dict[str, tuple[str, ...]], in_pools: dict[str, tuple[str, ...]], need: int):
        """Raise every out-/in-degree to `need` using arcs from the given pools."""
        for lab, targets in pools.items():
            cand = np.concatenate([self.idx[t] for t in targets]) if targets else np.array([], int)
            for u in self.idx[lab]:
                order = self.rng.permutation(cand)
                k = 0
                while self.M[u].sum() < need and k < len(order):
                    v = order[k]
                    k += 1
                    if v != u:
                        self.M[u, v] = True
        for lab, sources in in_pools.items():
            cand = np.concatenate([self.idx[s] for s in sources]) if sources else np.array([], int)
            for v in self.idx[lab]:
                order = self.rng.permutation(cand)
                k = 0
                while self.M[:, v].sum() < need and k < len(order):
                    u = order[k]
                    k += 1
                    if u != v:
                        self.M[u, v] = True

    def result(self) -> tuple[Digraph, VertexPartition]:
        G = Digraph.from_matrix(self.M)
        P = VertexPartition(self.n, *(mask_of(self.idx[l].tolist()) for l in ("A", "B", "S", "T")))
        return G, P


def _finish(bld: _Builder, tag: str, profile: ConstantsProfile) -> tuple[Digraph, VertexPartition]:
    G, P = bld.result()
    n = G.n
    if 2 * min_semidegree(G) < n:
        raise RuntimeError(f"synthetic {tag}: semidegree {min_semidegree(G)} < n/2")
    cert = certify_partition(G, P, tag, profile)
    if not cert.passed:
        raise RuntimeError(f"synthetic {tag} failed clauses {cert.failed()} under profile {profile.name}")
    return G, P


def synthetic_ST(n: int, profile: ConstantsProfile = DESK, seed: int = 0,
                 ab: tuple[int, int] | None = None, low: int | None = None) -> tuple[Digraph, VertexPartition]:
    """Two dense halves S, T plus a few exceptional vertices in A (T->A->S) and B (S->B->T)."""
    rng = random.Random(seed)
    e3 = profile.F("eps3") * n
    if ab is None:
        a = rng.randint(0, 2)
        b = rng.randint(a, a + 2)
    else:
        a, b = ab
    if a + b > e3 or a > b:
        raise ValueError("unsatisfiable exceptional sizes")
    s = (n - a - b) // 2
    t = n - a - b - s
    if n < 40:
        raise ValueError("synthetic_ST needs n >= 40")
    need = math.ceil(n / 2)
    bld = _Builder(n, {"A": a, "B": b, "S": s, "T": t}, seed)
    for X, Y in (("S", "S"), ("T", "T"), ("A", "S"), ("T", "A"), ("S", "B"), ("B", "T")):
        bld.full(X, Y)
    # cross arcs so that every S and T vertex reaches n/2 both ways
    k_st = max(need - (s - 1) - b, need - (s - 1) - a, need - (t - 1) - a, need - (t - 1) - b, 1)
    bld.circulant("S", "T", k_st)
    bld.circulant("T", "S", k_st, shift=1)
    # exceptional vertices also need n/2 each way: extra arcs to the wrong half
    bld.repair({"A": ("T", "B"), "B": ("S", "A")}, {"A": ("S", "B"), "B": ("T", "A")}, need)
    floor = need
    bld.thin("S", "S", 0.03, floor, max(1, n // 50))
    bld.thin("T", "T", 0.03, floor, max(1, n // 50))
    nlow = low if low is not None else min(2, int(e3) // 4)
    keep = math.ceil(n / 2 - e3) - 1  # just below the typical-degree threshold
    for k in range(nlow):
        # a low-degree vertex of S trades part of its S arcs for a small block of T arcs
        u = int(bld.idx["S"][k])
        inside = [int(v) for v in bld.idx["S"] if v != u]
        drop = inside[keep:]
        Ts = [int(v) for v in bld.idx["T"]]
        width = need - keep
        extra = [Ts[(k * width + j) % len(Ts)] for j in range(width)]
        bld.M[u, drop] = False
        bld.M[drop, u] = False
        bld.M[u, extra] = True
        bld.M[extra, u] = True
    # partners that lost an arc to a low vertex are topped up inside their half
    bld.repair({"S": ("S",), "T": ("T",)}, {"S": ("S",), "T": ("T",)}, need)
    return _finish(bld, "STExtremal", profile)


def synthetic_AB(n: int, profile: ConstantsProfile = DESK, seed: int = 0,
                 d: int | None = None, st: tuple[int, int] | None = None,
                 low: int | None = None, side_arcs: bool | None = None) -> tuple[Digraph, VertexPartition]:
    """Near-complete bipartite A<->B with few S (A->S->B) and T (B->T->A) vertices; b - a = d."""
    rng = random.Random(seed)
    e3 = profile.F("eps3") * n
    if st is None:
        s = rng.randint(0, 3)
        t = rng.randint(s, s + 3)
    else:
        s, t = st
    if d is None:
        d = rng.randint(0, 2)
    if (n - s - t - d) % 2:
        t += 1
    if s + t > e3 or s > t:
        raise ValueError("unsatisfiable S/T sizes")
    a = (n - s - t - d) // 2
    b = a + d
    if n < 60:
        raise ValueError("synthetic_AB needs n >= 60")
    need = math.ceil(n / 2)
    bld = _Builder(n, {"A": a, "B": b, "S": s, "T": t}, seed)
    for X, Y in (("A", "B"), ("B", "A"), ("A", "S"), ("S", "B"), ("B", "T"), ("T", "A"),
                 ("S", "S"), ("T", "T"), ("S", "T"), ("T", "S")):
        bld.full(X, Y)
    cap = math.ceil(n / 20) - 1  # Q8 keeps these strictly below n/20
    kB = max(need - (a + t), need - (a + s), 0)
    bld.circulant("B", "B", kB)
    bld.repair({"A": ("T", "A"), "T": ("B",)}, {"A": ("S", "A"), "S": ("B",)}, need)
    if side_arcs if side_arcs is not None else rng.random() < 0.5:
        bld.sprinkle("S", "A", 0.02)
        bld.sprinkle("A", "T", 0.02)
    bld.sprinkle("A", "A", 0.005)
    bld.thin("A", "B", 0.01, need, max(1, n // 100))
    bld.thin("B", "A", 0.01, need, max(1, n // 100))
    nlow = low if low is not None else min(2, int(e3) // 4)
    keep = math.ceil(n / 2 - e3) - 1
    for k in range(nlow):
        # low-degree A vertex: keeps just under the typical B-degree, topped up inside A
        u = int(bld.idx["A"][k])
        Bs = [int(v) for v in bld.idx["B"]]
        drop = Bs[keep:]
        bld.M[u, drop] = False
        bld.M[drop, u] = False
        As = [int(v) for v in bld.idx["A"] if v != u]
        width = need - keep
        extra = [As[(k * width + j) % len(As)] for j in range(width)]
        bld.M[u, extra] = True
        bld.M[extra, u] = True
    # top-ups may hit arcs that already exist, so close any gap inside the class
    bld.repair({"A": ("A",)}, {"A": ("A",)}, need)
    # B vertices that lost an arc to a low vertex are topped up inside B (capped by Q8)
    bld.repair({"B": ("B",)}, {"B": ("B",)}, need)
    G, P = _finish(bld, "ABExtremal", profile)
    if d > 0:
        assert max(G.out_degree(v, P.B) for v in range(n) if P.B >> v & 1) <= cap
    return G, P


def synthetic_ABST(n: int, profile: ConstantsProfile = DESK, seed: int = 0) -> tuple[Digraph, VertexPartition]:
    """Four near-equal classes: A<->B, A->S->B, B->T->A, S and T dense, a sparse S<->T matching."""
    q, r = divmod(n, 4)
    sizes = {"A": q, "B": q + (1 if r >= 3 else 0), "S": q + (1 if r >= 2 else 0), "T": q + (1 if r >= 1 else 0)}
    tau_n = profile.F("tau") * n
    if min(sizes.values()) < tau_n or max(sizes["B"] - sizes["A"], sizes["T"] - sizes["S"]) > profile.F("eps1") * n:
        raise ValueError(f"n={n} cannot meet the ABST size clauses under profile {profile.name}")
    if n < 80:
        raise ValueError("synthetic_ABST needs n >= 80")
    need = math.ceil(n / 2)
    bld = _Builder(n, sizes, seed)
    for X, Y in (("A", "B"), ("B", "A"), ("A", "S"), ("S", "B"), ("S", "S"),
                 ("B", "T"), ("T", "A"), ("T", "T")):
        bld.full(X, Y)
    bld.circulant("S", "T", 1)
    bld.circulant("T", "S", 1, shift=1)
    bld.repair({"A": ("T",), "B": ("S",), "S": ("T",), "T": ("S",)},
               {"A": ("S",), "B": ("T",), "S": ("T",), "T": ("S",)}, need)
    bld.sprinkle("S", "T", 0.004)
    bld.sprinkle("T", "S", 0.004)
    bld.sprinkle("A", "T", 0.002)
    bld.sprinkle("B", "S", 0.002)
    c3 = profile.eps ** (1 / 3) * n
    per = max(0, int(c3 / 3))
    for X, Y in (("A", "B"), ("B", "A"), ("S", "S"), ("T", "T")):
        bld.thin(X, Y, 0.01, need, per)
    return _finish(bld, "ABSTExtremal", profile)


# ---------------------------------------------------------- by-name access

FAMILIES = ("two_cliques", "two_cliques_matching", "complete", "complete_bipartite", "f1", "f2", "random", "cycle",
            "synthetic_ST", "synthetic_AB", "synthetic_ABST")


def build_family(name: str, **params) -> Digraph:
    p = dict(params)
    if name == "two_cliques":
        return two_cliques(int(p["n"]))
    if name == "two_cliques_matching":
        return two_cliques_matching(int(p["n"]))[0]
    if name == "complete":
        return complete(int(p["n"]))
    if name == "complete_bipartite":
        return complete_bipartite_digraph(int(p["n"]))
    if name == "cycle":
        return directed_cycle(int(p["n"]))
    if name in ("f1", "f2"):
        return f_family(int(name[1]), int(p["m"]))
    if name == "random":
        n = int(p["n"])
        delta = int(p.get("delta", math.ceil(n / 2)))
        return random_min_semidegree(n, delta, int(p.get("seed", 0)), float(p.get("p", 0.5)))
    if name.startswith("synthetic_"):
        prof = p.get("profile", DESK)
        if isinstance(prof, str):
            prof = PROFILES[prof]
        fn = {"synthetic_ST": synthetic_ST, "synthetic_AB": synthetic_AB, "synthetic_ABST": synthetic_ABST}[name]
        return fn(int(p["n"]), prof, int(p.get("seed", 0)))[0]
    raise ValueError(f"unknown family {name!r}; known: {', '.join(FAMILIES)}")
