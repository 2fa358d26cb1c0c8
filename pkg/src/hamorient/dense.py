"""Hamilton cycles and paths in dense graphs.

Undirected graphs are given either as a networkx Graph or as a sequence of
neighbour bitmasks indexed by vertex.  Cycles are found constructively by
path extension, cycle closing and Posa rotations, with an exact subset
dynamic programme as a fallback below 16 vertices.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Sequence

import networkx as nx

from .digraph import Digraph, OrientedPath, bits, lowest, mask_of

EXACT_LIMIT = 16
ROTATION_BUDGET = 4000


class PreconditionError(ValueError):
    """Raised when the degree hypothesis of a routine is not met."""


class HamiltonNotFound(RuntimeError):
    pass


# ----------------------------------------------------------- plumbing

def _to_masks(H) -> tuple[list, list[int], int]:
    """Return (labels, adjacency masks over indices, vertex mask)."""
    if isinstance(H, nx.Graph):
        labels = sorted(H.nodes)
        idx = {v: i for i, v in enumerate(labels)}
        adj = [0] * len(labels)
        for u, v in H.edges:
            if u != v:
                adj[idx[u]] |= 1 << idx[v]
                adj[idx[v]] |= 1 << idx[u]
        return labels, adj, (1 << len(labels)) - 1
    adj = list(H)
    for u, m in enumerate(adj):
        for v in bits(m):
            if not adj[v] >> u & 1:
                raise ValueError(f"adjacency is not symmetric at {u}-{v}")
    return list(range(len(adj))), adj, (1 << len(adj)) - 1


def _min_degree(adj: Sequence[int], V: int) -> int:
    return min((adj[v] & V).bit_count() for v in bits(V))


def _is_cycle(adj: Sequence[int], cyc: Sequence[int], V: int) -> bool:
    if mask_of(cyc) != V or len(cyc) != V.bit_count() or len(cyc) < 3:
        return False
    return all(adj[cyc[i]] >> cyc[(i + 1) % len(cyc)] & 1 for i in range(len(cyc)))


# ------------------------------------------------- rotation-extension

def _close(path: list[int], adj: Sequence[int]) -> list[int] | None:
    u, v = path[0], path[-1]
    if len(path) >= 3 and adj[u] >> v & 1:
        return path
    for i in range(len(path) - 1):
        if adj[u] >> path[i + 1] & 1 and adj[v] >> path[i] & 1:
            return path[: i + 1] + path[:i:-1]
    return None


def _rotate_search(path: list[int], adj: Sequence[int], V: int, budget: int):
    """Posa rotations with the start fixed, breadth first.

    Returns ("extend", path) when some rotation has an end with a neighbour
    off the path, ("close", cycle) when some rotation closes, else None.
    """
    seen = {path[-1]}
    queue = deque([path])
    on = mask_of(path)
    steps = 0
    while queue and steps < budget:
        p = queue.popleft()
        steps += 1
        end = p[-1]
        if adj[end] & V & ~on:
            return "extend", p
        c = _close(p, adj)
        if c is not None:
            return "close", c
        pos = {v: i for i, v in enumerate(p)}
        for w in bits(adj[end] & on):
            i = pos[w]
            if i >= len(p) - 2:
                continue
            q = p[: i + 1] + p[:i:-1]
            if q[-1] not in seen:
                seen.add(q[-1])
                queue.append(q)
    return None


def _rotation_extension(adj: Sequence[int], V: int, budget: int = ROTATION_BUDGET) -> list[int] | None:
    k = V.bit_count()
    if k < 3:
        return None
    path = [lowest(V)]
    on = V & -V
    while True:
        for _ in range(2):
            while True:
                ext = adj[path[-1]] & V & ~on
                if not ext:
                    break
                w = lowest(ext)
                path.append(w)
                on |= 1 << w
            path.reverse()
        cyc = _close(path, adj) if len(path) >= 3 else None
        if cyc is None:
            got = _rotate_search(path, adj, V, budget)
            if got is None:
                path.reverse()
                got = _rotate_search(path, adj, V, budget)
            if got is None:
                return None
            kind, obj = got
            if kind == "extend":
                path = obj
                continue
            cyc = obj
        if len(cyc) == k:
            return cyc
        for j, c in enumerate(cyc):
            out = adj[c] & V & ~on
            if out:
                w = lowest(out)
                path = cyc[j + 1:] + cyc[: j + 1] + [w]
                on |= 1 << w
                break
        else:
            return None  # disconnected


def _exact_cycle(adj: Sequence[int], V: int) -> list[int] | None:
    """Held-Karp style search over subsets containing the lowest vertex."""
    verts = list(bits(V))
    k = len(verts)
    if k < 3:
        return None
    idx = {v: i for i, v in enumerate(verts)}
    nb = [sum(1 << idx[w] for w in bits(adj[v] & V)) for v in verts]
    full = (1 << k) - 1
    # reach[S] = bitmask of end vertices j such that a path 0 -> j covers S
    reach = [0] * (1 << k)
    reach[1] = 1
    for S in range(1, 1 << k):
        if not S & 1 or not reach[S]:
            continue
        for j in bits(reach[S]):
            for w in bits(nb[j] & ~S):
                reach[S | 1 << w] |= 1 << w
    ends = reach[full] & nb[0]
    if not ends:
        return None
    j = lowest(ends)
    S = full
    order = [j]
    while S != 1:
        S2 = S & ~(1 << j)
        prev = reach[S2] & nb[j]
        j = lowest(prev)
        order.append(j)
        S = S2
    return [verts[i] for i in reversed(order)]


def _hamilton_cycle(adj: Sequence[int], V: int) -> list[int] | None:
    cyc = _rotation_extension(adj, V)
    if cyc is None and V.bit_count() < EXACT_LIMIT:
        cyc = _exact_cycle(adj, V)
    if cyc is not None and not _is_cycle(adj, cyc, V):
        raise AssertionError("internal error: produced cycle does not validate")
    return cyc


# ------------------------------------------------------------- cycles

def dirac_hamilton_cycle(H, strict: bool = True) -> list:
    """Hamilton cycle of an undirected graph with minimum degree >= |H|/2."""
    labels, adj, V = _to_masks(H)
    k = len(labels)
    if k < 3:
        raise PreconditionError("a Hamilton cycle needs at least 3 vertices")
    delta = _min_degree(adj, V)
    if strict and 2 * delta < k:
        raise PreconditionError(f"minimum degree {delta} < {k}/2")
    cyc = _hamilton_cycle(adj, V)
    if cyc is None:
        raise HamiltonNotFound(f"no Hamilton cycle found (min degree {delta}, n={k})")
    return [labels[i] for i in cyc]


def moon_moser_cycle(H, X: Sequence | None = None, Y: Sequence | None = None, strict: bool = True) -> list:
    """Hamilton cycle of a balanced bipartite graph with minimum degree >= m/2 + 1."""
    if X is None or Y is None:
        if not isinstance(H, nx.Graph):
            raise ValueError("class lists are required for mask input")
        X, Y = nx.bipartite.sets(H)
    labels, adj, V = _to_masks(H)
    idx = {v: i for i, v in enumerate(labels)}
    Xm, Ym = mask_of(idx[v] for v in X), mask_of(idx[v] for v in Y)
    if Xm & Ym or (Xm | Ym) != V:
        raise ValueError("X and Y must partition the vertex set")
    m = Xm.bit_count()
    if Ym.bit_count() != m:
        raise PreconditionError(f"classes have sizes {m} and {Ym.bit_count()}")
    if any(adj[v] & Xm for v in bits(Xm)) or any(adj[v] & Ym for v in bits(Ym)):
        raise ValueError("graph has an edge inside a class")
    if m < 2:
        raise PreconditionError("classes need at least 2 vertices")
    delta = _min_degree(adj, V)
    if strict and 2 * delta < m + 2:
        raise PreconditionError(f"minimum degree {delta} < {m}/2 + 1")
    cyc = _hamilton_cycle(adj, V)
    if cyc is None:
        raise HamiltonNotFound(f"no Hamilton cycle found (min degree {delta}, classes {m})")
    return [labels[i] for i in cyc]


# ------------------------------------------------ any-orientation paths

def _orient(G: Digraph, vertices: list[int], dirs: Sequence[bool]) -> OrientedPath:
    P = OrientedPath(tuple(vertices), tuple(bool(d) for d in dirs))
    if not P.is_valid(G):
        raise AssertionError("internal error: oriented path does not validate")
    return P


def _path_search(G: Digraph, V: int, x: int, y: int, dirs: Sequence[bool], budget: int) -> list[int] | None:
    """Backtracking for an oriented Hamilton path of G[V] from x to y."""
    k = V.bit_count()
    out, inn = G.out_adj, G.in_adj
    path = [x]
    count = [0]

    def step(i: int, used: int) -> bool:
        count[0] += 1
        if count[0] > budget:
            return False
        last = path[-1]
        cand = (out[last] if dirs[i] else inn[last]) & V & ~used
        if i == k - 2:
            if cand >> y & 1:
                path.append(y)
                return True
            return False
        cand &= ~(1 << y)
        for w in bits(cand):
            path.append(w)
            if step(i + 1, used | 1 << w):
                return True
            path.pop()
        return False

    if k == 1:
        return [x] if x == y else None
    return path if step(0, (1 << x) | (1 << y)) else None


def _contract_path(adj: list[int], V: int, x: int, y: int, cycle_fn) -> list[int] | None:
    """Contract x,y onto x (neighbourhood N(x) & N(y)), find a cycle, lift it."""
    V2 = V & ~(1 << y)
    adj2 = list(adj)
    common = adj[x] & adj[y] & V2 & ~(1 << x)
    for v in bits(V2):
        adj2[v] &= ~(1 << y)
        if v != x:
            adj2[v] = (adj2[v] & ~(1 << x)) | ((1 << x) if common >> v & 1 else 0)
    adj2[x] = common
    cyc = cycle_fn(adj2, V2)
    if cyc is None:
        return None
    i = cyc.index(x)
    cyc = cyc[i:] + cyc[:i]
    return cyc + [y]


def any_orientation_hamilton_path(G: Digraph, x: int, y: int, dirs: Sequence[bool],
                                  vertices: int | None = None, strict: bool = True,
                                  budget: int = 200_000) -> OrientedPath:
    """Hamilton path of G[vertices] from x to y with the given orientation.

    Requires semidegree at least 7m/8 inside the vertex set (m vertices).
    The path only uses digons, so every orientation is available.  With
    strict=False the degree check is skipped and, if the digon route fails,
    a bounded backtracking search over the arcs is tried.
    """
    V = G.full if vertices is None else vertices
    m = V.bit_count()
    if not (V >> x & 1 and V >> y & 1):
        raise ValueError("endpoints must lie in the vertex set")
    if x == y:
        raise PreconditionError("endpoints must differ")
    if len(dirs) != m - 1:
        raise ValueError(f"need {m - 1} directions, got {len(dirs)}")
    delta = min(min((G.out_adj[v] & V).bit_count(), (G.in_adj[v] & V).bit_count()) for v in bits(V))
    if strict and 8 * delta < 7 * m:
        raise PreconditionError(f"semidegree {delta} < 7*{m}/8")
    dig = [o & i for o, i in zip(G.out_adj, G.in_adj)]
    verts = None
    if m == 2:
        verts = [x, y]
    elif m >= 4 or (m == 3 and dig[x] & dig[y] & V):
        verts = _contract_path(dig, V, x, y, _hamilton_cycle)
    if verts is not None and m == 2 and not (G.has_arc(x, y) if dirs[0] else G.has_arc(y, x)):
        verts = None
    if verts is None:
        if strict and m >= 4:
            raise HamiltonNotFound("contracted digon graph has no Hamilton cycle")
        verts = _path_search(G, V, x, y, dirs, budget)
        if verts is None:
            raise HamiltonNotFound(f"no oriented Hamilton path from {x} to {y} on {m} vertices")
    return _orient(G, verts, dirs)


def any_orientation_hamilton_path_bipartite(G: Digraph, A: int, B: int, x: int, y: int,
                                            dirs: Sequence[bool], strict: bool = True,
                                            budget: int = 200_000) -> OrientedPath:
    """Hamilton path of G[A, B] from x to y (both in A) with the given orientation.

    Needs |A| = m + 1, |B| = m, m >= 10 and semidegree in the bipartite
    subdigraph at least (7m + 2)/8.
    """
    if A & B:
        raise ValueError("classes overlap")
    m = B.bit_count()
    if A.bit_count() != m + 1:
        raise PreconditionError(f"class sizes {A.bit_count()} and {m} are not m+1 and m")
    if not (A >> x & 1 and A >> y & 1):
        raise PreconditionError("x and y must lie in the larger class")
    if x == y:
        raise PreconditionError("endpoints must differ")
    if len(dirs) != 2 * m:
        raise ValueError(f"need {2 * m} directions, got {len(dirs)}")
    if strict and m < 10:
        raise PreconditionError(f"m={m} < 10")
    delta = bipartite_semidegree(G, A, B)
    if strict and Fraction(delta) < Fraction(7 * m + 2, 8):
        raise PreconditionError(f"semidegree {delta} < (7*{m}+2)/8")
    V = A | B
    dig = [(o & i) & (B if A >> v & 1 else A if B >> v & 1 else 0)
           for v, (o, i) in enumerate(zip(G.out_adj, G.in_adj))]
    verts = _contract_path(dig, V, x, y, _hamilton_cycle) if m >= 1 else None
    if verts is None:
        if strict:
            raise HamiltonNotFound("contracted bipartite digon graph has no Hamilton cycle")
        H = _cross_only(G, A, B)
        verts = _path_search(H, V, x, y, dirs, budget)
        if verts is None:
            raise HamiltonNotFound(f"no oriented bipartite Hamilton path from {x} to {y}")
    return _orient(G, verts, dirs)


def bipartite_semidegree(G: Digraph, A: int, B: int) -> int:
    """Semidegree of the bipartite subdigraph G[A, B] (cross arcs only)."""
    vals = []
    for v in bits(A | B):
        other = B if A >> v & 1 else A
        vals.append(min((G.out_adj[v] & other).bit_count(), (G.in_adj[v] & other).bit_count()))
    return min(vals)


def _cross_only(G: Digraph, A: int, B: int) -> Digraph:
    out = []
    for v in range(G.n):
        other = B if A >> v & 1 else A if B >> v & 1 else 0
        out.append(G.out_adj[v] & other)
    return Digraph(G.n, out)
