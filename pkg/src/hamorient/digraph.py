"""Digraphs, cycle orientation patterns, oriented paths and embeddings.

Vertex sets are Python ints used as bitmasks (bit v set means vertex v is in
the set).  Everything here is immutable once built.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

F = True  # forward: position i -> position i+1
B = False


def bits(mask: int) -> Iterator[int]:
    """Yield the members of a bitmask in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


class Digraph:
    """Directed graph on vertices 0..n-1; digons allowed, loops forbidden."""

    __slots__ = ("n", "out_adj", "in_adj", "__dict__")

    def __init__(self, n: int, out_adj: Sequence[int]):
        if n < 0 or len(out_adj) != n:
            raise ValueError("out_adj must have one mask per vertex")
        full = (1 << n) - 1
        ins = [0] * n
        for u, m in enumerate(out_adj):
            if m >> u & 1:
                raise ValueError(f"self-loop at {u}")
            if m & ~full:
                raise ValueError(f"arc from {u} leaves the vertex range")
            for v in bits(m):
                ins[v] |= 1 << u
        self.n = n
        self.out_adj = tuple(out_adj)
        self.in_adj = tuple(ins)

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[tuple[int, int]]) -> Digraph:
        out = [0] * n
        for u, v in arcs:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"arc {u}->{v} out of range")
            out[u] |= 1 << v
        return cls(n, out)

    @classmethod
    def from_matrix(cls, M: np.ndarray) -> Digraph:
        M = np.asarray(M, dtype=bool)
        n = M.shape[0]
        if n and M.diagonal().any():
            raise ValueError("self-loop in matrix")
        out = []
        for row in M:
            # little-endian bit order so that bit v corresponds to column v
            packed = np.packbits(row, bitorder="little").tobytes()
            out.append(int.from_bytes(packed, "little"))
        return cls(n, out)

    # -- queries --------------------------------------------------------

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def has_arc(self, u: int, v: int) -> bool:
        return bool(self.out_adj[u] >> v & 1)

    def out_degree(self, v: int, within: int | None = None) -> int:
        m = self.out_adj[v]
        return (m if within is None else m & within).bit_count()

    def in_degree(self, v: int, within: int | None = None) -> int:
        m = self.in_adj[v]
        return (m if within is None else m & within).bit_count()

    def semidegree(self, v: int, within: int | None = None) -> int:
        return min(self.out_degree(v, within), self.in_degree(v, within))

    def arcs(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in bits(self.out_adj[u])]

    def arc_count(self) -> int:
        return sum(m.bit_count() for m in self.out_adj)

    def count_arcs(self, X: int, Y: int) -> int:
        """e(X, Y): number of arcs from X to Y."""
        return sum((self.out_adj[u] & Y).bit_count() for u in bits(X))

    def reverse(self) -> Digraph:
        return Digraph(self.n, self.in_adj)

    def relabel(self, perm: Sequence[int]) -> Digraph:
        """Return the copy in which vertex v is renamed perm[v]."""
        return Digraph.from_arcs(self.n, ((perm[u], perm[v]) for u, v in self.arcs()))

    def digon_adj(self) -> tuple[int, ...]:
        return tuple(o & i for o, i in zip(self.out_adj, self.in_adj))

    @cached_property
    def matrix(self) -> np.ndarray:
        M = np.zeros((self.n, self.n), dtype=bool)
        for u, m in enumerate(self.out_adj):
            if m:
                raw = np.frombuffer(m.to_bytes((self.n + 7) // 8, "little"), dtype=np.uint8)
                M[u] = np.unpackbits(raw, bitorder="little")[: self.n].astype(bool)
        M.setflags(write=False)
        return M

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Digraph) and self.n == other.n and self.out_adj == other.out_adj

    def __hash__(self) -> int:
        return hash((self.n, self.out_adj))

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, arcs={self.arc_count()})"

    # -- text format ----------------------------------------------------

    def to_text(self, header: Sequence[str] = ()) -> str:
        lines = [f"# {h}" for h in header]
        lines += ["digraph v1", f"n {self.n}"]
        lines += [f"e {u} {v}" for u, v in self.arcs()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Digraph:
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if len(lines) < 2 or lines[0] != "digraph v1" or not lines[1].startswith("n "):
            raise ValueError("not a 'digraph v1' document")
        n = int(lines[1].split()[1])
        arcs = []
        for ln in lines[2:]:
            parts = ln.split()
            if len(parts) != 3 or parts[0] != "e":
                raise ValueError(f"bad arc line: {ln!r}")
            arcs.append((int(parts[1]), int(parts[2])))
        return cls.from_arcs(n, arcs)


def min_semidegree(G: Digraph) -> int:
    if G.n < 1:
        raise ValueError("empty digraph")
    return min(min(o.bit_count(), i.bit_count()) for o, i in zip(G.out_adj, G.in_adj))


def complete_digraph(n: int) -> Digraph:
    full = (1 << n) - 1
    return Digraph(n, [full ^ (1 << v) for v in range(n)])


class CyclePattern:
    """Orientation of the n-cycle: dirs[i] orients the edge {i, i+1 mod n}."""

    __slots__ = ("dirs",)

    def __init__(self, dirs: Sequence[bool] | str):
        if isinstance(dirs, str):
            if set(dirs) - {"F", "B"}:
                raise ValueError("pattern strings use only F and B")
            dirs = [c == "F" for c in dirs]
        if len(dirs) < 3:
            raise ValueError("a cycle pattern needs n >= 3")
        self.dirs: tuple[bool, ...] = tuple(bool(d) for d in dirs)

    @property
    def n(self) -> int:
        return len(self.dirs)

    def __len__(self) -> int:
        return len(self.dirs)

    def __str__(self) -> str:
        return "".join("F" if d else "B" for d in self.dirs)

    def __repr__(self) -> str:
        return f"CyclePattern({str(self)!r})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CyclePattern) and self.dirs == other.dirs

    def __hash__(self) -> int:
        return hash(self.dirs)

    def d(self, i: int) -> bool:
        return self.dirs[i % len(self.dirs)]

    def is_sink(self, p: int) -> bool:
        return self.d(p - 1) and not self.d(p)

    def is_source(self, p: int) -> bool:
        return not self.d(p - 1) and self.d(p)

    def sinks(self) -> list[int]:
        return [p for p in range(self.n) if self.is_sink(p)]

    def sources(self) -> list[int]:
        return [p for p in range(self.n) if self.is_source(p)]

    def is_consistent(self) -> bool:
        return len(set(self.dirs)) == 1

    def is_antidirected(self) -> bool:
        n = self.n
        return all(self.dirs[i] != self.dirs[(i + 1) % n] for i in range(n))

    def reversed(self) -> CyclePattern:
        """Flip the orientation of every edge (positions unchanged)."""
        return CyclePattern([not d for d in self.dirs])

    def reflected(self) -> CyclePattern:
        """Traverse the same oriented cycle backwards: position p becomes -p."""
        n = self.n
        return CyclePattern([not self.dirs[(-j - 1) % n] for j in range(n)])

    def rotated(self, k: int) -> CyclePattern:
        """Pattern whose position 0 is position k of self."""
        k %= self.n
        return CyclePattern(self.dirs[k:] + self.dirs[:k])


def sink_count(C: CyclePattern) -> int:
    n = C.n
    sinks = sum(1 for i in range(n) if C.dirs[i] and not C.dirs[(i + 1) % n])
    sources = sum(1 for i in range(n) if not C.dirs[i] and C.dirs[(i + 1) % n])
    assert sinks == sources
    return sinks


def cycle_distance(C: CyclePattern, i: int, j: int) -> int:
    n = C.n
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError("positions out of range")
    return (j - i) % n


@dataclass(frozen=True)
class OrientedPath:
    vertices: tuple[int, ...]
    dirs: tuple[bool, ...]

    def __post_init__(self):
        if len(self.dirs) != max(len(self.vertices) - 1, 0):
            raise ValueError("need one direction per consecutive pair")

    def __len__(self) -> int:
        return len(self.dirs)

    def is_valid(self, G: Digraph) -> bool:
        vs = self.vertices
        if len(set(vs)) != len(vs):
            return False
        for i, d in enumerate(self.dirs):
            u, v = (vs[i], vs[i + 1]) if d else (vs[i + 1], vs[i])
            if not G.has_arc(u, v):
                return False
        return True


@dataclass(frozen=True)
class Embedding:
    images: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.images)


@dataclass(frozen=True)
class PartialEmbedding:
    start_pos: int
    images: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.images)

    def positions(self, n: int) -> list[int]:
        return [(self.start_pos + k) % n for k in range(len(self.images))]

    @property
    def first(self) -> int:
        return self.images[0]

    @property
    def last(self) -> int:
        return self.images[-1]


def _steps_ok(G: Digraph, C: CyclePattern, start: int, images: Sequence[int], closed: bool) -> bool:
    n = C.n
    L = len(images)
    for k in range(L - 1 + (1 if closed else 0)):
        u, v = images[k], images[(k + 1) % L]
        if not (C.dirs[(start + k) % n] and G.has_arc(u, v) or not C.dirs[(start + k) % n] and G.has_arc(v, u)):
            return False
    return True


def validate_embedding(G: Digraph, C: CyclePattern, E: Embedding | Sequence[int]) -> bool:
    images = E.images if isinstance(E, Embedding) else tuple(E)
    if not (G.n == C.n == len(images)):
        raise ValueError(f"dimension mismatch: G has {G.n}, C has {C.n}, E has {len(images)}")
    if sorted(images) != list(range(G.n)):
        return False
    return _steps_ok(G, C, 0, images, closed=True)


def validate_partial(G: Digraph, C: CyclePattern, P: PartialEmbedding) -> bool:
    if G.n != C.n:
        raise ValueError("dimension mismatch between G and C")
    if len(P.images) > C.n or not (0 <= P.start_pos < C.n):
        raise ValueError("partial embedding interval exceeds the cycle")
    imgs = P.images
    if len(set(imgs)) != len(imgs) or any(not (0 <= v < G.n) for v in imgs):
        return False
    closed = len(imgs) == C.n
    return _steps_ok(G, C, P.start_pos, imgs, closed)
