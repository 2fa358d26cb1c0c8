"""Exact backtracking search for oriented Hamilton cycles at small n."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterator

from .digraph import CyclePattern, Digraph, Embedding, bits, validate_embedding

DEFAULT_LIMIT = 14


class OracleLimitExceeded(Exception):
    pass


@dataclass
class SearchStats:
    nodes: int = 0
    millis: float = 0.0


def oracle_embed(
    G: Digraph, C: CyclePattern, limit: int = DEFAULT_LIMIT, stats: SearchStats | None = None
) -> Embedding | None:
    """Return an embedding of C in G, or None when none exists.

    Position 0 is tried on every vertex in ascending order, and every later
    position is filled with the smallest admissible neighbour first, so the
    answer (and any NotFound proof) is reproducible.
    """
    n = G.n
    if C.n != n:
        raise ValueError(f"pattern length {C.n} differs from vertex count {n}")
    if n > limit:
        raise OracleLimitExceeded(f"n={n} exceeds oracle limit {limit}")
    stats = stats if stats is not None else SearchStats()
    t0 = time.perf_counter()
    out, inn, dirs = G.out_adj, G.in_adj, C.dirs
    nbr = [o | i for o, i in zip(out, inn)]
    images = [0] * n

    def feasible(unused: int, last: int, first: int) -> bool:
        # forward check: every unplaced vertex still needs two usable
        # neighbours, and the closing position needs a candidate
        close = (inn[first] if dirs[n - 1] else out[first]) & unused
        if not close:
            return False
        if unused & (unused - 1) == 0:
            return True
        pool = unused | (1 << last) | (1 << first)
        for w in bits(unused):
            if (nbr[w] & pool & ~(1 << w)).bit_count() < 2:
                return False
        return True

    def extend(k: int, unused: int) -> bool:
        stats.nodes += 1
        last = images[k - 1]
        cand = (out[last] if dirs[k - 1] else inn[last]) & unused
        if k == n - 1:
            first = images[0]
            cand &= inn[first] if dirs[n - 1] else out[first]
        for v in bits(cand):
            images[k] = v
            rest = unused & ~(1 << v)
            if k == n - 1:
                return True
            if feasible(rest, v, images[0]) and extend(k + 1, rest):
                return True
        return False

    found = None
    full = G.full
    for v0 in range(n):
        images[0] = v0
        if n == 1 or extend(1, full & ~(1 << v0)):
            found = Embedding(tuple(images))
            break
    stats.millis = (time.perf_counter() - t0) * 1000.0
    if found is not None:
        assert validate_embedding(G, C, found)
    return found


def _orbit_key(dirs: tuple[bool, ...]) -> tuple[bool, ...]:
    n = len(dirs)
    refl = tuple(not dirs[(-j - 1) % n] for j in range(n))
    return min(min(d[k:] + d[:k] for k in range(n)) for d in (dirs, refl))


def enumerate_patterns(n: int, up_to_symmetry: bool = False) -> Iterator[CyclePattern]:
    """All 2^n orientations, or one per orbit of rotation and reflection."""
    if n < 3:
        raise ValueError("n >= 3 required")
    for code in range(1 << n):
        dirs = tuple(bool(code >> i & 1) for i in range(n))
        if up_to_symmetry and _orbit_key(dirs) != dirs:
            continue
        yield CyclePattern(dirs)


PATTERN_CLASSES = ("all", "non_antidirected", "antidirected", "consistent")


def patterns_of_class(n: int, cls: str) -> list[CyclePattern]:
    if cls not in PATTERN_CLASSES:
        raise ValueError(f"unknown pattern class {cls!r}")
    pats = list(enumerate_patterns(n, up_to_symmetry=True))
    if cls == "non_antidirected":
        return [p for p in pats if not p.is_antidirected()]
    if cls == "antidirected":
        return [p for p in pats if p.is_antidirected()]
    if cls == "consistent":
        return [p for p in pats if p.is_consistent()]
    return pats


@dataclass
class ScanRow:
    family: str
    params: str
    pattern_class: str
    pattern: str
    exists: str
    nodes_expanded: int
    millis: float

    def as_csv(self) -> str:
        return f"{self.family},{self.params},{self.pattern_class},{self.pattern},{self.exists},{self.nodes_expanded},{self.millis:.3f}"


SCAN_HEADER = "family,params,pattern_class,pattern,exists,nodes_expanded,millis"


@dataclass
class ScanReport:
    rows: list[ScanRow] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    def absences(self) -> list[ScanRow]:
        return [r for r in self.rows if r.exists == "absent"]

    def to_csv(self, timings: bool = True) -> str:
        lines = [SCAN_HEADER]
        for r in self.rows:
            if timings:
                lines.append(r.as_csv())
            else:
                lines.append(r.as_csv().rsplit(",", 1)[0] + ",")
        return "\n".join(lines) + "\n"


def threshold_scan(
    family: str,
    params: list[dict],
    patterns: str = "all",
    limit: int = DEFAULT_LIMIT,
) -> ScanReport:
    """Run the oracle over family instances and pattern classes; reports only."""
    from .generators import build_family

    report = ScanReport()
    for p in params:
        label = ";".join(f"{k}={v}" for k, v in sorted(p.items()))
        try:
            G = build_family(family, **p)
        except ValueError as e:
            report.skipped.append(f"{family}[{label}]: {e}")
            continue
        if G.n > limit:
            report.skipped.append(f"{family}[{label}]: n={G.n} over limit {limit}")
            continue
        for C in patterns_of_class(G.n, patterns):
            stats = SearchStats()
            E = oracle_embed(G, C, limit=limit, stats=stats)
            report.rows.append(
                ScanRow(family, label, patterns, str(C), "exists" if E else "absent", stats.nodes, stats.millis)
            )
    return report
