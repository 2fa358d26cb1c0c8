"""Pattern-side structure: long runs, subpaths, useful tripartitions and links."""

from __future__ import annotations

from dataclasses import dataclass

from ..dense import PreconditionError
from ..digraph import CyclePattern, sink_count
from .engine import NotFound

RUN = 20


@dataclass(frozen=True)
class Subpath:
    """Positions start, start+1, ..., start+length of C (length counts edges)."""

    C: CyclePattern
    start: int
    length: int

    def __post_init__(self):
        if not 0 <= self.length < self.C.n:
            raise ValueError("subpath length must lie in [0, n)")

    def pos(self, i: int) -> int:
        return (self.start + i) % self.C.n

    def d(self, i: int) -> bool:
        """Orientation of the i-th edge of the subpath."""
        return self.C.d(self.start + i)

    @property
    def dirs(self) -> tuple[bool, ...]:
        return tuple(self.d(i) for i in range(self.length))

    def sinks(self) -> list[int]:
        """Interior offsets that are sinks of the subpath."""
        return [i for i in range(1, self.length) if self.d(i - 1) and not self.d(i)]

    def sources(self) -> list[int]:
        return [i for i in range(1, self.length) if not self.d(i - 1) and self.d(i)]

    def sub(self, i: int, j: int) -> Subpath:
        return Subpath(self.C, self.pos(i), j - i)


def is_run(C: CyclePattern, start: int, length: int = RUN) -> bool:
    d0 = C.d(start)
    return all(C.d(start + i) == d0 for i in range(length))


def densest_sink_interval(C: CyclePattern, width: int) -> tuple[int, int]:
    """(start, sinks) of the width-position window containing most sinks."""
    n = C.n
    width = max(1, min(width, n))
    flags = [1 if C.is_sink(p) else 0 for p in range(n)]
    cur = sum(flags[:width])
    best = (cur, 0)
    for p in range(1, n):
        cur += flags[(p + width - 1) % n] - flags[p - 1]
        if cur > best[0]:
            best = (cur, p)
    return best[1], best[0]


@dataclass(frozen=True)
class LongRuns:
    starts: tuple[int, ...]
    forward: bool        # orientation of the first run
    reflected: bool      # True when the runs were located in C.reflected()


def _scan_runs(C: CyclePattern, k: int, count: int, want_forward: bool) -> tuple[int, ...] | None:
    n = C.n
    runs = [is_run(C, p) for p in range(n)]
    for p in range(n):
        if not runs[p] or C.d(p) != want_forward:
            continue
        starts = tuple((p + i * k) % n for i in range(count))
        if all(runs[q] for q in starts):
            return starts
    return None


def find_long_runs(C: CyclePattern, k: int, eps: float | None = None, count: int = 2) -> LongRuns:
    """Long runs (consistent subpaths of length 20) at cyclic distance k,
    the first of them forward.  When every suitable first run is backward,
    the search moves to the traversal-reversed pattern and reports positions
    of the original pattern with `reflected=True`."""
    n = C.n
    if count == 2 and not (n / 4 <= k <= 3 * n / 4):
        raise PreconditionError(f"needs n/4 <= k <= 3n/4, got k={k}, n={n}")
    if eps is not None and sink_count(C) >= eps * n:
        raise PreconditionError(f"sigma(C)={sink_count(C)} >= eps*n={eps * n}")
    starts = _scan_runs(C, k, count, True)
    if starts is not None:
        return LongRuns(starts, True, False)
    R = C.reflected()
    starts = _scan_runs(R, k, count, True)
    if starts is not None:
        # position p of R is position -p of C; a run [p, p+20] maps to [-p-20, -p]
        orig = tuple((-p - RUN) % n for p in starts)
        return LongRuns(orig, True, True)
    pos, sinks = densest_sink_interval(C, max(RUN, n // 10))
    raise NotFound("long-runs", f"no long runs at distance {k}; densest sink interval starts at {pos} "
                                f"with {sinks} sinks in {max(RUN, n // 10)} positions")


def find_four_long_runs(C: CyclePattern, eps: float | None = None) -> LongRuns:
    """Four long runs at consecutive distance floor(n/4)."""
    return find_long_runs(C, C.n // 4, eps, count=4)


# ------------------------------------------------------ useful tripartition

@dataclass(frozen=True)
class UsefulTripartition:
    P: Subpath
    cuts: tuple[int, int]            # P1 = [0,c1], P2 = [c1,c2], P3 = [c2,len]
    Q1: tuple[int, ...]
    Q2: tuple[int, ...]
    Q3: tuple[int, ...]

    @property
    def P1(self) -> Subpath:
        return self.P.sub(0, self.cuts[0])

    @property
    def P2(self) -> Subpath:
        return self.P.sub(*self.cuts)

    @property
    def P3(self) -> Subpath:
        return self.P.sub(self.cuts[1], self.P.length)

    def violations(self) -> list[str]:
        P, (c1, c2) = self.P, self.cuts
        m = len(P.sinks())
        bad = []
        if c1 % 2 or (c2 - c1) % 2:
            bad.append("P1 and P2 must have even length")
        need = m // 12
        for name, Q in (("Q1", self.Q1), ("Q2", self.Q2), ("Q3", self.Q3)):
            if len(Q) < need:
                bad.append(f"|{name}|={len(Q)} < floor(m/12)={need}")
        sinks, sources = set(P.sinks()), set(P.sources())
        if not all(q in sinks and 0 <= q <= c1 for q in self.Q1):
            bad.append("Q1 must be sinks of P1")
        if not all(q in sinks and c2 <= q <= P.length for q in self.Q3):
            bad.append("Q3 must be sinks of P3")
        if not all(q in sources and c1 <= q <= c2 for q in self.Q2):
            bad.append("Q2 must be sources of P2")
        if len({q % 2 for q in self.Q1 + self.Q3}) > 1:
            bad.append("Q1+Q3 not pairwise at even distance")
        if len({q % 2 for q in self.Q2}) > 1:
            bad.append("Q2 not pairwise at even distance")
        return bad

    def links(self, length: int) -> list[int]:
        """Offsets (within P) of links of the given even length: subpaths of
        P2 with at least |Q2|/3 elements of Q2 strictly before and after."""
        if length % 2:
            raise ValueError("links have even length")
        c1, c2 = self.cuts
        third = len(self.Q2) / 3
        out = []
        for x in range(c1, c2 - length + 1):
            y = x + length
            if sum(q < x for q in self.Q2) >= third and sum(q > y for q in self.Q2) >= third:
                out.append(x)
        return out


def useful_tripartition(P: Subpath) -> UsefulTripartition:
    sinks = P.sinks()
    m = len(sinks)
    if m < 12:
        raise PreconditionError(f"useful tripartition needs at least 12 sinks, P has {m}")
    need = m // 12
    L = P.length
    sources = P.sources()
    best = None
    # cut points balance the sink mass: try cuts near the thirds first
    order = sorted(range(0, L + 1, 2), key=lambda c: abs(sum(s < c for s in sinks) - m / 3))
    order2 = sorted(range(0, L + 1, 2), key=lambda c: abs(sum(s < c for s in sinks) - 2 * m / 3))
    for c1 in order[:40]:
        for c2 in order2[:40]:
            if c2 <= c1:
                continue
            for par in (0, 1):
                Q1 = tuple(s for s in sinks if s < c1 and s % 2 == par)
                Q3 = tuple(s for s in sinks if s > c2 and s % 2 == par)
                src = [s for s in sources if c1 < s < c2]
                Q2 = max((tuple(s for s in src if s % 2 == 0), tuple(s for s in src if s % 2 == 1)), key=len)
                score = min(len(Q1), len(Q2), len(Q3))
                if score >= need and (best is None or score > best[0]):
                    best = (score, UsefulTripartition(P, (c1, c2), Q1, Q2, Q3))
        if best is not None and best[0] >= need:
            break
    if best is None:
        raise NotFound("tripartition", f"no even cut points give |Q_i| >= floor(m/12) = {need}")
    trip = best[1]
    bad = trip.violations()
    if bad:
        raise NotFound("tripartition", "; ".join(bad))
    return trip
