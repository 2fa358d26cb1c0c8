"""Window planning and realisation shared by the cover and linking constructors.

A *plan* is a sequence of slots laid along consecutive positions of a cycle
pattern.  A slot is either a class slot ``("c", X)``, to be filled later by
some well-connected vertex of class X, or a pinned vertex ``("v", v)``.
Pinned vertices arrive in *demands*: short vertex sequences (a single
exceptional vertex, an atypical edge, a whole short path) that must sit on
consecutive positions.  The planner decides where each demand goes, keeping
track of repeated A/B occurrences; the realiser then picks concrete vertices
for the class slots.

Both stages are exact depth-first searches with memoisation and node budgets,
and both break ties towards the lowest class index and the lowest vertex id.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from ..digraph import CyclePattern, Digraph, bits

AB = ("A", "B")


class NotFound(RuntimeError):
    """A constructor could not complete; `case` names the branch and `reason`
    the inequality or search step that failed."""

    def __init__(self, case: str, reason: str):
        super().__init__(f"{case}: {reason}")
        self.case = case
        self.reason = reason


class PlannerBudget(NotFound):
    pass


Slot = tuple


def rep_counts(form: Iterable[str]) -> tuple[int, int]:
    """Repeated A and repeated B in the {A,B}-restriction of a class sequence."""
    rA = rB = 0
    last = None
    for lab in form:
        if lab not in AB:
            continue
        if lab == last:
            if lab == "A":
                rA += 1
            else:
                rB += 1
        last = lab
    return rA, rB


class Layout:
    """Class membership, class pools, the dense class relation and the
    capability test for pinned vertices next to class slots."""

    def __init__(self, G: Digraph, classes: dict[str, int], dense: Iterable[tuple[str, str]],
                 pools: dict[str, int] | None = None, thr: int = 3):
        self.G = G
        self.classes = dict(classes)
        self.dense = frozenset(dense)
        self.pools = dict(pools) if pools is not None else dict(classes)
        self.thr = thr
        self._caps: dict[int, tuple] = {}

    def label(self, v: int) -> str:
        for lab, m in self.classes.items():
            if m >> v & 1:
                return lab
        raise ValueError(f"vertex {v} has no class")

    def caps(self, v: int) -> tuple[frozenset, frozenset]:
        """(classes v can receive an arc from, classes v can send an arc to)."""
        c = self._caps.get(v)
        if c is None:
            G, thr = self.G, self.thr
            ins = frozenset(X for X, m in self.pools.items() if (G.in_adj[v] & m).bit_count() >= thr)
            outs = frozenset(X for X, m in self.pools.items() if (G.out_adj[v] & m).bit_count() >= thr)
            c = self._caps[v] = (ins, outs)
        return c

    def class_step(self, X: str, Y: str, d: bool) -> bool:
        return ((X, Y) if d else (Y, X)) in self.dense

    def into_pinned(self, X: str, v: int, d: bool) -> bool:
        """Class slot X immediately before pinned v, edge direction d."""
        ins, outs = self.caps(v)
        return X in (ins if d else outs)

    def from_pinned(self, v: int, Y: str, d: bool) -> bool:
        """Pinned v immediately before class slot Y."""
        ins, outs = self.caps(v)
        return Y in (outs if d else ins)

    def arc_ok(self, u: int, v: int, d: bool) -> bool:
        return self.G.has_arc(u, v) if d else self.G.has_arc(v, u)


@dataclass(frozen=True)
class Demand:
    """Vertices that must occupy consecutive positions, in one of several orders.

    A `bridge` demand may separate class slots of different classes; other
    demands must return to the class they left when `contexts` is enforced.
    """

    variants: tuple[tuple[int, ...], ...]
    required: bool = True
    kind: str = ""
    bridge: bool = False

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for var in self.variants for v in var)


def single(v: int, kind: str = "", required: bool = True, bridge: bool = False) -> Demand:
    return Demand(((v,),), required, kind, bridge)


def edge_demand(u: int, v: int, kind: str = "", required: bool = True, bridge: bool = False,
                both_orders: bool = True) -> Demand:
    """The arc u->v on two consecutive positions, traversed either way round."""
    vs = ((u, v), (v, u)) if both_orders else ((u, v),)
    return Demand(vs, required, kind, bridge)


def path_demand(vertices: Sequence[int], kind: str = "", required: bool = True,
                bridge: bool = False) -> Demand:
    vs = tuple(vertices)
    return Demand((vs, vs[::-1]), required, kind, bridge)


@dataclass
class State:
    k: int                      # slots placed so far
    last: Slot                  # the most recent slot
    lastAB: str | None
    rA: int
    rB: int
    used: dict[str, int]        # class-label usage (class slots and pinned)
    remaining_required: int
    ctx: str | None             # class of the most recent class slot


@dataclass
class Plan:
    slots: list[Slot]
    rA: int
    rB: int
    used: dict[str, int]
    placed: list[Demand] = field(default_factory=list)
    extra: object = None        # whatever the goal callback returned

    def labels(self, layout: Layout) -> list[str]:
        return [s[1] if s[0] == "c" else layout.label(s[1]) for s in self.slots]


class _Type:
    """Demands grouped by everything the planner can observe about them."""

    __slots__ = ("key", "members", "required", "length", "bridge")

    def __init__(self, key, required: bool, length: int, bridge: bool):
        self.key = key
        self.members: list[Demand] = []
        self.required = required
        self.length = length
        self.bridge = bridge


def _signature(layout: Layout, dm: Demand) -> tuple:
    out = []
    for var in dm.variants:
        labs = tuple(layout.label(v) for v in var)
        internal = tuple((layout.G.has_arc(var[i], var[i + 1]), layout.G.has_arc(var[i + 1], var[i]))
                         for i in range(len(var) - 1))
        out.append((labs, layout.caps(var[0]), layout.caps(var[-1]), internal))
    return (tuple(out), dm.required, dm.bridge)


def plan_window(
    layout: Layout,
    dirs: Callable[[int], bool],
    first: Slot,
    demands: Sequence[Demand],
    goal: Callable[[State], object],
    max_len: int,
    class_order: Sequence[str] = AB,
    gap: int = 1,
    budget: int = 200_000,
    track: Sequence[str] = (),
    contexts: bool = False,
    max_reps: int | None = None,
    case: str = "planner",
    target_diff: int | None = None,
    fixed: dict[int, Demand] | None = None,
    class_caps: dict[str, int] | None = None,
) -> Plan | None:
    """Depth-first search for a slot sequence of at most `max_len` slots.

    `dirs(k)` orients the edge between slot k and slot k+1.  The search
    accepts the first state for which `goal` returns a truthy value; that
    value is stored in `Plan.extra`.  `target_diff`, when given, promises
    that only demands create repeats and that the goal wants
    rep(B) - rep(A) == target_diff; branches that can no longer reach it are
    cut.  `fixed` maps slot offsets to demands that must start exactly
    there.  `class_caps` bounds the tracked usage of a class by class
    slots.  Returns None when the search space is
    exhausted and raises PlannerBudget when the node budget runs out.
    """
    types: dict[tuple, _Type] = {}
    for dm in demands:
        key = _signature(layout, dm)
        t = types.get(key)
        if t is None:
            t = types[key] = _Type(key, dm.required, max(len(v) for v in dm.variants), dm.bridge)
        t.members.append(dm)
    tlist = sorted(types.values(), key=lambda t: (not t.required, -t.length))
    fixed_type: dict[int, int] = {}
    for off, dm in sorted((fixed or {}).items()):
        t = _Type(("fixed", off), True, max(len(v) for v in dm.variants), dm.bridge)
        t.members.append(dm)
        fixed_type[off] = len(tlist)
        tlist.append(t)
    fixed_offsets = sorted(fixed_type)
    is_fixed = {ti for ti in fixed_type.values()}
    counts = [len(t.members) for t in tlist]
    req_len = [(t.length + gap) if t.required else 0 for t in tlist]
    track = tuple(track)

    def lab_of(slot: Slot) -> str:
        return slot[1] if slot[0] == "c" else layout.label(slot[1])

    first_lab = lab_of(first)
    used0 = {X: 0 for X in track}
    if first_lab in used0:
        used0[first_lab] += 1
    slots: list[Slot] = [first]
    chosen: list[tuple[int, int]] = []  # (type index, variant index) per placed demand
    failed: set = set()
    nodes = 0
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * max_len + 1000))

    def step_ok(prev: Slot, cur: Slot, d: bool) -> bool:
        if prev[0] == "c" and cur[0] == "c":
            return layout.class_step(prev[1], cur[1], d)
        if prev[0] == "c":
            return layout.into_pinned(prev[1], cur[1], d)
        if cur[0] == "c":
            return layout.from_pinned(prev[1], cur[1], d)
        return layout.arc_ok(prev[1], cur[1], d)

    G = layout.G

    def common(u: int, du: bool, X: str, v: int, dv: bool) -> bool:
        # a class-X vertex w can sit between pinned u and pinned v
        a = G.out_adj[u] if du else G.in_adj[u]
        b = G.in_adj[v] if dv else G.out_adj[v]
        return (a & b & layout.pools[X]).bit_count() >= layout.thr

    def dfs(st: State, cool: int, rem: list[int], pending_ctx: bool):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise PlannerBudget(case, f"planner node budget {budget} exhausted")
        if st.remaining_required == 0 and not pending_ctx:
            res = goal(st)
            if res:
                return res
        k = st.k
        if target_diff is not None:
            if abs(target_diff - (st.rB - st.rA)) > sum(c * t.length for c, t in zip(rem, tlist)):
                return None
        need = sum(c * l for c, l in zip(rem, req_len))
        if k + need - (gap if need else 0) > max_len or k >= max_len:
            return None
        last = st.last
        lastkey = ("c", last[1]) if last[0] == "c" else ("p", layout.label(last[1]), layout.caps(last[1]))
        before = slots[-2] if last[0] == "c" and k >= 2 and slots[-2][0] == "v" else None
        reps = (st.rA, st.rB) if max_reps is not None else st.rB - st.rA
        key = (k, lastkey, before, st.lastAB, reps, tuple(rem), min(cool, gap), st.ctx, pending_ctx,
               tuple(st.used[X] for X in track))
        if key in failed:
            return None
        d0 = dirs(k - 1)
        here = fixed_type.get(k)
        # demands first, so that exceptional vertices are absorbed early
        if cool >= gap or here is not None:
            for ti, t in enumerate(tlist):
                if not rem[ti]:
                    continue
                if here is not None and ti != here or here is None and ti in is_fixed:
                    continue
                rep = t.members[len(t.members) - rem[ti]]
                for vi, var in enumerate(rep.variants):
                    L = len(var)
                    if k + L > max_len:
                        continue
                    if any(k < f < k + L for f in fixed_offsets):
                        continue
                    if not step_ok(last, ("v", var[0]), d0):
                        continue
                    if before is not None and not common(before[1], dirs(k - 2), last[1], var[0], d0):
                        continue
                    if any(not layout.arc_ok(var[i], var[i + 1], dirs(k + i)) for i in range(L - 1)):
                        continue
                    lastAB, rA, rB = st.lastAB, st.rA, st.rB
                    used = dict(st.used)
                    for v in var:
                        lab = layout.label(v)
                        if lab in used:
                            used[lab] += 1
                        if lab in AB:
                            if lab == lastAB:
                                rA, rB = (rA + 1, rB) if lab == "A" else (rA, rB + 1)
                            lastAB = lab
                    if max_reps is not None and rA + rB > max_reps:
                        continue
                    rem[ti] -= 1
                    slots.extend(("v", v) for v in var)
                    chosen.append((ti, vi))
                    nst = State(k + L, slots[-1], lastAB, rA, rB, used,
                                st.remaining_required - (1 if t.required else 0), st.ctx)
                    res = dfs(nst, 0, rem, contexts and not t.bridge and st.ctx is not None)
                    if res:
                        return res
                    chosen.pop()
                    del slots[-L:]
                    rem[ti] += 1
        for X in class_order if here is None else ():
            if pending_ctx and X != st.ctx:
                continue
            cur = ("c", X)
            if not step_ok(last, cur, d0):
                continue
            lastAB, rA, rB = st.lastAB, st.rA, st.rB
            if X in AB:
                if X == lastAB:
                    rA, rB = (rA + 1, rB) if X == "A" else (rA, rB + 1)
                lastAB = X
            if max_reps is not None and rA + rB > max_reps:
                continue
            used = dict(st.used)
            if X in used:
                used[X] += 1
                if class_caps and X in class_caps and used[X] > class_caps[X]:
                    continue
            slots.append(cur)
            nst = State(k + 1, cur, lastAB, rA, rB, used, st.remaining_required, X)
            res = dfs(nst, cool + 1, rem, False)
            if res:
                return res
            slots.pop()
        failed.add(key)
        return None

    lastAB0 = first_lab if first_lab in AB else None
    st0 = State(1, first, lastAB0, 0, 0, used0, sum(c for c, t in zip(counts, tlist) if t.required),
                first[1] if first[0] == "c" else None)
    try:
        res = dfs(st0, 1 if first[0] == "c" else 0, list(counts), False)
    finally:
        sys.setrecursionlimit(old_limit)
    if not res:
        return None
    # map the chosen types back to concrete demands, in order of placement
    taken = [0] * len(tlist)
    placed = []
    final = list(slots)
    pos = 1
    concrete: list[Slot] = [final[0]]
    ci = 0
    while pos < len(final):
        if final[pos][0] == "c":
            concrete.append(final[pos])
            pos += 1
            continue
        ti, vi = chosen[ci]
        ci += 1
        dm = tlist[ti].members[taken[ti]]
        taken[ti] += 1
        var = dm.variants[vi]
        placed.append(dm)
        concrete.extend(("v", v) for v in var)
        pos += len(var)
    labels = [s[1] if s[0] == "c" else layout.label(s[1]) for s in concrete]
    rA, rB = rep_counts(labels)
    used = {X: labels.count(X) for X in track}
    return Plan(concrete, rA, rB, used, placed, res)


def realize(
    layout: Layout,
    dirs: Callable[[int], bool],
    slots: Sequence[Slot],
    reserved: int = 0,
    budget: int = 100_000,
    case: str = "realizer",
) -> list[int | None] | None:
    """Choose concrete vertices for every class slot (lowest id first).

    Slot kinds: ("c", X) draws from the class pool, ("m", mask) from an
    explicit mask, ("v", v) is fixed, and ("skip", L) leaves L positions
    empty (no adjacency is checked across a skip).  Returns one entry per
    position, None inside skips.
    """
    G = layout.G
    pinned = 0
    for s in slots:
        if s[0] == "v":
            pinned |= 1 << s[1]
    avoid = reserved | pinned
    # expand skips into positions
    seq: list[Slot] = []
    for s in slots:
        if s[0] == "skip":
            seq.extend([("skip",)] * s[1])
        else:
            seq.append(s)
    n = len(seq)
    out = [None] * n
    nodes = 0

    def pool(s: Slot) -> int:
        if s[0] == "c":
            return layout.pools[s[1]] & ~avoid
        if s[0] == "m":
            return s[1] & ~avoid
        return 0

    def nbr(v: int, d: bool, forward: bool) -> int:
        # vertices w that may sit right after v (forward=True) or right before it
        if forward:
            return G.out_adj[v] if d else G.in_adj[v]
        return G.in_adj[v] if d else G.out_adj[v]

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * n + 1000))

    # (position, previous image) pairs already known to fail; used sets are
    # ignored, which may only make the search give up earlier
    dead: set[tuple[int, int | None]] = set()

    def go(i: int, used: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise NotFound(case, f"realizer node budget {budget} exhausted")
        if i == n:
            return True
        s = seq[i]
        prev = out[i - 1] if i > 0 else None
        if (i, prev) in dead:
            return False
        if s[0] == "skip":
            out[i] = None
            return go(i + 1, used)
        if s[0] == "v":
            v = s[1]
            if prev is not None and seq[i - 1][0] != "skip" and not layout.arc_ok(prev, v, dirs(i - 1)):
                return False
            out[i] = v
            return go(i + 1, used)
        cand = pool(s) & ~used
        if prev is not None and seq[i - 1][0] != "skip":
            cand &= nbr(prev, dirs(i - 1), True)
        nxt = seq[i + 1] if i + 1 < n else None
        if nxt is not None and nxt[0] == "v":
            cand &= nbr(nxt[1], dirs(i), False)
        for v in bits(cand):
            if nxt is not None and nxt[0] in ("c", "m"):
                if not (pool(nxt) & ~used & ~(1 << v) & nbr(v, dirs(i), True)):
                    continue
            out[i] = v
            if go(i + 1, used | 1 << v):
                return True
        out[i] = None
        dead.add((i, prev))
        return False

    try:
        ok = go(0, 0)
    finally:
        sys.setrecursionlimit(old_limit)
    return out if ok else None


def pattern_dirs(C: CyclePattern, start: int) -> Callable[[int], bool]:
    n = C.n
    dirs = C.dirs
    return lambda k: dirs[(start + k) % n]


def sink_density_starts(C: CyclePattern, width: int, count: int) -> list[int]:
    """Start positions of the `count` windows of the given width richest in
    sinks and sources, spaced apart, best first (ties towards low positions)."""
    n = C.n
    width = max(1, min(width, n))
    turns = [0] * n
    for p in range(n):
        if C.d(p - 1) != C.d(p):
            turns[p] = 1
    score = sum(turns[:width])
    scores = []
    for p in range(n):
        scores.append((-score, p))
        score += turns[(p + width) % n] - turns[p]
    scores.sort()
    picked: list[int] = []
    for _, p in scores:
        if all(min((p - q) % n, (q - p) % n) >= width // 2 for q in picked):
            picked.append(p)
        if len(picked) >= count:
            break
    return picked


def run_starts(C: CyclePattern, count: int) -> list[int]:
    """Start positions of the longest consistently oriented runs, best first."""
    n = C.n
    if C.is_consistent():
        return [0]
    runs = []
    for p in range(n):
        if C.d(p - 1) != C.d(p):
            L = 0
            while L < n and C.d(p + L) == C.d(p):
                L += 1
            runs.append((-L, p))
    runs.sort()
    return [p for _, p in runs[:count]]
