"""Top-level pipeline: classify, build the class-specific structure, complete
it with dense Hamilton paths and validate; small instances fall back to the
exact oracle."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from .covers.ab import AB_DENSE, bipartite_low, exceptional_cover_AB
from .covers.abst import exceptional_cover_ABST
from .covers.basics import ExceptionalCover
from .covers.engine import Layout, NotFound, PlannerBudget, pattern_dirs, plan_window, realize, single
from .covers.st import linking_ST
from .dense import HamiltonNotFound, PreconditionError, any_orientation_hamilton_path_bipartite, \
    bipartite_semidegree
from .digraph import CyclePattern, Digraph, Embedding, bits, lowest, validate_embedding, validate_partial
from .oracle import DEFAULT_LIMIT, OracleLimitExceeded, oracle_embed
from .structure import DESK, ClassificationError, ConstantsProfile, ExtremalClass, VertexPartition, classify

STRATEGIES = ("auto", "extremal", "oracle")


class AntidirectedUnsupported(ValueError):
    """Antidirected patterns are only handled by the exact oracle."""


class ConstructorFailed(RuntimeError):
    def __init__(self, case: str, reason: str, stage: str = "construct"):
        super().__init__(f"[{case}] {reason}")
        self.case = case
        self.reason = reason
        self.stage = stage


class CompletionFailed(ConstructorFailed):
    """The residual bipartite digraph misses the completion precondition,
    or the completion search itself failed."""

    def __init__(self, case: str, reason: str, delta: int | None = None, needed: Fraction | None = None):
        super().__init__(case, reason, "complete")
        self.delta = delta
        self.needed = needed


@dataclass
class CompletionReport:
    embedding: Embedding
    extension: int              # vertices added to the cover before completion
    m: int                      # |B'| of the residual bipartite digraph
    delta: int                  # its measured semidegree
    needed: Fraction            # (7m + 2)/8
    strict: bool

    @property
    def precondition_held(self) -> bool:
        return self.delta >= self.needed

    def to_json(self) -> dict:
        return {"extension": self.extension, "m": self.m, "delta": self.delta,
                "needed": float(self.needed), "precondition_held": self.precondition_held,
                "strict": self.strict}


def _residual(P: VertexPartition, images) -> tuple[int, int]:
    used = 0
    for v in images:
        used |= 1 << v
    x, y = images[0], images[-1]
    return (P.A & ~used) | (1 << x) | (1 << y), P.B & ~used


def _extend(G: Digraph, C: CyclePattern, P: VertexPartition, images: tuple[int, ...], start: int,
            low: int, budget: int) -> tuple[int, ...]:
    """Append an A/B window from the last cover vertex back into A that
    passes through every vertex of `low`, without changing rep(B) - rep(A)."""
    used = 0
    for v in images:
        used |= 1 << v
    pools = {"A": P.A & ~used & ~low, "B": P.B & ~used & ~low}
    layout = Layout(G, {"A": P.A, "B": P.B, "S": P.S, "T": P.T}, AB_DENSE, pools)
    demands = [single(v, "low-AB") for v in bits(low)]
    y = images[-1]
    max_len = min(G.n - len(images), 8 + 6 * len(demands))

    def goal(st):
        return st.last == ("c", "A") and st.rB == st.rA and st.k >= 2

    dirs = pattern_dirs(C, start + len(images) - 1)
    try:
        plan = plan_window(layout, dirs, ("v", y), demands, goal, max_len, ("A", "B"), budget=budget,
                           case="extension")
    except PlannerBudget as e:
        raise CompletionFailed("extension", e.reason) from None
    if plan is None:
        raise CompletionFailed("extension", f"no A/B window of at most {max_len} vertices reaches "
                                            f"{len(demands)} low-degree vertices")
    window = realize(layout, dirs, plan.slots, reserved=used & ~(1 << y), case="extension")
    if window is None:
        raise CompletionFailed("extension", "extension slots could not be realised")
    return images + tuple(window[1:])


def _open_single(G: Digraph, C: CyclePattern, P: VertexPartition, x: int, start: int) -> tuple[int, ...]:
    """A one-vertex cover has coinciding ends; step x -> B -> A so that the
    residual path has distinct ends (an AB pair keeps EC3)."""
    def nbrs(v: int, d: bool) -> int:
        return G.out_adj[v] if d else G.in_adj[v]

    for b in bits(nbrs(x, C.d(start)) & P.B):
        cand = nbrs(b, C.d(start + 1)) & P.A & ~(1 << x)
        if cand:
            return x, b, lowest(cand)
    raise CompletionFailed("single", f"no AB step out of the one-vertex cover at {x}")


def complete_from_cover_report(G: Digraph, cover: ExceptionalCover, C: CyclePattern,
                               P: VertexPartition | None = None, strict: bool = True, rounds: int = 3,
                               budget: int = 200_000) -> CompletionReport:
    """Extend the cover over the low-degree A/B vertices and close the cycle
    with a Hamilton path of the residual bipartite digraph G[A', B']."""
    P = P or cover.partition
    n = G.n
    checks = cover.ec_checks()
    checks.pop("bound", None)
    if not all(checks.values()):
        bad = ", ".join(k for k, v in checks.items() if not v)
        raise CompletionFailed(cover.case, f"cover fails {bad}")
    if not validate_partial(G, C, cover.cover):
        raise CompletionFailed(cover.case, "cover is not an embedding of its stretch of C")
    start = cover.cover.start_pos
    images = cover.images
    base = len(images)
    if len(images) == 1:
        images = _open_single(G, C, P, images[0], start)
    for _ in range(rounds + 1):
        A2, B2 = _residual(P, images)
        low = bipartite_low(G, A2, B2) & ~((1 << images[0]) | (1 << images[-1]))
        if not low:
            break
        if len(images) > base + 2 * n // 5:
            break
        images = _extend(G, C, P, images, start, low, budget)
    A2, B2 = _residual(P, images)
    x, y = images[0], images[-1]
    m = B2.bit_count()
    delta = bipartite_semidegree(G, A2, B2) if m else 0
    needed = Fraction(7 * m + 2, 8)
    if strict and delta < needed:
        raise CompletionFailed(cover.case, f"residual semidegree {delta} < (7*{m}+2)/8 = {float(needed):.2f}",
                               delta, needed)
    L = len(images)
    dirs = [C.d(start + L - 1 + i) for i in range(2 * m)]
    if m == 0:
        raise CompletionFailed(cover.case, "cover leaves no residual vertices")
    try:
        path = any_orientation_hamilton_path_bipartite(G, A2, B2, y, x, dirs, strict=strict, budget=budget)
    except (PreconditionError, HamiltonNotFound) as e:
        raise CompletionFailed(cover.case, f"bipartite completion: {e}", delta, needed) from None
    full = [None] * n
    for k, v in enumerate(images):
        full[(start + k) % n] = v
    for k, v in enumerate(path.vertices[1:-1]):
        full[(start + L + k) % n] = v
    emb = Embedding(tuple(full))
    if not validate_embedding(G, C, emb):
        raise CompletionFailed(cover.case, "assembled cycle does not validate")
    return CompletionReport(emb, L - base, m, delta, needed, strict)


def complete_from_cover(G: Digraph, cover: ExceptionalCover, C: CyclePattern,
                        P: VertexPartition | None = None, strict: bool = True) -> Embedding:
    return complete_from_cover_report(G, cover, C, P, strict).embedding


@dataclass
class EmbedResult:
    status: str                               # found | not_found | failed
    embedding: Embedding | None = None
    method: str = ""
    failure_stage: str | None = None
    failure: str | None = None
    classification: ExtremalClass | None = None
    details: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status == "found"

    def to_json(self, timings: bool = True) -> dict:
        d = {"schema": "v1", "status": self.status, "method": self.method,
             "embedding": list(self.embedding.images) if self.embedding else None,
             "failure_stage": self.failure_stage, "failure": self.failure,
             "classification": self.classification.to_json() if self.classification else None,
             "details": self.details}
        if timings:
            d["timings"] = {k: round(v, 3) for k, v in self.timings.items()}
        return d


class _Clock:
    def __init__(self):
        self.t = {}

    def run(self, name, fn, *a, **kw):
        t0 = time.perf_counter()
        try:
            return fn(*a, **kw)
        finally:
            self.t[name] = self.t.get(name, 0.0) + (time.perf_counter() - t0) * 1000.0


def _oracle(G, C, limit, clock, cls=None, note=None) -> EmbedResult:
    emb = clock.run("oracle_ms", oracle_embed, G, C, limit)
    res = EmbedResult("found" if emb else "not_found", emb, "oracle", None if emb else "oracle",
                      None if emb else "exhaustive search found no copy", cls)
    if note:
        res.details["fallback_reason"] = note
    return res


def _extremal(G: Digraph, C: CyclePattern, cls: ExtremalClass, profile: ConstantsProfile,
              clock: _Clock, details: dict, relax_bounds: bool) -> Embedding:
    P = cls.partition
    H, D = (G.reverse(), C.reversed()) if cls.reversed else (G, C)
    try:
        if cls.tag == "STExtremal":
            link = clock.run("construct_ms", linking_ST, H, P, D, profile, certified=True)
            details["linking"] = link.to_json()
            return link.embedding
        if cls.tag == "ABExtremal":
            cover = clock.run("construct_ms", exceptional_cover_AB, H, P, D, profile, certified=True)
        else:
            try:
                cover = clock.run("construct_ms", exceptional_cover_ABST, H, P, D, profile, certified=True)
            except NotFound as e:
                if not relax_bounds:
                    raise
                # small profiles can push the few-sinks usage bound below the
                # three A/B vertices any cover needs; retry under the many-sinks bound
                cap = max(5 * profile.F("eps2") * G.n, 8)
                details["strict_cover"] = f"{e.case}: {e.reason[:300]}"
                cover = clock.run("construct_ms", exceptional_cover_ABST, H, P, D, profile, certified=True,
                                  usage_cap=cap)
    except NotFound as e:
        raise ConstructorFailed(e.case, e.reason) from None
    except PreconditionError as e:
        raise ConstructorFailed(cls.tag, str(e)) from None
    details["cover"] = cover.to_json()
    try:
        rep = clock.run("complete_ms", complete_from_cover_report, H, cover, D, P, True)
    except CompletionFailed as e:
        if e.stage != "complete" or e.delta is None:
            raise
        details["strict_completion"] = str(e)
        rep = clock.run("complete_ms", complete_from_cover_report, H, cover, D, P, False)
    details["completion"] = rep.to_json()
    return rep.embedding


def embed_cycle(G: Digraph, C: CyclePattern, profile: ConstantsProfile = DESK, strategy: str = "auto",
                oracle_limit: int = DEFAULT_LIMIT, seed: int = 0, threads: int = 1,
                classify_budget: int | None = None, relax_bounds: bool = True) -> EmbedResult:
    """Find a copy of C in G.

    Raises AntidirectedUnsupported, OracleLimitExceeded or ConstructorFailed
    when no verdict can be reached; a returned "found" result always carries
    a validated embedding.  With relax_bounds, a cover constructor that
    fails under its branch bound is retried under a larger bound (recorded in
    the result details).  `threads` is accepted as a hint and currently
    unused, since every stage is single-threaded.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}")
    if C.n != G.n:
        raise ValueError(f"pattern length {C.n} differs from vertex count {G.n}")
    clock = _Clock()
    t0 = time.perf_counter()
    n = G.n

    def done(res: EmbedResult) -> EmbedResult:
        clock.t["total_ms"] = (time.perf_counter() - t0) * 1000.0
        res.timings = dict(clock.t)
        if res.embedding is not None:
            assert validate_embedding(G, C, res.embedding)
        return res

    if C.is_antidirected():
        if strategy == "extremal" or n > oracle_limit:
            raise AntidirectedUnsupported(
                f"antidirected pattern of length {n}: only the oracle (n <= {oracle_limit}) handles these")
        return done(_oracle(G, C, oracle_limit, clock))
    if strategy == "oracle":
        return done(_oracle(G, C, oracle_limit, clock))
    try:
        cls = clock.run("classify_ms", classify, G, profile, classify_budget, seed=seed)
    except ClassificationError as e:
        if strategy == "auto" and n <= oracle_limit:
            return done(_oracle(G, C, oracle_limit, clock, note=f"classification: {e}"))
        raise ConstructorFailed("classify", str(e), "classify") from None
    if cls.tag == "ExpanderCandidate":
        if strategy == "auto" and n <= oracle_limit:
            return done(_oracle(G, C, oracle_limit, clock, cls, "ExpanderCandidate"))
        raise ConstructorFailed("robust-expander", "the robust outexpander branch is not implemented; "
                                f"n={n} is above the oracle limit {oracle_limit}", "dispatch")
    details: dict = {}
    try:
        emb = _extremal(G, C, cls, profile, clock, details, relax_bounds)
    except ConstructorFailed as e:
        if strategy == "auto" and n <= oracle_limit:
            res = _oracle(G, C, oracle_limit, clock, cls, f"{e.stage} {e.case}: {e.reason}")
            res.details.update(details)
            return done(res)
        e.classification = cls
        raise
    return done(EmbedResult("found", emb, f"extremal:{cls.tag}", classification=cls, details=details))


__all__ = ["AntidirectedUnsupported", "CompletionFailed", "CompletionReport", "ConstructorFailed",
           "EmbedResult", "OracleLimitExceeded", "STRATEGIES", "complete_from_cover",
           "complete_from_cover_report", "embed_cycle"]
