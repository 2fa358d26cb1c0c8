"""Robust expansion, the expander/extremal dichotomy and certified partitions.

Threshold convention: every "count >= x*n" comparison is done exactly, by
comparing the integer count with a Fraction built from the decimal text of
the constant.  That is the same as comparing against ceil(x*n).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from .digraph import Digraph, bits, mask_of, min_semidegree


def frac(x: float | int | Fraction) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


# ---------------------------------------------------------------- profiles

CHAIN = ("eps", "eps1", "eps2", "eta1", "tau", "eps3", "eps4", "eta2")


@dataclass(frozen=True)
class ConstantsProfile:
    nu: float = 0.02
    tau: float = 0.25
    eps: float = 0.005
    eps1: float = 0.01
    eps2: float = 0.02
    eta1: float = 0.05
    eps3: float = 0.08
    eps4: float = 0.12
    eta2: float = 0.2
    name: str = field(default="desk", compare=False)

    def __post_init__(self):
        for f in fields(self):
            if f.name == "name":
                continue
            v = getattr(self, f.name)
            if not (0 < v < 1):
                raise ValueError(f"{f.name}={v} must lie strictly between 0 and 1")
        if self.nu > self.tau:
            raise ValueError(f"nu={self.nu} exceeds tau={self.tau}")

    def chain_violations(self) -> list[str]:
        """Adjacent pairs of the constant hierarchy that are out of order."""
        out = []
        for lo, hi in zip(CHAIN, CHAIN[1:]):
            if getattr(self, lo) > getattr(self, hi):
                out.append(f"{lo}={getattr(self, lo)} > {hi}={getattr(self, hi)}")
        return out

    def F(self, key: str) -> Fraction:
        return frac(getattr(self, key))

    def to_text(self) -> str:
        return "".join(f"{f.name}={getattr(self, f.name)}\n" for f in fields(self) if f.name != "name")

    @classmethod
    def from_text(cls, text: str, name: str = "file") -> ConstantsProfile:
        vals: dict[str, float] = {}
        known = {f.name for f in fields(cls)} - {"name"}
        for ln in text.splitlines():
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            key, sep, val = ln.partition("=")
            key = key.strip()
            if not sep or key not in known:
                raise ValueError(f"bad profile line: {ln!r}")
            vals[key] = float(val)
        prof = cls(**vals, name=name)
        for v in prof.chain_violations():
            warnings.warn(f"profile {name}: hierarchy out of order: {v}", stacklevel=2)
        return prof

    @classmethod
    def load(cls, path: str | Path) -> ConstantsProfile:
        p = Path(path)
        if p.name in PROFILES:
            return PROFILES[p.name]
        return cls.from_text(p.read_text(), name=p.stem)


DESK = ConstantsProfile()
# Separates ABST from ST/AB at n in the hundreds: the case split of the
# refinement step needs 2*tau*n below n/4.
CLASSIFY = ConstantsProfile(nu=0.02, tau=0.1, eps=0.005, eps1=0.01, eps2=0.02, eta1=0.05,
                            eps3=0.1, eps4=0.12, eta2=0.2, name="classify")
# Makes the cover-length bounds non-vacuous and attainable at n = 300..800.
COVER = ConstantsProfile(nu=0.02, tau=0.2, eps=0.0001, eps1=0.0002, eps2=0.03, eta1=0.2,
                         eps3=0.2, eps4=0.2, eta2=0.25, name="cover")
PROFILES = {p.name: p for p in (DESK, CLASSIFY, COVER)}


# -------------------------------------------------------------- partitions

LABELS = ("A", "B", "S", "T")


@dataclass(frozen=True)
class VertexPartition:
    n: int
    A: int
    B: int
    S: int
    T: int

    def __post_init__(self):
        sets = (self.A, self.B, self.S, self.T)
        total = 0
        for m in sets:
            if total & m:
                raise ValueError("partition classes overlap")
            total |= m
        if total != (1 << self.n) - 1:
            raise ValueError("partition does not cover the vertex set")

    @classmethod
    def from_sets(cls, n: int, A=(), B=(), S=(), T=()) -> VertexPartition:
        return cls(n, mask_of(A), mask_of(B), mask_of(S), mask_of(T))

    @property
    def a(self) -> int:
        return self.A.bit_count()

    @property
    def b(self) -> int:
        return self.B.bit_count()

    @property
    def s(self) -> int:
        return self.S.bit_count()

    @property
    def t(self) -> int:
        return self.T.bit_count()

    def get(self, label: str) -> int:
        return getattr(self, label)

    def label_of(self, v: int) -> str:
        for lab in LABELS:
            if self.get(lab) >> v & 1:
                return lab
        raise ValueError(v)

    def relabel(self, order: str) -> VertexPartition:
        """New partition whose (A,B,S,T) are the old sets named by order."""
        A, B, S, T = (self.get(c) for c in order)
        return VertexPartition(self.n, A, B, S, T)

    def permuted(self, perm) -> VertexPartition:
        f = lambda m: mask_of(perm[v] for v in bits(m))
        return VertexPartition(self.n, f(self.A), f(self.B), f(self.S), f(self.T))

    def to_json(self) -> dict:
        return {lab: list(bits(self.get(lab))) for lab in LABELS}


# ----------------------------------------------------------------- degrees

class Degrees:
    """Vectorised d^+_X and d^-_X for all vertices at once."""

    def __init__(self, G: Digraph):
        self.G = G
        self.M = G.matrix.astype(np.int32)

    def ind(self, X: int) -> np.ndarray:
        n = self.G.n
        if X == 0:
            return np.zeros(n, dtype=np.int32)
        raw = np.frombuffer(X.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[:n].astype(np.int32)

    def out_into(self, X: int) -> np.ndarray:
        return self.M @ self.ind(X)

    def in_from(self, X: int) -> np.ndarray:
        return self.ind(X) @ self.M


def robust_outneighbourhood(G: Digraph, S: int, nu: float) -> int:
    """Vertices with at least nu*n inneighbours in S."""
    thr = frac(nu) * G.n
    return mask_of(x for x in range(G.n) if G.in_degree(x, S) >= thr)


def cross_density(G: Digraph, P: VertexPartition) -> int:
    """e(A u S, A u T), counted arc by arc."""
    return G.count_arcs(P.A | P.S, P.A | P.T)


# ------------------------------------------------------------ certificates

@dataclass
class ClauseResult:
    clause: str
    passed: bool
    measured: float | None
    required: float | None
    detail: str = ""

    def to_json(self) -> dict:
        return {"clause": self.clause, "pass": self.passed, "measured": self.measured,
                "required": self.required, "detail": self.detail}


@dataclass
class Certificate:
    tag: str
    clauses: list[ClauseResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def failed(self) -> list[str]:
        return [c.clause for c in self.clauses if not c.passed]

    def to_json(self) -> dict:
        return {"tag": self.tag, "pass": self.passed, "clauses": [c.to_json() for c in self.clauses]}


def _num(x) -> float | None:
    if x is None:
        return None
    return round(float(x), 6)


class _Clause:
    """Collects sub-checks; reports the one with the least slack."""

    def __init__(self, name: str):
        self.name = name
        self.worst: tuple | None = None
        self.ok = True

    def check(self, what: str, measured, op: str, required):
        if measured is None:  # vacuous (empty class)
            return
        if op == ">=":
            ok, slack = measured >= required, measured - required
        elif op == ">":
            ok, slack = measured > required, measured - required
        elif op == "<=":
            ok, slack = measured <= required, required - measured
        else:  # "<"
            ok, slack = measured < required, required - measured
        self.ok &= bool(ok)
        key = (bool(ok), slack)
        if self.worst is None or key < self.worst[0]:
            self.worst = (key, what, measured, op, required)

    def result(self) -> ClauseResult:
        if self.worst is None:
            return ClauseResult(self.name, True, None, None, "vacuous")
        _, what, measured, op, required = self.worst
        return ClauseResult(self.name, self.ok, _num(measured), _num(required), f"{what} {op}")


def _min_on(arr: np.ndarray, X: int):
    idx = list(bits(X))
    return int(arr[idx].min()) if idx else None


def _max_on(arr: np.ndarray, X: int):
    idx = list(bits(X))
    return int(arr[idx].max()) if idx else None


def _count_below(arr: np.ndarray, X: int, thr) -> int:
    return sum(1 for v in bits(X) if arr[v] < thr)


def _count_fail(checks: list[tuple[np.ndarray, Fraction]], X: int) -> int:
    return sum(1 for v in bits(X) if any(arr[v] < thr for arr, thr in checks))


def certify_partition(G: Digraph, P: VertexPartition, tag: str, profile: ConstantsProfile,
                      deg: Degrees | None = None) -> Certificate:
    """Evaluate every clause of the claimed class literally."""
    if P.n != G.n:
        raise ValueError("partition and digraph sizes differ")
    if tag not in ("STExtremal", "ABExtremal", "ABSTExtremal"):
        raise ValueError(f"unknown tag {tag!r}")
    D = deg or Degrees(G)
    n = G.n
    a, b, s, t = P.a, P.b, P.s, P.t
    A, B, S, T = P.A, P.B, P.S, P.T
    half = Fraction(n, 2)
    p = profile
    out: list[ClauseResult] = []

    def clause(name: str, fn: Callable[[_Clause], None]):
        c = _Clause(name)
        fn(c)
        out.append(c.result())

    def orient(c: _Clause):
        c.check("b-a", b - a, ">=", 0)
        c.check("t-s", t - s, ">=", 0)

    if tag == "STExtremal":
        e3, h2 = p.F("eps3") * n, p.F("eta2") * n
        oS, iS, oT, iT = D.out_into(S), D.in_from(S), D.out_into(T), D.in_from(T)
        clause("P*", orient)

        def p1(c):
            for name, v in (("s", s), ("t", t)):
                c.check(name, v, ">=", n // 2 - e3)
                c.check(name, v, "<=", (n + 1) // 2 + e3)
        clause("P1", p1)

        def p2(c):
            c.check("delta0(G[S])", _min_on(np.minimum(oS, iS), S), ">=", h2)
            c.check("delta0(G[T])", _min_on(np.minimum(oT, iT), T), ">=", h2)
        clause("P2", p2)
        clause("P3", lambda c: c.check("#x in S with d±_S < n/2-eps3 n",
                                       _count_fail([(oS, half - e3), (iS, half - e3)], S), "<=", e3))
        clause("P4", lambda c: c.check("#x in T with d±_T < n/2-eps3 n",
                                       _count_fail([(oT, half - e3), (iT, half - e3)], T), "<=", e3))
        clause("P5", lambda c: c.check("a+b", a + b, "<=", e3))

        def p67(X, big, small):
            def f(c):
                for nm, arr in big:
                    c.check(nm, _min_on(arr, X), ">", half - 3 * h2)
                for nm, arr in small:
                    c.check(nm, _max_on(arr, X), "<=", 3 * h2)
            return f
        clause("P6", p67(A, [("d-_T", iT), ("d+_S", oS)], [("d-_S", iS), ("d+_T", oT)]))
        clause("P7", p67(B, [("d-_S", iS), ("d+_T", oT)], [("d-_T", iT), ("d+_S", oS)]))

    elif tag == "ABExtremal":
        e3 = p.F("eps3") * n
        oA, iA, oB, iB = D.out_into(A), D.in_from(A), D.out_into(B), D.in_from(B)
        clause("Q*", orient)

        def q1(c):
            for name, v in (("a", a), ("b", b)):
                c.check(name, v, ">=", n // 2 - e3)
                c.check(name, v, "<=", (n + 1) // 2 + e3)
        clause("Q1", q1)

        def q2(c):
            c.check("delta0(G[A,B]) on A", _min_on(np.minimum(oB, iB), A), ">=", Fraction(n, 50))
            c.check("delta0(G[A,B]) on B", _min_on(np.minimum(oA, iA), B), ">=", Fraction(n, 50))
        clause("Q2", q2)
        clause("Q3", lambda c: c.check("#x in A with d±_B < n/2-eps3 n",
                                       _count_fail([(oB, half - e3), (iB, half - e3)], A), "<=", e3))
        clause("Q4", lambda c: c.check("#x in B with d±_A < n/2-eps3 n",
                                       _count_fail([(oA, half - e3), (iA, half - e3)], B), "<=", e3))
        clause("Q5", lambda c: c.check("s+t", s + t, "<=", e3))

        def q6(c):
            c.check("d-_A on S", _min_on(iA, S), ">=", Fraction(n, 50))
            c.check("d+_B on S", _min_on(oB, S), ">=", Fraction(n, 50))
        clause("Q6", q6)

        def q7(c):
            c.check("d-_B on T", _min_on(iB, T), ">=", Fraction(n, 50))
            c.check("d+_A on T", _min_on(oA, T), ">=", Fraction(n, 50))
        clause("Q7", q7)

        def q8(c):
            if a < b:
                lim = Fraction(n, 20)
                c.check("d+_B on B", _max_on(oB, B), "<", lim)
                c.check("d-_B on B", _max_on(iB, B), "<", lim)
                c.check("d-_B on S", _max_on(iB, S), "<", lim)
                c.check("d+_B on T", _max_on(oB, T), "<", lim)
        clause("Q8", q8)

    else:
        e1, h1 = p.F("eps1") * n, p.F("eta1") * n
        c3 = Fraction(p.eps ** (1.0 / 3.0)) * n
        oA, iA, oB, iB = D.out_into(A), D.in_from(A), D.out_into(B), D.in_from(B)
        oBS, iAS = D.out_into(B | S), D.in_from(A | S)
        oAT, iBT = D.out_into(A | T), D.in_from(B | T)
        clause("R*", orient)

        def r1(c):
            for name, v in (("a", a), ("b", b), ("s", s), ("t", t)):
                c.check(name, v, ">=", p.F("tau") * n)
        clause("R1", r1)

        def r2(c):
            c.check("|a-b|", abs(a - b), "<=", e1)
            c.check("|s-t|", abs(s - t), "<=", e1)
        clause("R2", r2)

        def r3(c):
            c.check("delta0(G[A,B]) on A", _min_on(np.minimum(oB, iB), A), ">=", h1)
            c.check("delta0(G[A,B]) on B", _min_on(np.minimum(oA, iA), B), ">=", h1)
        clause("R3", r3)

        def r4(c):
            c.check("d+_{B∪S} on S", _min_on(oBS, S), ">=", h1)
            c.check("d-_{A∪S} on S", _min_on(iAS, S), ">=", h1)
        clause("R4", r4)

        def r5(c):
            c.check("d+_{A∪T} on T", _min_on(oAT, T), ">=", h1)
            c.check("d-_{B∪T} on T", _min_on(iBT, T), ">=", h1)
        clause("R5", r5)
        clause("R6", lambda c: c.check("#x in A with d±_B < b-eps^(1/3) n",
                                       _count_fail([(oB, b - c3), (iB, b - c3)], A), "<=", e1))
        clause("R7", lambda c: c.check("#x in B with d±_A < a-eps^(1/3) n",
                                       _count_fail([(oA, a - c3), (iA, a - c3)], B), "<=", e1))
        clause("R8", lambda c: c.check("#x in S below the R8 degrees",
                                       _count_fail([(oBS, b + s - c3), (iAS, a + s - c3)], S), "<=", e1))
        clause("R9", lambda c: c.check("#x in T below the R9 degrees",
                                       _count_fail([(oAT, a + t - c3), (iBT, b + t - c3)], T), "<=", e1))
    return Certificate(tag, out)


# ------------------------------------------------------- violating sets

class BudgetExhausted(Exception):
    pass


class ClassificationError(Exception):
    def __init__(self, msg: str, attempts: list | None = None):
        super().__init__(msg)
        self.attempts = attempts or []


@dataclass
class ViolationSearch:
    X: int | None
    exact: bool
    evaluated: int
    deficit: int | None = None  # |RN+(X)| - |X| - ceil(nu n), negative when violating


def _size_window(n: int, profile: ConstantsProfile) -> tuple[Fraction, Fraction]:
    tau = profile.F("tau")
    return tau * n, (1 - tau) * n


def _exact_search(G: Digraph, profile: ConstantsProfile, budget: int) -> ViolationSearch:
    n = G.n
    if (1 << n) > budget:
        raise BudgetExhausted(f"exact search needs 2^{n} subsets, budget {budget}")
    lo, hi = _size_window(n, profile)
    thr = math.ceil(profile.F("nu") * n)
    need = profile.F("nu") * n
    masks = np.arange(1 << n, dtype=np.uint32)
    sizes = np.bitwise_count(masks).astype(np.int64)
    keep = (sizes > lo) & (sizes < hi)
    masks, sizes = masks[keep], sizes[keep]
    rn = np.zeros(len(masks), dtype=np.int64)
    for x in range(n):
        rn += np.bitwise_count(masks & np.uint32(G.in_adj[x])) >= thr
    # violation iff |RN| < |X| + nu n; pick the largest violation, then lowest mask
    slack = rn - sizes
    viol = slack < float(need)
    if not viol.any():
        return ViolationSearch(None, True, int(len(masks)))
    cand = np.flatnonzero(viol)
    best = cand[np.lexsort((masks[cand], slack[cand]))[0]]
    return ViolationSearch(int(masks[best]), True, int(len(masks)), int(slack[best] - thr))


def _heuristic_search(G: Digraph, profile: ConstantsProfile, budget: int, seed: int) -> ViolationSearch:
    n = G.n
    lo, hi = _size_window(n, profile)
    need = profile.F("nu") * n
    thr = math.ceil(need)
    M = G.matrix.astype(np.float32)
    rng = np.random.default_rng(seed)
    outdeg = M.sum(axis=1)

    cands: list[np.ndarray] = []
    # partition guesses: every in-neighbourhood and every out-neighbourhood complement
    cands.extend(M.T.astype(bool))
    cands.extend(~M.astype(bool))
    # degree-sorted prefixes
    order = np.lexsort((np.arange(n), -outdeg))
    for k in (n // 2, (n + 1) // 2):
        x = np.zeros(n, dtype=bool)
        x[order[:k]] = True
        cands.append(x)
    while len(cands) < min(budget, 2 * n + 64):
        cands.append(rng.random(n) < 0.5)
    X = np.array(cands[:budget], dtype=np.float32)
    evaluated = 0
    best = None
    for _ in range(4):  # refine: keep vertices sending most of their arcs into RN+(X)
        counts = X @ M
        R = counts >= thr
        sizes = X.sum(axis=1)
        slack = R.sum(axis=1) - sizes
        evaluated += len(X)
        ok = (sizes > float(lo)) & (sizes < float(hi)) & (slack < float(need))
        for i in np.flatnonzero(ok):
            key = (float(slack[i]), tuple(np.flatnonzero(X[i]).tolist()))
            if best is None or key < best[0]:
                best = (key, X[i].copy())
        into = R.astype(np.float32) @ M.T  # d^+_{RN}(x) per candidate
        X = (2 * into >= outdeg[None, :]).astype(np.float32)
    if best is None:
        return ViolationSearch(None, False, evaluated)
    Xbest = mask_of(np.flatnonzero(best[1]).tolist())
    return ViolationSearch(Xbest, False, evaluated, int(best[0][0] - thr))


def find_violating_set(G: Digraph, profile: ConstantsProfile = DESK, budget: int | None = None,
                       exact_limit: int = 18, seed: int = 0) -> ViolationSearch:
    if G.n < 3:
        raise ValueError("n >= 3 required")
    if G.n <= exact_limit:
        return _exact_search(G, profile, budget or (1 << exact_limit))
    return _heuristic_search(G, profile, budget or (4 * G.n + 256), seed)


# -------------------------------------------------------- classification

@dataclass
class ExtremalClass:
    tag: str
    partition: VertexPartition | None = None
    certificate: Certificate | None = None
    reversed: bool = False  # partition refers to the reverse of G
    violating_set: int | None = None
    case: str = ""
    exact: bool = False
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        d = {"schema": "v1", "tag": self.tag, "case": self.case, "reversed": self.reversed,
             "exact_search": self.exact, "warnings": self.warnings}
        if self.partition is not None:
            d["partition"] = self.partition.to_json()
            d["sizes"] = {"a": self.partition.a, "b": self.partition.b,
                          "s": self.partition.s, "t": self.partition.t}
        if self.violating_set is not None:
            d["violating_set"] = list(bits(self.violating_set))
        if self.certificate is not None:
            d["certificate"] = self.certificate.to_json()
        return d


def _balance(G: Digraph, A: int, B: int, S: int, T: int) -> tuple[int, int, int, int]:
    """Move vertices A<->B and S<->T until both differences are at most one.

    Each move takes the vertex whose move raises e(A u S, A u T) the least,
    lowest id on ties.
    """
    def cost_delta(v: int, frm: str, A, B, S, T) -> int:
        if frm == "A":
            A2, B2, S2, T2 = A & ~(1 << v), B | 1 << v, S, T
        elif frm == "B":
            A2, B2, S2, T2 = A | 1 << v, B & ~(1 << v), S, T
        elif frm == "S":
            A2, B2, S2, T2 = A, B, S & ~(1 << v), T | 1 << v
        else:
            A2, B2, S2, T2 = A, B, S | 1 << v, T & ~(1 << v)
        # only arcs at v change; count them locally
        def local(AA, SS, TT):
            src, dst = AA | SS, AA | TT
            c = 0
            if src >> v & 1:
                c += (G.out_adj[v] & dst).bit_count()
            if dst >> v & 1:
                c += (G.in_adj[v] & src).bit_count()
            return c
        return local(A2, S2, T2) - local(A, S, T)

    while abs(A.bit_count() - B.bit_count()) > 1:
        frm = "A" if A.bit_count() > B.bit_count() else "B"
        pool = A if frm == "A" else B
        v = min(bits(pool), key=lambda u: (cost_delta(u, frm, A, B, S, T), u))
        if frm == "A":
            A, B = A & ~(1 << v), B | 1 << v
        else:
            A, B = A | 1 << v, B & ~(1 << v)
    while abs(S.bit_count() - T.bit_count()) > 1:
        frm = "S" if S.bit_count() > T.bit_count() else "T"
        pool = S if frm == "S" else T
        v = min(bits(pool), key=lambda u: (cost_delta(u, frm, A, B, S, T), u))
        if frm == "S":
            S, T = S & ~(1 << v), T | 1 << v
        else:
            S, T = S | 1 << v, T & ~(1 << v)
    return A, B, S, T


def _refine_case1(G, D, n, p, A0, B0, S0, T0, X):
    h2 = p.F("eta2") * n
    oS, iS, oT, iT = D.out_into(S0), D.in_from(S0), D.out_into(T0), D.in_from(T0)
    Z = X | A0 | B0
    Z1 = Z2 = 0
    for v in bits(Z):
        if oS[v] >= 2 * h2 and iS[v] >= 2 * h2:
            Z1 |= 1 << v
        elif oT[v] >= 2 * h2 and iT[v] >= 2 * h2:
            Z2 |= 1 << v
    S = (S0 & ~X) | Z1
    T = (T0 & ~X) | Z2
    rest = Z & ~(Z1 | Z2)
    oS, iS, oT, iT = D.out_into(S), D.in_from(S), D.out_into(T), D.in_from(T)
    A = B = 0
    for v in bits(rest):
        sa = min(oS[v], iT[v])
        sb = min(iS[v], oT[v])
        if sb > sa:
            B |= 1 << v
        else:
            A |= 1 << v
    return A, B, S, T


def _refine_case2(G, D, n, p, A0, B0, S0, T0, X):
    fifth = Fraction(n, 5)
    oA, iA, oB, iB = D.out_into(A0), D.in_from(A0), D.out_into(B0), D.in_from(B0)
    tests = [
        lambda v: oB[v] >= fifth and iB[v] >= fifth,
        lambda v: oA[v] >= fifth and iA[v] >= fifth,
        lambda v: oB[v] >= fifth and iA[v] >= fifth,
        lambda v: iB[v] >= fifth and oA[v] >= fifth,
    ]
    scores = [
        lambda v: min(oB[v], iB[v]), lambda v: min(oA[v], iA[v]),
        lambda v: min(oB[v], iA[v]), lambda v: min(iB[v], oA[v]),
    ]
    Zs = [0, 0, 0, 0]
    for v in bits(X):
        idx = next((i for i, f in enumerate(tests) if f(v)), None)
        if idx is None:
            idx = max(range(4), key=lambda i: (scores[i](v), -i))
        Zs[idx] |= 1 << v
    A1 = (A0 & ~X) | Zs[0]
    B1 = (B0 & ~X) | Zs[1]
    S0x, T0x = S0 & ~X, T0 & ~X
    if A1.bit_count() > B1.bit_count():
        A1, B1 = B1, A1
        S0x, T0x = T0x, S0x
        Zs = [Zs[1], Zs[0], Zs[3], Zs[2]]
    room = B1.bit_count() - A1.bit_count()
    lim = Fraction(n, 20)
    oB1, iB1 = D.out_into(B1), D.in_from(B1)
    Bp = Bpp = 0
    for v in bits(B1):
        if (Bp | Bpp).bit_count() >= room:
            break
        if oB1[v] >= lim:
            Bp |= 1 << v
        elif iB1[v] >= lim:
            Bpp |= 1 << v
    Bset = B1 & ~(Bp | Bpp)
    S1 = S0x | Zs[2] | Bp
    T1 = T0x | Zs[3] | Bpp
    room = Bset.bit_count() - A1.bit_count()
    oB, iB = D.out_into(Bset), D.in_from(Bset)
    Sp = Tp = 0
    for v in bits(S1 | T1):
        if (Sp | Tp).bit_count() >= room:
            break
        if oB[v] >= lim and iB[v] >= lim:
            if S1 >> v & 1:
                Sp |= 1 << v
            else:
                Tp |= 1 << v
    A = A1 | Sp | Tp
    S = S1 & ~Sp
    T = T1 & ~Tp
    return A, Bset, S, T


def _refine_case3(G, D, n, p, A0, B0, S0, T0, X):
    h = 2 * p.F("eta1") * n
    oA, iA, oB, iB = D.out_into(A0), D.in_from(A0), D.out_into(B0), D.in_from(B0)
    oBS, iAS = D.out_into(B0 | S0), D.in_from(A0 | S0)
    oAT, iBT = D.out_into(A0 | T0), D.in_from(B0 | T0)
    tests = [
        lambda v: (oB[v], iB[v]), lambda v: (oA[v], iA[v]),
        lambda v: (oBS[v], iAS[v]), lambda v: (oAT[v], iBT[v]),
    ]
    Zs = [0, 0, 0, 0]
    for v in bits(X):
        vals = [min(f(v)) for f in tests]
        idx = next((i for i, m in enumerate(vals) if m >= h), None)
        if idx is None:
            idx = max(range(4), key=lambda i: (vals[i], -i))
        Zs[idx] |= 1 << v
    return ((A0 & ~X) | Zs[0], (B0 & ~X) | Zs[1], (S0 & ~X) | Zs[2], (T0 & ~X) | Zs[3])


TAG_OF_CASE = {"case1": "STExtremal", "case2": "ABExtremal", "case3": "ABSTExtremal"}
REFINE = {"case1": _refine_case1, "case2": _refine_case2, "case3": _refine_case3}


def _normalize(n: int, A: int, B: int, S: int, T: int) -> tuple[VertexPartition, bool]:
    if A.bit_count() > B.bit_count():
        A, B, S, T = B, A, T, S
    rev = False
    if S.bit_count() > T.bit_count():
        S, T = T, S
        rev = True
    return VertexPartition(n, A, B, S, T), rev


def low_degree_sets(G: Digraph, D: Degrees, p: ConstantsProfile, A0, B0, S0, T0) -> int:
    n = G.n
    thr = Fraction(n, 2) - Fraction(math.sqrt(p.eps)) * n
    o1, i2 = D.out_into(B0 | S0), D.in_from(B0 | T0)
    o3, i4 = D.out_into(A0 | T0), D.in_from(A0 | S0)
    X = 0
    for v in range(n):
        bit = 1 << v
        if (A0 | S0) & bit and o1[v] < thr:
            X |= bit
        if (A0 | T0) & bit and i2[v] < thr:
            X |= bit
        if (B0 | T0) & bit and o3[v] < thr:
            X |= bit
        if (B0 | S0) & bit and i4[v] < thr:
            X |= bit
    return X


def classify(G: Digraph, profile: ConstantsProfile = DESK, budget: int | None = None,
             exact_limit: int = 18, seed: int = 0) -> ExtremalClass:
    n = G.n
    warn = []
    if min_semidegree(G) * 2 < n:
        warn.append(f"min semidegree {min_semidegree(G)} < n/2")
    search = find_violating_set(G, profile, budget, exact_limit, seed)
    if search.X is None:
        return ExtremalClass("ExpanderCandidate", exact=search.exact, warnings=warn)
    X = search.X
    RN = robust_outneighbourhood(G, X, profile.nu)
    full = G.full
    A0, B0, S0, T0 = X & ~RN, RN & ~X, X & RN, full & ~X & ~RN
    A0, B0, S0, T0 = _balance(G, A0, B0, S0, T0)
    D = Degrees(G)
    Xlow = low_degree_sets(G, D, profile, A0, B0, S0, T0)
    a0, b0, s0, t0 = (m.bit_count() for m in (A0, B0, S0, T0))
    tn2 = 2 * profile.F("tau") * n
    if a0 < tn2 and b0 < tn2:
        primary = "case1"
    elif s0 < tn2 and t0 < tn2:
        primary = "case2"
    elif min(a0, b0, s0, t0) >= tn2 - 1:
        primary = "case3"
    else:
        primary = None
        warn.append(f"sizes {(a0, b0, s0, t0)} match no refinement case; trying all")
    order = [primary] if primary else []
    order += [c for c in ("case1", "case2", "case3") if c != primary]
    attempts = []
    for case in order:
        A, B_, S, T = REFINE[case](G, D, n, profile, A0, B0, S0, T0, Xlow)
        P, rev = _normalize(n, A, B_, S, T)
        H = G.reverse() if rev else G
        cert = certify_partition(H, P, TAG_OF_CASE[case], profile, None if rev else D)
        attempts.append((case, cert.failed()))
        if cert.passed:
            if case != primary:
                warn.append(f"primary case {primary} failed certification; {case} certified")
            return ExtremalClass(TAG_OF_CASE[case], P, cert, rev, X, case, search.exact, warn)
    raise ClassificationError(f"violating set found but no refinement certified: {attempts}", attempts)
