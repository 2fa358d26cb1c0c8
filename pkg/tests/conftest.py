import itertools
import random

import pytest

from hamorient.digraph import CyclePattern, Digraph, Embedding, validate_embedding


def brute_force_embed(G: Digraph, C: CyclePattern):
    """Reference search over all vertex orders; independent of the oracle."""
    n = G.n
    for perm in itertools.permutations(range(n)):
        ok = True
        for i in range(n):
            u, v = perm[i], perm[(i + 1) % n]
            if not (G.has_arc(u, v) if C.dirs[i] else G.has_arc(v, u)):
                ok = False
                break
        if ok:
            return Embedding(perm)
    return None


def random_digraph(n: int, p: float, rng: random.Random) -> Digraph:
    return Digraph.from_arcs(n, [(u, v) for u in range(n) for v in range(n) if u != v and rng.random() < p])


def random_pattern(n: int, rng: random.Random) -> CyclePattern:
    return CyclePattern([rng.random() < 0.5 for _ in range(n)])


@pytest.fixture
def rng():
    return random.Random(20261016)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])


__all__ = ["brute_force_embed", "random_digraph", "random_pattern", "validate_embedding"]
