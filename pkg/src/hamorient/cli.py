"""Command-line interface.

Machine output (JSON or CSV) goes to stdout, diagnostics to stderr.  Exit
codes: 0 success or valid, 1 not found or invalid, 2 usage, 3 limit or budget.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .covers.engine import NotFound, PlannerBudget
from .digraph import CyclePattern, Digraph, Embedding, validate_embedding
from .embedder import STRATEGIES, AntidirectedUnsupported, ConstructorFailed, embed_cycle
from .generators import FAMILIES, build_family
from .oracle import DEFAULT_LIMIT, PATTERN_CLASSES, OracleLimitExceeded, SearchStats, oracle_embed, \
    threshold_scan
from .structure import DESK, PROFILES, BudgetExhausted, ClassificationError, ConstantsProfile, classify

OK, NOT_FOUND, USAGE, LIMIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _profile(name: str | None) -> ConstantsProfile:
    if name is None:
        return DESK
    if name in PROFILES:
        return PROFILES[name]
    path = Path(name)
    if not path.exists():
        raise UsageError(f"profile {name!r} is neither a built-in ({', '.join(PROFILES)}) nor a file")
    return ConstantsProfile.load(path)


def _digraph(path: str) -> Digraph:
    try:
        return Digraph.from_text(Path(path).read_text())
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except ValueError as e:
        raise UsageError(f"{path}: {e}") from None


def _pattern(s: str, n: int) -> CyclePattern:
    s = s.strip().upper()
    if not s or set(s) - {"F", "B"}:
        raise UsageError("pattern must be a string over F and B")
    if len(s) != n:
        raise UsageError(f"pattern length {len(s)} differs from vertex count {n}")
    return CyclePattern(s)


def _parse_value(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def _parse_params(items: list[str]) -> dict:
    out = {}
    for it in items:
        key, sep, val = it.partition("=")
        if not sep:
            raise UsageError(f"parameter {it!r} is not key=value")
        out[key] = _parse_value(val)
    return out


def _parse_range(spec: str) -> tuple[str, list[int]]:
    key, sep, rng = spec.partition("=")
    if not sep:
        raise UsageError(f"range {spec!r} is not key=lo:hi or key=v1,v2")
    try:
        if ":" in rng:
            lo, hi = (int(x) for x in rng.split(":"))
            return key, list(range(lo, hi + 1))
        return key, [int(x) for x in rng.split(",")]
    except ValueError:
        raise UsageError(f"range {spec!r} has non-integer bounds") from None


# ------------------------------------------------------------- subcommands

def cmd_generate(args) -> int:
    params = _parse_params(args.param)
    for key in ("n", "m", "seed", "delta"):
        if getattr(args, key) is not None:
            params[key] = getattr(args, key)
    if args.profile is not None:
        params["profile"] = _profile(args.profile)
    try:
        G = build_family(args.family, **params)
    except KeyError as e:
        raise UsageError(f"family {args.family} needs parameter {e.args[0]}") from None
    except (TypeError, ValueError) as e:
        raise UsageError(f"family {args.family}: {e}") from None
    label = " ".join(f"{k}={v if not isinstance(v, ConstantsProfile) else v.name}"
                     for k, v in sorted(params.items()))
    text = G.to_text([f"family {args.family} {label}".rstrip()])
    Path(args.output).write_text(text)
    _emit({"schema": "v1", "family": args.family, "n": G.n, "arcs": G.arc_count(), "output": args.output})
    return OK


def cmd_classify(args) -> int:
    G = _digraph(args.file)
    cls = classify(G, _profile(args.profile), args.budget, seed=args.seed or 0)
    _emit(cls.to_json())
    return OK


def cmd_embed(args) -> int:
    G = _digraph(args.file)
    C = _pattern(args.pattern, G.n)
    res = embed_cycle(G, C, _profile(args.profile), args.strategy, oracle_limit=args.oracle_limit,
                      seed=args.seed or 0, threads=args.threads)
    _log("timings (ms): " + ", ".join(f"{k}={v:.1f}" for k, v in sorted(res.timings.items())))
    _emit(res.to_json(timings=False))
    return OK if res.found else NOT_FOUND


def cmd_oracle(args) -> int:
    G = _digraph(args.file)
    C = _pattern(args.pattern, G.n)
    stats = SearchStats()
    emb = oracle_embed(G, C, args.limit, stats)
    _log(f"nodes={stats.nodes} millis={stats.millis:.1f}")
    _emit({"schema": "v1", "status": "found" if emb else "not_found",
           "embedding": list(emb.images) if emb else None, "nodes_expanded": stats.nodes})
    return OK if emb else NOT_FOUND


def cmd_scan(args) -> int:
    key, values = _parse_range(args.range)
    base = _parse_params(args.param)
    params = [{**base, key: v} for v in values]
    report = threshold_scan(args.family, params, args.patterns, args.limit)
    for s in report.skipped:
        _log(f"skipped {s}")
    csv = report.to_csv(timings=args.timings)
    if args.output:
        Path(args.output).write_text(csv)
    else:
        sys.stdout.write(csv)
    absent = len(report.absences())
    _log(f"{len(report.rows)} rows, {absent} absent")
    return OK


def _load_embedding(arg: str) -> list:
    text = arg
    path = Path(arg)
    if not arg.lstrip().startswith(("[", "{")) and path.exists():
        text = path.read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"embedding is not JSON: {e}") from None
    if isinstance(obj, dict):
        obj = obj.get("embedding")
    if not isinstance(obj, list) or not all(isinstance(v, int) for v in obj):
        raise UsageError("embedding must be a JSON list of vertex ids (or an object with an 'embedding' list)")
    return obj


def cmd_verify(args) -> int:
    G = _digraph(args.file)
    C = _pattern(args.pattern, G.n)
    images = _load_embedding(args.embedding)
    ok = len(images) == G.n and validate_embedding(G, C, Embedding(tuple(images)))
    _emit({"schema": "v1", "valid": ok})
    return OK if ok else NOT_FOUND


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="parallelism hint (default 1)")
    common.add_argument("--profile", help=f"constants profile: {', '.join(PROFILES)} or a profile file")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    ap = argparse.ArgumentParser(prog="hamorient",
                                 description="Oriented Hamilton cycles in digraphs of large minimum semidegree.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write a family instance in digraph v1 text format")
    g.add_argument("family", choices=FAMILIES)
    g.add_argument("param", nargs="*", help="extra key=value parameters")
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--delta", type=int)
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("classify", parents=[common], help="print the extremal classification as JSON")
    c.add_argument("file")
    c.add_argument("--budget", type=int)
    c.set_defaults(func=cmd_classify)

    e = sub.add_parser("embed", parents=[common], help="embed a cycle pattern; prints the result JSON")
    e.add_argument("file")
    e.add_argument("--pattern", required=True)
    e.add_argument("--strategy", choices=STRATEGIES, default="auto")
    e.add_argument("--oracle-limit", type=int, default=DEFAULT_LIMIT)
    e.set_defaults(func=cmd_embed)

    o = sub.add_parser("oracle", parents=[common], help="exact search for a cycle pattern")
    o.add_argument("file")
    o.add_argument("--pattern", required=True)
    o.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    o.set_defaults(func=cmd_oracle)

    s = sub.add_parser("scan", parents=[common], help="oracle scan over a family parameter range; writes CSV")
    s.add_argument("--family", required=True, choices=FAMILIES)
    s.add_argument("--range", required=True, help="key=lo:hi (inclusive) or key=v1,v2,...")
    s.add_argument("--param", action="append", default=[], help="fixed key=value parameter")
    s.add_argument("--patterns", choices=PATTERN_CLASSES, default="all")
    s.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    s.add_argument("--timings", action="store_true", help="include the millis column")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_scan)

    v = sub.add_parser("verify", parents=[common], help="exit 0 iff the embedding is a copy of the pattern")
    v.add_argument("file")
    v.add_argument("--pattern", required=True)
    v.add_argument("--embedding", required=True, help="JSON list, result JSON, or a file holding either")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        _log(f"error: {e}")
        return USAGE
    except (OracleLimitExceeded, BudgetExhausted, PlannerBudget, AntidirectedUnsupported) as e:
        _log(f"limit: {type(e).__name__}: {e}")
        return LIMIT
    except (NotFound, ConstructorFailed, ClassificationError) as e:
        _log(f"not found: {type(e).__name__}: {e}")
        return NOT_FOUND


if __name__ == "__main__":
    sys.exit(main())
