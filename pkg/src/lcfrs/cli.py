"""Command-line front end: analyze | recognize | parse | bench.

Exit codes: 0 accept (or success for analyze/bench), 1 reject, 2 error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from math import comb

from . import bundled
from .engine import EngineUnsupported, engine_ready
from .grammar import GrammarError, analyze, is_single_initial, parse_grammar, to_single_initial
from .oracle import tabular_recognize
from .recognizer import extract_derivation, run_recognition, space_rank

BACKENDS = ("naive", "bitset", "strassen")
CLOSURES = ("fixpoint", "valiant")

# benchmark guard: rows of the address space beyond which a run is skipped
DIM_CAP = 8000


def _load_grammar(source: str):
    if os.path.isfile(source):
        with open(source, encoding="utf-8") as fh:
            return parse_grammar(fh.read())
    if source in bundled.NAMES:
        return bundled.load(source)
    raise GrammarError(
        "grammar %r is neither a file nor a bundled name (%s)"
        % (source, ", ".join(bundled.NAMES))
    )


def _tokens(arg: str):
    if arg.startswith("@"):
        with open(arg[1:], encoding="utf-8") as fh:
            arg = fh.read()
    return arg.split()


def _cmd_analyze(args) -> int:
    g = _load_grammar(args.grammar)
    report = analyze(g, args.omega)
    if args.json:
        print(json.dumps(report.to_json(), indent=2))
        return 0
    print("max fan-out f = %d" % report.f)
    print("contact rank d = %d" % report.d)
    print("balanced = %s" % ("yes" if report.balanced else "no"))
    print("single-initial = %s" % ("yes" if report.single_initial else "no"))
    by_rid = {r.rid: r for r in g.rules}
    for pr in report.per_rule:
        print("rule %d (%s): delta=%d d=%d" % (pr.rid, by_rid[pr.rid], pr.delta, pr.d))
    print(
        "predicted matmul exponent = %.4f  (omega=%g, d=%d%s)"
        % (
            report.predicted_matmul_exponent,
            report.omega,
            report.d,
            ", +1 balanced" if report.balanced else "",
        )
    )
    print("tabular exponent = %d" % report.tabular_exponent)
    return 0


def _cmd_recognize(args) -> int:
    g = _load_grammar(args.grammar)
    tokens = _tokens(args.sentence)
    if args.engine == "tabular":
        accepted, chart = tabular_recognize(g, tokens)
        stats = {"engine": "tabular", "facts": len(chart)}
    else:
        res = run_recognition(g, tokens, args.backend, args.closure)
        accepted, stats = res.accepted, dict(res.stats, engine="matmul")
    if args.json:
        print(json.dumps({"sentence": tokens, "accepted": accepted, "stats": stats}))
    else:
        print("ACCEPT" if accepted else "REJECT")
    return 0 if accepted else 1


def _cmd_parse(args) -> int:
    g = _load_grammar(args.grammar)
    tokens = _tokens(args.sentence)
    res = run_recognition(g, tokens, args.backend, args.closure)
    if not res.accepted:
        print("null")
        return 1
    tree = extract_derivation(res.chart, res.grammar, tokens)
    print(json.dumps(tree.to_json(), indent=2))
    return 0


def _dim_bound(n: int, d: int) -> int:
    return sum(comb(n + L, L) * (L + 1) for L in range(1, d + 1))


def _bench_sentence(name: str, n: int):
    if name == "cfg_anbn":
        return ["a"] * (n // 2) + ["b"] * (n - n // 2)
    if name == "count4":
        if n % 4 == 0:
            m = n // 4
            return ["a"] * m + ["b"] * m + ["c"] * m + ["d"] * m
        return ["a"] * n
    if name == "itg_sep":
        half = max(1, (n - 1) // 2)
        u = [("x", "y")[t % 2] for t in range(half)]
        return u + ["#"] + list(reversed(u))
    if name == "tag_style":
        return ["x"] + ["y"] * (n - 1)
    if name == "dual_initial_demo":
        return "a b a a b a".split()
    return ["a"] * n


def _cmd_bench(args) -> int:
    names = [args.grammar] if args.grammar else list(bundled.NAMES)
    sweep = [n for n in (4, 8, 16, 32) if n <= args.max_len]
    writer = csv.writer(sys.stdout)
    writer.writerow(["grammar", "n", "engine", "backend", "closure", "ms", "facts", "muls"])
    done = set()
    for name in names:
        try:
            g = _load_grammar(name)
        except (GrammarError, OSError) as exc:
            print("bench: skipping %s: %s" % (name, exc), file=sys.stderr)
            continue
        for n in sweep:
            tokens = _bench_sentence(name, n)
            key = (name, len(tokens))
            if key in done:
                continue
            done.add(key)
            work = g if is_single_initial(g) else to_single_initial(g)
            dim = _dim_bound(len(tokens), space_rank(work))
            if dim > DIM_CAP:
                print(
                    "bench: skipping %s n=%d (address space ~%d rows)"
                    % (name, len(tokens), dim),
                    file=sys.stderr,
                )
            elif engine_ready(work):
                print(
                    "bench: %s not runnable on the matrix engine" % name,
                    file=sys.stderr,
                )
            else:
                res = run_recognition(g, tokens, args.backend, args.closure)
                writer.writerow(
                    [
                        name,
                        len(tokens),
                        "matmul",
                        args.backend,
                        args.closure,
                        "%.3f" % (res.stats["seconds"] * 1000),
                        res.stats["facts"],
                        res.stats["muls"],
                    ]
                )
            t0 = time.perf_counter()
            _, chart = tabular_recognize(g, tokens)
            ms = (time.perf_counter() - t0) * 1000
            writer.writerow([name, len(tokens), "tabular", "-", "-", "%.3f" % ms, len(chart), 0])
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="lcfrs",
        description="Recognition for binary LCFRS by matrix transitive closure.",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, sentence=False):
        p.add_argument("--grammar", required=True,
                       help="grammar file or bundled name (%s)" % ", ".join(bundled.NAMES))
        if sentence:
            p.add_argument("--sentence", required=True,
                           help="whitespace-separated tokens; @FILE reads a file")
        p.add_argument("--backend", choices=BACKENDS, default="bitset")
        p.add_argument("--closure", choices=CLOSURES, default="fixpoint")
        p.add_argument("--json", action="store_true")
        p.add_argument("--omega", type=float, default=2.3728639)

    p = sub.add_parser("analyze", help="report fan-out, contact rank, balance, exponents")
    common(p)
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("recognize", help="ACCEPT/REJECT a sentence")
    common(p, sentence=True)
    p.add_argument("--engine", choices=("matmul", "tabular"), default="matmul")
    p.set_defaults(fn=_cmd_recognize)

    p = sub.add_parser("parse", help="emit a derivation tree as JSON")
    common(p, sentence=True)
    p.set_defaults(fn=_cmd_parse)

    p = sub.add_parser("bench", help="CSV timing sweep over bundled grammars")
    p.add_argument("--grammar", help="bench a single grammar instead of all bundled ones")
    p.add_argument("--backend", choices=BACKENDS, default="bitset")
    p.add_argument("--closure", choices=CLOSURES, default="fixpoint")
    p.add_argument("--max-len", type=int, default=16)
    p.set_defaults(fn=_cmd_bench)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (GrammarError, EngineUnsupported, OSError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
