"""Shared fixtures: bundled grammars, a random-grammar generator, and the
full bundled-grammar sweep (engine vs oracle vs enumeration) that several
acceptance checks share."""

from __future__ import annotations

import itertools
import random

import pytest

from lcfrs import bundled
from lcfrs.engine import pi_copy
from lcfrs.grammar import Grammar, Rule, Var, per_rule_d, validate
from lcfrs.oracle import enumerate_language, tabular_recognize
from lcfrs.recognizer import run_recognition


@pytest.fixture(scope="session")
def grammars():
    return {name: bundled.load(name) for name in bundled.NAMES}


# ---------------------------------------------------------------------------
# random grammars

def _random_comp(rng: random.Random, fa: int, fb: int, fc: int):
    """A valid composition: b1 first, sides in index order, every same-side
    adjacency broken by a template boundary, fa nonempty templates."""
    tail = [Var("b", i) for i in range(2, fb + 1)]
    gs = [Var("g", i) for i in range(1, fc + 1)]
    merged = [Var("b", 1)]
    while tail or gs:
        take_b = tail and (not gs or rng.random() < 0.5)
        merged.append(tail.pop(0) if take_b else gs.pop(0))
    mandatory = {
        p for p in range(1, len(merged)) if merged[p - 1].side == merged[p].side
    }
    if len(mandatory) > fa - 1:
        return None
    optional = [p for p in range(1, len(merged)) if p not in mandatory]
    extra = rng.sample(optional, fa - 1 - len(mandatory))
    cuts = sorted(mandatory | set(extra))
    out, prev = [], 0
    for cut in cuts + [len(merged)]:
        out.append(tuple(merged[prev:cut]))
        prev = cut
    return tuple(out)


def random_grammar(rng: random.Random, d_cap: int = 4) -> Grammar:
    names = ["S", "A", "B", "C"]
    fo = {"S": 1}
    for nm in names[1:]:
        fo[nm] = rng.randint(1, 3)
    rules = []

    def add_binary(lhs) -> bool:
        for _ in range(50):
            r1 = rng.choice(names[1:])
            r2 = rng.choice(names[1:])
            fa, fb, fc = fo[lhs], fo[r1], fo[r2]
            if fa >= fb + fc:
                continue
            comp = _random_comp(rng, fa, fb, fc)
            if comp is None:
                continue
            r = Rule(len(rules), lhs, (r1, r2), comp, None, (fa, fb, fc))
            if per_rule_d(r) > d_cap:
                continue
            rules.append(r)
            return True
        return False

    if not add_binary("S"):
        return random_grammar(rng, d_cap)
    for _ in range(rng.randint(1, 3)):
        add_binary(rng.choice(names[1:]))
    for nm in names[1:]:
        spans = []
        for _ in range(fo[nm]):
            spans.append(tuple(rng.choice("ab") for _ in range(rng.randint(0, 2))))
        if all(not s for s in spans):
            spans[0] = ("a",)
        rules.append(Rule(len(rules), nm, None, None, tuple(spans), (fo[nm], 0, 0)))
    g = Grammar("S", tuple(rules), fo, frozenset(fo), frozenset("ab"))
    problems = validate(g)
    assert not problems, problems
    return g


# ---------------------------------------------------------------------------
# the bundled sweep

def _all_strings(alphabet, max_len, min_len=1):
    for L in range(min_len, max_len + 1):
        yield from itertools.product(alphabet, repeat=L)


def sweep_sentences(name: str):
    if name == "cfg_anbn":
        return [list(t) for t in _all_strings("ab", 10)]
    if name == "count4":
        return [list(t) for t in _all_strings("abcd", 6)]
    if name == "itg_sep":
        out = []
        for u in _all_strings("xy", 3, min_len=0):
            for v in _all_strings("xy", 3, min_len=0):
                out.append(list(u) + ["#"] + list(v))
        return out
    if name == "dual_initial_demo":
        return [list(t) for t in _all_strings("ab", 6)]
    raise KeyError(name)


def _chart_violations(chart) -> list:
    """Structural checks every published matrix must satisfy."""
    out = []
    if not chart.is_upper_triangular():
        out.append("not upper-triangular")
    addrs = chart.space.addresses
    for (r, c), syms in chart.cells.items():
        if syms and (addrs[r].mark >= 0) + (addrs[c].mark >= 0) > 1:
            out.append("two marks at cell (%s, %s)" % (addrs[r], addrs[c]))
            break
    if pi_copy(chart) != chart:
        out.append("not copy-complete at fixpoint")
    return out


SWEEP_NAMES = ("cfg_anbn", "count4", "itg_sep", "dual_initial_demo")


@pytest.fixture(scope="session")
def sweep(grammars):
    """Recognize every sweep sentence three ways; collect disagreements,
    structural violations, and the accepted sets."""
    results = {}
    for name in SWEEP_NAMES:
        g = grammars[name]
        max_len = {"cfg_anbn": 10, "count4": 6, "itg_sep": 7, "dual_initial_demo": 6}[name]
        enumerated = enumerate_language(g, max_len)
        disagreements = []
        violations = []
        accepted = {}
        for toks in sweep_sentences(name):
            res = run_recognition(g, toks)
            by_oracle, _ = tabular_recognize(g, toks)
            by_enum = tuple(toks) in enumerated
            if not (res.accepted == by_oracle == by_enum):
                disagreements.append(
                    (name, " ".join(toks), res.accepted, by_oracle, by_enum)
                )
            if res.accepted:
                # keep the chart so derivations can be rebuilt later
                accepted[tuple(toks)] = (res.chart, res.grammar)
            bad = _chart_violations(res.chart)
            if bad:
                violations.append((name, " ".join(toks), bad))
        results[name] = {
            "grammar": g,
            "disagreements": disagreements,
            "violations": violations,
            "accepted": accepted,
            "sentences": len(sweep_sentences(name)),
        }
    return results
