"""Correctness oracles: a naive agenda chart parser and a bounded language
enumerator.

Both work on span tuples and string tuples directly -- no addresses, no
matrices -- so an engine bug and an oracle bug are unlikely to coincide.
"""

from __future__ import annotations

from collections import defaultdict

from .grammar import Grammar


def _word_placements(words, tokens, n):
    """All ways the quoted span sequences can sit over the sentence.

    Spans come in order and may touch; an empty span is a zero-width (p, p)
    anywhere at or after the previous span's end.
    """
    out = []

    def walk(idx, floor, acc):
        if idx == len(words):
            out.append(tuple(acc))
            return
        w = words[idx]
        if not w:
            for p in range(floor, n + 1):
                acc.append((p, p))
                walk(idx + 1, p, acc)
                acc.pop()
            return
        L = len(w)
        for s in range(floor, n - L + 1):
            if tokens[s:s + L] == w:
                acc.append((s, s + L))
                walk(idx + 1, s + L, acc)
                acc.pop()

    walk(0, 0, [])
    return out


def _instantiate(r, bs, cs, n):
    """Parent span tuples a binary rule derives from child span tuples.

    Within a template consecutive variables must touch; templates are laid
    out left to right; an empty template is a free zero-width span.
    """
    pick = {"b": bs, "g": cs}
    fixed = []
    for t in r.comp:
        if not t:
            fixed.append(None)
            continue
        spans = [pick[v.side][v.index - 1] for v in t]
        for u, w in zip(spans, spans[1:]):
            if u[1] != w[0]:
                return []
        fixed.append((spans[0][0], spans[-1][1]))
    out = []

    def walk(idx, floor, acc):
        if idx == len(fixed):
            out.append(tuple(acc))
            return
        f = fixed[idx]
        if f is None:
            for p in range(floor, n + 1):
                acc.append((p, p))
                walk(idx + 1, p, acc)
                acc.pop()
            return
        if f[0] < floor:
            return
        acc.append(f)
        walk(idx + 1, f[1], acc)
        acc.pop()

    walk(0, 0, [])
    return out


def tabular_recognize(g: Grammar, sentence):
    """Agenda-based chart recognition; returns (accepted, chart).

    The chart is the full set of (nonterminal, span tuple) items.
    """
    tokens = tuple(sentence)
    n = len(tokens)
    items = set()
    agenda = []

    def push(it):
        if it not in items:
            items.add(it)
            agenda.append(it)

    for r in g.lexical_rules():
        for spans in _word_placements(r.words, tokens, n):
            push((r.lhs, spans))

    as_b = defaultdict(list)
    as_c = defaultdict(list)
    for r in g.binary_rules():
        as_b[r.rhs[0]].append(r)
        as_c[r.rhs[1]].append(r)

    seen = defaultdict(list)   # nt -> list of span tuples already popped
    while agenda:
        nt, spans = agenda.pop()
        seen[nt].append(spans)
        for r in as_b[nt]:
            for cs in seen[r.rhs[1]]:
                for parent in _instantiate(r, spans, cs, n):
                    push((r.lhs, parent))
        for r in as_c[nt]:
            for bs in seen[r.rhs[0]]:
                # avoid double-firing when both children are this very item
                if r.rhs[0] == nt and bs == spans:
                    continue
                for parent in _instantiate(r, bs, spans, n):
                    push((r.lhs, parent))

    accepted = (g.start, ((0, n),)) in items
    return accepted, frozenset(items)


def enumerate_language(g: Grammar, max_len: int):
    """Every sentence of length <= max_len the grammar derives.

    Bottom-up iteration of per-nonterminal yield sets (tuples of token
    tuples), pruned at max_len; returns a set of token tuples.
    """
    if max_len > 12:
        raise ValueError("max_len capped at 12 (the state space explodes)")
    yields = {nt: set() for nt in g.nonterminals}
    for r in g.lexical_rules():
        spans = tuple(r.words)
        if sum(len(w) for w in spans) <= max_len:
            yields[r.lhs].add(spans)

    changed = True
    while changed:
        changed = False
        for r in g.binary_rules():
            pick = {}
            for bs in list(yields[r.rhs[0]]):
                pick["b"] = bs
                for cs in list(yields[r.rhs[1]]):
                    pick["g"] = cs
                    total = sum(len(w) for w in bs) + sum(len(w) for w in cs)
                    if total > max_len:
                        continue
                    spans = tuple(
                        tuple(tok for v in t for tok in pick[v.side][v.index - 1])
                        for t in r.comp
                    )
                    if spans not in yields[r.lhs]:
                        yields[r.lhs].add(spans)
                        changed = True

    return {spans[0] for spans in yields[g.start] if len(spans) == 1}
