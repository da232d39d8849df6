import random
import re

import pytest

from lcfrs.addresses import Address, enumerate_space, merge_m, splits_of_endpoints
from lcfrs.engine import (
    CopySym,
    ProductMatrix,
    cell_product,
    copy_symbol_cells,
    engine_ready,
    matrix_product,
    pi_copy,
    seed,
    union,
)
from lcfrs.grammar import parse_grammar

CFG_AB = "start S\nS -> A B : b1 g1\nA -> : 'a'\nB -> : 'b'\n"


def A(*positions, mark=-1):
    return Address(positions, mark)


def facts(matrix):
    """{(row Address, col Address, symbol)} over nonempty cells."""
    addrs = matrix.space.addresses
    return {
        (addrs[r], addrs[c], s)
        for (r, c), syms in matrix.cells.items()
        for s in syms
    }


class TestSeed:
    def test_scan_covers_every_equivalent_cell(self, grammars):
        g = grammars["count4"]
        sp = enumerate_space(4, 3)
        T = seed(g, ["a", "b", "c", "d"], sp)
        # 'a'...'c' can only sit at spans (0,1) and (2,3)
        want = ((0, 1), (2, 3))
        for i in sp.addresses:
            for j in sp.addresses:
                if i.mark >= 0 or j.mark >= 0:
                    continue
                spans = merge_m(i, j)
                if spans is None:
                    continue
                has = "X" in T.get(sp.ids[i], sp.ids[j])
                assert has == (spans == want), (i, j)

    def test_empty_span_words_anchor_anywhere_rightward(self, grammars):
        g = grammars["itg_sep"]
        sp = enumerate_space(3, 3)
        T = seed(g, ["x", "#", "y"], sp)
        got = {(i, j) for i, j, s in facts(T) if s == "M"}
        spans_seen = {merge_m(i, j) for i, j in got}
        assert ((1, 2), (2, 2)) in spans_seen
        assert ((1, 2), (3, 3)) in spans_seen
        assert all(s[0] == (1, 2) for s in spans_seen)

    def test_no_match_no_fact(self, grammars):
        g = grammars["count4"]
        sp = enumerate_space(2, 3)
        T = seed(g, ["a", "a"], sp)
        assert not [f for f in facts(T) if f[2] == "B"]

    def test_includes_grammar_free_copy_scaffold(self, grammars):
        g = grammars["cfg_anbn"]
        sp = enumerate_space(2, 1)
        T = seed(g, ["a", "b"], sp)
        for r, c, sym in copy_symbol_cells(sp):
            assert sym in T.get(r, c)

    def test_strictly_upper_triangular(self, grammars):
        g = grammars["count4"]
        sp = enumerate_space(3, 3)
        T = seed(g, ["a", "b", "c"], sp)
        assert T.is_upper_triangular()
        assert all((r, c) for (r, c) in T.cells if r < c)


class TestCopyCells:
    def test_expected_members(self):
        sp = enumerate_space(8, 3)
        table = {}
        for r, c, sym in copy_symbol_cells(sp):
            table.setdefault((sp.addresses[r], sp.addresses[c]), set()).add(sym)
        assert CopySym.ToCol in table[(A(4, 5), A(4, 5, 8, mark=2))]
        assert CopySym.FromRow in table[(A(1), A(1, 8))]
        assert CopySym.UnmarkCol in table[(A(2, 7, 8, mark=2), A(2, 7, 8))]
        assert CopySym.UnmarkRow in table[(A(1, 8), A(1, 8, mark=0))]
        assert CopySym.ToRow in table[(A(2, 7, mark=0), A(7))]
        assert CopySym.FromCol in table[(A(1, 8), A(8))]

    def test_all_above_diagonal(self):
        sp = enumerate_space(4, 2)
        assert all(r < c for r, c, _ in copy_symbol_cells(sp))

    def test_unmark_cells_pair_marked_with_unmarked_twin(self):
        sp = enumerate_space(3, 2)
        for r, c, sym in copy_symbol_cells(sp):
            i, j = sp.addresses[r], sp.addresses[c]
            if sym is CopySym.UnmarkCol:
                assert i.unmarked() == j
            if sym is CopySym.UnmarkRow:
                assert j.unmarked() == i


class TestCellProduct:
    def test_binary_rule_fires(self, grammars):
        g = grammars["cfg_anbn"]
        got = cell_product({"A"}, {"B"}, A(0), A(1), A(2), g)
        assert got == {"S"}
        # no rule combines A with S
        assert cell_product({"A"}, {"S"}, A(0), A(1), A(3), g) == set()

    def test_empty_operands(self, grammars):
        g = grammars["cfg_anbn"]
        assert cell_product(set(), {"S"}, A(0), A(1), A(2), g) == set()
        assert cell_product({"A"}, set(), A(0), A(1), A(2), g) == set()

    def test_no_rule_on_marked_addresses(self, grammars):
        g = grammars["cfg_anbn"]
        got = cell_product({"A"}, {"B"}, A(0), A(1, mark=0), A(2), g)
        assert got == set()

    def test_wrap_chain_step_by_step(self, grammars):
        """Move one position of a two-span fact from the row side to the
        column side: attach it marked, detach the row copy, drop the mark."""
        g = grammars["count4"]
        j1 = A(2, 7, 8, mark=2)
        step1 = cell_product({"B"}, {CopySym.ToCol}, A(1, 8), A(2, 7), j1, g)
        assert step1 == {"B"}
        step2 = cell_product({CopySym.FromRow}, {"B"}, A(1), A(1, 8), j1, g)
        assert step2 == {"B"}
        step3 = cell_product({"B"}, {CopySym.UnmarkCol}, A(1), j1, A(2, 7, 8), g)
        assert step3 == {"B"}

    def test_move_requires_membership(self, grammars):
        g = grammars["count4"]
        # 9 is not an endpoint of the fact at ((1,8),(2,7))
        got = cell_product(
            {"B"}, {CopySym.ToCol}, A(1, 8), A(2, 7), A(2, 7, 9, mark=2), g
        )
        assert got == set()

    def test_unmark_checks_fanout_size(self, grammars):
        g = grammars["count4"]
        # S has fan-out 1, so a 4-endpoint cell cannot hold it after unmark
        got = cell_product({"S"}, {CopySym.UnmarkCol}, A(1), A(2, 7, 8, mark=2), A(2, 7, 8), g)
        assert got == set()


class TestMatrixProduct:
    def test_cfg_sentence(self, grammars):
        g = grammars["cfg_anbn"]
        sp = enumerate_space(2, 1)
        T = seed(g, ["a", "b"], sp)
        P = matrix_product(T, T, g)
        assert "S" in P.get(sp.ids[A(0)], sp.ids[A(2)])

    def test_space_mismatch_raises(self, grammars):
        g = grammars["cfg_anbn"]
        T1 = ProductMatrix(enumerate_space(2, 1))
        T2 = ProductMatrix(enumerate_space(3, 1))
        with pytest.raises(ValueError):
            matrix_product(T1, T2, g)

    def test_annihilates_empty(self, grammars):
        g = grammars["cfg_anbn"]
        sp = enumerate_space(2, 1)
        T = seed(g, ["a", "b"], sp)
        empty = ProductMatrix(sp)
        assert matrix_product(T, empty, g).fact_count() == 0
        assert matrix_product(empty, T, g).fact_count() == 0

    def _random_submatrix(self, rng, pool):
        out = ProductMatrix(pool.space)
        for cell, syms in pool.cells.items():
            chosen = {s for s in syms if rng.random() < 0.6}
            if chosen and rng.random() < 0.8:
                out.cells[cell] = chosen
        return out

    def test_distributes_over_union(self, grammars):
        g = grammars["count4"]
        sp = enumerate_space(4, 3)
        T = seed(g, ["a", "b", "c", "d"], sp)
        pool = union(T, matrix_product(T, T, g))
        rng = random.Random(5)
        for _ in range(3):
            M1 = self._random_submatrix(rng, pool)
            M2 = self._random_submatrix(rng, pool)
            M3 = self._random_submatrix(rng, pool)
            left = matrix_product(M1, union(M2, M3), g)
            split = union(matrix_product(M1, M2, g), matrix_product(M1, M3, g))
            assert left == split
            right = matrix_product(union(M1, M2), M3, g)
            split2 = union(matrix_product(M1, M3, g), matrix_product(M2, M3, g))
            assert right == split2

    def test_union_idempotent_commutative(self, grammars):
        g = grammars["cfg_anbn"]
        sp = enumerate_space(2, 1)
        T = seed(g, ["a", "b"], sp)
        P = matrix_product(T, T, g)
        assert union(T, T) == T
        assert union(T, P) == union(P, T)


class TestPiCopy:
    def test_fact_reaches_every_equivalent_split(self):
        sp = enumerate_space(8, 3)
        T = ProductMatrix(sp)
        T.add(sp.ids[A(1, 8)], sp.ids[A(2, 7)], "B")
        pi = pi_copy(T)
        for row, col in splits_of_endpoints((1, 2, 7, 8), 3):
            assert "B" in pi.get(sp.ids[Address(row)], sp.ids[Address(col)])

    def test_idempotent(self):
        sp = enumerate_space(6, 2)
        T = ProductMatrix(sp)
        T.add(sp.ids[A(0, 3)], sp.ids[A(1, 2)], "Z")
        once = pi_copy(T)
        assert pi_copy(once) == once

    def test_copy_symbols_not_duplicated(self):
        sp = enumerate_space(4, 2)
        T = ProductMatrix(sp)
        T.add(sp.ids[A(0)], sp.ids[A(0, 1, mark=1)], CopySym.ToCol)
        assert pi_copy(T) == T

    def test_marked_cells_left_alone(self):
        sp = enumerate_space(4, 2)
        T = ProductMatrix(sp)
        T.add(sp.ids[A(0, 1, mark=1)], sp.ids[A(2, 3)], "Q")
        assert pi_copy(T) == T


class TestEngineReady:
    def test_bundled_grammars_run(self, grammars):
        for name in ("cfg_anbn", "count4", "tag_style", "itg_sep"):
            assert engine_ready(grammars[name]) == [], name

    def test_dual_initial_rejected(self, grammars):
        problems = engine_ready(grammars["dual_initial_demo"])
        assert any("single-initial" in p for p in problems)

    def test_absorbed_result_rejected(self):
        # the head keeps every endpoint, leaving an empty column address
        g = parse_grammar(
            "start S\nS -> Z M : b1 g1 b2\n"
            "Z -> : 'x' , 'x'\nM -> : '#'\n"
        )
        problems = engine_ready(g)
        assert any("column address would be empty" in p for p in problems)


class TestDump:
    def test_line_format_and_order(self, grammars):
        g = grammars["cfg_anbn"]
        sp = enumerate_space(2, 1)
        T = seed(g, ["a", "b"], sp)
        lines = T.dump().splitlines()
        assert lines
        assert all(re.fullmatch(r"[^|]+ \| [^|]+ \| .+", ln) for ln in lines)
        assert "0 | 1 | A" in lines
        assert "0^ | 0 | UnmarkCol" in lines
        by_str = {str(a): t for t, a in enumerate(sp.addresses)}
        cells = [
            (by_str[ln.split(" | ")[0]], by_str[ln.split(" | ")[1]])
            for ln in lines
        ]
        assert cells == sorted(cells)
