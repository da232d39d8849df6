"""Dense bit-packed Boolean matrices, three multiplication backends, and the
rendering of the cell product as a bundle of plain Boolean matrix products.

The cell product decomposes per symbol: one masked product per binary rule
and six mask-filtered products per nonterminal for the copy moves.  Every
mask is a property of cell addresses alone, so masks are cached per
(grammar, sentence length) and reused across sentences.
"""

from __future__ import annotations

import numpy as np
from functools import lru_cache
from itertools import combinations_with_replacement

from .addresses import Address, AddressSpace, enumerate_space, sort_key
from .engine import CopySym, ProductMatrix
from .grammar import Grammar, configurations

try:  # compiled kernel if the extension built, else the numpy fallback
    from . import _matmul_kernel as _kernel
    KERNEL_KIND = "compiled"
except ImportError:  # pragma: no cover - depends on build environment
    from . import _matmul_fallback as _kernel
    KERNEL_KIND = "fallback"

BACKENDS = ("naive", "bitset", "strassen")


def _nwords(dim: int) -> int:
    return max(1, (dim + 63) // 64)


def pack_rows(dense) -> np.ndarray:
    """uint8/bool (r, c) -> packed uint64 (r, words), little-endian bits."""
    dense = np.ascontiguousarray(dense, dtype=np.uint8)
    r, c = dense.shape
    nw = _nwords(c)
    by = np.packbits(dense, axis=1, bitorder="little")
    if by.shape[1] < nw * 8:
        by = np.pad(by, ((0, 0), (0, nw * 8 - by.shape[1])))
    return np.ascontiguousarray(by).view(np.uint64)


def unpack_rows(words, c: int) -> np.ndarray:
    by = np.ascontiguousarray(words).view(np.uint8)
    return np.unpackbits(by, axis=1, bitorder="little")[:, :c]


class BoolMatrix:
    """Square Boolean matrix, rows packed into uint64 words."""

    __slots__ = ("dim", "words")

    def __init__(self, dim: int, words=None):
        self.dim = dim
        if words is None:
            words = np.zeros((dim, _nwords(dim)), dtype=np.uint64)
        self.words = words

    @classmethod
    def from_dense(cls, dense) -> "BoolMatrix":
        dense = np.asarray(dense)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise ValueError("need a square matrix")
        return cls(dense.shape[0], pack_rows(dense))

    @classmethod
    def identity(cls, dim: int) -> "BoolMatrix":
        return cls.from_dense(np.eye(dim, dtype=np.uint8))

    def to_dense(self) -> np.ndarray:
        return unpack_rows(self.words, self.dim)

    def set(self, i: int, j: int) -> None:
        self.words[i, j >> 6] |= np.uint64(1 << (j & 63))

    def test(self, i: int, j: int) -> bool:
        return bool((int(self.words[i, j >> 6]) >> (j & 63)) & 1)

    def any(self) -> bool:
        return bool(self.words.any())

    def count(self) -> int:
        return int(unpack_rows(self.words, self.dim).sum())

    def copy(self) -> "BoolMatrix":
        return BoolMatrix(self.dim, self.words.copy())

    def __and__(self, other) -> "BoolMatrix":
        return BoolMatrix(self.dim, self.words & other.words)

    def __or__(self, other) -> "BoolMatrix":
        return BoolMatrix(self.dim, self.words | other.words)

    def __eq__(self, other):
        return (
            isinstance(other, BoolMatrix)
            and self.dim == other.dim
            and bool(np.array_equal(self.words, other.words))
        )

    def __hash__(self):  # pragma: no cover
        raise TypeError("BoolMatrix is unhashable")

    def nonzero_cells(self):
        dense = self.to_dense()
        return list(zip(*np.nonzero(dense)))


# ---------------------------------------------------------------------------
# the three backends

def _mult_naive(a: BoolMatrix, b: BoolMatrix) -> BoolMatrix:
    prod = a.to_dense().astype(np.int64) @ b.to_dense().astype(np.int64)
    return BoolMatrix.from_dense(prod > 0)

def _mult_bitset(a: BoolMatrix, b: BoolMatrix) -> BoolMatrix:
    out = BoolMatrix(a.dim)
    _kernel.multiply_packed(a.words, b.words, out.words)
    return out


def _strassen_rec(a, b, cutoff):
    n = a.shape[0]
    if n <= cutoff:
        return a @ b
    h = n // 2
    a11, a12, a21, a22 = a[:h, :h], a[:h, h:], a[h:, :h], a[h:, h:]
    b11, b12, b21, b22 = b[:h, :h], b[:h, h:], b[h:, :h], b[h:, h:]
    m1 = _strassen_rec(a11 + a22, b11 + b22, cutoff)
    m2 = _strassen_rec(a21 + a22, b11, cutoff)
    m3 = _strassen_rec(a11, b12 - b22, cutoff)
    m4 = _strassen_rec(a22, b21 - b11, cutoff)
    m5 = _strassen_rec(a11 + a12, b22, cutoff)
    m6 = _strassen_rec(a21 - a11, b11 + b12, cutoff)
    m7 = _strassen_rec(a12 - a22, b21 + b22, cutoff)
    out = np.empty((n, n), dtype=a.dtype)
    out[:h, :h] = m1 + m4 - m5 + m7
    out[:h, h:] = m3 + m5
    out[h:, :h] = m2 + m4
    out[h:, h:] = m1 - m2 + m3 + m6
    return out


def _mult_strassen(a: BoolMatrix, b: BoolMatrix, cutoff: int) -> BoolMatrix:
    if a.dim <= cutoff:
        return _mult_bitset(a, b)
    size = 1
    while size < a.dim:
        size *= 2
    ad = np.zeros((size, size), dtype=np.int64)
    bd = np.zeros((size, size), dtype=np.int64)
    ad[: a.dim, : a.dim] = a.to_dense()
    bd[: b.dim, : b.dim] = b.to_dense()
    prod = _strassen_rec(ad, bd, cutoff)
    return BoolMatrix.from_dense(prod[: a.dim, : a.dim] > 0)


def bool_multiply(a: BoolMatrix, b: BoolMatrix, backend: str = "bitset",
                  cutoff: int = 64) -> BoolMatrix:
    """C[i,j] = OR_k A[i,k] AND B[k,j]; all backends agree bit for bit."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch: %d vs %d" % (a.dim, b.dim))
    if backend == "naive":
        return _mult_naive(a, b)
    if backend == "bitset":
        return _mult_bitset(a, b)
    if backend == "strassen":
        if cutoff < 1:
            raise ValueError("cutoff must be >= 1")
        return _mult_strassen(a, b, cutoff)
    raise ValueError("unknown backend %r" % backend)


# ---------------------------------------------------------------------------
# address-indexed masks (string-independent, cached)

class _SpaceMasks:
    """Masks that depend only on the address space."""

    def __init__(self, space: AddressSpace):
        self.space = space
        dim = space.dim
        n = space.n
        length = np.fromiter((len(a) for a in space.addresses), np.int16, dim)
        unmarked = np.fromiter((a.mark < 0 for a in space.addresses), np.uint8, dim)
        member = np.zeros((n + 1, dim), dtype=np.uint8)   # x occurs in address
        markval = np.full(dim, -1, dtype=np.int32)
        for t, a in enumerate(space.addresses):
            for p in set(a.positions):
                member[p, t] = 1
            if a.mark >= 0:
                markval[t] = a.positions[a.mark]

        tocol = np.zeros((dim, dim), dtype=np.uint8)
        fromrow = np.zeros((dim, dim), dtype=np.uint8)
        torow = np.zeros((dim, dim), dtype=np.uint8)
        fromcol = np.zeros((dim, dim), dtype=np.uint8)
        for t in range(dim):
            x = markval[t]
            if x < 0:
                continue
            # column t marked with x: row must (not) contain x
            tocol[:, t] = member[x] & unmarked
            fromrow[:, t] = 1 - member[x]
            # row t marked with x: column must (not) contain x
            torow[t, :] = member[x] & unmarked
            fromcol[t, :] = 1 - member[x]
        self.p_tocol = BoolMatrix(dim, pack_rows(tocol))
        self.p_fromrow = BoolMatrix(dim, pack_rows(fromrow))
        self.p_torow = BoolMatrix(dim, pack_rows(torow))
        self.p_fromcol = BoolMatrix(dim, pack_rows(fromcol))
        self._pair_len = np.add.outer(length, length)
        self._size_cache = {}

    def size_mask(self, total: int) -> BoolMatrix:
        got = self._size_cache.get(total)
        if got is None:
            got = BoolMatrix(self.space.dim, pack_rows(self._pair_len == total))
            self._size_cache[total] = got
        return got


@lru_cache(maxsize=32)
def _space_masks(space: AddressSpace) -> _SpaceMasks:
    return _SpaceMasks(space)


def _role_mask(space: AddressSpace, cfg, fo: int, keep_side: str) -> BoolMatrix:
    """Cells (left, right) whose merged endpoints, selected by ``cfg``, equal
    the kept side's address.  Built constructively from endpoint multisets."""
    out = BoolMatrix(space.dim)
    ids = space.ids
    d = space.d
    picked = sorted(cfg)
    for e in combinations_with_replacement(range(space.n + 1), 2 * fo):
        chosen = set(picked)
        kept = tuple(e[t - 1] for t in picked)
        other = tuple(e[t] for t in range(2 * fo) if (t + 1) not in chosen)
        if not (1 <= len(kept) <= d and 1 <= len(other) <= d):
            continue
        if keep_side == "row":
            row, col = kept, other
        else:
            row, col = other, kept
        if col[0] <= row[0]:
            continue
        out.set(ids[Address(row)], ids[Address(col)])
    return out


class EngineTables:
    """Per-(grammar, n) mask bundle for the Boolean rendering."""

    def __init__(self, g: Grammar, space: AddressSpace):
        self.grammar = g
        self.space = space
        base = _space_masks(space)
        self.p_tocol = base.p_tocol
        self.p_fromrow = base.p_fromrow
        self.p_torow = base.p_torow
        self.p_fromcol = base.p_fromcol
        self._size = base.size_mask
        self.q2 = {}
        self.q3 = {}
        self.q1 = {}
        for r in g.binary_rules():
            cfg1, cfg2, cfg3 = configurations(r)
            self.q2[r.rid] = _role_mask(space, cfg2, r.fo[1], "row")
            self.q3[r.rid] = _role_mask(space, cfg3, r.fo[2], "row")
            self.q1[r.rid] = _role_mask(space, cfg1, r.fo[0], "row")

    def size_mask(self, total: int) -> BoolMatrix:
        return self._size(total)


_tables_cache: dict = {}


def tables_for(g: Grammar, space: AddressSpace) -> EngineTables:
    key = (id(g), space.n, space.d)
    hit = _tables_cache.get(key)
    if hit is not None and hit.grammar is g and hit.space is space:
        return hit
    if len(_tables_cache) > 64:
        _tables_cache.clear()
    tab = EngineTables(g, space)
    _tables_cache[key] = tab
    return tab


# ---------------------------------------------------------------------------
# symbol planes and the rendered product

def symbol_planes(T: ProductMatrix) -> dict:
    """One Boolean matrix per symbol occurring in T."""
    dim = T.space.dim
    planes = {}
    for (r, c), syms in T.cells.items():
        for s in syms:
            plane = planes.get(s)
            if plane is None:
                plane = planes[s] = BoolMatrix(dim)
            plane.set(r, c)
    return planes


def build_rule_factors(T1: ProductMatrix, T2: ProductMatrix, g: Grammar) -> dict:
    """The full factor family: a (G, H) pair per rule, a pair of bare planes
    per nonterminal, and the six copy-symbol planes.  Lexical rules
    contribute structurally empty pairs so the family size is always
    2 x rules + 2 x nonterminals + 6."""
    if T1.space is not T2.space:
        raise ValueError("operands live in different address spaces")
    space = T1.space
    dim = space.dim
    tab = tables_for(g, space)
    g_planes = symbol_planes(T1)
    h_planes = symbol_planes(T2)
    zero = lambda: BoolMatrix(dim)
    factors = {}
    for r in g.rules:
        if r.is_binary:
            gb = g_planes.get(r.rhs[0])
            hc = h_planes.get(r.rhs[1])
            factors[("G", r.rid)] = (gb & tab.q2[r.rid]) if gb else zero()
            factors[("H", r.rid)] = (hc & tab.q3[r.rid]) if hc else zero()
        else:
            factors[("G", r.rid)] = zero()
            factors[("H", r.rid)] = zero()
    for nt in sorted(g.nonterminals):
        factors[("G", nt)] = g_planes.get(nt, None) or zero()
        factors[("H", nt)] = h_planes.get(nt, None) or zero()
    for sym in (CopySym.FromRow, CopySym.ToRow, CopySym.UnmarkRow):
        factors[("G", sym)] = g_planes.get(sym, None) or zero()
    for sym in (CopySym.ToCol, CopySym.UnmarkCol, CopySym.FromCol):
        factors[("H", sym)] = h_planes.get(sym, None) or zero()
    return factors


def product_via_boolean(T1: ProductMatrix, T2: ProductMatrix, g: Grammar,
                        backend: str = "bitset", tables: EngineTables | None = None,
                        stats: dict | None = None) -> ProductMatrix:
    """Same result as the cell-by-cell product, via Boolean multiplications."""
    if T1.space is not T2.space:
        raise ValueError("operands live in different address spaces")
    space = T1.space
    tab = tables or tables_for(g, space)
    g_planes = symbol_planes(T1)
    h_planes = symbol_planes(T2)

    def mul(x: BoolMatrix, y: BoolMatrix) -> BoolMatrix:
        if stats is not None:
            stats["muls"] = stats.get("muls", 0) + 1
        return bool_multiply(x, y, backend)

    acc: dict = {}

    def add(nt: str, bits: BoolMatrix) -> None:
        if not bits.any():
            return
        have = acc.get(nt)
        if have is None:
            acc[nt] = bits
        else:
            np.bitwise_or(have.words, bits.words, out=have.words)

    for r in g.binary_rules():
        gb = g_planes.get(r.rhs[0])
        hc = h_planes.get(r.rhs[1])
        if gb is None or hc is None:
            continue
        gf = gb & tab.q2[r.rid]
        if not gf.any():
            continue
        hf = hc & tab.q3[r.rid]
        if not hf.any():
            continue
        add(r.lhs, mul(gf, hf) & tab.q1[r.rid])

    h_tocol = h_planes.get(CopySym.ToCol)
    h_unmarkcol = h_planes.get(CopySym.UnmarkCol)
    h_fromcol = h_planes.get(CopySym.FromCol)
    g_fromrow = g_planes.get(CopySym.FromRow)
    g_torow = g_planes.get(CopySym.ToRow)
    g_unmarkrow = g_planes.get(CopySym.UnmarkRow)
    nts = [s for s in set(g_planes) | set(h_planes) if not isinstance(s, CopySym)]
    for nt in sorted(nts):
        size = 2 * g.fanout[nt]
        gp = g_planes.get(nt)
        hp = h_planes.get(nt)
        if gp is not None:
            if h_tocol is not None:
                add(nt, mul(gp, h_tocol) & tab.p_tocol)
            if h_unmarkcol is not None:
                add(nt, mul(gp, h_unmarkcol) & tab.size_mask(size))
            if h_fromcol is not None:
                add(nt, mul(gp, h_fromcol) & tab.p_fromcol)
        if hp is not None:
            if g_fromrow is not None:
                add(nt, mul(g_fromrow, hp) & tab.p_fromrow)
            if g_torow is not None:
                add(nt, mul(g_torow, hp) & tab.p_torow)
            if g_unmarkrow is not None:
                add(nt, mul(g_unmarkrow, hp) & tab.size_mask(size))

    out = ProductMatrix(space)
    for nt, bits in acc.items():
        for (i, j) in bits.nonzero_cells():
            out.add(int(i), int(j), nt)
    return out
