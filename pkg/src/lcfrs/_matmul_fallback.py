"""Pure-numpy stand-in for the compiled packed-row multiply kernel.

Same contract as the compiled module: packed uint64 rows, little-endian bit
order inside each word.  Noticeably slower, but keeps the package usable
without a C toolchain.
"""

import numpy as np


def _row_bits(words_row, dim):
    by = words_row.view(np.uint8)
    return np.flatnonzero(np.unpackbits(by, bitorder="little")[:dim])


def multiply_packed(a, b, out):
    """out |= a x b over the Boolean semiring (packed uint64 rows)."""
    rows = a.shape[0]
    brows = b.shape[0]
    for i in range(rows):
        ks = _row_bits(a[i], brows)
        if ks.size:
            acc = np.bitwise_or.reduce(b[ks], axis=0)
            np.bitwise_or(out[i], acc, out=out[i])
    return None


def or_accumulate(dst, src):
    np.bitwise_or(dst, src, out=dst)
    return None
