# cython: boundscheck=False, wraparound=False, cdivision=True
"""Packed-row Boolean matrix product.

Rows are arrays of 64-bit words, bit j of row i meaning entry (i, j).  The
product ORs row k of the right operand into row i of the output for every
set bit k of the left operand's row i, so the cost tracks the number of set
bits rather than the full cube.
"""

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil


def multiply_packed(unsigned long long[:, ::1] a,
                    unsigned long long[:, ::1] b,
                    unsigned long long[:, ::1] out):
    """out |= a x b over the Boolean semiring; all three packed alike."""
    cdef Py_ssize_t rows = a.shape[0]
    cdef Py_ssize_t nw = a.shape[1]
    cdef Py_ssize_t bw = b.shape[1]
    cdef Py_ssize_t i, w, w2, k
    cdef unsigned long long bits
    with nogil:
        for i in range(rows):
            for w in range(nw):
                bits = a[i, w]
                while bits:
                    k = (w << 6) + __builtin_ctzll(bits)
                    bits &= bits - 1
                    for w2 in range(bw):
                        out[i, w2] |= b[k, w2]
    return None


def or_accumulate(unsigned long long[:, ::1] dst, unsigned long long[:, ::1] src):
    cdef Py_ssize_t rows = dst.shape[0]
    cdef Py_ssize_t nw = dst.shape[1]
    cdef Py_ssize_t i, w
    with nogil:
        for i in range(rows):
            for w in range(nw):
                dst[i, w] |= src[i, w]
    return None
