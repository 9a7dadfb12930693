# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled scatter-add kernel for embedding few-site operators.

``accumulate_embedded`` adds ``coeff * block`` into a dense many-body
matrix at every (row, column) pair generated by one placement of the
block's sites.  The index arithmetic is described in
``macrolab._kernels_py``, which holds the pure-numpy fallback with the
same signature.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def accumulate_embedded(
    cnp.complex128_t[:, ::1] out,
    const cnp.complex128_t[:, ::1] block,
    const cnp.int64_t[::1] sup_offsets,
    const cnp.int64_t[::1] rest_offsets,
    double complex coeff,
):
    """Add ``coeff * block`` into ``out`` at one tensor placement, in place."""
    cdef Py_ssize_t i, j, m
    cdef Py_ssize_t dn = block.shape[0]
    cdef Py_ssize_t dr = rest_offsets.shape[0]
    cdef double complex v
    cdef cnp.int64_t r0, c0, off

    for i in range(dn):
        r0 = sup_offsets[i]
        for j in range(dn):
            v = coeff * block[i, j]
            if v.real == 0.0 and v.imag == 0.0:
                continue
            c0 = sup_offsets[j]
            for m in range(dr):
                off = rest_offsets[m]
                out[r0 + off, c0 + off] = out[r0 + off, c0 + off] + v
