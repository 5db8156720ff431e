# cython: boundscheck=False, wraparound=False, language_level=3
"""Compiled batch evaluator for sparse homogeneous forms.

Mirrors ``_batch_py.eval_form_batch`` exactly; the point-major loop keeps the
working set in registers instead of materializing length-N temporaries.
"""

import numpy as np

cimport cython
from libc.stdint cimport uint8_t, uint16_t


def eval_form_batch(add, mul, pows, exps, coeffs, points):
    cdef const uint16_t[:, ::1] add_t = np.ascontiguousarray(add, dtype=np.uint16)
    cdef const uint16_t[:, ::1] mul_t = np.ascontiguousarray(mul, dtype=np.uint16)
    cdef const uint16_t[:, ::1] pow_t = np.ascontiguousarray(pows, dtype=np.uint16)
    cdef const uint8_t[:, ::1] exp_t = np.ascontiguousarray(exps, dtype=np.uint8)
    cdef const uint16_t[::1] coef_t = np.ascontiguousarray(coeffs, dtype=np.uint16)
    cdef const uint16_t[:, ::1] pts = np.ascontiguousarray(points, dtype=np.uint16)

    cdef Py_ssize_t n_points = pts.shape[0]
    cdef Py_ssize_t n_vars = pts.shape[1]
    cdef Py_ssize_t n_terms = exp_t.shape[0]
    out = np.zeros(n_points, dtype=np.uint16)
    cdef uint16_t[::1] out_v = out

    cdef Py_ssize_t ip, it, iv
    cdef uint16_t acc, term
    cdef uint8_t e
    for ip in range(n_points):
        acc = 0
        for it in range(n_terms):
            term = coef_t[it]
            for iv in range(n_vars):
                e = exp_t[it, iv]
                if e:
                    term = mul_t[term, pow_t[e, pts[ip, iv]]]
            acc = add_t[acc, term]
        out_v[ip] = acc
    return out
