# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled softmax and cross-entropy kernels; see kernels.py for the contract."""

from libc.math cimport exp, log

import numpy as np


def softmax_rows(const double[:, ::1] logits):
    cdef Py_ssize_t n = logits.shape[0]
    cdef Py_ssize_t k = logits.shape[1]
    out_arr = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double m, s, p
    for i in range(n):
        m = logits[i, 0]
        for j in range(1, k):
            if logits[i, j] > m:
                m = logits[i, j]
        s = 0.0
        for j in range(k):
            p = exp(logits[i, j] - m)
            out[i, j] = p
            s += p
        for j in range(k):
            out[i, j] /= s
    return out_arr


def xent_grad(
    const double[:, ::1] logits,
    const Py_ssize_t[::1] labels,
    const double[::1] class_weights,
):
    cdef Py_ssize_t n = logits.shape[0]
    cdef Py_ssize_t k = logits.shape[1]
    cdef bint weighted = class_weights.shape[0] > 0
    out_arr = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] dlogits = out_arr
    cdef double loss_sum = 0.0
    cdef double weight_sum = 0.0
    cdef Py_ssize_t i, j, y
    cdef double m, s, w, p
    for i in range(n):
        y = labels[i]
        m = logits[i, 0]
        for j in range(1, k):
            if logits[i, j] > m:
                m = logits[i, j]
        s = 0.0
        for j in range(k):
            p = exp(logits[i, j] - m)
            dlogits[i, j] = p
            s += p
        w = class_weights[y] if weighted else 1.0
        loss_sum -= w * (logits[i, y] - m - log(s))
        weight_sum += w
        for j in range(k):
            dlogits[i, j] = w * (dlogits[i, j] / s - (1.0 if j == y else 0.0))
    return loss_sum, weight_sum, out_arr
