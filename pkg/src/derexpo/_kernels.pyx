# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled direction-risk kernel: one pass over the price grid per
direction, accumulating every requested risk order at once."""

import numpy as np

cimport numpy as cnp
from libc.math cimport pow

cnp.import_array()


def direction_risks(
    const double[:, ::1] loss_basis,
    const double[::1] node_weights,
    const double[:, ::1] quantities,
    const long[::1] orders,
):
    cdef Py_ssize_t n_dir = quantities.shape[0]
    cdef Py_ssize_t n_inst = quantities.shape[1]
    cdef Py_ssize_t n_nodes = loss_basis.shape[1]
    cdef Py_ssize_t n_ord = orders.shape[0]
    if loss_basis.shape[0] != n_inst:
        raise ValueError("loss_basis rows must match quantity columns")
    if node_weights.shape[0] != n_nodes:
        raise ValueError("node_weights length must match loss_basis columns")

    out_arr = np.zeros((n_dir, n_ord), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t d, i, k, c
    cdef double loss, neg, w
    cdef long order

    with nogil:
        for d in range(n_dir):
            for i in range(n_nodes):
                loss = 0.0
                for k in range(n_inst):
                    loss += quantities[d, k] * loss_basis[k, i]
                if loss < 0.0:
                    neg = -loss
                    w = node_weights[i]
                    for c in range(n_ord):
                        order = orders[c]
                        if order == 0:
                            out[d, c] += w
                        elif order == 1:
                            out[d, c] += w * neg
                        elif order == 2:
                            out[d, c] += w * neg * neg
                        elif order == 3:
                            out[d, c] += w * neg * neg * neg
                        else:
                            out[d, c] += w * pow(neg, <double> order)
    return out_arr
