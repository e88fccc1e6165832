# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Jonker-Volgenant shortest augmenting path kernel.

Mirrors ``_lap_py.lap_min`` step for step (same scan order, same
tie-breaking), so both backends return identical assignments.
"""
import numpy as np
from libc.math cimport INFINITY


from hmasim.assignment._lap_py import Infeasible


def lap_min(double[:, ::1] cost):
    """Minimise over a C-contiguous R x C float64 array (R <= C).

    Returns ``(col4row, u, v)`` as numpy arrays.
    """
    cdef Py_ssize_t nr = cost.shape[0]
    cdef Py_ssize_t nc = cost.shape[1]
    cdef Py_ssize_t cur_row, i, j, index, sink, k, n_scanned, tmp
    cdef double min_val, lowest, r, ui

    u_arr = np.zeros(nr, dtype=np.float64)
    v_arr = np.zeros(nc, dtype=np.float64)
    col4row_arr = np.full(nr, -1, dtype=np.intp)
    row4col_arr = np.full(nc, -1, dtype=np.intp)
    shortest_arr = np.empty(nc, dtype=np.float64)
    path_arr = np.empty(nc, dtype=np.intp)
    scanned_arr = np.empty(nc, dtype=np.uint8)
    rows_arr = np.empty(nr, dtype=np.intp)

    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef Py_ssize_t[::1] col4row = col4row_arr
    cdef Py_ssize_t[::1] row4col = row4col_arr
    cdef double[::1] shortest = shortest_arr
    cdef Py_ssize_t[::1] path = path_arr
    cdef unsigned char[::1] scanned_col = scanned_arr
    cdef Py_ssize_t[::1] scanned_rows = rows_arr

    for cur_row in range(nr):
        for j in range(nc):
            shortest[j] = INFINITY
            path[j] = -1
            scanned_col[j] = 0
        n_scanned = 0
        min_val = 0.0
        i = cur_row
        sink = -1
        while sink < 0:
            scanned_rows[n_scanned] = i
            n_scanned += 1
            ui = u[i]
            lowest = INFINITY
            index = -1
            for j in range(nc):
                if scanned_col[j]:
                    continue
                r = min_val + cost[i, j] - ui - v[j]
                if r < shortest[j]:
                    path[j] = i
                    shortest[j] = r
                if shortest[j] < lowest:
                    lowest = shortest[j]
                    index = j
            if index < 0 or lowest == INFINITY:
                raise Infeasible(cur_row)
            min_val = lowest
            scanned_col[index] = 1
            if row4col[index] < 0:
                sink = index
            else:
                i = row4col[index]

        u[cur_row] += min_val
        for k in range(1, n_scanned):
            i = scanned_rows[k]
            u[i] += min_val - shortest[col4row[i]]
        for j in range(nc):
            if scanned_col[j]:
                v[j] -= min_val - shortest[j]

        j = sink
        while True:
            i = path[j]
            row4col[j] = i
            tmp = col4row[i]
            col4row[i] = j
            j = tmp
            if i == cur_row:
                break
    return col4row_arr, u_arr, v_arr
