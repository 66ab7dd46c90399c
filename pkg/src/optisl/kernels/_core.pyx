# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-snapshot kernels.

Semantics (and bit-level results) match kernels._pure; that module is the
readable reference.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def pairwise_edges(
    double[:, ::1] pos not None,
    cnp.int32_t[::1] plane not None,
    cnp.uint8_t[::1] busy not None,
    double l_intra,
    double l_inter,
):
    cdef Py_ssize_t m = pos.shape[0]
    cdef cnp.ndarray src_arr = np.empty(m * (m - 1) if m > 1 else 0, dtype=np.int32)
    cdef cnp.ndarray dst_arr = np.empty(m * (m - 1) if m > 1 else 0, dtype=np.int32)
    cdef cnp.ndarray len_arr = np.empty(m * (m - 1) if m > 1 else 0, dtype=np.float64)
    cdef cnp.ndarray intra_arr = np.empty(m * (m - 1) if m > 1 else 0, dtype=np.uint8)
    cdef cnp.ndarray deg_arr = np.zeros(m, dtype=np.int32)
    cdef cnp.ndarray blk_arr = np.zeros(m, dtype=np.int32)

    cdef cnp.int32_t[::1] src = src_arr
    cdef cnp.int32_t[::1] dst = dst_arr
    cdef double[::1] length = len_arr
    cdef cnp.uint8_t[::1] intra = intra_arr
    cdef cnp.int32_t[::1] deg = deg_arr
    cdef cnp.int32_t[::1] blk = blk_arr

    cdef Py_ssize_t i, j, e = 0
    cdef double dx, dy, dz, d, lim
    cdef bint same
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            dz = pos[i, 2] - pos[j, 2]
            d = sqrt(dx * dx + dy * dy + dz * dz)
            same = plane[i] == plane[j]
            lim = l_intra if same else l_inter
            if d <= lim:
                deg[i] += 1
                if busy[j]:
                    blk[i] += 1
                else:
                    src[e] = <cnp.int32_t> i
                    dst[e] = <cnp.int32_t> j
                    length[e] = d
                    intra[e] = 1 if same else 0
                    e += 1
    return (
        src_arr[:e].copy(),
        dst_arr[:e].copy(),
        len_arr[:e].copy(),
        intra_arr[:e].copy(),
        deg_arr,
        blk_arr,
    )


def encode_step(
    cnp.int32_t[::1] indptr not None,
    cnp.int32_t[::1] targets not None,
    double[::1] lengths not None,
    cnp.uint8_t[::1] is_intra not None,
    double[:, ::1] pos not None,
    cnp.int32_t[::1] geom_degree not None,
    cnp.int32_t[::1] busy_blocked not None,
    cnp.uint8_t[::1] visited not None,
    int v,
    int dest,
    double d0,
    int k_cap,
    double l_intra,
    double l_inter,
):
    cdef Py_ssize_t s = indptr[v], e = indptr[v + 1]
    cdef Py_ssize_t n_all = e - s

    cdef cnp.ndarray imp_buf = np.empty(n_all, dtype=np.float64)
    cdef cnp.ndarray idx_buf = np.empty(n_all, dtype=np.int32)
    cdef double[::1] imp = imp_buf
    cdef cnp.int32_t[::1] idx = idx_buf

    cdef double dvx = pos[v, 0] - pos[dest, 0]
    cdef double dvy = pos[v, 1] - pos[dest, 1]
    cdef double dvz = pos[v, 2] - pos[dest, 2]
    cdef double dist_v = sqrt(dvx * dvx + dvy * dvy + dvz * dvz)

    cdef double revisit = 0.0
    cdef double best_improvement = 0.0
    cdef Py_ssize_t k, n = 0
    cdef int j
    cdef double ddx, ddy, ddz, dist_j, improvement
    for k in range(s, e):
        j = targets[k]
        if visited[j]:
            revisit = 1.0
            continue
        ddx = pos[j, 0] - pos[dest, 0]
        ddy = pos[j, 1] - pos[dest, 1]
        ddz = pos[j, 2] - pos[dest, 2]
        dist_j = sqrt(ddx * ddx + ddy * ddy + ddz * ddz)
        improvement = (dist_v - dist_j) / d0
        imp[n] = improvement
        idx[n] = <cnp.int32_t> k
        if n == 0 or improvement > best_improvement:
            best_improvement = improvement
        n += 1
    if n == 0:
        best_improvement = 0.0

    # keep the k_cap largest improvements; stable ties preserve adjacency order
    cdef cnp.ndarray keep_buf = np.ones(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] keep = keep_buf
    cdef cnp.ndarray order_buf
    cdef cnp.int32_t[::1] order
    cdef Py_ssize_t i, q
    cdef cnp.int32_t key
    cdef double key_val
    cdef Py_ssize_t n_sel = n
    if n > k_cap:
        order_buf = np.empty(n, dtype=np.int32)
        order = order_buf
        for i in range(n):
            order[i] = <cnp.int32_t> i
        for i in range(1, n):  # insertion sort, descending by improvement
            key = order[i]
            key_val = imp[key]
            q = i - 1
            while q >= 0 and imp[order[q]] < key_val:
                order[q + 1] = order[q]
                q -= 1
            order[q + 1] = key
        for i in range(n):
            keep[i] = 0
        for i in range(k_cap):
            keep[order[i]] = 1
        n_sel = k_cap

    cdef cnp.ndarray feats_arr = np.empty((n_sel, 5), dtype=np.float64)
    cdef cnp.ndarray eidx_arr = np.empty(n_sel, dtype=np.int32)
    cdef double[:, ::1] feats = feats_arr
    cdef cnp.int32_t[::1] eidx = eidx_arr
    cdef Py_ssize_t c = 0
    cdef Py_ssize_t row_s, row_e, r
    cdef int cnt
    for i in range(n):
        if not keep[i]:
            continue
        k = idx[i]
        j = targets[k]
        feats[c, 0] = imp[i]
        feats[c, 1] = lengths[k] / (l_intra if is_intra[k] == 1 else l_inter)
        feats[c, 2] = 1.0 if is_intra[k] == 1 else 0.0
        row_s = indptr[j]
        row_e = indptr[j + 1]
        cnt = 0
        for r in range(row_s, row_e):
            if visited[targets[r]] == 0:
                cnt += 1
        if cnt > k_cap:
            cnt = k_cap
        feats[c, 3] = (<double> cnt) / k_cap
        feats[c, 4] = 0.0
        eidx[c] = <cnp.int32_t> k
        c += 1

    cdef double busy_fraction = 0.0
    if geom_degree[v] > 0:
        busy_fraction = (<double> busy_blocked[v]) / (<double> geom_degree[v])
    cdef cnp.ndarray state = np.array(
        [dist_v / d0, best_improvement, (<double> n_sel) / k_cap, busy_fraction, revisit],
        dtype=np.float64,
    )
    return state, feats_arr, eidx_arr
