# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled hot kernels.  Mirrors ``_purepy`` function for function."""

import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector

cnp.import_array()

ctypedef cnp.int64_t i64


def nomadic_csr(tail, head, atom, weight, Py_ssize_t n_vertices):
    cdef const i64[::1] t = np.ascontiguousarray(tail, dtype=np.int64)
    cdef const i64[::1] h = np.ascontiguousarray(head, dtype=np.int64)
    cdef const i64[::1] a = np.ascontiguousarray(atom, dtype=np.int64)
    cdef const double[::1] w = np.ascontiguousarray(weight, dtype=np.float64)
    cdef Py_ssize_t m = t.shape[0]
    cdef Py_ssize_t e, k, f, v

    # out-edges grouped by tail, in edge order
    out_ptr_np = np.zeros(n_vertices + 1, dtype=np.int64)
    cdef i64[::1] out_ptr = out_ptr_np
    for e in range(m):
        out_ptr[t[e] + 1] += 1
    for v in range(n_vertices):
        out_ptr[v + 1] += out_ptr[v]
    out_idx_np = np.empty(m, dtype=np.int64)
    cdef i64[::1] out_idx = out_idx_np
    fill_np = out_ptr_np[:-1].copy()
    cdef i64[::1] fill = fill_np
    for e in range(m):
        out_idx[fill[t[e]]] = e
        fill[t[e]] += 1

    indptr_np = np.zeros(m + 1, dtype=np.int64)
    cdef i64[::1] indptr = indptr_np
    for e in range(m):
        v = h[e]
        k = 0
        for f in range(out_ptr[v], out_ptr[v + 1]):
            if a[out_idx[f]] != a[e]:
                k += 1
        indptr[e + 1] = indptr[e] + k

    indices_np = np.empty(indptr[m], dtype=np.int64)
    data_np = np.empty(indptr[m], dtype=np.float64)
    cdef i64[::1] indices = indices_np
    cdef double[::1] data = data_np
    cdef Py_ssize_t pos
    for e in range(m):
        v = h[e]
        pos = indptr[e]
        for f in range(out_ptr[v], out_ptr[v + 1]):
            k = out_idx[f]
            if a[k] != a[e]:
                indices[pos] = k
                data[pos] = w[k]
                pos += 1
    return indptr_np, indices_np, data_np


def ball_excess(var_adj, con_adj, roots, Py_ssize_t radius):
    cdef const i64[:, ::1] va = np.ascontiguousarray(var_adj, dtype=np.int64)
    cdef const i64[:, ::1] ca = np.ascontiguousarray(con_adj, dtype=np.int64)
    cdef const i64[::1] rt = np.ascontiguousarray(roots, dtype=np.int64)
    cdef Py_ssize_t nv = va.shape[0], c = va.shape[1]
    cdef Py_ssize_t nc = ca.shape[0], r = ca.shape[1]
    cdef Py_ssize_t total = nv + nc
    stamp_np = np.full(total, -1, dtype=np.int64)
    dist_np = np.zeros(total, dtype=np.int64)
    queue_np = np.empty(total, dtype=np.int64)
    out_np = np.zeros(rt.shape[0], dtype=np.int64)
    cdef i64[::1] stamp = stamp_np
    cdef i64[::1] dist = dist_np
    cdef i64[::1] queue = queue_np
    cdef i64[::1] out = out_np
    cdef Py_ssize_t k, x, y, j, qh, qt, edges

    for k in range(rt.shape[0]):
        stamp[rt[k]] = k
        dist[rt[k]] = 0
        queue[0] = rt[k]
        qh = 0
        qt = 1
        while qh < qt:
            x = queue[qh]
            qh += 1
            if dist[x] == radius:
                continue
            if x < nv:
                for j in range(c):
                    y = va[x, j] + nv
                    if stamp[y] != k:
                        stamp[y] = k
                        dist[y] = dist[x] + 1
                        queue[qt] = y
                        qt += 1
            else:
                for j in range(r):
                    y = ca[x - nv, j]
                    if stamp[y] != k:
                        stamp[y] = k
                        dist[y] = dist[x] + 1
                        queue[qt] = y
                        qt += 1
        edges = 0
        for j in range(qt):
            x = queue[j]
            if x < nv:
                for y in range(c):
                    if stamp[va[x, y] + nv] == k:
                        edges += 1
        out[k] = edges - qt + 1
    return out_np


def witness_rows(var_adj, con_adj, con_group, var_group, atom_w, con_sign, var_sign,
                 good, double rho, Py_ssize_t L):
    cdef const i64[:, ::1] va = np.ascontiguousarray(var_adj, dtype=np.int64)
    cdef const i64[:, ::1] ca = np.ascontiguousarray(con_adj, dtype=np.int64)
    cdef const i64[::1] cg = np.ascontiguousarray(con_group, dtype=np.int64)
    cdef const i64[::1] vg = np.ascontiguousarray(var_group, dtype=np.int64)
    cdef const double[:, :, ::1] aw = np.ascontiguousarray(atom_w, dtype=np.float64)
    cdef const double[::1] cs = np.ascontiguousarray(con_sign, dtype=np.float64)
    cdef const double[:, ::1] vs = np.ascontiguousarray(var_sign, dtype=np.float64)
    cdef const cnp.uint8_t[::1] gd = np.ascontiguousarray(good, dtype=np.uint8)
    cdef Py_ssize_t nv = va.shape[0], c = va.shape[1], r = ca.shape[1]

    cdef vector[i64] rows, cols
    cdef vector[double] vals
    cdef vector[i64] st_u, st_d, st_f
    cdef vector[double] st_val
    cdef Py_ssize_t v, u, d, f_in, j, f, jj, i, w, pu
    cdef double val, wt, nval

    for v in range(nv):
        rows.push_back(v)
        cols.push_back(v)
        vals.push_back(1.0)
        if not gd[v]:
            continue
        st_u.push_back(v)
        st_d.push_back(0)
        st_f.push_back(-1)
        st_val.push_back(1.0)
        while st_u.size() > 0:
            u = st_u.back()
            d = st_d.back()
            f_in = st_f.back()
            val = st_val.back()
            st_u.pop_back()
            st_d.pop_back()
            st_f.pop_back()
            st_val.pop_back()
            pu = vg[u]
            for j in range(c):
                f = va[u, j]
                if f == f_in:
                    continue
                jj = cg[f]
                for i in range(r):
                    w = ca[f, i]
                    if w == u:
                        continue
                    wt = aw[jj, pu, i] * cs[f] * vs[f, pu] * vs[f, i]
                    if wt == 0.0:
                        continue
                    nval = val * rho * wt
                    rows.push_back(v)
                    cols.push_back(w)
                    vals.push_back(nval)
                    if d + 1 < L:
                        st_u.push_back(w)
                        st_d.push_back(d + 1)
                        st_f.push_back(f)
                        st_val.push_back(nval)

    cdef Py_ssize_t n = rows.size()
    rows_np = np.empty(n, dtype=np.int64)
    cols_np = np.empty(n, dtype=np.int64)
    vals_np = np.empty(n, dtype=np.float64)
    cdef i64[::1] ro = rows_np
    cdef i64[::1] co = cols_np
    cdef double[::1] vo = vals_np
    for i in range(n):
        ro[i] = rows[i]
        co[i] = cols[i]
        vo[i] = vals[i]
    return rows_np, cols_np, vals_np


def gray_code_max(A):
    """Gray-code walk over sign vectors with ``x[0] = +1``; O(n) per step."""
    cdef const i64[:, ::1] a = np.ascontiguousarray(A, dtype=np.int64)
    cdef Py_ssize_t n = a.shape[0]
    x_np = np.ones(n, dtype=np.int64)
    if n == 1:
        return int(a[0, 0]), x_np
    cdef i64[::1] x = x_np
    s_np = np.asarray(A, dtype=np.int64).sum(axis=1)
    cdef i64[::1] s = s_np
    cdef i64 val = 0, best
    cdef Py_ssize_t i, j, step, nsteps = (<Py_ssize_t>1) << (n - 1)
    cdef unsigned long long g
    for i in range(n):
        val += x[i] * s[i]
    best = val
    best_g = 0
    cdef unsigned long long cur = 0
    for step in range(1, nsteps):
        # bit flipped between gray(step-1) and gray(step)
        g = step
        i = 0
        while (g & 1) == 0:
            g >>= 1
            i += 1
        i += 1  # bits live on positions 1..n-1
        # flipping x_i changes x^T A x by -4 x_i (s_i - a_ii x_i)
        val += -4 * x[i] * (s[i] - a[i, i] * x[i])
        for j in range(n):
            s[j] -= 2 * a[j, i] * x[i]
        x[i] = -x[i]
        cur ^= (<unsigned long long>1) << (i - 1)
        if val > best:
            best = val
            best_g = cur
    out = np.ones(n, dtype=np.int64)
    for i in range(1, n):
        if (best_g >> (i - 1)) & 1:
            out[i] = -1
    return int(best), out
