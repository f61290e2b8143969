"""Pure-Python reference versions of the hot kernels.

Same signatures and outputs as the compiled ``_core`` module.  Used when the
extension is missing or ``SPECTRA_LAB_PURE=1`` is set.

Constraint graphs are passed as two dense adjacency tables: ``var_adj[v, j]``
is the constraint of group ``j`` touching variable ``v`` and
``con_adj[f, i]`` is the variable of group ``i`` touching constraint ``f``.
"""

from collections import deque

import numpy as np


def nomadic_csr(tail, head, atom, weight, n_vertices):
    tail = np.asarray(tail, dtype=np.int64)
    head = np.asarray(head, dtype=np.int64)
    atom = np.asarray(atom, dtype=np.int64)
    weight = np.asarray(weight, dtype=np.float64)
    m = len(tail)
    out = [[] for _ in range(n_vertices)]
    for e in range(m):
        out[tail[e]].append(e)
    indptr = np.zeros(m + 1, dtype=np.int64)
    indices = []
    for e in range(m):
        a = atom[e]
        row = [f for f in out[head[e]] if atom[f] != a]
        indices.extend(row)
        indptr[e + 1] = indptr[e] + len(row)
    indices = np.array(indices, dtype=np.int64)
    return indptr, indices, weight[indices]


def ball_excess(var_adj, con_adj, roots, radius):
    """Cycle rank ``E - V + 1`` of the radius ball around each variable root."""
    var_adj = np.asarray(var_adj, dtype=np.int64)
    con_adj = np.asarray(con_adj, dtype=np.int64)
    nv = var_adj.shape[0]
    out = np.zeros(len(roots), dtype=np.int64)
    for k, root in enumerate(roots):
        dist = {int(root): 0}
        queue = deque([int(root)])
        while queue:
            x = queue.popleft()
            d = dist[x]
            if d == radius:
                continue
            nbrs = var_adj[x] + nv if x < nv else con_adj[x - nv]
            for y in nbrs:
                y = int(y)
                if y not in dist:
                    dist[y] = d + 1
                    queue.append(y)
        edges = 0
        for x in dist:
            if x < nv:
                edges += sum(1 for f in var_adj[x] if int(f) + nv in dist)
        out[k] = edges - len(dist) + 1
    return out


def witness_rows(var_adj, con_adj, con_group, var_group, atom_w, con_sign, var_sign, good, rho, L):
    """Unnormalised transported witness rows as COO triplets.

    Row ``v`` holds ``rho^d`` times the signed path product to every
    variable within ``L`` atom hops, skipping zero products.  Rows of
    vertices with ``good[v] == 0`` are the indicator ``e_v``.
    """
    var_adj = np.asarray(var_adj, dtype=np.int64)
    con_adj = np.asarray(con_adj, dtype=np.int64)
    nv, c = var_adj.shape
    r = con_adj.shape[1]
    rows, cols, vals = [], [], []
    for v in range(nv):
        rows.append(v)
        cols.append(v)
        vals.append(1.0)
        if not good[v]:
            continue
        stack = [(v, 0, 1.0, -1)]
        while stack:
            u, d, val, f_in = stack.pop()
            pu = var_group[u]
            for j in range(c):
                f = var_adj[u, j]
                if f == f_in:
                    continue
                jj = con_group[f]
                for i in range(r):
                    w = con_adj[f, i]
                    if w == u:
                        continue
                    wt = atom_w[jj, pu, i] * con_sign[f] * var_sign[f, pu] * var_sign[f, i]
                    if wt == 0.0:
                        continue
                    nval = val * rho * wt
                    rows.append(v)
                    cols.append(int(w))
                    vals.append(nval)
                    if d + 1 < L:
                        stack.append((int(w), d + 1, nval, int(f)))
    return (
        np.array(rows, dtype=np.int64),
        np.array(cols, dtype=np.int64),
        np.array(vals, dtype=np.float64),
    )


def gray_code_max(A):
    """Max of ``x^T A x`` over ``x`` in {-1,+1}^n with ``x[0] = +1``.

    Vectorised block enumeration; the compiled kernel walks a Gray code.
    Returns ``(value, x)``.
    """
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[0]
    if n == 1:
        return int(A[0, 0]), np.ones(1, dtype=np.int64)
    free = n - 1
    block = min(free, 14)
    lo = np.arange(1 << block, dtype=np.int64)
    lo_bits = 1 - 2 * ((lo[:, None] >> np.arange(block)) & 1)
    best, best_x = None, None
    for hi in range(1 << (free - block)):
        hi_bits = 1 - 2 * ((hi >> np.arange(free - block)) & 1)
        X = np.empty((len(lo), n), dtype=np.int64)
        X[:, 0] = 1
        X[:, 1 : 1 + block] = lo_bits
        X[:, 1 + block :] = hi_bits
        vals = np.einsum("ij,ij->i", X @ A, X)
        k = int(np.argmax(vals))
        if best is None or vals[k] > best:
            best, best_x = int(vals[k]), X[k].copy()
    return best, best_x
