"""Nomadic walk operator and nomadic polynomials.

Directed edge ``2k`` is ``eu[k] -> ev[k]`` and ``2k + 1`` is its reverse,
so ``reverse(e) == e ^ 1``.  ``B[e, e'] = w(e')`` when ``e'`` leaves the
head of ``e`` and lies in a different atom copy.  Since a directed edge
and its reverse always share an atom, the reverse step is excluded
automatically.
"""

from __future__ import annotations

import numpy as np
import scipy.io
import scipy.sparse as sp

from . import _kernels
from .atoms import _snap
from .errors import BudgetExceeded, TooLarge, ValidationError

DENSE_LIMIT = 6000


class NomadicOperator:
    def __init__(self, instance):
        m = instance.n_edges
        tail = np.empty(2 * m, dtype=np.int64)
        head = np.empty(2 * m, dtype=np.int64)
        tail[0::2], head[0::2] = instance.eu, instance.ev
        tail[1::2], head[1::2] = instance.ev, instance.eu
        self.tail = tail
        self.head = head
        self.weight = np.repeat(instance.ew, 2)
        self.atom = np.repeat(instance.eatom, 2)
        self.n_vertices = instance.n_vertices
        indptr, indices, data = _kernels.nomadic_csr(
            tail, head, self.atom, self.weight.astype(np.float64), self.n_vertices
        )
        self.matrix = sp.csr_matrix((data, indices, indptr), shape=(2 * m, 2 * m))

    @property
    def dim(self) -> int:
        return len(self.tail)

    @staticmethod
    def reverse(e: int) -> int:
        return e ^ 1

    def dense(self) -> np.ndarray:
        if self.dim > DENSE_LIMIT:
            raise TooLarge(f"B has dimension {self.dim} > {DENSE_LIMIT}")
        return self.matrix.toarray()

    def abs_matrix(self) -> sp.csr_matrix:
        return abs(self.matrix)

    def directed_edges(self) -> list[dict]:
        return [
            {"tail": int(t), "head": int(h), "weight": int(w), "atom_id": int(a)}
            for t, h, w, a in zip(self.tail, self.head, self.weight, self.atom)
        ]

    def write_mtx(self, path) -> None:
        scipy.io.mmwrite(
            path, self.matrix.tocoo(), comment="nomadic walk operator", field="integer"
        )


def build_nomadic(instance) -> NomadicOperator:
    return NomadicOperator(instance)


def _incidence(instance):
    """Per-vertex list of ``(neighbor, weight, atom_id, edge_index)``."""
    inc = [[] for _ in range(instance.n_vertices)]
    for k, (u, v, w, f) in enumerate(zip(instance.eu, instance.ev, instance.ew, instance.eatom)):
        inc[u].append((int(v), int(w), int(f), k))
        inc[v].append((int(u), int(w), int(f), k))
    return inc


def _check_budget(instance, k):
    if k > 8 or 2 * instance.n_edges > 200:
        raise BudgetExceeded("oracle limited to k <= 8 and 2|E| <= 200")
    if k < 0:
        raise ValidationError("k must be nonnegative")


def _walks_from(inc, u: int, k: int, nv: int) -> list[int]:
    """Depth-first enumeration of length-k nomadic walks from ``u``; weight per endpoint."""
    acc = [0] * nv

    def go(x, steps, last_atom, weight):
        if steps == 0:
            acc[x] += weight
            return
        for y, w, f, _ in inc[x]:
            if f == last_atom or w == 0:
                continue
            go(y, steps - 1, f, weight * w)

    go(int(u), k, None, 1)
    return acc


def nomadic_walk_weight_oracle(instance, u: int, v: int, k: int) -> int:
    """Total weight of length-k nomadic walks from ``u`` to ``v``, by DFS."""
    _check_budget(instance, k)
    return _walks_from(_incidence(instance), u, k, instance.n_vertices)[int(v)]


def nomadic_walk_matrix_oracle(instance, k: int) -> np.ndarray:
    """All-pairs version of :func:`nomadic_walk_weight_oracle` as an object array."""
    _check_budget(instance, k)
    inc = _incidence(instance)
    nv = instance.n_vertices
    out = np.zeros((nv, nv), dtype=object)
    for u in range(nv):
        out[u, :] = _walks_from(inc, u, k, nv)
    return out


def nomadic_edge_walk_oracle(instance, e: int, k: int) -> int:
    """Sum over nomadic continuations ``e, e1, ..., ek`` of ``w(e1)...w(ek)``.

    Equals the ``e``-th row sum of ``B^k``.
    """
    _check_budget(instance, k)
    inc = _incidence(instance)
    idx = e // 2
    u, v = int(instance.eu[idx]), int(instance.ev[idx])
    head = v if e % 2 == 0 else u
    f0 = int(instance.eatom[idx])

    def go(x, steps, last_atom):
        if steps == 0:
            return 1
        total = 0
        for y, w, f, _ in inc[x]:
            if f == last_atom or w == 0:
                continue
            total += w * go(y, steps - 1, f)
        return total

    return go(head, k, f0)


def _coefficients(lambda1, lambda2, c):
    s = _snap(lambda1 + lambda2)
    p = _snap(-lambda1 * lambda2)
    exact = isinstance(s, int) and isinstance(p, int)
    return s, p, (c - 1) * p, c * p, exact


def nomadic_polynomial(A, lambda1: float, lambda2: float, c: int, k: int) -> np.ndarray:
    """``p_k(A)`` via the three-term recurrence.

    ``p0 = I``, ``p1 = A``, ``p2 = A^2 - (l1+l2) A - c(-l1 l2) I`` and
    ``p_k = (A - (l1+l2)) p_{k-1} - (c-1)(-l1 l2) p_{k-2}``.  Integer
    arithmetic (Python ints, so no overflow) when the coefficients are
    integers, floating point otherwise.
    """
    if k < 0:
        raise ValidationError("k must be nonnegative")
    A = np.asarray(A)
    s, p, gr, dX, exact = _coefficients(lambda1, lambda2, c)
    nv = A.shape[0]
    if exact:
        A = A.astype(np.int64).astype(object)
        eye = np.eye(nv, dtype=np.int64).astype(object)
    else:
        A = A.astype(float)
        eye = np.eye(nv)
    if k == 0:
        return eye
    if k == 1:
        return A.copy()
    prev, cur = A, A.dot(A) - s * A - dX * eye
    for _ in range(3, k + 1):
        prev, cur = cur, A.dot(cur) - s * cur - gr * prev
    if exact:
        big = max((abs(int(x)) for x in cur.ravel()), default=0)
        if big < 2**62:
            return cur.astype(np.int64)
    return cur


def nonbacktracking_matrix(n_vertices: int, edges) -> np.ndarray:
    """Weighted nonbacktracking matrix from an edge list ``[(u, v, w), ...]``.

    Built directly from the definition: ``(u->v)`` may continue along any
    directed edge leaving ``v`` except its own reverse.  Uses the same
    orientation convention as :class:`NomadicOperator`.
    """
    darts = []
    for u, v, w in edges:
        darts.append((int(u), int(v), w))
        darts.append((int(v), int(u), w))
    m = len(darts)
    B = np.zeros((m, m))
    for a, (_, h, _) in enumerate(darts):
        for b, (t2, _, w2) in enumerate(darts):
            if t2 == h and b != (a ^ 1):
                B[a, b] = w2
    return B
