"""Finite balls of the additive product and witness vectors on them.

The additive product X of c atoms is the instance graph of the infinite
(r, c)-biregular constraint tree.  A ball of radius R around a root
variable is grown level by level: a vertex at depth t spawns one atom copy
for every constraint group other than the one it was reached through, and
each copy contributes ``r - 1`` children.  Distances count atom hops
(half the constraint-graph distance).

Witness vectors are ``f(u) = rho^d(u) * prod(path weights)`` with
``rho = s (1 - delta) / sqrt(gr)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .atoms import _snap, profile
from .errors import BallTooLarge, SupportTouchesBoundary, ValidationError, ZeroVector

MAX_BALL = 1_000_000


def predicted_level_sizes(atoms, c: int, R: int, prune_zero: bool = False) -> list[int]:
    """Vertex count at each depth ``0..R`` before building anything."""
    r = atoms[0].r
    if prune_zero:
        # every row of a +-1 atom has -l1*l2 nonzeros
        p = int(round(_snap(atoms[0].eig_prod)))
        first, branch = c * p, (c - 1) * p
    else:
        first, branch = c * (r - 1), (c - 1) * (r - 1)
    sizes = [1]
    for t in range(1, R + 1):
        sizes.append(first * branch ** (t - 1))
    return sizes


class ProductBall:
    """Radius-R section of the additive product around a root variable.

    Per-vertex arrays: ``depth``, ``group`` (position inside its atoms),
    ``parent`` (-1 for the root), ``parent_atom`` (constraint group of the
    copy joining it to its parent) and ``product`` (signed weight product
    along the path from the root).  ``adjacency`` holds every atom-copy
    edge with both ends in the ball.  With ``prune_zero`` the subtrees
    hanging off zero-weight pairs are dropped; witness vectors vanish there,
    so Rayleigh quotients are unchanged while much larger radii fit.
    """

    def __init__(self, atoms, c: int, R: int, root_group: int = 0, prune_zero: bool = False,
                 max_vertices: int = MAX_BALL):
        atoms = list(atoms)
        if len(atoms) == 1:
            atoms = atoms * c
        if len(atoms) != c:
            raise ValidationError(f"need {c} atoms, got {len(atoms)}")
        if R < 0:
            raise ValidationError("radius must be nonnegative")
        r = atoms[0].r
        if any(a.r != r for a in atoms):
            raise ValidationError("atoms must share r")
        total = sum(predicted_level_sizes(atoms, c, R, prune_zero))
        if total > max_vertices:
            raise BallTooLarge(f"ball would have {total} vertices (> {max_vertices})")

        self.atoms, self.c, self.r, self.R = atoms, c, r, R
        self.prune_zero = prune_zero
        self.root = 0
        W = np.stack([a.weights for a in atoms]).astype(np.int64)  # (c, r, r)

        depth = [np.zeros(1, np.int64)]
        group = [np.array([root_group], np.int64)]
        parent = [np.array([-1], np.int64)]
        patom = [np.array([-1], np.int64)]
        product = [np.ones(1, np.int64)]
        copies, copy_group = [], []

        start, count = 0, 1
        jj = np.arange(c)[None, :, None]
        ii = np.arange(r)[None, None, :]
        for t in range(1, R + 1):
            P = np.arange(start, start + count)
            g = group[-1][:, None, None]
            jin = patom[-1][:, None, None]
            w = W[jj, g, ii]  # (count, c, r)
            valid = (jj != jin) & (ii != g)
            prod = product[-1][:, None, None] * w
            if prune_zero:
                valid &= prod != 0
            ids = np.full(valid.shape, -1, dtype=np.int64)
            nnew = int(valid.sum())
            ids[valid] = start + count + np.arange(nnew)
            # atom copies (parent, j) for j != incoming group
            ids_copy = ids.copy()
            pidx = np.broadcast_to(P[:, None, None], ids.shape)
            at_parent = np.broadcast_to(ii == g, ids.shape)
            ids_copy[at_parent] = pidx[at_parent]
            has_copy = (jj != jin)[:, :, 0]
            copies.append(ids_copy[has_copy])
            copy_group.append(np.broadcast_to(np.arange(c)[None, :], has_copy.shape)[has_copy])

            depth.append(np.full(nnew, t, np.int64))
            group.append(np.broadcast_to(ii, valid.shape)[valid])
            parent.append(pidx[valid])
            patom.append(np.broadcast_to(jj, valid.shape)[valid])
            product.append(prod[valid])
            start, count = start + count, nnew

        self.depth = np.concatenate(depth)
        self.group = np.concatenate(group)
        self.parent = np.concatenate(parent)
        self.parent_atom = np.concatenate(patom)
        self.product = np.concatenate(product)
        self.copies = np.concatenate(copies) if copies else np.zeros((0, r), np.int64)
        self.copy_group = np.concatenate(copy_group) if copy_group else np.zeros(0, np.int64)
        self.adjacency = self._build_adjacency(W)

    def _build_adjacency(self, W):
        rows, cols, vals = [], [], []
        for j in range(self.c):
            cp = self.copies[self.copy_group == j]
            for i, k, w in self.atoms[j].edges():
                u, v = cp[:, i], cp[:, k]
                ok = (u >= 0) & (v >= 0)
                rows += [u[ok], v[ok]]
                cols += [v[ok], u[ok]]
                vals += [np.full(ok.sum(), w)] * 2
        n = self.n_vertices
        if not rows:
            return sp.csr_matrix((n, n), dtype=np.int64)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n), dtype=np.int64
        )

    @property
    def n_vertices(self) -> int:
        return len(self.depth)

    @property
    def profile(self):
        return profile(self.atoms[0], self.c)

    def interior(self) -> np.ndarray:
        return self.depth < self.R

    def degrees(self) -> np.ndarray:
        """Weighted degree ``sum_w A(u, w)^2`` of every ball vertex."""
        A = self.adjacency
        return np.asarray(A.multiply(A).sum(axis=1)).ravel()

    def level_counts(self) -> np.ndarray:
        return np.bincount(self.depth, minlength=self.R + 1)

    def to_dict(self) -> dict:
        A = sp.triu(self.adjacency).tocoo()
        return {
            "c": self.c,
            "r": self.r,
            "R": self.R,
            "atoms": [a.to_dict() for a in self.atoms],
            "prune_zero": self.prune_zero,
            "depth": self.depth.tolist(),
            "group": self.group.tolist(),
            "parent": self.parent.tolist(),
            "product": self.product.tolist(),
            "edges": [[int(u), int(v), int(w)] for u, v, w in zip(A.row, A.col, A.data)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def build_product_ball(atoms, c: int, R: int, prune_zero: bool = False, root_group: int = 0) -> ProductBall:
    return ProductBall(atoms, c, R, root_group=root_group, prune_zero=prune_zero)


def growth_rate_check(ball: ProductBall, t: int):
    """``(lhs, rhs)`` of the growth law at depth ``1 <= t <= R``.

    ``lhs`` sums squared path products over depth ``t``; ``rhs`` is
    ``c (c-1)^(t-1) (-l1 l2)^t``.  Both are Python ints for library atoms.
    """
    if not 1 <= t <= ball.R:
        raise ValidationError("growth law needs 1 <= t <= R")
    if ball.prune_zero:
        raise ValidationError("growth law needs an unpruned ball")
    lhs = int(np.sum(ball.product[ball.depth == t] ** 2))
    p = _snap(ball.atoms[0].eig_prod)
    rhs = ball.c * (ball.c - 1) ** (t - 1) * p**t
    return lhs, rhs


def degree_law_check(ball: ProductBall):
    """Degrees of interior vertices and the predicted ``c (-l1 l2)``."""
    if ball.prune_zero:
        raise ValidationError("degree law needs an unpruned ball")
    return ball.degrees()[ball.interior()], _snap(ball.c * ball.atoms[0].eig_prod)


@dataclass(frozen=True)
class WitnessConfig:
    s: int
    delta: float
    L: int

    def __post_init__(self):
        if self.s not in (1, -1):
            raise ValidationError("s must be +1 or -1")
        if not 0 < self.delta < 1:
            raise ValidationError("delta must lie in (0, 1)")
        if self.L < 0:
            raise ValidationError("L must be nonnegative")

    def rho(self, gr: float) -> float:
        return self.s * (1 - self.delta) / math.sqrt(gr)

    @property
    def q(self) -> float:
        """``rho^2 * gr = (1 - delta)^2``."""
        return (1 - self.delta) ** 2


def witness_vector(ball: ProductBall, config: WitnessConfig) -> np.ndarray:
    """``rho^depth * product`` on every ball vertex."""
    if config.L > ball.R:
        raise ValidationError("L exceeds the ball radius")
    rho = config.rho(ball.profile.gr)
    return rho ** ball.depth.astype(float) * ball.product


def truncate_normalize(ball: ProductBall, f, L: int) -> np.ndarray:
    """Zero ``f`` beyond depth ``L`` and scale to unit norm."""
    if L > ball.R:
        raise ValidationError("L exceeds the ball radius")
    g = np.where(ball.depth <= L, f, 0.0)
    nrm = np.linalg.norm(g)
    if nrm == 0:
        raise ZeroVector("truncated vector is zero")
    return g / nrm


def rayleigh_quotient(ball: ProductBall, f) -> float:
    f = np.asarray(f, dtype=float)
    if np.any(f[ball.depth >= ball.R] != 0):
        raise SupportTouchesBoundary("support reaches the ball boundary")
    nrm2 = f @ f
    if nrm2 == 0:
        raise ZeroVector("zero vector")
    return float(f @ (ball.adjacency @ f) / nrm2)


def truncated_witness(ball: ProductBall, config: WitnessConfig) -> np.ndarray:
    """Witness vector restricted to depth ``<= L`` (not normalized)."""
    f = witness_vector(ball, config)
    return np.where(ball.depth <= config.L, f, 0.0)


# closed forms on the tree; used for reporting and as test targets

def norm_sq_truncated(c: int, delta: float, L: int) -> float:
    """``|f|^2`` restricted to depth ``<= L``: ``1 + c/(c-1) * sum_{t=1..L} q^t``."""
    q = (1 - delta) ** 2
    return 1 + c / (c - 1) * sum(q**t for t in range(1, L + 1))


def norm_sq_infinite(c: int, delta: float) -> float:
    """Exact ``|f|^2`` on the whole product: ``(c - 1 + q) / ((c - 1)(1 - q))``."""
    q = (1 - delta) ** 2
    return (c - 1 + q) / ((c - 1) * (1 - q))


def norm_sq_reference(c: int, delta: float) -> float:
    """The commonly quoted value ``c / ((c - 1) delta (2 - delta))``.

    It applies the depth-t count to ``t = 0`` as well, so it exceeds the
    true norm :func:`norm_sq_infinite` by exactly ``1 / (c - 1)``.
    """
    return c / ((c - 1) * delta * (2 - delta))


def tail_mass(c: int, delta: float, L: int) -> float:
    """``|f|^2`` carried by depths ``> L``: ``c/(c-1) * q^(L+1) / (1 - q)``."""
    q = (1 - delta) ** 2
    return c / (c - 1) * q ** (L + 1) / (1 - q)


def quadratic_form_truncated(lambda1, lambda2, c: int, s: int, delta: float, L: int) -> float:
    """``<f, A_X f>`` for the witness truncated at depth ``L``.

    Parent-child pairs give ``2 rho`` per unit of squared mass one level
    down and sibling pairs give ``rho^2 (l1 + l2)``.
    """
    prof = profile((lambda1, lambda2), c)
    rho = s * (1 - delta) / math.sqrt(prof.gr)
    q = (1 - delta) ** 2
    return (2 * rho + rho * rho * prof.center) * prof.dX * sum(q**t for t in range(L))


def quotient_truncated(lambda1, lambda2, c: int, s: int, delta: float, L: int) -> float:
    return quadratic_form_truncated(lambda1, lambda2, c, s, delta, L) / norm_sq_truncated(c, delta, L)


def radius_for_tail(eps: float, delta: float) -> int:
    """Smallest L with ``q^L <= eps``: ``ceil(log eps / (2 log(1 - delta)))``."""
    return math.ceil(math.log(eps) / (2 * math.log(1 - delta)))


def largest_affordable_radius(atoms, c: int, prune_zero: bool = True, budget: int = MAX_BALL) -> int:
    R = 0
    while sum(predicted_level_sizes(atoms, c, R + 1, prune_zero)) <= budget:
        R += 1
    return R


def finite_section_excess(ball: ProductBall) -> float:
    """How far the interior section's spectrum leaves the band ``l1 + l2 +- rX``."""
    idx = np.flatnonzero(ball.interior())
    A = ball.adjacency[idx][:, idx].astype(float)
    prof = ball.profile
    lo, hi = prof.band
    if len(idx) <= 2000:
        ev = np.linalg.eigvalsh(A.toarray()) if len(idx) else np.zeros(1)
        top, bot = ev[-1], ev[0]
    else:
        top = spla.eigsh(A, k=1, which="LA", return_eigenvectors=False)[0]
        bot = spla.eigsh(A, k=1, which="SA", return_eigenvectors=False)[0]
    return float(max(0.0, top - hi, lo - bot))
