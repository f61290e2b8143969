"""Constraint graphs, random lifts and instance graphs.

A constraint graph is an n-lift of the complete bipartite graph K_{r,c}.
Variable vertex ``(i, a)`` (group ``i``, copy ``a``) has id ``i*n + a``;
constraint vertex ``(j, b)`` has id ``j*n + b``.  ``perms[i, j, a] = b``
means variable ``(i, a)`` is joined to constraint ``(j, b)``.

Stamping a copy of atom ``A_j`` on every constraint vertex of group ``j``
gives the instance graph, a signed multigraph on the variables.
"""

from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .atoms import TOL, Atom, TwoEigenvalueProfile
from .errors import (
    ArityMismatch,
    InvalidArity,
    MixedEigenvalues,
    NotBalanced,
    UnbalancedNegation,
    ValidationError,
)
from .rng import NEGATION, PERM, substream


class NegationKind(str, enum.Enum):
    NONE = "none"
    CONSTRAINT = "constraint"
    VARIABLE = "variable"


@dataclass(frozen=True)
class NegationModel:
    """Which random signs to apply, and the seed of their streams.

    Signs for constraint ``f = (j, b)`` come from their own stream, so the
    collections for distinct ``f`` are independent and each sign is a fair
    coin.
    """

    kind: NegationKind = NegationKind.NONE
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", NegationKind(self.kind))

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "seed": self.seed}

    @classmethod
    def from_dict(cls, d) -> "NegationModel":
        if isinstance(d, str):
            return cls(NegationKind(d))
        return cls(NegationKind(d["kind"]), int(d.get("seed", 0)))


NO_NEGATION = NegationModel()


@dataclass(frozen=True, eq=False)
class ConstraintGraph:
    r: int
    c: int
    n: int
    perms: np.ndarray  # (r, c, n) int64
    seed: int | None = None
    var_adj: np.ndarray = field(init=False, repr=False)
    con_adj: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        perms = np.array(self.perms, dtype=np.int64)
        r, c, n = self.r, self.c, self.n
        if r < 1 or c < 1:
            raise InvalidArity("r and c must be positive")
        if n < 1:
            raise ValidationError("lift size n must be at least 1")
        if perms.shape != (r, c, n):
            raise ValidationError(f"perms shape {perms.shape} != {(r, c, n)}")
        ident = np.arange(n)
        if not np.all(np.sort(perms, axis=2) == ident):
            raise ValidationError("every perms[i, j] must be a permutation of range(n)")
        perms.setflags(write=False)
        object.__setattr__(self, "perms", perms)

        var_adj = np.empty((r * n, c), dtype=np.int64)
        con_adj = np.empty((c * n, r), dtype=np.int64)
        for i in range(r):
            for j in range(c):
                b = perms[i, j]
                var_adj[i * n + ident, j] = j * n + b
                con_adj[j * n + b, i] = i * n + ident
        var_adj.setflags(write=False)
        con_adj.setflags(write=False)
        object.__setattr__(self, "var_adj", var_adj)
        object.__setattr__(self, "con_adj", con_adj)

    @property
    def n_var(self) -> int:
        return self.r * self.n

    @property
    def n_con(self) -> int:
        return self.c * self.n

    def var_group(self) -> np.ndarray:
        return np.repeat(np.arange(self.r, dtype=np.int64), self.n)

    def con_group(self) -> np.ndarray:
        return np.repeat(np.arange(self.c, dtype=np.int64), self.n)

    def __eq__(self, other):
        if not isinstance(other, ConstraintGraph):
            return NotImplemented
        return (self.r, self.c, self.n) == (other.r, other.c, other.n) and np.array_equal(self.perms, other.perms)

    __hash__ = None


def base_constraint_graph(r: int, c: int) -> ConstraintGraph:
    if r < 2 or c < 2:
        raise InvalidArity("base constraint graph needs r, c >= 2")
    return ConstraintGraph(r, c, 1, np.zeros((r, c, 1), dtype=np.int64))


def random_lift(r: int, c: int, n: int, seed: int) -> ConstraintGraph:
    """Uniform n-lift of K_{r,c}; one permutation stream per base edge ``(i, j)``."""
    if r < 2 or c < 2:
        raise InvalidArity("lift needs r, c >= 2")
    if n < 1:
        raise ValidationError("lift size n must be at least 1")
    perms = np.empty((r, c, n), dtype=np.int64)
    for i in range(r):
        for j in range(c):
            perms[i, j] = substream(seed, PERM, i, j).permutation(n)
    return ConstraintGraph(r, c, n, perms, seed=seed)


def _is_bipartite(weights: np.ndarray) -> bool:
    r = weights.shape[0]
    color = -np.ones(r, dtype=np.int64)
    for s in range(r):
        if color[s] >= 0:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in np.flatnonzero(weights[x]):
                if color[y] < 0:
                    color[y] = 1 - color[x]
                    queue.append(y)
                elif color[y] == color[x]:
                    return False
    return True


def sample_signs(congraph: ConstraintGraph, negation: NegationModel):
    """Return ``(con_sign, var_sign)`` as int64 arrays of shapes (c*n,) and (c*n, r)."""
    nc, r, n = congraph.n_con, congraph.r, congraph.n
    con_sign = np.ones(nc, dtype=np.int64)
    var_sign = np.ones((nc, r), dtype=np.int64)
    if negation.kind is NegationKind.NONE:
        return con_sign, var_sign
    for f in range(nc):
        st = substream(negation.seed, NEGATION, f // n, f % n)
        if negation.kind is NegationKind.CONSTRAINT:
            con_sign[f] = st.sign()
        else:
            for i in range(r):
                var_sign[f, i] = st.sign()
    return con_sign, var_sign


class InstanceGraph:
    """Signed multigraph on the variable vertices.

    Edges are stored as parallel arrays ``eu, ev, ew, eatom``; ``eatom`` is
    the id of the constraint vertex that engendered the edge.  Parallel edges stay separate here and are summed
    in :attr:`A`.
    """

    def __init__(self, n_vertices, eu, ev, ew, eatom, atoms=(), congraph=None,
                 negation=NO_NEGATION, con_sign=None, var_sign=None, c=None):
        self.n_vertices = int(n_vertices)
        self.eu = np.asarray(eu, dtype=np.int64)
        self.ev = np.asarray(ev, dtype=np.int64)
        self.ew = np.asarray(ew, dtype=np.int64)
        self.eatom = np.asarray(eatom, dtype=np.int64)
        if not (len(self.eu) == len(self.ev) == len(self.ew) == len(self.eatom)):
            raise ValidationError("edge arrays differ in length")
        if np.any(self.eu == self.ev):
            raise ValidationError("self-loops are not allowed")
        self.atoms = list(atoms)
        self.congraph = congraph
        self.negation = negation
        self.con_sign = con_sign
        self.var_sign = var_sign
        self.c = c if c is not None else (congraph.c if congraph is not None else None)
        self._A = None

    @property
    def n_edges(self) -> int:
        return len(self.eu)

    @property
    def lambda1(self) -> float:
        return self.atoms[0].lambda1

    @property
    def lambda2(self) -> float:
        return self.atoms[0].lambda2

    @property
    def profile(self) -> TwoEigenvalueProfile:
        return TwoEigenvalueProfile(self.c, self.lambda1, self.lambda2)

    @property
    def A(self) -> np.ndarray:
        """Dense symmetric adjacency, parallel edges summed."""
        if self._A is None:
            A = np.zeros((self.n_vertices, self.n_vertices), dtype=np.int64)
            np.add.at(A, (self.eu, self.ev), self.ew)
            np.add.at(A, (self.ev, self.eu), self.ew)
            A.setflags(write=False)
            self._A = A
        return self._A

    def A_sparse(self) -> sp.csr_matrix:
        rows = np.concatenate([self.eu, self.ev])
        cols = np.concatenate([self.ev, self.eu])
        vals = np.concatenate([self.ew, self.ew]).astype(float)
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.n_vertices,) * 2)

    def vertices(self) -> list[tuple[int, int]]:
        if self.congraph is None:
            return [(0, v) for v in range(self.n_vertices)]
        n = self.congraph.n
        return [(v // n, v % n) for v in range(self.n_vertices)]

    def atom_block(self, f: int) -> np.ndarray:
        """r x r signed weights of the copy placed on constraint ``f``."""
        cg = self.congraph
        members = cg.con_adj[f]
        pos = {int(v): k for k, v in enumerate(members)}
        W = np.zeros((cg.r, cg.r), dtype=np.int64)
        for k in np.flatnonzero(self.eatom == f):
            a, b = pos[int(self.eu[k])], pos[int(self.ev[k])]
            W[a, b] = W[b, a] = self.ew[k]
        return W

    def same_edges(self, other: "InstanceGraph") -> bool:
        return (
            self.n_vertices == other.n_vertices
            and np.array_equal(self.eu, other.eu)
            and np.array_equal(self.ev, other.ev)
            and np.array_equal(self.ew, other.ew)
            and np.array_equal(self.eatom, other.eatom)
        )

    def to_dict(self) -> dict:
        d = {
            "n_vertices": self.n_vertices,
            "vertices": [list(x) for x in self.vertices()],
            "edges": [
                {"u": int(u), "v": int(v), "w": int(w), "atom_id": int(f)}
                for u, v, w, f in zip(self.eu, self.ev, self.ew, self.eatom)
            ],
            "atoms": [a.to_dict() for a in self.atoms],
            "negation": self.negation.to_dict(),
        }
        cg = self.congraph
        if cg is not None:
            d.update(r=cg.r, c=cg.c, n=cg.n, seed=cg.seed, perms=cg.perms.tolist())
        if self.c is not None:
            d["c"] = self.c
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "InstanceGraph":
        atoms = [Atom.from_dict(a) for a in d.get("atoms", [])]
        negation = NegationModel.from_dict(d.get("negation", "none"))
        edges = d["edges"]
        raw = cls(
            d.get("n_vertices", len(d.get("vertices", []))),
            [e["u"] for e in edges],
            [e["v"] for e in edges],
            [e["w"] for e in edges],
            [e["atom_id"] for e in edges],
            atoms=atoms,
            negation=negation,
            c=d.get("c"),
        )
        if "perms" not in d:
            return raw
        cg = ConstraintGraph(d["r"], d["c"], d["n"], np.array(d["perms"]), seed=d.get("seed"))
        inst = make_instance(cg, atoms, negation)
        if not inst.same_edges(raw):
            raise ValidationError("edge list does not match the stored lift and negation")
        return inst

    @classmethod
    def from_json(cls, s: str) -> "InstanceGraph":
        return cls.from_dict(json.loads(s))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "InstanceGraph":
        with open(path) as fh:
            return cls.from_json(fh.read())


def make_instance(congraph: ConstraintGraph, atoms, negation: NegationModel = NO_NEGATION,
                  *, _skip_validation: bool = False) -> InstanceGraph:
    """Stamp atom ``atoms[j]`` on every constraint vertex of group ``j``.

    Constraint negation multiplies a whole copy by one sign, which keeps
    the spectrum only for bipartite atoms; non-bipartite atoms raise
    :class:`UnbalancedNegation` under that model.  ``_skip_validation`` is
    a test-only hook for drawing non-two-eigenvalue shapes.
    """
    atoms = list(atoms)
    r, c, n = congraph.r, congraph.c, congraph.n
    if len(atoms) != c:
        raise ArityMismatch(f"expected {c} atoms, got {len(atoms)}")
    for a in atoms:
        if a.r != r:
            raise ArityMismatch(f"atom {a.name} has r={a.r}, constraint graph has r={r}")
    if not _skip_validation:
        for a in atoms:
            if not a._checked:
                raise ValidationError(f"atom {a.name} was not validated")
            if abs(a.lambda1 - atoms[0].lambda1) > TOL or abs(a.lambda2 - atoms[0].lambda2) > TOL:
                raise MixedEigenvalues("atoms must share (lambda1, lambda2)")
        if negation.kind is NegationKind.CONSTRAINT:
            for a in atoms:
                if not _is_bipartite(a.weights):
                    raise UnbalancedNegation(
                        f"constraint negation of non-bipartite atom {a.name} changes its spectrum"
                    )

    con_sign, var_sign = sample_signs(congraph, negation)
    eu, ev, ew, eatom = [], [], [], []
    for j, atom in enumerate(atoms):
        pairs = atom.edges()
        if not pairs:
            continue
        ii = np.array([p[0] for p in pairs], dtype=np.int64)
        kk = np.array([p[1] for p in pairs], dtype=np.int64)
        ww = np.array([p[2] for p in pairs], dtype=np.int64)
        f = j * n + np.arange(n, dtype=np.int64)
        members = congraph.con_adj[f]  # (n, r)
        sign = con_sign[f][:, None] * var_sign[f][:, ii] * var_sign[f][:, kk]
        eu.append(members[:, ii].ravel())
        ev.append(members[:, kk].ravel())
        ew.append((ww[None, :] * sign).ravel())
        eatom.append(np.repeat(f, len(pairs)))
    cat = lambda xs: np.concatenate(xs) if xs else np.zeros(0, dtype=np.int64)  # noqa: E731
    return InstanceGraph(
        congraph.n_var, cat(eu), cat(ev), cat(ew), cat(eatom),
        atoms=atoms, congraph=congraph, negation=negation,
        con_sign=con_sign, var_sign=var_sign, c=c,
    )


def atom_instance(atom: Atom) -> InstanceGraph:
    """One standalone copy of ``atom`` (a single constraint, c = 1)."""
    cg = ConstraintGraph(atom.r, 1, 1, np.zeros((atom.r, 1, 1), dtype=np.int64))
    return make_instance(cg, [atom])


def instance_from_adjacency(A, name: str = "graph") -> InstanceGraph:
    """Wrap a simple signed graph, one atom id per edge.  No lift structure."""
    A = np.asarray(A, dtype=np.int64)
    if not np.array_equal(A, A.T):
        raise ValidationError("adjacency must be symmetric")
    iu, ju = np.nonzero(np.triu(A, 1))
    return InstanceGraph(A.shape[0], iu, ju, A[iu, ju], np.arange(len(iu)))


def restrict_to_atom(instance: InstanceGraph, f: int) -> InstanceGraph:
    """Sub-instance keeping only the edges engendered by constraint ``f``."""
    keep = instance.eatom == f
    return InstanceGraph(
        instance.n_vertices, instance.eu[keep], instance.ev[keep], instance.ew[keep],
        instance.eatom[keep], atoms=instance.atoms, congraph=instance.congraph,
        negation=instance.negation, con_sign=instance.con_sign, var_sign=instance.var_sign,
        c=instance.c,
    )


def ball_excess(congraph: ConstraintGraph, roots, radius: int) -> np.ndarray:
    """Cycle rank of the radius ball (in constraint-graph hops) around each root."""
    roots = np.asarray(roots, dtype=np.int64)
    return _kernels.ball_excess(congraph.var_adj, congraph.con_adj, roots, int(radius))


def bad_mask(congraph: ConstraintGraph, L: int) -> np.ndarray:
    if L < 0:
        raise ValidationError("L must be nonnegative")
    roots = np.arange(congraph.n_var, dtype=np.int64)
    return ball_excess(congraph, roots, 2 * L) > 0


def detect_bad_vertices(congraph: ConstraintGraph, L: int) -> set[int]:
    """Variables whose radius-2L constraint-graph ball contains a cycle."""
    return {int(v) for v in np.flatnonzero(bad_mask(congraph, L))}


def tangle_free(congraph: ConstraintGraph, v: int, ell: int) -> bool:
    """True iff the radius-4*ell ball around variable ``v`` has at most one cycle."""
    if ell < 0:
        raise ValidationError("ell must be nonnegative")
    return int(ball_excess(congraph, [v], 4 * ell)[0]) <= 1


def balanced_signing_diagonal(instance: InstanceGraph, reference: InstanceGraph) -> np.ndarray:
    """Sign vector ``D`` with ``D A_ref D = A_instance`` edge by edge.

    Walks a spanning forest of the shared multigraph from an arbitrary
    root per component, fixing ``D`` along tree edges, then checks every
    remaining edge.
    """
    if not (
        instance.n_vertices == reference.n_vertices
        and np.array_equal(instance.eu, reference.eu)
        and np.array_equal(instance.ev, reference.ev)
        and np.array_equal(instance.eatom, reference.eatom)
    ):
        raise ValidationError("instance and reference must share the same edge list")
    if np.any(np.abs(instance.ew) != np.abs(reference.ew)):
        raise ValidationError("instance and reference differ in unsigned weights")
    nz = instance.ew != 0
    eu, ev = instance.eu[nz], instance.ev[nz]
    ratio = (instance.ew[nz] * reference.ew[nz]).astype(np.int64)

    nv = instance.n_vertices
    adj = [[] for _ in range(nv)]
    for k, (u, v) in enumerate(zip(eu, ev)):
        adj[u].append((int(v), k))
        adj[v].append((int(u), k))
    D = np.zeros(nv, dtype=np.int64)
    for root in range(nv):
        if D[root]:
            continue
        D[root] = 1
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y, k in adj[x]:
                want = D[x] * ratio[k]
                if not D[y]:
                    D[y] = want
                    queue.append(y)
                elif D[y] != want:
                    raise NotBalanced(f"edge {int(eu[k])}-{int(ev[k])} breaks the cycle sign condition")
    return D
