"""OPT / SDP / EIG sandwiches and the closed-form SDP values.

All three quantities are edge averages: for a sign vector or unit-vector
assignment the objective is ``<A, X> / (2|E|)``, where ``|E|`` counts the
nonzero edges of the instance multigraph.  The SDP value is certified from
below by an explicit PSD, unit-diagonal witness matrix and from above by
``|V| lambda_max(A) / (2|E|)``; no SDP solver is involved.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from . import _kernels
from .atoms import TwoEigenvalueProfile
from .errors import OutOfModel, TooLarge, ValidationError
from .lifts import bad_mask
from .spectra import eig_symmetric
from .waves import norm_sq_infinite, tail_mass

MAX_BRUTE = 24


class WitnessMatrix:
    """``M = G G^T`` for a sparse matrix ``G`` with unit-norm rows.

    Row ``v`` of ``G`` is the transported, truncated and normalized witness
    vector for ``v``, or the indicator ``e_v`` when ``v`` is bad.  Unit
    rows make the diagonal of ``M`` exactly one, and the Gram form makes
    ``M`` PSD.
    """

    def __init__(self, G, meta: dict):
        self.G = sp.csr_matrix(G)
        self.meta = dict(meta)

    @property
    def n(self) -> int:
        return self.G.shape[0]

    @property
    def M(self) -> np.ndarray:
        return (self.G @ self.G.T).toarray()

    def inner(self, A) -> float:
        """``<A, M>`` without forming ``M``."""
        A = sp.csr_matrix(A, dtype=float)
        return float((A @ self.G).multiply(self.G).sum())

    def diagonal(self) -> np.ndarray:
        return np.asarray(self.G.multiply(self.G).sum(axis=1)).ravel()

    def min_eigenvalue(self) -> float:
        return float(eig_symmetric(self.M)[0])


def dense_witness(M, meta: dict | None = None) -> WitnessMatrix:
    """Wrap an explicit PSD matrix through an eigendecomposition Gram factor."""
    M = np.asarray(M, dtype=float)
    vals, vecs = np.linalg.eigh(M)
    if vals[0] < -1e-8:
        raise ValidationError("witness matrix is not PSD")
    G = vecs * np.sqrt(np.clip(vals, 0, None))
    return WitnessMatrix(G, meta or {})


def build_witness(instance, congraph=None, s: int = 1, delta: float = 0.05, L: int = 6) -> WitnessMatrix:
    """Transported witness matrix ``M_s`` on a lifted instance."""
    if s not in (1, -1):
        raise ValidationError("s must be +1 or -1")
    if not 0 < delta < 1:
        raise ValidationError("delta must lie in (0, 1)")
    cg = congraph if congraph is not None else instance.congraph
    if cg is None:
        raise ValidationError("witness transport needs the constraint graph")
    prof = instance.profile
    rho = s * (1 - delta) / math.sqrt(prof.gr)
    bad = bad_mask(cg, L)
    atom_w = np.stack([a.weights for a in instance.atoms]).astype(float)
    rows, cols, vals = _kernels.witness_rows(
        cg.var_adj, cg.con_adj, cg.con_group(), cg.var_group(), atom_w,
        instance.con_sign.astype(float), instance.var_sign.astype(float),
        (~bad).astype(np.uint8), rho, int(L),
    )
    nv = instance.n_vertices
    G = sp.csr_matrix((vals, (rows, cols)), shape=(nv, nv))
    norms = np.sqrt(np.asarray(G.multiply(G).sum(axis=1)).ravel())
    G = sp.diags(1.0 / norms) @ G
    meta = {
        "s": s,
        "delta": delta,
        "L": int(L),
        "bad_vertex_count": int(bad.sum()),
        "tail_mass": tail_mass(prof.c, delta, L),
        "relative_tail": tail_mass(prof.c, delta, L) / norm_sq_infinite(prof.c, delta),
    }
    return WitnessMatrix(G, meta)


def spectral_witness(instance) -> WitnessMatrix:
    """Top-eigenspace projector of ``A`` rescaled to unit diagonal.

    When the top eigenspace spreads evenly over the vertices (as for a
    single two-eigenvalue atom) this attains ``<A, M> = |V| lambda_max``.
    """
    A = np.asarray(instance.A, dtype=float)
    vals, vecs = np.linalg.eigh(A)
    top = vals[-1]
    V = vecs[:, vals >= top - 1e-9 * max(1.0, abs(top))]
    d = np.sum(V * V, axis=1)
    if np.any(d <= 1e-12):
        raise ValidationError("top eigenspace misses a vertex; cannot normalize")
    G = V / np.sqrt(d)[:, None]
    return WitnessMatrix(G, {"kind": "spectral"})


def _two_m(instance) -> int:
    m2 = 2 * int(np.count_nonzero(instance.ew))
    if m2 == 0:
        raise ValidationError("instance has no edges")
    return m2


def opt_bruteforce(instance) -> float:
    """Exact ``max_x x^T A x / (2|E|)`` over sign vectors (Gray-code walk)."""
    nv = instance.n_vertices
    if nv > MAX_BRUTE:
        raise TooLarge(f"brute force limited to {MAX_BRUTE} vertices")
    best, _ = _kernels.gray_code_max(np.asarray(instance.A, dtype=np.int64))
    return best / _two_m(instance)


def eig_upper_bound(instance) -> float:
    lam = eig_symmetric(instance.A)[-1]
    return instance.n_vertices * float(lam) / _two_m(instance)


def sdp_lower_bound(instance, witness: WitnessMatrix) -> float:
    return witness.inner(instance.A_sparse()) / _two_m(instance)


def sdp_value_formula(lambda1: float, lambda2: float, c: int) -> float:
    """``(l1 + l2 + 2 sqrt(gr)) / (c (-l1 l2))``."""
    if c < 2:
        raise OutOfModel("formula needs c >= 2")
    gr = (c - 1) * (-lambda1 * lambda2)
    return (lambda1 + lambda2 + 2 * math.sqrt(gr)) / (c * (-lambda1 * lambda2))


def forrelation_value(k: int, c: int) -> float:
    return 2 * math.sqrt(c - 1) / (c * 2 ** (k / 2))


def sort4_satisfiability(c: float) -> float:
    """``1/2 + formula(+-sqrt2, c)``; below 1 certifies the instance unsatisfiable."""
    r2 = math.sqrt(2)
    return 0.5 + sdp_value_formula(r2, -r2, c)


def threshold_root() -> float:
    """Real ``c`` where ``1/2 + formula(+-sqrt2, c)`` crosses 1."""
    return brentq(lambda c: sort4_satisfiability(c) - 1.0, 6.0, 7.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


@dataclass
class SandwichReport:
    opt: float | None
    sdp_lower: float
    sdp_upper: float
    formula: float
    bad_vertex_count: int
    tail_mass: float
    relative_tail: float
    s: int
    delta: float
    L: int
    slack: float  # (l1 + l2 + rX) - <A, M>/|V|

    def chain_holds(self, tol: float = 1e-9) -> bool:
        ok = self.sdp_lower <= self.sdp_upper + tol
        if self.opt is not None:
            ok = ok and self.opt <= self.sdp_upper + tol
        return ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["chain_holds"] = self.chain_holds()
        return d


def sandwich(instance, delta: float = 0.05, L: int = 6, s: int = 1) -> SandwichReport:
    prof: TwoEigenvalueProfile = instance.profile
    w = build_witness(instance, s=s, delta=delta, L=L)
    inner = w.inner(instance.A_sparse())
    opt = opt_bruteforce(instance) if instance.n_vertices <= MAX_BRUTE else None
    target = prof.center + s * prof.rX
    return SandwichReport(
        opt=opt,
        sdp_lower=inner / _two_m(instance),
        sdp_upper=eig_upper_bound(instance),
        formula=sdp_value_formula(prof.lambda1, prof.lambda2, prof.c),
        bad_vertex_count=w.meta["bad_vertex_count"],
        tail_mass=w.meta["tail_mass"],
        relative_tail=w.meta["relative_tail"],
        s=s,
        delta=delta,
        L=L,
        slack=s * (target - inner / instance.n_vertices),
    )
