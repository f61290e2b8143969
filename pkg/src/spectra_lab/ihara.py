"""Generalized Ihara-Bass identity and the A-to-B spectrum correspondence.

For an instance built from c atoms with eigenvalues ``l1 > 0 > l2`` and
``gr = (c-1)(-l1 l2)``::

    (1 + l1 t)^m1 (1 + l2 t)^m2 det L(t) = det(I - B t)
    L(t) = I - A t + (l1 + l2) t I + gr t^2 I
    m1 = |V| (c l2 / (l2 - l1) - 1),   m2 = |V| (c l1 / (l1 - l2) - 1)

Reading off roots, the spectrum of B is: ``-l1`` (m1 times), ``-l2``
(m2 times), ``0`` (``2|E| - c|V|`` times) and the two roots of
``mu^2 - (nu - l1 - l2) mu + gr = 0`` for each eigenvalue ``nu`` of A.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree

from .errors import CardinalityMismatch, NearPole, NonIntegerMultiplicity, ValidationError
from .nomadic import build_nomadic
from .rng import TSAMPLE, substream
from .spectra import DENSE_LIMIT, eig_general, eig_symmetric

POLE_GAP = 1e-6


def deformed_laplacian(A, lambda1: float, lambda2: float, c: int, t: float) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    gr = (c - 1) * (-lambda1 * lambda2)
    scal = 1.0 + (lambda1 + lambda2) * t + gr * t * t
    return scal * np.eye(A.shape[0]) - t * A


def _integer(x: float, what: str) -> int:
    k = round(x)
    if abs(x - k) > 1e-9 * max(1.0, abs(x)):
        raise NonIntegerMultiplicity(f"{what} = {x} is not an integer")
    return int(k)


def multiplicities(instance) -> dict:
    """Closed-form multiplicities ``{'lambda1': m1, 'lambda2': m2, 'zero': z}``.

    ``m1`` or ``m2`` can be negative (e.g. triangle atoms with c = 2); the
    identity then divides by the corresponding factor, which cancels
    quadratic roots sitting at that point.
    """
    nv, c = instance.n_vertices, instance.c
    l1, l2 = instance.lambda1, instance.lambda2
    m1 = _integer(nv * (c * l2 / (l2 - l1) - 1), "multiplicity of -lambda1")
    m2 = _integer(nv * (c * l1 / (l1 - l2) - 1), "multiplicity of -lambda2")
    z = 2 * instance.n_edges - nv * c
    return {"lambda1": m1, "lambda2": m2, "zero": z}


def _slogdet(M):
    if sp.issparse(M):
        if M.shape[0] <= DENSE_LIMIT:
            return np.linalg.slogdet(M.toarray())
        lu = spla.splu(sp.csc_matrix(M))
        d = lu.U.diagonal()
        sign = np.prod(np.sign(d))
        # parity of the row and column permutations
        for perm in (lu.perm_r, lu.perm_c):
            seen = np.zeros(len(perm), dtype=bool)
            for i in range(len(perm)):
                if seen[i]:
                    continue
                j, length = i, 0
                while not seen[j]:
                    seen[j] = True
                    j = perm[j]
                    length += 1
                if length % 2 == 0:
                    sign = -sign
        return sign, float(np.sum(np.log(np.abs(d))))
    return np.linalg.slogdet(M)


def t_limit(instance) -> float:
    prof = instance.profile
    return 1.0 / max(abs(prof.lambda1), abs(prof.lambda2), math.sqrt(prof.gr))


def ihara_bass_residual(instance, t: float, B=None) -> float:
    """Relative gap ``|LHS - RHS| / (|RHS| + 1e-300)`` of the identity at ``t``."""
    l1, l2, c = instance.lambda1, instance.lambda2, instance.c
    if abs(t) >= 0.9 * t_limit(instance):
        raise ValidationError(f"|t| = {abs(t)} outside the admissible range")
    if abs(1 + l1 * t) <= POLE_GAP or abs(1 + l2 * t) <= POLE_GAP:
        raise NearPole(f"t = {t} is within {POLE_GAP} of a pole")
    if t == 0:
        return 0.0
    if B is None:
        B = build_nomadic(instance).matrix
    mult = multiplicities(instance)
    m1, m2 = mult["lambda1"], mult["lambda2"]

    sL, lL = _slogdet(deformed_laplacian(instance.A, l1, l2, c, t))
    f1, f2 = 1 + l1 * t, 1 + l2 * t
    lL += m1 * math.log(abs(f1)) + m2 * math.log(abs(f2))
    sL *= (np.sign(f1) ** (m1 % 2)) * (np.sign(f2) ** (m2 % 2))

    M = sp.identity(B.shape[0], format="csr") - t * sp.csr_matrix(B)
    sR, lR = _slogdet(M)
    if sR == 0:
        return math.inf if sL != 0 else 0.0
    d = lL - lR
    if sL == sR:
        return abs(math.expm1(d))
    return math.exp(d) + 1.0


def sample_t(instance, count: int = 20, seed: int = 0) -> np.ndarray:
    """``count`` draws from ``[-0.8, 0.8] * t_limit`` avoiding the poles."""
    lim = 0.8 * t_limit(instance)
    l1, l2 = instance.lambda1, instance.lambda2
    st = substream(seed, TSAMPLE, 0, 0)
    out = []
    while len(out) < count:
        t = (2 * st.uniform() - 1) * lim
        if abs(1 + l1 * t) > POLE_GAP and abs(1 + l2 * t) > POLE_GAP:
            out.append(t)
    return np.array(out)


def map_A_to_B_eigs(nu: float, lambda1: float, lambda2: float, c: int) -> tuple[complex, complex]:
    """Roots of ``mu^2 - (nu - l1 - l2) mu + gr = 0``, larger real part first."""
    gr = (c - 1) * (-lambda1 * lambda2)
    b = nu - (lambda1 + lambda2)
    disc = b * b - 4 * gr
    if disc >= 0:
        root = math.sqrt(disc)
        # avoid cancellation: take the larger-magnitude root, get the other from the product
        big = (b + math.copysign(root, b)) / 2 if b != 0 else root / 2
        other = gr / big if big != 0 else -big
        hi, lo = max(big, other), min(big, other)
        return complex(hi), complex(lo)
    root = cmath.sqrt(disc)
    mu1 = (b + root) / 2
    return mu1, mu1.conjugate()


def predicted_B_spectrum(instance, eig_A) -> tuple[np.ndarray, list[str]]:
    """Predicted eigenvalues of B with a source label for each one."""
    l1, l2, c = instance.lambda1, instance.lambda2, instance.c
    mult = multiplicities(instance)
    values, labels = [], []
    for nu in np.asarray(eig_A, dtype=float):
        for mu in map_A_to_B_eigs(float(nu), l1, l2, c):
            values.append(mu)
            labels.append("quadratic")
    values = np.array(values, dtype=complex)
    keep = np.ones(len(values), dtype=bool)
    extra_vals, extra_labels = [], []
    for key, point in (("lambda1", -l1), ("lambda2", -l2)):
        m = mult[key]
        if m >= 0:
            extra_vals += [complex(point)] * m
            extra_labels += [key] * m
            continue
        # negative exponent: the factor divides out quadratic roots at this point
        dist = np.where(keep, np.abs(values - point), np.inf)
        order = np.argsort(dist, kind="stable")[: -m]
        scale = max(1.0, abs(point))
        if len(order) < -m or dist[order[-1]] > 1e-6 * scale:
            raise NonIntegerMultiplicity(
                f"cannot cancel {-m} quadratic roots at {point}: spectrum of A lacks them"
            )
        keep[order] = False
    z = mult["zero"]
    if z < 0:
        raise NonIntegerMultiplicity("negative zero multiplicity")
    out = np.concatenate([values[keep], np.array(extra_vals, dtype=complex), np.zeros(z, dtype=complex)])
    lab = [l for l, k in zip(labels, keep) if k] + extra_labels + ["zero"] * z
    if len(out) != 2 * instance.n_edges:
        raise NonIntegerMultiplicity(f"predicted {len(out)} eigenvalues, expected {2 * instance.n_edges}")
    return out, lab


@dataclass
class SpectrumReport:
    eig_A: np.ndarray
    eig_B_computed: np.ndarray
    eig_B_predicted: np.ndarray
    predicted_sources: list
    pairs: np.ndarray  # (len, 2): computed index, predicted index
    residuals: np.ndarray
    tol: float
    rho_A: float = float("nan")
    rho_B: float = float("nan")
    multiplicities: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals, initial=0.0))

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def table(self) -> list[dict]:
        rows = []
        for (ci, pi), res in zip(self.pairs, self.residuals):
            z = self.eig_B_computed[ci]
            p = self.eig_B_predicted[pi]
            rows.append({
                "re": float(z.real), "im": float(z.imag),
                "pred_re": float(p.real), "pred_im": float(p.imag),
                "predicted_source": self.predicted_sources[pi],
                "residual": float(res),
            })
        return rows

    def to_dict(self) -> dict:
        return {
            "max_residual": self.max_residual,
            "tol": self.tol,
            "passed": self.passed,
            "rho_A": self.rho_A,
            "rho_B": self.rho_B,
            "multiplicities": self.multiplicities,
            "eig_A": [float(x) for x in self.eig_A],
            "table": self.table(),
        }


def match_spectra(computed, predicted, tol: float = 1e-6, sources=None) -> SpectrumReport:
    """Greedy minimum-distance matching of two complex multisets.

    Candidate pairs come from k-nearest-neighbour queries; pairs are taken
    shortest first.  Whatever the greedy pass leaves unmatched is finished
    with an exact assignment on the leftovers.
    """
    comp = np.asarray(computed, dtype=complex)
    pred = np.asarray(predicted, dtype=complex)
    if len(comp) != len(pred):
        raise CardinalityMismatch(f"{len(comp)} computed vs {len(pred)} predicted")
    if sources is None:
        sources = ["unknown"] * len(pred)
    n = len(comp)
    if n == 0:
        return SpectrumReport(np.zeros(0), comp, pred, list(sources), np.zeros((0, 2), dtype=int), np.zeros(0), tol)
    P = np.column_stack([pred.real, pred.imag])
    C = np.column_stack([comp.real, comp.imag])
    k = min(n, 8)
    dist, idx = cKDTree(P).query(C, k=k)
    dist = np.asarray(dist).reshape(n, k)
    idx = np.asarray(idx).reshape(n, k)
    ci = np.repeat(np.arange(n), k)
    order = np.lexsort((idx.ravel(), ci, dist.ravel()))
    used_c = np.zeros(n, dtype=bool)
    used_p = np.zeros(n, dtype=bool)
    pairs = []
    for o in order:
        a, b = ci[o], idx.ravel()[o]
        if used_c[a] or used_p[b]:
            continue
        used_c[a] = used_p[b] = True
        pairs.append((a, b))
    left_c = np.flatnonzero(~used_c)
    left_p = np.flatnonzero(~used_p)
    if len(left_c):
        cost = np.abs(comp[left_c][:, None] - pred[left_p][None, :])
        r, s = linear_sum_assignment(cost)
        pairs += list(zip(left_c[r], left_p[s]))
    pairs = np.array(sorted(pairs), dtype=np.int64)
    res = np.abs(comp[pairs[:, 0]] - pred[pairs[:, 1]])
    return SpectrumReport(np.zeros(0), comp, pred, list(sources), pairs, res, tol)


def count_near(values, point: complex, tol: float) -> int:
    return int(np.sum(np.abs(np.asarray(values) - point) <= tol))


def spectrum_report(instance, tol: float = 1e-6, B=None) -> SpectrumReport:
    """Full eigendecomposition of A and B, matched against the prediction."""
    eig_A = eig_symmetric(instance.A)
    if B is None:
        B = build_nomadic(instance).matrix
    eig_B = eig_general(B)
    pred, src = predicted_B_spectrum(instance, eig_A)
    rep = match_spectra(eig_B, pred, tol, src)
    rep.eig_A = eig_A
    rep.rho_A = float(np.max(np.abs(eig_A), initial=0.0))
    rep.rho_B = float(np.max(np.abs(eig_B), initial=0.0))
    rep.multiplicities = multiplicities(instance)
    return rep
