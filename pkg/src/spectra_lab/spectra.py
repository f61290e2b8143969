"""Eigensolver layer shared by the other modules.

Dense LAPACK drivers do the work below ``DENSE_LIMIT``; above it only
spectral radii are available.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NoConvergence, NotSymmetric, TooLarge

DENSE_LIMIT = 6000


@dataclass(frozen=True)
class EigenRequest:
    """What to compute for a matrix; ``full`` is only allowed below the dense limit."""

    matrix: object
    symmetric: bool
    want: str = "full_spectrum"  # or "radius_only"
    tol: float = 1e-8
    max_iter: int = 10_000

    def __post_init__(self):
        if self.want not in ("full_spectrum", "radius_only"):
            raise ValueError("want must be 'full_spectrum' or 'radius_only'")
        if self.want == "full_spectrum" and self.matrix.shape[0] > DENSE_LIMIT:
            raise TooLarge(f"full spectrum needs dimension <= {DENSE_LIMIT}")

    def run(self):
        if self.want == "radius_only":
            return spectral_radius(self.matrix, symmetric=self.symmetric, tol=self.tol, cap=self.max_iter)
        if self.symmetric:
            return eig_symmetric(self.matrix)
        return eig_general(self.matrix)


def _dense(M) -> np.ndarray:
    if sp.issparse(M):
        if M.shape[0] > DENSE_LIMIT:
            raise TooLarge(f"dimension {M.shape[0]} > {DENSE_LIMIT}")
        return M.toarray()
    M = np.asarray(M)
    if M.shape[0] > DENSE_LIMIT:
        raise TooLarge(f"dimension {M.shape[0]} > {DENSE_LIMIT}")
    return M


def is_symmetric(M, tol: float = 1e-12) -> bool:
    if sp.issparse(M):
        d = abs(M - M.T)
        return d.nnz == 0 or d.max() <= tol
    M = np.asarray(M)
    return bool(np.max(np.abs(M - M.T), initial=0.0) <= tol)


def eig_symmetric(A) -> np.ndarray:
    """Ascending real spectrum of a symmetric matrix."""
    if not is_symmetric(A):
        raise NotSymmetric("matrix is not symmetric within 1e-12")
    return np.linalg.eigvalsh(_dense(A).astype(float))


def eig_general(B) -> np.ndarray:
    """Complex spectrum via LAPACK's Hessenberg-QR (``geev``)."""
    return np.linalg.eigvals(_dense(B).astype(float))


def residual_check(M, symmetric: bool, count: int = 10, seed: int = 0) -> float:
    """Largest ``|Mv - lv| / (|M| + |l|)`` over ``count`` random eigenpairs."""
    D = _dense(M).astype(float)
    if symmetric:
        vals, vecs = np.linalg.eigh(D)
    else:
        vals, vecs = np.linalg.eig(D)
    norm = np.linalg.norm(D, 2) if D.shape[0] <= 2000 else np.linalg.norm(D, "fro")
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(vals), size=min(count, len(vals)), replace=False)
    worst = 0.0
    for k in pick:
        v = vecs[:, k]
        r = np.linalg.norm(D @ v - vals[k] * v) / np.linalg.norm(v)
        worst = max(worst, r / (norm + abs(vals[k])))
    return worst


@dataclass(frozen=True)
class RadiusEstimate:
    value: float
    method: str  # "exact-dense", "symmetric-lanczos" or "norm-based upper estimate"
    converged: bool
    power: int = 1


def _sigma_max(op, n, tol, cap, rng):
    """Largest singular value of a linear operator by power iteration on op^T op."""
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    sigma = 0.0
    for _ in range(cap):
        y = op.rmatvec(op.matvec(x))
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        new = np.sqrt(ny)
        x = y / ny
        if abs(new - sigma) <= tol * new:
            return new
        sigma = new
    raise NoConvergence(f"power iteration did not converge in {cap} steps")


def spectral_radius_estimate(M, symmetric: bool | None = None, tol: float = 1e-8,
                             cap: int = 10_000, seed: int = 0) -> RadiusEstimate:
    n = M.shape[0]
    if symmetric is None:
        symmetric = is_symmetric(M)
    if n == 0:
        return RadiusEstimate(0.0, "exact-dense", True)
    if n <= DENSE_LIMIT:
        D = _dense(M).astype(float)
        vals = np.linalg.eigvalsh(D) if symmetric else np.linalg.eigvals(D)
        return RadiusEstimate(float(np.max(np.abs(vals))), "exact-dense", True)
    if symmetric:
        Ms = sp.csr_matrix(M, dtype=float)
        val = spla.eigsh(Ms, k=1, which="LM", tol=tol, maxiter=cap, return_eigenvectors=False)
        return RadiusEstimate(float(abs(val[0])), "symmetric-lanczos", True)
    # rho(M) = lim |M^k|^(1/k); report |M^k|^(1/k) for the largest k tried
    Ms = sp.csr_matrix(M, dtype=float)
    rng = np.random.default_rng(seed)
    prev = None
    k = 1
    est = None
    while k <= 64:
        def mv(x, k=k):
            for _ in range(k):
                x = Ms @ x
            return x

        def rmv(x, k=k):
            for _ in range(k):
                x = Ms.T @ x
            return x

        op = spla.LinearOperator((n, n), matvec=mv, rmatvec=rmv, dtype=float)
        est = _sigma_max(op, n, tol, cap, rng) ** (1.0 / k)
        if prev is not None and abs(est - prev) <= 1e-3 * est:
            return RadiusEstimate(est, "norm-based upper estimate", True, k)
        prev = est
        k *= 2
    return RadiusEstimate(est, "norm-based upper estimate", False, k // 2)


def spectral_radius(M, symmetric: bool | None = None, tol: float = 1e-8, cap: int = 10_000) -> float:
    return spectral_radius_estimate(M, symmetric, tol, cap).value
