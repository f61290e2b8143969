"""Two-eigenvalue atoms.

An atom is a small signed graph whose adjacency matrix has exactly two
distinct eigenvalues ``lambda1 > 0 > lambda2``.  Its minimal polynomial is
then quadratic, ``A^2 = (lambda1 + lambda2) A - lambda1 lambda2 I``, which is
what every downstream walk-counting identity relies on.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArityTooLarge, Degenerate, InvalidArity, NotTwoEigenvalue, ValidationError

TOL = 1e-9
MAX_ARITY = 512


def _check_structure(weights: np.ndarray) -> None:
    if weights.ndim != 2 or weights.shape[0] != weights.shape[1]:
        raise ValidationError("atom weights must be a square matrix")
    if not np.array_equal(weights, weights.T):
        raise ValidationError("atom weights must be symmetric")
    if np.any(np.diag(weights) != 0):
        raise ValidationError("atom weights must have zero diagonal")
    if not np.all(np.isin(weights, (-1, 0, 1))):
        raise ValidationError("atom weights must be in {-1, 0, +1}")


def validate_two_eigenvalue(weights, tol: float = TOL) -> tuple[float, float]:
    """Return ``(lambda1, lambda2)`` if ``weights`` has exactly two eigenvalues.

    Eigenvalues are clustered with gaps larger than ``tol * max|lambda|``.
    The square identities on the diagonal and off the diagonal are checked
    as well, since the rest of the library depends on them directly.
    """
    w = np.asarray(weights)
    _check_structure(w)
    if not np.any(w):
        raise Degenerate("zero matrix has a single eigenvalue")
    eigs = np.linalg.eigvalsh(w.astype(float))
    scale = max(1.0, float(np.max(np.abs(eigs))))
    breaks = np.flatnonzero(np.diff(eigs) > tol * scale)
    clusters = np.split(eigs, breaks + 1)
    if len(clusters) == 1:
        raise Degenerate("single eigenvalue cluster")
    if len(clusters) > 2:
        raise NotTwoEigenvalue(f"{len(clusters)} eigenvalue clusters: {eigs}")
    lam2 = float(np.mean(clusters[0]))
    lam1 = float(np.mean(clusters[1]))
    if not lam1 > 0 > lam2:
        raise ValidationError("need lambda1 > 0 > lambda2")

    a = w.astype(float)
    sq = a @ a
    if np.max(np.abs(np.diag(sq) + lam1 * lam2)) > tol * scale**2:
        raise NotTwoEigenvalue("column square sums differ from -lambda1*lambda2")
    off = sq - np.diag(np.diag(sq))
    if np.max(np.abs(off - (lam1 + lam2) * a)) > tol * scale**2:
        raise NotTwoEigenvalue("off-diagonal square identity fails")
    return lam1, lam2


def _snap(x: float) -> float | int:
    r = round(x)
    return int(r) if abs(x - r) < TOL else x


@dataclass(frozen=True, eq=False)
class Atom:
    name: str
    weights: np.ndarray
    lambda1: float
    lambda2: float
    _checked: bool = field(default=True, repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.int64)
        _check_structure(w)
        if w.shape[0] < 2:
            raise InvalidArity("atoms need at least 2 vertices")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def r(self) -> int:
        return self.weights.shape[0]

    @property
    def eig_sum(self) -> float | int:
        """``lambda1 + lambda2``, as an int when it is one."""
        return _snap(self.lambda1 + self.lambda2)

    @property
    def eig_prod(self) -> float | int:
        """``-lambda1 * lambda2`` (positive), as an int when it is one."""
        return _snap(-self.lambda1 * self.lambda2)

    def edges(self) -> list[tuple[int, int, int]]:
        """Nonzero pairs ``(i, i2, weight)`` with ``i < i2``."""
        iu, ju = np.nonzero(np.triu(self.weights))
        return [(int(i), int(j), int(self.weights[i, j])) for i, j in zip(iu, ju)]

    def __eq__(self, other):
        if not isinstance(other, Atom):
            return NotImplemented
        return (
            self.name == other.name
            and np.array_equal(self.weights, other.weights)
            and self.lambda1 == other.lambda1
            and self.lambda2 == other.lambda2
        )

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "r": self.r,
            "weights": self.weights.tolist(),
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Atom":
        w = np.array(d["weights"], dtype=np.int64)
        if w.shape[0] != d["r"]:
            raise ValidationError("r does not match weights")
        lambdas = (d["lambda1"], d["lambda2"]) if "lambda1" in d and "lambda2" in d else None
        return from_weights(w, name=d.get("name", "atom"), lambdas=lambdas)

    @classmethod
    def from_json(cls, s: str) -> "Atom":
        return cls.from_dict(json.loads(s))


def from_weights(weights, name: str = "atom", lambdas: tuple[float, float] | None = None) -> Atom:
    """Validate and wrap a weight matrix.

    If ``lambdas`` is given (exact closed-form values), the numerically
    found eigenvalues must agree with them to ``TOL``.
    """
    w = np.asarray(weights, dtype=np.int64)
    if w.shape[0] > MAX_ARITY:
        raise ArityTooLarge(f"arity {w.shape[0]} exceeds {MAX_ARITY}")
    lam1, lam2 = validate_two_eigenvalue(w)
    if lambdas is not None:
        if abs(lam1 - lambdas[0]) > TOL * max(1, abs(lam1)) or abs(lam2 - lambdas[1]) > TOL * max(1, abs(lam2)):
            raise ValidationError(f"eigenvalues {lam1, lam2} do not match {lambdas}")
        lam1, lam2 = lambdas
    return Atom(name, w, float(lam1), float(lam2))


def unchecked_atom(weights, name: str, lambda1: float, lambda2: float) -> Atom:
    """Test-only: build an atom without the two-eigenvalue check."""
    return Atom(name, np.asarray(weights), lambda1, lambda2, _checked=False)


def make_single_edge() -> Atom:
    return from_weights([[0, 1], [1, 0]], name="edge", lambdas=(1.0, -1.0))


def make_complete(r: int) -> Atom:
    if r < 2:
        raise InvalidArity("complete atom needs r >= 2")
    if r > MAX_ARITY:
        raise ArityTooLarge(f"arity {r} exceeds {MAX_ARITY}")
    w = np.ones((r, r), dtype=np.int64) - np.eye(r, dtype=np.int64)
    name = "edge" if r == 2 else f"complete:{r}"
    return from_weights(w, name=name, lambdas=(float(r - 1), -1.0))


def make_sort4() -> Atom:
    w = [[0, 0, 1, 1], [0, 0, 1, -1], [1, 1, 0, 0], [1, -1, 0, 0]]
    s = math.sqrt(2)
    return from_weights(w, name="sort4", lambdas=(s, -s))


def hadamard(k: int) -> np.ndarray:
    h = np.array([[1]], dtype=np.int64)
    base = np.array([[1, 1], [1, -1]], dtype=np.int64)
    for _ in range(k):
        h = np.kron(h, base)
    return h


def make_forrelation(k: int) -> Atom:
    """Bipartite atom whose x-to-y block is the k-th Walsh-Hadamard matrix."""
    if k < 0:
        raise InvalidArity("k must be nonnegative")
    if k > 8:
        raise ArityTooLarge("forrelation arity capped at k = 8")
    m = 1 << k
    w = np.zeros((2 * m, 2 * m), dtype=np.int64)
    h = hadamard(k)
    w[:m, m:] = h
    w[m:, :m] = h.T
    lam = 2.0 ** (k / 2)
    return from_weights(w, name=f"forrelation:{k}", lambdas=(lam, -lam))


def parse_atom(token: str) -> Atom:
    """Parse one token of the CLI atom grammar: edge, complete:R, sort4, forrelation:K."""
    token = token.strip()
    head, _, arg = token.partition(":")
    if head == "edge" and not arg:
        return make_single_edge()
    if head == "sort4" and not arg:
        return make_sort4()
    if head in ("complete", "forrelation") and arg:
        try:
            k = int(arg)
        except ValueError:
            raise ValidationError(f"bad integer in atom token {token!r}") from None
        return make_complete(k) if head == "complete" else make_forrelation(k)
    raise ValidationError(f"unknown atom token {token!r}")


def parse_atoms(spec: str, c: int | None = None) -> list[Atom]:
    """Parse a comma-separated atom list.  A single token is repeated ``c`` times."""
    tokens = [t for t in spec.split(",") if t.strip()]
    atoms = [parse_atom(t) for t in tokens]
    if c is not None:
        if len(atoms) == 1:
            atoms = atoms * c
        elif len(atoms) != c:
            raise ValidationError(f"expected {c} atoms, got {len(atoms)}")
    return atoms


@dataclass(frozen=True)
class TwoEigenvalueProfile:
    """Derived constants of ``c`` atoms sharing the pair ``(lambda1, lambda2)``."""

    c: int
    lambda1: float
    lambda2: float

    def __post_init__(self):
        if self.c < 2:
            raise InvalidArity("profile needs c >= 2")
        if not self.gr > 0:
            raise ValidationError("growth rate must be positive")

    @property
    def gr(self) -> float:
        return (self.c - 1) * (-self.lambda1 * self.lambda2)

    @property
    def rX(self) -> float:
        return 2 * math.sqrt(self.gr)

    @property
    def dX(self) -> float:
        return self.c * (-self.lambda1 * self.lambda2)

    @property
    def center(self) -> float:
        return self.lambda1 + self.lambda2

    @property
    def band(self) -> tuple[float, float]:
        return (self.center - self.rX, self.center + self.rX)


def profile(atom_or_lambdas, c: int) -> TwoEigenvalueProfile:
    if isinstance(atom_or_lambdas, Atom):
        return TwoEigenvalueProfile(c, atom_or_lambdas.lambda1, atom_or_lambdas.lambda2)
    lam1, lam2 = atom_or_lambdas
    return TwoEigenvalueProfile(c, lam1, lam2)
