import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spectra_lab.atoms import (
    Atom, from_weights, hadamard, make_complete, make_forrelation, make_single_edge, make_sort4,
    parse_atom, parse_atoms, profile, validate_two_eigenvalue,
)
from spectra_lab.errors import (
    ArityTooLarge, Degenerate, InvalidArity, NotTwoEigenvalue, ValidationError,
)

FAMILIES = [make_single_edge, make_sort4, lambda: make_complete(3), lambda: make_complete(5),
            lambda: make_forrelation(0), lambda: make_forrelation(1), lambda: make_forrelation(2),
            lambda: make_forrelation(3)]


@pytest.mark.parametrize("make", FAMILIES)
def test_minimal_polynomial(make):
    a = make()
    W = a.weights.astype(float)
    lhs = W @ W
    rhs = (a.lambda1 + a.lambda2) * W - a.lambda1 * a.lambda2 * np.eye(a.r)
    assert np.allclose(lhs, rhs, atol=1e-12)
    assert a.lambda1 > 0 > a.lambda2


def test_closed_form_eigenvalues():
    assert (make_single_edge().lambda1, make_single_edge().lambda2) == (1.0, -1.0)
    assert (make_complete(4).lambda1, make_complete(4).lambda2) == (3.0, -1.0)
    assert make_sort4().lambda1 == math.sqrt(2)
    assert make_forrelation(3).lambda1 == 2 ** 1.5
    assert make_sort4().eig_prod == 2 and make_sort4().eig_sum == 0
    assert make_complete(3).eig_prod == 2 and make_complete(3).eig_sum == 1


def test_forrelation_one_matches_sort4_spectrum():
    f1, s4 = make_forrelation(1), make_sort4()
    assert f1.r == s4.r == 4
    assert np.allclose(np.linalg.eigvalsh(f1.weights), np.linalg.eigvalsh(s4.weights))
    # same unsigned pattern up to relabeling: both are 4-cycles with one negative edge
    assert sorted(np.abs(f1.weights).sum(axis=1)) == sorted(np.abs(s4.weights).sum(axis=1)) == [2, 2, 2, 2]
    assert np.prod([w for _, _, w in f1.edges()]) == np.prod([w for _, _, w in s4.edges()]) == -1


def test_hadamard_orthogonal():
    for k in range(5):
        h = hadamard(k)
        assert np.array_equal(h @ h.T, (1 << k) * np.eye(1 << k, dtype=np.int64))


def test_rejections():
    path = [[0, 1, 0], [1, 0, 1], [0, 1, 0]]
    with pytest.raises(NotTwoEigenvalue):
        from_weights(path)
    with pytest.raises(Degenerate):
        from_weights(np.zeros((3, 3), dtype=int))
    with pytest.raises(ValidationError):
        from_weights([[0, 1], [0, 0]])
    with pytest.raises(ValidationError):
        from_weights([[1, 1], [1, 0]])
    with pytest.raises(ValidationError):
        from_weights([[0, 2], [2, 0]])
    with pytest.raises(InvalidArity):
        make_complete(1)
    with pytest.raises(ArityTooLarge):
        make_complete(513)
    with pytest.raises(ArityTooLarge):
        make_forrelation(9)
    with pytest.raises(ValidationError):
        from_weights([[0, 1], [1, 0]], lambdas=(2.0, -1.0))


def test_parse_grammar():
    assert parse_atom("edge") == make_single_edge()
    assert parse_atom(" sort4 ") == make_sort4()
    assert parse_atom("complete:4") == make_complete(4)
    assert parse_atom("forrelation:2") == make_forrelation(2)
    assert parse_atoms("sort4", 3) == [make_sort4()] * 3
    assert [a.name for a in parse_atoms("sort4,forrelation:1")] == ["sort4", "forrelation:1"]
    for bad in ("triangle", "complete:x", "complete", "sort4:2", ""):
        with pytest.raises(ValidationError):
            parse_atom(bad)
    with pytest.raises(ValidationError):
        parse_atoms("sort4,sort4", 3)


@pytest.mark.parametrize("make", FAMILIES)
def test_json_roundtrip(make):
    a = make()
    b = Atom.from_json(a.to_json())
    assert a == b
    assert (b.lambda1, b.lambda2) == (a.lambda1, a.lambda2)
    with pytest.raises(ValidationError):
        Atom.from_dict(dict(a.to_dict(), r=a.r + 1))
    with pytest.raises(ValidationError):
        Atom.from_dict(dict(a.to_dict(), lambda1=a.lambda1 + 0.5))


def test_profile_values():
    p = profile(make_sort4(), 3)
    assert p.gr == pytest.approx(4.0) and p.rX == pytest.approx(4.0) and p.dX == pytest.approx(6.0)
    assert p.band == pytest.approx((-4.0, 4.0))
    p = profile(make_complete(3), 3)
    assert (p.gr, p.dX, p.center) == (4.0, 6.0, 1.0)
    with pytest.raises(InvalidArity):
        profile(make_sort4(), 1)


@given(st.sampled_from(FAMILIES), st.randoms(use_true_random=False))
def test_switching_and_relabeling_preserve_two_eigenvalues(make, rnd):
    a = make()
    perm = list(range(a.r))
    rnd.shuffle(perm)
    D = np.diag([rnd.choice((-1, 1)) for _ in range(a.r)])
    W = D @ a.weights[np.ix_(perm, perm)] @ D
    l1, l2 = validate_two_eigenvalue(W)
    assert l1 == pytest.approx(a.lambda1, abs=1e-9) and l2 == pytest.approx(a.lambda2, abs=1e-9)


@given(st.integers(2, 6).flatmap(
    lambda r: st.lists(st.sampled_from((-1, 0, 1)), min_size=r * (r - 1) // 2, max_size=r * (r - 1) // 2)
    .map(lambda xs: (r, xs))))
def test_accepted_matrices_satisfy_quadratic(data):
    r, xs = data
    W = np.zeros((r, r), dtype=np.int64)
    W[np.triu_indices(r, 1)] = xs
    W = W + W.T
    try:
        l1, l2 = validate_two_eigenvalue(W)
    except ValidationError:
        return
    Wf = W.astype(float)
    assert np.allclose(Wf @ Wf, (l1 + l2) * Wf - l1 * l2 * np.eye(r), atol=1e-8)
