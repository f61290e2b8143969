import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectra_lab.atoms import make_complete, make_forrelation, make_single_edge, make_sort4, profile
from spectra_lab.errors import BallTooLarge, SupportTouchesBoundary, ValidationError, ZeroVector
from spectra_lab.waves import (
    WitnessConfig, build_product_ball, degree_law_check, finite_section_excess, growth_rate_check,
    largest_affordable_radius, norm_sq_infinite, norm_sq_reference, norm_sq_truncated,
    predicted_level_sizes, quadratic_form_truncated, quotient_truncated, radius_for_tail,
    rayleigh_quotient, tail_mass, truncate_normalize, truncated_witness, witness_vector,
)

ATOMS = {"sort4": make_sort4, "k3": lambda: make_complete(3), "edge": make_single_edge,
         "f1": lambda: make_forrelation(1)}


def recursive_ball(atom, c, R, root_group=0):
    """Product ball grown one atom copy at a time by recursion.

    Returns per-vertex (depth, product) and a list of weighted edges.
    """
    W = atom.weights
    r = atom.r
    depth, product, group = [0], [1], [root_group]
    edges = []

    def expand(v, skip):
        for j in range(c):
            if j == skip:
                continue
            members = {group[v]: v}
            for i in range(r):
                if i == group[v]:
                    continue
                depth.append(depth[v] + 1)
                product.append(product[v] * int(W[group[v], i]))
                group.append(i)
                members[i] = len(depth) - 1
            for a in range(r):
                for b in range(a + 1, r):
                    if W[a, b]:
                        edges.append((members[a], members[b], int(W[a, b])))
            if depth[v] + 1 < R:
                for i, u in members.items():
                    if u != v:
                        expand(u, j)

    if R > 0:
        expand(0, -1)
    return np.array(depth), np.array(product), edges


def quad(edges, f):
    return sum(2 * w * f[u] * f[v] for u, v, w in edges)


@pytest.mark.parametrize("name,c,R", [("sort4", 2, 4), ("sort4", 3, 3), ("k3", 3, 3), ("edge", 4, 4), ("f1", 2, 4)])
def test_ball_matches_recursive_oracle(name, c, R):
    atom = ATOMS[name]()
    ball = build_product_ball([atom] * c, c, R)
    depth, product, edges = recursive_ball(atom, c, R)
    assert np.array_equal(ball.level_counts(), np.bincount(depth, minlength=R + 1))
    assert list(ball.level_counts()) == predicted_level_sizes([atom], c, R)
    assert ball.adjacency.nnz == 2 * len(edges)
    for t in range(R + 1):
        assert sorted(ball.product[ball.depth == t].tolist()) == sorted(product[depth == t].tolist())
    for s in (1, -1):
        for L in range(R):
            cfg = WitnessConfig(s, 0.1, L)
            f = truncated_witness(ball, cfg)
            rho = cfg.rho(profile(atom, c).gr)
            g = np.where(depth <= L, rho ** depth.astype(float) * product, 0.0)
            assert f @ f == pytest.approx(g @ g, rel=1e-12)
            assert f @ (ball.adjacency @ f) == pytest.approx(quad(edges, g), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("name,c", [("sort4", 2), ("sort4", 3), ("k3", 3), ("edge", 3), ("f1", 4)])
def test_growth_and_degree_laws(name, c):
    atom = ATOMS[name]()
    ball = build_product_ball([atom] * c, c, 5)
    for t in range(1, 6):
        lhs, rhs = growth_rate_check(ball, t)
        assert lhs == rhs
    degs, want = degree_law_check(ball)
    assert np.all(degs == want)
    with pytest.raises(ValidationError):
        growth_rate_check(ball, 0)


def test_frozen_level_sums():
    ball = build_product_ball([make_sort4()], 2, 4)
    assert [growth_rate_check(ball, t)[0] for t in range(1, 5)] == [4, 8, 16, 32]
    ball = build_product_ball([make_complete(3)], 3, 5)
    assert [growth_rate_check(ball, t)[0] for t in range(1, 6)] == [6, 24, 96, 384, 1536]


@pytest.mark.parametrize("name,c", [("sort4", 2), ("k3", 3), ("f1", 3)])
def test_closed_forms_against_ball(name, c):
    atom = ATOMS[name]()
    R = 6
    ball = build_product_ball([atom] * c, c, R)
    for s in (1, -1):
        for delta in (0.3, 0.05):
            for L in range(R):
                f = truncated_witness(ball, WitnessConfig(s, delta, L))
                assert f @ f == pytest.approx(norm_sq_truncated(c, delta, L), rel=1e-12)
                form = f @ (ball.adjacency @ f)
                assert form == pytest.approx(quadratic_form_truncated(atom.lambda1, atom.lambda2, c, s, delta, L),
                                             rel=1e-12, abs=1e-12)
                if L < R:
                    assert rayleigh_quotient(ball, f) == pytest.approx(
                        quotient_truncated(atom.lambda1, atom.lambda2, c, s, delta, L), rel=1e-12, abs=1e-12)


def test_pruned_ball_same_quotient():
    atom = make_sort4()
    full = build_product_ball([atom], 2, 6)
    pruned = build_product_ball([atom], 2, 6, prune_zero=True)
    assert pruned.n_vertices < full.n_vertices
    for s in (1, -1):
        cfg = WitnessConfig(s, 0.05, 5)
        assert rayleigh_quotient(full, truncated_witness(full, cfg)) == pytest.approx(
            rayleigh_quotient(pruned, truncated_witness(pruned, cfg)), rel=1e-12)
    assert list(pruned.level_counts()) == predicted_level_sizes([atom], 2, 6, prune_zero=True)


@given(st.floats(0.01, 0.99), st.integers(2, 9), st.integers(0, 40))
def test_norm_identities(delta, c, L):
    q = (1 - delta) ** 2
    assert norm_sq_truncated(c, delta, L) + tail_mass(c, delta, L) == pytest.approx(norm_sq_infinite(c, delta), rel=1e-9)
    assert norm_sq_reference(c, delta) - norm_sq_infinite(c, delta) == pytest.approx(1 / (c - 1), rel=1e-9)
    assert tail_mass(c, delta, L) == pytest.approx(c / (c - 1) * q ** (L + 1) / (1 - q))


def test_quotient_monotone_in_delta():
    prof = profile(make_sort4(), 2)
    target = prof.center + prof.rX
    gaps = [target - quotient_truncated(prof.lambda1, prof.lambda2, 2, 1, d, 400) for d in (0.2, 0.1, 0.05)]
    assert gaps[0] > gaps[1] > gaps[2] > 0
    low = [quotient_truncated(prof.lambda1, prof.lambda2, 2, -1, d, 400) - (prof.center - prof.rX)
           for d in (0.2, 0.1, 0.05)]
    assert low[0] > low[1] > low[2] > 0


def test_largest_affordable():
    atom = make_sort4()
    R = largest_affordable_radius([atom], 2)
    assert R == 17
    assert sum(predicted_level_sizes([atom], 2, R, True)) <= 10**6 < sum(predicted_level_sizes([atom], 2, R + 1, True))
    with pytest.raises(BallTooLarge):
        build_product_ball([atom], 2, 30)


def test_truncate_normalize_and_errors():
    ball = build_product_ball([make_sort4()], 2, 4)
    f = witness_vector(ball, WitnessConfig(1, 0.1, 3))
    g = truncate_normalize(ball, f, 0)
    assert np.array_equal(g, (ball.depth == 0).astype(float))
    h = truncate_normalize(ball, f, 3)
    assert np.linalg.norm(h) == pytest.approx(1.0)
    with pytest.raises(SupportTouchesBoundary):
        rayleigh_quotient(ball, f)
    with pytest.raises(ZeroVector):
        rayleigh_quotient(ball, np.zeros(ball.n_vertices))
    with pytest.raises(ZeroVector):
        truncate_normalize(ball, np.zeros(ball.n_vertices), 2)
    with pytest.raises(ValidationError):
        WitnessConfig(0, 0.1, 2)
    with pytest.raises(ValidationError):
        WitnessConfig(1, 1.0, 2)
    with pytest.raises(ValidationError):
        witness_vector(ball, WitnessConfig(1, 0.1, 5))
    pruned = build_product_ball([make_sort4()], 2, 3, prune_zero=True)
    with pytest.raises(ValidationError):
        growth_rate_check(pruned, 1)


def test_radius_for_tail():
    L = radius_for_tail(1e-6, 0.05)
    q = 0.95**2
    assert q**L <= 1e-6 < q ** (L - 1)


def test_finite_section_inside_band():
    small = finite_section_excess(build_product_ball([make_sort4()], 2, 6, prune_zero=True))
    large = finite_section_excess(build_product_ball([make_sort4()], 2, 12, prune_zero=True))
    assert small <= 1e-9 and large <= small + 1e-9


def test_ball_json():
    ball = build_product_ball([make_complete(3)], 3, 2)
    d = ball.to_dict()
    assert len(d["depth"]) == ball.n_vertices and len(d["edges"]) == ball.adjacency.nnz // 2
