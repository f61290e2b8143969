import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectra_lab.atoms import make_complete, make_forrelation, make_single_edge, make_sort4
from spectra_lab.errors import OutOfModel, TooLarge, ValidationError
from spectra_lab.lifts import (
    NegationModel, atom_instance, ball_excess, base_constraint_graph, bad_mask, instance_from_adjacency,
    make_instance, random_lift,
)
from spectra_lab.sdp import (
    build_witness, dense_witness, eig_upper_bound, forrelation_value, opt_bruteforce, sandwich,
    sdp_lower_bound, sdp_value_formula, sort4_satisfiability, spectral_witness, threshold_root,
)
from spectra_lab.waves import quotient_truncated


def instance(atom, c, n, seed, neg="variable"):
    return make_instance(random_lift(atom.r, c, n, seed), [atom] * c, NegationModel(neg, seed))


def opt_enumerate(inst):
    A = inst.A.astype(np.int64)
    best = max(int(np.array(x) @ A @ np.array(x)) for x in itertools.product((-1, 1), repeat=inst.n_vertices))
    return best / (2 * np.count_nonzero(inst.ew))


def transport_oracle(inst, v, s, delta, L):
    """Walk outward from v, never reusing the atom copy just used; value rho^d * product."""
    rho = s * (1 - delta) / math.sqrt(inst.profile.gr)
    inc = [[] for _ in range(inst.n_vertices)]
    for u, w, wt, f in zip(inst.eu, inst.ev, inst.ew, inst.eatom):
        if wt:
            inc[u].append((int(w), int(wt), int(f)))
            inc[w].append((int(u), int(wt), int(f)))
    g = np.zeros(inst.n_vertices)
    g[v] = 1.0
    frontier = [(v, None, 1.0)]
    for _ in range(L):
        nxt = []
        for x, f_in, val in frontier:
            for y, wt, f in inc[x]:
                if f == f_in:
                    continue
                g[y] += val * rho * wt
                nxt.append((y, f, val * rho * wt))
        frontier = nxt
    return g / np.linalg.norm(g)


@pytest.mark.parametrize("atom,c,n,L", [(make_sort4(), 2, 40, 2), (make_complete(3), 3, 40, 2),
                                         (make_forrelation(2), 2, 100, 1)])
@pytest.mark.parametrize("s", [1, -1])
def test_transport_matches_oracle(atom, c, n, L, s):
    inst = instance(atom, c, n, 2)
    w = build_witness(inst, s=s, delta=0.1, L=L)
    G = w.G.toarray()
    good = np.flatnonzero(~bad_mask(inst.congraph, L))
    assert len(good) > 0
    for v in good[:25]:
        assert np.allclose(G[v], transport_oracle(inst, int(v), s, 0.1, L), atol=1e-13)
    for v in np.flatnonzero(bad_mask(inst.congraph, L)):
        assert G[v, v] == 1.0 and np.count_nonzero(G[v]) == 1


@pytest.mark.parametrize("s", [1, -1])
@pytest.mark.parametrize("L", [1, 2])
def test_tree_vertices_reach_closed_form_quotient(s, L):
    atom = make_sort4()
    inst = instance(atom, 2, 200, 1)
    w = build_witness(inst, s=s, delta=0.05, L=L)
    A = inst.A_sparse()
    tree = np.flatnonzero(ball_excess(inst.congraph, np.arange(inst.n_vertices), 2 * L + 1) == 0)
    assert len(tree) > 0
    want = quotient_truncated(atom.lambda1, atom.lambda2, 2, s, 0.05, L)
    for v in tree[:30]:
        g = w.G.getrow(v).toarray().ravel()
        assert g @ (A @ g) == pytest.approx(want, rel=1e-12, abs=1e-12)


@settings(max_examples=20)
@given(st.sampled_from(["sort4", "k3", "edge"]), st.integers(2, 3), st.integers(1, 15),
       st.integers(0, 10**6), st.integers(0, 3), st.sampled_from([1, -1]))
def test_witness_unit_diagonal_and_psd(name, c, n, seed, L, s):
    atom = {"sort4": make_sort4(), "k3": make_complete(3), "edge": make_single_edge()}[name]
    inst = instance(atom, c, n, seed)
    w = build_witness(inst, s=s, delta=0.1, L=L)
    assert np.allclose(w.diagonal(), 1.0, atol=1e-12)
    assert np.allclose(np.diag(w.M), 1.0, atol=1e-12)
    assert w.min_eigenvalue() >= -1e-10
    assert w.inner(inst.A_sparse()) == pytest.approx(float(np.sum(inst.A * w.M)), rel=1e-10, abs=1e-10)


def test_all_bad_witness_is_identity():
    cg = base_constraint_graph(4, 2)
    inst = make_instance(cg, [make_sort4()] * 2)
    w = build_witness(inst, L=1)
    assert w.meta["bad_vertex_count"] == 4
    assert np.array_equal(w.M, np.eye(4))


@settings(max_examples=20)
@given(st.integers(1, 6), st.integers(0, 10**6), st.integers(0, 2), st.sampled_from([1, -1]))
def test_chain_holds(n, seed, L, s):
    inst = instance(make_sort4(), 2, n, seed)
    rep = sandwich(inst, 0.05, L, s)
    assert rep.chain_holds()
    assert rep.opt is not None and rep.opt <= rep.sdp_upper + 1e-9
    assert rep.sdp_lower <= rep.sdp_upper + 1e-9
    assert rep.to_dict()["chain_holds"]


@settings(max_examples=25)
@given(st.sampled_from(["sort4", "k3"]), st.integers(1, 4), st.integers(0, 10**6))
def test_gray_code_matches_enumeration(name, n, seed):
    atom = {"sort4": make_sort4(), "k3": make_complete(3)}[name]
    c = 2 if name == "sort4" else 3
    inst = instance(atom, c, n, seed)
    assert inst.n_vertices <= 16
    assert opt_bruteforce(inst) == opt_enumerate(inst)


def test_chsh_and_pentagon():
    chsh = atom_instance(make_sort4())
    assert opt_bruteforce(chsh) == 0.5
    w = spectral_witness(chsh)
    assert np.allclose(w.M, np.eye(4) + chsh.A / math.sqrt(2))
    assert sdp_lower_bound(chsh, w) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert eig_upper_bound(chsh) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    c5 = -(np.roll(np.eye(5, dtype=int), 1, axis=1) + np.roll(np.eye(5, dtype=int), -1, axis=1))
    pent = instance_from_adjacency(c5)
    assert opt_bruteforce(pent) == pytest.approx(0.6)
    assert eig_upper_bound(pent) == pytest.approx((1 + math.sqrt(5)) / 4)


def test_limits_and_formulas():
    big = instance(make_sort4(), 2, 7, 0)
    with pytest.raises(TooLarge):
        opt_bruteforce(big)
    assert sandwich(big, 0.05, 1).opt is None
    with pytest.raises(OutOfModel):
        sdp_value_formula(1, -1, 1)
    with pytest.raises(ValidationError):
        build_witness(big, s=0)
    with pytest.raises(ValidationError):
        build_witness(big, delta=0)
    with pytest.raises(ValidationError):
        dense_witness(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert dense_witness(np.eye(3)).inner(np.ones((3, 3))) == pytest.approx(3.0)
    for k in range(5):
        for c in range(2, 11):
            lam = 2 ** (k / 2)
            assert sdp_value_formula(lam, -lam, c) == pytest.approx(forrelation_value(k, c), abs=1e-12)
    assert sort4_satisfiability(6) > 1 > sort4_satisfiability(7)
    assert threshold_root() == pytest.approx(4 + 2 * math.sqrt(2), abs=1e-12)
    # K_r: (r - 2 + 2 sqrt((c-1)(r-1))) / (c (r-1))
    assert sdp_value_formula(2, -1, 3) == pytest.approx((1 + 2 * math.sqrt(4)) / 6)


@pytest.mark.slow
def test_gap_shrinks_with_n():
    """Sign test over 20 paired seeds: upper - lower at n=200 below n=50."""
    gaps = {}
    for n in (50, 100, 200):
        gaps[n] = []
        for seed in range(20):
            rep = sandwich(instance(make_sort4(), 2, n, seed), 0.05, 2)
            gaps[n].append(rep.sdp_upper - rep.sdp_lower)
    med = {n: float(np.median(g)) for n, g in gaps.items()}
    assert med[50] > med[100] > med[200]
    wins = sum(b < a for a, b in zip(gaps[50], gaps[200]))
    assert wins >= 15  # one-sided binomial p < 0.021
