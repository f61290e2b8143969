"""Compiled vs pure-Python timings for the four hot kernels.

    python3 benchmarks/bench_kernels.py [--n 200] [--repeat 3]
"""

import argparse
import time

import numpy as np

from spectra_lab import _kernels
from spectra_lab.atoms import make_sort4
from spectra_lab.lifts import NegationModel, bad_mask, make_instance, random_lift
from spectra_lab.nomadic import NomadicOperator


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n, L):
    atom = make_sort4()
    inst = make_instance(random_lift(4, 3, n, 1), [atom] * 3, NegationModel("variable", 1))
    cg = inst.congraph
    op = NomadicOperator(inst)
    good = (~bad_mask(cg, L)).astype(np.uint8)
    atom_w = np.stack([a.weights for a in inst.atoms]).astype(float)
    rng = np.random.default_rng(0)
    A = rng.integers(-1, 2, size=(18, 18))
    A = A + A.T
    return {
        "nomadic_csr": lambda k: k.nomadic_csr(op.tail, op.head, op.atom, op.weight.astype(float), inst.n_vertices),
        "ball_excess": lambda k: k.ball_excess(cg.var_adj, cg.con_adj, np.arange(cg.n_var), 2 * L),
        "witness_rows": lambda k: k.witness_rows(cg.var_adj, cg.con_adj, cg.con_group(), cg.var_group(), atom_w,
                                                 inst.con_sign.astype(float), inst.var_sign.astype(float),
                                                 good, 0.5, L),
        "gray_code_max(n=18)": lambda k: k.gray_code_max(A),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--L", type=int, default=1)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    pure = _kernels.get_backend("pure")
    comp = _kernels.get_backend("compiled") if _kernels.compiled_available() else None
    print(f"SORT4 c=3 lift, n={args.n}, L={args.L}")
    print(f"{'kernel':<22}{'pure [s]':>12}{'compiled [s]':>14}{'speedup':>10}")
    for name, fn in cases(args.n, args.L).items():
        tp = best_of(lambda: fn(pure), args.repeat)
        if comp is None:
            print(f"{name:<22}{tp:>12.4f}{'-':>14}{'-':>10}")
            continue
        tc = best_of(lambda: fn(comp), args.repeat)
        print(f"{name:<22}{tp:>12.4f}{tc:>14.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
