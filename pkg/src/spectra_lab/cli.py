"""Command-line interface: ``spectra-lab <command> ...``.

Exit codes: 0 success, 2 validation failure (bad input or a failed
check), 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .atoms import parse_atoms, profile
from .errors import NumericalError, SpectraLabError, ValidationError
from .experiments import ExperimentSpec, gnuplot_script, run, summarize_boxplot
from .ihara import ihara_bass_residual, sample_t, spectrum_report
from .lifts import InstanceGraph, NegationModel, make_instance, random_lift
from .nomadic import build_nomadic
from .sdp import sandwich
from .waves import (
    WitnessConfig,
    build_product_ball,
    largest_affordable_radius,
    norm_sq_infinite,
    norm_sq_reference,
    rayleigh_quotient,
    tail_mass,
    truncated_witness,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


def _common(defaults: bool) -> argparse.ArgumentParser:
    """Global flags; accepted before or after the subcommand."""
    sup = None if defaults else argparse.SUPPRESS
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0 if defaults else sup)
    p.add_argument("--threads", type=int, default=None if defaults else sup,
                   help="worker threads (default: $SPECTRA_LAB_THREADS or 1)")
    p.add_argument("--out", default=None if defaults else sup)
    p.add_argument("--format", choices=("csv", "json"), default="csv" if defaults else sup)
    return p


def _c_range(text: str) -> list[int]:
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    common = _common(False)
    parser = argparse.ArgumentParser(prog="spectra-lab", parents=[_common(True)],
                                     description="Random additive lifts of two-eigenvalue atoms.")
    parser.add_argument("--version", action="version", version=f"spectra-lab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("atom", parents=[common], help="validate an atom and print its profile")
    p.add_argument("--atoms", required=True)
    p.add_argument("--c", type=int, default=2)

    lift = sub.add_parser("lift", help="random lifts").add_subparsers(dest="action", required=True)
    p = lift.add_parser("gen", parents=[common], help="generate an instance JSON")
    p.add_argument("--r", type=int)
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--atoms", required=True)
    p.add_argument("--negation", choices=("constraint", "variable", "none"), default="none")

    nom = sub.add_parser("nomadic", help="nomadic operator").add_subparsers(dest="action", required=True)
    p = nom.add_parser("dump", parents=[common], help="write B in Matrix Market format")
    p.add_argument("--in", dest="inp", required=True)

    ih = sub.add_parser("ihara", help="Ihara-Bass checks").add_subparsers(dest="action", required=True)
    p = ih.add_parser("check", parents=[common])
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--spectrum-tol", type=float, default=1e-6)
    p.add_argument("--report")

    wv = sub.add_parser("waves", help="additive product balls").add_subparsers(dest="action", required=True)
    p = wv.add_parser("ball", parents=[common])
    p.add_argument("--atoms", required=True)
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--prune", action="store_true", help="drop zero-weight subtrees")
    p = wv.add_parser("rayleigh", parents=[common])
    p.add_argument("--atoms", default="sort4")
    p.add_argument("--c", type=int, default=2)
    p.add_argument("--s", type=int, choices=(1, -1), default=1)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--L", type=int, default=None, help="truncation depth (default: largest affordable)")

    sd = sub.add_parser("sdp", help="SDP sandwiches").add_subparsers(dest="action", required=True)
    p = sd.add_parser("sandwich", parents=[common])
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--L", type=int, default=2)
    p.add_argument("--s", type=int, choices=(1, -1), default=1)

    p = sub.add_parser("experiment", parents=[common], help="batch experiments")
    p.add_argument("kind", choices=("spectrum-b", "boxplot", "sandwich-sweep", "threshold-table"))
    p.add_argument("--atoms", default="sort4")
    p.add_argument("--c", default="2", help="single value, list 2,3 or range 2:8")
    p.add_argument("--n", type=int, default=15)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--negation", choices=("constraint", "variable", "none"), default="variable")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--L", type=int, default=2)
    p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script next to --out")
    return parser


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    return max(1, int(os.environ.get("SPECTRA_LAB_THREADS", "1") or 1))


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj, out=None) -> None:
    _emit(json.dumps(obj, indent=1) + "\n", out)


def cmd_atom(args):
    atoms = parse_atoms(args.atoms)
    prof = profile(atoms[0], args.c)
    _dump({
        "atoms": [a.to_dict() for a in atoms],
        "profile": {"c": prof.c, "gr": prof.gr, "rX": prof.rX, "dX": prof.dX, "band": list(prof.band)},
    }, args.out)
    return EXIT_OK


def cmd_lift_gen(args):
    atoms = parse_atoms(args.atoms, args.c)
    r = args.r if args.r is not None else atoms[0].r
    cg = random_lift(r, args.c, args.n, args.seed)
    inst = make_instance(cg, atoms, NegationModel(args.negation, args.seed))
    _emit(inst.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_nomadic_dump(args):
    if not args.out:
        raise ValidationError("--out is required for nomadic dump")
    build_nomadic(InstanceGraph.load(args.inp)).write_mtx(args.out)
    return EXIT_OK


def cmd_ihara_check(args):
    inst = InstanceGraph.load(args.inp)
    B = build_nomadic(inst).matrix
    ts = sample_t(inst, args.samples, args.seed)
    per_t = [{"t": float(t), "residual": ihara_bass_residual(inst, float(t), B)} for t in ts]
    worst = max((x["residual"] for x in per_t), default=0.0)
    report = {"samples": per_t, "max_residual": worst, "tol": args.tol, "identity_ok": worst <= args.tol}
    ok = report["identity_ok"]
    if 2 * inst.n_edges <= 6000:
        rep = spectrum_report(inst, args.spectrum_tol, B)
        report["spectrum"] = rep.to_dict()
        ok = ok and rep.passed
    report["passed"] = ok
    _dump(report, args.report or args.out)
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_waves_ball(args):
    atoms = parse_atoms(args.atoms, args.c)
    ball = build_product_ball(atoms, args.c, args.radius, prune_zero=args.prune)
    _emit(ball.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_waves_rayleigh(args):
    atoms = parse_atoms(args.atoms, args.c)
    R = largest_affordable_radius(atoms, args.c) if args.L is None else args.L + 1
    L = R - 1
    ball = build_product_ball(atoms, args.c, R, prune_zero=True)
    cfg = WitnessConfig(args.s, args.delta, L)
    f = truncated_witness(ball, cfg)
    prof = ball.profile
    _dump({
        "s": args.s, "delta": args.delta, "L": L,
        "quotient": rayleigh_quotient(ball, f),
        "target": prof.center + args.s * prof.rX,
        "norm_sq": float(f @ f),
        "norm_sq_infinite": norm_sq_infinite(args.c, args.delta),
        "norm_sq_reference": norm_sq_reference(args.c, args.delta),
        "tail_mass": tail_mass(args.c, args.delta, L),
    }, args.out)
    return EXIT_OK


def cmd_sdp_sandwich(args):
    inst = InstanceGraph.load(args.inp)
    rep = sandwich(inst, args.delta, args.L, args.s)
    _dump(rep.to_dict(), args.out)
    return EXIT_OK if rep.chain_holds() else EXIT_VALIDATION


def cmd_experiment(args):
    kind = {"spectrum-b": "spectrum_B", "boxplot": "boxplot",
            "sandwich-sweep": "sandwich_sweep", "threshold-table": "threshold_table"}[args.kind]
    spec = ExperimentSpec(kind=kind, atoms=args.atoms, c_values=_c_range(args.c), n=args.n,
                          seeds=args.seeds, base_seed=args.seed, negation=args.negation,
                          delta=args.delta, L=args.L, threads=_threads(args))
    table = run(spec)
    text = table.to_csv() if args.format == "csv" else table.to_json()
    _emit(text, args.out)
    if kind == "boxplot" and args.out:
        summ = summarize_boxplot(table)
        root, ext = os.path.splitext(args.out)
        _emit(summ.to_csv() if args.format == "csv" else summ.to_json(), f"{root}.summary{ext or '.csv'}")
    if args.gnuplot:
        if not args.out or args.format != "csv":
            raise ValidationError("--gnuplot needs --out and csv format")
        _emit(gnuplot_script(table, args.out), os.path.splitext(args.out)[0] + ".gp")
    return EXIT_OK


COMMANDS = {
    ("atom", None): cmd_atom,
    ("lift", "gen"): cmd_lift_gen,
    ("nomadic", "dump"): cmd_nomadic_dump,
    ("ihara", "check"): cmd_ihara_check,
    ("waves", "ball"): cmd_waves_ball,
    ("waves", "rayleigh"): cmd_waves_rayleigh,
    ("sdp", "sandwich"): cmd_sdp_sandwich,
    ("experiment", None): cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fn = COMMANDS[(args.command, getattr(args, "action", None))]
    try:
        return fn(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SpectraLabError as exc:  # pragma: no cover - every subclass is one of the above
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
