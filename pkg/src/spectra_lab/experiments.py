"""Batch experiments behind ``spectra-lab experiment``.

An :class:`ExperimentSpec` fully determines its output table.  Seeds are
``base_seed, base_seed + 1, ...``; work is spread over a thread pool and
merged back in seed order, so the data section is byte-identical between
runs whatever the thread count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .atoms import parse_atoms, profile
from .errors import ValidationError
from .ihara import spectrum_report
from .lifts import NegationModel, make_instance, random_lift
from .sdp import forrelation_value, sandwich, sdp_value_formula, sort4_satisfiability, threshold_root
from .spectra import eig_general, eig_symmetric
from .nomadic import build_nomadic

KINDS = ("spectrum_B", "boxplot", "sandwich_sweep", "threshold_table")


@dataclass
class ExperimentSpec:
    kind: str
    atoms: str = "sort4"
    c_values: list = field(default_factory=lambda: [2])
    n: int = 15
    seeds: int = 1
    base_seed: int = 0
    negation: str = "variable"
    delta: float = 0.05
    L: int = 2
    threads: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown experiment kind {self.kind!r}")
        if self.n < 1:
            raise ValidationError("n must be at least 1")
        if self.seeds < 1:
            raise ValidationError("need at least one seed")
        self.c_values = [int(c) for c in self.c_values]

    def seed_list(self) -> list[int]:
        return [self.base_seed + k for k in range(self.seeds)]

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("threads")  # does not affect the data
        return d


@dataclass
class Table:
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)

    def fmt(self, x) -> str:
        if x is None:
            return ""
        if isinstance(x, (bool, np.bool_)):
            return "true" if x else "false"
        if isinstance(x, (int, np.integer)):
            return str(int(x))
        if isinstance(x, (float, np.floating)):
            x = float(x)
            if x == 0:
                return "0"  # folds -0.0
            return "%.12g" % x
        return str(x)

    def to_csv(self) -> str:
        lines = [f"# spectra-lab {__version__} " + json.dumps(self.meta, sort_keys=True)]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(self.fmt(row[c]) for c in self.columns))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        rows = [{c: row[c] for c in self.columns} for row in self.rows]
        return json.dumps({"version": __version__, "meta": self.meta, "columns": self.columns,
                           "rows": rows}, default=_jsonable, indent=1) + "\n"

    def data_section(self, fmt: str = "csv") -> str:
        """Output without the version header, for determinism checks."""
        if fmt == "csv":
            return self.to_csv().split("\n", 1)[1]
        d = json.loads(self.to_json())
        d.pop("version")
        return json.dumps(d, sort_keys=True)


def _jsonable(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(type(x))


def _map_seeds(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _instance(spec: ExperimentSpec, c: int, seed: int):
    atoms = parse_atoms(spec.atoms, c)
    cg = random_lift(atoms[0].r, c, spec.n, seed)
    return make_instance(cg, atoms, NegationModel(spec.negation, seed))


def run_spectrum_B(spec: ExperimentSpec) -> Table:
    """Eigenvalues of B, each tagged with the predicted source it matched."""
    jobs = [(c, s) for c in spec.c_values for s in spec.seed_list()]

    def one(job):
        c, seed = job
        inst = _instance(spec, c, seed)
        rep = spectrum_report(inst)
        sqrt_gr = math.sqrt(inst.profile.gr)
        rows = []
        for (ci, pi), res in zip(rep.pairs, rep.residuals):
            z = rep.eig_B_computed[ci]
            rows.append({
                "c": c, "seed": seed, "re": z.real, "im": z.imag, "abs": abs(z),
                "class": rep.predicted_sources[pi], "residual": res, "sqrt_gr": sqrt_gr,
            })
        # stable presentation order
        rows.sort(key=lambda r: (r["class"], round(r["re"], 9), round(r["im"], 9)))
        return rows

    rows = [r for chunk in _map_seeds(one, jobs, spec.threads) for r in chunk]
    cols = ["c", "seed", "re", "im", "abs", "class", "residual", "sqrt_gr"]
    return Table(cols, rows, {"kind": "spectrum_B", "spec": spec.to_dict()})


def boxplot_sample(spec: ExperimentSpec, c: int, seed: int) -> dict:
    inst = _instance(spec, c, seed)
    eA = eig_symmetric(inst.A)
    eB = eig_general(build_nomadic(inst).matrix)
    return {"c": c, "seed": seed, "rho_A": float(np.max(np.abs(eA))), "rho_B": float(np.max(np.abs(eB)))}


def run_boxplot(spec: ExperimentSpec) -> Table:
    """Per-seed spectral radii of A and B; see :func:`summarize_boxplot`."""
    jobs = [(c, s) for c in spec.c_values for s in spec.seed_list()]
    rows = _map_seeds(lambda j: boxplot_sample(spec, *j), jobs, spec.threads)
    for row in rows:
        prof = profile(parse_atoms(spec.atoms, row["c"])[0], row["c"])
        row["bound_A"] = prof.center + prof.rX
        row["sqrt_gr"] = math.sqrt(prof.gr)
    cols = ["c", "seed", "rho_A", "rho_B", "bound_A", "sqrt_gr"]
    return Table(cols, rows, {"kind": "boxplot", "spec": spec.to_dict()})


def summarize_boxplot(table: Table) -> Table:
    """Median and quartiles per c, with the reference lines."""
    out = []
    cs = sorted({r["c"] for r in table.rows})
    for c in cs:
        rs = [r for r in table.rows if r["c"] == c]
        a = np.array([r["rho_A"] for r in rs])
        b = np.array([r["rho_B"] for r in rs])
        seeds = [r["seed"] for r in rs]
        out.append({
            "c": c, "seed_first": min(seeds), "seed_count": len(seeds),
            "rho_A_q1": np.percentile(a, 25), "rho_A_median": np.median(a), "rho_A_q3": np.percentile(a, 75),
            "rho_B_q1": np.percentile(b, 25), "rho_B_median": np.median(b), "rho_B_q3": np.percentile(b, 75),
            "bound_A": rs[0]["bound_A"], "sqrt_gr": rs[0]["sqrt_gr"],
            "rho_B_ratio": np.median(b) / rs[0]["sqrt_gr"],
        })
    cols = list(out[0].keys()) if out else []
    return Table(cols, out, dict(table.meta, summary=True))


def run_sandwich_sweep(spec: ExperimentSpec) -> Table:
    jobs = [(c, s) for c in spec.c_values for s in spec.seed_list()]

    def one(job):
        c, seed = job
        inst = _instance(spec, c, seed)
        rep = sandwich(inst, spec.delta, spec.L)
        d = rep.to_dict()
        d.update(c=c, n=spec.n, seed=seed, gap=rep.sdp_upper - rep.sdp_lower)
        return d

    rows = _map_seeds(one, jobs, spec.threads)
    cols = ["c", "n", "seed", "opt", "sdp_lower", "sdp_upper", "formula", "gap",
            "bad_vertex_count", "tail_mass", "slack", "chain_holds"]
    return Table(cols, rows, {"kind": "sandwich_sweep", "spec": spec.to_dict()})


def run_threshold_table(spec: ExperimentSpec | None = None, k_max: int = 4, c_max: int = 10) -> Table:
    """Closed-form SDP values for Forrelation_k, k <= k_max, and the SORT4 threshold."""
    seed = spec.base_seed if spec is not None else 0
    rows = []
    for k in range(k_max + 1):
        lam = 2.0 ** (k / 2)
        for c in range(2, c_max + 1):
            val = sdp_value_formula(lam, -lam, c)
            row = {"seed": seed, "k": k, "c": c, "formula": val,
                   "forrelation": forrelation_value(k, c), "half_plus": None, "certifies_unsat": None}
            if k == 1:
                row["half_plus"] = sort4_satisfiability(c)
                row["certifies_unsat"] = row["half_plus"] < 1
            rows.append(row)
    root = threshold_root()
    meta = {"kind": "threshold_table", "root": root, "root_closed_form": 4 + 2 * math.sqrt(2)}
    cols = ["seed", "k", "c", "formula", "forrelation", "half_plus", "certifies_unsat"]
    return Table(cols, rows, meta)


def run(spec: ExperimentSpec) -> Table:
    if spec.kind == "spectrum_B":
        return run_spectrum_B(spec)
    if spec.kind == "boxplot":
        return run_boxplot(spec)
    if spec.kind == "sandwich_sweep":
        return run_sandwich_sweep(spec)
    return run_threshold_table(spec)


def gnuplot_script(table: Table, csv_path: str) -> str:
    kind = table.meta.get("kind")
    head = f'set datafile separator ","\nset key outside\n'
    if kind == "spectrum_B":
        return head + (
            "set size ratio -1\nset xlabel 'Re'\nset ylabel 'Im'\n"
            f"plot '{csv_path}' every ::2 using 3:4 with points pt 7 ps 0.4 title 'eig(B)'\n"
        )
    if kind == "boxplot":
        return head + (
            "set style data boxplot\nset xlabel 'c'\nset ylabel 'rho(B)'\n"
            f"plot '{csv_path}' every ::2 using (1):4:(0.5):1 title 'rho(B)', "
            f"'' every ::2 using 1:6 with lines dt 2 title 'sqrt(gr)'\n"
        )
    if kind == "threshold_table":
        return head + (
            "set xlabel 'c'\nset ylabel '1/2 + value'\n"
            f"plot '{csv_path}' every ::2 using 3:($2==1 ? $6 : 1/0) with linespoints title 'SORT4', 1 dt 2 notitle\n"
        )
    return head + f"plot '{csv_path}' every ::2 using 1:8 with points title 'gap'\n"
