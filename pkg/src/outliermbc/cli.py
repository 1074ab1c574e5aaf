"""Command-line interface: ``fit``, ``simulate``, ``bench`` and ``gross``.

Exit codes
----------
0 success, 2 usage, 3 parse error, 4 infeasible configuration,
5 numerical failure, 6 partial bench failure, 7 nothing to do, 8 I/O error.
"""

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__, _backend, simgen
from .dataio import read_csv, write_labeled_csv
from .dissim import DEFAULT_GRID
from .errors import (
    DomainError,
    EmptyComponent,
    InfeasibleBudget,
    InvalidStep,
    NoValidStep,
    NotPositiveDefinite,
    NumericalError,
    OutlierMBCError,
    ParseError,
    RejectionStall,
    TooFewPoints,
    UnknownScenario,
)
from .gross import detect_gross
from .init import InitScheme
from .metrics import adjusted_rand_index, outlier_f1
from .report import SCHEMA_VERSION, curve_payload, dumps, emit_curve, write_assignments, write_json
from .sequencer import BacktrackConfig, Rule, choose_backtrack, choose_minimum, finalize, run_sequence

log = logging.getLogger("outliermbc")

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PARTIAL, EXIT_NOOP, EXIT_IO = 0, 2, 3, 4, 5, 6, 7, 8

_CONFIG_ERRORS = (DomainError, InfeasibleBudget, InvalidStep, TooFewPoints, UnknownScenario)
_NUMERIC_ERRORS = (NotPositiveDefinite, NumericalError, NoValidStep, EmptyComponent, RejectionStall)


@dataclass(frozen=True)
class RunConfig:
    G: int
    M: int
    scheme: str = "update"
    T: int = DEFAULT_GRID
    alpha: float = 0.05
    beta: float = 0.10
    gross_enabled: bool = True
    user_o: int | None = None
    seed: int = 1
    tol: float = 1e-8
    max_iter: int = 1000
    rule: str = "minimum"

    def __post_init__(self):
        if self.G < 1:
            raise DomainError("--components must be at least 1")
        if self.M < 0:
            raise DomainError("--max-outliers must be non-negative")
        if self.T < 1:
            raise DomainError("--grid-size must be at least 1")
        if self.alpha < 0 or self.beta < 0:
            raise DomainError("--alpha and --beta must be non-negative")
        if self.tol <= 0 or self.max_iter < 1:
            raise DomainError("--tol must be positive and --max-iter at least 1")
        if self.user_o is not None and not 0 <= self.user_o <= self.M:
            raise DomainError(f"--user-o must lie in 0..M = 0..{self.M}")
        InitScheme.parse(self.scheme)
        Rule(self.rule)
        if self.rule == "user" and self.user_o is None:
            raise DomainError("--rule user requires --user-o")


def _solution_summary(sol, kept, gross_idx, n):
    seq_out = [int(kept[i]) for i in sol.outlier_original_indices]
    full = np.zeros(n, dtype=np.intp)
    full[kept] = sol.assignments
    return {
        "chosen_o": sol.chosen_o,
        "n_outliers": len(seq_out) + len(gross_idx),
        "sequential_outlier_indices": seq_out,
        "outlier_indices": sorted(seq_out + list(gross_idx)),
        "cluster_sizes": sol.cluster_sizes(),
        "params": sol.final_params.to_dict(),
    }, full


def _metrics(assign, labels):
    pred = np.flatnonzero(assign == 0)
    truth = np.flatnonzero(labels == 0)
    f1, counts = outlier_f1(pred, truth, labels.shape[0])
    return {
        "ari": adjusted_rand_index(labels, assign),
        "outlier_f1": f1,
        "fp": counts.fp,
        "fn": counts.fn,
        "n_outliers": int(pred.size),
    }


def run_fit(data, labels, cfg, source=None):
    """Full pipeline on an in-memory dataset.

    Returns ``(report_dict, assignments_by_rule, trace, timings)``; assignments
    are indexed by original row with 0 marking outliers.
    """
    t0 = time.perf_counter()
    timings = {}
    data = np.asarray(data, dtype=np.float64)
    n, p = data.shape
    gross_report, gross_idx = None, ()
    if cfg.gross_enabled:
        if cfg.M > n - 2:
            raise InfeasibleBudget(f"gross detection needs M <= n - 2 = {n - 2}")
        gross_report = detect_gross(data, cfg.M)
        gross_idx = tuple(int(i) for i in gross_report.gross_indices)
    timings["gross"] = time.perf_counter() - t0
    kept = np.setdiff1d(np.arange(n), np.asarray(gross_idx, dtype=np.intp))
    X = data[kept]

    t1 = time.perf_counter()
    trace = run_sequence(X, cfg.G, cfg.M, scheme=cfg.scheme, T=cfg.T, tol=cfg.tol, max_iter=cfg.max_iter)
    timings["sequence"] = time.perf_counter() - t1

    chosen = {
        "minimum": choose_minimum(trace),
        "backtrack": choose_backtrack(trace, BacktrackConfig(cfg.alpha, cfg.beta)),
    }
    if cfg.user_o is not None:
        chosen["user"] = cfg.user_o
    solutions, assignments = {}, {}
    for rule, o in chosen.items():
        sol = finalize(X, trace, o, Rule(rule))
        solutions[rule], assignments[rule] = _solution_summary(sol, kept, gross_idx, n)

    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "outliermbc", "version": __version__},
        "config": asdict(cfg),
        "input": {"source": source, "n": n, "p": p, "has_labels": labels is not None},
        "gross": None if gross_report is None else gross_report.to_dict(),
        "curve": curve_payload(trace),
        "solutions": solutions,
        "primary_rule": cfg.rule,
    }
    if labels is not None:
        report["metrics"] = {rule: _metrics(a, labels) for rule, a in assignments.items()}
    report["curve"]["removed_original_index"] = [
        None if r is None else int(kept[r]) for r in report["curve"]["removed_original_index"]
    ]
    timings["total"] = time.perf_counter() - t0
    return report, assignments, trace, timings


def cmd_fit(csv_path, cfg, out_dir):
    data, labels, _ = read_csv(csv_path)
    report, assignments, trace, timings = run_fit(data, labels, cfg, source=Path(csv_path).name)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "report.json", report)
    # wall-clock times vary run to run, so they live beside the report
    write_json(out / "timings.json", {"backend": _backend.NAME, "seconds": timings})
    write_assignments(out / "assignments.csv", assignments[cfg.rule])
    emit_curve(trace, out, report["solutions"]["minimum"]["chosen_o"], report["solutions"]["backtrack"]["chosen_o"])
    return report


# --------------------------------------------------------------------- bench

PRESETS = {
    "desk": {"datasets": [{"tclust": {"p": [2], "proportions": ["equal", "unequal"], "model": [1, 2, 3, 4, 5]}, "seeds": [1, 2]}]},
    "full": {"datasets": [{"tclust": {"p": [2, 6], "proportions": ["equal", "unequal"], "model": [1, 2, 3, 4, 5]}, "seeds": list(range(1, 11))}]},
}


def expand_corpus(corpus, base_dir="."):
    """List of (dataset_id, kind, payload) entries from a corpus mapping.

    Entries are ``{"tclust": {"p": .., "proportions": .., "model": ..}, "seeds": [..]}``,
    ``{"illustrative": "small", "seeds": [..]}`` or ``{"csv": "path"}``; every
    tclust field may be a scalar or a list.
    """
    items = []
    for entry in corpus.get("datasets", []):
        if "tclust" in entry:
            spec = entry["tclust"]

            def as_list(v):
                return v if isinstance(v, list) else [v]

            for p in as_list(spec.get("p", 2)):
                for prop in as_list(spec.get("proportions", "equal")):
                    for model in as_list(spec.get("model", 1)):
                        for seed in entry.get("seeds", [1]):
                            items.append((f"tclust-p{p}-{prop}-m{model}-s{seed}", "tclust", (p, prop, model, seed)))
        elif "illustrative" in entry:
            for seed in entry.get("seeds", [1]):
                items.append((f"illustrative-{entry['illustrative']}-s{seed}", "illustrative", (entry["illustrative"], seed)))
        elif "csv" in entry:
            path = Path(base_dir) / entry["csv"]
            items.append((str(entry["csv"]), "csv", str(path)))
        else:
            raise DomainError(f"unrecognized corpus entry: {entry!r}")
    return items


def _bench_one(item, cfg):
    name, kind, payload = item
    try:
        if kind == "tclust":
            ld = simgen.generate(simgen.tclust_scenario(*payload))
            data, labels = ld.data, ld.labels
        elif kind == "illustrative":
            ld = simgen.illustrative_dataset(*payload)
            data, labels = ld.data, ld.labels
        else:
            data, labels, _ = read_csv(payload)
            if labels is None:
                raise ParseError(f"{payload}: bench datasets need a 'label' column")
        report, _, _, _ = run_fit(data, labels, cfg, source=name)
        return {"dataset": name, "status": "ok", "metrics": report["metrics"],
                "chosen_o": {r: s["chosen_o"] for r, s in report["solutions"].items()}}
    except (OutlierMBCError, OSError, ValueError) as exc:
        return {"dataset": name, "status": "failed", "error": f"{type(exc).__name__}: {exc}"}


SUMMARY_FIELDS = ["rule", "datasets", "failed", "ARI", "outlier_F1", "FP", "FN", "outliers"]


def summarize(results):
    ok = [r for r in results if r["status"] == "ok"]
    n_failed = len(results) - len(ok)
    rows = []
    rules = sorted({rule for r in ok for rule in r["metrics"]}, key=lambda s: ("minimum", "backtrack", "user").index(s))
    for rule in rules:
        ms = [r["metrics"][rule] for r in ok if rule in r["metrics"]]
        rows.append({
            "rule": rule,
            "datasets": len(ms),
            "failed": n_failed,
            "ARI": float(np.mean([m["ari"] for m in ms])),
            "outlier_F1": float(np.mean([m["outlier_f1"] for m in ms])),
            "FP": float(np.mean([m["fp"] for m in ms])),
            "FN": float(np.mean([m["fn"] for m in ms])),
            "outliers": float(np.mean([m["n_outliers"] for m in ms])),
        })
    return rows


def cmd_bench(corpus, cfg, out_dir, jobs=1, base_dir="."):
    """Run every corpus dataset; return ``(summary_rows, results, exit_code)``."""
    items = expand_corpus(corpus, base_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_bench_one, items, [cfg] * len(items)))
    else:
        results = [_bench_one(it, cfg) for it in items]
    rows = summarize(results)
    with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in row.items()})
    with open(out / "results.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "status", "rule", "chosen_o", "ARI", "outlier_F1", "FP", "FN", "outliers", "error"])
        for r in results:
            if r["status"] != "ok":
                w.writerow([r["dataset"], r["status"], "", "", "", "", "", "", "", r["error"]])
                continue
            for rule, m in r["metrics"].items():
                w.writerow([r["dataset"], "ok", rule, r["chosen_o"][rule], f"{m['ari']:.6f}",
                            f"{m['outlier_f1']:.6f}", m["fp"], m["fn"], m["n_outliers"], ""])
    if not items:
        code = EXIT_NOOP
    elif any(r["status"] != "ok" for r in results):
        code = EXIT_PARTIAL
    else:
        code = EXIT_OK
    return rows, results, code


# ------------------------------------------------------------------ argparse

def _add_run_flags(sp, with_user=True):
    sp.add_argument("--components", "-G", type=int, required=True, help="number of mixture components")
    sp.add_argument("--max-outliers", "-M", type=int, required=True, help="maximum number of outliers to remove")
    sp.add_argument("--scheme", choices=[s.value for s in InitScheme], default="update")
    sp.add_argument("--grid-size", type=int, default=DEFAULT_GRID)
    sp.add_argument("--alpha", type=float, default=0.05)
    sp.add_argument("--beta", type=float, default=0.10)
    sp.add_argument("--no-gross", action="store_true", help="skip the gross-outlier pre-filter")
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=1000)
    if with_user:
        sp.add_argument("--user-o", type=int, default=None, help="also finalize at this outlier count")
        sp.add_argument("--rule", choices=[r.value for r in Rule], default="minimum",
                        help="rule written to assignments.csv")


def _config_from(args):
    return RunConfig(
        G=args.components,
        M=args.max_outliers,
        scheme=args.scheme,
        T=args.grid_size,
        alpha=args.alpha,
        beta=args.beta,
        gross_enabled=not args.no_gross,
        user_o=getattr(args, "user_o", None),
        seed=args.seed,
        tol=args.tol,
        max_iter=args.max_iter,
        rule=getattr(args, "rule", "minimum"),
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="outliermbc", description="Gaussian mixture fitting with sequential outlier removal.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a dataset and write report, assignments and curve files")
    fit.add_argument("csv", help="input CSV with a header row")
    _add_run_flags(fit)
    fit.add_argument("--out", default="outliermbc-out", help="output directory")

    sim = sub.add_parser("simulate", help="write a simulated labelled dataset")
    sim.add_argument("scenario", choices=["tclust", "illustrative", "box"])
    sim.add_argument("--p", type=int, default=2)
    sim.add_argument("--proportions", default="equal")
    sim.add_argument("--model", type=int, default=1)
    sim.add_argument("--size", default="small")
    sim.add_argument("--input", help="user CSV for box injection")
    sim.add_argument("--n-outliers", type=int, default=0)
    sim.add_argument("--expand-factor", type=float, default=2.0)
    sim.add_argument("--seed", type=int, default=1)
    sim.add_argument("--out", required=True, help="output CSV path")

    bench = sub.add_parser("bench", help="run a corpus and write a summary table")
    src = bench.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", help="corpus JSON file")
    src.add_argument("--preset", choices=sorted(PRESETS))
    _add_run_flags(bench, with_user=False)
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--out", default="outliermbc-bench")

    gross = sub.add_parser("gross", help="gross-outlier diagnostic only")
    gross.add_argument("csv")
    gross.add_argument("--max-outliers", "-M", type=int, required=True)
    gross.add_argument("--k", type=int, default=None)
    return parser


def _err(msg):
    if os.environ.get("NO_COLOR") or not sys.stderr.isatty():
        print(f"error: {msg}", file=sys.stderr)
    else:
        print(f"\x1b[31merror:\x1b[0m {msg}", file=sys.stderr)


def _dispatch(args):
    if args.command == "fit":
        cfg = _config_from(args)
        report = cmd_fit(args.csv, cfg, args.out)
        for rule, sol in report["solutions"].items():
            print(f"{rule}: o={sol['chosen_o']} outliers={sol['n_outliers']} sizes={sol['cluster_sizes']}")
        return EXIT_OK
    if args.command == "simulate":
        if args.scenario == "tclust":
            spec = simgen.tclust_scenario(args.p, args.proportions, args.model, args.seed)
            ld, meta = simgen.generate(spec), spec.to_dict()
        elif args.scenario == "illustrative":
            spec = simgen.illustrative_scenario(args.size, args.seed)
            ld, meta = simgen.generate(spec), spec.to_dict()
        else:
            if not args.input:
                raise DomainError("box injection needs --input")
            data, labels, _ = read_csv(args.input)
            ld = simgen.inject_box_outliers(data, labels, args.n_outliers, args.expand_factor, args.seed)
            meta = {"name": "box", "input": Path(args.input).name, "n_input": int(data.shape[0]),
                    "n_outliers": args.n_outliers, "outlier_mode": simgen.PlainBox(args.expand_factor).to_dict(),
                    "seed": args.seed}
        write_labeled_csv(args.out, ld.data, ld.labels)
        sys.stdout.write(dumps(meta))
        return EXIT_OK
    if args.command == "bench":
        if args.corpus:
            with open(args.corpus, encoding="utf-8") as fh:
                try:
                    corpus = json.load(fh)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"{args.corpus}: {exc.msg}", row=exc.lineno, column=exc.colno) from None
            base = Path(args.corpus).parent
        else:
            corpus, base = PRESETS[args.preset], Path(".")
        rows, results, code = cmd_bench(corpus, _config_from(args), args.out, jobs=args.jobs, base_dir=base)
        for row in rows:
            print(f"{row['rule']}: ARI={row['ARI']:.4f} F1={row['outlier_F1']:.4f} FP={row['FP']:.2f} "
                  f"FN={row['FN']:.2f} outliers={row['outliers']:.2f} (n={row['datasets']})")
        for r in results:
            if r["status"] != "ok":
                _err(f"{r['dataset']}: {r['error']}")
        return code
    if args.command == "gross":
        data, _, _ = read_csv(args.csv)
        rep = detect_gross(data, args.max_outliers, args.k)
        sys.stdout.write(dumps(rep.to_dict()))
        return EXIT_OK
    return EXIT_USAGE


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return _dispatch(args)
    except ParseError as exc:
        _err(str(exc))
        return EXIT_PARSE
    except _CONFIG_ERRORS as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_CONFIG
    except _NUMERIC_ERRORS as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_NUMERIC
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
