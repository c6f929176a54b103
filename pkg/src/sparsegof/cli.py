"""Command-line interface.

Exit codes: 0 when the null is accepted (or the command succeeded), 3 when the
combined decision rejects, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import datasets
from .correction import DEFAULT_H, CorrectionError
from .distributions import check_probability_vector
from .formats import ParseError, read_table_csv, read_vector, report_to_csv, report_to_json
from .simulation import DEFAULT_ALPHAS, DEFAULT_SEED, SimConfig, named_distribution, run_simulation
from .tables import DegenerateTable, run_gof_test, run_independence_test

SEED_ENV = "SPARSEGOF_SEED"
EXIT_ACCEPT, EXIT_ERROR, EXIT_REJECT = 0, 1, 3


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(f"{self.prog}: {message}")


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {text}")
    return v


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _add_correction_args(p):
    p.add_argument("--alpha", type=_probability, default=0.05, help="significance level (default 0.05)")
    p.add_argument("--h", type=_probability, default=DEFAULT_H, help="weight of b_max in b (default 0.1)")
    p.add_argument("--epsilon", type=_positive, default=None, help="absolute epsilon for a = a_max - epsilon")
    p.add_argument("--lambda", dest="lam", type=float, default=2 / 3, help="power-divergence index (default 2/3)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", "-o", type=Path, help="write here instead of stdout")


def _add_sim_args(p):
    p.add_argument("--sampling", required=True, help="f1..f4, fp1..fp4 or a probability-vector file")
    p.add_argument("--null", required=True, help="f1..f4, fp1..fp4 or a probability-vector file")
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or {DEFAULT_SEED}")
    p.add_argument("--h", type=_probability, default=DEFAULT_H)
    p.add_argument("--epsilon", type=_positive, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", "-o", type=Path)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sparsegof", description="Goodness-of-fit tests for sparse tables.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="independence test on a two-way table")
    src = t.add_mutually_exclusive_group(required=True)
    src.add_argument("--dataset", choices=datasets.dataset_names())
    src.add_argument("--input", type=Path, help="CSV table: header of column labels, then label,count,... rows")
    _add_correction_args(t)

    g = sub.add_parser("gof", help="test a count vector against a fully specified null")
    g.add_argument("--counts", type=Path, required=True)
    g.add_argument("--null", required=True, help="probability-vector file or f1..f4 / fp1..fp4")
    g.add_argument("--s", type=int, default=0, help="number of estimated parameters behind the null")
    _add_correction_args(g)

    s = sub.add_parser("simulate", help="Monte Carlo type I risk / power")
    _add_sim_args(s)
    s.add_argument("--alphas", type=_probability, nargs="+", default=list(DEFAULT_ALPHAS))
    s.add_argument("--records", type=Path, help="also write per-replicate CSV here")
    s.add_argument("--format", choices=("json", "csv"), default="json")

    q = sub.add_parser("quantiles", help="0.95 quantiles of each statistic by number of zeros (CSV)")
    _add_sim_args(q)

    d = sub.add_parser("datasets", help="list embedded datasets")
    d.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        path.write_text(text, encoding="utf-8")


def _load_probs(spec: str) -> np.ndarray:
    path = Path(spec)
    if path.exists():
        p = read_vector(path)
        try:
            return check_probability_vector(p, tol=1e-9)
        except ValueError as exc:
            raise CliError(f"{spec}: {exc}") from None
    try:
        return named_distribution(spec)
    except ValueError:
        raise CliError(f"{spec!r} is neither a file nor one of f1..f4, fp1..fp4") from None


def _decision_exit(report) -> int:
    if report.combined_decision is None:
        print(f"warning: {report.correction_note}; combined decision undetermined", file=sys.stderr)
        return EXIT_ACCEPT
    return EXIT_REJECT if report.combined_decision else EXIT_ACCEPT


def _write_report(report, args) -> int:
    text = report_to_json(report) if args.format == "json" else report_to_csv(report)
    _emit(text, args.output)
    return _decision_exit(report)


def cmd_test(args) -> int:
    table = datasets.load(args.dataset) if args.dataset else read_table_csv(args.input)
    report = run_independence_test(table, alpha=args.alpha, h=args.h, epsilon=args.epsilon, lam=args.lam)
    return _write_report(report, args)


def cmd_gof(args) -> int:
    counts = read_vector(args.counts, dtype=int)
    null = _load_probs(args.null)
    report = run_gof_test(counts, null, alpha=args.alpha, h=args.h, epsilon=args.epsilon, lam=args.lam, s=args.s)
    return _write_report(report, args)


def _sim_config(args, alphas=DEFAULT_ALPHAS) -> SimConfig:
    seed = args.seed if args.seed is not None else default_seed()
    return SimConfig(
        sampling_probs=_load_probs(args.sampling),
        null_probs=_load_probs(args.null),
        n=args.n,
        reps=args.reps,
        alphas=tuple(alphas),
        seed=seed,
        h=args.h,
        epsilon=args.epsilon,
    )


def _rates_csv(report) -> str:
    lines = ["alpha,mode_c,excluded," + ",".join(report.rejection_rates)]
    for a in report.config.alphas:
        vals = ["" if r[a] is None else repr(float(r[a])) for r in report.rejection_rates.values()]
        lines.append(",".join([repr(float(a)), str(report.mode_c), str(report.excluded), *vals]))
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    report = run_simulation(_sim_config(args, args.alphas), workers=args.workers)
    if args.records is not None:
        args.records.write_text(report.records_csv(), encoding="utf-8")
    text = json.dumps(report.to_dict(), indent=2) if args.format == "json" else _rates_csv(report)
    _emit(text, args.output)
    return EXIT_ACCEPT


def cmd_quantiles(args) -> int:
    report = run_simulation(_sim_config(args), workers=args.workers)
    _emit(report.quantiles_csv(), args.output)
    return EXIT_ACCEPT


def cmd_datasets(args) -> int:
    entries = []
    for name in datasets.dataset_names():
        table = datasets.load(name)
        entries.append(
            {
                "name": name,
                "description": datasets.DATASETS[name]["description"],
                "shape": list(table.shape),
                "n": table.n,
                "row_sums": table.counts.sum(axis=1).tolist(),
                "col_sums": table.counts.sum(axis=0).tolist(),
            }
        )
    if args.format == "json":
        _emit(json.dumps({"schema_version": 1, "datasets": entries}, indent=2), None)
    else:
        lines = ["name,rows,cols,n,description"]
        lines += [f"{e['name']},{e['shape'][0]},{e['shape'][1]},{e['n']},\"{e['description']}\"" for e in entries]
        _emit("\n".join(lines), None)
    return EXIT_ACCEPT


COMMANDS = {
    "test": cmd_test,
    "gof": cmd_gof,
    "simulate": cmd_simulate,
    "quantiles": cmd_quantiles,
    "datasets": cmd_datasets,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (CliError, ParseError, DegenerateTable, CorrectionError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
