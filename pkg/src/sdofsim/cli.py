"""Command-line interface: ``sdofsim {sdof,tables,simulate,converse,ais}``.

Exit codes: 0 all checks pass, 1 a check failed, 2 invalid input.
"""

import argparse
import csv
import io
import itertools
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import (InvalidParameterError, NotApplicableError, SdofError,
                     TooLargeError)
from .experiments import (LEMMAS, STRATEGIES, ExperimentConfig, dumps_report,
                          run_ais, run_converse, run_simulate)
from .model import AntennaConfig
from .sdof import (comparison_table, compute_sdof, table1, table2,
                   table2_regime_index)

OUTPUT_DIR_ENV = "SDOFSIM_OUTPUT_DIR"
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class _InputError(Exception):
    pass


def _int_list(text):
    try:
        vals = [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _fmt(x):
    return None if x is None else str(x)


def _sweep_configs(spec):
    """``"4,2,3;3,1,2"`` -> triples; an empty string gives no rows."""
    out = []
    for part in spec.replace(" ", ";").split(";"):
        if not part:
            continue
        vals = _int_list(part)
        if len(vals) != 3:
            raise _InputError(f"sweep entry {part!r} is not m,n1,n_max")
        out.append(tuple(vals))
    return out


# --- table rendering -------------------------------------------------------

TABLE_COLUMNS = ["table", "row", "column", "formula", "example", "value"]
SWEEP_COLUMNS = ["m", "n1", "n_max", "regime", "blind_sdof",
                 "prior_achievable", "delayed_eve_sdof", "blind_cell",
                 "consistent"]


def table_rows():
    rows = []
    for r in table1():
        ex = r["example"]
        for col in ("prior", "sdof"):
            cell = r[col]
            rows.append({"table": "achievability",
                         "row": r["configuration"], "column": col,
                         "formula": cell.text,
                         "example": ",".join(map(str, ex)),
                         "value": str(cell(*ex))})
    regimes = ("m <= max(n1,n_max)", "max(n1,n_max) < m <= n1+n_max",
               "m > n1+n_max")
    for r in table2():
        for regime, cell in zip(regimes, r["cells"]):
            rows.append({"table": "network-comparison", "row": r["network"],
                         "column": regime, "formula": cell.text,
                         "example": "", "value": ""})
    return rows


def sweep_rows(configs):
    rows = []
    blind_cells = table2()[1]["cells"]
    for row in comparison_table(configs):
        m, n1, e = row["m"], row["n1"], row["n_max"]
        cell = blind_cells[table2_regime_index((m, n1, e))](m, n1, e)
        rows.append({
            "m": m, "n1": n1, "n_max": e, "regime": row["regime"],
            "blind_sdof": str(row["blind_sdof"]),
            "prior_achievable": _fmt(row["prior_achievable"]),
            "delayed_eve_sdof": str(row["delayed_eve_sdof"]),
            "blind_cell": str(cell),
            "consistent": cell == row["blind_sdof"],
        })
    return rows


def _csv(rows, columns):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore",
                       lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in columns})
    return buf.getvalue()


def _checks_csv(report):
    rows = report.get("checks", [])
    cols = []
    for r in rows:
        for k, v in r.items():
            if k not in cols and not isinstance(v, (list, dict)):
                cols.append(k)
    return _csv(rows, cols or ["check", "passed"])


# --- output ----------------------------------------------------------------

def _output_path(out):
    path = Path(out)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def _emit(text, out):
    if not text.endswith("\n"):
        text += "\n"
    if out:
        path = _output_path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        print(f"wrote {path}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _emit_report(report, args):
    if args.format == "csv":
        _emit(_checks_csv(report), args.out)
    else:
        _emit(dumps_report(report), args.out)
    return EXIT_OK if report.get("passed", True) else EXIT_FAIL


# --- subcommands -----------------------------------------------------------

def cmd_sdof(args):
    if args.m is None or args.n1 is None or args.neve is None:
        raise _InputError("sdof needs --m, --n1 and --neve")
    config = AntennaConfig(args.m, (args.n1, *args.neve))
    res = compute_sdof(config)
    if args.format == "json":
        _emit(json.dumps({"m": config.m, "n": list(config.n),
                          "n_max": config.n_max, "sdof": str(res.value),
                          "decimal": float(res.value), "regime": res.regime,
                          "m_bar": res.m_bar, "n_bar": res.n_bar},
                         sort_keys=True, indent=2), args.out)
    elif args.format == "csv":
        _emit(_csv([{"m": config.m, "n1": config.n1, "n_max": config.n_max,
                     "sdof": str(res.value), "regime": res.regime}],
                   ["m", "n1", "n_max", "sdof", "regime"]), args.out)
    else:
        _emit(f"{res.value} ({float(res.value):.6f})", args.out)
    return EXIT_OK


def cmd_tables(args):
    configs = None
    if args.sweep is not None:
        configs = _sweep_configs(args.sweep)
    elif args.sweep_max is not None:
        if args.sweep_max < 1:
            raise _InputError("--sweep-max must be positive")
        r = range(1, args.sweep_max + 1)
        configs = list(itertools.product(r, r, r))
    fmt = args.format or "csv"
    if configs is None:
        rows, cols, key = table_rows(), TABLE_COLUMNS, "tables"
        ok = True
    else:
        rows, cols, key = sweep_rows(configs), SWEEP_COLUMNS, "sweep"
        ok = all(r["consistent"] for r in rows)
    if fmt == "json":
        _emit(json.dumps({key: rows}, sort_keys=True, indent=2), args.out)
    else:
        _emit(_csv(rows, cols), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_simulate(args):
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise _InputError(f"cannot read config: {exc}")
    cfg = ExperimentConfig.from_json(text)
    overrides = {k: getattr(args, k) for k in ("trials", "seed", "workers")
                 if getattr(args, k) is not None}
    if args.mode:
        overrides["mode"] = args.mode
    if overrides:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), **overrides})
    report = run_simulate(cfg)
    args.format = args.format or cfg.format
    args.out = args.out or cfg.out
    return _emit_report(report, args)


def cmd_converse(args):
    report = run_converse(
        lemmas=args.lemma, strategies=args.strategy, m=args.m, n=args.n,
        trials=1000 if args.trials is None else args.trials,
        seed=args.seed or 0,
        workers=1 if args.workers is None else args.workers)
    return _emit_report(report, args)


def cmd_ais(args):
    report = run_ais(args.p, m=args.m, grid_size=args.grid,
                     samples=args.samples, d_max=args.dmax, n=args.slots,
                     n0=args.n0, seed=args.seed or 0)
    print(f"alphabet size: {report['alphabet_size']}", file=sys.stderr)
    return _emit_report(report, args)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="master seed (default 0)")
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--format", choices=("json", "csv", "text"),
                        default=None)
    common.add_argument("--out", default=None,
                        help=f"output file; relative paths resolve against "
                             f"${OUTPUT_DIR_ENV} when set")
    common.add_argument("--workers", type=int, default=None,
                        help="worker processes (0 = all available cores)")

    parser = argparse.ArgumentParser(
        prog="sdofsim",
        description="Secure-DoF simulator for the blind MIMO wiretap "
                    "channel with delayed CSIT.")
    parser.add_argument("--version", action="version",
                        version=f"sdofsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sdof", parents=[common], help="closed-form secure DoF")
    p.add_argument("--m", type=int)
    p.add_argument("--n1", type=int)
    p.add_argument("--neve", type=_int_list,
                   help="eavesdropper antenna counts, comma separated")
    p.set_defaults(func=cmd_sdof)

    p = sub.add_parser("tables", parents=[common],
                       help="comparison tables or a configuration sweep")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--sweep", help='triples "m,n1,n_max;..." (may be empty)')
    g.add_argument("--sweep-max", type=int,
                   help="all triples with entries in 1..N")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("simulate", parents=[common],
                       help="run a scheme end to end from a JSON config")
    p.add_argument("config", help="path to an experiment config (JSON)")
    p.add_argument("--mode", choices=("noiseless", "noisy"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("converse", parents=[common],
                       help="rank-analogue converse checks")
    p.add_argument("--lemma", nargs="+", default=["all"],
                   choices=LEMMAS + ("all",))
    p.add_argument("--strategy", nargs="+", default=["all"],
                   choices=STRATEGIES + ("all",))
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=_int_list,
                   help="receiver antenna counts, comma separated")
    p.set_defaults(func=cmd_converse)

    p = sub.add_parser("ais", parents=[common],
                       help="aligned-image-set bound enumeration")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--grid", type=int, default=8)
    p.add_argument("--samples", type=int, default=None,
                   help="sample this many legitimate channels instead of "
                        "enumerating all")
    p.add_argument("--dmax", type=_fraction, default=Fraction(2))
    p.add_argument("--slots", type=int, default=1)
    p.add_argument("--n0", type=int, default=1)
    p.set_defaults(func=cmd_ais)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers is not None and args.workers < 0:
        parser.error("--workers must be non-negative")
    if args.trials is not None and args.trials < 0:
        parser.error("--trials must be non-negative")
    try:
        return args.func(args)
    except (_InputError, InvalidParameterError, NotApplicableError,
            TooLargeError) as exc:
        print(f"sdofsim: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SdofError as exc:
        print(f"sdofsim: check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
