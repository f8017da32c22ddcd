"""Command-line interface: ``eg test | simulate | mc | fit``.

Exit codes: 0 success, 2 input/domain error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bicop import DEFAULT_CATALOG
from .dgp import DGP_TABLE, DgpSpec, simulate_dgp
from .errors import DomainError, EGError
from .gctest import RESULT_SCHEMA, TestConfig, run_joint_test, run_pairwise_test
from .marginals import log_returns
from .mc import TESTS, mc_study
from .mvine import MVineModel, SeriesPanel, fit, simulate_path
from .rng import RandomStream

DEFAULT_TAUS = (0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95)


def stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.10:
        return "*"
    return ""


# -- input -------------------------------------------------------------------

def read_csv(path, date_column: str | None = None) -> tuple[list[str], np.ndarray]:
    """Numeric columns of a headered CSV; lines starting with '#' are skipped."""
    p = Path(path)
    if not p.exists():
        raise DomainError(f"input file not found: {path}")
    with p.open(newline="") as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#")) if r]
    if not rows:
        raise DomainError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if date_column is not None and date_column not in header:
        raise DomainError(f"{path}: date column {date_column!r} not in header {header}")
    keep = [i for i, h in enumerate(header) if h != date_column]
    data = np.empty((len(rows) - 1, len(keep)))
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DomainError(f"{path}: row {r} has {len(row)} fields, expected {len(header)}")
        for j, i in enumerate(keep):
            try:
                data[r - 2, j] = float(row[i])
            except ValueError:
                raise DomainError(f"{path}: non-numeric value {row[i]!r} at row {r}, column {header[i]!r}") from None
    return [header[i] for i in keep], data


def load_panel(path, effect=None, causes=None, date_column=None, use_log_returns=False) -> SeriesPanel:
    names, data = read_csv(path, date_column)
    if not names:
        raise DomainError(f"{path}: no data columns")
    effect = effect or names[0]
    if causes is None:
        causes = [n for n in names if n != effect]
    cols = [effect, *causes]
    for c in cols:
        if c not in names:
            raise DomainError(f"{path}: missing column {c!r}; have {names}")
    if effect in causes:
        raise DomainError("the effect column cannot also be a cause")
    values = data[:, [names.index(c) for c in cols]]
    if use_log_returns:
        values = np.column_stack([log_returns(values[:, j]) for j in range(values.shape[1])])
        for j, c in enumerate(cols):
            if np.ptp(values[:, j]) == 0:
                raise DomainError(f"degenerate column after transform: {c!r}")
    return SeriesPanel(tuple(cols), values)


def _split(text):
    return [s.strip() for s in text.split(",") if s.strip()] if text else []


def _floats(text):
    try:
        return [float(s) for s in _split(text)]
    except ValueError:
        raise DomainError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(s) for s in _split(text)]
    except ValueError:
        raise DomainError(f"expected a comma-separated list of integers, got {text!r}") from None


def resolve_seed(flag) -> int:
    if flag is not None:
        return int(flag)
    env = os.environ.get("EG_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise DomainError(f"EG_SEED must be an integer, got {env!r}") from None
    return 0


# -- output ------------------------------------------------------------------

def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def manifest(command: str, args, seed: int, inputs=(), extra=None) -> dict:
    doc = {
        "tool": "expectile-gc",
        "version": __version__,
        "command": command,
        "inputs": [str(i) for i in inputs],
        "output": getattr(args, "output", None),
        "seed": seed,
    }
    doc.update(extra or {})
    return doc


def _write(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# -- commands ----------------------------------------------------------------

def _config(args, seed, tau=0.5) -> TestConfig:
    return TestConfig(
        tau=tau,
        n_predictions=args.N,
        eval_start=args.T0,
        n_bootstrap=args.B,
        seed=seed,
        catalog=tuple(_split(args.catalog)),
        criterion=args.criterion,
        refit_marginals=not args.reuse_marginals,
        plus_one=args.plus_one,
        common_draws=args.common_draws,
    )


def cmd_test(args) -> int:
    seed = resolve_seed(args.seed)
    panel = load_panel(args.input, args.effect, _split(args.causes) or None, args.date_column, args.log_returns)
    taus = _floats(args.taus) if args.taus else list(DEFAULT_TAUS)
    results = []
    for tau in taus:
        config = _config(args, seed, tau)
        entry = {"tau": tau, "joint": run_joint_test(panel, config, args.threads).to_dict(args.keep_null)}
        if args.pairwise:
            entry["pairwise"] = {
                c: run_pairwise_test(panel, c, config, args.threads).to_dict(args.keep_null)
                for c in panel.columns[1:]
            }
        results.append(entry)
    base = _config(args, seed)
    doc = {
        "schema": RESULT_SCHEMA,
        "manifest": manifest("test", args, seed, [args.input], {
            "config": base.to_dict(), "taus": taus, "effect": panel.effect,
            "causes": list(panel.columns[1:]), "log_returns": args.log_returns,
            "date_column": args.date_column, "T": panel.T,
        }),
        "results": results,
    }
    if args.output:
        Path(args.output).write_text(dumps(doc))
    sys.stdout.write(test_table(panel, results))
    return 0


def test_table(panel: SeriesPanel, results) -> str:
    x = panel.effect
    heads = [f"({','.join(panel.columns[1:])})->{x}"]
    if results and "pairwise" in results[0]:
        heads += [f"{c}->{x}" for c in panel.columns[1:]]
    width = max(14, *(len(h) + 2 for h in heads))
    lines = [f"{'tau':<8}" + "".join(f"{h:>{width}}" for h in heads)]
    for r in results:
        ps = [r["joint"]["p_value"]]
        if "pairwise" in r:
            ps += [r["pairwise"][c]["p_value"] for c in panel.columns[1:]]
        lines.append(f"{r['tau']:<8g}" + "".join(f"{f'{p:.3f}{stars(p):<3}':>{width}}" for p in ps))
    lines.append("p-values; * p<0.10, ** p<0.05, *** p<0.01")
    return "\n".join(lines) + "\n"


def _panel_csv(panel: SeriesPanel, header_lines) -> str:
    out = [f"# {line}" for line in header_lines]
    out.append(",".join(panel.columns))
    out.extend(",".join(repr(float(v)) for v in row) for row in panel.values)
    return "\n".join(out) + "\n"


def cmd_simulate(args) -> int:
    seed = resolve_seed(args.seed)
    stream = RandomStream(seed).child("simulate")
    if args.model:
        model = _load_model(args.model)
        panel = simulate_path(model, args.T, stream)
        source = {"model": str(args.model)}
    else:
        if not args.dgp:
            raise DomainError("simulate needs --dgp or --model")
        spec = DgpSpec.named(args.dgp, burn_in=args.burn_in)
        panel = simulate_dgp(spec, args.T, stream)
        source = {"dgp": spec.to_dict()}
    man = manifest("simulate", args, seed, [args.model] if args.model else [], {"T": args.T, **source})
    _write(args.output, _panel_csv(panel, [json.dumps(man, sort_keys=True)]))
    return 0


def cmd_mc(args) -> int:
    seed = resolve_seed(args.seed)
    tests = _split(args.tests)
    for t in tests:
        if t not in TESTS:
            raise DomainError(f"unknown test {t!r}; choose from {TESTS}")
    config = _config(args, seed)
    report = mc_study(
        _split(args.dgps), _floats(args.taus), _ints(args.Ts), args.S, config,
        alpha=args.alpha, tests=tests, seed=seed, threads=args.threads,
        cache_dir=args.cache_dir, decision_only=args.decision_only,
    )
    man = manifest("mc", args, seed, [], {
        "dgps": _split(args.dgps), "taus": _floats(args.taus), "Ts": _ints(args.Ts), "S": args.S,
        "alpha": args.alpha, "tests": tests, "config": config.to_dict(),
        "decision_only": args.decision_only,
    })
    text = "# manifest " + json.dumps(man, sort_keys=True) + "\n" + report.to_csv()
    _write(args.output, text)
    table = report.text_table()
    if args.table:
        Path(args.table).write_text(table)
    if args.output not in (None, "-"):
        sys.stdout.write(table)
    return 0


def _load_model(path) -> MVineModel:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise DomainError(f"model file not found: {path}") from None
    except json.JSONDecodeError as exc:
        from .errors import SchemaError
        raise SchemaError(f"invalid JSON ({exc.msg} at line {exc.lineno})", "$") from None
    return MVineModel.from_dict(doc.get("model", doc) if isinstance(doc, dict) else doc)


def cmd_fit(args) -> int:
    seed = resolve_seed(args.seed)
    panel = load_panel(args.input, args.effect, _split(args.causes) or None, args.date_column, args.log_returns)
    model = fit(panel, tuple(_split(args.catalog)), scope=args.scope, criterion=args.criterion)
    doc = {
        "schema": "eg-fit/1",
        "manifest": manifest("fit", args, seed, [args.input], {
            "scope": args.scope, "criterion": args.criterion, "catalog": _split(args.catalog), "T": panel.T,
        }),
        "model": model.to_dict(),
    }
    _write(args.output, dumps(doc))
    return 0


# -- parser ------------------------------------------------------------------

def _add_test_flags(p):
    p.add_argument("--N", type=int, default=200, help="predictions per time point")
    p.add_argument("--T0", type=int, default=None, help="first evaluation time (default ceil(T/2))")
    p.add_argument("--B", type=int, default=200, help="bootstrap replicates")
    p.add_argument("--catalog", default=",".join(f.tag for f in DEFAULT_CATALOG))
    p.add_argument("--criterion", choices=("aic", "bic"), default="aic")
    p.add_argument("--reuse-marginals", action="store_true",
                   help="bootstrap replicates keep the observed marginals instead of refitting")
    p.add_argument("--plus-one", action="store_true", help="use (1 + #)/(1 + B) p-values")
    p.add_argument("--common-draws", action="store_true",
                   help="share one block of N uniforms across models and evaluation times")


def _add_common(p):
    p.add_argument("--seed", type=int, default=None, help="RNG seed (falls back to $EG_SEED, then 0)")
    p.add_argument("--threads", type=int, default=0, help="worker processes (0 = all cores)")


def _add_input(p):
    p.add_argument("input", help="CSV with a header row")
    p.add_argument("--effect", help="effect column (default: first data column)")
    p.add_argument("--causes", help="comma-separated cause columns (default: all others)")
    p.add_argument("--date-column", help="column to ignore")
    p.add_argument("--log-returns", action="store_true", help="transform prices to 100 * log-returns")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eg", description="Granger causality tests in expectiles.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="joint (and pairwise) tests over a tau grid")
    _add_input(p)
    _add_test_flags(p)
    _add_common(p)
    p.add_argument("--taus", help="comma-separated expectile levels (default: seven-point grid)")
    p.add_argument("--pairwise", action="store_true", help="also test every cause on its own")
    p.add_argument("--keep-null", action="store_true", help="store the null statistics in the JSON")
    p.add_argument("--output", "-o", help="JSON result path")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", help="simulate a DGP or a fitted model to CSV")
    p.add_argument("--dgp", choices=sorted(DGP_TABLE), type=str.upper)
    p.add_argument("--model", help="fitted model JSON (from `eg fit`)")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--burn-in", type=int, default=500)
    p.add_argument("--output", "-o", default="-")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mc", help="Monte-Carlo size/power study")
    p.add_argument("--dgps", default="S1,S2,P1,P2,P3,P4")
    p.add_argument("--taus", default="0.1,0.5,0.9")
    p.add_argument("--Ts", default="100,200,500")
    p.add_argument("--S", type=int, default=100, help="replications per cell")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--tests", default="joint", help="comma-separated subset of joint,pairwise,ftest")
    p.add_argument("--cache-dir", help="per-replication result cache (resumable runs)")
    p.add_argument("--decision-only", action="store_true",
                   help="stop each bootstrap once the decision is fixed (same rates, faster)")
    p.add_argument("--output", "-o", default="-", help="CSV report path")
    p.add_argument("--table", help="aligned text table path")
    _add_test_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_mc, N=100, B=100)

    p = sub.add_parser("fit", help="fit an M-vine model and write it as JSON")
    _add_input(p)
    p.add_argument("--catalog", default=",".join(f.tag for f in DEFAULT_CATALOG))
    p.add_argument("--criterion", choices=("aic", "bic"), default="aic")
    p.add_argument("--scope", choices=("full", "effect"), default="full")
    p.add_argument("--output", "-o", default="-")
    _add_common(p)
    p.set_defaults(func=cmd_fit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EGError as exc:
        print(f"eg: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
