"""Monte-Carlo size/power harness over (DGP, tau, T) grids."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__
from .dgp import DgpSpec, simulate_dgp
from .errors import DomainError, EGError
from .gctest import TestConfig, bootstrap_decision, bootstrap_p_value, gc_statistic, linear_f_test
from .parallel import pmap
from .rng import RandomStream

TESTS = ("joint", "pairwise", "ftest")
CSV_FIELDS = ("dgp", "test", "tau", "T", "S", "B", "N", "alpha", "seed",
              "rejections", "valid", "failed", "rate", "invalid")


@dataclass(frozen=True)
class McCell:
    dgp: str
    test: str            # "joint", "pairwise:<col>" or "ftest"
    tau: float | None    # None for the F-test
    T: int
    S: int
    rejections: int
    valid: int
    failed: int
    invalid: bool

    @property
    def rate(self) -> float:
        return self.rejections / self.valid if self.valid else float("nan")


@dataclass(frozen=True)
class McReport:
    cells: tuple
    alpha: float
    seed: int
    config: TestConfig
    burn_in: int
    decision_only: bool = False

    def cell(self, dgp: str, test: str, tau=None, T=None) -> McCell:
        for c in self.cells:
            if c.dgp == dgp and c.test == test and (tau is None or c.tau == tau) and (T is None or c.T == T):
                return c
        raise KeyError((dgp, test, tau, T))

    def rows(self):
        for c in self.cells:
            yield {
                "dgp": c.dgp, "test": c.test, "tau": "" if c.tau is None else f"{c.tau:g}", "T": c.T,
                "S": c.S, "B": self.config.n_bootstrap, "N": self.config.n_predictions,
                "alpha": f"{self.alpha:g}", "seed": self.seed, "rejections": c.rejections,
                "valid": c.valid, "failed": c.failed, "rate": f"{c.rate:.4f}", "invalid": int(c.invalid),
            }

    def header_lines(self) -> list[str]:
        return [
            f"# expectile-gc {__version__} monte-carlo report",
            f"# seed={self.seed} alpha={self.alpha:g} B={self.config.n_bootstrap} N={self.config.n_predictions}"
            f" burn_in={self.burn_in} garch_init=unconditional sstd=fernandez-steel(xi<0 mirrored)",
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        for line in self.header_lines():
            buf.write(line + "\n")
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow(row)
        return buf.getvalue()

    def text_table(self) -> str:
        """One block per (test, tau) with DGPs as rows and T as columns."""
        Ts = sorted({c.T for c in self.cells})
        out = self.header_lines()
        blocks = []
        for c in self.cells:
            key = (c.test, c.tau)
            if key not in blocks:
                blocks.append(key)
        for test, tau in blocks:
            title = test if tau is None else f"{test}  tau = {tau:g}"
            out.append("")
            out.append(title)
            out.append(f"{'DGP':<6}" + "".join(f"{'T=' + str(t):>10}" for t in Ts))
            dgps = []
            for c in self.cells:
                if (c.test, c.tau) == (test, tau) and c.dgp not in dgps:
                    dgps.append(c.dgp)
            for d in dgps:
                cells = []
                for t in Ts:
                    try:
                        c = self.cell(d, test, tau, t)
                        cells.append(f"{c.rate:10.3f}" + ("!" if c.invalid else ""))
                    except KeyError:
                        cells.append(f"{'-':>10}")
                out.append(f"{d:<6}" + "".join(cells))
        return "\n".join(out) + "\n"

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha, "seed": self.seed, "burn_in": self.burn_in,
            "decision_only": self.decision_only, "config": self.config.to_dict(),
            "cells": [dict(r) for r in self.rows()],
        }


@dataclass(frozen=True)
class _Unit:
    spec: DgpSpec
    test: str
    tau: float | None
    T: int
    rep: int
    config: TestConfig
    alpha: float
    seed: int
    decision_only: bool

    def key(self) -> str:
        doc = {
            "spec": self.spec.to_dict(), "test": self.test, "tau": self.tau, "T": self.T,
            "rep": self.rep, "config": self.config.to_dict(), "alpha": self.alpha,
            "seed": self.seed, "decision_only": self.decision_only,
        }
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:32]


def replication_stream(seed: int, spec: DgpSpec, T: int, rep: int) -> RandomStream:
    """Stream of replication ``rep``; shared by every tau and test so cells are paired."""
    return RandomStream(seed).child("mc", spec.tag, T, rep)


def _run_unit(unit: _Unit) -> dict:
    stream = replication_stream(unit.seed, unit.spec, unit.T, unit.rep)
    panel = simulate_dgp(unit.spec, unit.T, stream.child("panel"))
    try:
        if unit.test == "ftest":
            res = linear_f_test(panel)
            return {"reject": res.p_value < unit.alpha, "p": res.p_value, "stat": res.statistic}
        if unit.test.startswith("pairwise:"):
            panel = panel.select([panel.effect, unit.test.split(":", 1)[1]])
        config = replace(unit.config, tau=unit.tau, seed=stream.child("test").derive_seed())
        observed = gc_statistic(panel, config)
        if unit.decision_only:
            dec = bootstrap_decision(panel, observed, config, unit.alpha)
            return {"reject": dec.reject, "p": dec.p_value, "stat": observed.statistic,
                    "used": dec.replicates_used}
        res = bootstrap_p_value(panel, observed, config)
        return {"reject": res.p_value < unit.alpha, "p": res.p_value, "stat": res.statistic}
    except EGError as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}


def _cached_run(args) -> dict:
    unit, cache_dir = args
    if cache_dir is None:
        return _run_unit(unit)
    path = Path(cache_dir) / unit.key()[:2] / f"{unit.key()}.json"
    if path.exists():
        return json.loads(path.read_text())
    rec = _run_unit(unit)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(rec))
    os.replace(tmp, path)
    return rec


def expand_tests(tests, columns=("y", "z")) -> list[str]:
    out = []
    for t in tests:
        if t == "pairwise":
            out.extend(f"pairwise:{c}" for c in columns)
        elif t in ("joint", "ftest") or t.startswith("pairwise:"):
            out.append(t)
        else:
            raise DomainError(f"unknown test {t!r}; choose from {TESTS}")
    return out


def mc_study(dgps, taus, Ts, S: int, config: TestConfig | None = None, alpha: float = 0.05,
             tests=("joint",), seed: int = 0, threads: int | None = 1, cache_dir=None,
             decision_only: bool = False) -> McReport:
    """Rejection rates of the selected tests on every (dgp, tau, T) cell.

    Every replication draws its panel from ``seed -> "mc" -> dgp -> T -> rep``
    and its bootstrap seed from the same path, so rates are deterministic
    and independent of ``threads``.  ``cache_dir`` stores one small JSON
    record per replication so interrupted studies resume where they stopped.
    """
    if S < 1:
        raise DomainError("S must be >= 1")
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    config = config or TestConfig(n_predictions=100, n_bootstrap=100)
    specs = [DgpSpec.named(d) if isinstance(d, str) else d for d in dgps]
    taus = [float(t) for t in taus]
    tests = expand_tests(tests)
    cells = []
    for spec in specs:
        for test in tests:
            for tau in ([None] if test == "ftest" else taus):
                for T in Ts:
                    cells.append((spec, test, tau, int(T)))
    units = [
        _Unit(spec, test, tau, T, r, config, alpha, int(seed), decision_only)
        for spec, test, tau, T in cells for r in range(S)
    ]
    records = pmap(_cached_run, [(u, cache_dir) for u in units], threads)
    out = []
    for i, (spec, test, tau, T) in enumerate(cells):
        recs = records[i * S:(i + 1) * S]
        failed = sum("error" in r for r in recs)
        valid = S - failed
        rejections = sum(bool(r.get("reject")) for r in recs)
        out.append(McCell(spec.tag, test, tau, T, S, rejections, valid, failed, failed > 0.05 * S))
    burn = specs[0].burn_in if specs else 0
    return McReport(tuple(out), alpha, int(seed), config, burn, decision_only)
