"""Stationary first-order Markov vine (M-vine) for a (d+1)-dimensional series.

Structure
---------
Columns are ordered (X, Z1, ..., Zd) in time.  The pair of consecutive
rows (V_{t-1}, V_t) is modelled by a D-vine on the 2p positions (p = d+1)

    Zd', ..., Z1', X',  X, Z1, ..., Zd
    0        p-2  p-1  p  p+1      2p-1

so the first tree holds the in-time chains X-Z1-...-Zd at both time points
and the lag edge X'-X.  Tree i then contains X-Zi | Z1..Z(i-1) (in time)
and Zi'-X | X', Z1'..Z(i-1)' (across time).  Edges lying inside one time
block are shared with the in-time D-vine on (X, Z1, ..., Zd), which is what
makes the model stationary.  Trees deeper than p are independence.

Edge (j, a) of a D-vine joins positions a and a+j given a+1..a+j-1; its
copula takes F(x_a | ...) as first argument.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .bicop import (
    DEFAULT_CATALOG,
    INDEPENDENCE_COPULA,
    BivariateCopula,
    parse_catalog,
    select_family,
)
from .errors import DomainError, ModelStateError, SchemaError
from .marginals import EmpiricalMarginal, fit_empirical
from .rng import as_stream

MIN_ROWS = 20
MODEL_SCHEMA = "eg-model/1"


@dataclass(frozen=True)
class SeriesPanel:
    """Aligned real-valued series; column 0 is the effect series X."""

    columns: tuple
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        cols = tuple(str(c) for c in self.columns)
        if vals.ndim != 2 or vals.shape[1] != len(cols) or not cols:
            raise DomainError("panel values must be a (T, len(columns)) array")
        if len(set(cols)) != len(cols):
            raise DomainError("panel column names must be unique")
        if vals.shape[0] < MIN_ROWS:
            raise DomainError(f"panel needs at least {MIN_ROWS} rows, got {vals.shape[0]}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("panel values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "values", vals)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1] - 1

    @property
    def effect(self) -> str:
        return self.columns[0]

    def column(self, name) -> np.ndarray:
        return self.values[:, self.index(name)]

    def index(self, name) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise DomainError(f"unknown column {name!r}; have {list(self.columns)}") from None

    def select(self, names) -> "SeriesPanel":
        idx = [self.index(n) for n in names]
        return SeriesPanel(tuple(self.columns[i] for i in idx), self.values[:, idx])

    def restricted(self) -> "SeriesPanel":
        return self.select([self.effect])


# ---------------------------------------------------------------------------
# D-vine machinery


class _DVine:
    def __init__(self, n: int, edges, truncation: int | None = None):
        self.n = n
        self.edges = edges  # callable (j, a) -> BivariateCopula
        self.truncation = n - 1 if truncation is None else truncation

    def edge(self, j, a) -> BivariateCopula:
        if j > self.truncation:
            return INDEPENDENCE_COPULA
        return self.edges(j, a)

    def transforms(self, u: np.ndarray, depth: int | None = None):
        """Conditional pseudo-observations for every edge among ``u``'s columns.

        Returns ``left, right`` with ``left[j][a] = F(x_a | x_{a+1..a+j})`` and
        ``right[j][a] = F(x_{a+j} | x_{a..a+j-1})``.
        """
        m = u.shape[-1]
        depth = m - 1 if depth is None else min(depth, m - 1)
        left = [[u[..., a] for a in range(m)]]
        right = [left[0]]
        for j in range(1, depth + 1):
            lj, rj = [], []
            for a in range(m - j):
                first, second = left[j - 1][a], right[j - 1][a + 1]
                c = self.edge(j, a)
                if c.is_independence:
                    lj.append(first)
                    rj.append(second)
                else:
                    lj.append(c.h(first, second))
                    rj.append(c.h_given_first(second, first))
            left.append(lj)
            right.append(rj)
        return left, right

    def sample_next(self, diag, w, update: bool = True):
        """Draw position m = len(diag) given earlier positions.

        ``diag[i] = F(x_{m-1-i} | x_{m-i..m-1})``.  Returns the new uniform and
        the updated diagonal for position m (None unless ``update``).
        """
        m = len(diag)
        u = w
        rights = [None] * m
        for j in range(m, 0, -1):
            c = self.edge(j, m - j)
            if not c.is_independence:
                u = c.h_inv_given_first(u, diag[j - 1])
            rights[j - 1] = u
        if not update:
            return u, None
        new = [u]
        for j in range(1, m + 1):
            c = self.edge(j, m - j)
            if c.is_independence:
                new.append(diag[j - 1])
            else:
                new.append(c.h(diag[j - 1], rights[j - 1]))
        return u, new


def _fit_dvine_tree(left, right, j, m, wanted, catalog, criterion):
    fitted = {}
    for a in range(m - j):
        if wanted(j, a):
            fit = select_family(left[j - 1][a], right[j - 1][a + 1], catalog, criterion)
            fitted[(j, a)] = fit.copula
    return fitted


# ---------------------------------------------------------------------------
# the model


@dataclass(frozen=True)
class MVineModel:
    columns: tuple
    marginals: tuple
    in_time: dict
    cross: dict
    markov_order: int = 1
    scope: str = "full"
    criterion: str = "aic"
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.markov_order != 1:
            raise DomainError("only Markov order 1 is supported")
        if len(self.marginals) != len(self.columns):
            raise DomainError("one marginal per column is required")

    @property
    def dimension(self) -> int:
        return len(self.columns)

    @property
    def truncation(self) -> int:
        return self.dimension

    def in_time_edge(self, j, k) -> BivariateCopula:
        return self.in_time.get((j, k), INDEPENDENCE_COPULA)

    def lag_edge(self, j, a) -> BivariateCopula:
        """Copula of edge (j, a) in the 2p-position lag D-vine."""
        p = self.dimension
        if a + j <= p - 1:
            # inside block t-1, whose positions run in reverse variable order
            return self.in_time_edge(j, p - 1 - (a + j)).swap()
        if a >= p:
            return self.in_time_edge(j, a - p)
        return self.cross.get((j, a), INDEPENDENCE_COPULA)

    @cached_property
    def _in_vine(self) -> _DVine:
        return _DVine(self.dimension, self.in_time_edge)

    @cached_property
    def _lag_vine(self) -> _DVine:
        return _DVine(2 * self.dimension, self.lag_edge, truncation=self.truncation)

    @property
    def temporal_copula(self) -> BivariateCopula:
        """c_{X_t, X_{t+1}}, the first-tree lag edge."""
        return self.lag_edge(1, self.dimension - 1)

    def edges(self):
        """(kind, tree, edge, variables, conditioning, copula) for every fitted edge."""
        names = self.columns
        p = self.dimension
        out = []
        for (j, k), c in sorted(self.in_time.items()):
            cond = [names[i] for i in range(k + 1, k + j)]
            out.append(("in_time", j, k, (names[k], names[k + j]), cond, c))
        pos_name = [f"{names[p - 1 - i]}[t-1]" for i in range(p)] + [f"{n}[t]" for n in names]
        for (j, a), c in sorted(self.cross.items()):
            cond = [pos_name[i] for i in range(a + 1, a + j)]
            out.append(("cross", j, a, (pos_name[a], pos_name[a + j]), cond, c))
        return out

    # -- transforms -------------------------------------------------------
    def to_uniform(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        return np.stack([m.cdf(values[..., i]) for i, m in enumerate(self.marginals)], axis=-1)

    def from_uniform(self, u) -> np.ndarray:
        return np.stack([m.quantile(u[..., i]) for i, m in enumerate(self.marginals)], axis=-1)

    def _block_diag(self, u_block):
        """F(var i | var i-1, ..., X) for i = 0..p-1 from in-time uniforms."""
        _, right = self._in_vine.transforms(u_block)
        return [right[i][0] for i in range(self.dimension)]

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        def edge_doc(kind, j, a, pair, cond, c):
            return {"kind": kind, "tree": j, "edge": a, "pair": list(pair), "given": list(cond), **c.to_dict()}

        return {
            "schema": MODEL_SCHEMA,
            "columns": list(self.columns),
            "markov_order": self.markov_order,
            "truncation": self.truncation,
            "scope": self.scope,
            "criterion": self.criterion,
            "marginals": [m.to_dict() for m in self.marginals],
            "edges": [edge_doc(*e) for e in self.edges()],
        }

    @classmethod
    def from_dict(cls, doc) -> "MVineModel":
        if not isinstance(doc, dict):
            raise SchemaError("model document must be a JSON object", "$")
        if doc.get("schema") != MODEL_SCHEMA:
            raise SchemaError(f"expected {MODEL_SCHEMA!r}, got {doc.get('schema')!r}", "$.schema")
        for key in ("columns", "marginals", "edges"):
            if not isinstance(doc.get(key), list):
                raise SchemaError("missing or not a list", f"$.{key}")
        marginals = []
        for i, m in enumerate(doc["marginals"]):
            try:
                marginals.append(EmpiricalMarginal.from_dict(m))
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(str(exc), f"$.marginals[{i}]") from None
        in_time, cross = {}, {}
        for i, e in enumerate(doc["edges"]):
            path = f"$.edges[{i}]"
            try:
                c = BivariateCopula.from_dict(e)
                key = (int(e["tree"]), int(e["edge"]))
                kind = e["kind"]
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(str(exc), path) from None
            if kind == "in_time":
                in_time[key] = c
            elif kind == "cross":
                cross[key] = c
            else:
                raise SchemaError(f"unknown edge kind {kind!r}", f"{path}.kind")
        try:
            return cls(
                tuple(doc["columns"]),
                tuple(marginals),
                in_time,
                cross,
                markov_order=int(doc.get("markov_order", 1)),
                scope=str(doc.get("scope", "full")),
                criterion=str(doc.get("criterion", "aic")),
            )
        except DomainError as exc:
            raise SchemaError(str(exc), "$") from None


def fit(panel: SeriesPanel, catalog=DEFAULT_CATALOG, scope: str = "full", criterion: str = "aic",
        markov_order: int = 1, marginals=None) -> MVineModel:
    """Sequential tree-by-tree fit of the stationary M-vine.

    ``scope="effect"`` fits only the cross-time edges that end at X_t (the
    ones the conditional law of X_t given the previous row depends on); the
    remaining cross edges are set to independence.  In-time edges are always
    fitted because conditioning and null simulation both need them.

    ``marginals`` replaces the empirical marginals fitted on ``panel``.
    """
    if markov_order != 1:
        raise DomainError("only Markov order 1 is supported")
    if scope not in ("full", "effect"):
        raise DomainError(f"unknown fit scope {scope!r}")
    if panel.T < MIN_ROWS:
        raise DomainError(f"need at least {MIN_ROWS} rows to fit")
    catalog = parse_catalog(catalog)
    p = panel.d + 1
    for i, name in enumerate(panel.columns):
        col = panel.values[:, i]
        if np.ptp(col) == 0:
            raise DomainError(f"column {name!r} is constant")
    if marginals is None:
        marginals = tuple(fit_empirical(panel.values[:, i]) for i in range(p))
    elif len(marginals) != p:
        raise DomainError("one marginal per column is required")
    marginals = tuple(marginals)
    u = np.column_stack([m.cdf(panel.values[:, i]) for i, m in enumerate(marginals)])

    # in-time D-vine on (X, Z1, ..., Zd)
    in_time = {}
    in_vine = _DVine(p, lambda j, k: in_time.get((j, k), INDEPENDENCE_COPULA))
    left = [[u[:, a] for a in range(p)]]
    right = [left[0]]
    for j in range(1, p):
        in_time.update(_fit_dvine_tree(left, right, j, p, lambda j_, a_: True, catalog, criterion))
        lj, rj = [], []
        for a in range(p - j):
            c = in_vine.edge(j, a)
            first, second = left[j - 1][a], right[j - 1][a + 1]
            lj.append(c.h(first, second))
            rj.append(c.h_given_first(second, first))
        left.append(lj)
        right.append(rj)

    # lag D-vine on (V_{t-1} reversed, V_t)
    cross = {}
    model = MVineModel(tuple(panel.columns), marginals, in_time, cross, scope=scope, criterion=criterion)
    w = np.column_stack([u[:-1, ::-1], u[1:]])
    n = 2 * p

    def wanted(j, a):
        crossing = a <= p - 1 < a + j
        if not crossing or j > p:
            return False
        return scope == "full" or a + j == p

    left = [[w[:, a] for a in range(n)]]
    right = [left[0]]
    for j in range(1, p + 1):
        cross.update(_fit_dvine_tree(left, right, j, n, wanted, catalog, criterion))
        if j == p:
            break
        lj, rj = [], []
        for a in range(n - j):
            c = model.lag_edge(j, a)
            first, second = left[j - 1][a], right[j - 1][a + 1]
            if c.is_independence:
                lj.append(first)
                rj.append(second)
            else:
                lj.append(c.h(first, second))
                rj.append(c.h_given_first(second, first))
        left.append(lj)
        right.append(rj)
    return model


def _require(model):
    if not isinstance(model, MVineModel):
        raise ModelStateError("operation needs a fitted MVineModel")


def conditional_predictive_sample(model: MVineModel, conditioning, n: int, rng) -> np.ndarray:
    """Draws of X_t given the previous row(s).

    ``conditioning`` holds previous-time values of every model column, shape
    ``(p,)`` or ``(m, p)``; a bare scalar is accepted for a one-column model.
    Returns shape ``(n,)`` or ``(m, n)``.
    """
    _require(model)
    if n < 1:
        raise DomainError("n must be >= 1")
    p = model.dimension
    cond = np.asarray(conditioning, dtype=float)
    single = cond.ndim <= 1 and (cond.size == p)
    cond = cond.reshape(-1, p)
    if not np.all(np.isfinite(cond)):
        raise DomainError("conditioning values must be finite")
    w = as_stream(rng).uniform((cond.shape[0], n))
    draws = _predict_from_uniforms(model, cond, w)
    return draws[0] if single else draws


def _predict_from_uniforms(model: MVineModel, cond: np.ndarray, w: np.ndarray) -> np.ndarray:
    p = model.dimension
    u_prev = model.to_uniform(cond)
    diag = [d[:, None] for d in model._block_diag(u_prev)]
    u_x, _ = model._lag_vine.sample_next(diag, w, update=False)
    u_x = np.broadcast_to(u_x, (cond.shape[0], w.shape[-1]))
    return model.marginals[0].quantile(u_x)


def simulate_null_sample(model: MVineModel, T: int, rng, n_paths: int | None = None):
    """Panel(s) from the fitted model with every lagged Z -> X channel removed.

    The X path is the Markov chain of the lag copula c_{X_t, X_{t+1}}; each
    Z_{i,t} is then drawn from the in-time vine given x_t, z_{1,t}, ...,
    z_{i-1,t}.  With ``n_paths`` set, ``rng`` must be a sequence of streams
    (one per path) and a list of panels is returned.
    """
    _require(model)
    if T < MIN_ROWS:
        raise DomainError(f"T must be >= {MIN_ROWS}")
    streams = [as_stream(rng)] if n_paths is None else [as_stream(r) for r in rng]
    if n_paths is not None and len(streams) != n_paths:
        raise DomainError("need one stream per path")
    p = model.dimension
    k = len(streams)
    wx = np.stack([s.child("x").uniform(T) for s in streams])            # (k, T)
    wz = np.stack([s.child("z").uniform((p - 1, T)) for s in streams]) if p > 1 else None
    ux = np.empty((k, T))
    ux[:, 0] = wx[:, 0]
    cxx = model.temporal_copula
    if cxx.is_independence:
        ux[:, 1:] = wx[:, 1:]
    else:
        for t in range(1, T):
            ux[:, t] = cxx.h_inv_given_first(wx[:, t], ux[:, t - 1])
    cols = [ux]
    if p > 1:
        diag = [ux]
        for i in range(1, p):
            ui, diag = model._in_vine.sample_next(diag, wz[:, i - 1, :])
            cols.append(ui)
    u = np.stack(cols, axis=-1)                                          # (k, T, p)
    x = model.from_uniform(u)
    panels = [SeriesPanel(model.columns, x[i]) for i in range(k)]
    return panels[0] if n_paths is None else panels


def simulate_path(model: MVineModel, T: int, rng) -> SeriesPanel:
    """Joint simulation through every fitted tree, started from the in-time law."""
    _require(model)
    if T < MIN_ROWS:
        raise DomainError(f"T must be >= {MIN_ROWS}")
    p = model.dimension
    w = as_stream(rng).uniform((T, p))
    u = np.empty((T, p))
    diag = [np.asarray(w[0, 0])]
    u[0, 0] = w[0, 0]
    for i in range(1, p):
        ui, diag = model._in_vine.sample_next(diag, w[0, i])
        u[0, i] = ui
    lag = model._lag_vine
    for t in range(1, T):
        diag = model._block_diag(u[t - 1])
        for i in range(p):
            ui, diag = lag.sample_next(diag, w[t, i])
            u[t, i] = ui
    return SeriesPanel(model.columns, model.from_uniform(u))
