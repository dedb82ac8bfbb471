"""Tab-separated report tables with ``#``-prefixed metadata lines.

Floats are written with ``repr`` so that files are byte-identical across
runs and parse back to the same values; missing cells are ``NA``.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .exceptions import InputError

NA = "NA"

FIT_COLUMNS = ("Model", "Method", "Parameter", "Estimate", "Std.Err.", "z-value", "p-value",
               "CLAIC", "LRT", "Feasible")
RISK_COLUMNS = ("Model", "Portfolio", "alpha", "VaR_model", "ES_model", "VaR_emp", "ES_emp",
                "VaR_lower", "VaR_upper", "ES_lower", "ES_upper")
BACKTEST_COLUMNS = ("Model", "Portfolio", "alpha", "N", "T", "Kupiec_LR", "Kupiec_p", "ABLF",
                    "AQLF", "Z1", "Z1_p", "Z2", "Z2_p")
GOF_COLUMNS = ("Model", "Portfolio", "KS", "KS_p", "AD", "AD_p")
STATS_COLUMNS = ("Series", "Period", "T", "M", "SD", "Sk", "K")


def format_cell(v):
    if v is None:
        return NA
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return NA
        return repr(v)
    s = str(v)
    if "\t" in s or "\n" in s:
        raise InputError(f"cell text may not contain tabs or newlines: {s!r}")
    return s


def parse_cell(s):
    if s == NA:
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


@dataclass
class Table:
    columns: Tuple[str, ...]
    rows: List[Tuple] = field(default_factory=list)
    meta: Dict[str, str] = field(default_factory=dict)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise InputError(f"expected {len(self.columns)} cells, got {len(values)}")
        self.rows.append(tuple(parse_cell(format_cell(v)) for v in values))

    def dumps(self):
        lines = [f"# {k}\t{format_cell(v)}" for k, v in self.meta.items()]
        lines.append("\t".join(self.columns))
        lines += ["\t".join(format_cell(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text):
        meta, header, rows = {}, None, []
        for line in text.splitlines():
            if not line:
                continue
            if line.startswith("# "):
                key, _, value = line[2:].partition("\t")
                meta[key] = value
            elif header is None:
                header = tuple(line.split("\t"))
            else:
                cells = line.split("\t")
                if len(cells) != len(header):
                    raise InputError(f"row has {len(cells)} cells, header has {len(header)}")
                rows.append(tuple(parse_cell(c) for c in cells))
        if header is None:
            raise InputError("table has no header line")
        return cls(header, rows, meta)

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def read(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())

    def column(self, name):
        k = self.columns.index(name)
        return [row[k] for row in self.rows]

    def records(self):
        return [dict(zip(self.columns, row)) for row in self.rows]


def _opt(arr, k):
    return None if arr is None else float(arr[k])


def fit_table(fits, lrts=None, meta=None):
    """Table-2 style layout: one row per parameter, plus an ``LRT`` row for
    every copula fit with a likelihood-ratio test."""
    t = Table(FIT_COLUMNS, meta=dict(meta or {}))
    lrts = lrts or {}
    for name, fit in fits.items():
        z, p = fit.z_values, fit.p_values
        for k, par in enumerate(fit.names):
            t.add(name, fit.method, par, float(fit.estimates[k]), _opt(fit.std_errors, k),
                  _opt(z, k), _opt(p, k), fit.claic, None, fit.feasible[k])
        if name in lrts:
            stat, pval = lrts[name]
            t.add(name, fit.method, "LRT", None, None, None, pval, None, stat, True)
        if fit.loglik is not None:
            t.meta[f"loglik[{name}]"] = repr(float(fit.loglik))
        for i, note in enumerate(fit.notes):
            t.meta[f"note[{name}][{i}]"] = note
    return t


def risk_table(reports, meta=None):
    """``reports`` maps ``(model, portfolio)`` to a :class:`~sgchs.risk.RiskReport`
    holding that single model."""
    t = Table(RISK_COLUMNS, meta=dict(meta or {}))
    for (model, portfolio), r in reports.items():
        (vl, vu), (el, eu) = r.bounds["var"], r.bounds["es"]
        for k, a in enumerate(r.alphas):
            t.add(model, portfolio, a, float(r.model_var[model][k]), float(r.model_es[model][k]),
                  float(r.empirical_var[k]), float(r.empirical_es[k]),
                  float(vl[k]), float(vu[k]), float(el[k]), float(eu[k]))
    return t


def backtest_tables(reports, meta=None):
    """``reports`` maps portfolio labels to :class:`~sgchs.backtest.BacktestReport`."""
    bt = Table(BACKTEST_COLUMNS, meta=dict(meta or {}))
    gof = Table(GOF_COLUMNS, meta=dict(meta or {}))
    for portfolio, rep in reports.items():
        for r in rep.rows:
            bt.add(r.model, portfolio, r.alpha, r.N, r.T, r.kupiec_lr, r.kupiec_p, r.ablf, r.aqlf,
                   r.z1, r.z1_p, r.z2, r.z2_p)
        for model, res in rep.gof.items():
            gof.add(model, portfolio, res["KS"].statistic, res["KS"].pvalue,
                    res["AD"].statistic, res["AD"].pvalue)
    return bt, gof
