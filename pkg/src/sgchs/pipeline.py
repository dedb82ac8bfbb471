"""End-to-end workflow: prices -> standardized returns -> fits -> risk -> backtests.

Price files are delimited text with a header row holding ``Date`` (ISO-8601)
and ``Close`` columns, one file per asset. Standardization parameters are
always estimated on period one and reused for period two.
"""

import csv
import datetime as dt
import json
import os
import zlib
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .backtest import backtest
from .distcore.specs import Family
from .estimation import (
    ReturnPanel, Standardizer, estimate_mom, ifm_fit, lrt_gamma_zero, model_name, sample_stats,
)
from .exceptions import InputError
from .reports import STATS_COLUMNS, Table, backtest_tables, fit_table, risk_table
from .risk import DEFAULT_ALPHAS, Law, risk_report

PLOT_POINTS = 1001
PLOT_MARGIN = 0.2


# ---------------------------------------------------------------------------
# ingest


@dataclass(frozen=True)
class PriceSeries:
    label: str
    source: str
    dates: np.ndarray  # datetime64[D]
    close: np.ndarray


@dataclass(frozen=True)
class PriceTable:
    series: Tuple[PriceSeries, ...]

    @property
    def labels(self):
        return tuple(s.label for s in self.series)


def _sniff_delimiter(header_line):
    for d in (",", "\t", ";"):
        if d in header_line:
            return d
    return ","


def read_prices(path, label=None):
    """Read one ``Date``/``Close`` file; rows with a ``null`` close are skipped."""
    label = label or os.path.splitext(os.path.basename(path))[0]
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot open ({exc.strerror})") from exc
    with fh:
        first = fh.readline()
        fh.seek(0)
        reader = csv.reader(fh, delimiter=_sniff_delimiter(first))
        header = [h.strip().lower() for h in next(reader, [])]
        if "date" not in header or "close" not in header:
            raise InputError(f"{path}: header must contain Date and Close columns")
        i_date, i_close = header.index("date"), header.index("close")
        dates, close = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                d = dt.date.fromisoformat(row[i_date].strip())
                raw = row[i_close].strip()
                if raw.lower() in ("null", "nan", ""):
                    continue
                p = float(raw)
            except (ValueError, IndexError) as exc:
                raise InputError(f"{path}, line {lineno}: unparseable row {row!r}") from exc
            if not p > 0.0:
                raise InputError(f"{path}, line {lineno}: price must be positive, got {p!r}")
            if dates and d <= dates[-1]:
                raise InputError(f"{path}, line {lineno}: dates must be strictly increasing")
            dates.append(d)
            close.append(p)
    if len(dates) < 2:
        raise InputError(f"{path}: fewer than two prices")
    return PriceSeries(label, str(path), np.array(dates, dtype="datetime64[D]"), np.array(close))


def ingest(paths, labels=None):
    labels = labels or [None] * len(paths)
    series = tuple(read_prices(p, lab) for p, lab in zip(paths, labels))
    if len(set(s.label for s in series)) != len(series):
        raise InputError("asset labels must be unique")
    return PriceTable(series)


def align(table):
    """Keep only dates present in every series; returns ``(dates, prices)``."""
    common = table.series[0].dates
    for s in table.series[1:]:
        common = np.intersect1d(common, s.dates)
    if common.size < 2:
        raise InputError("the price series share fewer than two dates")
    prices = np.column_stack([s.close[np.searchsorted(s.dates, common)] for s in table.series])
    return common, prices


def compute_returns(table):
    """Aligned log returns ``log(P_t / P_{t-1})``, each dated by its end date."""
    dates, prices = align(table)
    return dates[1:], np.diff(np.log(prices), axis=0)


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ModelConfig:
    name: str
    assets: Tuple[str, ...]
    families: Tuple[Family, ...]
    copula: bool = True
    method: str = "ifm"

    @classmethod
    def build(cls, assets, families, copula=True, method="ifm", name=None):
        assets = tuple(assets)
        if isinstance(families, (str, Family)):
            families = [families] * len(assets)
        try:
            families = tuple(Family.parse(f) for f in families)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        if len(families) != len(assets):
            raise InputError(f"{len(families)} families for {len(assets)} assets")
        if method not in ("mom", "ifm"):
            raise InputError(f"method must be 'mom' or 'ifm', got {method!r}")
        copula = bool(copula) and len(assets) > 1
        name = name or f"{model_name(families, copula)}_{'Mom' if method == 'mom' else 'ML'}"
        return cls(name, assets, families, copula, method)

    @property
    def portfolio(self):
        return "+".join(self.assets)


@dataclass(frozen=True)
class RunConfig:
    assets: Tuple[Tuple[str, str], ...]  # (path, label)
    models: Tuple[ModelConfig, ...]
    alphas: Tuple[float, ...] = DEFAULT_ALPHAS
    boot_r: int = 1000
    boot_b: int = 1000
    gof_b: Optional[int] = None
    block_len: Optional[int] = None
    confidence: float = 0.99
    split_date: str = "2017-01-01"
    seed: int = 0
    out: str = "out"
    refit_gof: bool = False

    def __post_init__(self):
        for a in self.alphas:
            if not 0.0 < a < 0.5:
                raise InputError(f"alpha values must lie in (0, 0.5), got {a!r}")
        try:
            dt.date.fromisoformat(self.split_date)
        except (TypeError, ValueError) as exc:
            raise InputError(f"split date must be ISO-8601, got {self.split_date!r}") from exc
        labels = {lab for _, lab in self.assets}
        for m in self.models:
            missing = set(m.assets) - labels
            if missing:
                raise InputError(f"model {m.name} refers to unknown assets {sorted(missing)}")
        if len({m.name for m in self.models}) != len(self.models):
            raise InputError("model names must be unique")

    @classmethod
    def from_dict(cls, d, base_dir="."):
        d = dict(d)
        assets = []
        for a in d.pop("assets"):
            path = a["path"] if os.path.isabs(a["path"]) else os.path.join(base_dir, a["path"])
            label = a.get("label") or os.path.splitext(os.path.basename(path))[0]
            assets.append((path, label))
        labels = [lab for _, lab in assets]
        models = [
            ModelConfig.build(m.get("assets", labels), m.get("families", "HS"),
                              m.get("copula", True), m.get("method", "ifm"), m.get("name"))
            for m in d.pop("models", [{}])
        ]
        known = {f for f in cls.__dataclass_fields__} - {"assets", "models"}
        unknown = set(d) - known
        if unknown:
            raise InputError(f"unknown config keys {sorted(unknown)}")
        if "alphas" in d:
            d["alphas"] = tuple(float(a) for a in d["alphas"])
        return cls(tuple(assets), tuple(models), **d)

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"{path}: cannot read config ({exc})") from exc
        return cls.from_dict(data, os.path.dirname(os.path.abspath(path)))

    def with_overrides(self, method=None, families=None, copula=None):
        if method is None and families is None and copula is None:
            return self
        models = tuple(
            ModelConfig.build(m.assets, families if families is not None else m.families,
                              m.copula if copula is None else copula,
                              method or m.method)
            for m in self.models
        )
        names = [m.name for m in models]
        if len(set(names)) != len(names):
            # overrides can collapse distinct models into one
            seen, uniq = set(), []
            for m in models:
                if m.name not in seen:
                    seen.add(m.name)
                    uniq.append(m)
            models = tuple(uniq)
        return replace(self, models=models)


def derived_seed(seed, *keys):
    """A stable child seed for a named sub-task."""
    words = [int(seed)] + [zlib.crc32(str(k).encode()) for k in keys]
    return int(np.random.SeedSequence(words).generate_state(1)[0])


# ---------------------------------------------------------------------------
# data preparation


@dataclass
class PreparedData:
    labels: Tuple[str, ...]
    dates1: np.ndarray
    dates2: np.ndarray
    raw1: np.ndarray
    raw2: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    scaler: Standardizer

    def columns(self, assets):
        idx = [self.labels.index(a) for a in assets]
        return self.z1[:, idx], self.z2[:, idx]


def prepare(config):
    table = ingest([p for p, _ in config.assets], [lab for _, lab in config.assets])
    dates, R = compute_returns(table)
    split = np.datetime64(config.split_date, "D")
    first = dates < split
    if first.all() or not first.any():
        raise InputError(f"split date {config.split_date} lies outside the data range")
    scaler = Standardizer().fit(R[first])
    return PreparedData(table.labels, dates[first], dates[~first], R[first], R[~first],
                        scaler.transform(R[first]), scaler.transform(R[~first]), scaler)


def _meta(config, data, **extra):
    m = {
        "assets": ",".join(data.labels),
        "period1": f"{data.dates1[0]}..{data.dates1[-1]} T={data.dates1.size}",
        "period2": f"{data.dates2[0]}..{data.dates2[-1]} T={data.dates2.size}" if data.dates2.size else "empty",
        "seed": str(config.seed),
    }
    m.update({k: str(v) for k, v in extra.items()})
    return m


def stats_table(config, data):
    t = Table(STATS_COLUMNS, meta=_meta(config, data))
    for k, lab in enumerate(data.labels):
        for period, block in (("1", data.raw1), ("2", data.raw2)):
            if block.shape[0] >= 2:
                t.add(lab, period, block.shape[0], *sample_stats(block[:, k]))
    return t


def returns_table(data):
    t = Table(("Date", "Period") + data.labels)
    for period, dates, block in (("1", data.dates1, data.raw1), ("2", data.dates2, data.raw2)):
        for d, row in zip(dates, block):
            t.add(str(d), period, *map(float, row))
    return t


# ---------------------------------------------------------------------------
# workflows


def _fit_one(model, z1, labels):
    panel = ReturnPanel.from_standardized(z1, labels)
    fitter = estimate_mom if model.method == "mom" else ifm_fit
    return fitter(panel, model.families, model.copula, True)


def run_fit(config, data=None):
    """Fit every configured model on period one; returns ``(fits, lrts, table)``."""
    data = data or prepare(config)
    fits, lrts = {}, {}
    for m in config.models:
        z1, _ = data.columns(m.assets)
        fit = _fit_one(m, z1, m.assets)
        fits[m.name] = fit
        if m.copula and m.method == "ifm":
            panel = ReturnPanel.from_standardized(z1, m.assets)
            base = ifm_fit(panel, m.families, copula=False, standard_errors=False)
            lrts[m.name] = lrt_gamma_zero(fit, base)
            fit.lrt = lrts[m.name]
    return fits, lrts, fit_table(fits, lrts, _meta(config, data))


def _usable(fits):
    """Fitted laws of the portfolio sum, skipping flagged (infeasible) fits."""
    return {name: fit.to_spec() for name, fit in fits.items() if fit.is_feasible}


def run_risk(config, data=None, fits=None):
    data = data or prepare(config)
    if fits is None:
        fits = run_fit(config, data)[0]
    specs = _usable(fits)
    reports = {}
    for m in config.models:
        if m.name not in specs:
            continue
        z1, _ = data.columns(m.assets)
        y = z1.sum(axis=1)
        reports[(m.name, m.portfolio)] = risk_report(
            y, {m.name: specs[m.name]}, config.alphas, config.boot_r, config.block_len,
            config.confidence, derived_seed(config.seed, "risk", m.portfolio),
        )
    meta = _meta(config, data, boot_r=config.boot_r, confidence=config.confidence,
                 skipped=",".join(n for n in fits if n not in specs) or "none")
    return reports, risk_table(reports, meta)


def _refit_callable(model):
    def refit(sample):
        # a one-margin refit of the sum's shape is not defined for sums;
        # only single-asset models can be refitted on simulated data
        fit = _fit_one(model, sample[:, None], model.assets)
        return fit.to_spec()
    return refit if len(model.assets) == 1 else None


def run_backtest(config, data=None, fits=None):
    data = data or prepare(config)
    if data.dates2.size == 0:
        raise InputError("no period-two data after the split date")
    if fits is None:
        fits = run_fit(config, data)[0]
    specs = _usable(fits)
    reports = {}
    by_portfolio = {}
    for m in config.models:
        if m.name in specs:
            by_portfolio.setdefault(m.assets, []).append(m)
    for assets, models in by_portfolio.items():
        z1, z2 = data.columns(assets)
        portfolio = "+".join(assets)
        refit = _refit_callable(models[0]) if config.refit_gof else None
        reports[portfolio] = backtest(
            z1.sum(axis=1), z2.sum(axis=1), {m.name: specs[m.name] for m in models},
            config.alphas, config.boot_b, derived_seed(config.seed, "backtest", portfolio),
            config.gof_b, refit,
        )
    meta = _meta(config, data, boot_b=config.boot_b, gof_b=config.gof_b or config.boot_b)
    return reports, backtest_tables(reports, meta)


def run_plotdata(config, data=None, fits=None):
    """Density grids per fitted model and histogram bins of the portfolio sum.

    Each grid has 1001 points spanning the empirical support widened by 20%
    on each side; the histogram uses the Freedman-Diaconis rule.
    """
    data = data or prepare(config)
    if fits is None:
        fits = run_fit(config, data)[0]
    specs = _usable(fits)
    tables = {}
    for m in config.models:
        z1, _ = data.columns(m.assets)
        y = z1.sum(axis=1)
        lo, hi = y.min(), y.max()
        pad = PLOT_MARGIN * (hi - lo)
        grid = np.linspace(lo - pad, hi + pad, PLOT_POINTS)
        if m.name in specs:
            t = Table(("x", "density"), meta={"model": m.name, "portfolio": m.portfolio})
            for x, f in zip(grid, Law(specs[m.name]).pdf(grid)):
                t.add(float(x), float(f))
            tables[f"density_{m.name}"] = t
        key = f"histogram_{m.portfolio}"
        if key not in tables:
            counts, edges = np.histogram(y, bins="fd", density=True)
            h = Table(("left", "right", "density"), meta={"portfolio": m.portfolio, "T": str(y.size)})
            for a, b, c in zip(edges[:-1], edges[1:], counts):
                h.add(float(a), float(b), float(c))
            tables[key] = h
    return tables
