import math
import os

import numpy as np
import pytest
from scipy.integrate import trapezoid

from sgchs import cli
from sgchs.exceptions import InputError, NumericalError
from sgchs.pipeline import RunConfig, align, compute_returns, derived_seed, ingest, prepare, read_prices
from sgchs.reports import Table, format_cell, parse_cell

FAST = ["--boot-r", "100", "--boot-b", "100", "--gof-b", "100"]


def write_prices(path, rows, header="Date,Close"):
    path.write_text(header + "\n" + "".join(f"{d},{p}\n" for d, p in rows))
    return str(path)


# ---------------------------------------------------------------------------
# report tables


def test_cells_roundtrip():
    for v in (0.1, -1e-300, 3.0, 7, True, False, "SGCHS-C_ML"):
        assert parse_cell(format_cell(v)) == v
    assert format_cell(None) == "NA" and format_cell(float("nan")) == "NA"
    assert parse_cell("NA") is None
    with pytest.raises(InputError):
        format_cell("a\tb")


def test_table_roundtrip(tmp_path):
    t = Table(("a", "b", "c"), meta={"seed": "4"})
    t.add("x", 1.0 / 3.0, None)
    t.add("y", 2, np.float64(math.pi))
    path = tmp_path / "t.tsv"
    t.write(path)
    back = Table.read(path)
    assert back == t
    assert back.column("b") == [1.0 / 3.0, 2]
    assert back.records()[1]["c"] == math.pi
    with pytest.raises(InputError):
        t.add("too", "few")
    with pytest.raises(InputError):
        Table.loads("# only\tmeta\n")


# ---------------------------------------------------------------------------
# ingest


def test_return_is_log_ratio(tmp_path):
    p = write_prices(tmp_path / "A.csv", [("2020-01-02", 100), ("2020-01-03", 105)])
    dates, R = compute_returns(ingest([p]))
    assert R.shape == (1, 1) and R[0, 0] == pytest.approx(math.log(1.05), abs=1e-15)
    assert str(dates[0]) == "2020-01-03"


def test_alignment_drops_missing_dates(tmp_path):
    a = write_prices(tmp_path / "A.csv", [("2020-01-01", 1), ("2020-01-02", 2), ("2020-01-03", 3)])
    b = write_prices(tmp_path / "B.csv", [("2020-01-01", 5), ("2020-01-03", 6)])
    dates, prices = align(ingest([a, b]))
    assert [str(d) for d in dates] == ["2020-01-01", "2020-01-03"]
    np.testing.assert_array_equal(prices, [[1, 5], [3, 6]])


def test_read_prices_formats_and_errors(tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("Open\tClose\tDate\n1\t2.5\t2020-01-01\n1\tnull\t2020-01-02\n1\t3\t2020-01-03\n")
    s = read_prices(str(p))
    assert s.label == "t" and list(s.close) == [2.5, 3.0]
    cases = {
        "bad_header": "Day,Price\n2020-01-01,1\n2020-01-02,2\n",
        "bad_row": "Date,Close\n2020-01-01,1\n2020-13-45,2\n",
        "negative": "Date,Close\n2020-01-01,1\n2020-01-02,-2\n",
        "unordered": "Date,Close\n2020-01-02,1\n2020-01-01,2\n",
        "short": "Date,Close\n2020-01-01,1\n",
    }
    for name, text in cases.items():
        f = tmp_path / f"{name}.csv"
        f.write_text(text)
        with pytest.raises(InputError):
            read_prices(str(f))
    with pytest.raises(InputError, match="line 3"):
        read_prices(str(tmp_path / "bad_row.csv"))
    with pytest.raises(InputError):
        read_prices(str(tmp_path / "missing.csv"))


def test_no_common_dates(tmp_path):
    a = write_prices(tmp_path / "A.csv", [("2020-01-01", 1), ("2020-01-02", 2)])
    b = write_prices(tmp_path / "B.csv", [("2021-01-01", 1), ("2021-01-02", 2)])
    with pytest.raises(InputError):
        compute_returns(ingest([a, b]))


def test_fixture_dimensions():
    data = prepare(RunConfig.load(cli.fixture_config_path()))
    assert data.z1.shape == (1420, 3)
    assert data.dates2.size > 0 and data.dates1[-1] < data.dates2[0]
    # period-one columns are standardized, period two reuses the same parameters
    np.testing.assert_allclose(data.z1.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(data.z1.std(axis=0), 1.0, atol=1e-12)
    assert not np.allclose(data.z2.mean(axis=0), 0.0, atol=1e-12)


def test_config_validation(tmp_path):
    base = RunConfig.load(cli.fixture_config_path())
    d = {"assets": [{"path": "a.csv"}], "models": [{}]}
    for bad in ({"alphas": [0.6]}, {"split_date": "soon"}, {"bogus": 1}):
        with pytest.raises(InputError):
            RunConfig.from_dict({**d, **bad})
    with pytest.raises(InputError):
        RunConfig.from_dict({**d, "models": [{"assets": ["zz"]}]})
    assert derived_seed(1, "a") == derived_seed(1, "a") != derived_seed(1, "b")
    assert base.with_overrides() is base


# ---------------------------------------------------------------------------
# command line


def run(tmp_path, *argv):
    out = tmp_path / "out"
    status = cli.main([*argv, "--out", str(out)])
    return status, out


def test_ingest_command(tmp_path, capsys):
    status, out = run(tmp_path, "ingest", "--fixture")
    assert status == 0
    stats = Table.read(out / "stats.tsv")
    assert [r["T"] for r in stats.records() if r["Period"] == 1] == [1420] * 3
    assert len(Table.read(out / "returns.tsv").rows) > 1420
    assert "stats.tsv" in capsys.readouterr().out


def test_mom_gaussian_flags_infeasible(tmp_path):
    status, out = run(tmp_path, "fit", "--fixture", "--method", "mom", "--family", "Gaussian")
    assert status == 0
    rows = [r for r in Table.read(out / "fit.tsv").records() if r["Parameter"] == "beta_1"]
    assert rows and all(r["Estimate"] > 4 and r["Feasible"] is False for r in rows)


def test_lrt_row_only_with_copula(tmp_path):
    _, out_on = run(tmp_path / "on", "fit", "--fixture", "--copula", "on")
    _, out_off = run(tmp_path / "off", "fit", "--fixture", "--copula", "off")
    on = Table.read(out_on / "fit.tsv").column("Parameter")
    off = Table.read(out_off / "fit.tsv").column("Parameter")
    assert "LRT" in on and "LRT" not in off


def test_exit_status_input_error(tmp_path, capsys):
    assert run(tmp_path, "fit", str(tmp_path / "nothing.csv"))[0] == 1
    assert run(tmp_path, "fit")[0] == 1
    assert run(tmp_path, "fit", "--fixture", "--alphas", "0.7")[0] == 1
    assert run(tmp_path, "fit", "--fixture", "--split-date", "2030-01-01")[0] == 1
    assert "input error" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        cli.main(["fit", "--method", "bogus"])
    assert exc.value.code == 1


def test_exit_status_numerical_failure(tmp_path, monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise NumericalError("did not converge")

    monkeypatch.setattr(cli, "run_fit", boom)
    assert run(tmp_path, "fit", "--fixture")[0] == 2
    assert "numerical failure" in capsys.readouterr().err


def test_price_file_arguments(tmp_path):
    rng = np.random.default_rng(0)
    days = np.arange(np.datetime64("2016-01-01"), np.datetime64("2017-06-01"))
    prices = np.exp(np.cumsum(0.01 * rng.standard_t(5, days.size)))
    path = write_prices(tmp_path / "X.csv", zip(days, prices))
    status, out = run(tmp_path, "fit", path, "--copula", "off")
    assert status == 0
    assert Table.read(out / "fit.tsv").column("Parameter") == ["beta_1"]


@pytest.mark.parametrize("command", ["risk", "backtest", "plotdata"])
def test_pipeline_is_deterministic(tmp_path, command):
    outs = []
    for k in range(2):
        status, out = run(tmp_path / str(k), command, "--fixture", *FAST, "--seed", "7")
        assert status == 0
        outs.append(out)
    names = sorted(os.listdir(outs[0]))
    assert names == sorted(os.listdir(outs[1])) and "fit.tsv" in names
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_reports_contents(tmp_path):
    _, out = run(tmp_path, "backtest", "--fixture", *FAST, "--alphas", "0.01,0.05")
    bt = Table.read(out / "backtest.tsv")
    for r in bt.records():
        assert 0.0 <= r["ABLF"] <= 1.0 and r["AQLF"] >= r["ABLF"]
        assert r["N"] == round(r["ABLF"] * r["T"])
        assert r["alpha"] in (0.01, 0.05)
    assert len(Table.read(out / "gof.tsv").rows) >= 1
    _, out = run(tmp_path / "p", "plotdata", "--fixture")
    dens = [f for f in os.listdir(out) if f.startswith("density_")]
    assert dens
    t = Table.read(out / dens[0])
    assert len(t.rows) == 1001
    x, f = np.array(t.column("x")), np.array(t.column("density"))
    assert np.all(f >= 0) and abs(trapezoid(f, x) - 1.0) < 0.01
