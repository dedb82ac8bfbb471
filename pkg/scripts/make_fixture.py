"""Regenerate the bundled synthetic price fixture.

Three assets are simulated jointly from a chained-copula model (two HS
margins and one Gaussian margin) on business days 2011-2018. Each asset
misses a few dates so that alignment has work to do; the aligned
2011-2016 window holds 1421 dates, i.e. 1420 returns.

Run from the repository root:  python scripts/make_fixture.py
"""

import json
import os

import numpy as np

from sgchs.distcore import SumSpec, sample

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "sgchs", "data")
SEED = 20110122
LABELS = ("MSFT", "N225", "NEM")
SPEC = SumSpec.from_betas(["HS", "HS", "Gaussian"], [4.0, 3.4, 1.5], [0.7, 0.2])
MEAN = np.array([6e-4, 3e-4, -2e-4])
SCALE = np.array([0.0140, 0.0130, 0.0250])
START_PRICE = np.array([27.98, 10398.10, 62.96])
TARGET_PERIOD1 = 1421
DROPPED_PERIOD2 = 15


def business_days(start, stop):
    days = np.arange(np.datetime64(start), np.datetime64(stop))
    return days[np.is_busday(days)]


def main():
    rng = np.random.default_rng(SEED)
    p1 = business_days("2011-01-03", "2017-01-01")
    p2 = business_days("2017-01-01", "2019-01-01")
    drop1 = rng.choice(p1[1:], size=p1.size - TARGET_PERIOD1, replace=False)
    drop2 = rng.choice(p2, size=DROPPED_PERIOD2, replace=False)
    dropped = np.concatenate([drop1, drop2])
    # each missing date is missing for one or two of the assets
    owners = [set(rng.choice(len(LABELS), size=rng.integers(1, 3), replace=False)) for _ in dropped]
    common = np.setdiff1d(np.concatenate([p1, p2]), dropped)

    z = sample(SPEC, seed=rng, count=common.size - 1, joint=True)
    logp = np.vstack([np.log(START_PRICE), np.log(START_PRICE) + np.cumsum(MEAN + SCALE * z, axis=0)])
    all_days = np.concatenate([p1, p2])
    for k, label in enumerate(LABELS):
        missing = {d for d, own in zip(dropped, owners) if k in own}
        path = os.path.join(OUT, f"{label}.csv")
        with open(path, "w", newline="\n") as fh:
            fh.write("Date,Close\n")
            j = -1
            for d in all_days:
                if d in missing:
                    continue
                pos = np.searchsorted(common, d)
                if pos < common.size and common[pos] == d:
                    j = pos
                    value = logp[j, k]
                else:
                    # a date another asset lacks: small move off the last common close
                    value = logp[j, k] + 0.25 * SCALE[k] * rng.standard_normal()
                fh.write(f"{d},{np.exp(value):.4f}\n")
    config = {
        "assets": [{"path": f"{lab}.csv", "label": lab} for lab in LABELS],
        "models": [
            {"assets": ["MSFT", "N225"], "families": "HS", "copula": True, "method": "ifm"},
            {"assets": ["MSFT", "N225"], "families": "HS", "copula": False, "method": "ifm"},
            {"assets": ["MSFT", "N225"], "families": "Gaussian", "copula": True, "method": "ifm"},
            {"assets": ["MSFT", "N225"], "families": "Gaussian", "copula": False, "method": "ifm"},
            {"assets": ["MSFT", "N225"], "families": "HS", "copula": True, "method": "mom"},
            {"assets": ["MSFT", "N225", "NEM"], "families": ["HS", "HS", "Gaussian"],
             "copula": True, "method": "ifm"},
        ],
        "alphas": [0.005, 0.01, 0.025, 0.05],
        "split_date": "2017-01-01",
        "seed": 12345,
        "out": "out",
    }
    with open(os.path.join(OUT, "fixture_config.json"), "w") as fh:
        json.dump(config, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main()
