import csv
import io

import numpy as np
import pytest

from polarshape.channels import builtin_channel
from polarshape.core import InvalidArgument
from polarshape.harness import (SimConfig, construct, gallager_rows, rows_to_csv, run_simulation,
                                shaper_distance_experiment, sweep, wilson_interval)
from polarshape.shaper import DERANDOMIZED, STOCHASTIC

ZCH = {"name": "zchannel", "params": [0.3]}


def small(**kw):
    base = dict(channel=ZCH, L=16, M=16, rate_ratio=0.5, trials=20, samples=200, seed=3)
    base.update(kw)
    return SimConfig(**base)


def test_config_validation():
    with pytest.raises(InvalidArgument):
        SimConfig(trials=0)
    with pytest.raises(InvalidArgument):
        SimConfig(target_rate=0.3, rate_ratio=0.5)
    with pytest.raises(InvalidArgument):
        SimConfig.from_dict({"L": 8, "bogus": 1})
    assert SimConfig.from_dict({"L": 8}).L == 8


def test_wilson_interval_examples():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0 and hi == pytest.approx(0.036993498, abs=1e-8)
    lo, hi = wilson_interval(10, 100)
    assert lo < 0.1 < hi


def test_wilson_coverage_on_synthetic_errors():
    rng = np.random.default_rng(5)
    covered = 0
    for _ in range(100):
        k = int((rng.random(200) < 0.1).sum())
        lo, hi = wilson_interval(k, 200)
        covered += lo <= 0.1 <= hi
    assert covered >= 90


def test_noiseless_channel_never_errs():
    rep = run_simulation(SimConfig(channel={"name": "bsc", "params": [0.0]}, p=0.3, L=8, M=16,
                                   epsilon_inner=0.1, trials=100, samples=50, seed=1))
    assert rep.frame_errors == 0 and rep.fer == 0.0 and rep.fer_ci[0] == 0.0
    assert rep.design_rate > 0


def test_rate_zero_never_errs():
    rep = run_simulation(small(rate_ratio=None, target_rate=0.0, trials=30))
    assert rep.message_bits == 0 and rep.fer == 0.0


def test_report_fields_and_reproducibility():
    cfg = small()
    a = run_simulation(cfg)
    b = run_simulation(cfg)
    assert a.without_times() == b.without_times()
    assert 0 <= a.fer <= 1 and a.fer_ci[0] <= a.fer <= a.fer_ci[1]
    assert a.rate_ratio == pytest.approx(a.design_rate / a.capacity)
    assert a.N == 256 and a.randomness_per_frame == 16 * (16 - a.K)


def test_parallel_run_matches_serial():
    cfg = small(trials=24)
    spec, cap = construct(cfg)
    a = run_simulation(cfg, spec, cap)
    b = run_simulation(SimConfig(**{**cfg.__dict__, "jobs": 2}), spec, cap)
    assert a.without_times() == b.without_times()


def test_bsc_uniform_input_reliable_at_rate_035():
    cfg = SimConfig(channel={"name": "bsc", "params": [0.11]}, p=0.5, L=1, M=8192,
                    target_rate=0.35, trials=200, samples=400, seed=1)
    rep = run_simulation(cfg)
    assert rep.N == 2 ** 13 and abs(rep.design_rate - 0.35) < 1e-3
    assert rep.fer <= 0.1


def test_fer_trend_over_block_length():
    cfg = SimConfig(channel=ZCH, L=16, rate_ratio=0.7, trials=100, samples=500, seed=1)
    rows = sweep(cfg, "M", [64, 128, 256])
    for a, b in zip(rows, rows[1:]):
        assert b["fer"] <= a["fer_ci"][1]
    assert len({round(r["rate_ratio"], 3) for r in rows}) == 1


def test_mode_sweep_shares_the_code():
    cfg = small(p=0.2, L=8, M=64, epsilon_inner=0.2, rate_ratio=0.2, trials=100, samples=500)
    rows = sweep(cfg, "mode", [STOCHASTIC, DERANDOMIZED])
    st, dr = rows
    assert st["design_rate"] == dr["design_rate"]
    assert dr["randomness_per_frame"] < st["randomness_per_frame"]
    assert dr["fer"] <= 2 * st["fer"]


def test_epsilon_and_q_sweeps():
    rows = sweep(small(trials=5), "epsilon", [0.05, 0.2])
    assert [r["value"] for r in rows] == [0.05, 0.2]
    rows = sweep(small(), "q", [4, 8, 16])
    assert all(r["within_bound"] for r in rows)
    with pytest.raises(InvalidArgument):
        sweep(small(), "bogus", [1])


def test_gallager_rows_on_asymmetric_channel():
    ch = builtin_channel("asymmetric", [0.7, 0.2, 0.1, 0.05, 0.25, 0.7])
    rows = gallager_rows(ch)
    assert [r["q"] for r in rows] == [4, 8, 16, 32, 64, 128, 256]
    for r in rows:
        assert r["approx_error"] <= r["approx_bound"] and r["within_bound"]


def test_shaper_distance_experiment():
    rows = shaper_distance_experiment(0.5, 8, [0.1])
    assert rows[0]["K"] == 8 and rows[0]["delta"] < 1e-12
    rows = shaper_distance_experiment(0.3, 8, [0.2, 0.1, 0.05])
    assert all(r["within_bound"] for r in rows)
    d = [r["delta"] for r in rows]
    assert d[0] >= d[1] >= d[2]
    with pytest.raises(InvalidArgument):
        shaper_distance_experiment(0.3, 32, [0.1])


def test_rows_to_csv():
    text = rows_to_csv([{"a": 1, "b": [1, 2]}, {"a": 2, "b": (3,)}])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows == [{"a": "1", "b": "1;2"}, {"a": "2", "b": "3"}]
    assert rows_to_csv([]) == ""
