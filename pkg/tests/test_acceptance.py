"""Acceptance criteria, one test each, at their stated tolerances.

The end-of-run summary prints one PASS/FAIL/SKIP line per criterion (see
``conftest.py``).  Model-based criteria use reduced training settings so the
suite fits a single CPU; the settings are fixed here and recorded in each
detail line.
"""
import os
import time
from pathlib import Path

import numpy as np
import pytest
import yaml
from hypothesis import given, settings, strategies as st

from dayahead.cli import EXIT_OK, main
from dayahead.features import (
    SplitConfig,
    build_dataset,
    filter_weekends,
    shift_weather,
    split_pre_post,
    upsample_daily,
    zero_fill_prefix,
)
from dayahead.ingest import SynthConfig, generate_synthetic, read_bundle
from dayahead.neural.training import TrainConfig
from dayahead.report import mape
from dayahead.scenarios import ScenarioConfig, forecast_rolling_week, run_pre_selftest, run_scenario
from dayahead.series import HOUR, AlignedDataset, DailySeries, HourlySeries, align, day_of_week, hour
from oracles import finite_difference_check, oracle_mape, toy_params

SEEDS = range(1, 11)
DIRECTIONAL_LSTM = dict(epochs=60, rnn_hidden=16)
FEATURE_FCDNN = dict(epochs=50, fcdnn_hidden=(64, 64))
REAL_DATA_ENV = "DAYAHEAD_REAL_DATA"
REFERENCE_BENCHMARK_LSTM = 5.32  # published post-order MAPE for the real-market benchmark LSTM


def record(request, detail):
    request.node.user_properties.append(("detail", detail))


# ---------------------------------------------------------------- 1 metric


@pytest.mark.criterion(1)
def test_metric_exactness(request):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20200322)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 200))
        actual = rng.uniform(1.0, 3e4, n) * rng.choice([-1.0, 1.0], n)
        forecast = actual * (1 + rng.normal(0, 0.2, n))
        ref = oracle_mape(actual.tolist(), forecast.tolist())
        worst = max(worst, abs(mape(actual, forecast) - ref) / ref)
    hand = mape([100, 200, 400], [90, 220, 380])
    elapsed = time.perf_counter() - t0
    record(request, f"worst rel err {worst:.1e} (<=1e-12), hand example {hand!r}, {elapsed:.2f}s (<1s)")
    assert worst <= 1e-12
    assert hand == pytest.approx(25 / 3, rel=0, abs=1e-12)
    assert f"{hand:.10f}" == "8.3333333333"
    assert elapsed < 1.0


# ---------------------------------------------------------------- 2 gradients


@pytest.mark.criterion(2)
def test_gradient_correctness(request):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    x, y = rng.normal(size=(2, 4, 3)), rng.normal(size=(2, 24))
    errs = {arch: finite_difference_check(toy_params(arch, seed=11), x, y, eps=1e-5) for arch in
            ("fcdnn", "lstm", "gru")}
    elapsed = time.perf_counter() - t0
    record(request, "max rel err " + ", ".join(f"{a}={e:.1e}" for a, e in errs.items()) +
           f" (<1e-4), {elapsed:.1f}s (<10s)")
    assert max(errs.values()) < 1e-4
    assert elapsed < 10.0


# ---------------------------------------------------------------- 3 pipeline


def _load_ds(start, n_hours):
    t = np.arange(n_hours, dtype=float)
    return align([HourlySeries("load", start, 1000.0 + t), HourlySeries("x", start, np.cos(t))], "load")


@pytest.mark.criterion(3)
def test_pipeline_exactness(request):
    t0 = time.perf_counter()
    base = hour("2020-01-01T00")

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-60, 60), min_size=25, max_size=400))
    def shift_prop(values):
        raw = HourlySeries("t", base, values)
        out = shift_weather(raw)
        for k, ts in enumerate(out.index):
            assert out.values[k] == raw.values[int((ts - 24 * HOUR - raw.start) / HOUR)]

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 50_000).map(float), min_size=1, max_size=80))
    def upsample_prop(values):
        out = upsample_daily(DailySeries("c", "2020-03-01", values))
        assert len(out) == 24 * len(values)
        assert out.values.sum() == 24 * sum(values)
        assert all((out.values[24 * k : 24 * (k + 1)] == v).all() for k, v in enumerate(values))

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0.5, 1e4), min_size=1, max_size=30), st.integers(0, 2000))
    def zero_fill_prop(values, lead):
        s = HourlySeries("c", base + lead * HOUR, values)
        out = zero_fill_prefix(s, base)
        assert out.start == base and (out.values[:lead] == 0.0).all()
        assert (out.values[lead:] == s.values).all()

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 30), st.integers(0, 20))
    def split_prop(lead_days, extra_days):
        start = hour("2020-03-22T00") - (8 + lead_days) * 24 * HOUR
        ds = _load_ds(start, 24 * (8 + lead_days + 70 + extra_days))
        pre, post = split_pre_post(ds, SplitConfig())
        assert pre.index[-1] == hour("2020-03-21T23") and post.index[0] == hour("2020-03-22T00")
        assert (pre.index < hour("2020-03-22T00")).all() and (post.index >= hour("2020-03-22T00")).all()
        union = np.concatenate([pre.index, post.index])
        assert (union == ds.index[: len(union)]).all() and len(post) == 1680

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 6), st.integers(1, 12))
    def weekend_prop(offset, weeks):
        ds = _load_ds(hour("2020-03-02T00") + offset * 24 * HOUR, 24 * 7 * weeks)
        once = filter_weekends(ds)
        assert len(once) == 48 * weeks
        assert (filter_weekends(once).index == once.index).all()
        assert all(day_of_week(t) >= 5 for t in once.index)

    for prop in (shift_prop, upsample_prop, zero_fill_prop, split_prop, weekend_prop):
        prop()
    elapsed = time.perf_counter() - t0
    record(request, f"5 exact property families, {elapsed:.2f}s (<5s)")
    assert elapsed < 5.0


# ---------------------------------------------------------------- 4 no leakage


def _perturbed(ds: AlignedDataset, mask_fn) -> AlignedDataset:
    channels = {}
    for name, values in ds.channels.items():
        channels[name] = values + np.where(mask_fn(name, ds.index), 1000.0, 0.0)
    return AlignedDataset(ds.index, channels, ds.roles)


@pytest.mark.criterion(4)
def test_no_leakage(request):
    t0 = time.perf_counter()
    cfg = ScenarioConfig(kind="rolling", architecture="lstm", features=("weather", "covid", "mobility"),
                         train=TrainConfig(seed=3, epochs=5, rnn_hidden=8))
    ds = build_dataset(generate_synthetic(SynthConfig(seed=5)), cfg.features)
    rng = np.random.default_rng(9)
    checks = 0
    for tau in (1, 4, 9):
        cutoff = cfg.split.cutoff(tau)
        base, _, _ = forecast_rolling_week(ds, cfg, tau)
        single = ds.index[rng.integers(np.searchsorted(ds.index, cutoff), len(ds.index), size=2)]
        names = rng.choice(ds.channel_names, size=2)
        mutations = [lambda name, idx: idx >= cutoff,  # every datum at/after the cutoff
                     lambda name, idx: idx == cutoff]  # the first hour of the cutoff, every channel
        mutations += [lambda name, idx, n=n, t=t: (name == n) & (idx == t) for n, t in zip(names, single)]
        for mut in mutations:
            fc, _, _ = forecast_rolling_week(_perturbed(ds, mut), cfg, tau)
            assert fc.tobytes() == base.tobytes(), f"tau={tau}: forecast changed after a post-cutoff mutation"
            checks += 1
    elapsed = time.perf_counter() - t0
    record(request, f"{checks} mutations at tau 1/4/9 left forecasts bit-identical, {elapsed:.0f}s (<600s)")
    assert elapsed < 600


# ---------------------------------------------------------------- 5, 6 directional (LSTM)


@pytest.fixture(scope="module")
def lstm_runs():
    """Benchmark, weekend and pre-order self-test MAPE per seed (reduced LSTM)."""
    t0 = time.perf_counter()
    rows = {}
    for seed in SEEDS:
        ds = build_dataset(generate_synthetic(SynthConfig(seed=seed)), ["weather"])
        train = TrainConfig(seed=seed, **DIRECTIONAL_LSTM)
        bench = ScenarioConfig(kind="benchmark", architecture="lstm", train=train)
        weekend = ScenarioConfig(kind="weekend", architecture="lstm", train=train)
        rows[seed] = {
            "benchmark": run_scenario(ds, bench).overall_mape,
            "weekend": run_scenario(ds, weekend).overall_mape,
            "selftest": run_pre_selftest(ds, bench).overall_mape,
        }
    return rows, time.perf_counter() - t0


@pytest.mark.criterion(5)
def test_weekend_beats_benchmark(request, lstm_runs):
    rows, elapsed = lstm_runs
    wins = sum(r["weekend"] < r["benchmark"] for r in rows.values())
    mean = {k: np.mean([r[k] for r in rows.values()]) for k in ("benchmark", "weekend")}
    record(request, f"LSTM-16 weekend < benchmark in {wins}/10 seeds (>=8); mean {mean['weekend']:.2f} vs "
           f"{mean['benchmark']:.2f}; {elapsed:.0f}s shared with 6 (<900s)")
    assert wins >= 8
    assert elapsed < 900


@pytest.mark.criterion(6)
def test_benchmark_degrades_after_shift(request, lstm_runs):
    rows, elapsed = lstm_runs
    wins = sum(r["benchmark"] > r["selftest"] for r in rows.values())
    mean = {k: np.mean([r[k] for r in rows.values()]) for k in ("benchmark", "selftest")}
    record(request, f"LSTM-16 post-shift > pre-shift self-test in {wins}/10 seeds (=10); mean "
           f"{mean['benchmark']:.2f} vs {mean['selftest']:.2f}")
    assert wins == 10
    assert elapsed < 900


# ---------------------------------------------------------------- 7 feature ordering


@pytest.mark.criterion(7)
def test_mobility_beats_covid(request):
    t0 = time.perf_counter()
    rows = []
    for seed in SEEDS:
        bundle = generate_synthetic(SynthConfig(seed=seed))
        train = TrainConfig(seed=seed, **FEATURE_FCDNN)
        m = {f: run_scenario(bundle, ScenarioConfig(kind="rolling", architecture="fcdnn", features=(f,),
                                                    train=train)).overall_mape
             for f in ("covid", "mobility")}
        rows.append(m)
    wins = sum(r["mobility"] < r["covid"] for r in rows)
    elapsed = time.perf_counter() - t0
    record(request, f"FCDNN rolling mobility < covid in {wins}/10 seeds (>=8); mean "
           f"{np.mean([r['mobility'] for r in rows]):.2f} vs {np.mean([r['covid'] for r in rows]):.2f}; "
           f"{elapsed:.0f}s (<1200s)")
    assert wins >= 8
    assert elapsed < 1200


# ---------------------------------------------------------------- 8 determinism


@pytest.mark.criterion(8)
def test_rerun_from_manifest_is_byte_identical(request, tmp_path):
    assert main(["synth", "--out", str(tmp_path / "data"), "--seed", "2"]) == EXIT_OK
    cfg = {"data_dir": "data", "scenarios": ["benchmark", "weekend", "rolling"], "architectures": ["fcdnn"],
           "feature_sets": ["weather", "mobility"], "seeds": [4], "naive_baseline": True}
    (tmp_path / "run.yaml").write_text(yaml.safe_dump(cfg), encoding="utf-8")
    assert main(["run", str(tmp_path / "run.yaml"), "--out", str(tmp_path / "first")]) == EXIT_OK
    assert main(["run", str(tmp_path / "first" / "manifest.json"), "--out", str(tmp_path / "second")]) == EXIT_OK
    first = sorted((tmp_path / "first" / "reports").iterdir())
    second = sorted((tmp_path / "second" / "reports").iterdir())
    same = [a.read_bytes() == b.read_bytes() for a, b in zip(first, second)]
    summary_same = (tmp_path / "first" / "summary.csv").read_bytes() == (tmp_path / "second" / "summary.csv").read_bytes()
    record(request, f"{sum(same)}/{len(first)} report files and summary.csv byte-identical on re-run from manifest")
    assert [p.name for p in first] == [p.name for p in second]
    assert all(same) and summary_same and len(first) == 10


# ---------------------------------------------------------------- 9 optional real data


@pytest.mark.criterion(9)
def test_real_data_reference(request):
    data_dir = os.environ.get(REAL_DATA_ENV)
    if not data_dir:
        record(request, f"optional: set {REAL_DATA_ENV} to a directory with the four CSV extracts")
        pytest.skip(f"no real data ({REAL_DATA_ENV} unset)")
    bundle = read_bundle(Path(data_dir))
    train = TrainConfig(seed=0)
    bench = run_scenario(bundle, ScenarioConfig(kind="benchmark", architecture="lstm", train=train)).overall_mape
    weekend = run_scenario(bundle, ScenarioConfig(kind="weekend", architecture="lstm", train=train)).overall_mape
    record(request, f"benchmark LSTM {bench:.2f} (reference {REFERENCE_BENCHMARK_LSTM} +/-2.0), weekend {weekend:.2f}")
    assert abs(bench - REFERENCE_BENCHMARK_LSTM) <= 2.0
    assert weekend < bench
