import numpy as np
import pytest
from hypothesis import given, strategies as st

from dayahead.errors import DatasetError, RangeError
from dayahead.features import (
    SplitConfig,
    apply_norm,
    build_dataset,
    build_windows,
    filter_weekends,
    fit_norm,
    invert_target,
    shift_weather,
    split_pre_post,
    upsample_daily,
    window_for_day,
    zero_fill_prefix,
)
from dayahead.ingest import SynthConfig, generate_synthetic
from dayahead.series import HOUR, DailySeries, HourlySeries, align, day_of_week, hour

T0 = hour("2020-01-01T00")


def dataset(start, n_hours, n_exo=1):
    t = np.arange(n_hours, dtype=float)
    chans = [HourlySeries("load", start, 1000 + t)]
    chans += [HourlySeries(f"x{k}", start, np.sin(t + k)) for k in range(n_exo)]
    return align(chans, "load")


# ---------------------------------------------------------------- shift/upsample/fill


def test_shift_moves_value_one_day():
    vals = np.zeros(72)
    vals[6] = 10.0
    out = shift_weather(HourlySeries("t", T0, vals))
    assert out.at("2020-01-02T06") == 10.0
    assert out.start == T0 + 24 * HOUR


def test_shift_length():
    assert len(shift_weather(HourlySeries("t", T0, np.arange(48.0)))) == 24


def test_shift_too_short():
    with pytest.raises(RangeError):
        shift_weather(HourlySeries("t", T0, np.arange(24.0)))


@given(st.lists(st.floats(-50, 50), min_size=49, max_size=200))
def test_shift_property(values):
    raw = HourlySeries("t", T0, values)
    once = shift_weather(raw)
    for ts in once.index[::7]:
        assert once.at(ts) == raw.at(ts - 24 * HOUR)
    twice = shift_weather(once)
    for ts in twice.index[::5]:
        assert twice.at(ts) == raw.at(ts - 48 * HOUR)


def test_upsample_single():
    out = upsample_daily(DailySeries("c", "2020-03-01", [5.0]))
    assert len(out) == 24 and (out.values == 5.0).all()
    assert out.start == hour("2020-03-01T00")


def test_upsample_two_days():
    out = upsample_daily(DailySeries("c", "2020-03-01", [1.0, 2.0]))
    assert (out.values[:24] == 1.0).all() and (out.values[24:] == 2.0).all()


def test_upsample_empty():
    with pytest.raises(RangeError):
        upsample_daily(DailySeries("c", "2020-03-01", []))


@given(st.lists(st.integers(0, 10_000).map(float), min_size=1, max_size=60))
def test_upsample_conservation(values):
    out = upsample_daily(DailySeries("c", "2020-03-01", values))
    assert len(out) == 24 * len(values)
    assert out.values.sum() == 24 * sum(values)
    for k, v in enumerate(values):
        assert (out.values[24 * k : 24 * k + 24] == v).all()


def test_zero_fill_leading_zeros():
    s = upsample_daily(DailySeries("c", "2020-03-01", [3.0, 4.0]))
    out = zero_fill_prefix(s, "2020-01-01T00")
    n_lead = (np.datetime64("2020-03-01") - np.datetime64("2020-01-01")).astype(int) * 24
    assert n_lead == 1440
    assert out.start == hour("2020-01-01T00")
    assert (out.values[:1440] == 0.0).all()
    np.testing.assert_array_equal(out.values[1440:], s.values)
    assert out.end == s.end


def test_zero_fill_identity_and_error():
    s = HourlySeries("c", T0, [1.0, 2.0])
    out = zero_fill_prefix(s, T0)
    np.testing.assert_array_equal(out.values, s.values)
    with pytest.raises(RangeError):
        zero_fill_prefix(s, T0 + HOUR)


@given(st.lists(st.floats(0, 1e4), min_size=1, max_size=20), st.integers(0, 40))
def test_zero_fill_then_upsample_commutes(values, lead_days):
    d = DailySeries("c", "2020-02-10", values)
    full = np.datetime64("2020-02-10") - np.timedelta64(lead_days, "D")
    filled_daily = DailySeries("c", full, np.concatenate([np.zeros(lead_days), values]))
    a = upsample_daily(filled_daily)
    b = zero_fill_prefix(upsample_daily(d), hour(full))
    assert a.start == b.start
    np.testing.assert_array_equal(a.values, b.values)


def test_build_dataset_with_late_covid_is_full_range():
    cfg = SynthConfig(seed=1, n_days=40, shift_day=30)
    bundle = generate_synthetic(cfg)
    # truncate covid/mobility so they start later than load
    late = lambda s: DailySeries(s.name, s.start_date + np.timedelta64(25, "D"), s.values[25:])
    bundle.covid = [late(s) for s in bundle.covid]
    bundle.mobility = [late(s) for s in bundle.mobility]
    ds = build_dataset(bundle, ["weather", "covid", "mobility"])
    assert len(ds.channel_names) == 9
    assert ds.start == bundle.load.start + 24 * HOUR  # weather shift
    assert ds.end == bundle.load.end
    assert len({len(c) for c in ds.channels.values()}) == 1


# ---------------------------------------------------------------- split / weekend


def test_split_partition_at_order():
    ds = dataset(hour("2020-01-01T00"), 24 * 160)
    pre, post = split_pre_post(ds, SplitConfig())
    assert pre.index[-1] == hour("2020-03-21T23")
    assert post.index[0] == hour("2020-03-22T00")
    assert len(post) == 1680
    assert len(pre) + len(post) == len(ds.between(ds.start, hour("2020-03-22T00") + 1680 * HOUR))
    assert not set(pre.index.tolist()) & set(post.index.tolist())


def test_split_insufficient_post():
    ds = dataset(hour("2020-01-01T00"), 24 * 100)
    with pytest.raises(RangeError, match="data ends at"):
        split_pre_post(ds, SplitConfig())


@given(st.integers(1, 6), st.integers(0, 30))
def test_split_partition_property(weeks, extra_days):
    ds = dataset(hour("2020-02-01T00"), 24 * (50 + 7 * weeks + extra_days))
    cfg = SplitConfig(horizon_weeks=weeks)
    pre, post = split_pre_post(ds, cfg)
    union = np.concatenate([pre.index, post.index])
    np.testing.assert_array_equal(union, ds.between(ds.start, cfg.post_end).index)


def test_filter_weekends_one_week():
    ds = dataset(hour("2020-03-16T00"), 24 * 7)
    wk = filter_weekends(ds)
    assert len(wk) == 48
    assert hour("2020-03-14T10") not in wk.index
    ds2 = dataset(hour("2020-03-09T00"), 24 * 14)
    wk2 = filter_weekends(ds2)
    assert hour("2020-03-14T10") in wk2.index
    assert hour("2020-03-16T10") not in wk2.index


def test_filter_weekends_only_weekdays():
    assert len(filter_weekends(dataset(hour("2020-03-16T00"), 24 * 5))) == 0


@given(st.integers(0, 6), st.integers(1, 60))
def test_filter_weekends_idempotent(offset, n_days):
    ds = dataset(hour("2020-03-02T00") + offset * 24 * HOUR, 24 * n_days)
    once = filter_weekends(ds)
    twice = filter_weekends(once)
    np.testing.assert_array_equal(once.index, twice.index)
    assert all(day_of_week(t) >= 5 for t in once.index)
    assert len(once) == 24 * sum(day_of_week(t) >= 5 for t in ds.index[::24])


# ---------------------------------------------------------------- windows


def test_eight_days_one_window():
    ds = dataset(T0, 192)
    ws = build_windows(ds)
    assert len(ws) == 1
    assert ws.target_dates[0] == np.datetime64("2020-01-08")
    np.testing.assert_array_equal(ws.targets[0], 1000 + np.arange(168, 192.0))
    assert ws.inputs.shape == (1, 168, 2)


def test_nine_days_two_windows():
    assert len(build_windows(dataset(T0, 216))) == 2


def test_seven_days_no_window():
    with pytest.raises(DatasetError):
        build_windows(dataset(T0, 168))


def test_weekend_pairing_counts():
    # 2020-01-04 is a Saturday; eight consecutive weekends
    ds = filter_weekends(dataset(hour("2020-01-04T00"), 24 * 7 * 8))
    assert len(ds) == 16 * 24
    ws = build_windows(ds, weekend_pairing=True)
    assert len(ws) == 9
    days = np.unique(ds.index.astype("datetime64[D]"))
    np.testing.assert_array_equal(ws.target_dates, days[7:])
    # first sample: inputs are the first 7 weekend days, in order
    first_in = ws.input_times[0].astype("datetime64[D]")
    np.testing.assert_array_equal(np.unique(first_in), days[:7])
    assert (np.diff(ws.input_times[0]) > np.timedelta64(0, "h")).all()


def test_no_leakage_in_windows():
    bundle = generate_synthetic(SynthConfig(seed=2, n_days=60, shift_day=40))
    ds = build_dataset(bundle, ["weather"])
    for ws in (build_windows(ds), build_windows(filter_weekends(ds), weekend_pairing=True)):
        first_target = ws.target_dates.astype("datetime64[h]")
        assert (ws.last_input_time < first_target).all()


def test_window_for_day_matches_build():
    ds = dataset(T0, 24 * 12)
    ws = build_windows(ds)
    np.testing.assert_array_equal(window_for_day(ds, ws.target_dates[2]), ws.inputs[2])
    with pytest.raises(RangeError):
        window_for_day(ds, "2020-01-03")


# ---------------------------------------------------------------- normalisation


def test_norm_two_values():
    ds = align([HourlySeries("load", T0, np.tile([0.0, 2.0], 96))], "load")
    ws = build_windows(ds)
    stats = fit_norm(ws)
    assert stats.mean[0] == 1.0 and stats.sd[0] == 1.0
    normed = apply_norm(ws, stats)
    assert set(np.unique(normed.inputs)) == {-1.0, 1.0}


def test_norm_round_trip():
    ws = build_windows(dataset(T0, 24 * 20, n_exo=2))
    stats = fit_norm(ws)
    normed = apply_norm(ws, stats)
    back = invert_target(normed.targets, stats)
    np.testing.assert_allclose(back, ws.targets, rtol=1e-9)


def test_zero_filled_covid_flagged_constant():
    cfg = SynthConfig(seed=1, n_days=60, shift_day=50)
    ds = build_dataset(generate_synthetic(cfg), ["covid"])
    pre = ds.between(ds.start, hour(cfg.shift_date))
    stats = fit_norm(build_windows(pre))
    flags = dict(zip(stats.channel_names, stats.constant))
    assert flags == {"load_mw": False, "new_cases": True, "new_deaths": True}
    assert stats.sd[1] == 1.0
