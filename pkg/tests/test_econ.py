import json
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cryptojack import econ
from cryptojack.econ import (
    DEVICES,
    EconParams,
    battery_trajectory,
    evaluate_session,
    load_config,
    parse_mmss,
    pow_block_model,
    session_loss,
    session_profit,
    site_monthly_revenue,
    time_to_one_xmr,
)
from cryptojack.errors import ZeroHashRate, ZeroTarget

P = EconParams()


def test_params_positive():
    with pytest.raises(ValueError):
        EconParams(xmr_price=0)


def test_zero_rate_zero_profit():
    assert session_profit(0, 3600) == (0.0, 0.0)


def test_profit_definition():
    xmr, usd = session_profit(21, 85 * 60)
    assert xmr == pytest.approx(2.894e-5 * 21 * 85 * 60 / 1e6, rel=1e-12)
    assert usd == pytest.approx(xmr * 200, rel=1e-12)


def test_linux_row_profit():
    _, usd = session_profit(26, 71 * 60)
    assert usd == pytest.approx(6.6e-4, rel=0.05)


@settings(max_examples=100)
@given(st.floats(0.1, 1e4), st.floats(1, 1e5), st.floats(0.1, 10))
def test_profit_linear(h, t, k):
    base = session_profit(h, t)[1]
    assert session_profit(k * h, t)[1] == pytest.approx(k * base, rel=1e-12)
    assert session_profit(h, k * t)[1] == pytest.approx(k * base, rel=1e-12)


def test_profit_exact_arithmetic():
    # the same formula over Fractions is exactly linear
    rate = Fraction(2894, 10 ** 8)
    f = lambda h, t: rate * h * t / 10 ** 6 * 200
    assert f(42, 600) == 2 * f(21, 600) == 2 * f(42, 300)


def test_no_drain_no_loss():
    dev = replace(DEVICES["windows"], cj_end_battery={0.1: 82, 0.5: 82, 0.9: 82})
    assert session_loss(dev, 0.1) == 0.0
    assert session_loss(DEVICES["windows"], None) == 0.0


def test_windows_loss_text_value():
    assert session_loss(DEVICES["windows"], 0.1) == pytest.approx(4.5e-3, rel=0.02)


def test_android_half_throttle_loss():
    assert session_loss(DEVICES["android"], 0.5) == pytest.approx(7.2e-4, rel=0.05)


def test_loss_linear_in_drain_and_independent_of_rate():
    dev = DEVICES["linux"]
    per_point = P.electricity_cost * dev.power_draw * dev.recharge_time_per_percent
    for a in (0.1, 0.5, 0.9):
        drain = dev.baseline_end_battery - dev.cj_end_battery[a]
        assert session_loss(dev, a) == pytest.approx(per_point * drain, rel=1e-12)
    faster = replace(dev, hash_rate={a: 10 * h for a, h in dev.hash_rate.items()})
    assert session_loss(faster, 0.5) == session_loss(dev, 0.5)


def test_time_to_one_xmr_definitional():
    h = P.hashes_per_xmr / (365 * 24 * 3600)
    assert time_to_one_xmr(h) == pytest.approx(1.0, rel=1e-12)


def test_time_to_one_xmr_text_value():
    assert time_to_one_xmr(21) == pytest.approx(52, abs=1)


def test_time_to_one_xmr_slow_device():
    assert time_to_one_xmr(5) == pytest.approx(219.1, abs=0.1)


def test_zero_rate_error():
    with pytest.raises(ZeroHashRate):
        time_to_one_xmr(0)


@given(st.floats(0.01, 1e6), st.floats(0.01, 1e6))
def test_time_times_rate_constant(a, b):
    assert time_to_one_xmr(a) * a == pytest.approx(time_to_one_xmr(b) * b, rel=1e-12)


@pytest.mark.parametrize("site,visits,mmss,expected", [
    ("google.com", 47.09e9, "07:23", 2.41e6),
    ("youtube.com", 26.22e9, "20:05", 3.65e6),
    ("firefoxchina.cn", 87.24e6, "04:32", 2746.9),
])
def test_site_revenue_examples(site, visits, mmss, expected):
    assert site_monthly_revenue(visits, parse_mmss(mmss)) == pytest.approx(expected, rel=0.03)


def test_site_revenue_definition():
    assert site_monthly_revenue(1e6, 100, 10) == pytest.approx(2.894e-5 * 1e9 / 1e6 * 200)


def test_mmss():
    assert parse_mmss("07:23") == 443
    assert parse_mmss("02:98") == 218


def test_device_invariants():
    for dev in DEVICES.values():
        assert dev.start_battery == 100
    with pytest.raises(ValueError):
        replace(DEVICES["windows"], cj_end_battery={0.1: 90, 0.5: 19, 0.9: 57})
    with pytest.raises(ValueError):
        replace(DEVICES["windows"], hash_rate={0.1: 1, 0.5: 14, 0.9: 5})


def test_every_row_loses_money():
    for (name, a) in econ.DEVICE_TABLE:
        r = evaluate_session(DEVICES[name], a)
        assert r.gap_usd > 0 and r.profit_usd >= 0 and r.loss_usd >= 0


def test_report_flags_table_deltas():
    r = evaluate_session(DEVICES["windows"], 0.9)
    assert "time_to_one_xmr_years" in r.flags
    assert r.published["time_to_one_xmr_years"] == 367
    assert json.loads(r.to_json())["device"] == "windows"


def test_interpolated_throttle():
    dev = DEVICES["windows"]
    assert dev.rate_at(0.3) == pytest.approx(17.5)
    assert dev.end_battery(0.3) == pytest.approx(14.5)
    assert dev.rate_at(1.0) == 0 and dev.end_battery(1.0) == dev.baseline_end_battery
    with pytest.raises(ValueError):
        dev.rate_at(1.5)


# battery model

@pytest.mark.parametrize("alpha,end", [(None, 82), (0.1, 10), (0.5, 19), (0.9, 57)])
def test_trajectory_endpoints(alpha, end):
    traj = battery_trajectory(DEVICES["windows"], alpha, 85)
    assert traj[0] == (0.0, 100.0)
    assert traj[-1][0] == 85
    assert traj[-1][1] == pytest.approx(end, abs=1e-9)


def test_trajectory_samples_every_30s_and_monotone():
    traj = battery_trajectory(DEVICES["linux"], 0.1, 71)
    times = [t for t, _ in traj]
    assert times[1] - times[0] == 0.5
    assert len(traj) == 71 * 2 + 1
    levels = [b for _, b in traj]
    assert all(x >= y for x, y in zip(levels, levels[1:]))


def test_trajectory_past_empty():
    with pytest.raises(ValueError):
        battery_trajectory(DEVICES["windows"], 0.1, 200)


# block model

def test_maximal_target():
    m = pow_block_model(2 ** 256, 50.0)
    assert (m.block_probability, m.expected_hashes, m.block_time) == (1.0, 1.0, 1 / 50.0)


def test_halved_target():
    m = pow_block_model(2 ** 255, 1.0)
    assert (m.block_probability, m.expected_hashes) == (0.5, 2.0)


def test_block_time_direct_evaluation():
    m = pow_block_model(2 ** 224, 1e18)
    assert m.block_time == pytest.approx(2 ** 32 / 1e18, rel=1e-15)


def test_zero_target():
    with pytest.raises(ZeroTarget):
        pow_block_model(0, 1.0)


# config

def test_load_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"params": {"xmr_price": 300},
                               "devices": {"linux": {"recharge_time_per_percent": 0.03},
                                           "pi": {"power_draw": 5, "recharge_time_per_percent": 0.02,
                                                  "session_minutes": 60, "baseline_end_battery": 90,
                                                  "cj_end_battery": {"0.5": 70}, "hash_rate": {"0.5": 2}}}}))
    params, devices = load_config(cfg)
    assert params.xmr_price == 300 and params.payout_rate == P.payout_rate
    assert devices["linux"].recharge_time_per_percent == 0.03
    assert devices["pi"].rate_at(0.5) == 2
    assert devices["windows"] == DEVICES["windows"]
