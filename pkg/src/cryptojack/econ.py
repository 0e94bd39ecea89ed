"""Profit/loss model of a cryptojacking session and website-scale revenue.

Hash rate ``h`` is in hashes/second and session lengths are handled in
seconds internally; device tables quote minutes.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction

import numpy as np

from .errors import ZeroHashRate, ZeroTarget

SECONDS_PER_YEAR = 365 * 24 * 3600


@dataclass(frozen=True)
class EconParams:
    payout_rate: float = 2.894e-5  # XMR per 10^6 hashes
    xmr_price: float = 200.0  # USD per XMR
    electricity_cost: float = 6.418e-5  # USD per watt-hour

    def __post_init__(self):
        for name in ("payout_rate", "xmr_price", "electricity_cost"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def hashes_per_xmr(self) -> float:
        return 1e6 / self.payout_rate


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    power_draw: float  # W
    recharge_time_per_percent: float  # hours to recharge 1% of battery
    session_minutes: float
    baseline_end_battery: float  # b_n, %
    cj_end_battery: dict  # throttle -> b_c, %
    hash_rate: dict  # throttle -> hashes/s
    start_battery: float = 100.0

    def __post_init__(self):
        if not 0 <= self.baseline_end_battery <= self.start_battery <= 100:
            raise ValueError("need 0 <= b_n <= b_s <= 100")
        if set(self.cj_end_battery) != set(self.hash_rate):
            raise ValueError("cj_end_battery and hash_rate must cover the same throttles")
        alphas = sorted(self.hash_rate)
        for a in alphas:
            if not 0 <= self.cj_end_battery[a] <= self.baseline_end_battery:
                raise ValueError(f"b_c({a}) outside [0, b_n]")
        h = [self.hash_rate[a] for a in alphas]
        bc = [self.cj_end_battery[a] for a in alphas]
        if any(x < y for x, y in zip(h, h[1:])):
            raise ValueError("hash rate must be non-increasing in throttle")
        if any(x > y for x, y in zip(bc, bc[1:])):
            raise ValueError("b_c must be non-decreasing in throttle")

    def _anchors(self, table: dict, at_full_throttle: float) -> tuple[list, list]:
        alphas = sorted(a for a in table if a < 1.0)
        return alphas + [1.0], [table[a] for a in alphas] + [at_full_throttle]

    def end_battery(self, alpha: float | None) -> float:
        """Battery at the end of a session; ``None`` means no mining.

        Measured throttles are reproduced exactly; other values are linearly
        interpolated, with throttle 1.0 pinned to the baseline and values below
        the smallest measured throttle extrapolated from the first segment.
        """
        if alpha is None:
            return self.baseline_end_battery
        _check_alpha(alpha)
        xs, ys = self._anchors(self.cj_end_battery, self.baseline_end_battery)
        return min(self.baseline_end_battery, max(0.0, _interp(alpha, xs, ys)))

    def rate_at(self, alpha: float) -> float:
        _check_alpha(alpha)
        xs, ys = self._anchors(self.hash_rate, 0.0)
        return max(0.0, _interp(alpha, xs, ys))


def _check_alpha(alpha: float) -> None:
    if not 0 <= alpha <= 1:
        raise ValueError(f"throttle must be in [0, 1], got {alpha}")


def _interp(x: float, xs: list, ys: list) -> float:
    if x in xs:
        return float(ys[xs.index(x)])
    if x < xs[0]:
        slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
        return float(ys[0] + slope * (x - xs[0]))
    return float(np.interp(x, xs, ys))


# Measured device rows. Windows recharge time is the published 0.015 h/%;
# Linux and Android have no published value and use the geometric-mean fit
# of L / (C * W * (b_n - b_c)) over their three rows.
DEVICES: dict[str, DeviceProfile] = {
    "windows": DeviceProfile(
        name="windows", power_draw=65.0, recharge_time_per_percent=0.015, session_minutes=85,
        baseline_end_battery=82, cj_end_battery={0.1: 10, 0.5: 19, 0.9: 57},
        hash_rate={0.1: 21, 0.5: 14, 0.9: 5},
    ),
    "linux": DeviceProfile(
        name="linux", power_draw=41.0, recharge_time_per_percent=0.04001, session_minutes=71,
        baseline_end_battery=70, cj_end_battery={0.1: 3, 0.5: 22, 0.9: 54},
        hash_rate={0.1: 26, 0.5: 16, 0.9: 5},
    ),
    "android": DeviceProfile(
        name="android", power_draw=9.9, recharge_time_per_percent=0.02652, session_minutes=163,
        baseline_end_battery=76, cj_end_battery={0.1: 11, 0.5: 32, 0.9: 49},
        hash_rate={0.1: 5, 0.5: 3, 0.9: 2},
    ),
}

# Published per-row outcomes: (device, throttle) -> (P USD, L USD, L-P USD, T years)
DEVICE_TABLE: dict[tuple[str, float], tuple[float, float, float, float]] = {
    ("windows", 0.1): (6.4e-4, 4.5e-3, 3.8e-3, 50),
    ("windows", 0.5): (3.1e-4, 3.7e-3, 3.4e-3, 104),
    ("windows", 0.9): (4.4e-5, 1.6e-3, 1.5e-3, 367),
    ("linux", 0.1): (6.6e-4, 5.5e-3, 4.8e-3, 40),
    ("linux", 0.5): (4.1e-4, 4.2e-3, 3.8e-3, 66),
    ("linux", 0.9): (1.3e-4, 2.6e-3, 2.5e-3, 214),
    ("android", 0.1): (2.8e-4, 9.5e-4, 6.7e-4, 220),
    ("android", 0.5): (1.7e-4, 7.2e-4, 5.5e-4, 369),
    ("android", 0.9): (1.1e-4, 5.4e-4, 4.3e-4, 574),
}


def session_profit(h: float, seconds: float, params: EconParams = EconParams()) -> tuple[float, float]:
    """Return ``(XMR, USD)`` earned by ``h`` hashes/s over ``seconds``."""
    if h < 0 or seconds < 0:
        raise ValueError("hash rate and duration must be non-negative")
    xmr = params.payout_rate * (h * seconds) / 1e6
    return xmr, xmr * params.xmr_price


def session_loss(device: DeviceProfile, alpha: float | None, params: EconParams = EconParams()) -> float:
    """Electricity cost (USD) of recharging the extra drain caused by mining at ``alpha``."""
    drain = device.baseline_end_battery - device.end_battery(alpha)
    return params.electricity_cost * device.power_draw * device.recharge_time_per_percent * drain


def time_to_one_xmr(h: float, params: EconParams = EconParams()) -> float:
    """Years needed to mine one XMR at ``h`` hashes/s."""
    if h <= 0:
        raise ZeroHashRate("hash rate must be positive")
    return params.hashes_per_xmr / (h * SECONDS_PER_YEAR)


def site_monthly_revenue(visits: float, avg_duration: float, visitor_hash_rate: float = 20.0,
                         params: EconParams = EconParams()) -> float:
    """USD per month if every visit mines at ``visitor_hash_rate`` for ``avg_duration`` seconds."""
    if min(visits, avg_duration, visitor_hash_rate) < 0:
        raise ValueError("inputs must be non-negative")
    total_hashes = visits * avg_duration * visitor_hash_rate
    return params.payout_rate * total_hashes / 1e6 * params.xmr_price


def parse_mmss(text: str) -> int:
    """``"mm:ss"`` to seconds; a seconds field above 59 is taken literally (``02:98`` -> 218)."""
    minutes, seconds = text.split(":")
    return int(minutes) * 60 + int(seconds)


# (site, visits per month, "mm:ss", published P-CJ in USD)
TOP_SITES = (
    ("google.com", 47.09e9, "07:23", 2.41e6),
    ("youtube.com", 26.22e9, "20:05", 3.65e6),
    ("baidu.com", 19.08e9, "08:56", 1.18e6),
    ("wikipedia.org", 6.55e9, "03:51", 0.17e6),
    ("reddit.com", 1.69e9, "10:38", 0.12e6),
    ("facebook.com", 29.87e9, "13:28", 2.80e6),
    ("yahoo.com", 5.21e9, "06:19", 0.22e6),
    ("google.co.in", 5.33e9, "07:46", 0.29e6),
    ("qq.com", 3.66e9, "04:02", 0.10e6),
    ("taobao.com", 1.73e9, "06:25", 0.08e6),
)

CJ_SITES = (
    ("firefoxchina.cn", 87.24e6, "04:32", 2746.9),
    ("baytpbportal.fi", 12.16e6, "05:36", 472.9),
    ("mejortorrent.com", 22.83e6, "04:50", 766.4),
    ("moonbit.co.in", 15.68e6, "28:37", 3116.5),
    ("shareae.com", 5.86e6, "04:49", 196.0),
    ("maalaimalar.com", 3.38e6, "03:26", 80.6),
    ("icouchtuner.to", 7.96e6, "02:98", 200.8),
    ("paperpk.com", 3.01e6, "03:23", 70.7),
    ("scamadviser.com", 4.20e6, "02:08", 62.2),
    ("seriesdanko.to", 5.44e6, "04:59", 188.2),
)


def battery_trajectory(device: DeviceProfile, alpha: float | None, duration_minutes: float,
                       step_seconds: float = 30.0) -> list[tuple[float, float]]:
    """Piecewise-linear battery level (minute, %) sampled every ``step_seconds``.

    Drain is the baseline rate ``(b_s - b_n) / Δt`` plus a mining surcharge
    that brings the level to ``b_c(alpha)`` at ``Δt``. ``alpha=None`` is a
    session without mining.
    """
    start = device.start_battery
    rate = (start - device.end_battery(alpha)) / device.session_minutes  # % per minute
    if rate > 0 and duration_minutes > start / rate + 1e-9:
        raise ValueError(f"battery empties after {start / rate:.1f} min, before {duration_minutes} min")
    n = int(math.floor(duration_minutes * 60 / step_seconds + 1e-9))
    times = [i * step_seconds / 60 for i in range(n + 1)]
    if times[-1] < duration_minutes:
        times.append(duration_minutes)
    return [(t, start - rate * t) for t in times]


simulate_battery = battery_trajectory


@dataclass(frozen=True)
class PowModel:
    target: int
    block_probability: float
    expected_hashes: float
    network_hash_rate: float
    block_time: float


def pow_block_model(target: int, network_hash_rate: float) -> PowModel:
    """Block probability, expected hashes and block time for a 256-bit ``target``."""
    if target <= 0:
        raise ZeroTarget("target must be positive")
    if target > 2 ** 256:
        raise ValueError("target exceeds 2**256")
    if network_hash_rate <= 0:
        raise ZeroHashRate("network hash rate must be positive")
    p = Fraction(target, 2 ** 256)
    return PowModel(
        target=target,
        block_probability=float(p),
        expected_hashes=float(1 / p),
        network_hash_rate=network_hash_rate,
        block_time=float(1 / p / Fraction(network_hash_rate)),
    )


@dataclass
class SessionEconomics:
    device: str
    throttle: float
    hash_rate: float
    session_minutes: float
    profit_xmr: float
    profit_usd: float
    loss_usd: float
    gap_usd: float
    time_to_one_xmr_years: float | None
    published: dict | None = None
    deltas: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _rel(computed: float, published: float) -> float:
    return (computed - published) / published


def evaluate_session(device: DeviceProfile, alpha: float, params: EconParams = EconParams(),
                     flag_tolerance: float = 0.05) -> SessionEconomics:
    """Profit, loss and time-to-1-XMR for one device/throttle, with deltas to the published row."""
    h = device.rate_at(alpha)
    xmr, usd = session_profit(h, device.session_minutes * 60, params)
    loss = session_loss(device, alpha, params)
    report = SessionEconomics(
        device=device.name,
        throttle=alpha,
        hash_rate=h,
        session_minutes=device.session_minutes,
        profit_xmr=xmr,
        profit_usd=usd,
        loss_usd=loss,
        gap_usd=loss - usd,
        time_to_one_xmr_years=time_to_one_xmr(h, params) if h > 0 else None,
    )
    row = DEVICE_TABLE.get((device.name, alpha))
    if row is not None:
        p, l, gap, years = row
        report.published = {"profit_usd": p, "loss_usd": l, "gap_usd": gap, "time_to_one_xmr_years": years}
        report.deltas = {
            "profit_usd": _rel(usd, p),
            "loss_usd": _rel(loss, l),
            "gap_usd": _rel(loss - usd, gap),
            "time_to_one_xmr_years": _rel(report.time_to_one_xmr_years, years),
        }
        report.flags = [k for k, v in report.deltas.items() if abs(v) > flag_tolerance]
    return report


def load_config(path) -> tuple[EconParams, dict[str, DeviceProfile]]:
    """Read ``{"params": {...}, "devices": {name: {...}}}``; missing parts keep the defaults."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    params = EconParams(**raw.get("params", {}))
    devices = dict(DEVICES)
    for name, spec in raw.get("devices", {}).items():
        spec = dict(spec)
        for key in ("cj_end_battery", "hash_rate"):
            if key in spec:
                spec[key] = {float(a): v for a, v in spec[key].items()}
        base = devices.get(name)
        devices[name] = replace(base, **spec) if base else DeviceProfile(name=name, **spec)
    return params, devices
