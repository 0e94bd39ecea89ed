"""Acceptance criteria 1-8.

Every test carries ``@pytest.mark.criterion(n, title)``; the terminal summary
prints one PASS/FAIL line per criterion. Tolerances are pinned here and never
loosened to make a row pass.
"""

import math
import time
import warnings
from collections import Counter

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from cryptojack import econ
from cryptojack.corpus import aggregate, scan_html, synthetic_corpus
from cryptojack.fcm import DroppedFeatureWarning, evaluate, fit, fit_best
from cryptojack.featurestats import pearson
from cryptojack.fixtures import feature_table_arrays
from cryptojack.jsmetrics import compute_features
from cryptojack.mineproto import (
    CRYPTOJACKING,
    SUSPICIOUS,
    Scenario,
    check_sequence,
    classify_frame,
    content_verdict,
    run_scenario,
)
from cryptojack.mineproto import frames as F
from cryptojack.mineproto.server import CLOSE_BAD_KEY
from jsgen import programs

C1 = pytest.mark.criterion(1, "clustering reproduction (>=26/28, malicious 10/10, <1 s)")
C2 = pytest.mark.criterion(2, "economics reproduction (9 rows P, L within 5%; worked example within 2%)")
C3 = pytest.mark.criterion(3, "ad-comparison reproduction (20 site rows within 3%)")
C4 = pytest.mark.criterion(4, "time to 1 XMR (3.455e10 hashes; h=21 -> 52 +-1 years)")
C5 = pytest.mark.criterion(5, "protocol scenario (state machine, 256 per share, relay verdicts, <10 s)")
C6 = pytest.mark.criterion(6, "keyless sites are Suspicious, never Cryptojacking")
C7 = pytest.mark.criterion(7, "property suites")
C8 = pytest.mark.criterion(8, "distribution reproduction within 0.1 pp")

P_TOL, WORKED_TOL, SITE_TOL, PP_TOL = 0.05, 0.02, 0.03, 0.1


def _rel(value, expected):
    return abs(value - expected) / abs(expected)


# 1. clustering

@pytest.fixture(scope="module")
def clustering():
    data, labels = feature_table_arrays()
    t = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DroppedFeatureWarning)
        model = fit_best(data, n_clusters=3, m=2.0, restarts=20, seed=0)
    elapsed = time.perf_counter() - t
    return evaluate(model, labels), elapsed


@C1
def test_clustering_accuracy(clustering):
    rep, _ = clustering
    assert rep.correct >= 26, f"{rep.correct}/28 correct, confusion {rep.confusion}"
    assert rep.accuracy >= 92.8


@C1
def test_clustering_malicious_all_correct(clustering):
    rep, _ = clustering
    assert rep.confusion[1][1] == 10, f"confusion {rep.confusion}"


@C1
def test_clustering_runtime(clustering):
    _, elapsed = clustering
    assert elapsed < 1.0


# 2. device economics

ROWS = sorted(econ.DEVICE_TABLE)
ROW_IDS = [f"{d}-{a}" for d, a in ROWS]


@C2
@pytest.mark.parametrize("row", ROWS, ids=ROW_IDS)
def test_device_row_profit(row):
    name, alpha = row
    published = econ.DEVICE_TABLE[row][0]
    r = econ.evaluate_session(econ.DEVICES[name], alpha)
    assert _rel(r.profit_usd, published) <= P_TOL, f"P={r.profit_usd:.3e} vs {published:.3e}"


@C2
@pytest.mark.parametrize("row", ROWS, ids=ROW_IDS)
def test_device_row_loss(row):
    name, alpha = row
    published = econ.DEVICE_TABLE[row][1]
    r = econ.evaluate_session(econ.DEVICES[name], alpha)
    assert _rel(r.loss_usd, published) <= P_TOL, f"L={r.loss_usd:.3e} vs {published:.3e}"


@C2
def test_every_row_loses():
    for name, alpha in ROWS:
        r = econ.evaluate_session(econ.DEVICES[name], alpha)
        assert r.loss_usd - r.profit_usd > 0, (name, alpha)


@C2
def test_worked_example_profit():
    _, usd = econ.session_profit(21, 85 * 60)
    assert _rel(usd, 6.38e-4) <= WORKED_TOL, f"P={usd:.4e}"


@C2
def test_worked_example_loss_and_ratio():
    loss = econ.session_loss(econ.DEVICES["windows"], 0.1)
    _, usd = econ.session_profit(21, 85 * 60)
    assert _rel(loss, 4.5e-3) <= WORKED_TOL, f"L={loss:.4e}"
    assert round(loss / usd) == 7


# 3. ad comparison

SITES = [("top",) + row for row in econ.TOP_SITES] + [("cj",) + row for row in econ.CJ_SITES]


@C3
@pytest.mark.parametrize("table,site,visits,mmss,published", SITES, ids=[f"{t}-{s[0]}" for t, *s in SITES])
def test_site_revenue(table, site, visits, mmss, published):
    usd = econ.site_monthly_revenue(visits, econ.parse_mmss(mmss), visitor_hash_rate=20)
    assert _rel(usd, published) <= SITE_TOL, f"{usd:,.1f} vs {published:,.1f}"


def test_site_tables_have_ten_rows():
    assert len(econ.TOP_SITES) == len(econ.CJ_SITES) == 10


# 4. time to one XMR

@C4
def test_hashes_per_xmr():
    assert _rel(econ.EconParams().hashes_per_xmr, 3.455e10) <= 1e-3


@C4
def test_h21_years():
    assert abs(econ.time_to_one_xmr(21) - 52) <= 1


@C4
def test_table_divergence_is_flagged_not_raised():
    flagged = 0
    for name, alpha in ROWS:
        r = econ.evaluate_session(econ.DEVICES[name], alpha)
        years = econ.DEVICE_TABLE[(name, alpha)][3]
        diverges = _rel(r.time_to_one_xmr_years, years) > 0.05
        assert ("time_to_one_xmr_years" in r.flags) == diverges
        flagged += diverges
    assert flagged > 0


# 5. protocol scenario

@pytest.fixture(scope="module")
def sessions():
    t = time.perf_counter()
    direct = run_scenario(Scenario(name="direct", throttle=0.5))
    relay = run_scenario(Scenario(name="relay", relay=True, throttle=0.5))
    return direct, relay, time.perf_counter() - t


@C5
def test_session_follows_state_machine(sessions):
    direct, relay, _ = sessions
    for r in (direct, relay):
        state = check_sequence(r.miner.log.frames)
        assert r.miner.error is None
        assert state.accepted_hashes == r.miner.accepted_hashes > 0


@C5
def test_each_share_credits_256(sessions):
    direct, relay, _ = sessions
    for r in (direct, relay):
        totals = [f.params["hashes"] for f in r.miner.log.frames if f.kind == "hash_accept"]
        assert totals and all(b - a == 256 for a, b in zip([0] + totals, totals))
        assert sum(r.ledger.values()) == 256 * r.miner.shares


@C5
def test_relay_verdicts(sessions):
    _, relay, _ = sessions
    assert relay.content.status == CRYPTOJACKING
    assert relay.blacklist.status == "Clean"


@C5
def test_scenario_runtime(sessions):
    assert sessions[2] < 10.0


# 6. keyless sites

@C6
@pytest.mark.parametrize("relay", [False, True], ids=["direct", "relay"])
def test_keyless_session_suspicious(relay):
    r = run_scenario(Scenario(name="keyless", site_key="", relay=relay))
    assert r.miner.log.kinds == ["auth"]
    assert r.miner.close_code == CLOSE_BAD_KEY
    assert r.content.status == SUSPICIOUS


@C6
@given(st.lists(st.sampled_from([F.auth(""), F.auth("x" * 32), F.auth("k", "user", "u", 5)]), min_size=1, max_size=20))
def test_auth_only_never_cryptojacking(frames):
    assert content_verdict(frames).status == SUSPICIOUS


@C6
def test_keyless_page_scans_inactive():
    html = '<script src="coinhive.min.js"></script><script>var m = new CoinHive.Anonymous("", {throttle: 0.1});</script>'
    r = scan_html(html)
    assert r.platform == "Coinhive" and not r.active


# 7. property suites

def _close(a, b):
    return abs(a - b) <= 1e-9 * max(1.0, abs(b))


@C7
@settings(max_examples=1000, deadline=None, suppress_health_check=list(HealthCheck))
@given(programs())
def test_halstead_identities_1000(p):
    v = compute_features(p.source)
    assert v.vocabulary == v.distinct_operators + v.distinct_operands
    n = v.total_operators + v.total_operands
    assert _close(v.volume, n * math.log2(v.vocabulary))
    assert _close(v.difficulty, v.distinct_operators / 2 * v.total_operands / v.distinct_operands)
    assert _close(v.effort, v.difficulty * v.volume)
    assert _close(v.time, v.effort / 18)
    assert _close(v.bugs, v.effort ** (2 / 3) / 3000)


@C7
@settings(max_examples=200, deadline=None, suppress_health_check=list(HealthCheck))
@given(programs(), st.integers(1, 4))
def test_each_added_branch_adds_one(p, k):
    base = compute_features(p.source).cyclomatic
    src = p.source
    for i in range(1, k + 1):
        src += f"if (x{i}) {{}}\n"
        assert compute_features(src).cyclomatic == base + i


@C7
@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(4, 30), st.integers(1, 5), st.integers(2, 4))
def test_fcm_100_datasets(seed, n, k, c):
    data = np.random.default_rng(seed).normal(size=(n, k)) * np.arange(1, k + 1)
    model = fit(data, n_clusters=min(c, n), seed=seed)
    assert np.allclose(model.memberships.sum(axis=1), 1.0, atol=1e-9)
    h = np.array(model.history)
    assert np.all(np.diff(h) <= 1e-9 * np.maximum(1.0, np.abs(h[:-1])))


@C7
@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=3, max_size=20),
       st.floats(0.01, 100), st.floats(-100, 100))
def test_pearson_affine_invariance(pairs, a, b):
    x = np.array([p[0] for p in pairs])
    y = np.array([p[1] for p in pairs])
    if np.ptp(x) < 1e-3 or np.ptp(y) < 1e-3:
        return
    r = pearson(x, y)
    assert abs(pearson(a * x + b, y) - r) <= 1e-6
    assert abs(pearson(-a * x + b, y) + r) <= 1e-6


_hex = lambda n: st.text("0123456789abcdef", min_size=n, max_size=n)
_frames = st.one_of(
    st.builds(F.auth, st.text(max_size=40), st.text(max_size=10), st.none() | st.text(max_size=10), st.integers()),
    st.builds(F.authed, st.text(max_size=20), st.integers(0, 2 ** 53)),
    st.builds(F.job, st.text(max_size=20), _hex(152), _hex(8)),
    st.builds(F.submit, st.text(max_size=20), _hex(8), _hex(64)),
    st.builds(F.hash_accept, st.integers(0, 2 ** 53)),
)


@C7
@settings(max_examples=500)
@given(_frames)
def test_frame_round_trip(frame):
    assert classify_frame(frame.serialize()) == frame


@C7
@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 20), st.sampled_from([0.0, 0.25, 0.5, 0.75]), st.integers(256, 3000))
def test_relay_transparency(seed, alpha, budget):
    r = run_scenario(Scenario(name="t", relay=True, seed=seed, throttle=alpha, hash_budget=budget))
    (relay_log,), (server_log,) = r.relay_logs, r.server_logs

    def multiset(log):
        return Counter((e.direction, e.frame.serialize()) for e in log.entries)

    assert multiset(relay_log) == multiset(server_log)


# 8. distributions

@pytest.fixture(scope="module")
def distribution():
    return aggregate(scan_html(html, domain=d) for d, html in synthetic_corpus(seed=0))


TLD_TABLE = [(".com", 34.1), (".net", 6.2), (".si", 6.2), (".online", 6.1), (".ru", 4.2), (".org", 3.3),
             (".sk", 2.9), (".info", 2.9), (".br", 2.7), (".site", 2.0), ("others", 28.8)]


@C8
def test_tld_table(distribution):
    rows = {r["tld"]: r["pct"] for r in distribution["tld"]}
    assert distribution["total"] == 5703
    for tld, pct in TLD_TABLE:
        assert abs(rows[tld] - pct) <= PP_TOL, f"{tld}: {rows[tld]:.2f} vs {pct}"


@C8
@pytest.mark.parametrize("table,key,pct", [
    ("platform", "Coinhive", 81.57),
    ("currency", "Monero", 86.37),
    ("currency", "JSEcoin", 2.61),
    ("currency", "No CJ", 11.01),
])
def test_currency_table(distribution, table, key, pct):
    got = distribution[table][key]["pct"]
    assert abs(got - pct) <= PP_TOL, f"{key}: {got:.2f} vs {pct}"
