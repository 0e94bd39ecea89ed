import re
from collections import OrderedDict

import pytest

_CRITERIA: "OrderedDict[int, dict]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion this test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m:
            n, title = m.args
            entry = _CRITERIA.setdefault(n, {"title": title, "outcomes": []})
            entry["title"] = title


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if not m:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        failed = rep.failed or (rep.skipped and not hasattr(rep, "wasxfail"))
        detail = ""
        if rep.failed and rep.longrepr is not None:
            text = str(getattr(rep.longrepr, "reprcrash", None) or "")
            detail = re.sub(r"\s+", " ", text.split(":", 2)[-1]).strip()[:160]
        _CRITERIA[m.args[0]]["outcomes"].append((item.name, not failed, detail))


def pytest_terminal_summary(terminalreporter):
    if not any(c["outcomes"] for c in _CRITERIA.values()):
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, c in sorted(_CRITERIA.items()):
        if not c["outcomes"]:
            tr.write_line(f"criterion {n}: NOT RUN  {c['title']}")
            continue
        ok = all(passed for _, passed, _ in c["outcomes"])
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {c['title']}")
        for name, passed, detail in c["outcomes"]:
            if not passed:
                tr.write_line(f"    failed: {name}  {detail}")
