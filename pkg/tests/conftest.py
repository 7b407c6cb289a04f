"""Acceptance reporting: one PASS/FAIL line per criterion after the run.

Acceptance tests carry ``@pytest.mark.acceptance(id, title)`` and may attach a
``measured`` user property describing what they observed.
"""

import pytest

_RESULTS = {}
_PROPERTY_BUDGET_S = 10.0


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    key = item.nodeid
    entry = _RESULTS.setdefault(key, {"id": marker.args[0], "title": marker.args[1],
                                      "ok": True, "seconds": 0.0, "measured": ""})
    entry["seconds"] += call.duration
    if call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception):
        entry["ok"] = False
    if call.when == "call":
        for name, value in item.user_properties:
            if name == "measured":
                entry["measured"] = str(value)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    write = terminalreporter.write_line
    terminalreporter.section("acceptance criteria")
    entries = sorted(_RESULTS.values(), key=lambda e: (e["id"].split(".")[0].zfill(3), e["id"]))
    props = [e for e in entries if e["id"].startswith("8.")]
    for e in entries:
        status = "PASS" if e["ok"] else "FAIL"
        suffix = f" | {e['measured']}" if e["measured"] else ""
        write(f"{status} criterion {e['id']}: {e['title']}{suffix}")
        if props and e is props[-1]:
            elapsed = sum(x["seconds"] for x in props)
            ok = all(x["ok"] for x in props) and elapsed < _PROPERTY_BUDGET_S
            write(f"{'PASS' if ok else 'FAIL'} criterion 8: property suite "
                  f"({sum(x['ok'] for x in props)}/{len(props)} green, {elapsed:.1f} s of "
                  f"{_PROPERTY_BUDGET_S:.0f} s budget)")
