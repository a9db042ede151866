import os
from pathlib import Path

import pytest

DATA_DIR = Path(os.environ.get("TOXSPANS_DATA", Path(__file__).resolve().parents[1] / "data"))


def dataset_path(name: str) -> Path:
    path = DATA_DIR / name
    if not path.exists():
        pytest.skip(f"{path} not present; set TOXSPANS_DATA to a directory holding the SemEval-2021 Task 5 CSVs")
    return path


_CRITERIA: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = marker.args


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None or (report.when != "call" and report.passed):
        return
    number, title = marker
    entry = _CRITERIA.setdefault(number, {"title": title, "outcomes": []})
    if report.skipped:
        reason = report.longrepr[-1] if isinstance(report.longrepr, tuple) else ""
        entry["outcomes"].append(("SKIP", reason.removeprefix("Skipped: ")))
    else:
        entry["outcomes"].append(("PASS" if report.passed else "FAIL", ""))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        kinds = [k for k, _ in entry["outcomes"]]
        if "FAIL" in kinds:
            status = "FAIL"
        elif all(k == "SKIP" for k in kinds):
            status = f"SKIP ({entry['outcomes'][0][1]})"
        else:
            status = "PASS"
        terminalreporter.write_line(f"criterion {number:>2} {entry['title']}: {status}")
