import pytest

from pcngeom import build_graph

_acceptance: dict[str, tuple[str, str]] = {}


@pytest.fixture
def triangle():
    # channels e=(x,y):3, f=(y,z):7, g=(x,z):11
    return build_graph("xyz", [(("x", "y"), 3), (("y", "z"), 7), (("x", "z"), 11)])


@pytest.fixture
def path3():
    return build_graph(["Alice", "Bob", "Carol"], [(("Alice", "Bob"), 10), (("Bob", "Carol"), 11)])


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance[name] = ("PASS" if report.outcome == "passed" else "FAIL", report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        status, dur = _acceptance[name]
        num = name.split("_")[2]
        label = " ".join(name.split("_")[3:])
        terminalreporter.write_line(f"criterion {num:>2}  {status}  {label}  ({dur:.2f}s)")
