import pytest

# criterion number -> (title, passed, detail)
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    details = [v for k, v in item.user_properties if k == "detail"]
    detail = "; ".join(details)
    if report.failed and call.excinfo is not None:
        detail = (detail + "; " if detail else "") + call.excinfo.exconly().splitlines()[0]
    _CRITERIA[number] = (title, report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {number:2d}. {title}: {detail}")
    n_pass = sum(p for _, p, _ in _CRITERIA.values())
    terminalreporter.write_line(f"{n_pass}/{len(_CRITERIA)} acceptance criteria passed")
