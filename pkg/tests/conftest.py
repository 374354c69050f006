"""Acceptance reporting: tests marked ``criterion(n, title)`` get one PASS/FAIL
line each in the terminal summary, driven by the test outcome itself."""

import pytest

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config.stash[_RESULTS] = {}


@pytest.fixture
def detail(request):
    """Attach a short measured value to the criterion line."""

    def add(text: str) -> None:
        request.node.user_properties.append(("detail", text))

    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    if report.when == "setup" and report.passed:
        return
    number, title = marker.args
    details = [v for k, v in item.user_properties if k == "detail"]
    item.config.stash[_RESULTS][number] = (title, report.passed, "; ".join(details))


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, passed, text = results[number]
        line = f"{'PASS' if passed else 'FAIL'}  {number:>2}. {title}"
        terminalreporter.write_line(line + (f"  [{text}]" if text else ""))
    n_pass = sum(r[1] for r in results.values())
    terminalreporter.write_line(f"{n_pass}/{len(results)} criteria passed")
