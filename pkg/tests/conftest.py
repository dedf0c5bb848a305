from functools import lru_cache

import pytest

from coupledtandem.model import REFERENCE_PARAMS, ModelParams
from coupledtandem.oracle import oracle_metrics, solve

_criteria: list[tuple[int, str, bool, str]] = []


@lru_cache(maxsize=None)
def _solved(params: ModelParams, N: int):
    table = solve(params, N)
    return table, oracle_metrics(table)


@pytest.fixture(scope="session")
def ctmc():
    """``ctmc(params, N=200) -> (table, metrics)``, memoised for the whole session."""
    def get(params: ModelParams, N: int = 200):
        return _solved(params, N)
    return get


@pytest.fixture
def reference():
    return REFERENCE_PARAMS


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    detail = dict(item.user_properties).get("detail", "")
    if rep.failed and call.excinfo is not None:
        detail = (detail + " | " if detail else "") + call.excinfo.exconly().splitlines()[0][:160]
    _criteria.append((mark.args[0], mark.args[1], rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, title, ok, detail in sorted(_criteria):
        terminalreporter.write_line(f"criterion {number} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
