import numpy as np
import pytest

PARETO_SEED = 20240611
PARETO_N = 100_000


def pareto_samples(seed=PARETO_SEED, n=PARETO_N, index=2.0):
    """Pareto(index) on [1, inf) by inverse CDF: X = V^(-1/index), V uniform."""
    rng = np.random.default_rng(seed)
    return rng.uniform(size=n) ** (-1.0 / index)


@pytest.fixture(scope="session")
def pareto_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "pareto.txt"
    np.savetxt(path, pareto_samples())
    return path


_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _criteria.setdefault(mark.args[0], {"title": mark.args[1], "tests": {}})
            _criteria[mark.args[0]]["tests"][item.nodeid] = None


def pytest_runtest_logreport(report):
    for entry in _criteria.values():
        if report.nodeid in entry["tests"]:
            if report.when == "call" or report.outcome != "passed":
                if entry["tests"][report.nodeid] != "failed":
                    entry["tests"][report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        outcomes = list(entry["tests"].values())
        if any(o is None for o in outcomes):
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status:7s} {entry['title']} ({len(outcomes)} checks)")
