"""Shared fixtures, hypothesis strategies, and the acceptance summary hook."""

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from diffnb.dataset import AttributeSpec, Dataset, Schema

settings.register_profile(
    "default",
    max_examples=100,
    deadline=None,
    derandomize=True,
    suppress_health_check=(
        HealthCheck.too_slow,
        HealthCheck.filter_too_much,
        HealthCheck.function_scoped_fixture,
    ),
)
settings.load_profile("default")


# -- shared data fixtures ----------------------------------------------------


def xor_schema() -> Schema:
    return Schema(
        (AttributeSpec("a", "continuous"), AttributeSpec("b", "continuous")),
        ("c0", "c1"),
    )


def xor_dataset() -> Dataset:
    """Four rows; equal classes agree on the diagonal: the window-gating fixture."""
    rows = [((0.0, 0.0), 0), ((1.0, 1.0), 0), ((0.0, 1.0), 1), ((1.0, 0.0), 1)]
    return Dataset.build(xor_schema(), rows)


@pytest.fixture
def xor_data() -> Dataset:
    return xor_dataset()


# -- shared strategies -------------------------------------------------------

finite_values = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)

# half-integer lattice: bin boundaries and member extremes stay exact floats
lattice_values = st.integers(min_value=-60, max_value=60).map(lambda q: q / 2.0)


@st.composite
def small_problems(draw, values=finite_values, max_n=20, max_attrs=4, max_classes=3, max_bins=5):
    """A tiny dataset plus a bin topology for it."""
    m = draw(st.integers(1, max_attrs))
    k = draw(st.integers(2, max_classes))
    n = draw(st.integers(1, max_n))
    row = st.tuples(
        st.lists(values, min_size=m, max_size=m).map(tuple),
        st.integers(0, k - 1),
    )
    rows = draw(st.lists(row, min_size=n, max_size=n))
    schema = Schema(
        tuple(AttributeSpec(f"x{i}", "continuous") for i in range(m)),
        tuple(f"c{j}" for j in range(k)),
    )
    topology = tuple(draw(st.integers(1, max_bins)) for _ in range(m))
    return Dataset.build(schema, rows), topology


@st.composite
def query_rows(draw, m: int, values=finite_values):
    return tuple(draw(st.lists(values, min_size=m, max_size=m)))


# -- acceptance criterion summary ---------------------------------------------
#
# Tests marked @pytest.mark.criterion(n, "title") are tallied per criterion;
# the terminal summary prints exactly one PASS/FAIL/SKIP line for each, so
# the gate's verdict survives output capture.

_WORST = {"PASS": 0, "SKIP": 1, "FAIL": 2}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(num, title): one numbered acceptance criterion"
    )
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    if report.when == "setup" and report.passed:
        return
    num, title = marker.args
    entry = item.config._criteria.setdefault(num, {"title": title, "verdict": "PASS", "notes": []})
    if report.skipped:
        verdict = "SKIP"
        reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else str(report.longrepr)
        reason = reason.removeprefix("Skipped: ")
        if reason not in entry["notes"]:
            entry["notes"].append(reason)
    elif report.failed:
        verdict = "FAIL"
        entry["notes"].append(item.name)
    else:
        verdict = "PASS"
    if _WORST[verdict] > _WORST[entry["verdict"]]:
        entry["verdict"] = verdict


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    criteria = getattr(config, "_criteria", {})
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(criteria):
        entry = criteria[num]
        line = f"criterion {num} ({entry['title']}): {entry['verdict']}"
        if entry["verdict"] != "PASS" and entry["notes"]:
            line += f" -- {'; '.join(entry['notes'])}"
        terminalreporter.write_line(line)
