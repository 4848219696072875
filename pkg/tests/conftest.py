from pathlib import Path

import pytest

from mgverify.syntax import parse_facts, parse_program
from mgverify.userguide import GuideInput, parse_helper, parse_user_guide

DATA = Path(__file__).parent / "data"


def data_path(name: str) -> str:
    return str(DATA / name)


def load_program(name: str):
    return parse_program((DATA / name).read_text())


def load_guide(name: str):
    return parse_user_guide((DATA / name).read_text())


@pytest.fixture(scope="session")
def primes():
    """The three prime programs: unsafe, safe and optimized."""
    return [load_program(n) for n in ("primes.lp", "primes_safe.lp", "primes_opt.lp")]


@pytest.fixture(scope="session")
def primes_guide():
    return load_guide("primes.ug")


@pytest.fixture(scope="session")
def primes_helper():
    return parse_helper((DATA / "primes.help").read_text())


@pytest.fixture(scope="session")
def orphan():
    return load_program("orphan.lp")


@pytest.fixture(scope="session")
def orphan_short():
    return load_program("orphan_short.lp")


@pytest.fixture(scope="session")
def orphan_guide():
    return load_guide("orphan.ug")


@pytest.fixture(scope="session")
def orphan_functional_guide():
    return load_guide("orphan_functional.ug")


@pytest.fixture(scope="session")
def orphan_input():
    return GuideInput({}, parse_facts((DATA / "orphan_input.lp").read_text()))


# --- acceptance report -------------------------------------------------------

ACCEPTANCE: dict[int, tuple[str, str]] = {}
_RANK = {"PASS": 0, "SKIP": 1, "FAIL": 2}


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    for key, value in report.user_properties:
        if key == "criterion":
            crit = value
    if crit is None:
        return
    number, title = crit
    if report.skipped:
        reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else ""
        entry = ("SKIP", f"{title} ({reason})")
    elif report.failed:
        entry = ("FAIL", title)
    elif report.when == "call":
        entry = ("PASS", title)
    else:
        return
    # a criterion split over several tests reports its worst outcome
    old = ACCEPTANCE.get(number)
    if old is None or _RANK[entry[0]] > _RANK[old[0]]:
        ACCEPTANCE[number] = entry


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, title = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")
