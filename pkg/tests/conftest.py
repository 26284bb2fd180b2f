"""Shared fixtures: the bundled example systems and the acceptance summary."""

import re

import pytest

from solenoidk.graph_substitution import SubstitutionSystem


def make_aab_ab():
    return SubstitutionSystem.of("ab", {"a": "aab", "b": "ab"})


def make_two_solenoid():
    return SubstitutionSystem.of("a", {"a": "aa"})


def make_three_solenoid():
    return SubstitutionSystem.of("a", {"a": "aaa"})


def make_ab_ab():
    return SubstitutionSystem.of("ab", {"a": "ab", "b": "ab"})


def make_swap_flattening_failure():
    return SubstitutionSystem.of("ab", {"a": "ab", "b": "ba"})


@pytest.fixture
def aab_ab():
    return make_aab_ab()


@pytest.fixture
def two_solenoid():
    return make_two_solenoid()


@pytest.fixture
def three_solenoid():
    return make_three_solenoid()


@pytest.fixture
def ab_ab():
    return make_ab_ab()


@pytest.fixture(params=["aab_ab", "two_solenoid", "ab_ab"])
def bundled_system(request):
    return {
        "aab_ab": make_aab_ab,
        "two_solenoid": make_two_solenoid,
        "ab_ab": make_ab_ab,
    }[request.param]()


CRITERION_TITLES = {
    1: "aab/ab end-to-end values",
    2: "2-solenoid pipeline",
    3: "ab/ab pipeline",
    4: "periodic point counts vs oracle",
    5: "shift-equivalence identities",
    6: "expansiveness cover separation",
    7: "integer linear algebra suite",
    8: "certified entropy enclosures",
    9: "operator K-theory rank identity",
}

_CRITERION_PAT = re.compile(r"test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    agg = {}
    for outcome in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _CRITERION_PAT.search(getattr(rep, "nodeid", ""))
            if not m:
                continue
            n = int(m.group(1))
            agg.setdefault(n, True)
            if outcome != "passed":
                agg[n] = False
    if not agg:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(agg):
        status = "PASS" if agg[n] else "FAIL"
        title = CRITERION_TITLES.get(n, "")
        terminalreporter.write_line(f"ACCEPTANCE CRITERION {n} ({title}): {status}")
