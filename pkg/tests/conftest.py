from __future__ import annotations

import pytest

from sdnadmit import PhysicalNetwork, WeightParams, serial_chain

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def single_edge():
    """Two nodes joined by one link of capacity 60; with p_max = b_max = k = 1, phi is exactly 2."""
    net = PhysicalNetwork.from_lists([("u", 60), ("v", 60)], [("e", "u", "v", 60)])
    return net, WeightParams(p_max=1, b_max=1, k=1)


@pytest.fixture
def triangle():
    net = PhysicalNetwork.from_lists(
        [("u", 100), ("v", 100), ("w", 100)],
        [("uw", "u", "w", 100), ("wv", "w", "v", 100), ("uv", "u", "v", 100)],
    )
    req = serial_chain([{"w"}], [1, 1], 3, source="u", sink="v", request_id="tri")
    return net, req


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item._failed = rep.failed
