from __future__ import annotations

import random
import string

import pytest

from trident.identity import DeviceProfile
from trident.keystream import MasterKey

ALNUM = string.ascii_lowercase + string.digits

# (criterion number, title, passed) collected from tests marked ``criterion``
_CRITERIA: list[tuple[int, str, bool]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        n, title = marker.args
        _CRITERIA.append((n, title, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n, title, ok in sorted(_CRITERIA):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title}")


@pytest.fixture
def key() -> MasterKey:
    return MasterKey(bytes(range(32)))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240401)


@pytest.fixture
def device() -> DeviceProfile:
    return DeviceProfile("490154203237518", "310150123456789", "5550100")


@pytest.fixture
def other_device() -> DeviceProfile:
    return DeviceProfile("356938035643809", "310260000000001")


def random_credential(rng: random.Random, lo: int = 5, hi: int = 15) -> str:
    return "".join(rng.choice(ALNUM) for _ in range(rng.randint(lo, hi)))


def random_device(rng: random.Random) -> DeviceProfile:
    digits = lambda: "".join(rng.choice(string.digits) for _ in range(15))  # noqa: E731
    return DeviceProfile(digits(), digits())
