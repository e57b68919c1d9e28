import math

import numpy as np
import pytest

from onewaypos.airsim import Scenario, Station, Terminal
from onewaypos.geom import Point
from onewaypos.timebase import PERFECT_CLOCK, Instant

C = 3e8
SQ3 = math.sqrt(3.0)
EQUILATERAL = ((0.0, 0.0), (2.0, 0.0), (1.0, SQ3))


def make_world(stations, truth, *, c=C, seed=1, error_limit=1.0, attacks=(), clock=PERFECT_CLOCK,
               drift_sign=1, scheme="hmac", schedule=(0,), name="world", protocol="unidirectional",
               listen_start=None, bidir=()):
    dims = len(truth)
    sts = tuple(
        Station.create(f"S{i + 1}", p, [Instant(t) for t in schedule], seed, scheme)
        for i, p in enumerate(stations)
    )
    term = Terminal(Point(tuple(truth)), error_limit, clock, drift_sign, listen_start=listen_start)
    return Scenario(name, dims, c, seed, sts, term, tuple(attacks), scheme, protocol, tuple(bidir))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ------------------------------------------------------- acceptance report

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    _CRITERIA[number] = (title, "PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, verdict, detail = _CRITERIA[n]
        line = f"criterion {n}: {verdict}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
