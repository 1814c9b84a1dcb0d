import pytest

from compcache.model import ProblemParams, items

# Worked phase-partition example, n=3, k=2
WORKED = items(*(
    "a1 b1 d1 c1 a2 a3 b2 a4 b3 c2 "
    "b4 a5 c3 d2 b1 c4 a3 a2 "
    "a1 a3 b2 b3 b5 d3"
).split())
WORKED_PARAMS = ProblemParams(3, 2)

ACCEPTANCE_RESULTS: dict = {}


@pytest.fixture
def worked_example():
    return list(WORKED)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, msg = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num}: {msg}")
