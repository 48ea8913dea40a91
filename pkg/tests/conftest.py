import pytest

from edca_cycle import AccessCategoryClass, AccessMode, PhyProfile, Scenario

ACCEPTANCE_LINES: list[str] = []


def ac(index, aifsn, cw_min, population, max_stage=3, retry_limit=7, payload_bytes=1000):
    return AccessCategoryClass(index=index, aifsn=aifsn, cw_min=cw_min, max_stage=max_stage,
                               retry_limit=retry_limit, population=population,
                               payload_bytes=payload_bytes)


def two_class(n1=10, n3=10, aifsn1=3, cw1=31, aifsn3=2, cw3=15,
                   mode=AccessMode.RTS_CTS):
    return Scenario((ac(1, aifsn1, cw1, n1), ac(3, aifsn3, cw3, n3)), PhyProfile(), mode)


def single(population=1, cw_min=15, aifsn=2, mode=AccessMode.RTS_CTS, **kw):
    return Scenario((ac(3, aifsn, cw_min, population, **kw),), PhyProfile(), mode)


@pytest.fixture
def record():
    def _record(number: int, ok: bool, detail: str):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {detail}")
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
