import pytest

from trischur.matrices import build_structured
from trischur.norms import norm_growth_curve

# criterion id -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def record_criterion():
    def record(cid: str, passed: bool, detail: str) -> None:
        ACCEPTANCE[cid] = (bool(passed), detail)

    return record


@pytest.fixture(scope="session")
def hilbert_transform_curve():
    """Spectral norms of the discrete Hilbert transform sections, N = 128 .. 4096."""
    return norm_growth_curve(lambda N: build_structured("hilbert_transform", N), [128, 256, 512, 1024, 2048, 4096], 2.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid, (passed, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {cid}: {detail}")
