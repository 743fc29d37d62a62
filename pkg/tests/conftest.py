import pytest

from loopalg.tl_algebra import SpectralParams

_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(params=[0.41, 1.13, 2.6], ids=lambda x: f"lam={x}")
def generic(request):
    return SpectralParams.real(request.param, 0.3 * request.param)
