import pytest

from riesz_annulus.balayage import SolveConfig
from riesz_annulus.iba import assemble_minimizer, find_lambda_star, run_iba

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def cfg():
    return SolveConfig()


@pytest.fixture(scope="session")
def trace07(cfg):
    return run_iba(0.7, cfg)


@pytest.fixture(scope="session")
def trace03(cfg):
    return run_iba(0.3, cfg)


@pytest.fixture(scope="session")
def lambda_star07(cfg, trace07):
    return find_lambda_star(0.7, cfg, trace07)


@pytest.fixture(scope="session")
def minimizer13(cfg, trace07):
    return assemble_minimizer(1.3, cfg, trace07)


@pytest.fixture
def acceptance():
    """Record one verdict line per acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> None:
        prev = ACCEPTANCE.get(number)
        ACCEPTANCE[number] = (ok and (prev is None or prev[0]), detail if prev is None else f"{prev[1]}; {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
