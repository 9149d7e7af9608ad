import pytest
from hypothesis import HealthCheck, settings

from mwzeta.isocrystal import CurveData
from mwzeta.padic import FieldSpec

settings.register_profile(
    "mwzeta", deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large]
)
settings.load_profile("mwzeta")

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def f5():
    return FieldSpec(5)


@pytest.fixture(scope="session")
def golden_curve(f5):
    return CurveData(f5, [0, 1, 4])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
