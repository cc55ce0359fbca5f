import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from onerank.store import Model, Sample, Store

settings.register_profile(
    "default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=30, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FIXTURES = Path(__file__).parent / "fixtures"


def make_store(models=("A", "B", "C"), samples=("q1",), baseline="base", dim=None) -> Store:
    st = Store(dim)
    st.insert_model(Model(baseline, baseline, "test", True))
    for m in models:
        st.insert_model(Model(m, m, "test"))
    for s in samples:
        st.insert_sample(Sample(s, "bench", "ds"))
    return st


@pytest.fixture
def small_store():
    return make_store()


# acceptance criteria append (number, passed, detail); printed after the run
ACCEPTANCE: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"CRITERION {n}: {'PASS' if ok else 'FAIL'}  {detail}")
