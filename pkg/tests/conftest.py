import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def gen():
    return np.random.Generator(np.random.Philox(12345))


_VERDICTS: list[str] = []


@pytest.fixture
def verdict(capsys):
    """Record and echo one PASS/FAIL line, then fail the test if the check failed."""
    def record(label: str, ok: bool, detail: str = ""):
        line = f"{'PASS' if ok else 'FAIL'} {label}" + (f" ({detail})" if detail else "")
        _VERDICTS.append(line)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
