import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from shared import ACCEPTANCE, NAMES  # noqa: E402
from gwtails.presets import get_preset  # noqa: E402


@pytest.fixture(scope="session", params=NAMES)
def preset(request):
    return get_preset(request.param)


@pytest.fixture(scope="session")
def models():
    return {n: get_preset(n).model() for n in NAMES}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[k]
        ok = all(p[0] for p in parts)
        detail = "; ".join(p[1] for p in parts)
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
