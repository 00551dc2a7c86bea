import shutil
import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
ROOT = HERE.parent
FIXTURES = HERE / "fixtures"
BENCHMARKS = ROOT / "benchmarks"

sys.path.insert(0, str(HERE))


def have_z3() -> bool:
    return shutil.which("z3") is not None


needs_z3 = pytest.mark.skipif(not have_z3(), reason="z3 executable not found")


@pytest.fixture
def fixture_text():
    def read(name: str) -> str:
        return (FIXTURES / name).read_text(encoding="utf-8")

    return read


@pytest.fixture(scope="session")
def z3_config():
    if not have_z3():
        pytest.skip("z3 executable not found")
    from cata.backend import SolverConfig

    return SolverConfig()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
