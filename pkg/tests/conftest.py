from pathlib import Path

import pytest

from pisem.core import Choice, initial_configuration
from pisem.imp import compile_source

TESTS = Path(__file__).parent
ROOT = TESTS.parent
CORPUS = sorted((TESTS / "corpus").glob("*.imp"))
MUTEX = ROOT / "programs" / "mutex.imp"

# filled by test_acceptance.py, reported at the end of the run
ACCEPTANCE: dict[str, tuple[str, bool]] = {}


def load(path):
    return compile_source(Path(path).read_text())


def contains_choice(term) -> bool:
    if isinstance(term, Choice):
        return True
    if isinstance(term, tuple):
        return any(contains_choice(t) for t in term)
    if hasattr(term, "__dataclass_fields__"):
        return any(contains_choice(getattr(term, f)) for f in term.__dataclass_fields__)
    return False


@pytest.fixture(scope="session")
def corpus():
    return {p.stem: load(p) for p in CORPUS}


@pytest.fixture(scope="session")
def mutex():
    return load(MUTEX)


def initial_of(m):
    return initial_configuration(m.dec, m.cmd)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=int):
        title, ok = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {title}")
