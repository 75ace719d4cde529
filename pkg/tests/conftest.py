from importlib import resources
from pathlib import Path

import pytest

from typetower.classtable import parse_class_table, parse_query
from typetower.grammar import parse_grammar
from typetower.simper import parse_simper
from typetower.turing import parse_tm

FIXTURES = Path(str(resources.files("typetower") / "fixtures"))
GOLDEN = Path(__file__).parent / "golden"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def load_tm(name: str):
    return parse_tm(fixture_text(f"{name}.tm"))


def load_table(name: str):
    return parse_class_table(fixture_text(f"{name}.ct"))


def load_grammar(name: str):
    return parse_grammar(fixture_text(f"{name}.grammar"))


def load_simper(name: str):
    return parse_simper(fixture_text(f"{name}.simper"))


@pytest.fixture
def example1():
    return load_table("example1"), parse_query(fixture_text("example1.query"))


@pytest.fixture(scope="session")
def lambig():
    return load_grammar("lambig")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
