import io
import sys
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import pytest

from attrgram import load_grammar, load_grammar_text

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
sys.path.insert(0, str(Path(__file__).resolve().parent))

# criterion id -> (passed, description); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def mips():
    return load_grammar(FIXTURES / "mips_x86.grammar")


@pytest.fixture(scope="session")
def circle():
    return load_grammar(FIXTURES / "circle.grammar")


@pytest.fixture(scope="session")
def regmap():
    from attrgram import load_register_map
    return load_register_map(FIXTURES / "regmap.txt")


def grammar(text, origin="<test>"):
    return load_grammar_text(text, origin)


def run_cli(*argv, stdin=None):
    """Run the CLI in-process; return (exit code, stdout, stderr)."""
    from attrgram.cli import main

    out, err = io.StringIO(), io.StringIO()
    old_stdin = sys.stdin
    if stdin is not None:
        sys.stdin = io.StringIO(stdin)
    try:
        with redirect_stdout(out), redirect_stderr(err):
            try:
                code = main([str(a) for a in argv])
            except SystemExit as exc:
                code = exc.code
    finally:
        sys.stdin = old_stdin
    return code, out.getvalue(), err.getvalue()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}  {text}")
