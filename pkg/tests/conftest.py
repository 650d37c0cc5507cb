import pytest

_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def report():
    """Record one acceptance line; the worst outcome per criterion wins."""

    def record(tag: str, ok: bool, detail: str) -> None:
        prev = _ACCEPTANCE.get(tag)
        if prev is None or (prev[0] and not ok):
            _ACCEPTANCE[tag] = (bool(ok), detail)
        print(f"[{'PASS' if ok else 'FAIL'}] {tag} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for tag in sorted(_ACCEPTANCE, key=lambda s: int(s[2:])):
        ok, detail = _ACCEPTANCE[tag]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {tag} {detail}")
