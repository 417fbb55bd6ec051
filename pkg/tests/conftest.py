ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(number: int, checks: list[tuple[str, bool]], seconds: float) -> bool:
    """Store one criterion's outcome for the end-of-run summary."""
    ok = all(passed for _, passed in checks)
    failed = [name for name, passed in checks if not passed]
    detail = "; ".join(name for name, _ in checks) if ok else "failed: " + "; ".join(failed)
    ACCEPTANCE[number] = (ok, f"{detail} ({seconds:.1f} s)")
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"ACCEPTANCE {number} {'PASS' if ok else 'FAIL'}: {detail}")
