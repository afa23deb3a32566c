import time

ACCEPTANCE = {}
RUNTIME_LIMIT = 600.0
_START = time.perf_counter()


def record(number: int, title: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE[number] = (title, ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    elapsed = time.perf_counter() - _START
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        if number == 12:
            # the property criterion also bounds the runtime of the whole suite
            ok = ok and elapsed < RUNTIME_LIMIT
            detail = f"{detail}; full suite {elapsed:.0f} s (limit {RUNTIME_LIMIT:.0f} s)"
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {number:2d} {title}: {detail}")
