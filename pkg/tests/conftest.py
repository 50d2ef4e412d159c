import pytest

_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Recorder for acceptance sub-checks: ``acceptance(criterion, name, passed, detail)``."""
    store = request.config.stash.setdefault(_KEY, {})

    def record(criterion, name, passed, detail):
        store.setdefault(criterion, []).append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    store = config.stash.get(_KEY, None)
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(store):
        checks = store[crit]
        ok = all(p for _, p, _ in checks)
        detail = "; ".join(f"{n}: {'ok' if p else 'FAILED'} ({d})" for n, p, d in checks)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {crit}: {detail}")
