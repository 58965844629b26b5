import pytest

# criterion number -> (status, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def record(number: int, passed: bool, detail: str):
    ACCEPTANCE[number] = ("PASS" if passed else "FAIL", detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{status} criterion {number}: {detail}")


@pytest.fixture(scope="session")
def problems():
    """Problems built once per session, keyed by (profile, alpha, beta)."""
    from swanson.pipeline import make_problem

    cache = {}

    def get(profile, alpha=0.0, beta=0.0, **kw):
        key = (profile, alpha, beta, tuple(sorted(kw.items())))
        if key not in cache:
            cache[key] = make_problem(profile=profile, alpha=alpha, beta=beta, **kw)
        return cache[key]

    return get
