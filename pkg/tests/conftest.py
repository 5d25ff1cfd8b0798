import pytest

# criterion id -> list of (label, residual, tol, passed)
ACCEPTANCE: dict[str, list[tuple[str, float, float, bool]]] = {}


@pytest.fixture
def record():
    def _record(criterion: str, label: str, residual: float, tol: float) -> bool:
        ok = bool(residual < tol)
        ACCEPTANCE.setdefault(criterion, []).append((label, float(residual), tol, ok))
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE, key=lambda c: int(c.split()[0][1:])):
        rows = ACCEPTANCE[crit]
        flag = "PASS" if all(ok for *_, ok in rows) else "FAIL"
        worst = max(rows, key=lambda r: r[1] / r[2] if r[2] else float("inf"))
        tr.write_line(f"{flag}  {crit:<44} worst: {worst[0]} residual={worst[1]:.3e} tol={worst[2]:.0e}")
