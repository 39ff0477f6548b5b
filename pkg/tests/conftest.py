import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from rispace.stepfn import StepFn1D

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def step_functions(draw, max_cells: int = 12, nonneg: bool = False, scale: float = 10.0):
    """Step functions with cells no shorter than 1e-6 and bounded values."""
    n = draw(st.integers(1, max_cells))
    cuts = draw(st.lists(st.integers(1, 10 ** 6 - 1), min_size=n - 1, max_size=n - 1, unique=True))
    bp = np.concatenate(([0.0], np.sort(np.array(cuts, dtype=float)) / 10 ** 6, [1.0]))
    lo = 0.0 if nonneg else -scale
    vals = draw(st.lists(st.floats(lo, scale, allow_nan=False), min_size=n, max_size=n))
    return StepFn1D(bp, vals)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance criteria log ----------------------------------------------------

_CRITERIA: dict[int, list] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    """Log one checked part of an acceptance criterion; printed at session end."""
    _CRITERIA.setdefault(number, []).append((bool(ok), detail))
    print(f"criterion {number} {'PASS' if ok else 'FAIL'}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        parts = _CRITERIA[number]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
