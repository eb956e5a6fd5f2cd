import numpy as np
import pytest

from projtuple import validate_tuple

ACCEPTANCE_RESULTS = {}


def diag(*values):
    return np.diag(np.array(values, dtype=np.complex128))


HALF_ONES = 0.5 * np.ones((2, 2), dtype=np.complex128)


@pytest.fixture
def remark_tuple():
    return validate_tuple([diag(1, 1, 0, 0), diag(1, 0, 1, 0), diag(1, 0, 0, 1)])


@pytest.fixture
def oblique_pair():
    return validate_tuple([diag(1, 0), HALF_ONES])


@pytest.fixture
def orthogonal_triple():
    return validate_tuple([diag(1, 1, 0, 0), diag(0, 0, 1, 0), diag(0, 0, 0, 1)])


@pytest.fixture
def record_acceptance(request):
    """Store a criterion's outcome for the terminal summary."""

    def record(number, title, passed, detail=""):
        ACCEPTANCE_RESULTS[number] = (title, bool(passed), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        title, passed, detail = ACCEPTANCE_RESULTS[number]
        status = "PASS" if passed else "FAIL"
        line = f"{status} criterion {number:2d}: {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
