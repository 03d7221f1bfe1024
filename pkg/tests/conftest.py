import numpy as np
import pytest

from vqapde.objective import BoundarySpec, dirichlet, neumann, periodic, robin

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def f_step(n: int) -> np.ndarray:
    """+1 left of x = 0.5, -1 right of it (the compatible pure-Neumann source)."""
    n_p = 2**n
    x = (np.arange(n_p) + 1) / (n_p + 1)
    return np.where(x < 0.5, 1.0, -1.0)


def boundary_cases(n: int) -> dict:
    """The seven steady settings: name -> (BoundarySpec, source)."""
    return {
        "periodic": (BoundarySpec(periodic(), periodic()), 0.0),
        "dirichlet": (BoundarySpec(dirichlet(0), dirichlet(0)), 1.0),
        "neumann": (BoundarySpec(neumann(0), neumann(0)), f_step(n)),
        "inhomog_dirichlet": (BoundarySpec(dirichlet(0.01), dirichlet(-0.02)), 1.0),
        "inhomog_neumann": (BoundarySpec(neumann(-1), neumann(-1)), f_step(n)),
        "mixed": (BoundarySpec(neumann(0), dirichlet(0)), 1.0),
        "robin": (BoundarySpec(robin(-1, 1, 1), robin(1, 1, 1)), 1.0),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
