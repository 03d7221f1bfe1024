import numpy as np
import pytest
from conftest import boundary_cases, f_step

from vqapde.fd_oracle import (
    SingularProblemError,
    anchor_central,
    boundary_values,
    fd_march,
    fd_solve_steady,
    fd_step_transient,
    with_boundary,
)
from vqapde.objective import BoundarySpec, ProblemSpec, dirichlet, neumann

# grid values including both boundary nodes, read off the published FD data
PROFILES = {
    "dirichlet": [0, 0.08, 0.12, 0.12, 0.08, 0],
    "neumann": [0.08, 0.08, 0.04, -0.04, -0.08, -0.08],
    "inhomog_dirichlet": [0.01, 0.084, 0.118, 0.112, 0.066, -0.02],
    "inhomog_neumann": [0.58, 0.38, 0.14, -0.14, -0.38, -0.58],
    "mixed": [0.4, 0.4, 0.36, 0.28, 0.16, 0],
    "robin": [-0.062857142857, 0.074285714286, 0.171428571429, 0.228571428571, 0.245714285714, 0.222857142857],
}


def _problem(name, **kw):
    bspec, src = boundary_cases(2)[name]
    return ProblemSpec(2, bspec, src, **kw)


def test_homogeneous_dirichlet_exact():
    y = fd_solve_steady(_problem("dirichlet"))
    assert np.abs(y - [0.08, 0.12, 0.12, 0.08]).max() < 1e-12


@pytest.mark.parametrize("name", list(PROFILES))
def test_published_profiles_with_boundary(name):
    p = _problem(name)
    x, y = with_boundary(p, fd_solve_steady(p))
    assert np.allclose(x, np.linspace(0, 1, 6))
    assert np.abs(y - PROFILES[name]).max() < 1e-11


def test_zero_source_gives_zero():
    p = ProblemSpec(3, BoundarySpec(dirichlet(0), dirichlet(0)), 0.0)
    assert not fd_solve_steady(p).any()


def test_singular_without_anchor_raises():
    with pytest.raises(SingularProblemError):
        fd_solve_steady(_problem("neumann"), anchor=False)


def test_neumann_anchored_antisymmetric():
    for n in (2, 3, 4):
        p = ProblemSpec(n, BoundarySpec(neumann(0), neumann(0)), f_step(n))
        y = fd_solve_steady(p)
        assert np.abs(y + y[::-1]).max() < 1e-12


def test_symmetry_to_round_off():
    # banded LU eliminates in one direction, so mirror symmetry holds to a few ulp
    for n in (2, 3, 4, 5, 6):
        y = fd_solve_steady(ProblemSpec(n, BoundarySpec(dirichlet(0), dirichlet(0)), 1.0))
        assert np.abs(y - y[::-1]).max() <= 1e-14 * np.abs(y).max()


def test_heat_first_step_matches_published():
    p = ProblemSpec(2, BoundarySpec(dirichlet(1), dirichlet(0)), 0.0, dt=0.02, n_steps=1, initial=0.0)
    y = fd_step_transient(p, np.zeros(4))
    ref = [0.26794258373205737, 0.07177033492822965, 0.019138755980861236, 0.004784688995215308]
    assert np.abs(y - ref).max() < 1e-9


def test_steady_state_is_fixed_point():
    steady = _problem("mixed")
    y = fd_solve_steady(steady)
    p = _problem("mixed", dt=0.01, initial=y)
    assert np.abs(fd_step_transient(p, y) - y).max() < 1e-12


def test_large_dt_limit():
    for name in ("dirichlet", "mixed", "robin", "inhomog_dirichlet"):
        p = _problem(name, dt=1e12, initial=0.0)
        assert np.abs(fd_step_transient(p, np.zeros(4)) - fd_solve_steady(_problem(name))).max() < 1e-8


def test_maximum_principle():
    p = ProblemSpec(3, BoundarySpec(dirichlet(1), dirichlet(-0.5)), 0.0, dt=0.01, n_steps=50, initial=0.3)
    ys = fd_march(p)
    assert ys.shape == (50, 8)
    assert ys.min() >= -0.5 - 1e-14 and ys.max() <= 1 + 1e-14


def test_transient_errors():
    with pytest.raises(ValueError):
        fd_step_transient(_problem("dirichlet"), np.zeros(4))
    with pytest.raises(ValueError):
        fd_march(_problem("dirichlet", dt=0.1))


def test_periodic_anchored():
    p = ProblemSpec(2, boundary_cases(2)["periodic"][0], [1.0, -1.0, 1.0, -1.0])
    y = fd_solve_steady(p)
    assert abs(0.5 * (y[1] + y[2])) < 1e-14
    lo, hi = boundary_values(p, y)
    assert lo == y[-1] and hi == y[0]


def test_anchor_central():
    y = anchor_central(np.array([1.0, 2.0, 4.0, 5.0]))
    assert np.allclose(y, [-2, -1, 1, 2])
