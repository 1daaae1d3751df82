import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "suite",
    max_examples=50,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


import singnls as s


def make_problem(grid, bc, coeffs, source_fn, V=None, source_exponent=None):
    F = s.field_from_function(grid, bc, source_fn)
    V_vals = V if V is not None else np.zeros(grid.num_nodes(bc))
    params = s.NonlinearityParams(coeffs=coeffs, V=V_vals)
    return s.Problem(grid=grid, bc=bc, params=params, F=F, source_exponent=source_exponent)


@pytest.fixture(scope="session")
def unit_grid_32():
    return s.build_grid(s.interval(0, 1), 32)


@pytest.fixture(scope="session")
def unit_grid_64():
    return s.build_grid(s.interval(0, 1), 64)
