import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

import golden_data as pd  # noqa: E402
from morgan.canonical import to_pencil_form  # noqa: E402
from morgan.decouple import SolveOptions, solve  # noqa: E402


@pytest.fixture(scope="session")
def ex1():
    return pd.ex1_system()


@pytest.fixture(scope="session")
def ex2():
    return pd.ex2_system()


@pytest.fixture(scope="session")
def ex1_pencil(ex1):
    return to_pencil_form(ex1)


@pytest.fixture(scope="session")
def ex2_pencil(ex2):
    return to_pencil_form(ex2)


@pytest.fixture(scope="session")
def ex1_solution(ex1):
    return solve(ex1, SolveOptions(seed=1729))


@pytest.fixture(scope="session")
def ex2_solution(ex2):
    return solve(ex2, SolveOptions(seed=1729))


@pytest.fixture(scope="session")
def ex1_reference_pencil():
    """PencilForm assembled from the reference Example 1 transformations."""
    return pd.ex1_reference_pencilform()


@pytest.fixture(scope="session")
def ex2_config_15(ex2_pencil):
    from morgan.admissible import enumerate_row_configs

    return enumerate_row_configs(ex2_pencil.sigma, 3)[1]
