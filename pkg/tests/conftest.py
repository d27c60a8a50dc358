import pytest

from hypfill.filling import FillingParams, build_filling
from hypfill.spaces import generate_space, snowflake, validate_metric

ABC_TABLE = [
    [0.0, 1.0, 10.0],
    [1.0, 0.0, 9.0],
    [10.0, 9.0, 0.0],
]


@pytest.fixture(scope="session")
def abc_space():
    """Three points on a line at positions 0, 1, 10."""
    return validate_metric(ABC_TABLE, ["a", "b", "c"])


@pytest.fixture(scope="session")
def abc_filling(abc_space):
    return build_filling(abc_space, FillingParams(2.0, 4.0, -5, 3))


@pytest.fixture(scope="session")
def line16():
    return generate_space("line", 16)


@pytest.fixture(scope="session")
def line16_filling(line16):
    return build_filling(line16, FillingParams(2.0, 4.0, depth_margin=3))


@pytest.fixture(scope="session")
def line16_flake(line16):
    return snowflake(line16, 0.5)


@pytest.fixture(scope="session")
def rand8():
    return generate_space("random", 8, seed=3)
