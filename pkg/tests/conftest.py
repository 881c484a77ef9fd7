import pytest

from coarse_ends import ScaleLadder, build_instance, generate
from coarse_ends.spaces import SpaceRecipe


def make(name, **params):
    return generate(SpaceRecipe(name, params))


def default_ladder(inst):
    return ScaleLadder.default(inst.truncation_radius)


@pytest.fixture(scope="session")
def line():
    return make("line", N=100)


@pytest.fixture(scope="session")
def squares():
    return make("squares", rho=10_000)


@pytest.fixture(scope="session")
def two_component_graph():
    raw = {"vertices": [0, 1, 2, 10, 11],
           "edges": [(0, 1, 1.5), (1, 2, 2.0), (10, 11, 0.5)]}
    return build_instance(raw, "graph", 0, 100.0)
