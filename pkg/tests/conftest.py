import pytest

from tvl.constructions import cyclic, group_table, random_latin_square
from tvl.core import ColouredBipartiteGraph, latin_to_graph


def cyclic_graph(n: int) -> ColouredBipartiteGraph:
    return latin_to_graph(group_table(cyclic(n)))


def random_square_graph(n: int, seed: int) -> ColouredBipartiteGraph:
    return latin_to_graph(random_latin_square(n, seed=seed))


@pytest.fixture(scope="session")
def z5():
    return cyclic_graph(5)


@pytest.fixture(scope="session")
def z7():
    return cyclic_graph(7)
