import numpy as np
import pytest
from hypothesis import settings

from socialrec.model import RatingScale, RatingsTable, SocialGraph

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def scale5():
    return RatingScale(5)


@pytest.fixture
def binary():
    return RatingScale.binary_scale()


@pytest.fixture
def toy_table(scale5):
    return RatingsTable.from_triples(
        [
            ("u1", "i1", 4), ("u1", "i2", 2), ("u1", "i3", 5),
            ("u2", "i1", 5), ("u2", "i2", 1), ("u2", "i4", 3),
            ("u3", "i1", 2), ("u3", "i3", 4), ("u3", "i4", 4),
        ],
        scale5,
    )


@pytest.fixture
def path_graph():
    return SocialGraph.from_edges([("a", "b"), ("b", "c"), ("c", "d")])


def random_table(rng: np.random.Generator, n_users=10, n_items=10, density=0.6, R=5):
    """Random sparse ratings table; every user rates at least one item."""
    triples = []
    for u in range(n_users):
        mask = rng.random(n_items) < density
        mask[rng.integers(n_items)] = True
        for i in np.flatnonzero(mask):
            triples.append((f"u{u}", f"i{i}", int(rng.integers(1, R + 1))))
    return RatingsTable.from_triples(triples, RatingScale(R))


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
