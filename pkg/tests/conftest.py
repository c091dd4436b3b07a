import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from aldkit.covers import Cover
from aldkit.generators import path_space
from aldkit.space import from_graph

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def p10():
    return path_space(10)


@pytest.fixture
def two_windows(p10):
    """{0..5} and {4..9} on the ten-point path."""
    return Cover(p10, [range(6), range(4, 10)])


@st.composite
def graph_spaces(draw, min_n=2, max_n=10, max_weight=3):
    """Connected weighted graphs: a random tree plus a few chords."""
    n = draw(st.integers(min_n, max_n))
    edges = []
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges.append((u, v, draw(st.integers(1, max_weight))))
    for _ in range(draw(st.integers(0, n))):
        u, v = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        if u != v:
            edges.append((u, v, draw(st.integers(1, max_weight))))
    return from_graph(n, edges)


@st.composite
def covers_of(draw, space, max_sets=6):
    """A few random subsets, patched with singletons so that they cover."""
    n = space.n
    sets = draw(st.lists(st.sets(st.integers(0, n - 1), min_size=1, max_size=n), min_size=1, max_size=max_sets))
    covered = set().union(*sets)
    sets += [{x} for x in range(n) if x not in covered]
    return Cover(space, sets)


@st.composite
def spaces_with_covers(draw, min_n=2, max_n=10):
    space = draw(graph_spaces(min_n=min_n, max_n=max_n))
    return space, draw(covers_of(space))
