import numpy as np
import pytest
from hypothesis import strategies as st

from gaussbonnet import parse_graph
from gaussbonnet.randgraph import random_connected_graph


@pytest.fixture
def two_vertex():
    return parse_graph("v a 1.0\nv b 1.0\ne a b 1.0\n")


@pytest.fixture
def path3():
    return parse_graph("v a 1\nv b 1\nv c 1\ne a b 1\ne b c 1\n")


@pytest.fixture
def triangle():
    return parse_graph("v a 1\nv b 1\nv c 1\ne a b 1\ne b c 1\ne a c 1\n")


@pytest.fixture
def square():
    return parse_graph("v a 1\nv b 1\nv c 1\nv d 1\ne a b 1\ne b c 1\ne c d 1\ne a d 1\n")


@st.composite
def graphs(draw, min_vertices=2, max_vertices=12):
    """Random connected weighted graphs, driven by a hypothesis-chosen seed."""
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    n = draw(st.integers(min_vertices, max_vertices))
    return random_connected_graph(rng, n), rng
