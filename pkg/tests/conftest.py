import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from predim.dimension import Alpha
from predim.structures import graph


@st.composite
def graphs(draw, max_n=8, p_num=40):
    n = draw(st.integers(min_value=1, max_value=max_n))
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if draw(st.integers(0, 99)) < p_num:
                edges.append((i, j))
    return graph(range(n), edges)


@st.composite
def rational_alphas(draw, max_den=9):
    den = draw(st.integers(min_value=2, max_value=max_den))
    num = draw(st.integers(min_value=1, max_value=den - 1))
    return Alpha.rational(Fraction(num, den))


def random_graph(rng: random.Random, n: int, p: float):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return graph(range(n), edges)


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
