import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from oneshot_equiv.gf2 import BitMatrix, LinearHash

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@st.composite
def bit_matrices(draw, max_rows=4, max_cols=5):
    rows = draw(st.integers(1, max_rows))
    cols = draw(st.integers(1, max_cols))
    bits = draw(st.lists(st.integers(0, 1), min_size=rows * cols, max_size=rows * cols))
    return BitMatrix(np.array(bits).reshape(rows, cols))


@st.composite
def surjective_hashes(draw, max_n=5):
    n = draw(st.integers(2, max_n))
    m = draw(st.integers(1, n - 1))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    while True:
        h = LinearHash(BitMatrix(rng.integers(0, 2, size=(m, n))))
        if h.surjective:
            return h


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
