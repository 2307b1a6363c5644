import sys

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from modop.algebra import make_algebra
from modop.hilbert_module import make_module

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


block_dims = st.lists(st.integers(1, 4), min_size=1, max_size=3)
seeds = st.integers(0, 2**32 - 1)


@st.composite
def modules(draw, max_mult=4, min_mult=0):
    dims = draw(block_dims)
    mult = draw(st.lists(st.integers(min_mult, max_mult), min_size=len(dims), max_size=len(dims)))
    return make_module(make_algebra(dims), mult)


@st.composite
def module_pairs(draw, max_mult=4):
    E = draw(modules(max_mult))
    mult = draw(st.lists(st.integers(0, max_mult), min_size=len(E.multiplicities),
                         max_size=len(E.multiplicities)))
    return E, make_module(E.algebra, mult)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
