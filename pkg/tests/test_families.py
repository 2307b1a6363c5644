import math

import numpy as np
import pytest

from modop.algebra import make_algebra
from modop.errors import InconsistentGrowth, ShapeMismatch
from modop.hilbert_module import make_module
from modop.operators import BoundedOperator, random_operator
from modop.unbounded import (
    DiagOperator,
    ExplicitFamily,
    GrowthDescriptor,
    ScalarFamily,
    TailBound,
    TruncationWindow,
    diag_from_json,
    family_to_json,
    make_diag_operator,
    parse_bound,
    scalar_cell_operator,
)


def test_tail_bound_values():
    b = TailBound(2.0, 1.5)
    assert b.value(4) == pytest.approx(16.0)
    assert b.limit() == math.inf and b.trend() == 1
    z = b.then("z")
    assert z.value(1) == pytest.approx(2 / math.sqrt(5))
    assert z.limit() == 1.0
    q = b.then("q")
    assert q.trend() == -1 and q.limit() == 0.0
    assert TailBound(3.0, -1).infimum_from(5) == 0.0
    assert TailBound(3.0, 1).infimum_from(5) == pytest.approx(15.0)


@pytest.mark.parametrize("text", ["2.0*j^1.5", "z(2.0*j^1.0)", "q(z(0.5*j^-1.0))", "3.0*j^0.0"])
def test_parse_round_trip(text):
    b = parse_bound(text)
    assert parse_bound(str(b)) == b


def test_parse_shorthands():
    assert parse_bound("3") == TailBound(3.0)
    assert parse_bound("2*j") == TailBound(2.0, 1.0)
    with pytest.raises(ValueError):
        parse_bound("j**2")


def test_classic_diagonal():
    t = scalar_cell_operator("poly-scalar", 1.0, 1.0)
    assert [t.block(j).blocks[0][0, 0] for j in (1, 2, 7)] == [1, 2, 7]
    r = scalar_cell_operator("reciprocal", 1.0, 1.0)
    assert r.block(4).blocks[0][0, 0] == 0.25
    assert t.growth.lower == TailBound(1.0, 1.0)


def test_inconsistent_growth():
    cell = make_module(make_algebra([1]), [1])
    one = BoundedOperator(cell, cell, [[[1.0]]])
    zero = BoundedOperator(cell, cell, [[[0.0]]])
    fam = ExplicitFamily([one, one, zero], one)
    with pytest.raises(InconsistentGrowth):
        make_diag_operator(cell, cell, fam, GrowthDescriptor(TailBound(1.0), TailBound(1.0), 1, 1))
    # declared bound too optimistic for the tail
    fam2 = ScalarFamily("poly-scalar", one, 1.0, 1.0)
    with pytest.raises(InconsistentGrowth):
        make_diag_operator(cell, cell, fam2, GrowthDescriptor(TailBound(1.0), TailBound(5.0), 1))


def test_cell_mismatch(rng):
    A = make_algebra([2])
    E, F = make_module(A, [1]), make_module(A, [2])
    fam = ScalarFamily("constant", random_operator(E, F, rng), 2.0)
    with pytest.raises(ShapeMismatch):
        make_diag_operator(E, E, fam)


def test_window():
    assert list(TruncationWindow(3).indices()) == [1, 2, 3]
    with pytest.raises(ValueError):
        TruncationWindow(0)


def test_json_round_trip(rng):
    A = make_algebra([2, 1])
    E, F = make_module(A, [2, 1]), make_module(A, [1, 1])
    t = make_diag_operator(E, F, ScalarFamily("poly-scalar", random_operator(E, F, rng), 0.5 + 0.5j, 0.75))
    data = family_to_json(t)
    back = diag_from_json(data)
    assert isinstance(back, DiagOperator)
    for j in (1, 5, 40):
        for a, b in zip(t.block(j).blocks, back.block(j).blocks):
            np.testing.assert_array_equal(a, b)
    assert back.growth == t.growth

    ex = make_diag_operator(E, F, ExplicitFamily([random_operator(E, F, rng)], random_operator(E, F, rng)))
    back = diag_from_json(family_to_json(ex))
    assert back.growth.start == 2
    for a, b in zip(ex.block(9).blocks, back.block(9).blocks):
        np.testing.assert_array_equal(a, b)
