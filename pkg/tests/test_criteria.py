import math

import numpy as np
import pytest
from hypothesis import given

from modop.algebra import make_algebra
from modop.errors import UndecidableTail
from modop.hilbert_module import make_module
from modop.operators import BoundedOperator, random_operator
from modop.unbounded import (
    ExplicitFamily,
    GrowthDescriptor,
    ScalarFamily,
    TailBound,
    block_identities,
    closed_range_check,
    graph_inclusion,
    identities_hold,
    kernel_range_identities,
    kucerovsky_geometric_check,
    make_diag_operator,
    regularity_check,
    scalar_cell_operator,
)

from conftest import module_pairs, seeds


def nilpotent():
    cell = make_module(make_algebra([1]), [2])
    base = BoundedOperator(cell, cell, [[[0, 1], [0, 0]]])
    return make_diag_operator(cell, cell, ScalarFamily("poly-scalar", base, 1.0, 1.0))


def test_closed_range_canonical_pair():
    cert = closed_range_check(scalar_cell_operator("poly-scalar", 1.0, 1.0), 32)
    assert cert.verdict and abs(cert.c - 1.0) <= 1e-9 and cert.argmin == 1
    cert = closed_range_check(scalar_cell_operator("reciprocal", 1.0, 1.0), 32)
    assert not cert.verdict and cert.c == 0.0
    assert cert.materialized_min == pytest.approx(1 / 32)


def test_closed_range_zero():
    cert = closed_range_check(scalar_cell_operator("constant", 0.0), 8)
    assert cert.verdict and math.isinf(cert.c)
    assert cert.to_json()["c"] == "+inf"


def test_closed_range_undecidable():
    cell = make_module(make_algebra([1]), [1])
    one = BoundedOperator(cell, cell, [[[1.0]]])
    g = GrowthDescriptor(TailBound(1.0, -1.0), TailBound(1.0), 1)
    t = make_diag_operator(cell, cell, ScalarFamily("constant", one, 1.0), g)
    with pytest.raises(UndecidableTail):
        closed_range_check(t, 4)


def test_closed_range_matches_singular_values(rng):
    # oracle: brute-force minimum of nonzero singular values
    A = make_algebra([2, 3])
    E, F = make_module(A, [3, 1]), make_module(A, [2, 2])
    B = random_operator(E, F, rng)
    t = make_diag_operator(E, F, ScalarFamily("poly-scalar", B, 0.8, 1.0))
    s = min(np.linalg.svd(b, compute_uv=False)[-1] for b in B.blocks if b.size and min(b.shape))
    cert = closed_range_check(t, 10)
    assert cert.verdict and cert.c == pytest.approx(0.8 * s, rel=1e-10)


@pytest.mark.parametrize("t", [scalar_cell_operator("poly-scalar", 1.0, 1.0),
                               scalar_cell_operator("constant", 0.0), nilpotent()],
                         ids=["diag-j", "zero", "nilpotent"])
def test_regular(t):
    cert = regularity_check(t, 12, c_samples=(0.5, 1.0, 10.0))
    assert cert.verdict
    assert cert.adjoint_dense and cert.graph_complemented and cert.biorthogonal_ok
    assert cert.one_plus_tstart_dense
    assert [c for c, _ in cert.kucerovsky_c_values] == [0.5, 1.0, 10.0]
    assert all(ok for _, ok in cert.kucerovsky_c_values)
    assert cert.residuals["c_solve"] <= 1e-9
    assert cert.to_json()["verdict"] is True


@given(module_pairs(), seeds)
def test_regular_random(pair, seed):
    E, F = pair
    rng = np.random.default_rng(seed)
    t = make_diag_operator(E, F, ScalarFamily("poly-scalar", random_operator(E, F, rng), 1.0, 1.0))
    assert regularity_check(t, 6, rng=rng).verdict


def test_geometric_criterion():
    t = scalar_cell_operator("poly-scalar", 1.0, 1.0)
    ev = kucerovsky_geometric_check(t, 6)
    assert ev.verdict and ev.range_is_graph and ev.pe_s_dense and ev.biorthogonal_ok
    assert kucerovsky_geometric_check(scalar_cell_operator("constant", 0.0), 3).verdict
    # S for a different operator: its range is not the graph of t
    wrong = scalar_cell_operator("constant", 2.0)
    bad = kucerovsky_geometric_check(t, 6, inclusion=lambda j: graph_inclusion(wrong.block(j)))
    assert not bad.verdict and not bad.range_is_graph


def test_identities_on_nilpotent():
    res = kernel_range_identities(nilpotent(), 5)
    assert identities_hold(res)
    assert max(res.values()) <= 1e-12


@given(module_pairs(), seeds)
def test_identities_random(pair, seed):
    E, F = pair
    rng = np.random.default_rng(seed)
    X = random_operator(E, F, rng)
    # drop rank so kernels are nontrivial
    blocks = []
    for b in X.blocks:
        if min(b.shape) > 1:
            U, s, Vh = np.linalg.svd(b, full_matrices=False)
            s[-1] = 0.0
            b = (U * s) @ Vh
        blocks.append(b)
    T = BoundedOperator(E, F, blocks)
    res = block_identities(T)
    assert identities_hold(res)


def test_identities_detect_wrong_transform(rng):
    A = make_algebra([2])
    E = make_module(A, [3])
    T = BoundedOperator(E, E, [np.diag([1.0, 2.0, 0.0])])
    F = BoundedOperator(E, E, [np.diag([0.5, 0.5, 0.5])])
    assert not identities_hold(block_identities(T, F=F))
