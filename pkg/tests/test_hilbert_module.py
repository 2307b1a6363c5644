import numpy as np
import pytest
from hypothesis import given

from modop.algebra import make_algebra, matrix_units, minimal_projection, random_element
from modop.errors import ModuleMismatch, ShapeMismatch
from modop.hilbert_module import (
    a_action,
    basis_vectors,
    biorthogonal_complement,
    direct_sum,
    embed_pair,
    inner_product,
    make_module,
    membership_residual,
    module_from_json,
    orthogonal_complement,
    project_onto,
    random_vector,
    split_pair,
    submodule_equal,
    submodule_from_generators,
    submodule_from_json,
    submodule_from_rows,
    submodule_to_json,
    trace_inner,
    vector_from_json,
    whole_module,
    zero_submodule,
)

from conftest import modules, seeds


def blocks_close(a, b, atol):
    return all(np.allclose(x, y, atol=atol, rtol=0) for x, y in zip(a.blocks, b.blocks))


def test_make_module():
    M2 = make_algebra([2])
    E = make_module(M2, [1])
    assert E.shapes == [(2, 1)]
    F = make_module(make_algebra([2, 3]), [2, 0])
    assert F.shapes == [(2, 2), (3, 0)]
    assert make_module(M2, [0]).is_zero
    with pytest.raises(ShapeMismatch):
        make_module(M2, [1, 1])


def test_column_module_inner_products():
    E = make_module(make_algebra([2]), [1])
    e1 = E.vector([[[1], [0]]])
    np.testing.assert_array_equal(inner_product(e1, e1).blocks[0], [[1, 0], [0, 0]])
    assert trace_inner(e1, e1) == 1


def test_module_mismatch(rng):
    A = make_algebra([2])
    x = random_vector(make_module(A, [1]), rng)
    y = random_vector(make_module(A, [2]), rng)
    with pytest.raises(ModuleMismatch):
        inner_product(x, y)


@given(modules(), seeds)
def test_inner_product_axioms(E, seed):
    rng = np.random.default_rng(seed)
    x, y = random_vector(E, rng), random_vector(E, rng)
    a, b = random_element(E.algebra, rng), random_element(E.algebra, rng)
    assert blocks_close(inner_product(a_action(a, x), y), a * inner_product(x, y), 1e-11)
    assert is_gram_positive(inner_product(x, x))
    assert np.isclose(trace_inner(x, y), np.conj(trace_inner(y, x)), atol=1e-12)
    assert blocks_close(a_action(a * b, x), a_action(a, a_action(b, x)), 1e-11)
    assert blocks_close(a_action(E.algebra.identity(), x), x, 0)


def is_gram_positive(g):
    from modop.algebra import is_positive
    return is_positive(g, tol=1e-9 * max(1.0, max((np.abs(b).max() for b in g.blocks if b.size), default=1.0)))


def test_zero_inner_product_seen_by_matrix_units(rng):
    E = make_module(make_algebra([2, 2]), [3, 2])
    x = random_vector(E, rng)
    Wp = orthogonal_complement(submodule_from_generators(E, [x]))
    y = project_onto(Wp).apply(random_vector(E, rng))
    assert max(np.abs(b).max() for b in inner_product(x, y).blocks) < 1e-12
    assert all(abs(trace_inner(a_action(u, x), y)) < 1e-12 for u in matrix_units(E.algebra))
    # and a pair with nonzero inner product is detected by some matrix unit
    z = random_vector(E, rng)
    assert max(abs(trace_inner(a_action(u, x), z)) for u in matrix_units(E.algebra)) > 1e-3


def test_minimal_projection_masks_rows(rng):
    E = make_module(make_algebra([3]), [2])
    x = random_vector(E, rng)
    ex = a_action(minimal_projection(E.algebra, 0), x)
    np.testing.assert_array_equal(ex.blocks[0][1:], 0)
    np.testing.assert_array_equal(ex.blocks[0][0], x.blocks[0][0])


def test_direct_sum(rng):
    A = make_algebra([2])
    E, F = make_module(A, [1]), make_module(A, [2])
    S = direct_sum(E, F)
    assert S.multiplicities == (3,)
    x, y = random_vector(E, rng), random_vector(F, rng)
    u = embed_pair(x, F.zero())
    w = embed_pair(E.zero(), y)
    assert np.abs(inner_product(u, w).blocks[0]).max() == 0
    x2, y2 = random_vector(E, rng), random_vector(F, rng)
    lhs = inner_product(embed_pair(x, y), embed_pair(x2, y2))
    rhs = inner_product(x, x2) + inner_product(y, y2)
    assert blocks_close(lhs, rhs, 1e-12)
    back_x, back_y = split_pair(embed_pair(x, y), E, F)
    assert blocks_close(back_x, x, 0) and blocks_close(back_y, y, 0)


def test_generators_and_complements():
    E = make_module(make_algebra([2]), [2])
    W = submodule_from_generators(E, [E.vector([[[1, 0], [0, 0]]])])
    assert W.dims == [1]
    np.testing.assert_allclose(np.abs(W.row_spaces[0]), [[1, 0]])
    assert submodule_from_generators(E, []).dims == [0]
    full = submodule_from_generators(E, [E.vector([np.eye(2)])])
    assert full.dims == [2]
    Wp = orthogonal_complement(W)
    np.testing.assert_allclose(np.abs(Wp.row_spaces[0]), [[0, 1]], atol=1e-15)
    assert orthogonal_complement(zero_submodule(E)).dims == [2]
    assert biorthogonal_complement(zero_submodule(E)).dims == [0]


def test_projection_example():
    E = make_module(make_algebra([2]), [2])
    W = submodule_from_rows(E, [[[1, 0]]])
    x = E.vector([[[1, 1], [0, 0]]])
    np.testing.assert_allclose(project_onto(W).apply(x).blocks[0], [[1, 0], [0, 0]])
    y = E.vector([[[1, 2], [3, 4]]])
    assert blocks_close(project_onto(whole_module(E)).apply(y), y, 1e-15)


@given(modules(), seeds)
def test_submodule_invariants(E, seed):
    rng = np.random.default_rng(seed)
    gens = [random_vector(E, rng) for _ in range(rng.integers(0, 3))]
    # rank-one generators give proper submodules
    gens += [E.vector([np.outer(rng.normal(size=n), rng.normal(size=m)) for n, m in E.shapes])]
    W = submodule_from_generators(E, gens)
    assert W.orthonormality_residual() <= 1e-12
    Wp = orthogonal_complement(W)
    assert [a + b for a, b in zip(W.dims, Wp.dims)] == list(E.multiplicities)
    P = project_onto(W)
    assert max(P.residuals().values()) <= 1e-10
    x = random_vector(E, rng)
    px = P.apply(x)
    assert membership_residual(W, px) <= 1e-10
    assert blocks_close(P.apply(px), px, 1e-12)
    assert blocks_close(project_onto(W).apply(project_onto(Wp).apply(x)), E.zero(), 1e-12)
    assert submodule_equal(biorthogonal_complement(W), W)
    # the algebra action preserves membership
    assert membership_residual(W, a_action(random_element(E.algebra, rng), px)) <= 1e-9


def test_basis_vectors_count():
    E = make_module(make_algebra([2, 1]), [2, 3])
    assert len(list(basis_vectors(E))) == 2 * 2 + 1 * 3


def test_json_round_trips(rng):
    E = make_module(make_algebra([2, 3]), [2, 0])
    x = random_vector(E, rng)
    assert module_from_json(E.to_json()) == E
    y = vector_from_json(x.to_json())
    assert blocks_close(x, y, 0)
    W = submodule_from_generators(E, [x])
    W2 = submodule_from_json(submodule_to_json(W))
    assert submodule_equal(W, W2)
