import numpy as np
import pytest
from hypothesis import given

from modop.algebra import make_algebra, random_element
from modop.errors import ModuleMismatch
from modop.hilbert_module import (
    a_action,
    basis_vectors,
    inner_product,
    make_module,
    orthogonal_complement,
    random_vector,
    submodule_equal,
    trace_inner,
)
from modop.operators import (
    BoundedOperator,
    absolute_value,
    add,
    adjoint,
    block_diagonal,
    compose,
    decomposition_residuals,
    identity_operator,
    kernel,
    ker_range_decomposition,
    operator_from_json,
    operator_norm,
    operator_to_json,
    random_operator,
    range_,
    scale,
    zero_operator,
)

from conftest import module_pairs, seeds


def same(S, T, atol=0.0):
    return all(np.allclose(a, b, atol=atol, rtol=0) for a, b in zip(S.blocks, T.blocks))


def test_apply_identity_and_zero(rng):
    E = make_module(make_algebra([2, 3]), [2, 1])
    x = random_vector(E, rng)
    assert all(np.array_equal(a, b) for a, b in zip(identity_operator(E)(x).blocks, x.blocks))
    assert all(not b.any() for b in zero_operator(E, E)(x).blocks)
    with pytest.raises(ModuleMismatch):
        identity_operator(make_module(E.algebra, [1, 1]))(x)


@given(module_pairs(), seeds)
def test_adjoint_identity(pair, seed):
    E, F = pair
    rng = np.random.default_rng(seed)
    T = random_operator(E, F, rng)
    Ts = adjoint(T)
    assert same(adjoint(Ts), T)
    x, y = random_vector(E, rng), random_vector(F, rng)
    assert abs(trace_inner(T(x), y) - trace_inner(x, Ts(y))) <= 1e-10 * (1 + operator_norm(T)) * 10
    # algebra-valued identity and A-linearity
    a = random_element(E.algebra, rng)
    for u, v in zip(T(a_action(a, x)).blocks, a_action(a, T(x)).blocks):
        np.testing.assert_allclose(u, v, atol=1e-12)


def test_adjoint_on_full_basis(rng):
    A = make_algebra([2, 1])
    E, F = make_module(A, [2, 1]), make_module(A, [1, 2])
    T = random_operator(E, F, rng)
    Ts = adjoint(T)
    tol = 1e-10 * (1 + operator_norm(T))
    for x in basis_vectors(E):
        for y in basis_vectors(F):
            d = inner_product(T(x), y) - inner_product(x, Ts(y))
            assert max((np.abs(b).max() for b in d.blocks if b.size), default=0) <= tol


def test_compose_bookkeeping(rng):
    A = make_algebra([2])
    E1, E2, E3 = (make_module(A, [m]) for m in (1, 2, 3))
    S, T = random_operator(E2, E3, rng), random_operator(E1, E2, rng)
    ST = compose(S, T)
    assert ST.source == E1 and ST.target == E3
    assert same(compose(T, identity_operator(E1)), T)
    assert same(adjoint(ST), compose(adjoint(T), adjoint(S)), 1e-12)
    with pytest.raises(ModuleMismatch):
        compose(T, S)
    x = random_vector(E1, rng)
    np.testing.assert_allclose(ST(x).blocks[0], S(T(x)).blocks[0], atol=1e-12)
    assert same(add(T, scale(-1, T)), zero_operator(E1, E2), 1e-15)


def test_operator_norm():
    A = make_algebra([1, 1])
    E = make_module(A, [1, 1])
    assert operator_norm(identity_operator(E)) == pytest.approx(1.0)
    T = BoundedOperator(E, E, [[[0.5]], [[2.0]]])
    assert operator_norm(T) == pytest.approx(2.0)


def test_operator_norm_vs_random_sup(rng):
    # sup of ||T x|| over unit vectors (module norm) approaches ||T|| from below
    A = make_algebra([2])
    E, F = make_module(A, [3]), make_module(A, [2])
    T = random_operator(E, F, rng)
    nT = operator_norm(T)
    best = 0.0
    for _ in range(1000):
        x = random_vector(E, rng)
        x = (1 / x.norm()) * x
        best = max(best, T(x).norm())
    assert best <= nT + 1e-9
    assert best >= 0.9 * nT


def test_kernel_range_examples():
    A = make_algebra([2])
    E = make_module(A, [2])
    T = BoundedOperator(E, E, [np.diag([1.0, 0.0])])
    K = kernel(T)
    np.testing.assert_allclose(np.abs(K.row_spaces[0]), [[0, 1]])
    assert kernel(identity_operator(E)).dims == [0]
    assert kernel(zero_operator(E, E)).dims == [2]
    assert range_(identity_operator(E)).dims == [2]
    assert range_(zero_operator(E, E)).dims == [0]


def test_absolute_value():
    A = make_algebra([1])
    E = make_module(A, [1])
    assert same(absolute_value(identity_operator(E)), identity_operator(E), 1e-15)
    assert same(absolute_value(BoundedOperator(E, E, [[[-2.0]]])), BoundedOperator(E, E, [[[2.0]]]),
                1e-15)


@given(module_pairs(), seeds)
def test_kernel_range_identities(pair, seed):
    E, F = pair
    rng = np.random.default_rng(seed)
    rank = [max(min(m, p) - 1, 0) for m, p in zip(E.multiplicities, F.multiplicities)]
    T = random_operator(E, F, rng, rank=rank)
    Ts = adjoint(T)
    assert submodule_equal(orthogonal_complement(range_(T)), kernel(Ts))
    assert submodule_equal(orthogonal_complement(range_(Ts)), kernel(T))
    r = decomposition_residuals(T)
    assert r.worst() <= 1e-9
    assert r.sum_to_identity <= 1e-10 and r.orthogonality <= 1e-10
    # |T|^2 = T^* T
    absT = absolute_value(T)
    assert same(compose(absT, absT), compose(Ts, T), 1e-9 * max(1, operator_norm(T)) ** 2)
    # C*-identity
    assert operator_norm(compose(Ts, T)) == pytest.approx(operator_norm(T) ** 2, rel=1e-9)


def test_ker_range_decomposition_extremes(rng):
    E = make_module(make_algebra([2]), [3])
    P_ker, P_ran = ker_range_decomposition(zero_operator(E, E))
    np.testing.assert_allclose(P_ker.projectors[0], np.eye(3))
    np.testing.assert_allclose(P_ran.projectors[0], 0)
    P_ker, P_ran = ker_range_decomposition(random_operator(E, E, rng))
    np.testing.assert_allclose(P_ker.projectors[0], 0, atol=1e-14)
    np.testing.assert_allclose(P_ran.projectors[0], np.eye(3), atol=1e-14)


def test_block_diagonal_and_json(rng):
    A = make_algebra([2, 1])
    E, F = make_module(A, [1, 2]), make_module(A, [2, 0])
    S, T = random_operator(E, E, rng), random_operator(F, F, rng)
    D = block_diagonal(S, T)
    assert D.source.multiplicities == (3, 2)
    back = operator_from_json(operator_to_json(D))
    assert back.source == D.source and same(back, D)
