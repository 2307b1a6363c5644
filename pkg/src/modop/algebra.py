"""Finite direct sums of full matrix algebras ``M_{n_1} + ... + M_{n_k}``.

These are the finite-dimensional C*-algebras of compact operators.  An
element is a tuple of square complex blocks, one per summand; every
operation acts blockwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _linalg as la
from .errors import AlgebraMismatch, BlockOutOfRange, EmptyAlgebra, InvalidDim, ShapeMismatch

#: Default absolute tolerance for positivity tests.
POSITIVITY_TOL = 1e-9


@dataclass(frozen=True)
class CStarAlgebra:
    """Descriptor of ``M_{n_1} + ... + M_{n_k}``; equal iff ``block_dims`` agree."""

    block_dims: tuple[int, ...]

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def dimension(self) -> int:
        """Linear dimension ``sum n_i^2``."""
        return sum(n * n for n in self.block_dims)

    def identity(self) -> AlgebraElement:
        return AlgebraElement(self, tuple(np.eye(n) for n in self.block_dims))

    def zero(self) -> AlgebraElement:
        return AlgebraElement(self, tuple(np.zeros((n, n)) for n in self.block_dims))

    def element(self, blocks: Sequence) -> AlgebraElement:
        return AlgebraElement(self, tuple(blocks))

    def to_json(self) -> dict:
        return {"block_dims": list(self.block_dims)}


class AlgebraElement:
    """An element of a :class:`CStarAlgebra`, stored as read-only dense blocks."""

    __slots__ = ("algebra", "blocks")

    def __init__(self, algebra: CStarAlgebra, blocks: Sequence):
        if len(blocks) != algebra.num_blocks:
            raise ShapeMismatch(
                f"{len(blocks)} blocks given for an algebra with {algebra.num_blocks}"
            )
        mats = []
        for n, b in zip(algebra.block_dims, blocks):
            b = la.as_matrix(b)
            if b.shape != (n, n):
                raise ShapeMismatch(f"block of shape {b.shape}, expected {(n, n)}")
            mats.append(b)
        self.algebra = algebra
        self.blocks = tuple(mats)

    def __repr__(self) -> str:
        return f"AlgebraElement(block_dims={list(self.algebra.block_dims)})"

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return mul(self, other)
        return scale(other, self)

    def __rmul__(self, other):
        return scale(other, self)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(-1.0, other))

    def __neg__(self):
        return scale(-1.0, self)

    def to_json(self) -> dict:
        return element_to_json(self)


def make_algebra(block_dims: Sequence[int]) -> CStarAlgebra:
    """Build ``M_{n_1} + ... + M_{n_k}``.

    >>> make_algebra([2, 3]).dimension
    13
    """
    dims = list(block_dims)
    if not dims:
        raise EmptyAlgebra("an algebra needs at least one block")
    for n in dims:
        if int(n) != n or n < 1:
            raise InvalidDim(f"block dimension {n!r} is not a positive integer")
    return CStarAlgebra(tuple(int(n) for n in dims))


def _same(a: AlgebraElement, b: AlgebraElement) -> None:
    if a.algebra != b.algebra:
        raise AlgebraMismatch(f"{a.algebra.block_dims} vs {b.algebra.block_dims}")


def mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    _same(a, b)
    return AlgebraElement(a.algebra, [x @ y for x, y in zip(a.blocks, b.blocks)])


def add(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    _same(a, b)
    return AlgebraElement(a.algebra, [x + y for x, y in zip(a.blocks, b.blocks)])


def scale(c: complex, a: AlgebraElement) -> AlgebraElement:
    return AlgebraElement(a.algebra, [c * x for x in a.blocks])


def star(a: AlgebraElement) -> AlgebraElement:
    """Blockwise conjugate transpose (exact)."""
    return AlgebraElement(a.algebra, [la.dagger(x) for x in a.blocks])


def norm(a: AlgebraElement) -> float:
    """C*-norm: the largest singular value over all blocks."""
    return max(la.spectral_norm(x) for x in a.blocks)


def is_positive(a: AlgebraElement, tol: float = POSITIVITY_TOL) -> bool:
    """True iff every block is Hermitian within ``tol`` with spectrum ``>= -tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    for x in a.blocks:
        if np.max(np.abs(x - la.dagger(x)), initial=0.0) > tol:
            return False
        if la.min_eigenvalue(x) < -tol:
            return False
    return True


def trace(a: AlgebraElement) -> complex:
    return complex(sum(np.trace(x) for x in a.blocks))


def matrix_unit(A: CStarAlgebra, block_index: int, row: int, col: int) -> AlgebraElement:
    """The matrix unit ``E_{row,col}`` placed in one block."""
    _check_block(A, block_index)
    blocks = [np.zeros((n, n)) for n in A.block_dims]
    blocks[block_index][row, col] = 1.0
    return AlgebraElement(A, blocks)


def matrix_units(A: CStarAlgebra):
    """Iterate over every matrix unit of ``A`` (a linear basis)."""
    for b, n in enumerate(A.block_dims):
        for r in range(n):
            for c in range(n):
                yield matrix_unit(A, b, r, c)


def _check_block(A: CStarAlgebra, block_index: int) -> None:
    if not 0 <= block_index < A.num_blocks:
        raise BlockOutOfRange(f"block {block_index} not in [0, {A.num_blocks})")


def minimal_projection(A: CStarAlgebra, block_index: int) -> AlgebraElement:
    """Rank-one projection ``E_{11}`` in block ``block_index``, zero elsewhere."""
    return matrix_unit(A, block_index, 0, 0)


def random_element(A: CStarAlgebra, rng: np.random.Generator) -> AlgebraElement:
    return AlgebraElement(A, [la.random_matrix(rng, (n, n)) for n in A.block_dims])


def element_to_json(a: AlgebraElement) -> dict:
    return {
        "block_dims": list(a.algebra.block_dims),
        "blocks": [la.encode_matrix(x) for x in a.blocks],
    }


def element_from_json(data: dict) -> AlgebraElement:
    A = make_algebra(data["block_dims"])
    return AlgebraElement(
        A, [la.decode_matrix(b, (n, n)) for n, b in zip(A.block_dims, data["blocks"])]
    )
