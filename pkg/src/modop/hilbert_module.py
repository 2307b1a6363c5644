"""Hilbert modules over finite sums of matrix algebras.

Block ``i`` of a module with multiplicities ``[m_1, ..., m_k]`` over
``M_{n_1} + ... + M_{n_k}`` is the space of complex ``n_i x m_i`` matrices.
The algebra acts from the left and the inner product is
``<x, y>_i = x_i y_i^*``, an element of the algebra.

Every closed submodule of the ``n x m`` block is ``{x : rows(x) in R}`` for
a subspace ``R`` of ``C^m``, so submodules are stored as per-block
orthonormal row bases and projections act by right multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _linalg as la
from .algebra import AlgebraElement, CStarAlgebra, make_algebra
from .errors import AlgebraMismatch, ModuleMismatch, ShapeMismatch

#: Tolerance for submodule equality via mutual basis containment.
SUBMODULE_TOL = 1e-9


@dataclass(frozen=True)
class HilbertModule:
    algebra: CStarAlgebra
    multiplicities: tuple[int, ...]

    @property
    def shapes(self) -> list[tuple[int, int]]:
        return list(zip(self.algebra.block_dims, self.multiplicities))

    @property
    def is_zero(self) -> bool:
        return not any(self.multiplicities)

    def zero(self) -> ModuleVector:
        return ModuleVector(self, [np.zeros(s) for s in self.shapes])

    def vector(self, blocks: Sequence) -> ModuleVector:
        return ModuleVector(self, blocks)

    def to_json(self) -> dict:
        return module_to_json(self)


class ModuleVector:
    """Element of a :class:`HilbertModule`; one ``n_i x m_i`` block per summand."""

    __slots__ = ("module", "blocks")

    def __init__(self, module: HilbertModule, blocks: Sequence):
        if len(blocks) != len(module.multiplicities):
            raise ShapeMismatch("one block per algebra summand is required")
        mats = []
        for shape, b in zip(module.shapes, blocks):
            b = la.as_matrix(b, shape)
            if b.shape != shape:
                raise ShapeMismatch(f"block of shape {b.shape}, expected {shape}")
            mats.append(b)
        self.module = module
        self.blocks = tuple(mats)

    def __repr__(self) -> str:
        return f"ModuleVector(multiplicities={list(self.module.multiplicities)})"

    def __add__(self, other: ModuleVector) -> ModuleVector:
        _same_module(self, other)
        return ModuleVector(self.module, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: ModuleVector) -> ModuleVector:
        _same_module(self, other)
        return ModuleVector(self.module, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __rmul__(self, c) -> ModuleVector:
        if isinstance(c, AlgebraElement):
            return a_action(c, self)
        return ModuleVector(self.module, [c * b for b in self.blocks])

    def norm(self) -> float:
        """Module norm ``||<x, x>||^{1/2}`` (largest singular value over blocks)."""
        return max((la.spectral_norm(b) for b in self.blocks), default=0.0)

    def to_json(self) -> dict:
        return vector_to_json(self)


def make_module(A: CStarAlgebra, multiplicities: Sequence[int]) -> HilbertModule:
    mults = list(multiplicities)
    if len(mults) != A.num_blocks:
        raise ShapeMismatch(
            f"{len(mults)} multiplicities for an algebra with {A.num_blocks} blocks"
        )
    if any(int(m) != m or m < 0 for m in mults):
        raise ShapeMismatch(f"multiplicities must be nonnegative integers: {mults}")
    return HilbertModule(A, tuple(int(m) for m in mults))


def _same_module(x: ModuleVector, y: ModuleVector) -> None:
    if x.module != y.module:
        raise ModuleMismatch(f"{x.module} vs {y.module}")


def inner_product(x: ModuleVector, y: ModuleVector) -> AlgebraElement:
    """Algebra-valued inner product, linear in the first variable."""
    _same_module(x, y)
    return AlgebraElement(
        x.module.algebra, [a @ la.dagger(b) for a, b in zip(x.blocks, y.blocks)]
    )


def trace_inner(x: ModuleVector, y: ModuleVector) -> complex:
    """Scalar inner product ``trace <x, y>``."""
    _same_module(x, y)
    return complex(sum(np.vdot(b, a) for a, b in zip(x.blocks, y.blocks)))


def a_action(a: AlgebraElement, x: ModuleVector) -> ModuleVector:
    if a.algebra != x.module.algebra:
        raise AlgebraMismatch(f"{a.algebra} vs {x.module.algebra}")
    return ModuleVector(x.module, [ab @ xb for ab, xb in zip(a.blocks, x.blocks)])


def direct_sum(E: HilbertModule, F: HilbertModule) -> HilbertModule:
    """``E + F``: multiplicities add; ``E`` occupies the leading columns."""
    if E.algebra != F.algebra:
        raise AlgebraMismatch(f"{E.algebra} vs {F.algebra}")
    return HilbertModule(
        E.algebra, tuple(m + p for m, p in zip(E.multiplicities, F.multiplicities))
    )


def embed_pair(x: ModuleVector, y: ModuleVector) -> ModuleVector:
    """The vector ``(x, y)`` of ``x.module + y.module``."""
    S = direct_sum(x.module, y.module)
    return ModuleVector(S, [np.hstack([a, b]) for a, b in zip(x.blocks, y.blocks)])


def split_pair(z: ModuleVector, E: HilbertModule, F: HilbertModule):
    """Inverse of :func:`embed_pair`: ``(x, y)`` with ``z = (x, y)``."""
    if z.module != direct_sum(E, F):
        raise ModuleMismatch("vector is not in E + F")
    xs = [b[:, :m] for b, m in zip(z.blocks, E.multiplicities)]
    ys = [b[:, m:] for b, m in zip(z.blocks, E.multiplicities)]
    return ModuleVector(E, xs), ModuleVector(F, ys)


def random_vector(module: HilbertModule, rng: np.random.Generator) -> ModuleVector:
    return ModuleVector(module, [la.random_matrix(rng, s) for s in module.shapes])


def basis_vectors(module: HilbertModule):
    """Iterate over the matrix units of every block (a linear basis of the module)."""
    for i, (n, m) in enumerate(module.shapes):
        for r in range(n):
            for c in range(m):
                blocks = [np.zeros(s) for s in module.shapes]
                blocks[i][r, c] = 1.0
                yield ModuleVector(module, blocks)


# -- submodules -------------------------------------------------------------


class Submodule:
    """Closed submodule given by per-block orthonormal row bases ``R_i``."""

    __slots__ = ("module", "row_spaces")

    def __init__(self, module: HilbertModule, row_spaces: Sequence):
        if len(row_spaces) != len(module.multiplicities):
            raise ShapeMismatch("one row space per algebra summand is required")
        bases = []
        for m, B in zip(module.multiplicities, row_spaces):
            B = la.as_matrix(B, (0, m))
            if B.shape[1] != m:
                raise ShapeMismatch(f"row basis of width {B.shape[1]}, expected {m}")
            bases.append(B)
        self.module = module
        self.row_spaces = tuple(bases)

    def __repr__(self) -> str:
        return f"Submodule(dims={self.dims}, multiplicities={list(self.module.multiplicities)})"

    @property
    def dims(self) -> list[int]:
        return [B.shape[0] for B in self.row_spaces]

    def orthonormality_residual(self) -> float:
        return max(
            (np.max(np.abs(B @ la.dagger(B) - np.eye(B.shape[0])), initial=0.0)
             for B in self.row_spaces),
            default=0.0,
        )

    def contains(self, x: ModuleVector, tol: float = SUBMODULE_TOL) -> bool:
        return membership_residual(self, x) <= tol * max(1.0, x.norm())

    def to_json(self) -> dict:
        return submodule_to_json(self)


def submodule_from_rows(module: HilbertModule, rows: Sequence) -> Submodule:
    """Submodule whose block ``i`` row space is spanned by the rows of ``rows[i]``."""
    bases = []
    for m, R in zip(module.multiplicities, rows):
        R = np.asarray(R, dtype=np.complex128)
        R = R.reshape(-1, m) if m else np.zeros((0, 0))
        bases.append(la.orthonormal_rows(R))
    return Submodule(module, bases)


def submodule_from_generators(module: HilbertModule, gens: Sequence[ModuleVector]) -> Submodule:
    """Closed A-span of ``gens``: row spaces spanned by all generator rows."""
    for g in gens:
        if g.module != module:
            raise ModuleMismatch("generator is not in the module")
    rows = []
    for i, m in enumerate(module.multiplicities):
        stacked = [g.blocks[i] for g in gens]
        rows.append(np.vstack(stacked) if stacked else np.zeros((0, m)))
    return submodule_from_rows(module, rows)


def whole_module(module: HilbertModule) -> Submodule:
    return Submodule(module, [np.eye(m) for m in module.multiplicities])


def zero_submodule(module: HilbertModule) -> Submodule:
    return Submodule(module, [np.zeros((0, m)) for m in module.multiplicities])


def orthogonal_complement(W: Submodule) -> Submodule:
    return Submodule(W.module, [la.complement_rows(B) for B in W.row_spaces])


def biorthogonal_complement(W: Submodule) -> Submodule:
    return orthogonal_complement(orthogonal_complement(W))


def membership_residual(W: Submodule, x: ModuleVector) -> float:
    """Largest distance of a row of ``x`` from the row spaces of ``W``."""
    if x.module != W.module:
        raise ModuleMismatch("vector is not in the submodule's module")
    worst = 0.0
    for xb, B in zip(x.blocks, W.row_spaces):
        if xb.size:
            worst = max(worst, float(np.max(np.abs(xb - xb @ la.row_projector(B)))))
    return worst


def containment_residual(W: Submodule, V: Submodule) -> float:
    """How far the basis of ``W`` sticks out of ``V`` (0 iff ``W <= V``)."""
    if W.module != V.module:
        raise ModuleMismatch("submodules live in different modules")
    worst = 0.0
    for Bw, Bv in zip(W.row_spaces, V.row_spaces):
        if Bw.size:
            worst = max(worst, float(np.max(np.abs(Bw - Bw @ la.row_projector(Bv)))))
    return worst


def submodule_distance(W: Submodule, V: Submodule) -> float:
    """Symmetric containment residual; tiny iff ``W == V``."""
    return max(containment_residual(W, V), containment_residual(V, W))


def submodule_equal(W: Submodule, V: Submodule, tol: float = SUBMODULE_TOL) -> bool:
    return submodule_distance(W, V) <= tol


# -- projections ------------------------------------------------------------


class ModuleProjection:
    """Orthogonal projection onto a submodule, as right-multiplication projectors."""

    __slots__ = ("submodule", "projectors")

    def __init__(self, submodule: Submodule, projectors: Sequence):
        self.submodule = submodule
        self.projectors = tuple(la.as_matrix(P, (m, m)) for m, P in
                                zip(submodule.module.multiplicities, projectors))

    def __repr__(self) -> str:
        return f"ModuleProjection(dims={self.submodule.dims})"

    @property
    def module(self) -> HilbertModule:
        return self.submodule.module

    def apply(self, x: ModuleVector) -> ModuleVector:
        if x.module != self.module:
            raise ModuleMismatch("vector is not in the projection's module")
        return ModuleVector(x.module, [b @ P for b, P in zip(x.blocks, self.projectors)])

    __call__ = apply

    def complement(self) -> ModuleProjection:
        return ModuleProjection(
            orthogonal_complement(self.submodule),
            [np.eye(P.shape[0]) - P for P in self.projectors],
        )

    def residuals(self) -> dict:
        """Max entrywise ``|P^2 - P|`` and ``|P - P^*|`` over blocks."""
        idem = herm = 0.0
        for P in self.projectors:
            if P.size:
                idem = max(idem, float(np.max(np.abs(P @ P - P))))
                herm = max(herm, float(np.max(np.abs(P - la.dagger(P)))))
        return {"idempotent": idem, "selfadjoint": herm}


def project_onto(W: Submodule) -> ModuleProjection:
    return ModuleProjection(W, [la.row_projector(B) for B in W.row_spaces])


# -- JSON -------------------------------------------------------------------


def module_to_json(E: HilbertModule) -> dict:
    return {"block_dims": list(E.algebra.block_dims), "multiplicities": list(E.multiplicities)}


def module_from_json(data: dict) -> HilbertModule:
    return make_module(make_algebra(data["block_dims"]), data["multiplicities"])


def vector_to_json(x: ModuleVector) -> dict:
    out = module_to_json(x.module)
    out["blocks"] = [la.encode_matrix(b) for b in x.blocks]
    return out


def vector_from_json(data: dict) -> ModuleVector:
    E = module_from_json(data)
    return ModuleVector(E, [la.decode_matrix(b, s) for b, s in zip(data["blocks"], E.shapes)])


def submodule_to_json(W: Submodule) -> dict:
    out = module_to_json(W.module)
    out["row_bases"] = [la.encode_matrix(B) for B in W.row_spaces]
    out["dims"] = W.dims
    return out


def submodule_from_json(data: dict) -> Submodule:
    E = module_from_json(data)
    return Submodule(E, [
        la.decode_matrix(B, (r, m))
        for B, r, m in zip(data["row_bases"], data["dims"], E.multiplicities)
    ])
