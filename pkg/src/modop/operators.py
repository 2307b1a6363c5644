"""Bounded adjointable operators between Hilbert modules.

An operator ``E -> F`` is stored as one ``m_i x p_i`` matrix per algebra
block, acting by right multiplication ``x_i -> x_i T_i``.  This makes
A-linearity automatic and the adjoint is the blockwise conjugate
transpose.  Because the matrices act from the right, the matrix of a
composite ``S o T`` is ``T_i @ S_i``.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from . import _linalg as la
from .errors import ModuleMismatch, ShapeMismatch
from .hilbert_module import (
    HilbertModule,
    ModuleProjection,
    ModuleVector,
    Submodule,
    direct_sum,
    module_from_json,
    module_to_json,
    orthogonal_complement,
    project_onto,
    submodule_distance,
)


class BoundedOperator:
    __slots__ = ("source", "target", "blocks")

    def __init__(self, source: HilbertModule, target: HilbertModule, blocks: Sequence):
        if source.algebra != target.algebra:
            raise ModuleMismatch("source and target live over different algebras")
        if len(blocks) != len(source.multiplicities):
            raise ShapeMismatch("one matrix per algebra block is required")
        mats = []
        for m, p, T in zip(source.multiplicities, target.multiplicities, blocks):
            T = la.as_matrix(T, (m, p))
            if T.shape != (m, p):
                raise ShapeMismatch(f"operator block of shape {T.shape}, expected {(m, p)}")
            mats.append(T)
        self.source = source
        self.target = target
        self.blocks = tuple(mats)

    def __repr__(self) -> str:
        return (f"BoundedOperator({list(self.source.multiplicities)} -> "
                f"{list(self.target.multiplicities)})")

    def __call__(self, x: ModuleVector) -> ModuleVector:
        return apply(self, x)

    @property
    def is_endomorphism(self) -> bool:
        return self.source == self.target

    def to_json(self) -> dict:
        return operator_to_json(self)


def identity_operator(E: HilbertModule) -> BoundedOperator:
    return BoundedOperator(E, E, [np.eye(m) for m in E.multiplicities])


def zero_operator(E: HilbertModule, F: HilbertModule) -> BoundedOperator:
    return BoundedOperator(E, F, [np.zeros((m, p)) for m, p in
                                  zip(E.multiplicities, F.multiplicities)])


def random_operator(E: HilbertModule, F: HilbertModule, rng: np.random.Generator,
                    rank: Sequence[int] | None = None) -> BoundedOperator:
    """Random operator; ``rank[i]`` caps the rank of block ``i`` (default: generic)."""
    blocks = []
    for i, (m, p) in enumerate(zip(E.multiplicities, F.multiplicities)):
        if rank is None:
            blocks.append(la.random_matrix(rng, (m, p)))
        else:
            r = rank[i]
            blocks.append(la.random_matrix(rng, (m, r)) @ la.random_matrix(rng, (r, p)))
    return BoundedOperator(E, F, blocks)


def apply(T: BoundedOperator, x: ModuleVector) -> ModuleVector:
    if x.module != T.source:
        raise ModuleMismatch("vector is not in the operator's source")
    return ModuleVector(T.target, [xb @ Tb for xb, Tb in zip(x.blocks, T.blocks)])


def adjoint(T: BoundedOperator) -> BoundedOperator:
    return BoundedOperator(T.target, T.source, [la.dagger(b) for b in T.blocks])


def compose(S: BoundedOperator, T: BoundedOperator) -> BoundedOperator:
    """``S o T`` (apply ``T`` first)."""
    if T.target != S.source:
        raise ModuleMismatch("composition chain does not match")
    return BoundedOperator(T.source, S.target, [t @ s for s, t in zip(S.blocks, T.blocks)])


def add(S: BoundedOperator, T: BoundedOperator) -> BoundedOperator:
    if S.source != T.source or S.target != T.target:
        raise ModuleMismatch("operators have different shapes")
    return BoundedOperator(S.source, S.target, [a + b for a, b in zip(S.blocks, T.blocks)])


def scale(c: complex, T: BoundedOperator) -> BoundedOperator:
    return BoundedOperator(T.source, T.target, [c * b for b in T.blocks])


def operator_norm(T: BoundedOperator) -> float:
    return max((la.spectral_norm(b) for b in T.blocks), default=0.0)


def singular_values(T: BoundedOperator) -> np.ndarray:
    """Union over blocks of the block singular values, descending."""
    parts = [la.svdvals(b) for b in T.blocks]
    s = np.concatenate(parts) if parts else np.zeros(0)
    return np.sort(s)[::-1]


def rank(T: BoundedOperator) -> int:
    return sum(la.numerical_rank(la.svdvals(b)) for b in T.blocks)


def kernel(T: BoundedOperator) -> Submodule:
    """Row spaces ``{v : v T_i = 0}``."""
    return Submodule(T.source, [la.left_null_rows(b) for b in T.blocks])


def range_(T: BoundedOperator) -> Submodule:
    """Row spaces of the ``T_i`` (ranges are closed in finite dimension)."""
    return Submodule(T.target, [la.orthonormal_rows(b) for b in T.blocks])


def absolute_value(T: BoundedOperator) -> BoundedOperator:
    """``|T| = (T^* T)^{1/2}``; the operator ``T^* T`` has matrices ``T_i T_i^*``."""
    return BoundedOperator(T.source, T.source,
                           [la.psd_sqrt(b @ la.dagger(b)) for b in T.blocks])


def ker_range_decomposition(T: BoundedOperator) -> tuple[ModuleProjection, ModuleProjection]:
    """``(P_Ker(T), P_Ran(T^*))``, complementary projections on the source."""
    return project_onto(kernel(T)), project_onto(range_(adjoint(T)))


class DecompositionResiduals(NamedTuple):
    sum_to_identity: float
    orthogonality: float
    ker_abs_vs_ker: float
    ran_abs_vs_ran_adjoint: float
    ker_adjoint_vs_ran_perp: float
    ker_vs_ran_adjoint_perp: float

    def worst(self) -> float:
        return max(self)


def decomposition_residuals(T: BoundedOperator) -> DecompositionResiduals:
    """Residuals of ``E = Ker T + Ran T^*`` and the associated identities.

    Projector residuals are entrywise maxima; identities between submodules
    are reported as :func:`submodule_distance`.
    """
    P_ker, P_ran = ker_range_decomposition(T)
    total = orthog = 0.0
    for A, B in zip(P_ker.projectors, P_ran.projectors):
        if A.size:
            total = max(total, float(np.max(np.abs(A + B - np.eye(A.shape[0])))))
            orthog = max(orthog, float(np.max(np.abs(A @ B))))
    Ts = adjoint(T)
    absT = absolute_value(T)
    return DecompositionResiduals(
        sum_to_identity=total,
        orthogonality=orthog,
        ker_abs_vs_ker=submodule_distance(kernel(absT), kernel(T)),
        ran_abs_vs_ran_adjoint=submodule_distance(range_(absT), range_(Ts)),
        ker_adjoint_vs_ran_perp=submodule_distance(kernel(Ts), orthogonal_complement(range_(T))),
        ker_vs_ran_adjoint_perp=submodule_distance(kernel(T), orthogonal_complement(range_(Ts))),
    )


def block_diagonal(S: BoundedOperator, T: BoundedOperator) -> BoundedOperator:
    """``S + T`` acting on ``S.source + T.source``."""
    src = direct_sum(S.source, T.source)
    tgt = direct_sum(S.target, T.target)
    blocks = []
    for a, b in zip(S.blocks, T.blocks):
        M = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=np.complex128)
        M[: a.shape[0], : a.shape[1]] = a
        M[a.shape[0]:, a.shape[1]:] = b
        blocks.append(M)
    return BoundedOperator(src, tgt, blocks)


def operator_to_json(T: BoundedOperator) -> dict:
    return {
        "source": module_to_json(T.source),
        "target": module_to_json(T.target),
        "blocks": [la.encode_matrix(b) for b in T.blocks],
    }


def operator_from_json(data: dict) -> BoundedOperator:
    E = module_from_json(data["source"])
    F = module_from_json(data["target"])
    return BoundedOperator(E, F, [
        la.decode_matrix(b, (m, p))
        for b, m, p in zip(data["blocks"], E.multiplicities, F.multiplicities)
    ])
