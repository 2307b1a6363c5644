"""Per-index kernels: bounded transform, its inverse, and the graph adjoint.

Each function acts on one generator block (a :class:`BoundedOperator` on
the cell).  Matrices act from the right, so the operator ``t^* t`` has
matrix ``T T^*`` and ``t Q`` has matrix ``Q T``.
"""

from __future__ import annotations

import numpy as np

from .. import _linalg as la
from ..errors import NotAGraph, NotStrictContraction
from ..hilbert_module import HilbertModule, Submodule, direct_sum, orthogonal_complement
from ..operators import BoundedOperator

#: ``inverse_transform`` refuses blocks with norm at or above ``1 - CONTRACTION_GUARD``.
CONTRACTION_GUARD = 1e-12


def q_block(T: BoundedOperator) -> BoundedOperator:
    """``Q = (1 + t^* t)^{-1/2}`` on the source cell."""
    return BoundedOperator(T.source, T.source, [
        la.hermitian_function(b @ la.dagger(b), lambda w: 1.0 / np.sqrt(1.0 + np.clip(w, 0, None)))
        for b in T.blocks
    ])


def transform_block(T: BoundedOperator) -> tuple[BoundedOperator, BoundedOperator]:
    """``(F, Q)`` with ``Q = (1 + t^* t)^{-1/2}`` and ``F = t Q``."""
    Q = q_block(T)
    F = BoundedOperator(T.source, T.target, [q @ b for q, b in zip(Q.blocks, T.blocks)])
    return F, Q


def inverse_transform_block(F: BoundedOperator) -> BoundedOperator:
    """``t = F (1 - F^* F)^{-1/2}``."""
    blocks = []
    for b in F.blocks:
        if la.spectral_norm(b) >= 1.0 - CONTRACTION_GUARD:
            raise NotStrictContraction(
                f"block norm {la.spectral_norm(b)!r} is not below 1 - {CONTRACTION_GUARD}"
            )
        R = la.hermitian_function(
            np.eye(b.shape[0]) - b @ la.dagger(b), lambda w: 1.0 / np.sqrt(w)
        )
        blocks.append(R @ b)
    return BoundedOperator(F.source, F.target, blocks)


def v_matrix(m: int, p: int) -> np.ndarray:
    """Right-multiplication matrix of ``V(x, y) = (y, -x)`` on one block."""
    V = np.zeros((m + p, p + m), dtype=np.complex128)
    V[:m, p:] = -np.eye(m)
    V[m:, :p] = np.eye(p)
    return V


def graph_submodule(T: BoundedOperator) -> Submodule:
    """``{(v, v T)}`` inside ``source + target``."""
    S = direct_sum(T.source, T.target)
    bases = [la.orthonormal_rows(np.hstack([np.eye(b.shape[0]), b])) for b in T.blocks]
    return Submodule(S, bases)


def rotated_graph(T: BoundedOperator) -> Submodule:
    """``V(G(t))`` inside ``target + source``."""
    G = graph_submodule(T)
    S = direct_sum(T.target, T.source)
    return Submodule(S, [
        B @ v_matrix(m, p)
        for B, m, p in zip(G.row_spaces, T.source.multiplicities, T.target.multiplicities)
    ])


def read_graph(C: Submodule, F: HilbertModule, E: HilbertModule,
               rtol: float = la.RANK_RTOL) -> list[np.ndarray]:
    """Read the operator off a graph-shaped row space inside ``F + E``.

    Returns per-block matrices ``Y^{-1} Z`` where ``C = rowspace [Y | Z]``;
    raises :class:`NotAGraph` when a vertical vector ``(0, z)`` is present.
    """
    blocks = []
    for B, p, m in zip(C.row_spaces, F.multiplicities, E.multiplicities):
        Y, Z = B[:, :p], B[:, p:]
        if B.shape[0] > p:
            raise NotAGraph(f"complement has dimension {B.shape[0]} > {p}")
        s = la.svdvals(Y)
        if Y.shape[0] and (s.size == 0 or s[-1] <= rtol * max(1.0, s[0])):
            raise NotAGraph("complement contains a vertical vector (0, z)")
        if B.shape[0] < p:
            # Dom(t*) is a proper subspace: not a graph over all of F.
            raise NotAGraph(f"complement has dimension {B.shape[0]} < {p}")
        blocks.append(np.linalg.solve(Y, Z) if p else np.zeros((0, m)))
    return blocks


def graph_adjoint_block(T: BoundedOperator) -> BoundedOperator:
    """``t^*`` read off from ``[V(G(t))]^perp`` in ``target + source``.

    Reading an operator off an orthonormal graph basis loses about
    ``||t||^2`` in accuracy, so the graph of ``t / ||t||`` is used and the
    result rescaled.
    """
    s = max((la.spectral_norm(b) for b in T.blocks), default=0.0)
    s = s if s > 0 else 1.0
    unit = BoundedOperator(T.source, T.target, [b / s for b in T.blocks])
    C = orthogonal_complement(rotated_graph(unit))
    return BoundedOperator(T.target, T.source,
                           [s * b for b in read_graph(C, T.target, T.source)])
