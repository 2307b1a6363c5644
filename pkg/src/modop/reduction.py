"""Localization of module operators at a minimal projection.

For a rank-one projection ``e = u u^*`` in block ``b`` the space ``eE`` is a
Hilbert space under ``trace <x, y>``.  A vector ``ex`` is determined by the
row ``u^* x_b`` of length ``m_b``; with ``e = E_11`` this is the first row
of ``x_b``.  An operator acts on these rows by ``c -> c T_b``, so in the
usual column convention its matrix is ``T_b^T``.  That is what :func:`phi`
returns: with it ``phi(S o T) = phi(S) phi(T)`` and ``phi(T^*) = phi(T)^*``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _linalg as la
from .algebra import AlgebraElement, minimal_projection
from .errors import ModuleMismatch, NotMinimalProjection, ShapeMismatch
from .hilbert_module import HilbertModule, ModuleVector, trace_inner
from .operators import BoundedOperator
from .unbounded.calculus import bounded_transform
from .unbounded.families import DiagOperator, as_window

#: Tolerance for recognizing a rank-one projection.
PROJECTION_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LocalizedSpace:
    """``eE`` with coordinates ``ex -> u^* x_b`` in ``C^{m_b}``."""

    parent: HilbertModule
    e: AlgebraElement
    block: int
    u: np.ndarray

    @property
    def dimension(self) -> int:
        return self.parent.multiplicities[self.block]

    def coordinates(self, x: ModuleVector) -> np.ndarray:
        """Coordinates of ``ex``."""
        if x.module != self.parent:
            raise ModuleMismatch(f"{x.module} vs {self.parent}")
        return self.u.conj() @ x.blocks[self.block]

    def vector(self, c) -> ModuleVector:
        """The element of ``eE`` with coordinates ``c``."""
        c = np.asarray(c, dtype=np.complex128).reshape(-1)
        if c.shape[0] != self.dimension:
            raise ShapeMismatch(f"expected {self.dimension} coordinates, got {c.shape[0]}")
        blocks = [np.zeros(s, dtype=np.complex128) for s in self.parent.shapes]
        blocks[self.block] = np.outer(self.u, c)
        return self.parent.vector(blocks)

    def gram(self) -> np.ndarray:
        """Gram matrix of the coordinate basis under the trace inner product."""
        basis = [self.vector(row) for row in np.eye(self.dimension)]
        return np.array([[trace_inner(a, b) for b in basis] for a in basis])


def _rank_one_block(e: AlgebraElement) -> tuple[int, np.ndarray]:
    """Block index and unit vector ``u`` with ``e = u u^*``, or raise."""
    carrying = [i for i, b in enumerate(e.blocks) if b.size and np.max(np.abs(b)) > PROJECTION_TOL]
    if len(carrying) != 1:
        raise NotMinimalProjection(f"e is nonzero in {len(carrying)} blocks (need exactly 1)")
    b = carrying[0]
    P = e.blocks[b]
    if np.max(np.abs(P @ P - P)) > PROJECTION_TOL or np.max(np.abs(P - la.dagger(P))) > PROJECTION_TOL:
        raise NotMinimalProjection("e is not a selfadjoint idempotent")
    if la.numerical_rank(la.svdvals(P), PROJECTION_TOL) != 1:
        raise NotMinimalProjection("e does not have rank one")
    _, U = np.linalg.eigh(la.hermitian_part(P))
    return b, U[:, -1]


def localize(E: HilbertModule, e: AlgebraElement) -> LocalizedSpace:
    """Localize ``E`` at the minimal projection ``e``."""
    if e.algebra != E.algebra:
        raise NotMinimalProjection("e does not belong to the module's algebra")
    b, u = _rank_one_block(e)
    if e.blocks[b].shape[0] and np.allclose(e.blocks[b], minimal_projection(E.algebra, b).blocks[b]):
        # canonical choice for E_11: coordinates are the first row
        u = np.eye(e.blocks[b].shape[0], dtype=np.complex128)[0]
    u = u.copy()
    u.flags.writeable = False
    return LocalizedSpace(E, e, b, u)


def _rectangular(T: BoundedOperator, L: LocalizedSpace, L_target: LocalizedSpace) -> np.ndarray:
    if T.source != L.parent or T.target != L_target.parent:
        raise ModuleMismatch("operator does not act between the localized modules")
    if L.block != L_target.block:
        raise ModuleMismatch("source and target are localized at different blocks")
    return T.blocks[L.block].T.copy()


def phi(T: BoundedOperator, L: LocalizedSpace) -> np.ndarray:
    """Restriction of the endomorphism ``T`` to ``eE``, as an ``m_b x m_b`` matrix."""
    if not T.is_endomorphism:
        raise ModuleMismatch("phi needs an endomorphism of the localized module")
    return _rectangular(T, L, L)


def phi_inverse(M, L: LocalizedSpace) -> BoundedOperator:
    """The operator on a single-block module whose restriction is ``M``."""
    M = np.asarray(M, dtype=np.complex128)
    if L.parent.algebra.num_blocks != 1:
        raise ShapeMismatch("phi is only invertible over a single-block algebra; "
                            "use phi_family_inverse")
    m = L.dimension
    if M.shape != (m, m):
        raise ShapeMismatch(f"expected a {m}x{m} matrix, got {M.shape}")
    return BoundedOperator(L.parent, L.parent, [M.T])


def canonical_localizations(E: HilbertModule) -> list[LocalizedSpace]:
    """One localization per block, at ``E_11`` of that block."""
    return [localize(E, minimal_projection(E.algebra, b)) for b in range(E.algebra.num_blocks)]


def phi_family(T: BoundedOperator) -> list[np.ndarray]:
    """Blockwise localization of an endomorphism on a multi-block module."""
    return [phi(T, L) for L in canonical_localizations(T.source)]


def phi_family_inverse(mats: Sequence, E: HilbertModule) -> BoundedOperator:
    if len(mats) != E.algebra.num_blocks:
        raise ShapeMismatch(f"expected {E.algebra.num_blocks} matrices, got {len(mats)}")
    blocks = []
    for M, m in zip(mats, E.multiplicities):
        M = np.asarray(M, dtype=np.complex128)
        if M.shape != (m, m):
            raise ShapeMismatch(f"expected a {m}x{m} matrix, got {M.shape}")
        blocks.append(M.T)
    return BoundedOperator(E, E, blocks)


# -- unbounded operators ----------------------------------------------------


def hilbert_bounded_transform(M: np.ndarray) -> np.ndarray:
    """``M (1 + M^* M)^{-1/2}`` for a matrix acting on column vectors.

    Computed from the SVD: singular values ``s`` become ``s / sqrt(1 + s^2)``.
    """
    M = np.asarray(M, dtype=np.complex128)
    if M.size == 0:
        return M.copy()
    U, s, Vh = np.linalg.svd(M, full_matrices=False)
    return (U * (s / np.sqrt(1.0 + s * s))) @ Vh


@dataclass(frozen=True)
class TransportedFamily:
    """``j -> phi(t_j)``: the localized version of a block-diagonal operator."""

    t: DiagOperator
    source: LocalizedSpace
    target: LocalizedSpace

    def block(self, j: int) -> np.ndarray:
        return _rectangular(self.t.block(j), self.source, self.target)

    def blocks(self, win=None) -> list[np.ndarray]:
        return [self.block(j) for j in as_window(win).indices()]


def transport_unbounded(t: DiagOperator, L: LocalizedSpace | None = None,
                        L_target: LocalizedSpace | None = None) -> TransportedFamily:
    """Localize every cell of ``t`` (single-block cells only)."""
    if t.source_cell.algebra.num_blocks != 1:
        raise ShapeMismatch("transport needs cells over a single-block algebra")
    L = localize(t.source_cell, minimal_projection(t.source_cell.algebra, 0)) if L is None else L
    if L_target is None:
        L_target = L if t.target_cell == t.source_cell else localize(
            t.target_cell, minimal_projection(t.target_cell.algebra, 0))
    return TransportedFamily(t, L, L_target)


def localization_square_residual(t: DiagOperator, win=None, F_t: DiagOperator | None = None) -> float:
    """Worst ``|phi(F_{t,j}) - F(phi(t_j))|`` over the window.

    One path applies the module bounded transform and then localizes; the
    other localizes and applies the Hilbert-space transform.
    """
    win = as_window(win)
    moved = transport_unbounded(t)
    F_t = bounded_transform(t, win).F_t if F_t is None else F_t
    moved_F = TransportedFamily(F_t, moved.source, moved.target)
    worst = 0.0
    for j in win.indices():
        a = moved_F.block(j)
        b = hilbert_bounded_transform(moved.block(j))
        if a.size:
            worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def localized_to_json(M: np.ndarray) -> dict:
    M = np.asarray(M)
    return {"shape": list(M.shape), "entries": la.encode_matrix(M)}


def localized_from_json(data: dict) -> np.ndarray:
    return la.decode_matrix(data["entries"], tuple(data["shape"]))
