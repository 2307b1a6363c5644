"""Graphs, the graph construction of the adjoint, and the bounded transform."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _linalg as la
from ..errors import AlgebraMismatch, NumericalFailure
from ..hilbert_module import (
    HilbertModule,
    ModuleProjection,
    Submodule,
    direct_sum,
    project_onto,
)
from ..operators import BoundedOperator
from . import blockwise
from .families import DiagOperator, TruncationWindow, as_window, derived

#: Tolerances for the certificates attached to computed operators.
GRAPH_TOL = 1e-10
TRANSFORM_TOL = 1e-9
CLASSIFY_RTOL = 1e-10


def v_unitary(E: HilbertModule, F: HilbertModule) -> BoundedOperator:
    """``V : E + F -> F + E``, ``V(x, y) = (y, -x)``."""
    if E.algebra != F.algebra:
        raise AlgebraMismatch(f"{E.algebra} vs {F.algebra}")
    return BoundedOperator(direct_sum(E, F), direct_sum(F, E), [
        blockwise.v_matrix(m, p) for m, p in zip(E.multiplicities, F.multiplicities)
    ])


@dataclass(frozen=True)
class GraphModule:
    """Per-index graph row spaces ``G(t)_j = {(v, v t_j)}`` for ``j <= N``."""

    t: DiagOperator
    window: TruncationWindow
    submodules: tuple[Submodule, ...]

    @property
    def ambient(self) -> HilbertModule:
        return direct_sum(self.t.source_cell, self.t.target_cell)

    def submodule(self, j: int) -> Submodule:
        return self.submodules[j - 1]

    def projection(self, j: int) -> ModuleProjection:
        return project_onto(self.submodules[j - 1])

    def residual(self) -> float:
        """Worst idempotence / self-adjointness residual of the graph projectors."""
        worst = 0.0
        for W in self.submodules:
            worst = max(worst, *project_onto(W).residuals().values())
        return worst


def graph(t: DiagOperator, win=None) -> GraphModule:
    win = as_window(win)
    return GraphModule(t, win, tuple(blockwise.graph_submodule(t.block(j)) for j in win.indices()))


def _projector_sum_residual(P1: ModuleProjection, P2: ModuleProjection) -> float:
    worst = 0.0
    for A, B in zip(P1.projectors, P2.projectors):
        if A.size:
            worst = max(worst, float(np.max(np.abs(A + B - np.eye(A.shape[0])))))
    return worst


def graph_decomposition_residual(T: BoundedOperator, Tstar: BoundedOperator) -> float:
    """Residual of ``F + E = V(G(t)) + G(t^*)`` for one block."""
    return _projector_sum_residual(project_onto(blockwise.rotated_graph(T)),
                                   project_onto(blockwise.graph_submodule(Tstar)))


def adjoint_via_graph(t: DiagOperator, win=None) -> DiagOperator:
    """``t^*`` obtained from ``[V(G(t))]^perp`` block by block.

    The returned operator carries ``evidence`` for the window: the worst
    decomposition residual and the worst deviation from the blockwise
    conjugate transpose.
    """
    win = as_window(win)
    ts = derived("graph_adjoint", t)
    decomp = mismatch = 0.0
    for j in win.indices():
        T, S = t.block(j), ts.block(j)
        decomp = max(decomp, graph_decomposition_residual(T, S))
        for a, b in zip(T.blocks, S.blocks):
            if a.size:
                mismatch = max(mismatch, float(np.max(np.abs(b - la.dagger(a)))))
    ts.evidence.update({"window": win.N, "decomposition_residual": decomp,
                        "conjugate_transpose_mismatch": mismatch})
    return ts


@dataclass(frozen=True)
class SurjectivityEvidence:
    verdict: bool
    min_eigenvalue: float
    solve_residual: float
    tail_justification: str

    def __bool__(self) -> bool:
        return self.verdict


def one_plus_tstar_t_surjective(t: DiagOperator, win=None, rng=None) -> SurjectivityEvidence:
    """Witness that ``1 + t^* t`` is onto: every block has spectrum ``>= 1``."""
    win = as_window(win)
    rng = np.random.default_rng(0) if rng is None else rng
    lo, resid = np.inf, 0.0
    for j in win.indices():
        for b in t.block(j).blocks:
            M = np.eye(b.shape[0]) + b @ la.dagger(b)
            if not M.size:
                continue
            lo = min(lo, la.min_eigenvalue(M))
            w = la.random_matrix(rng, (3, M.shape[0]))
            u = np.linalg.solve(M.T, w.T).T
            resid = max(resid, la.backward_error(M, u, w))
    return SurjectivityEvidence(
        verdict=bool(lo >= 1 - TRANSFORM_TOL and resid <= TRANSFORM_TOL),
        min_eigenvalue=float(lo),
        solve_residual=resid,
        tail_justification="1 + t_j^* t_j >= 1 for every j, so each block is invertible "
                           "with inverse norm <= 1 and the inverse is bounded on the sum",
    )


@dataclass(frozen=True)
class TransformPair:
    F_t: DiagOperator
    Q_t: DiagOperator


def bounded_transform(t: DiagOperator, win=None) -> TransformPair:
    """``Q_t = (1 + t^* t)^{-1/2}`` and ``F_t = t Q_t`` as block families.

    Blocks in the window are checked for ``||F_j|| < 1`` and
    ``Q_j = (1 - F_j^* F_j)^{1/2}``.
    """
    win = as_window(win)
    F = derived("bounded_transform", t)
    Q = derived("q_transform", t)
    worst_q, worst_norm = 0.0, 0.0
    for j in win.indices():
        Fj, Qj = F.block(j), Q.block(j)
        for f, q in zip(Fj.blocks, Qj.blocks):
            if not f.size and not q.size:
                continue
            nf = la.spectral_norm(f)
            worst_norm = max(worst_norm, nf)
            if nf >= 1.0:
                raise NumericalFailure(f"F block j={j} has norm {nf!r} >= 1")
            if q.size:
                alt = la.psd_sqrt(np.eye(q.shape[0]) - f @ la.dagger(f))
                worst_q = max(worst_q, float(np.max(np.abs(alt - q))))
    if worst_q > TRANSFORM_TOL:
        raise NumericalFailure(f"Q_t != (1 - F^* F)^(1/2): residual {worst_q!r}")
    F.evidence.update({"window": win.N, "max_norm": worst_norm, "q_residual": worst_q})
    return TransformPair(F, Q)


def inverse_transform(F: DiagOperator, win=None) -> DiagOperator:
    """Blockwise ``t = F (1 - F^* F)^{-1/2}``.

    Raises :class:`~modop.errors.NotStrictContraction` if a block in the
    window has norm ``>= 1 - 1e-12``.
    """
    win = as_window(win)
    t = derived("inverse_transform", F)
    for j in win.indices():
        t.block(j)
    t.evidence["window"] = win.N
    return t


# -- classification ---------------------------------------------------------


@dataclass(frozen=True)
class Predicates:
    normal: bool
    selfadjoint: bool
    positive: bool


def block_predicates(T: BoundedOperator, rtol: float = CLASSIFY_RTOL) -> Predicates:
    """Normal / selfadjoint / positive for one endomorphism block.

    Tolerances are relative to the block norm.  Positivity means
    ``<t x, x> >= 0`` for all ``x``, read off the spectrum of a normal block.
    """
    if not T.is_endomorphism:
        return Predicates(False, False, False)
    normal = selfadjoint = positive = True
    for b in T.blocks:
        if not b.size:
            continue
        nb = la.spectral_norm(b)
        comm = la.spectral_norm(b @ la.dagger(b) - la.dagger(b) @ b)
        n_ok = comm <= rtol * nb * nb
        s_ok = la.spectral_norm(b - la.dagger(b)) <= rtol * nb
        # <t x, x> >= 0 for all complex x forces t = t^*, then the spectrum decides.
        p_ok = n_ok and s_ok and la.min_eigenvalue(b) >= -rtol * nb
        normal &= n_ok
        selfadjoint &= s_ok
        positive &= p_ok
    return Predicates(bool(normal), bool(selfadjoint), bool(positive))


@dataclass(frozen=True)
class Classification:
    normal: bool
    selfadjoint: bool
    positive: bool
    transform: Predicates
    agrees: bool

    @property
    def predicates(self) -> Predicates:
        return Predicates(self.normal, self.selfadjoint, self.positive)


def predicates_over(t: DiagOperator, win=None) -> Predicates:
    win = as_window(win)
    normal = selfadjoint = positive = True
    for j in win.indices():
        p = block_predicates(t.block(j))
        normal &= p.normal
        selfadjoint &= p.selfadjoint
        positive &= p.positive
    return Predicates(normal, selfadjoint, positive)


def classify(t: DiagOperator, win=None) -> Classification:
    """Classify ``t`` and its bounded transform over the window and compare."""
    win = as_window(win)
    own = predicates_over(t, win)
    if t.source_cell == t.target_cell:
        fp = predicates_over(bounded_transform(t, win).F_t, win)
    else:
        fp = Predicates(False, False, False)
    return Classification(own.normal, own.selfadjoint, own.positive, fp, own == fp)
