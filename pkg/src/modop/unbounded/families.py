"""Block-diagonal closed operators on countable direct sums of a cell module.

The operator ``t`` acts on ``H = cell + cell + ...`` by ``(t x)_j = t_j x_j``
with domain ``{x : sum_j ||t_j x_j||^2 < inf}``.  The generator ``j -> t_j``
is a closed-form family; a :class:`GrowthDescriptor` says how its singular
values behave in the tail, so that questions about the whole infinite sum
reduce to finitely many blocks plus the descriptor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .. import _linalg as la
from ..errors import InconsistentGrowth, ShapeMismatch
from ..hilbert_module import HilbertModule, module_from_json, module_to_json
from ..operators import (
    BoundedOperator,
    adjoint,
    identity_operator,
    operator_from_json,
    operator_to_json,
    scale,
    singular_values,
)
from . import blockwise
from .growth import GrowthDescriptor, TailBound, parse_bound

#: Number of leading blocks materialized when no window is given.
DEFAULT_TRUNCATION = 16

#: Relative slack allowed when checking declared bounds against blocks.
GROWTH_RTOL = 1e-9

SCALAR_KINDS = ("poly-scalar", "reciprocal", "constant")


@dataclass(frozen=True)
class TruncationWindow:
    N: int = DEFAULT_TRUNCATION

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"truncation N must be a positive integer, got {self.N!r}")

    def indices(self) -> range:
        return range(1, self.N + 1)


def as_window(win) -> TruncationWindow:
    if win is None:
        return TruncationWindow()
    if isinstance(win, TruncationWindow):
        return win
    return TruncationWindow(int(win))


def sv_stats(T: BoundedOperator) -> tuple[int, float, float]:
    """``(rank, smallest nonzero, largest)`` singular value of a block."""
    nonzero = []
    for b in T.blocks:
        sb = la.svdvals(b)
        nonzero.extend(sb[: la.numerical_rank(sb)])
    if not nonzero:
        return 0, 0.0, 0.0
    return len(nonzero), float(min(nonzero)), float(max(nonzero))


class Family:
    """A generator ``j -> t_j`` (``j >= 1``) with its natural tail descriptor."""

    kind: str
    source: HilbertModule
    target: HilbertModule

    def block(self, j: int) -> BoundedOperator:
        raise NotImplementedError

    def natural_growth(self) -> GrowthDescriptor:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


class ScalarFamily(Family):
    """``t_j = sigma(j) B`` for a fixed base block ``B``.

    ``poly-scalar``: ``sigma(j) = c j^q``; ``reciprocal``: ``c / j^q``;
    ``constant``: ``c``.
    """

    def __init__(self, kind: str, base: BoundedOperator, c: complex = 1.0, q: float = 1.0):
        if kind not in SCALAR_KINDS:
            raise ValueError(f"unknown scalar family kind {kind!r}")
        self.kind = kind
        self.base = base
        self.c = complex(c)
        self.q = float(q) if kind != "constant" else 0.0
        self.source = base.source
        self.target = base.target

    def sigma(self, j: int) -> complex:
        if self.kind == "poly-scalar":
            return self.c * float(j) ** self.q
        if self.kind == "reciprocal":
            return self.c / float(j) ** self.q
        return self.c

    def block(self, j: int) -> BoundedOperator:
        return scale(self.sigma(j), self.base)

    def exponent(self) -> float:
        return {"poly-scalar": self.q, "reciprocal": -self.q, "constant": 0.0}[self.kind]

    def natural_growth(self) -> GrowthDescriptor:
        r, smin, smax = sv_stats(self.base)
        a = abs(self.c)
        if r == 0 or a == 0:
            return GrowthDescriptor(TailBound(0.0), TailBound(0.0), 0)
        p = self.exponent()
        return GrowthDescriptor(TailBound(a * smin, p), TailBound(a * smax, p), r)

    def to_json(self) -> dict:
        params = {"c": [self.c.real, self.c.imag]}
        if self.kind != "constant":
            params["q"] = self.q
        return {"kind": self.kind, "params": params,
                "cell": {"source": module_to_json(self.source),
                         "target": module_to_json(self.target)},
                "base": operator_to_json(self.base)}


class ExplicitFamily(Family):
    """Finite list ``t_1, ..., t_K`` followed by a constant tail block."""

    kind = "explicit"

    def __init__(self, blocks: Sequence[BoundedOperator], tail: BoundedOperator | None = None):
        if not blocks and tail is None:
            raise ValueError("explicit family needs at least one block")
        self.blocks = tuple(blocks)
        self.tail = tail if tail is not None else self.blocks[-1]
        self.source = self.tail.source
        self.target = self.tail.target
        for b in self.blocks:
            if b.source != self.source or b.target != self.target:
                raise ShapeMismatch("explicit blocks must share source and target cells")

    def block(self, j: int) -> BoundedOperator:
        if j < 1:
            raise IndexError("generator indices start at 1")
        return self.blocks[j - 1] if j <= len(self.blocks) else self.tail

    def natural_growth(self) -> GrowthDescriptor:
        r, smin, smax = sv_stats(self.tail)
        return GrowthDescriptor(TailBound(smin), TailBound(smax), r, len(self.blocks) + 1)

    def to_json(self) -> dict:
        return {"kind": "explicit", "params": {},
                "cell": {"source": module_to_json(self.source),
                         "target": module_to_json(self.target)},
                "blocks": [operator_to_json(b) for b in self.blocks],
                "tail_block": operator_to_json(self.tail)}


class DerivedFamily(Family):
    """A family obtained blockwise from another one.

    ``op`` is one of ``bounded_transform``, ``q_transform``,
    ``inverse_transform``, ``graph_adjoint`` or ``block_adjoint``.
    """

    kind = "derived"
    OPS = ("bounded_transform", "q_transform", "inverse_transform", "graph_adjoint",
           "block_adjoint")

    def __init__(self, op: str, inner: Family, inner_growth: GrowthDescriptor):
        if op not in self.OPS:
            raise ValueError(f"unknown derived op {op!r}")
        self.op = op
        self.inner = inner
        self.inner_growth = inner_growth
        swap = op in ("graph_adjoint", "block_adjoint")
        self.source = inner.target if swap else inner.source
        self.target = inner.source if (swap or op == "q_transform") else inner.target
        self._cache: dict[int, BoundedOperator] = {}

    def block(self, j: int) -> BoundedOperator:
        hit = self._cache.get(j)
        if hit is None:
            T = self.inner.block(j)
            if self.op == "bounded_transform":
                hit = blockwise.transform_block(T)[0]
            elif self.op == "q_transform":
                hit = blockwise.q_block(T)
            elif self.op == "inverse_transform":
                hit = blockwise.inverse_transform_block(T)
            elif self.op == "graph_adjoint":
                hit = blockwise.graph_adjoint_block(T)
            else:
                hit = adjoint(T)
            self._cache[j] = hit
        return hit

    def natural_growth(self) -> GrowthDescriptor:
        g = self.inner_growth
        if self.op == "bounded_transform":
            return g.transformed("z")
        if self.op == "inverse_transform":
            return g.transformed("zinv")
        if self.op == "q_transform":
            full = sum(self.source.multiplicities)
            return GrowthDescriptor(g.upper.then("q"), TailBound(1.0), full, g.start)
        return g

    def to_json(self) -> dict:
        return {"kind": "derived", "params": {"op": self.op},
                "inner": self.inner.to_json(), "inner_tail": self.inner_growth.to_json()}


@dataclass(frozen=True)
class DiagOperator:
    """Closed, densely defined ``t = diag(t_1, t_2, ...)`` on the countable sum of cells."""

    family: Family
    growth: GrowthDescriptor
    evidence: Mapping = field(default_factory=dict, compare=False)

    @property
    def source_cell(self) -> HilbertModule:
        return self.family.source

    @property
    def target_cell(self) -> HilbertModule:
        return self.family.target

    def block(self, j: int) -> BoundedOperator:
        return self.family.block(j)

    def blocks(self, win=None) -> list[BoundedOperator]:
        return [self.block(j) for j in as_window(win).indices()]

    def to_json(self) -> dict:
        return family_to_json(self)


def check_growth(family: Family, growth: GrowthDescriptor, N: int = DEFAULT_TRUNCATION) -> None:
    """Raise :class:`InconsistentGrowth` if a materialized block violates ``growth``."""
    for j in range(growth.start, max(N, growth.start) + 1):
        r, smin, smax = sv_stats(family.block(j))
        if r != growth.rank:
            raise InconsistentGrowth(
                f"block j={j} has rank {r}, the tail descriptor declares {growth.rank}"
            )
        if r == 0:
            continue
        lo, hi = growth.lower.value(j), growth.upper.value(j)
        if smin < lo * (1 - GROWTH_RTOL):
            raise InconsistentGrowth(
                f"block j={j}: singular value {smin!r} below declared lower bound {lo!r}"
            )
        if smax > hi * (1 + GROWTH_RTOL):
            raise InconsistentGrowth(
                f"block j={j}: norm {smax!r} above declared upper bound {hi!r}"
            )


def make_diag_operator(cellS: HilbertModule, cellT: HilbertModule, family,
                       growth: GrowthDescriptor | None = None,
                       check_n: int = DEFAULT_TRUNCATION) -> DiagOperator:
    """Validate a family and wrap it as a :class:`DiagOperator`.

    ``family`` is a :class:`Family` or a JSON descriptor.  The tail
    descriptor defaults to the family's natural one (or the descriptor's
    ``"tail"`` entry) and is checked against the first ``check_n`` blocks.
    """
    if isinstance(family, Mapping):
        if growth is None and "tail" in family:
            growth = tail_from_json(family["tail"], family_from_json(family))
        family = family_from_json(family)
    if cellS.algebra != cellT.algebra:
        raise ShapeMismatch("cells must live over the same algebra")
    if family.source != cellS or family.target != cellT:
        raise ShapeMismatch("family blocks do not map cellS to cellT")
    if growth is None:
        growth = family.natural_growth()
    check_growth(family, growth, check_n)
    return DiagOperator(family, growth)


def derived(op: str, t: DiagOperator, evidence: Mapping | None = None) -> DiagOperator:
    fam = DerivedFamily(op, t.family, t.growth)
    return DiagOperator(fam, fam.natural_growth(), dict(evidence or {}))


def scalar_cell_operator(kind: str, c: complex = 1.0, q: float = 1.0,
                         cell: HilbertModule | None = None) -> DiagOperator:
    """``sigma(j) * identity`` on ``cell`` (default ``C`` as a module over itself)."""
    if cell is None:
        from ..algebra import make_algebra
        from ..hilbert_module import make_module

        cell = make_module(make_algebra([1]), [1])
    return make_diag_operator(cell, cell, ScalarFamily(kind, identity_operator(cell), c, q))


# -- JSON -------------------------------------------------------------------


def family_to_json(t: DiagOperator) -> dict:
    out = t.family.to_json()
    out["tail"] = t.growth.to_json()
    return out


def tail_from_json(data: Mapping, family: Family) -> GrowthDescriptor:
    natural = family.natural_growth()
    return GrowthDescriptor(
        parse_bound(data["sv_lower"]) if "sv_lower" in data else natural.lower,
        parse_bound(data["sv_upper"]) if "sv_upper" in data else natural.upper,
        int(data.get("rank", natural.rank)),
        int(data.get("start", natural.start)),
    )


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def family_from_json(data: Mapping) -> Family:
    kind = data["kind"]
    params = data.get("params", {})
    if kind == "derived":
        inner = family_from_json(data["inner"])
        inner_growth = (tail_from_json(data["inner_tail"], inner)
                        if "inner_tail" in data else inner.natural_growth())
        return DerivedFamily(params["op"], inner, inner_growth)
    cell = data["cell"]
    if "source" in cell:
        S, T = module_from_json(cell["source"]), module_from_json(cell["target"])
    else:
        S = T = module_from_json(cell)
    if kind in SCALAR_KINDS:
        base = operator_from_json(data["base"]) if "base" in data else identity_operator(S)
        if base.source != S or base.target != T:
            raise ShapeMismatch("base operator does not match the declared cell")
        return ScalarFamily(kind, base, _complex(params.get("c", 1.0)),
                            float(params.get("q", 1.0)))
    if kind == "explicit":
        blocks = [operator_from_json(b) for b in data["blocks"]]
        tail = operator_from_json(data["tail_block"]) if "tail_block" in data else None
        return ExplicitFamily(blocks, tail)
    raise ValueError(f"unknown family kind {kind!r}")


def diag_from_json(data: Mapping, check_n: int = DEFAULT_TRUNCATION) -> DiagOperator:
    fam = family_from_json(data)
    growth = tail_from_json(data["tail"], fam) if "tail" in data else None
    return make_diag_operator(fam.source, fam.target, fam, growth, check_n)


def materialized_singular_values(t: DiagOperator, win) -> list[np.ndarray]:
    return [singular_values(t.block(j)) for j in as_window(win).indices()]
