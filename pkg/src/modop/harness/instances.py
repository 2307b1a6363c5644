"""Seeded random instances: algebras, modules, operators and block families."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .. import _linalg as la
from ..algebra import CStarAlgebra, make_algebra
from ..errors import CapExceeded
from ..hilbert_module import (
    HilbertModule,
    Submodule,
    make_module,
    module_to_json,
    submodule_from_generators,
    submodule_to_json,
)
from ..operators import BoundedOperator, operator_to_json, random_operator
from ..unbounded.families import (
    DiagOperator,
    ExplicitFamily,
    ScalarFamily,
    family_to_json,
    make_diag_operator,
)

FAMILY_KINDS = ("poly-scalar", "reciprocal", "constant", "explicit")
BASE_KINDS = ("generic", "normal", "hermitian", "positive")

# declared parameter ranges
C_RANGE = (0.5, 1.0)
Q_RANGE = (0.5, 1.25)
EXPLICIT_K = (1, 4)

DEFAULT_TOLERANCES = {"proj": 1e-10, "adj": 1e-10, "rt": 1e-8}


@dataclass(frozen=True)
class Caps:
    max_block_dim: int = 8
    max_mult: int = 8
    max_N: int = 64
    max_blocks: int = 3


@dataclass(frozen=True)
class Template:
    """What a suite may draw from: caps, truncation and tolerances."""

    max_block_dim: int = 4
    max_mult: int = 4
    max_blocks: int = 2
    N: int = 16
    tol: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    # fixed shapes override the random draw when given
    block_dims: tuple[int, ...] | None = None
    multiplicities: tuple[int, ...] | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("block_dims", "multiplicities"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d


@dataclass(frozen=True)
class InstanceSpec:
    """Everything needed to rebuild one instance bit for bit."""

    seed: int
    block_dims: tuple[int, ...]
    multiplicities: tuple[int, ...]
    target_multiplicities: tuple[int, ...]
    family: dict
    N: int
    tol: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("block_dims", "multiplicities", "target_multiplicities"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_json(cls, data: dict) -> InstanceSpec:
        return cls(int(data["seed"]), tuple(data["block_dims"]), tuple(data["multiplicities"]),
                   tuple(data["target_multiplicities"]), dict(data["family"]), int(data["N"]),
                   dict(data.get("tol", DEFAULT_TOLERANCES)))


@dataclass(frozen=True, eq=False)
class Instance:
    spec: InstanceSpec
    algebra: CStarAlgebra
    source: HilbertModule
    target: HilbertModule
    base: BoundedOperator
    operator: BoundedOperator
    submodule: Submodule
    t: DiagOperator

    @property
    def modules(self) -> tuple[HilbertModule, HilbertModule]:
        return self.source, self.target

    def to_json(self) -> dict:
        return {"spec": self.spec.to_json(),
                "modules": [module_to_json(self.source), module_to_json(self.target)],
                "operator": operator_to_json(self.operator),
                "submodule": submodule_to_json(self.submodule),
                "family": family_to_json(self.t)}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def instance_seed(master: int, index: int) -> int:
    """64-bit seed for instance ``index``, independent of evaluation order."""
    ss = np.random.SeedSequence([int(master) & (2**64 - 1), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def draw_spec(template: Template, master: int, index: int, *, endomorphism: bool = False,
              single_block: bool = False, deficient: bool = False, kind: str | None = None,
              base: str | None = None, control: bool = False) -> InstanceSpec:
    """Draw the shape and family parameters of instance ``index``.

    ``control`` instances get a first block of size and multiplicity at
    least 2, so that injected faults have room to show.
    """
    seed = instance_seed(master, index)
    rng = np.random.default_rng(seed ^ 0x5EED)
    k = 1 if single_block else int(rng.integers(1, template.max_blocks + 1))
    dims = [int(rng.integers(1, template.max_block_dim + 1)) for _ in range(k)]
    mult = [int(rng.integers(0, template.max_mult + 1)) for _ in range(k)]
    mult[0] = max(mult[0], 1)
    if template.block_dims is not None:
        dims = list(template.block_dims[:1] if single_block else template.block_dims)
        k = len(dims)
        mult = (mult * k)[:k]
    if template.multiplicities is not None:
        if len(template.multiplicities) != k:
            raise ValueError("multiplicities must match the number of blocks")
        mult = list(template.multiplicities)
    if control:
        dims[0] = max(dims[0], min(2, template.max_block_dim))
        mult[0] = max(mult[0], min(2, template.max_mult))
    if endomorphism or template.multiplicities is not None:
        tmult = list(mult)
    else:
        tmult = [int(rng.integers(0, template.max_mult + 1)) for _ in range(k)]
        tmult[0] = max(tmult[0], 1)
        if control:
            tmult[0] = max(tmult[0], min(2, template.max_mult))

    kind = kind or FAMILY_KINDS[int(rng.integers(len(FAMILY_KINDS)))]
    if base is None:
        base = BASE_KINDS[index % len(BASE_KINDS)] if endomorphism else "generic"
    if base != "generic" and not endomorphism:
        raise ValueError(f"base kind {base!r} needs an endomorphism")
    mag = float(rng.uniform(*C_RANGE))
    if base in ("hermitian", "positive"):
        c = [mag, 0.0]
    else:
        ph = float(rng.uniform(0, 2 * np.pi))
        c = [float(mag * np.cos(ph)), float(mag * np.sin(ph))]
    fam = {"kind": kind, "base": base, "c": c}
    if kind in ("poly-scalar", "reciprocal"):
        fam["q"] = float(rng.uniform(*Q_RANGE))
    if kind == "explicit":
        fam["K"] = int(rng.integers(EXPLICIT_K[0], EXPLICIT_K[1] + 1))
    if deficient:
        fam["rank_drop"] = 1
    return InstanceSpec(seed, tuple(dims), tuple(mult), tuple(tmult), fam, template.N,
                        dict(template.tol))


def _check_caps(spec: InstanceSpec, caps: Caps) -> None:
    if len(spec.block_dims) > caps.max_blocks:
        raise CapExceeded(f"{len(spec.block_dims)} blocks > cap {caps.max_blocks}")
    if any(n > caps.max_block_dim for n in spec.block_dims):
        raise CapExceeded(f"block dims {spec.block_dims} exceed cap {caps.max_block_dim}")
    if any(m > caps.max_mult for m in spec.multiplicities + spec.target_multiplicities):
        raise CapExceeded(f"multiplicities exceed cap {caps.max_mult}")
    if spec.N > caps.max_N:
        raise CapExceeded(f"N = {spec.N} > cap {caps.max_N}")


def _base_block(kind: str, E: HilbertModule, F: HilbertModule, rng: np.random.Generator,
                rank_drop: int) -> BoundedOperator:
    """Base operator of the requested kind (``rank_drop`` lowers generic ranks)."""
    blocks = []
    for m, p in zip(E.multiplicities, F.multiplicities):
        r = max(min(m, p) - rank_drop, 0)
        X = la.random_matrix(rng, (m, r)) @ la.random_matrix(rng, (r, p))
        if kind == "generic":
            blocks.append(X)
        elif kind == "hermitian":
            blocks.append(X + la.dagger(X))
        elif kind == "positive":
            blocks.append(X @ la.dagger(X))
        elif kind == "normal":
            U, _ = np.linalg.qr(la.random_matrix(rng, (m, m))) if m else (np.zeros((0, 0)), None)
            lam = la.random_matrix(rng, (m,))
            blocks.append((U * lam) @ la.dagger(U))
        else:
            raise ValueError(f"unknown base kind {kind!r}")
    return BoundedOperator(E, F, blocks)


def gen_instance(spec: InstanceSpec, caps: Caps = Caps()) -> Instance:
    """Build the instance described by ``spec``; deterministic in ``spec``."""
    _check_caps(spec, caps)
    rng = np.random.default_rng(spec.seed)
    A = make_algebra(spec.block_dims)
    E = make_module(A, spec.multiplicities)
    F = make_module(A, spec.target_multiplicities)
    fam = spec.family
    drop = int(fam.get("rank_drop", 0))
    B = _base_block(fam.get("base", "generic"), E, F, rng, drop)
    c = complex(*fam["c"])
    if fam["kind"] == "explicit":
        head = [_base_block(fam.get("base", "generic"), E, F, rng, drop) for _ in range(fam["K"])]
        family = ExplicitFamily(head, BoundedOperator(E, F, [c * b for b in B.blocks]))
    else:
        family = ScalarFamily(fam["kind"], B, c, fam.get("q", 1.0))
    t = make_diag_operator(E, F, family, check_n=spec.N)

    op = random_operator(E, F, rng)
    # rank-one generators keep the submodule proper in most blocks
    gens = [E.vector([la.random_matrix(rng, (n, 1)) @ la.random_matrix(rng, (1, m))
                      for n, m in E.shapes])
            for _ in range(int(rng.integers(1, 4)))]
    W = submodule_from_generators(E, gens)
    return Instance(spec, A, E, F, B, op, W, t)


def with_tolerances(spec: InstanceSpec, **tol) -> InstanceSpec:
    return replace(spec, tol={**spec.tol, **tol})
