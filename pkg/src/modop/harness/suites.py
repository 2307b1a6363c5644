"""Property suites over random instances, each with a built-in negative control.

Every suite is a falsification attempt at fixed caps: passing instances say
nothing past the caps, one failing instance is a bug.  A suite also runs on
an instance whose computed artifact has been deliberately corrupted; if that
control is not caught the suite itself is reported as failed.
"""

from __future__ import annotations

import math
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import _linalg as la
from ..errors import ModopError
from ..hilbert_module import (
    Submodule,
    biorthogonal_complement,
    inner_product,
    orthogonal_complement,
    random_vector,
    submodule_distance,
    trace_inner,
)
from ..operators import BoundedOperator, adjoint, compose, operator_norm
from ..reduction import (
    canonical_localizations,
    localization_square_residual,
    phi,
    phi_inverse,
)
from ..unbounded import blockwise
from ..unbounded.calculus import (
    adjoint_via_graph,
    bounded_transform,
    classify,
    graph,
    graph_decomposition_residual,
    one_plus_tstar_t_surjective,
    predicates_over,
)
from ..unbounded.criteria import (
    DEFAULT_C_SAMPLES,
    BASIS_TOL,
    SOLVE_TOL,
    block_identities,
    closed_range_check,
    complement_residual,
    graph_inclusion,
    identities_hold,
    kucerovsky_geometric_check,
    regularity_check,
)
from ..unbounded.families import DiagOperator, ExplicitFamily
from .instances import Instance, InstanceSpec, Template, draw_spec, gen_instance

SCHEMA = "modop-report/1"

#: Size of the entry perturbation used by most negative controls.
FAULT = 1e-3


def _bump(T: BoundedOperator, delta: complex = FAULT) -> BoundedOperator:
    """``T`` with ``delta`` added to entry (0, 0) of its first nonempty block."""
    blocks = [np.array(b) for b in T.blocks]
    for b in blocks:
        if b.size:
            b[0, 0] += delta
            break
    return BoundedOperator(T.source, T.target, blocks)


def _maxabs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "+inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


# -- individual suites ------------------------------------------------------
# Each check returns (passed, residuals, details).


def _prop22(inst: Instance, fault: bool):
    t, N = inst.t, inst.spec.N
    worst: dict = {}
    for j in range(1, N + 1):
        T = t.block(j)
        Fs = None
        if fault and j == 1:
            # transform of the adjoint recomputed from a corrupted matrix
            Fs = blockwise.transform_block(_bump(adjoint(T)))[0]
        for k, v in block_identities(T, Fs=Fs).items():
            worst[k] = max(worst.get(k, 0.0), v)
    ok = identities_hold(worst, BASIS_TOL, inst.spec.tol["proj"])
    return ok, worst, {}


def _expected_closed_c(inst: Instance) -> float:
    """Closed-range constant straight from the family parameters."""
    def smin(ops):
        vals = []
        for T in ops:
            for b in T.blocks:
                if b.size:
                    s = np.linalg.svd(b, compute_uv=False)
                    vals.extend(s[s > la.RANK_RTOL * s[0]] if s[0] > 0 else [])
        return min(vals) if vals else math.inf

    fam = inst.t.family
    if isinstance(fam, ExplicitFamily):
        return smin(list(fam.blocks) + [fam.tail])
    s = smin([fam.base])
    if math.isinf(s):
        return s
    if fam.kind == "reciprocal":
        return 0.0
    # poly-scalar with q > 0 is smallest at j = 1
    return abs(fam.c) * s


def _prop23(inst: Instance, fault: bool):
    t, N = inst.t, inst.spec.N
    cert = closed_range_check(t, N)
    expected = _expected_closed_c(inst)
    c = cert.c
    if fault and math.isfinite(c):
        c = 2 * max(c, cert.materialized_min if math.isfinite(cert.materialized_min) else 0) + 1
    rel = 0.0 if (math.isinf(c) and math.isinf(expected)) else abs(c - expected) / max(1.0, expected)
    # ||x t_j|| >= c ||x|| on the orthogonal complement of the kernel
    rng = np.random.default_rng(inst.spec.seed)
    viol = 0.0
    if math.isfinite(c):
        for j in range(1, N + 1):
            for b in t.block(j).blocks:
                if not b.size:
                    continue
                U, s, _ = np.linalg.svd(b)
                r = la.numerical_rank(s)
                if r == 0:
                    continue
                rows = U[:, :r].conj().T
                xs = np.vstack([rows, la.random_matrix(rng, (2, r)) @ rows])
                for x in xs:
                    nx = np.linalg.norm(x)
                    viol = max(viol, (c * nx - np.linalg.norm(x @ b)) / (max(c, 1.0) * nx))
    verdict_ok = cert.verdict == (expected > 0)
    ok = verdict_ok and rel <= 1e-9 and viol <= 1e-9
    res = {"c_rel_error": rel, "lower_bound_violation": max(viol, 0.0),
           "verdict_mismatch": 0.0 if verdict_ok else 1.0}
    return ok, res, {"closed": cert.verdict, "c": _finite(float(c))}


def _thm31(inst: Instance, fault: bool):
    t, N, tol = inst.t, inst.spec.N, inst.spec.tol
    ts = adjoint_via_graph(t, N)
    mismatch = decomp = 0.0
    for j in range(1, N + 1):
        T, S = t.block(j), ts.block(j)
        if fault and j == 1:
            S = _bump(S)
        for a, b in zip(T.blocks, S.blocks):
            mismatch = max(mismatch, _maxabs(b - la.dagger(a)))
        decomp = max(decomp, graph_decomposition_residual(T, S))
    surj = one_plus_tstar_t_surjective(t, N, rng=np.random.default_rng(inst.spec.seed))
    ok = mismatch <= tol["adj"] and decomp <= tol["proj"] and bool(surj)
    return ok, {"conjugate_transpose_mismatch": mismatch, "decomposition": decomp,
                "one_plus_solve": surj.solve_residual}, {}


def _corrupt_graph(gm, j: int, W: Submodule):
    subs = list(gm.submodules)
    subs[j - 1] = W
    return type(gm)(gm.t, gm.window, tuple(subs))


def _regularity(inst: Instance, gm):
    cert = regularity_check(inst.t, inst.spec.N, DEFAULT_C_SAMPLES, graph_module=gm,
                            rng=np.random.default_rng(inst.spec.seed))
    res = {k: float(v) for k, v in cert.residuals.items() if isinstance(v, float)}
    return cert, res


def _cor32(inst: Instance, fault: bool):
    gm = graph(inst.t, inst.spec.N)
    if fault:
        gm = _corrupt_graph(gm, 1, orthogonal_complement(gm.submodule(1)))
    cert, res = _regularity(inst, gm)
    # every instance is regular, so the graph must be complemented, and conversely
    iff_ok = cert.graph_complemented == cert.verdict
    res["iff_mismatch"] = 0.0 if iff_ok else 1.0
    return bool(cert.verdict and iff_ok), res, {"regular": cert.verdict}


def _cor33(inst: Instance, fault: bool):
    rng = np.random.default_rng(inst.spec.seed)
    err = inv = 0.0
    for j in range(1, inst.spec.N + 1):
        for b in inst.t.block(j).blocks:
            if not b.size:
                continue
            K = b @ la.dagger(b)
            for i, c in enumerate(DEFAULT_C_SAMPLES):
                M = c * np.eye(K.shape[0]) + K
                w = la.random_matrix(rng, (3, K.shape[0]))
                u = np.linalg.solve(M.T, w.T).T
                if fault and j == 1 and i == 0:
                    u = u + FAULT
                err = max(err, la.backward_error(M, u, w))
                # ||M^{-1}|| <= 1/c, up to the n eps ||M|| accuracy of the spectrum
                slack = M.shape[0] * np.finfo(float).eps * la.spectral_norm(M)
                inv = max(inv, (c - slack - la.min_eigenvalue(M)) / c)
    ok = err <= SOLVE_TOL and inv <= SOLVE_TOL
    return ok, {"solve_backward_error": err, "inverse_bound_excess": max(inv, 0.0)}, {}


def _thm34(inst: Instance, fault: bool):
    t = inst.t
    inclusion = None
    if fault:
        def inclusion(j):
            T = t.block(j)
            return graph_inclusion(_bump(T) if j == 1 else T)
    ev = kucerovsky_geometric_check(t, inst.spec.N, inclusion)
    return ev.verdict, dict(ev.residuals), {"range_is_graph": ev.range_is_graph,
                                            "pe_s_dense": ev.pe_s_dense,
                                            "biorthogonal_ok": ev.biorthogonal_ok}


def _raw_matrices(T: BoundedOperator) -> list[np.ndarray]:
    """``T`` as plain matrices on row-major flattened blocks: ``kron(1_n, T_i)``."""
    return [np.kron(np.eye(n), b) for n, b in zip(T.source.algebra.block_dims, T.blocks)]


def _a_linearity_defect(raw: list[np.ndarray], T: BoundedOperator, rng) -> float:
    """How badly the raw maps fail to commute with the algebra action."""
    worst = 0.0
    for R, n, m, p in zip(raw, T.source.algebra.block_dims, T.source.multiplicities,
                          T.target.multiplicities):
        if not R.size:
            continue
        a = la.random_matrix(rng, (n, n))
        lhs = np.kron(a.T, np.eye(m)) @ R
        rhs = R @ np.kron(a.T, np.eye(p))
        worst = max(worst, la.spectral_norm(lhs - rhs) / (la.spectral_norm(a) * max(la.spectral_norm(R), 1.0)))
    return worst


def _thm36(inst: Instance, fault: bool):
    tol = inst.spec.tol
    rng = np.random.default_rng(inst.spec.seed)
    W = inst.submodule
    cres = complement_residual(W)
    bio = submodule_distance(biorthogonal_complement(W), W)

    T = inst.operator
    raw = _raw_matrices(T)
    if fault:
        # a map that is linear but not A-linear, smuggled in through the raw matrix
        for R in raw:
            if R.size:
                R[0, -1] += 1.0
                break
    alin = _a_linearity_defect(raw, T, rng)

    try:
        Ts = blockwise.graph_adjoint_block(T)
        total = True
    except ModopError:
        Ts, total = adjoint(T), False
    nT = max(operator_norm(T), 1.0)
    mismatch = max((_maxabs(s - la.dagger(b)) for s, b in zip(Ts.blocks, T.blocks)), default=0.0)
    x, y = random_vector(T.source, rng), random_vector(T.target, rng)
    lhs = inner_product(T(x), y)
    rhs = inner_product(x, Ts(y))
    ip = max((_maxabs(a - b) for a, b in zip(lhs.blocks, rhs.blocks)), default=0.0)
    ip /= nT * max(x.norm(), 1e-300) * max(y.norm(), 1e-300)
    ok = (cres <= tol["proj"] and bio <= BASIS_TOL and total and alin <= 1e-12
          and mismatch <= tol["adj"] * nT and ip <= tol["adj"])
    return ok, {"complement": cres, "biorthogonal": bio, "a_linearity": alin,
                "adjoint_mismatch": mismatch, "inner_product": ip}, {"adjoint_total": total}


def _cor37(inst: Instance, fault: bool):
    gm = graph(inst.t, inst.spec.N)
    if fault:
        gm = _corrupt_graph(gm, 1, blockwise.graph_submodule(_bump(inst.t.block(1))))
    cert, res = _regularity(inst, gm)
    ok = cert.verdict and res.get("c_solve", 0.0) <= SOLVE_TOL
    return bool(ok), res, {"c_values": [[c, v] for c, v in cert.kucerovsky_c_values]}


def _window_family(blocks: list[BoundedOperator]) -> DiagOperator:
    fam = ExplicitFamily(blocks)
    return DiagOperator(fam, fam.natural_growth())


def _reduction(inst: Instance, fault: bool):
    E = inst.source
    S, T = inst.operator, inst.base
    rng = np.random.default_rng(inst.spec.seed)
    L = canonical_localizations(E)[0]
    mult = _maxabs(phi(compose(S, T), L) - phi(S, L) @ phi(T, L))
    star = _maxabs(phi(adjoint(T), L) - la.dagger(phi(T, L)))
    nT = operator_norm(T)
    nrm = abs(la.spectral_norm(phi(T, L)) - nT) / max(1.0, nT)
    back = max((_maxabs(a - b) for a, b in zip(phi_inverse(phi(T, L), L).blocks, T.blocks)),
               default=0.0)
    x, y = random_vector(E, rng), random_vector(E, rng)
    ex, ey = L.vector(L.coordinates(x)), L.vector(L.coordinates(y))
    ip = abs(trace_inner(ex, ey) - np.vdot(L.coordinates(y), L.coordinates(x)))

    N = inst.spec.N
    F = bounded_transform(inst.t, N).F_t
    if fault:
        F = _window_family([_bump(F.block(j), 1j * FAULT) if j == 1 else F.block(j)
                            for j in range(1, N + 1)])
    sq = localization_square_residual(inst.t, N, F)
    ok = max(mult, star, nrm) <= 1e-10 and back == 0.0 and ip <= 1e-12 and sq <= 1e-9
    return ok, {"multiplicativity": mult, "star": star, "norm": nrm, "round_trip": back,
                "inner_product": ip, "square": sq}, {}


def _transform(inst: Instance, fault: bool):
    t, N, tol = inst.t, inst.spec.N, inst.spec.tol
    F_t = bounded_transform(t, N).F_t
    worst = {"round_trip": 0.0, "adjoint": 0.0, "q": 0.0, "max_norm": 0.0}
    skipped = 0
    contractive = True
    for j in range(1, N + 1):
        T, F = t.block(j), F_t.block(j)
        if fault and j == 1:
            F = _bump(F)
        for f in F.blocks:
            if f.size:
                nf = la.spectral_norm(f)
                worst["max_norm"] = max(worst["max_norm"], nf)
                contractive &= nf < 1.0
        Fs = blockwise.transform_block(adjoint(T))[0]
        worst["adjoint"] = max(worst["adjoint"], max(
            (_maxabs(a - la.dagger(b)) for a, b in zip(Fs.blocks, F.blocks)), default=0.0))
        Q = blockwise.q_block(T)
        for q, f in zip(Q.blocks, F.blocks):
            if q.size:
                worst["q"] = max(worst["q"], _maxabs(q - la.psd_sqrt(np.eye(q.shape[0]) - f @ la.dagger(f))))
        nT = operator_norm(T)
        if nT > 1e3:
            skipped += 1
            continue
        if nT == 0:
            continue
        try:
            back = blockwise.inverse_transform_block(F)
        except ModopError:
            worst["round_trip"] = math.inf
            continue
        diff = max(la.spectral_norm(a - b) for a, b in zip(back.blocks, T.blocks))
        worst["round_trip"] = max(worst["round_trip"], diff / nT)
    ok = (contractive and worst["round_trip"] <= tol["rt"] and worst["adjoint"] <= tol["adj"]
          and worst["q"] <= 1e-9)
    worst = {k: _finite(v) for k, v in worst.items()}
    return ok, worst, {"round_trip_skipped": skipped}


def _transfer(inst: Instance, fault: bool):
    N = inst.spec.N
    c = classify(inst.t, N)
    fp = c.transform
    if fault:
        F = bounded_transform(inst.t, N).F_t
        shifted = []
        for j in range(1, N + 1):
            b = F.block(j)
            shifted.append(BoundedOperator(b.source, b.target,
                                           [x + 1j * FAULT * np.eye(x.shape[0]) for x in b.blocks]))
        fp = predicates_over(_window_family(shifted), N)
    agrees = c.predicates == fp
    return agrees, {"disagreements": 0.0 if agrees else 1.0}, {
        "t": [c.normal, c.selfadjoint, c.positive],
        "F_t": [fp.normal, fp.selfadjoint, fp.positive]}


# -- registry ---------------------------------------------------------------


@dataclass(frozen=True)
class Suite:
    id: str
    claim: str
    check: Callable
    draw: dict = field(default_factory=dict)
    control_draw: dict = field(default_factory=dict)


SUITES: dict[str, Suite] = {s.id: s for s in (
    Suite("prop22", "Ker(t*) = Ran(t)^perp, Ker(t) = Ran(t*)^perp, t and F_t share kernels "
                    "and ranges, and E = Ker(t) + closure Ran(t*)",
          _prop22, {"deficient": True}),
    Suite("prop23", "the range of t is closed iff ||t x|| >= c ||x|| on Ker(t)^perp for some c > 0",
          _prop23),
    Suite("thm31", "t* is read off the complement of the rotated graph and 1 + t*t is onto",
          _thm31),
    Suite("cor32", "t is regular iff its graph is orthogonally complemented", _cor32),
    Suite("cor33", "c + t*t is bijective for every sampled c > 0", _cor33),
    Suite("thm34", "the graph of t is the range of an adjointable isometry S with P_E S of "
                   "dense range and Ker(S*) complemented", _thm34),
    Suite("thm36", "closed submodules are orthogonally complemented and bounded module maps "
                   "are adjointable", _thm36),
    Suite("cor37", "every closed densely defined block-diagonal operator is regular", _cor37),
    Suite("reduction", "localization at a minimal projection is an isometric *-isomorphism "
                       "commuting with the bounded transform",
          _reduction, {"endomorphism": True, "single_block": True}),
    Suite("transform", "t -> F_t is inverted by F -> F (1 - F*F)^(-1/2), F_{t*} = F_t*, "
                       "Q_t = (1 - F_t*F_t)^(1/2), F_t strictly contractive", _transform),
    Suite("transfer", "t and F_t are normal, selfadjoint, positive together", _transfer,
          {"endomorphism": True}, {"base": "hermitian"}),
)}

#: Suites that carry the numbered claims; the last two cover the transform calculus.
CORE_SUITES = ("prop22", "prop23", "thm31", "cor32", "cor33", "thm34", "thm36", "cor37",
               "reduction")


@dataclass
class InstanceResult:
    index: int
    passed: bool
    residuals: dict
    details: dict
    spec: InstanceSpec
    error: str | None = None

    def to_json(self, with_spec: bool) -> dict:
        out = {"index": self.index, "passed": self.passed,
               "residuals": {k: _finite(v) for k, v in sorted(self.residuals.items())},
               "details": self.details}
        if self.error:
            out["error"] = self.error
        if with_spec:
            out["spec"] = self.spec.to_json()
        return out


@dataclass
class SuiteReport:
    suite: str
    claim: str
    seed: int
    count: int
    template: Template
    instances: list[InstanceResult]
    controls: list[InstanceResult]
    wall_clock: float = 0.0

    @property
    def failures(self) -> list[InstanceResult]:
        return [r for r in self.instances if not r.passed]

    @property
    def controls_caught(self) -> bool:
        return bool(self.controls) and all(not r.passed for r in self.controls)

    @property
    def passed(self) -> bool:
        return not self.failures and self.controls_caught

    def max_residuals(self) -> dict:
        worst: dict = {}
        for r in self.instances:
            for k, v in r.residuals.items():
                if isinstance(v, (int, float)):
                    worst[k] = max(worst.get(k, 0.0), float(v))
                else:
                    worst[k] = v
        return {k: _finite(v) for k, v in sorted(worst.items())}

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "suite": self.suite,
            "claim": self.claim,
            "seed": self.seed,
            "count": self.count,
            "template": self.template.to_json(),
            "passed": self.passed,
            "passed_instances": self.count - len(self.failures),
            "max_residuals": self.max_residuals(),
            "instances": [r.to_json(not r.passed) for r in self.instances],
            "negative_controls": [dict(r.to_json(True), caught=not r.passed)
                                  for r in self.controls],
            "wall_clock_s": self.wall_clock,
        }

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        ctl = "caught" if self.controls_caught else "MISSED"
        return (f"{self.suite:<10} {status}  {self.count - len(self.failures)}/{self.count} "
                f"instances, control {ctl}, {self.wall_clock:.2f}s")


def _run_one(suite: Suite, spec: InstanceSpec, index: int, fault: bool) -> InstanceResult:
    try:
        inst = gen_instance(spec)
        ok, res, det = suite.check(inst, fault)
        return InstanceResult(index, bool(ok), res, det, spec)
    except ModopError as exc:
        return InstanceResult(index, False, {}, {}, spec, f"{type(exc).__name__}: {exc}")


def run_suite(suite_id: str, count: int, template: Template | None = None, seed: int = 0,
              controls: int = 1, workers: int = 1) -> SuiteReport:
    """Run ``count`` fresh instances of a suite plus ``controls`` faulted ones."""
    if suite_id not in SUITES:
        raise KeyError(f"unknown suite {suite_id!r}; known: {', '.join(SUITES)}")
    suite = SUITES[suite_id]
    template = Template() if template is None else template
    t0 = time.perf_counter()
    specs = [draw_spec(template, seed, i, **suite.draw) for i in range(count)]
    ctl_specs = [draw_spec(template, seed, count + k, control=True,
                           **{**suite.draw, **suite.control_draw}) for k in range(controls)]
    jobs = [(s, i, False) for i, s in enumerate(specs)]
    jobs += [(s, count + k, True) for k, s in enumerate(ctl_specs)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda a: _run_one(suite, *a), jobs))
    else:
        results = [_run_one(suite, *a) for a in jobs]
    return SuiteReport(suite_id, suite.claim, seed, count, template, results[:count],
                       results[count:], time.perf_counter() - t0)


def dumps_report(data: dict) -> str:
    return json.dumps(data, sort_keys=True, indent=1)
