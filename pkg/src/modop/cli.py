"""Command line: ``modop gen | check <suite> | transform | report``.

Exit status is 0 when everything passes, 1 when a property fails and 2
for usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import _linalg as la
from .errors import ModopError
from .harness.instances import DEFAULT_TOLERANCES, Caps, Template, draw_spec, gen_instance
from .harness.suites import SCHEMA, SUITES, dumps_report, run_suite
from .unbounded.calculus import bounded_transform, inverse_transform
from .unbounded.families import diag_from_json, scalar_cell_operator

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SCALAR_SHORTHAND = {"diag-poly": "poly-scalar", "diag-recip": "reciprocal",
                    "diag-const": "constant"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None
    if any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("dimensions must be nonnegative")
    return vals


def _tol(text: str) -> dict:
    """``1e-10`` (projector and adjoint tolerance) or ``key=value,...``."""
    out = {}
    try:
        if "=" not in text:
            v = float(text)
            return {"proj": v, "adj": v}
        for part in text.split(","):
            k, v = part.split("=")
            if k not in DEFAULT_TOLERANCES:
                raise argparse.ArgumentTypeError(f"unknown tolerance {k!r}")
            out[k] = float(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance {text!r}") from None
    return out


def _template(args) -> Template:
    kw = {"N": args.trunc, "tol": {**DEFAULT_TOLERANCES, **(args.tol or {})}}
    if args.block_dims is not None:
        if len(args.block_dims) == 1 and args.mult is None:
            kw["max_block_dim"] = args.block_dims[0]
        else:
            kw["block_dims"] = args.block_dims
            kw["max_blocks"] = len(args.block_dims)
    if args.mult is not None:
        if len(args.mult) == 1 and args.block_dims is None:
            kw["max_mult"] = args.mult[0]
        else:
            kw["multiplicities"] = args.mult
    t = Template(**kw)
    caps = Caps()
    dims = t.block_dims or (t.max_block_dim,)
    mult = t.multiplicities or (t.max_mult,)
    if (max(dims, default=0) > caps.max_block_dim or max(mult, default=0) > caps.max_mult
            or len(dims) > caps.max_blocks or not 1 <= t.N <= caps.max_N):
        raise UsageError(f"requested shapes exceed the caps {caps}")
    return t


def _common(p: argparse.ArgumentParser, count: int) -> None:
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--count", type=int, default=count, help="number of instances")
    p.add_argument("--block-dims", type=_int_list, default=None,
                   help="max block size, or a fixed comma list of block sizes")
    p.add_argument("--mult", type=_int_list, default=None,
                   help="max multiplicity, or a fixed comma list")
    p.add_argument("--trunc", type=int, default=16, help="truncation window N")
    p.add_argument("--tol", type=_tol, default=None, help="tolerance or key=value list")
    p.add_argument("--json", metavar="OUT", default=None, help="write JSON to OUT ('-' = stdout)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="modop", description="Operator checks on Hilbert modules over "
                                          "finite sums of matrix algebras.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="emit instance JSON")
    _common(g, 1)
    g.add_argument("--suite", choices=sorted(SUITES), default=None,
                   help="draw shapes the way this suite does")

    c = sub.add_parser("check", help="run one suite and print its report")
    c.add_argument("suite")
    _common(c, 25)
    c.add_argument("--workers", type=int, default=1)

    t = sub.add_parser("transform", help="bounded transform of a family")
    t.add_argument("--family", required=True,
                   help="diag-poly:q, diag-recip:q, diag-const:c or a family JSON file")
    t.add_argument("--n", type=int, default=16, help="number of blocks to print")
    t.add_argument("--inverse", action="store_true", help="apply the inverse transform")
    t.add_argument("--json", metavar="OUT", default=None)

    r = sub.add_parser("report", help="run every suite and write a JSON report")
    _common(r, 25)
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--suites", type=lambda s: s.split(","), default=None)
    return p


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(out, "w") as fh:
            fh.write(text + "\n")


def _cmd_gen(args) -> int:
    template = _template(args)
    draw = SUITES[args.suite].draw if args.suite else {}
    items = [gen_instance(draw_spec(template, args.seed, i, **draw)).to_json()
             for i in range(args.count)]
    _emit(json.dumps(items if args.count != 1 else items[0], sort_keys=True),
          args.json if args.json else "-")
    return EXIT_OK


def _cmd_check(args) -> int:
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; known: {', '.join(SUITES)}")
    rep = run_suite(args.suite, args.count, _template(args), args.seed, workers=args.workers)
    print(rep.summary())
    print(f"  claim: {rep.claim}")
    for k, v in rep.max_residuals().items():
        print(f"  max {k}: {v}")
    for f in rep.failures:
        print(f"  failed instance {f.index}: {json.dumps(f.spec.to_json(), sort_keys=True)}"
              + (f" ({f.error})" if f.error else ""))
    if args.json:
        _emit(dumps_report(rep.to_json()), args.json)
    return EXIT_OK if rep.passed else EXIT_FAIL


def _parse_family(text: str):
    if ":" in text and text.split(":", 1)[0] in SCALAR_SHORTHAND:
        name, val = text.split(":", 1)
        try:
            x = float(val)
        except ValueError:
            raise UsageError(f"bad family parameter {val!r}") from None
        kind = SCALAR_SHORTHAND[name]
        if kind == "constant":
            return scalar_cell_operator(kind, c=x)
        return scalar_cell_operator(kind, q=x)
    try:
        with open(text) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read family {text!r}: {exc}") from None
    return diag_from_json(data)


def _cmd_transform(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be positive")
    t = _parse_family(args.family)
    out = inverse_transform(t, args.n) if args.inverse else bounded_transform(t, args.n).F_t
    blocks = [out.block(j) for j in range(1, args.n + 1)]
    if args.json:
        _emit(json.dumps({"op": "inverse_transform" if args.inverse else "bounded_transform",
                          "blocks": [[la.encode_matrix(b) for b in B.blocks] for B in blocks]},
                         sort_keys=True), args.json)
        return EXIT_OK
    scalar = all(len(B.blocks) == 1 and B.blocks[0].shape == (1, 1) for B in blocks)
    for j, B in enumerate(blocks, 1):
        if scalar:
            z = B.blocks[0][0, 0]
            print(f"{j}\t{z.real:.16g}" if z.imag == 0 else f"{j}\t{z:.16g}")
        else:
            print(f"{j}\t" + json.dumps([la.encode_matrix(b) for b in B.blocks]))
    return EXIT_OK


def _cmd_report(args) -> int:
    ids = args.suites or list(SUITES)
    unknown = [s for s in ids if s not in SUITES]
    if unknown:
        raise UsageError(f"unknown suites: {', '.join(unknown)}")
    template = _template(args)
    reps = [run_suite(s, args.count, template, args.seed, workers=args.workers) for s in ids]
    for rep in reps:
        print(rep.summary())
    ok = all(r.passed for r in reps)
    data = {"schema": SCHEMA, "seed": args.seed, "passed": ok,
            "suites": [r.to_json() for r in reps],
            "wall_clock_s": sum(r.wall_clock for r in reps)}
    _emit(dumps_report(data), args.json if args.json else "-")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"gen": _cmd_gen, "check": _cmd_check, "transform": _cmd_transform,
            "report": _cmd_report}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.cmd](args)
    except UsageError as exc:
        print(f"modop: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"modop: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModopError as exc:
        # CapExceeded and friends are raised by bad input
        print(f"modop: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
