"""``tmv`` command-line front end.

Exit codes: 0 pass, 1 fail (with a counterexample where there is one),
2 usage or input error, 3 resource cap exceeded (no verdict).
"""
from __future__ import annotations

import argparse
import sys

from .automaton import (
    ResourceExhausted, check_forward_simulation, equivalent_lts, is_external,
    iter_traces, refines,
)
from .history import Bounds, History, ParseError, parse_history, serialize_history, well_formed
from .models import MODEL_NAMES, build_model
from .opacity import end_to_end_opaque
from .stm.relations import RELATIONS

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _err(msg):
    print(f"tmv: {msg}", file=sys.stderr)


def _bounds(args) -> Bounds:
    try:
        return Bounds(args.txns, args.addrs, args.vals)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _model(name, args, bounds):
    try:
        return build_model(name, bounds, tso=args.tso, bufsize=args.buf)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _print_trace(trace, bounds, out=None):
    out = out or sys.stdout
    out.write(serialize_history(History(tuple(trace), bounds)))
    if trace:
        out.write("\n")


def cmd_check_opacity(args) -> int:
    try:
        if args.file == "-":
            text = sys.stdin.read()
        else:
            with open(args.file) as fh:
                text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    try:
        h = parse_history(text)
    except ParseError as exc:
        raise UsageError(f"{args.file}: {exc}") from None
    if not well_formed(h):
        raise UsageError(f"{args.file}: history is not well-formed")
    for k in range(len(h) + 1):
        hs = end_to_end_opaque(h[:k])
        if hs is None:
            print(f"not opaque: the prefix of length {k} has no sequential witness")
            _print_trace(h.events[:k], h.bounds)
            return EXIT_FAIL
        if args.witness:
            print(f"# prefix {k}: witness")
            _print_trace(hs.events, h.bounds)
    print("opaque")
    return EXIT_PASS


def cmd_refine(args) -> int:
    b = _bounds(args)
    spec, impl = _model(args.spec, args, b), _model(args.impl, args, b)
    res = refines(spec, impl, args.max_states, args.depth)
    if res.ok:
        print(f"PASS: traces({impl.name}) within traces({spec.name}); {res.pairs} pairs explored")
        return EXIT_PASS
    print(f"FAIL: trace of {impl.name} not produced by {spec.name}:")
    _print_trace(res.counterexample, b)
    return EXIT_FAIL


def cmd_equiv(args) -> int:
    b = _bounds(args)
    A, B = _model(args.a, args, b), _model(args.b, args, b)
    res = equivalent_lts(A, B, args.max_states, args.depth, args.jobs)
    if res.ok:
        print(f"PASS: {A.name} and {B.name} have the same traces")
        return EXIT_PASS
    has, lacks = (A, B) if res.direction == "a-not-in-b" else (B, A)
    print(f"FAIL: trace of {has.name} not produced by {lacks.name}:")
    _print_trace(res.counterexample, b)
    return EXIT_FAIL


def cmd_distinguish(args) -> int:
    b = _bounds(args)
    A, B = _model(args.a, args, b), _model(args.b, args, b)
    res = refines(B, A, args.max_states, args.depth)
    if res.ok:
        print(f"none found: every trace of {A.name} is a trace of {B.name} at these bounds")
        return EXIT_FAIL
    print(f"shortest trace of {A.name} not in {B.name}:")
    _print_trace(res.counterexample, b)
    return EXIT_PASS


def cmd_simcheck(args) -> int:
    b = _bounds(args)
    try:
        impl_name, spec_name, rel = RELATIONS[args.relation]
    except KeyError:
        raise UsageError(f"unknown relation {args.relation!r}; choose from {', '.join(RELATIONS)}") from None
    if (args.impl, args.spec) != (impl_name, spec_name):
        raise UsageError(f"relation {args.relation} relates {impl_name} to {spec_name}")
    impl, spec = _model(args.impl, args, b), _model(args.spec, args, b)
    res = check_forward_simulation(impl, spec, rel, args.max_states)
    if res.ok:
        print(f"PASS: {rel.name} is a forward simulation from {impl.name} to {spec.name}; "
              f"{res.pairs} pairs explored")
        return EXIT_PASS
    v = res.violation
    print(f"FAIL: {v['reason']}")
    print(f"  action:   {v['action']}")
    print(f"  concrete: {v['concrete']}")
    print(f"  abstract: {v['abstract']}")
    print("  external trace leading to the pair:")
    _print_trace([a for a in v["path"] if is_external(a)], b)
    return EXIT_FAIL


def cmd_enumerate(args) -> int:
    b = _bounds(args)
    A = _model(args.model, args, b)
    out = sys.stdout if args.output in (None, "-") else None
    try:
        fh = out or open(args.output, "w")
    except OSError as exc:
        raise UsageError(f"cannot write {args.output}: {exc.strerror}") from None
    count = 0
    try:
        for tr in iter_traces(A, args.depth, args.max_states):
            if count:
                fh.write("\n")
            _print_trace(tr, b, fh)
            count += 1
    finally:
        if out is None:
            fh.close()
    print(f"{count} traces", file=sys.stderr)
    return EXIT_PASS


def _nonneg(text):
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def _positive(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tmv", description="Bounded checking of transactional memory models.")
    sub = p.add_subparsers(dest="command", required=True)

    bounds = argparse.ArgumentParser(add_help=False)
    bounds.add_argument("--txns", type=_positive, required=True, help="number of transactions")
    bounds.add_argument("--addrs", type=_positive, default=2, help="number of addresses (default 2)")
    bounds.add_argument("--vals", type=_positive, default=2, help="number of values (default 2)")
    bounds.add_argument("--tso", action="store_true", help="run fine-grained models on TSO memory")
    bounds.add_argument("--buf", type=_positive, default=2, help="TSO store buffer size (default 2)")
    bounds.add_argument("--max-states", type=_positive, default=None,
                        help="state cap (default $TMV_MAX_STATES or 50 million)")

    depth = argparse.ArgumentParser(add_help=False)
    depth.add_argument("--depth", type=_nonneg, default=None, help="give up beyond this exploration depth")

    c = sub.add_parser("check-opacity", help="decide opacity of a history file")
    c.add_argument("file", help="history file, or - for standard input")
    c.add_argument("--witness", action="store_true", help="print a sequential witness for every prefix")
    c.set_defaults(func=cmd_check_opacity)

    c = sub.add_parser("refine", parents=[bounds, depth], help="check traces(IMPL) within traces(SPEC)")
    c.add_argument("spec", metavar="SPEC")
    c.add_argument("impl", metavar="IMPL")
    c.set_defaults(func=cmd_refine)

    c = sub.add_parser("equiv", parents=[bounds, depth], help="check two models have the same traces")
    c.add_argument("a", metavar="A")
    c.add_argument("b", metavar="B")
    c.add_argument("--jobs", type=_positive, default=1, help="run both directions in parallel when > 1")
    c.set_defaults(func=cmd_equiv)

    c = sub.add_parser("distinguish", parents=[bounds, depth], help="shortest trace of A that B cannot produce")
    c.add_argument("a", metavar="A")
    c.add_argument("b", metavar="B")
    c.set_defaults(func=cmd_distinguish)

    c = sub.add_parser("simcheck", parents=[bounds], help="check a forward simulation")
    c.add_argument("impl", metavar="IMPL")
    c.add_argument("spec", metavar="SPEC")
    c.add_argument("relation", metavar="RELATION", help=", ".join(RELATIONS))
    c.set_defaults(func=cmd_simcheck)

    c = sub.add_parser("enumerate", parents=[bounds], help="write every trace up to a length")
    c.add_argument("model", metavar="MODEL", help=", ".join(MODEL_NAMES))
    c.add_argument("--depth", type=_nonneg, required=True, help="maximum number of events per trace")
    c.add_argument("-o", "--output", default=None, help="output file (default standard output)")
    c.set_defaults(func=cmd_enumerate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except ResourceExhausted as exc:
        _err(f"resource cap exceeded, no verdict: {exc}")
        return EXIT_RESOURCE
    except MemoryError:
        _err("out of memory, no verdict")
        return EXIT_RESOURCE


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
