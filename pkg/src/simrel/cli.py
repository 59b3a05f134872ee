"""Command line front end.

Subcommands: compute, verify, compare, random, bench.  Result documents go
to stdout and nothing else does; diagnostics go to stderr.  Exit codes:
0 success, 1 usage error, 2 input/validation error, 3 mismatch found by
verify or compare.
"""

import argparse
import sys
import time

from . import io as fmt
from . import oracle
from ._kernels import JIT_ENABLED
from .errors import SimrelError
from .lts import normalize
from .sim import Strategy, run

VERIFY_STATE_CAP = oracle.ORACLE_STATE_CAP

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_MISMATCH = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser():
    parser = _Parser(prog="simrel",
                     description="Coarsest simulation preorder over a "
                                 "labelled transition system.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_strategy=True):
        p.add_argument("input", help="Aldebaran .aut file")
        p.add_argument("--pr", metavar="PATH",
                       help="initial partition-relation pair (.pr); defaults "
                            "to the universal preorder")
        if with_strategy:
            p.add_argument("--strategy",
                           choices=[s.value for s in Strategy],
                           default=Strategy.COMPROMISE.value)
        p.add_argument("--debug-checks", action="store_true",
                       help="run internal invariant checks (slow)")

    p = sub.add_parser("compute", help="compute and print the result")
    add_common(p)
    p.add_argument("--expand", action="store_true",
                   help="also list the induced relation as state pairs")

    p = sub.add_parser("verify",
                       help="compute, then cross-check against the "
                            "brute-force reference (max %d states)"
                            % VERIFY_STATE_CAP)
    add_common(p)

    p = sub.add_parser("compare",
                       help="run all three strategies and require identical "
                            "results")
    add_common(p, with_strategy=False)

    p = sub.add_parser("random", help="emit a seeded random .aut")
    p.add_argument("--seed", type=int, default=1, metavar="U64")
    p.add_argument("--states", type=int, default=8, metavar="N")
    p.add_argument("--letters", type=int, default=2, metavar="N")
    p.add_argument("--transitions", type=int, default=16, metavar="N")

    p = sub.add_parser("bench", help="time one run and print counters")
    add_common(p)
    return parser


def _load_instance(args):
    try:
        with open(args.input, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise SimrelError("cannot read %s: %s" % (args.input, exc.strerror))
    raw, first_state = fmt.parse_aut(text)
    if getattr(args, "pr", None):
        try:
            with open(args.pr, "r", encoding="utf-8") as handle:
                pr_text = handle.read()
        except OSError as exc:
            raise SimrelError("cannot read %s: %s" % (args.pr, exc.strerror))
        blocks, pairs = fmt.parse_pr(pr_text, raw.num_states)
    else:
        blocks, pairs = None, None
    lts, report = normalize(raw)
    report.first_state = first_state
    if blocks is None:
        blocks, pairs = fmt.default_pr(lts)
    else:
        blocks, pairs = fmt.remap_pr(blocks, pairs, report)
    return lts, blocks, pairs


def _cmd_compute(args):
    lts, blocks, pairs = _load_instance(args)
    result = run(lts, blocks, pairs, args.strategy,
                 debug_checks=args.debug_checks)
    sys.stdout.write(fmt.emit_result(result, lts, expand=args.expand))
    return EXIT_OK


def _cmd_verify(args):
    lts, blocks, pairs = _load_instance(args)
    if lts.num_states > VERIFY_STATE_CAP:
        raise SimrelError(
            "verify is capped at %d states (got %d); use 'compare' to "
            "cross-check large instances" % (VERIFY_STATE_CAP, lts.num_states))
    result = run(lts, blocks, pairs, args.strategy,
                 debug_checks=args.debug_checks)
    init_rel = oracle.induced_relation(lts.num_states, blocks, pairs)
    expected = oracle.naive_coarsest_simulation(lts, init_rel)
    got = result.induced_relation()
    sys.stdout.write(fmt.emit_result(result, lts))
    if (got == expected.bits).all():
        print("verify: induced relation matches the reference", file=sys.stderr)
        return EXIT_OK
    diff = []
    for q in range(lts.num_states):
        for r in range(lts.num_states):
            if bool(got[q, r]) != bool(expected.bits[q, r]):
                diff.append("(%s, %s): solver=%s reference=%s"
                            % (lts.state_name(q), lts.state_name(r),
                               bool(got[q, r]), bool(expected.bits[q, r])))
    print("verify: MISMATCH on %d pairs" % len(diff), file=sys.stderr)
    for line in diff:
        print("  " + line, file=sys.stderr)
    return EXIT_MISMATCH


def _cmd_compare(args):
    lts, blocks, pairs = _load_instance(args)
    docs = {}
    for strategy in Strategy:
        result = run(lts, blocks, pairs, strategy,
                     debug_checks=args.debug_checks)
        docs[strategy.value] = fmt.emit_result(result, lts,
                                               include_stats=False)
    names = sorted(docs)
    baseline = docs[names[0]]
    mismatched = [n for n in names[1:] if docs[n] != baseline]
    if mismatched:
        print("compare: MISMATCH between %s and %s"
              % (names[0], ", ".join(mismatched)), file=sys.stderr)
        return EXIT_MISMATCH
    sys.stdout.write(baseline)
    print("compare: all strategies agree", file=sys.stderr)
    return EXIT_OK


def _cmd_random(args):
    raw = fmt.random_lts(args.seed, args.states, args.letters,
                         args.transitions)
    sys.stdout.write(fmt.emit_raw_aut(raw))
    return EXIT_OK


def _cmd_bench(args):
    lts, blocks, pairs = _load_instance(args)
    run(lts, blocks, pairs, args.strategy,
        debug_checks=args.debug_checks)  # warmup, pays any JIT compile cost
    start = time.perf_counter()
    result = run(lts, blocks, pairs, args.strategy,
                 debug_checks=args.debug_checks)
    elapsed = time.perf_counter() - start
    lines = {
        "strategy": args.strategy,
        "jit": "on" if JIT_ENABLED else "off",
        "states": lts.num_states,
        "letters": lts.num_letters,
        "transitions": lts.num_transitions,
        "state_letters": lts.num_state_letters,
        "blocks": result.partition.num_blocks,
        "elapsed_s": "%.6f" % elapsed,
    }
    for key, value in lines.items():
        print("%s=%s" % (key, value))
    for key, value in result.stats.as_dict().items():
        print("%s=%d" % (key, value))
    return EXIT_OK


_COMMANDS = {
    "compute": _cmd_compute,
    "verify": _cmd_verify,
    "compare": _cmd_compare,
    "random": _cmd_random,
    "bench": _cmd_bench,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except SimrelError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
