"""Command-line front end.

    coarsesim sim       --input FILE [--output FILE] [--checks none|full]
    coarsesim verify    --input FILE [--oracle-cap N]
    coarsesim quotient  --input FILE [--output FILE]
    coarsesim gen       --seed N --states N --arcs N [--preorder qxq|labels|explicit]
    coarsesim stats     --input FILE [--checks none|full]

Exit codes: 0 success, 1 input error, 2 internal invariant violation,
3 verification mismatch.
"""

from __future__ import annotations

import argparse
import sys
from functools import lru_cache
from typing import Sequence, TextIO

from . import engine, oracle
from .generate import PREORDER_MODES, random_problem_text
from .model import (InputError, InvariantViolation, explicit_relation, parse_problem, quotient,
                    serialize_result, serialize_system)

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT, EXIT_MISMATCH = 0, 1, 2, 3
DEFAULT_ORACLE_CAP = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


@lru_cache(maxsize=1)
def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coarsesim", description="Coarsest simulation preorders.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help_text, needs_input=True):
        p = sub.add_parser(name, help=help_text)
        if needs_input:
            p.add_argument("--input", required=True, metavar="PATH|-")
        p.add_argument("--output", default="-", metavar="PATH|-")
        return p

    for name, text in (("sim", "compute the coarsest simulation"),
                       ("stats", "run with instrumentation and print counters")):
        command(name, text).add_argument("--checks", choices=("none", "full"), default="none")
    command("verify", "compare the engine with the naive oracle").add_argument(
        "--oracle-cap", type=int, default=DEFAULT_ORACLE_CAP)
    command("quotient", "quotient by simulation equivalence")
    gen = command("gen", "emit a random instance", needs_input=False)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--states", type=int, required=True)
    gen.add_argument("--arcs", type=int, required=True)
    gen.add_argument("--preorder", choices=PREORDER_MODES, default="qxq")
    return parser


def _read(path: str, stdin: TextIO) -> str:
    if path == "-":
        return stdin.read()
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str, text: str, stdout: TextIO) -> None:
    if path == "-":
        stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)


def cmd_sim(args, stdin, stdout, stderr) -> int:
    ts, prp = parse_problem(_read(args.input, stdin))
    _write(args.output, serialize_result(engine.run(ts, prp, args.checks)), stdout)
    return EXIT_OK


def cmd_verify(args, stdin, stdout, stderr) -> int:
    ts, prp = parse_problem(_read(args.input, stdin))
    if ts.num_states > args.oracle_cap:
        raise InputError(f"oracle cap exceeded: {ts.num_states} states > {args.oracle_cap}")
    got = explicit_relation(engine.run(ts, prp))
    want = oracle.naive_coarsest_simulation(ts, explicit_relation(prp))
    diff = got ^ want
    if diff.any():
        q, r = oracle.first_pair(diff)
        side = "engine only" if got[q, r] else "oracle only"
        _write(args.output, f"mismatch at pair {q} {r} ({side})\n", stdout)
        return EXIT_MISMATCH
    _write(args.output, f"ok: {ts.num_states} states, {int(got.sum())} pairs\n", stdout)
    return EXIT_OK


def cmd_quotient(args, stdin, stdout, stderr) -> int:
    ts, prp = parse_problem(_read(args.input, stdin))
    blocks = engine.run(ts, prp).canonical().blocks
    out = [serialize_system(quotient(ts, blocks))]
    out += [f"# {i}: " + " ".join(map(str, b)) + "\n" for i, b in enumerate(blocks)]
    _write(args.output, "".join(out), stdout)
    return EXIT_OK


def cmd_gen(args, stdin, stdout, stderr) -> int:
    if args.states < 0 or args.arcs < 0 or args.arcs > args.states * args.states:
        raise InputError(f"cannot draw {args.arcs} transitions over {args.states} states")
    _write(args.output, random_problem_text(args.seed, args.states, args.arcs, args.preorder),
           stdout)
    return EXIT_OK


def cmd_stats(args, stdin, stdout, stderr) -> int:
    ts, prp = parse_problem(_read(args.input, stdin))
    _, stats = engine.run_with_stats(ts, prp, args.checks)
    _write(args.output, stats.report(), stdout)
    return EXIT_OK


COMMANDS = {"sim": cmd_sim, "verify": cmd_verify, "quotient": cmd_quotient,
            "gen": cmd_gen, "stats": cmd_stats}


def main(argv: Sequence[str] | None = None, stdin: TextIO | None = None,
         stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, stdin, stdout, stderr)
    except InputError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except InvariantViolation as exc:
        stderr.write(f"invariant violation: {exc}\n")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
