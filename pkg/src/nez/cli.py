"""Command-line front end: ``nez <command> GRAMMAR [INPUT ...]``.

Exit status: 0 on success, 1 when an input fails to parse (or cannot be
read), 2 when the grammar cannot be loaded or is invalid.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from typing import List, Optional, Tuple

from nez import interpreter
from nez.conditions import collect_conditions, eliminate
from nez.errors import (
    GrammarError, GrammarSyntaxError, InvalidGrammar, NezError, StepBudgetExceeded,
)
from nez.grammar import Grammar, desugar, strip_ast_ops, validate
from nez.result import ParseResult
from nez.syntax import format_grammar, parse_grammar
from nez.tree import to_json, to_sexp
from nez import vm

OK, INPUT_FAILURE, GRAMMAR_FAILURE = 0, 1, 2

BENCH_COLUMNS = ('file', 'bytes', 'engine', 'memo', 'iters', 'mean_ms', 'min_ms')


class _GrammarProblem(Exception):
    pass


def _common(p: argparse.ArgumentParser, inputs: bool = True):
    p.add_argument('grammar', help='grammar file (.nez)')
    if inputs:
        p.add_argument('inputs', nargs='*', metavar='INPUT',
                       help="input files; '-' or nothing reads stdin")
        p.add_argument('--engine', choices=('vm', 'interp'), default='vm')
        p.add_argument('--no-memo', action='store_true', help='disable packrat memoization')
        p.add_argument('--trace', action='store_true', help='trace execution to stderr')
    p.add_argument('--start', help='start production (default: the first one)')
    p.add_argument('--desugar-full', action='store_true',
                   help='rewrite e* into helper productions before use')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='nez', description='Nez grammar toolkit')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('parse', help='parse inputs and print their ASTs')
    _common(p)
    p.add_argument('--format', choices=('sexp', 'json'), default='sexp')
    p.add_argument('--pretty', action='store_true', help='indent the output')
    p.add_argument('--strict', action='store_true', help='require the whole input to be consumed')

    p = sub.add_parser('match', help='recognize inputs and print consumed lengths')
    _common(p)
    p.add_argument('--strict', action='store_true', help='require the whole input to be consumed')

    p = sub.add_parser('eliminate', help='print the grammar without parsing conditions')
    _common(p, inputs=False)

    p = sub.add_parser('compile', help='print the compiled program')
    _common(p, inputs=False)
    p.add_argument('--no-memo', action='store_true', help='compile without memo points')

    p = sub.add_parser('bench', help='time parsing of input files (CSV on stdout)')
    _common(p)
    p.add_argument('--iters', type=int, default=10)
    p.add_argument('--warmup', type=int, default=2)
    p.add_argument('--mode', choices=('parse', 'match'), default='parse')

    p = sub.add_parser('check', help='validate a grammar')
    _common(p, inputs=False)
    return parser


# -- grammar loading --------------------------------------------------------

def _load_grammar(args) -> Grammar:
    try:
        with open(args.grammar, encoding='utf-8') as f:
            text = f.read()
    except OSError as exc:
        raise _GrammarProblem(f'{args.grammar}: {exc.strerror or exc}') from None
    try:
        g = parse_grammar(text)
    except GrammarSyntaxError as exc:
        raise _GrammarProblem(f'{args.grammar}:{exc}') from None
    except GrammarError as exc:
        raise _GrammarProblem(f'{args.grammar}: {exc}') from None
    if args.start:
        if args.start not in g:
            raise _GrammarProblem(f'{args.grammar}: no production named {args.start!r}')
        g = g.with_start(args.start)
    if args.desugar_full:
        try:
            g = desugar(g, full=True)
        except GrammarError as exc:
            raise _GrammarProblem(f'{args.grammar}: {exc}') from None
    return g


def _checked(args, g: Grammar) -> Grammar:
    report = validate(g)
    if not report.ok:
        raise _GrammarProblem(f'{args.grammar}: invalid grammar\n{report}')
    return g


class _Engine:
    """Runs one grammar with the selected engine."""

    def __init__(self, g: Grammar, engine: str, memo: bool, build_tree: bool, trace=None):
        self.engine = engine
        self.memo = memo
        self.build_tree = build_tree
        self.trace = trace
        if engine == 'interp':
            self.interp = interpreter.Interpreter(
                g if build_tree else strip_ast_ops(g), build_tree=build_tree, trace=trace)
        else:
            self.program = vm.compile_grammar(vm.prepare(g, ast=build_tree))

    def __call__(self, data: bytes) -> ParseResult:
        if self.engine == 'interp':
            return self.interp.parse(data)
        return vm.run(self.program, data, mode='parse' if self.build_tree else 'match',
                      memo=self.memo, trace=self.trace)


# -- input handling -----------------------------------------------------------

def _read_inputs(paths: List[str]):
    for path in paths or ['-']:
        if path == '-':
            yield '<stdin>', sys.stdin.buffer.read(), None
            continue
        try:
            with open(path, 'rb') as f:
                yield path, f.read(), None
        except OSError as exc:
            yield path, None, exc.strerror or str(exc)


def line_col(data: bytes, offset: int) -> Tuple[int, int]:
    offset = max(0, min(offset, len(data)))
    line = data.count(b'\n', 0, offset) + 1
    col = offset - (data.rfind(b'\n', 0, offset) + 1) + 1
    return line, col


def _failure(name: str, data: bytes, result: ParseResult, strict: bool) -> Optional[str]:
    """The error message for an unsuccessful (or, under strict, partial) parse."""
    if result.success and (not strict or result.length == len(data)):
        return None
    offset, expected = result.error_offset, set(result.expected)
    if result.success:
        if result.length > offset:
            offset, expected = result.length, set()
        if offset == result.length:
            expected.add('end of input')
    line, col = line_col(data, offset)
    what = ', '.join(sorted(expected)) if expected else 'nothing'
    return f'{name}:{line}:{col}: parse error, expected {{{what}}}'


def _render(result: ParseResult, fmt: str, pretty: bool) -> str:
    tree = result.tree
    if fmt == 'json':
        return 'null' if tree is None else to_json(tree, indent=2 if pretty else None)
    return '()' if tree is None else to_sexp(tree, pretty=pretty)


# -- commands -----------------------------------------------------------------

def cmd_parse(args, out) -> int:
    return _run_inputs(args, out, build_tree=True)


def cmd_match(args, out) -> int:
    return _run_inputs(args, out, build_tree=False)


def _run_inputs(args, out, build_tree: bool) -> int:
    g = _checked(args, _load_grammar(args))
    trace = sys.stderr if args.trace else None
    engine = _Engine(g, args.engine, not args.no_memo, build_tree, trace)
    status = OK
    for name, data, error in _read_inputs(args.inputs):
        if data is None:
            print(f'{name}: {error}', file=sys.stderr)
            status = max(status, INPUT_FAILURE)
            continue
        try:
            result = engine(data)
        except StepBudgetExceeded as exc:
            print(f'{name}: {exc}', file=sys.stderr)
            status = max(status, GRAMMAR_FAILURE)
            continue
        message = _failure(name, data, result, args.strict)
        if message:
            print(message, file=sys.stderr)
            status = max(status, INPUT_FAILURE)
            continue
        if build_tree:
            print(_render(result, args.format, args.pretty), file=out)
        else:
            print(result.length, file=out)
    return status


def cmd_eliminate(args, out) -> int:
    g = _checked(args, _load_grammar(args))
    out.write(format_grammar(eliminate(g)))
    return OK


def cmd_compile(args, out) -> int:
    g = _checked(args, _load_grammar(args))
    out.write(vm.disassemble(vm.compile_grammar(vm.prepare(g), memo=not args.no_memo)))
    return OK


def cmd_bench(args, out) -> int:
    if args.iters < 1 or args.warmup < 0:
        print('bench: --iters must be positive and --warmup non-negative', file=sys.stderr)
        return GRAMMAR_FAILURE
    g = _checked(args, _load_grammar(args))
    memo = not args.no_memo and args.engine == 'vm'
    t0 = time.perf_counter()
    engine = _Engine(g, args.engine, memo, args.mode == 'parse')
    setup_ms = (time.perf_counter() - t0) * 1000
    print(f'# setup_ms={setup_ms:.3f}', file=sys.stderr)
    print(','.join(BENCH_COLUMNS), file=out)
    status = OK
    for name, data, error in _read_inputs(args.inputs):
        if data is None:
            print(f'{name}: {error}', file=sys.stderr)
            status = max(status, INPUT_FAILURE)
            continue
        result = engine(data)
        message = _failure(name, data, result, False)
        if message:
            print(message, file=sys.stderr)
            status = max(status, INPUT_FAILURE)
            continue
        for _ in range(args.warmup):
            engine(data)
        times = []
        for _ in range(args.iters):
            start = time.perf_counter()
            engine(data)
            times.append((time.perf_counter() - start) * 1000)
        print(f'{name},{len(data)},{args.engine},{"on" if memo else "off"},{args.iters},'
              f'{statistics.fmean(times):.3f},{min(times):.3f}', file=out)
    return status


def cmd_check(args, out) -> int:
    g = _load_grammar(args)
    report = validate(g)
    if not report.ok:
        print(f'{args.grammar}: invalid grammar', file=out)
        print(report, file=out)
        return GRAMMAR_FAILURE
    print(f'{args.grammar}: ok, {len(g)} productions, start {g.start}', file=out)
    for warning in report.warnings:
        print(f'  warning: {warning.production}: {warning.message}', file=out)
    conditions = sorted(collect_conditions(g))
    if conditions:
        eliminated = eliminate(g)
        print(f'  conditions: {", ".join(conditions)}; '
              f'{len(eliminated)} productions after elimination', file=out)
    return OK


COMMANDS = {
    'parse': cmd_parse,
    'match': cmd_match,
    'eliminate': cmd_eliminate,
    'compile': cmd_compile,
    'bench': cmd_bench,
    'check': cmd_check,
}


def main(argv: Optional[List[str]] = None, out=None) -> int:
    args = build_parser().parse_args(argv)
    out = out if out is not None else sys.stdout
    try:
        return COMMANDS[args.command](args, out)
    except _GrammarProblem as exc:
        print(exc, file=sys.stderr)
        return GRAMMAR_FAILURE
    except InvalidGrammar as exc:
        print(f'{args.grammar}: {exc}', file=sys.stderr)
        return GRAMMAR_FAILURE
    except NezError as exc:
        print(f'{args.grammar}: {exc}', file=sys.stderr)
        return GRAMMAR_FAILURE


def main_exit():
    sys.exit(main())


if __name__ == '__main__':
    main_exit()
