"""Bytecode compiler and parsing machine with packrat memoization."""

from __future__ import annotations

from typing import Optional, TextIO

from nez.conditions import eliminate
from nez.grammar import Grammar, check, strip_ast_ops
from nez.result import ParseResult
from nez.vm.asm import assemble, disassemble
from nez.vm.compiler import compile_grammar, memo_points
from nez.vm.instructions import Instruction, Op, Program
from nez.vm.machine import Machine, Stats
from nez.vm.memo import DEFAULT_CAPACITY, MemoTable


def run(program: Program, data: bytes, *, mode: str = 'parse', memo: bool = True,
        capacity: int = DEFAULT_CAPACITY, stats: Optional[Stats] = None,
        trace: Optional[TextIO] = None, budget: Optional[int] = None) -> ParseResult:
    """Execute ``program``; in ``match`` mode no tree is built."""
    if mode not in ('parse', 'match'):
        raise ValueError(f'unknown mode {mode!r}')
    machine = Machine(program, build_tree=(mode == 'parse'), memo=memo,
                      capacity=capacity, budget=budget, trace=trace)
    return machine.run(data, stats)


def prepare(g: Grammar, *, ast: bool = True) -> Grammar:
    """Validate, drop AST operators if asked, and remove conditions."""
    check(g)
    if not ast:
        g = strip_ast_ops(g)
    return eliminate(g)


def parse(g: Grammar, data: bytes, *, memo: bool = True, stats: Optional[Stats] = None) -> ParseResult:
    return run(compile_grammar(prepare(g)), data, memo=memo, stats=stats)


def match(g: Grammar, data: bytes, *, memo: bool = True, stats: Optional[Stats] = None) -> ParseResult:
    return run(compile_grammar(prepare(g, ast=False)), data, mode='match', memo=memo, stats=stats)


__all__ = [
    'DEFAULT_CAPACITY', 'Instruction', 'Machine', 'MemoTable', 'Op', 'Program',
    'Stats', 'assemble', 'compile_grammar', 'disassemble', 'match', 'memo_points',
    'parse', 'prepare', 'run',
]
