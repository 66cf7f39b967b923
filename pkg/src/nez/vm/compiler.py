"""Translation of a condition-free grammar into machine code.

Layout: a two-instruction boot sequence (``call <start>; exit``) followed by
each production's code under a label carrying its name.  Productions chosen
as memo points are wrapped as::

    A:    lookup k Lhit        # a miss pushes a memo frame
          alt Lfail
          <body>
          succ
          memo k               # pops the memo frame and stores the result
          ret
    Lfail: memofail k          # stores the failure, then fails
    Lhit:  ret

Productions that build trees use ``tlookup``/``tmemo`` so that the AST
records made by the body are cached along with the consumed length.
"""

from __future__ import annotations

from collections import Counter
from typing import Dict, List, Set

from nez.errors import UnsupportedConstruct
from nez.grammar import (
    AST_OPERATORS, SYMBOL_OPERATORS, And, AnyChar, Block, Char, CharClass,
    Choice, Empty, Exists, ExistsValue, Grammar, IfCond, Is, Isa, LeftFold,
    Link, Local, Match, New, Nonterminal, Not, OnCond, OneOrMore, Option,
    Repetition, Replace, Sequence, SymbolDef, Tag, walk,
)
from nez.vm.instructions import Op, Program, link

_CALLS = (Nonterminal, SymbolDef, Is, Isa)


def _callees(body) -> List[str]:
    return [e.name for e in walk(body) if isinstance(e, _CALLS)]


def _closure(g: Grammar, kinds) -> Set[str]:
    """Productions that reach an operator of ``kinds``, directly or via calls."""
    found = {name for name, body in g.productions.items()
             if any(isinstance(e, kinds) for e in walk(body))}
    changed = True
    while changed:
        changed = False
        for name, body in g.productions.items():
            if name not in found and any(c in found for c in _callees(body)):
                found.add(name)
                changed = True
    return found


def memo_points(g: Grammar) -> List[str]:
    """Productions worth caching whose result cannot depend on symbol state."""
    refs = Counter(c for body in g.productions.values() for c in _callees(body))
    stateful = _closure(g, SYMBOL_OPERATORS)
    return [name for name in g.productions
            if refs[name] >= 2 and name not in stateful]


class _Compiler:

    def __init__(self, g: Grammar):
        self.grammar = g
        self.items = []
        self.labels: Dict[str, int] = {}
        self._fresh = 0

    def label(self) -> str:
        self._fresh += 1
        return f'.{self._fresh}'

    def place(self, label: str):
        self.labels[label] = len(self.items)

    def emit(self, op: Op, *operands):
        self.items.append((op, operands))

    def expr(self, e):
        t = type(e)
        emit = self.emit
        if t is Empty:
            emit(Op.NOP)
        elif t is Char:
            emit(Op.BYTE, e.byte)
        elif t is CharClass:
            emit(Op.SET, e.chars)
        elif t is AnyChar:
            emit(Op.ANY)
        elif t is Nonterminal:
            emit(Op.CALL, e.name)
        elif t is Sequence:
            self.sequence(e.items)
        elif t is Choice:
            end = self.label()
            for item in e.items[:-1]:
                nxt = self.label()
                emit(Op.ALT, nxt)
                self.expr(item)
                emit(Op.SUCC)
                emit(Op.JUMP, end)
                self.place(nxt)
            self.expr(e.items[-1])
            self.place(end)
        elif t is Repetition:
            self.loop(e.expr)
        elif t is OneOrMore:
            self.expr(e.expr)
            self.loop(e.expr)
        elif t is Option:
            end = self.label()
            emit(Op.ALT, end)
            self.expr(e.expr)
            emit(Op.SUCC)
            self.place(end)
        elif t is And:
            emit(Op.POS)
            self.expr(e.expr)
            emit(Op.BACK)
        elif t is Not:
            end = self.label()
            emit(Op.ALT, end)
            self.expr(e.expr)
            emit(Op.SUCC)
            emit(Op.FAIL)
            self.place(end)
        elif t is New:
            emit(Op.TNEW)
            self.expr(e.expr)
            emit(Op.TCAPTURE)
        elif t is LeftFold:
            emit(Op.TLEFTFOLD, e.label)
            self.expr(e.expr)
            emit(Op.TCAPTURE)
        elif t is Link:
            emit(Op.TPUSH)
            self.expr(e.expr)
            emit(Op.TLINK, e.label)
            emit(Op.TPOP)
        elif t is Tag:
            emit(Op.TTAG, e.name)
        elif t is Replace:
            emit(Op.TREPLACE, e.text)
        elif t is SymbolDef:
            emit(Op.POS)
            emit(Op.CALL, e.name)
            emit(Op.SYMBOL, e.name)
        elif t is Exists:
            emit(Op.EXISTS, e.name)
        elif t is ExistsValue:
            emit(Op.ISDEF, e.name, e.value)
        elif t is Match:
            emit(Op.MATCH, e.name)
        elif t is Is:
            emit(Op.POS)
            emit(Op.CALL, e.name)
            emit(Op.IS, e.name)
        elif t is Isa:
            emit(Op.POS)
            emit(Op.CALL, e.name)
            emit(Op.ISA, e.name)
        elif t is Block:
            emit(Op.SOPEN)
            self.expr(e.expr)
            emit(Op.SCLOSE)
        elif t is Local:
            emit(Op.SOPEN)
            emit(Op.SMASK, e.name)
            self.expr(e.expr)
            emit(Op.SCLOSE)
        elif t in (IfCond, OnCond):
            raise UnsupportedConstruct(
                f'{e} must be removed by condition elimination before compiling')
        else:
            raise UnsupportedConstruct(f'cannot compile {t.__name__}')

    def sequence(self, items):
        run: List[int] = []
        for item in items + (None,):
            if type(item) is Char:
                run.append(item.byte)
                continue
            if len(run) == 1:
                self.emit(Op.BYTE, run[0])
            elif run:
                self.emit(Op.STR, bytes(run))
            run = []
            if item is not None:
                self.expr(item)

    def loop(self, body):
        top, end = self.label(), self.label()
        self.place(top)
        self.emit(Op.ALT, end)
        self.expr(body)
        self.emit(Op.SKIP)
        self.emit(Op.JUMP, top)
        self.place(end)

    def production(self, name: str, memo_id, builds_tree: bool):
        body = self.grammar.productions[name]
        self.place(name)
        if memo_id is None:
            self.expr(body)
            self.emit(Op.RET)
            return
        hit, failed = self.label(), self.label()
        self.emit(Op.TLOOKUP if builds_tree else Op.LOOKUP, memo_id, hit)
        self.emit(Op.ALT, failed)
        self.expr(body)
        self.emit(Op.SUCC)
        self.emit(Op.TMEMO if builds_tree else Op.MEMO, memo_id)
        self.emit(Op.RET)
        self.place(failed)
        self.emit(Op.MEMOFAIL, memo_id)
        self.place(hit)
        self.emit(Op.RET)


def compile_grammar(g: Grammar, memo: bool = True) -> Program:
    """Compile ``g`` (validated and free of conditions) to a program."""
    for body in g.productions.values():
        for e in walk(body):
            if isinstance(e, (IfCond, OnCond)):
                raise UnsupportedConstruct(
                    f'condition {e.name!r} must be eliminated before compiling')
    points = memo_points(g) if memo else []
    ids = {name: i for i, name in enumerate(points)}
    trees = _closure(g, AST_OPERATORS)
    c = _Compiler(g)
    c.emit(Op.CALL, g.start)
    c.emit(Op.EXIT)
    for name in g.productions:
        c.production(name, ids.get(name), name in trees)
    productions = {name: c.labels[name] for name in g.productions}
    return link(c.items, c.labels, start=g.start, productions=productions,
                memo_points=points)
