"""Reference interpreter: direct recursive evaluation of parsing expressions.

It is deliberately plain (no memoization) and serves as the oracle the
parsing machine is checked against.  Conditions are evaluated dynamically,
so grammars do not need condition elimination here.

Failure handling: an expression that fails may leave position, symbol table
and AST log dirty; whoever catches the failure (choice, repetition, option,
``!e``) restores its own checkpoint.  Every construct closes the scopes it
opened before returning, so checkpoints are always released in LIFO order.
"""

from __future__ import annotations

from typing import Optional, TextIO

from nez.conditions import ConditionStore
from nez.errors import StepBudgetExceeded
from nez.grammar import (
    And, AnyChar, Block, Char, CharClass, Choice, Empty, Exists, ExistsValue,
    Grammar, IfCond, Is, Isa, LeftFold, Link, Local, Match, New, Nonterminal,
    Not, OnCond, OneOrMore, Option, Repetition, Replace, Sequence, SymbolDef,
    Tag, check, strip_ast_ops,
)
from nez.result import Farthest, ParseResult, call_with_deep_stack
from nez.symtab import SymbolTable
from nez.syntax import format_class, quote_bytes
from nez.tree import AstLog, build

def default_budget(size: int) -> int:
    return 256 * size + (1 << 16)


class Interpreter:

    def __init__(self, grammar: Grammar, *, build_tree: bool = True,
                 budget: Optional[int] = None, trace: Optional[TextIO] = None):
        self.grammar = grammar
        self.build_tree = build_tree
        self.budget = budget
        self.trace = trace

    def parse(self, data: bytes, start: Optional[str] = None) -> ParseResult:
        data = bytes(data)
        start = start or self.grammar.start
        try:
            return _Session(self, data, start).run()
        except RecursionError:
            pass
        # deeply nested input: start over on a thread with a much larger stack
        try:
            return call_with_deep_stack(_Session(self, data, start).run)
        except RecursionError:
            raise StepBudgetExceeded('input nests too deeply for recursive evaluation') from None


class _Session:

    def __init__(self, interp: Interpreter, data: bytes, start: str):
        self.productions = interp.grammar.productions
        self.start = start
        self.input = data
        self.pos = 0
        self.symtab = SymbolTable()
        self.log = AstLog(data) if interp.build_tree else None
        self.conditions = ConditionStore()
        self.steps = 0
        self.budget = interp.budget if interp.budget is not None else default_budget(len(data))
        self.farthest = Farthest()
        self.trace = interp.trace
        self.depth = 0

    def run(self) -> ParseResult:
        ok = self.call(self.start)
        farthest = self.farthest
        if not ok:
            return ParseResult(False, 0, None, farthest.offset, frozenset(farthest.expected))
        tree = None
        if self.log is not None:
            tree = build(self.log.records, self.input)
        return ParseResult(True, self.pos, tree, farthest.offset, frozenset(farthest.expected))

    def fail(self, what: str) -> bool:
        self.farthest.fail(self.pos, what)
        return False

    def eval(self, e) -> bool:
        self.steps += 1
        if self.steps > self.budget:
            raise StepBudgetExceeded(f'evaluation exceeded {self.budget} steps')
        return _DISPATCH[type(e)](self, e)

    def call(self, name: str) -> bool:
        if self.trace is None:
            return self.eval(self.productions[name])
        self.trace.write(f'{"  " * self.depth}{name} @{self.pos}\n')
        self.depth += 1
        ok = self.eval(self.productions[name])
        self.depth -= 1
        self.trace.write(f'{"  " * self.depth}{name} {"ok" if ok else "fail"} @{self.pos}\n')
        return ok

    # -- transactions over all mutable state -------------------------------

    def begin(self):
        return (self.pos, self.symtab.checkpoint(),
                self.log.checkpoint() if self.log is not None else None)

    def abort(self, saved):
        pos, sym_mark, ast_mark = saved
        self.pos = pos
        if ast_mark is not None:
            self.log.rollback(ast_mark)
        self.symtab.rollback(sym_mark)

    def keep(self, saved):
        _, sym_mark, ast_mark = saved
        if ast_mark is not None:
            self.log.release(ast_mark)
        self.symtab.commit_scope(sym_mark)

    # -- PEG operators ----------------------------------------------------

    def empty(self, e):
        return True

    def char(self, e):
        if self.pos < len(self.input) and self.input[self.pos] == e.byte:
            self.pos += 1
            return True
        return self.fail(quote_bytes(bytes([e.byte])))

    def char_class(self, e):
        if self.pos < len(self.input) and self.input[self.pos] in e.chars:
            self.pos += 1
            return True
        return self.fail(format_class(e.chars))

    def any_char(self, e):
        if self.pos < len(self.input):
            self.pos += 1
            return True
        return self.fail('.')

    def nonterminal(self, e):
        return self.call(e.name)

    def sequence(self, e):
        for item in e.items:
            if not self.eval(item):
                return False
        return True

    def choice(self, e):
        for item in e.items:
            saved = self.begin()
            if self.eval(item):
                self.keep(saved)
                return True
            self.abort(saved)
        return False

    def repetition(self, e):
        body = e.expr
        while True:
            saved = self.begin()
            if not self.eval(body) or self.pos == saved[0]:
                self.abort(saved)
                return True
            self.keep(saved)

    def one_or_more(self, e):
        if not self.eval(e.expr):
            return False
        return self.repetition(e)

    def option(self, e):
        saved = self.begin()
        if self.eval(e.expr):
            self.keep(saved)
        else:
            self.abort(saved)
        return True

    def and_predicate(self, e):
        # symbol and AST effects of a successful lookahead are kept
        pos = self.pos
        if not self.eval(e.expr):
            return False
        self.pos = pos
        return True

    def not_predicate(self, e):
        saved = self.begin()
        ok = self.eval(e.expr)
        self.abort(saved)
        return not ok

    # -- AST operators ----------------------------------------------------

    def new(self, e):
        if self.log is None:
            return self.eval(e.expr)
        self.log.new(self.pos)
        if not self.eval(e.expr):
            return False
        self.log.capture(self.pos)
        return True

    def left_fold(self, e):
        if self.log is None:
            return self.eval(e.expr)
        self.log.fold(self.pos, e.label)
        if not self.eval(e.expr):
            return False
        self.log.capture(self.pos)
        return True

    def link(self, e):
        if self.log is None:
            return self.eval(e.expr)
        mark = self.log.checkpoint()
        if not self.eval(e.expr):
            self.log.rollback(mark)
            return False
        self.log.link_since(mark, e.label)
        return True

    def tag(self, e):
        if self.log is not None:
            self.log.tag(e.name)
        return True

    def replace(self, e):
        if self.log is not None:
            self.log.replace(e.text)
        return True

    # -- symbol operators -------------------------------------------------

    def symbol(self, e):
        start = self.pos
        if not self.call(e.name):
            return False
        self.symtab.add(e.name, self.input[start:self.pos])
        return True

    def exists(self, e):
        return self.symtab.count(e.name) > 0

    def exists_value(self, e):
        return self.symtab.contains(e.name, e.value)

    def match(self, e):
        top = self.symtab.top(e.name)
        if top is None:
            return self.fail(f'<match {e.name}>')
        if self.input.startswith(top, self.pos):
            self.pos += len(top)
            return True
        return self.fail(f'<match {e.name}>')

    def is_symbol(self, e):
        start = self.pos
        if not self.call(e.name):
            return False
        top = self.symtab.top(e.name)
        return top is not None and top == self.input[start:self.pos]

    def isa_symbol(self, e):
        start = self.pos
        if not self.call(e.name):
            return False
        return self.symtab.contains(e.name, self.input[start:self.pos])

    def block(self, e):
        mark = self.symtab.checkpoint()
        ok = self.eval(e.expr)
        self.symtab.rollback(mark)
        return ok

    def local(self, e):
        mark = self.symtab.checkpoint()
        self.symtab.mask(e.name)
        ok = self.eval(e.expr)
        self.symtab.rollback(mark)
        return ok

    # -- conditions -------------------------------------------------------

    def if_cond(self, e):
        return self.conditions[e.name] == e.positive

    def on_cond(self, e):
        token = self.conditions.set(e.name, e.positive)
        try:
            return self.eval(e.expr)
        finally:
            self.conditions.restore(token)


_DISPATCH = {
    Empty: _Session.empty,
    Char: _Session.char,
    CharClass: _Session.char_class,
    AnyChar: _Session.any_char,
    Nonterminal: _Session.nonterminal,
    Sequence: _Session.sequence,
    Choice: _Session.choice,
    Repetition: _Session.repetition,
    OneOrMore: _Session.one_or_more,
    Option: _Session.option,
    And: _Session.and_predicate,
    Not: _Session.not_predicate,
    New: _Session.new,
    LeftFold: _Session.left_fold,
    Link: _Session.link,
    Tag: _Session.tag,
    Replace: _Session.replace,
    SymbolDef: _Session.symbol,
    Exists: _Session.exists,
    ExistsValue: _Session.exists_value,
    Match: _Session.match,
    Is: _Session.is_symbol,
    Isa: _Session.isa_symbol,
    Block: _Session.block,
    Local: _Session.local,
    IfCond: _Session.if_cond,
    OnCond: _Session.on_cond,
}


def parse(g: Grammar, data: bytes, *, start: Optional[str] = None,
          budget: Optional[int] = None, trace: Optional[TextIO] = None) -> ParseResult:
    """Parse ``data`` from the start production and build the AST."""
    check(g)
    return Interpreter(g, budget=budget, trace=trace).parse(data, start)


def match(g: Grammar, data: bytes, *, start: Optional[str] = None,
          budget: Optional[int] = None) -> ParseResult:
    """Recognize ``data`` with every AST operator removed; no tree is built."""
    check(g)
    return Interpreter(strip_ast_ops(g), build_tree=False, budget=budget).parse(data, start)
