"""Grammar data model: parsing expressions, productions and the passes
that only rewrite or inspect them (validation, desugaring, AST stripping).

Expressions are immutable; every pass returns new objects.  Sequences and
choices are n-ary and kept normalized by :func:`seq` and :func:`choice`:
nested sequences are flattened, ``Empty`` members of a sequence are dropped
and single-element forms collapse to the element itself.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from nez.errors import EmptyRepetitionBody, InvalidGrammar


class Expression:
    __slots__ = ()

    def __str__(self):
        from nez.syntax import format_expression
        return format_expression(self)


@dataclass(frozen=True, slots=True)
class Empty(Expression):
    pass


@dataclass(frozen=True, slots=True)
class Char(Expression):
    byte: int


@dataclass(frozen=True, slots=True)
class CharClass(Expression):
    chars: frozenset

    def __post_init__(self):
        if any(not 0 <= c <= 255 for c in self.chars):
            raise ValueError('character class members must be bytes')


@dataclass(frozen=True, slots=True)
class AnyChar(Expression):
    pass


@dataclass(frozen=True, slots=True)
class Nonterminal(Expression):
    name: str


@dataclass(frozen=True, slots=True)
class Sequence(Expression):
    items: tuple


@dataclass(frozen=True, slots=True)
class Choice(Expression):
    items: tuple


@dataclass(frozen=True, slots=True)
class Repetition(Expression):
    expr: Expression


@dataclass(frozen=True, slots=True)
class OneOrMore(Expression):
    expr: Expression


@dataclass(frozen=True, slots=True)
class Option(Expression):
    expr: Expression


@dataclass(frozen=True, slots=True)
class And(Expression):
    expr: Expression


@dataclass(frozen=True, slots=True)
class Not(Expression):
    expr: Expression


@dataclass(frozen=True, slots=True)
class New(Expression):
    expr: Expression


@dataclass(frozen=True, slots=True)
class LeftFold(Expression):
    expr: Expression
    label: Optional[str] = None


@dataclass(frozen=True, slots=True)
class Link(Expression):
    expr: Expression
    label: Optional[str] = None


@dataclass(frozen=True, slots=True)
class Tag(Expression):
    name: str


@dataclass(frozen=True, slots=True)
class Replace(Expression):
    text: bytes


@dataclass(frozen=True, slots=True)
class SymbolDef(Expression):
    name: str


@dataclass(frozen=True, slots=True)
class Exists(Expression):
    name: str


@dataclass(frozen=True, slots=True)
class ExistsValue(Expression):
    name: str
    value: bytes


@dataclass(frozen=True, slots=True)
class Match(Expression):
    name: str


@dataclass(frozen=True, slots=True)
class Is(Expression):
    name: str


@dataclass(frozen=True, slots=True)
class Isa(Expression):
    name: str


@dataclass(frozen=True, slots=True)
class Block(Expression):
    expr: Expression


@dataclass(frozen=True, slots=True)
class Local(Expression):
    name: str
    expr: Expression


@dataclass(frozen=True, slots=True)
class IfCond(Expression):
    name: str
    positive: bool = True


@dataclass(frozen=True, slots=True)
class OnCond(Expression):
    name: str
    positive: bool
    expr: Expression


EMPTY = Empty()
ANY = AnyChar()
FAIL = Not(EMPTY)

_UNARY = (Repetition, OneOrMore, Option, And, Not, New, LeftFold, Link,
          Block, Local, OnCond)
AST_OPERATORS = (New, LeftFold, Link, Tag, Replace)
SYMBOL_OPERATORS = (SymbolDef, Exists, ExistsValue, Match, Is, Isa, Block,
                    Local)
CONDITION_OPERATORS = (IfCond, OnCond)
# variants carrying a production name that the grammar must define
_NAMED = (Nonterminal, SymbolDef, Exists, ExistsValue, Match, Is, Isa, Local)
# variants that evaluate the named production
_CALLS = (Nonterminal, SymbolDef, Is, Isa)


def seq(*items: Expression) -> Expression:
    flat: List[Expression] = []
    for item in items:
        if isinstance(item, Sequence):
            flat.extend(item.items)
        elif not isinstance(item, Empty):
            flat.append(item)
    if not flat:
        return EMPTY
    if len(flat) == 1:
        return flat[0]
    return Sequence(tuple(flat))


def choice(*items: Expression) -> Expression:
    flat: List[Expression] = []
    for item in items:
        if isinstance(item, Choice):
            flat.extend(item.items)
        else:
            flat.append(item)
    if not flat:
        raise ValueError('choice needs at least one alternative')
    if len(flat) == 1:
        return flat[0]
    return Choice(tuple(flat))


def literal(data: bytes) -> Expression:
    return seq(*(Char(b) for b in data))


def char_class(spec: str) -> CharClass:
    """Build a class from range notation such as ``'a-zA-Z_'``."""
    chars = set()
    i = 0
    while i < len(spec):
        if i + 2 < len(spec) and spec[i + 1] == '-':
            chars.update(range(ord(spec[i]), ord(spec[i + 2]) + 1))
            i += 3
        else:
            chars.add(ord(spec[i]))
            i += 1
    return CharClass(frozenset(chars))


def children(e: Expression) -> Tuple[Expression, ...]:
    if isinstance(e, (Sequence, Choice)):
        return e.items
    if isinstance(e, _UNARY):
        return (e.expr,)
    return ()


def map_children(e: Expression, fn: Callable[[Expression], Expression]) -> Expression:
    """Rebuild ``e`` with ``fn`` applied to each direct subexpression."""
    if isinstance(e, Sequence):
        return seq(*map(fn, e.items))
    if isinstance(e, Choice):
        return choice(*map(fn, e.items))
    if isinstance(e, _UNARY):
        return dataclasses.replace(e, expr=fn(e.expr))
    return e


def walk(e: Expression) -> Iterator[Expression]:
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


@dataclass(frozen=True, eq=False)
class Grammar:
    productions: Dict[str, Expression]
    start: str

    def __post_init__(self):
        if self.start not in self.productions:
            raise KeyError(f'start production {self.start!r} is not defined')

    def __eq__(self, other):
        if not isinstance(other, Grammar):
            return NotImplemented
        return (self.start == other.start
                and list(self.productions.items()) == list(other.productions.items()))

    def __getitem__(self, name: str) -> Expression:
        return self.productions[name]

    def __contains__(self, name: str) -> bool:
        return name in self.productions

    def __len__(self):
        return len(self.productions)

    @property
    def tags(self) -> frozenset:
        return frozenset(e.name for body in self.productions.values()
                         for e in walk(body) if isinstance(e, Tag))

    def with_start(self, name: str) -> 'Grammar':
        return Grammar(dict(self.productions), name)

    def map(self, fn: Callable[[Expression], Expression]) -> 'Grammar':
        return Grammar({n: fn(e) for n, e in self.productions.items()}, self.start)

    def reachable(self, start: Optional[str] = None) -> List[str]:
        """Production names reachable from ``start``, in definition order."""
        seen = set()
        todo = [start or self.start]
        while todo:
            name = todo.pop()
            if name in seen or name not in self.productions:
                continue
            seen.add(name)
            for e in walk(self.productions[name]):
                if isinstance(e, _NAMED):
                    todo.append(e.name)
        return [n for n in self.productions if n in seen]


# -- analysis -------------------------------------------------------------

def nullable_table(g: Grammar) -> Dict[str, bool]:
    """For each production, whether it may succeed without consuming input."""
    table = {name: False for name in g.productions}
    changed = True
    while changed:
        changed = False
        for name, body in g.productions.items():
            if not table[name] and is_nullable(body, table):
                table[name] = True
                changed = True
    return table


def is_nullable(e: Expression, table: Dict[str, bool]) -> bool:
    if isinstance(e, (Char, CharClass, AnyChar)):
        return False
    if isinstance(e, _CALLS):
        return table.get(e.name, False)
    if isinstance(e, Sequence):
        return all(is_nullable(x, table) for x in e.items)
    if isinstance(e, Choice):
        return any(is_nullable(x, table) for x in e.items)
    if isinstance(e, (OneOrMore, New, LeftFold, Link, Block, Local, OnCond)):
        return is_nullable(e.expr, table)
    # Empty, *, ?, predicates, tags, replacements, <exists>, <match>
    # (an empty top symbol matches nothing), <if>
    return True


def leftmost_calls(e: Expression, table: Dict[str, bool]) -> List[str]:
    """Names of productions that ``e`` may call before consuming input."""
    out: List[str] = []
    _leftmost(e, table, out)
    return out


def _leftmost(e, table, out):
    if isinstance(e, _CALLS):
        out.append(e.name)
    elif isinstance(e, Sequence):
        for item in e.items:
            _leftmost(item, table, out)
            if not is_nullable(item, table):
                break
    else:
        for child in children(e):
            _leftmost(child, table, out)


@dataclass(frozen=True)
class Issue:
    production: str
    kind: str
    message: str


@dataclass
class ValidationReport:
    errors: List[Issue] = field(default_factory=list)
    warnings: List[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self):
        return self.ok

    def __str__(self):
        lines = [f'error: {i.production}: {i.kind}: {i.message}' for i in self.errors]
        lines += [f'warning: {i.production}: {i.message}' for i in self.warnings]
        return '\n'.join(lines)


def validate(g: Grammar) -> ValidationReport:
    report = ValidationReport()
    for name, body in g.productions.items():
        seen = set()
        for e in walk(body):
            if isinstance(e, _NAMED) and e.name not in g.productions and e.name not in seen:
                seen.add(e.name)
                report.errors.append(Issue(
                    name, 'undefined-nonterminal',
                    f'{e.name} is referenced but not defined'))

    table = nullable_table(g)
    for name, body in g.productions.items():
        for e in walk(body):
            if isinstance(e, (Repetition, OneOrMore)) and is_nullable(e.expr, table):
                report.errors.append(Issue(
                    name, 'empty-repetition-body',
                    f'repetition body may succeed without consuming input: {e.expr}'))

    graph = {name: [n for n in leftmost_calls(body, table) if n in g.productions]
             for name, body in g.productions.items()}
    for cycle in _cycles(graph, list(g.productions)):
        path = ' -> '.join(cycle + [cycle[0]])
        report.errors.append(Issue(cycle[0], 'left-recursion', f'cycle {path}'))

    unreachable = set(g.productions) - set(g.reachable())
    for name in g.productions:
        if name in unreachable:
            report.warnings.append(Issue(name, 'unreachable', 'not reachable from start'))
    return report


def _cycles(graph: Dict[str, List[str]], order: List[str]) -> List[List[str]]:
    """Strongly connected components that contain a cycle (Tarjan)."""
    index: Dict[str, int] = {}
    low: Dict[str, int] = {}
    on_stack = set()
    stack: List[str] = []
    found: List[List[str]] = []
    counter = [0]

    def visit(v):
        # iterative to survive very large grammars
        work = [(v, iter(graph[v]))]
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        while work:
            node, it = work[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(graph[w])))
                    break
                if w in on_stack:
                    low[node] = min(low[node], index[w])
            else:
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[node])
                if low[node] == index[node]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == node:
                            break
                    if len(comp) > 1 or node in graph[node]:
                        rank = {n: i for i, n in enumerate(order)}
                        comp.sort(key=rank.__getitem__)
                        found.append(comp)

    for v in order:
        if v not in index:
            visit(v)
    found.sort(key=lambda c: order.index(c[0]))
    return found


def check(g: Grammar) -> Grammar:
    """Return ``g`` unchanged, raising :class:`InvalidGrammar` if it has errors."""
    report = validate(g)
    if report.errors:
        raise InvalidGrammar(report)
    return g


# -- rewriting passes -----------------------------------------------------

def desugar(g: Grammar, full: bool = False) -> Grammar:
    """Rewrite ``e?`` to ``e / ''`` and ``e+`` to ``e e*``.

    With ``full=True`` every ``e*`` is also replaced by a call to a fresh
    production ``R = e R / ''``.
    """
    table = nullable_table(g)
    productions: Dict[str, Expression] = {}
    fresh: Dict[str, Expression] = {}
    taken = set(g.productions)

    def new_name(base):
        n = 1
        while f'{base}_rep{n}' in taken:
            n += 1
        name = f'{base}_rep{n}'
        taken.add(name)
        return name

    def rewrite(e, owner):
        if isinstance(e, (Repetition, OneOrMore)) and is_nullable(e.expr, table):
            raise EmptyRepetitionBody(
                f'{owner}: repetition body may succeed without consuming input: {e.expr}')
        e = map_children(e, lambda c: rewrite(c, owner))
        if isinstance(e, Option):
            return choice(e.expr, EMPTY)
        if isinstance(e, OneOrMore):
            return seq(e.expr, loop(e.expr, owner))
        if isinstance(e, Repetition):
            return loop(e.expr, owner)
        return e

    def loop(body, owner):
        if not full:
            return Repetition(body)
        name = new_name(owner)
        fresh[name] = choice(seq(body, Nonterminal(name)), EMPTY)
        return Nonterminal(name)

    for name, body in g.productions.items():
        productions[name] = rewrite(body, name)
    productions.update(fresh)
    return Grammar(productions, g.start)


def strip_ast_ops(g: Grammar) -> Grammar:
    """Remove every AST operator, keeping recognition unchanged."""
    return g.map(strip_expression)


def strip_expression(e: Expression) -> Expression:
    if isinstance(e, (Tag, Replace)):
        return EMPTY
    if isinstance(e, (New, LeftFold, Link)):
        return strip_expression(e.expr)
    return map_children(e, strip_expression)


def uses(g: Grammar, kinds) -> bool:
    return any(isinstance(e, kinds) for body in g.productions.values() for e in walk(body))
