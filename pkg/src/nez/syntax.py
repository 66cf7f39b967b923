r"""Reader and writer for ``.nez`` grammar files.

The accepted notation::

    Grammar    <- Spacing (Production Spacing)* EOF
    Production <- Identifier '=' Expression
    Expression <- Sequence ('/' Sequence)*
    Sequence   <- Prefixed+            # stops before `Identifier '='`
    Prefixed   <- ('&' / '!')* Suffixed
    Suffixed   <- Primary ('?' / '*' / '+')*
    Primary    <- Literal / Class / '.' / '(' Expression ')'
                / '{$' Label? Expression '}'      # left-folding
                / '{' Expression '}'              # constructor
                / '$' Label? '(' Expression ')'   # connector
                / '#' Identifier / '`' Chars '`'
                / '<' Keyword ... '>' / Identifier

``{$`` immediately followed by ``(`` is read as a constructor whose body
starts with an unlabeled connector; :func:`format_grammar` always writes a
space after ``{$`` so that the two never collide.  Comments are ``//`` to
end of line and ``/* ... */``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional

from nez.errors import DuplicateProduction, GrammarSyntaxError
from nez.grammar import (
    And, AnyChar, Block, Char, CharClass, Choice, Empty, Exists, ExistsValue,
    Expression, Grammar, IfCond, Is, Isa, LeftFold, Link, Local, Match, New,
    Nonterminal, Not, OnCond, OneOrMore, Option, Repetition, Replace,
    Sequence, SymbolDef, Tag, choice, literal, seq,
)


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int


_ESCAPES = {'n': 10, 'r': 13, 't': 9, '\\': 92, "'": 39, '"': 34,
            '`': 96, '[': 91, ']': 93, '-': 45}
_IDENT_START = frozenset('ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_')
_IDENT_CONT = _IDENT_START | frozenset('0123456789')
_KEYWORDS = ('symbol', 'exists', 'match', 'isa', 'is', 'block', 'local', 'if', 'on')
_SEQUENCE_END = frozenset('/)}>')


def parse_grammar(text: str, start: Optional[str] = None) -> Grammar:
    """Read grammar text.  The first production is the start symbol unless
    ``start`` names another one."""
    productions = _Reader(text).grammar()
    if not productions:
        raise GrammarSyntaxError('grammar has no productions',
                                 SourceSpan(0, 0, 1, 1), {'production'})
    return Grammar(productions, start or next(iter(productions)))


def parse_expression(text: str) -> Expression:
    reader = _Reader(text)
    reader.spacing()
    e = reader.expression()
    reader.spacing()
    if reader.pos < len(text):
        reader.error('unexpected text', {'end of input'})
    return e


class _Reader:

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    # -- low level --------------------------------------------------------

    def span(self, start: int, end: Optional[int] = None) -> SourceSpan:
        end = start if end is None else end
        start = min(start, len(self.text))
        end = min(max(end, start), len(self.text))
        line = self.text.count('\n', 0, start) + 1
        column = start - (self.text.rfind('\n', 0, start) + 1) + 1
        to_bytes = lambda i: len(self.text[:i].encode('utf-8'))
        return SourceSpan(to_bytes(start), to_bytes(end), line, column)

    def error(self, message, expected=(), at=None):
        at = self.pos if at is None else at
        raise GrammarSyntaxError(message, self.span(at, at + 1), expected)

    def peek(self, s: str) -> bool:
        return self.text.startswith(s, self.pos)

    def eat(self, s: str) -> bool:
        if self.text.startswith(s, self.pos):
            self.pos += len(s)
            return True
        return False

    def expect(self, s: str):
        if not self.eat(s):
            self.error(f'expected {s!r}', {repr(s)})

    def spacing(self):
        text = self.text
        while self.pos < len(text):
            c = text[self.pos]
            if c in ' \t\r\n':
                self.pos += 1
            elif text.startswith('//', self.pos):
                end = text.find('\n', self.pos)
                self.pos = len(text) if end < 0 else end + 1
            elif text.startswith('/*', self.pos):
                end = text.find('*/', self.pos + 2)
                if end < 0:
                    self.error('unterminated comment', {"'*/'"})
                self.pos = end + 2
            else:
                break

    def identifier(self, what='identifier') -> str:
        start = self.pos
        if start >= len(self.text) or self.text[start] not in _IDENT_START:
            self.error(f'expected {what}', {what})
        self.pos += 1
        while self.pos < len(self.text) and self.text[self.pos] in _IDENT_CONT:
            self.pos += 1
        return self.text[start:self.pos]

    def at_identifier(self) -> bool:
        return self.pos < len(self.text) and self.text[self.pos] in _IDENT_START

    def at_production_head(self) -> bool:
        """Whether the upcoming text is `Identifier '='` (start of a new rule)."""
        if not self.at_identifier():
            return False
        saved = self.pos
        self.identifier()
        self.spacing()
        head = self.peek('=')
        self.pos = saved
        return head

    # -- grammar level ----------------------------------------------------

    def grammar(self) -> Dict[str, Expression]:
        productions: Dict[str, Expression] = {}
        self.spacing()
        while self.pos < len(self.text):
            start = self.pos
            name = self.identifier('production name')
            if name in productions:
                raise DuplicateProduction(name, self.span(start, self.pos))
            self.spacing()
            self.expect('=')
            self.spacing()
            productions[name] = self.expression()
            self.spacing()
        return productions

    def expression(self) -> Expression:
        alternatives = [self.sequence()]
        while True:
            self.spacing()
            if self.peek('/') and not self.peek('//') and not self.peek('/*'):
                self.pos += 1
                self.spacing()
                alternatives.append(self.sequence())
            else:
                break
        return choice(*alternatives)

    def sequence(self) -> Expression:
        items = [self.prefixed()]
        while True:
            self.spacing()
            if (self.pos >= len(self.text) or self.text[self.pos] in _SEQUENCE_END
                    or self.at_production_head()):
                break
            items.append(self.prefixed())
        return seq(*items)

    def prefixed(self) -> Expression:
        if self.eat('&'):
            self.spacing()
            return And(self.prefixed())
        if self.eat('!'):
            self.spacing()
            return Not(self.prefixed())
        return self.suffixed()

    def suffixed(self) -> Expression:
        e = self.primary()
        while True:
            if self.eat('*'):
                e = Repetition(e)
            elif self.eat('+'):
                e = OneOrMore(e)
            elif self.eat('?'):
                e = Option(e)
            else:
                return e

    def primary(self) -> Expression:
        text = self.text
        if self.pos >= len(text):
            self.error('unexpected end of input', {'expression'})
        c = text[self.pos]
        if c == "'" or c == '"':
            return literal(self.quoted(c))
        if c == '[':
            return self.char_class()
        if c == '.':
            self.pos += 1
            return AnyChar()
        if c == '(':
            self.pos += 1
            self.spacing()
            e = self.expression()
            self.spacing()
            self.expect(')')
            return e
        if c == '{':
            self.pos += 1
            fold = self.peek('$') and not self.peek('$(')
            label = None
            if fold:
                self.pos += 1
                if self.at_identifier():
                    label = self.identifier()
            self.spacing()
            e = self.expression()
            self.spacing()
            self.expect('}')
            return LeftFold(e, label) if fold else New(e)
        if c == '$':
            self.pos += 1
            label = self.identifier('label') if self.at_identifier() else None
            self.expect('(')
            self.spacing()
            e = self.expression()
            self.spacing()
            self.expect(')')
            return Link(e, label)
        if c == '#':
            self.pos += 1
            return Tag(self.identifier('tag name'))
        if c == '`':
            return Replace(self.quoted('`'))
        if c == '<':
            return self.symbol_operator()
        if c in _IDENT_START:
            return Nonterminal(self.identifier())
        self.error(f'unexpected character {c!r}', {'expression'})

    def symbol_operator(self) -> Expression:
        start = self.pos
        self.pos += 1
        self.spacing()
        keyword = None
        for kw in _KEYWORDS:
            if self.peek(kw) and not self._ident_char_at(self.pos + len(kw)):
                keyword = kw
                self.pos += len(kw)
                break
        if keyword is None:
            self.error('unknown operator', {f'<{kw}' for kw in _KEYWORDS})
        self.spacing()
        if keyword in ('block',):
            e = Block(self.expression())
        elif keyword == 'local':
            name = self.identifier('nonterminal')
            self.spacing()
            e = Local(name, self.expression())
        elif keyword in ('if', 'on'):
            positive = not self.eat('!')
            self.spacing()
            name = self.identifier('condition name')
            if keyword == 'if':
                e = IfCond(name, positive)
            else:
                self.spacing()
                e = OnCond(name, positive, self.expression())
        else:
            name = self.identifier('nonterminal')
            self.spacing()
            if keyword == 'exists' and (self.peek("'") or self.peek('"')):
                e = ExistsValue(name, self.quoted(self.text[self.pos]))
            else:
                e = {'symbol': SymbolDef, 'exists': Exists, 'match': Match,
                     'is': Is, 'isa': Isa}[keyword](name)
        self.spacing()
        if not self.eat('>'):
            self.error(f'unterminated <{keyword} ...> (opened at offset {start})', {"'>'"})
        return e

    def _ident_char_at(self, i):
        return i < len(self.text) and self.text[i] in _IDENT_CONT

    # -- lexical ----------------------------------------------------------

    def escape(self) -> int:
        # called with self.pos on the backslash
        self.pos += 1
        if self.pos >= len(self.text):
            self.error('unterminated escape')
        c = self.text[self.pos]
        if c == 'x':
            digits = self.text[self.pos + 1:self.pos + 3]
            if len(digits) != 2 or any(d not in '0123456789abcdefABCDEF' for d in digits):
                self.error('bad \\x escape, expected two hex digits', {'hex digit'})
            self.pos += 3
            return int(digits, 16)
        if c in _ESCAPES:
            self.pos += 1
            return _ESCAPES[c]
        self.error(f'unknown escape \\{c}', {'escape'})

    def quoted(self, quote: str) -> bytes:
        start = self.pos
        self.pos += 1
        out = bytearray()
        while True:
            if self.pos >= len(self.text):
                self.error('unterminated literal', {repr(quote)}, at=start)
            c = self.text[self.pos]
            if c == quote:
                self.pos += 1
                return bytes(out)
            if c == '\\':
                out.append(self.escape())
            else:
                out.extend(c.encode('utf-8'))
                self.pos += 1

    def class_char(self) -> int:
        c = self.text[self.pos]
        if c == '\\':
            return self.escape()
        if ord(c) > 127:
            self.error('non-ASCII character in class, use \\xHH', {'byte'})
        self.pos += 1
        return ord(c)

    def char_class(self) -> Expression:
        start = self.pos
        self.pos += 1
        chars = set()
        while True:
            if self.pos >= len(self.text):
                self.error('unterminated character class', {"']'"}, at=start)
            if self.text[self.pos] == ']':
                self.pos += 1
                return CharClass(frozenset(chars))
            lo = self.class_char()
            if (self.peek('-') and self.pos + 1 < len(self.text)
                    and self.text[self.pos + 1] != ']'):
                self.pos += 1
                hi = self.class_char()
                if hi < lo:
                    self.error('reversed range in class')
                chars.update(range(lo, hi + 1))
            else:
                chars.add(lo)


# -- formatting -----------------------------------------------------------

_PRIMARY, _SUFFIX, _PREFIX, _SEQ, _CHOICE = 5, 4, 3, 2, 1


def format_grammar(g: Grammar) -> str:
    """Canonical text: one production per line, minimal parentheses."""
    if g.start != next(iter(g.productions)):
        productions = {g.start: g.productions[g.start]}
        productions.update(g.productions)
    else:
        productions = g.productions
    return ''.join(f'{name} = {format_expression(e)}\n' for name, e in productions.items())


def format_expression(e: Expression) -> str:
    return _fmt(e)


def _precedence(e: Expression) -> int:
    if isinstance(e, Choice):
        return _CHOICE
    if isinstance(e, Sequence):
        return _PRIMARY if _literal_bytes(e) is not None else _SEQ
    if isinstance(e, (And, Not)):
        return _PREFIX
    if isinstance(e, (Repetition, OneOrMore, Option)):
        return _SUFFIX
    return _PRIMARY


def _literal_bytes(e: Sequence) -> Optional[bytes]:
    if all(isinstance(x, Char) for x in e.items):
        return bytes(x.byte for x in e.items)
    return None


def _wrap(e: Expression, minimum: int) -> str:
    s = _fmt(e)
    return f'({s})' if _precedence(e) < minimum else s


def _fmt(e: Expression) -> str:
    if isinstance(e, Empty):
        return "''"
    if isinstance(e, Char):
        return quote_bytes(bytes([e.byte]))
    if isinstance(e, CharClass):
        return format_class(e.chars)
    if isinstance(e, AnyChar):
        return '.'
    if isinstance(e, Nonterminal):
        return e.name
    if isinstance(e, Choice):
        return ' / '.join(_wrap(x, _SEQ) for x in e.items)
    if isinstance(e, Sequence):
        return _fmt_sequence(e.items)
    if isinstance(e, Repetition):
        return _wrap(e.expr, _PRIMARY) + '*'
    if isinstance(e, OneOrMore):
        return _wrap(e.expr, _PRIMARY) + '+'
    if isinstance(e, Option):
        return _wrap(e.expr, _PRIMARY) + '?'
    if isinstance(e, And):
        return '&' + _wrap(e.expr, _SUFFIX)
    if isinstance(e, Not):
        return '!' + _wrap(e.expr, _SUFFIX)
    if isinstance(e, New):
        return '{ ' + _fmt(e.expr) + ' }'
    if isinstance(e, LeftFold):
        return '{$' + (e.label or '') + ' ' + _fmt(e.expr) + ' }'
    if isinstance(e, Link):
        return '$' + (e.label or '') + '(' + _fmt(e.expr) + ')'
    if isinstance(e, Tag):
        return '#' + e.name
    if isinstance(e, Replace):
        return quote_bytes(e.text, '`')
    if isinstance(e, SymbolDef):
        return f'<symbol {e.name}>'
    if isinstance(e, Exists):
        return f'<exists {e.name}>'
    if isinstance(e, ExistsValue):
        return f'<exists {e.name} {quote_bytes(e.value)}>'
    if isinstance(e, Match):
        return f'<match {e.name}>'
    if isinstance(e, Is):
        return f'<is {e.name}>'
    if isinstance(e, Isa):
        return f'<isa {e.name}>'
    if isinstance(e, Block):
        return f'<block {_fmt(e.expr)}>'
    if isinstance(e, Local):
        return f'<local {e.name} {_fmt(e.expr)}>'
    if isinstance(e, IfCond):
        return f'<if {"" if e.positive else "!"}{e.name}>'
    if isinstance(e, OnCond):
        return f'<on {"" if e.positive else "!"}{e.name} {_fmt(e.expr)}>'
    raise TypeError(f'not an expression: {e!r}')


def _fmt_sequence(items) -> str:
    parts: List[str] = []
    run = bytearray()
    for x in items:
        if isinstance(x, Char):
            run.append(x.byte)
            continue
        if run:
            parts.append(quote_bytes(bytes(run)))
            run.clear()
        parts.append(_wrap(x, _PREFIX))
    if run:
        parts.append(quote_bytes(bytes(run)))
    return ' '.join(parts)


def _escape_byte(b: int, specials: str) -> str:
    c = chr(b)
    if c == '\n':
        return '\\n'
    if c == '\r':
        return '\\r'
    if c == '\t':
        return '\\t'
    if c == '\\' or c in specials:
        return '\\' + c
    if 32 <= b < 127:
        return c
    return f'\\x{b:02x}'


def quote_bytes(data: bytes, quote: str = "'") -> str:
    return quote + ''.join(_escape_byte(b, quote) for b in data) + quote


def format_class(chars) -> str:
    out = []
    members = sorted(chars)
    i = 0
    while i < len(members):
        j = i
        while j + 1 < len(members) and members[j + 1] == members[j] + 1:
            j += 1
        lo, hi = members[i], members[j]
        if hi - lo >= 2:
            out.append(_escape_byte(lo, ']-[') + '-' + _escape_byte(hi, ']-['))
            i = j + 1
        else:
            out.append(_escape_byte(lo, ']-['))
            i += 1
    return '[' + ''.join(out) + ']'
