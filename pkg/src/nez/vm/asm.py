"""Text form of programs.

One instruction per line, optionally preceded by ``label:``.  Production
entry points are labelled with the production name; other jump targets get
``.L<offset>`` labels.  ``#`` starts a comment and ``;`` separates
statements, except inside quotes or brackets.  Directives::

    .start Expr        # start production (sets the entry offset)
    .memo 0 Prod       # memo point 0 caches production Prod

Operands: ``byte 97`` or ``byte 'a'``; ``set [0-9]``; ``str 'abc'``;
names and labels are bare words; optional names (fold and link labels) may
be omitted.
"""

from __future__ import annotations

import re
from typing import Dict, List, Optional, Tuple

from nez.errors import AsmSyntaxError, GrammarSyntaxError
from nez.grammar import Char, CharClass, Empty, Sequence
from nez.syntax import format_class, parse_expression, quote_bytes
from nez.vm.instructions import BY_MNEMONIC, OPERANDS, Op, Program, link

_LABEL = re.compile(r'^([A-Za-z_.][A-Za-z0-9_.]*):')
_WORD = re.compile(r'^[A-Za-z_.][A-Za-z0-9_.]*$')


def _jump_label(p: Program, offset: int, names: Dict[int, List[str]]) -> str:
    at = names.get(offset)
    return at[0] if at else f'.L{offset}'


def render_instruction(p: Program, ins, names: Dict[int, List[str]]) -> str:
    kinds = OPERANDS.get(ins.op, ())
    parts = [ins.op.mnemonic]
    for kind, value in zip(kinds, (ins.a, ins.b)):
        if kind == 'label':
            parts.append(_jump_label(p, value, names))
        elif kind == 'name':
            parts.append(p.names[value])
        elif kind == 'optname':
            if value is not None:
                parts.append(p.names[value])
        elif kind == 'str':
            parts.append(quote_bytes(p.strings[value]))
        elif kind == 'class':
            parts.append(format_class(p.classes[value]))
        else:
            parts.append(str(value))
    return ' '.join(parts)


def disassemble(p: Program) -> str:
    names = p.production_at()
    targets = set()
    for ins in p.code:
        for kind, value in zip(OPERANDS.get(ins.op, ()), (ins.a, ins.b)):
            if kind == 'label':
                targets.add(value)
    lines = []
    if p.start is not None:
        lines.append(f'.start {p.start}')
    for i, name in enumerate(p.memo_points):
        lines.append(f'.memo {i} {name}')
    for offset, ins in enumerate(p.code):
        for name in names.get(offset, ()):
            lines.append(f'{name}:')
        if offset in targets and offset not in names:
            lines.append(f'.L{offset}:')
        lines.append('    ' + render_instruction(p, ins, names))
    # labels may point one past the last instruction
    end = len(p.code)
    for name in names.get(end, ()):
        lines.append(f'{name}:')
    if end in targets and end not in names:
        lines.append(f'.L{end}:')
    return '\n'.join(lines) + '\n'


def _split(line: str, lineno: int) -> List[str]:
    """Split on ``;`` and strip ``#`` comments, honouring quotes and brackets."""
    statements, buf = [], []
    quote = None
    bracket = False
    i = 0
    while i < len(line):
        c = line[i]
        if quote or bracket:
            buf.append(c)
            if c == '\\' and i + 1 < len(line):
                buf.append(line[i + 1])
                i += 2
                continue
            if quote and c == quote:
                quote = None
            elif bracket and c == ']':
                bracket = False
        elif c in '\'"':
            quote = c
            buf.append(c)
        elif c == '[':
            bracket = True
            buf.append(c)
        elif c == '#':
            break
        elif c == ';':
            statements.append(''.join(buf))
            buf = []
        else:
            buf.append(c)
        i += 1
    if quote or bracket:
        raise AsmSyntaxError('unterminated quote or bracket', lineno)
    statements.append(''.join(buf))
    return [s.strip() for s in statements if s.strip()]


def _tokens(text: str, lineno: int) -> List[str]:
    out, i = [], 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        j = i
        if c in '\'"[':
            close = ']' if c == '[' else c
            j += 1
            while j < len(text) and text[j] != close:
                j += 2 if text[j] == '\\' else 1
            if j >= len(text):
                raise AsmSyntaxError('unterminated operand', lineno)
            j += 1
        else:
            while j < len(text) and not text[j].isspace():
                j += 1
        out.append(text[i:j])
        i = j
    return out


def _literal(token: str, lineno: int) -> bytes:
    try:
        e = parse_expression(token)
    except GrammarSyntaxError as exc:
        raise AsmSyntaxError(f'bad string operand {token}: {exc}', lineno) from None
    if isinstance(e, Empty):
        return b''
    if isinstance(e, Char):
        return bytes([e.byte])
    if isinstance(e, Sequence) and all(isinstance(x, Char) for x in e.items):
        return bytes(x.byte for x in e.items)
    raise AsmSyntaxError(f'expected a quoted string, got {token}', lineno)


def _operand(kind: str, token: str, lineno: int):
    if kind in ('label', 'name', 'optname'):
        if not _WORD.match(token):
            raise AsmSyntaxError(f'expected a name, got {token!r}', lineno)
        return token
    if kind == 'str':
        return _literal(token, lineno)
    if kind == 'class':
        try:
            e = parse_expression(token)
        except GrammarSyntaxError:
            e = None
        if not isinstance(e, CharClass):
            raise AsmSyntaxError(f'expected a character class, got {token!r}', lineno)
        return e.chars
    if kind == 'byte':
        if token[:1] in '\'"':
            value = _literal(token, lineno)
            if len(value) != 1:
                raise AsmSyntaxError(f'byte operand must be one byte: {token}', lineno)
            return value[0]
    try:
        value = int(token, 0)
    except ValueError:
        raise AsmSyntaxError(f'expected an integer, got {token!r}', lineno) from None
    if kind == 'byte' and not 0 <= value <= 255:
        raise AsmSyntaxError(f'byte out of range: {value}', lineno)
    return value


def assemble(text: str) -> Program:
    items: List[Tuple[Op, tuple]] = []
    lines: List[int] = []
    labels: Dict[str, int] = {}
    productions: Dict[str, int] = {}
    memo: Dict[int, str] = {}
    start: Optional[str] = None
    for lineno, line in enumerate(text.splitlines(), 1):
        for stmt in _split(line, lineno):
            if stmt.startswith('.') and not _LABEL.match(stmt):
                words = stmt.split()
                if words[0] == '.start' and len(words) == 2:
                    start = words[1]
                elif words[0] == '.memo' and len(words) == 3 and words[1].isdigit():
                    memo[int(words[1])] = words[2]
                else:
                    raise AsmSyntaxError(f'unknown directive {stmt!r}', lineno)
                continue
            while True:
                m = _LABEL.match(stmt)
                if not m:
                    break
                label = m.group(1)
                if label in labels:
                    raise AsmSyntaxError(f'duplicate label {label!r}', lineno)
                labels[label] = len(items)
                if not label.startswith('.'):
                    productions[label] = len(items)
                stmt = stmt[m.end():].strip()
            if not stmt:
                continue
            tokens = _tokens(stmt, lineno)
            op = BY_MNEMONIC.get(tokens[0])
            if op is None:
                raise AsmSyntaxError(f'unknown instruction {tokens[0]!r}', lineno)
            kinds = OPERANDS.get(op, ())
            args = tokens[1:]
            if kinds == ('optname',) and not args:
                items.append((op, (None,)))
                lines.append(lineno)
                continue
            if len(args) != len(kinds):
                raise AsmSyntaxError(
                    f'{op.mnemonic} takes {len(kinds)} operand(s), got {len(args)}', lineno)
            items.append((op, tuple(_operand(k, a, lineno) for k, a in zip(kinds, args))))
            lines.append(lineno)
    if sorted(memo) != list(range(len(memo))):
        raise AsmSyntaxError('memo point ids must be 0..n-1', 0)
    for (op, operands), lineno in zip(items, lines):
        for kind, value in zip(OPERANDS.get(op, ()), operands):
            if kind == 'label' and value not in labels:
                raise AsmSyntaxError(f'undefined label {value!r}', lineno)
    if start is not None and start not in productions:
        raise AsmSyntaxError(f'start production {start!r} has no label', 0)
    return link(items, labels, start=start, productions=productions,
                memo_points=[memo[i] for i in range(len(memo))])
