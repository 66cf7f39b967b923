"""Instruction set and program container of the parsing machine."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

from nez.errors import MachineTrap


class Op(IntEnum):
    NOP = 0
    FAIL = 1
    ALT = 2
    SUCC = 3
    JUMP = 4
    CALL = 5
    RET = 6
    POS = 7
    BACK = 8
    SKIP = 9
    BYTE = 10
    ANY = 11
    SET = 12
    STR = 13
    TPUSH = 14
    TPOP = 15
    TLEFTFOLD = 16
    TNEW = 17
    TLINK = 18
    TCAPTURE = 19
    TTAG = 20
    TREPLACE = 21
    TSTART = 22
    TCOMMIT = 23
    TABORT = 24
    SOPEN = 25
    SCLOSE = 26
    SMASK = 27
    SYMBOL = 28
    EXISTS = 29
    ISDEF = 30
    MATCH = 31
    IS = 32
    ISA = 33
    LOOKUP = 34
    MEMO = 35
    MEMOFAIL = 36
    TLOOKUP = 37
    TMEMO = 38
    EXIT = 39

    @property
    def mnemonic(self) -> str:
        return self.name.lower()


# Operand kinds, in order.  'label' is a code offset, 'name', 'str' and
# 'class' index the constant pools, 'optname' is a name index or None,
# 'memo' is a memo-point id.  A call's second operand (the callee's name)
# is implied by its label and filled in by the linker.
OPERANDS: Dict[Op, Tuple[str, ...]] = {
    Op.ALT: ('label',),
    Op.JUMP: ('label',),
    Op.CALL: ('label',),
    Op.BYTE: ('byte',),
    Op.SET: ('class',),
    Op.STR: ('str',),
    Op.TLEFTFOLD: ('optname',),
    Op.TLINK: ('optname',),
    Op.TTAG: ('name',),
    Op.TREPLACE: ('str',),
    Op.SMASK: ('name',),
    Op.SYMBOL: ('name',),
    Op.EXISTS: ('name',),
    Op.ISDEF: ('name', 'str'),
    Op.MATCH: ('name',),
    Op.IS: ('name',),
    Op.ISA: ('name',),
    Op.LOOKUP: ('memo', 'label'),
    Op.TLOOKUP: ('memo', 'label'),
    Op.MEMO: ('memo',),
    Op.MEMOFAIL: ('memo',),
    Op.TMEMO: ('memo',),
}

BY_MNEMONIC = {op.mnemonic: op for op in Op}


class Instruction(NamedTuple):
    op: Op
    a: object = None
    b: object = None


@dataclass(frozen=True)
class Program:
    code: Tuple[Instruction, ...]
    entry: int = 0
    start: Optional[str] = None
    productions: Dict[str, int] = field(default_factory=dict)
    classes: Tuple[FrozenSet[int], ...] = ()
    strings: Tuple[bytes, ...] = ()
    names: Tuple[str, ...] = ()
    memo_points: Tuple[str, ...] = ()

    def __len__(self):
        return len(self.code)

    def production_at(self) -> Dict[int, List[str]]:
        out: Dict[int, List[str]] = {}
        for name, offset in self.productions.items():
            out.setdefault(offset, []).append(name)
        return out


# -- linking -----------------------------------------------------------------
#
# Both the compiler and the assembler produce "symbolic" instructions whose
# operands are plain values (label names, byte strings, class sets, names).
# Linking resolves labels and interns constants in order of first use, so
# the same instruction stream always yields the same pools.

Symbolic = Tuple[Op, Tuple[object, ...]]


def link(items: Sequence[Symbolic], labels: Dict[str, int], *, start: Optional[str] = None,
         productions: Optional[Dict[str, int]] = None,
         memo_points: Sequence[str] = (), entry: Optional[int] = None) -> Program:
    classes: Dict[FrozenSet[int], int] = {}
    strings: Dict[bytes, int] = {}
    names: Dict[str, int] = {}

    def intern(pool, value):
        index = pool.get(value)
        if index is None:
            index = pool[value] = len(pool)
        return index

    def resolve(label):
        try:
            return labels[label]
        except KeyError:
            raise MachineTrap(f'undefined label {label!r}') from None

    code = []
    for op, operands in items:
        kinds = OPERANDS.get(op, ())
        if len(operands) != len(kinds):
            raise MachineTrap(f'{op.mnemonic} takes {len(kinds)} operand(s), got {len(operands)}')
        values = []
        for kind, value in zip(kinds, operands):
            if kind == 'label':
                values.append(resolve(value))
            elif kind == 'name':
                values.append(intern(names, value))
            elif kind == 'optname':
                values.append(None if value is None else intern(names, value))
            elif kind == 'str':
                values.append(intern(strings, bytes(value)))
            elif kind == 'class':
                values.append(intern(classes, frozenset(value)))
            else:
                values.append(int(value))
        if op == Op.CALL:
            values.append(intern(names, operands[0]))
        code.append(Instruction(op, *values))
    if productions is None:
        productions = {}
    if entry is None:
        entry = productions.get(start, 0) if start is not None else 0
    return Program(tuple(code), entry, start, dict(productions),
                   tuple(classes), tuple(strings), tuple(names), tuple(memo_points))
