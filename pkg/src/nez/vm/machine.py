"""The parsing machine: a stack-based interpreter for compiled programs.

All frames share one stack:

    (ALT, target, pos, symbol length, log length)   failure handler
    (CALL, return address)
    (POS, pos)                                      saved position
    (BLOCK, symbol length)                          symbol scope
    (TPUSH, log length)                             start of a link
    (MEMO, pos, log length)                         pending memo store
    (TX, log length)                                explicit AST transaction

On failure frames are popped until an ALT frame is found; the machine then
rewinds position, symbol table and AST log to that frame's snapshot and
jumps to its target.  With no ALT frame left, the parse fails.
"""

from __future__ import annotations

from collections import Counter
from typing import Optional, TextIO

from nez.errors import MachineTrap, StepBudgetExceeded
from nez.result import ParseResult
from nez.symtab import SymbolTable
from nez.syntax import format_class, quote_bytes
from nez.tree import CAPTURE, FOLD, NEW, REPLACE, TAG, AstLog, build
from nez.vm.instructions import Op, Program
from nez.vm.memo import DEFAULT_CAPACITY, FAILED, MemoTable

ALT_F, CALL_F, POS_F, BLOCK_F, TPUSH_F, MEMO_F, TX_F = range(7)

(NOP, FAIL, ALT, SUCC, JUMP, CALL, RET, POS, BACK, SKIP, BYTE, ANY, SET, STR,
 TPUSH, TPOP, TLEFTFOLD, TNEW, TLINK, TCAPTURE, TTAG, TREPLACE, TSTART,
 TCOMMIT, TABORT, SOPEN, SCLOSE, SMASK, SYMBOL, EXISTS, ISDEF, MATCH, IS, ISA,
 LOOKUP, MEMO, MEMOFAIL, TLOOKUP, TMEMO, EXIT) = [int(op) for op in Op]


class Stats:
    """Counters filled in by an instrumented run."""

    def __init__(self):
        self.instructions = 0
        self.evaluations: Counter = Counter()  # (pos, production) -> body runs
        self.memo_hits = 0
        self.memo_misses = 0

    def __repr__(self):
        return (f'Stats(instructions={self.instructions}, memo_hits={self.memo_hits}, '
                f'memo_misses={self.memo_misses})')


class _Tables:
    """Per-program data unpacked for the dispatch loop."""

    def __init__(self, p: Program):
        self.ops = [int(i.op) for i in p.code]
        self.a = [i.a for i in p.code]
        self.b = [i.b for i in p.code]
        n = len(p.code)
        self.describe = [None] * n
        self.memoized_call = [False] * n
        for ip, ins in enumerate(p.code):
            if ins.op == Op.BYTE:
                self.describe[ip] = quote_bytes(bytes([ins.a]))
            elif ins.op == Op.SET:
                self.describe[ip] = format_class(p.classes[ins.a])
            elif ins.op == Op.ANY:
                self.describe[ip] = '.'
            elif ins.op == Op.MATCH:
                self.describe[ip] = f'<match {p.names[ins.a]}>'
            elif ins.op == Op.CALL and 0 <= ins.a < n:
                self.memoized_call[ip] = p.code[ins.a].op in (Op.LOOKUP, Op.TLOOKUP)


def _tables(p: Program) -> _Tables:
    t = p.__dict__.get('_tables')
    if t is None:
        t = _Tables(p)
        object.__setattr__(p, '_tables', t)
    return t


class Machine:

    def __init__(self, program: Program, *, build_tree: bool = True, memo: bool = True,
                 capacity: int = DEFAULT_CAPACITY, budget: Optional[int] = None,
                 trace: Optional[TextIO] = None):
        self.program = program
        self.build_tree = build_tree
        self.memo = memo
        self.capacity = capacity
        self.budget = budget
        self.trace = trace

    def run(self, data: bytes, stats: Optional[Stats] = None) -> ParseResult:
        try:
            return self._run(bytes(data), stats)
        except (IndexError, TypeError) as exc:
            raise MachineTrap(f'corrupted program: {exc}') from exc

    def _run(self, data: bytes, stats: Optional[Stats]) -> ParseResult:
        p = self.program
        t = _tables(p)
        ops, A, B, describe = t.ops, t.a, t.b, t.describe
        memoized_call = t.memoized_call
        names, strings, classes = p.names, p.strings, p.classes
        points = p.memo_points
        n = len(data)
        symtab = SymbolTable()
        sym = symtab.entries
        log = AstLog(data) if self.build_tree else None
        records = log.records if log is not None else []
        building = log is not None
        table = MemoTable(self.capacity)
        use_memo = self.memo
        budget = self.budget
        trace = self.trace
        evals = stats.evaluations if stats is not None else None

        stack = []
        ip = 0
        pos = 0
        steps = 0
        far = 0
        expected = set()

        while True:
            steps += 1
            op = ops[ip]
            if trace is not None:
                trace.write(f'{ip:6d} @{pos:<6d} {_render(p, p.code[ip])}\n')
            if budget is not None and steps > budget:
                raise StepBudgetExceeded(f'machine exceeded {budget} steps')

            if op == BYTE:
                if pos < n and data[pos] == A[ip]:
                    pos += 1
                    ip += 1
                    continue
                if pos >= far:
                    if pos > far:
                        far = pos
                        expected = set()
                    expected.add(describe[ip])
            elif op == CALL:
                if evals is not None and not memoized_call[ip]:
                    evals[(pos, names[B[ip]])] += 1
                stack.append((CALL_F, ip + 1))
                ip = A[ip]
                continue
            elif op == RET:
                f = stack.pop()
                if f[0] != CALL_F:
                    raise MachineTrap(f'ret at {ip} without a call frame')
                ip = f[1]
                continue
            elif op == ALT:
                stack.append((ALT_F, A[ip], pos, len(sym), len(records)))
                ip += 1
                continue
            elif op == SUCC:
                if stack.pop()[0] != ALT_F:
                    raise MachineTrap(f'succ at {ip} without a choice frame')
                ip += 1
                continue
            elif op == JUMP:
                ip = A[ip]
                continue
            elif op == SET:
                if pos < n and data[pos] in classes[A[ip]]:
                    pos += 1
                    ip += 1
                    continue
                if pos >= far:
                    if pos > far:
                        far = pos
                        expected = set()
                    expected.add(describe[ip])
            elif op == STR:
                s = strings[A[ip]]
                if data.startswith(s, pos):
                    pos += len(s)
                    ip += 1
                    continue
                i = 0
                while pos + i < n and data[pos + i] == s[i]:
                    i += 1
                at = pos + i
                if at >= far:
                    if at > far:
                        far = at
                        expected = set()
                    expected.add(quote_bytes(s[i:i + 1]))
            elif op == SKIP:
                f = stack[-1]
                if f[0] != ALT_F:
                    raise MachineTrap(f'skip at {ip} without a choice frame')
                if pos != f[2]:
                    stack.pop()
                    ip += 1
                    continue
            elif op == LOOKUP or op == TLOOKUP:
                hit = False
                if use_memo:
                    hit, result = table.lookup(pos, A[ip])
                if hit:
                    if result is FAILED:
                        pass
                    else:
                        length, segment = result
                        pos += length
                        if building and op == TLOOKUP:
                            records.extend(segment)
                        ip = B[ip]
                        continue
                else:
                    if evals is not None:
                        evals[(pos, points[A[ip]])] += 1
                    stack.append((MEMO_F, pos, len(records)))
                    ip += 1
                    continue
            elif op == MEMO or op == TMEMO:
                f = stack.pop()
                if f[0] != MEMO_F:
                    raise MachineTrap(f'{Op(op).mnemonic} at {ip} without a memo frame')
                if use_memo:
                    segment = tuple(records[f[2]:]) if building and op == TMEMO else ()
                    table.store(f[1], A[ip], (pos - f[1], segment))
                ip += 1
                continue
            elif op == MEMOFAIL:
                f = stack.pop()
                if f[0] != MEMO_F:
                    raise MachineTrap(f'memofail at {ip} without a memo frame')
                if use_memo:
                    table.store(f[1], A[ip], FAILED)
            elif op == ANY:
                if pos < n:
                    pos += 1
                    ip += 1
                    continue
                if pos >= far:
                    if pos > far:
                        far = pos
                        expected = set()
                    expected.add(describe[ip])
            elif op == NOP:
                ip += 1
                continue
            elif op == TNEW:
                if building:
                    records.append((NEW, pos, None))
                ip += 1
                continue
            elif op == TCAPTURE:
                if building:
                    records.append((CAPTURE, pos, None))
                ip += 1
                continue
            elif op == TPUSH:
                stack.append((TPUSH_F, len(records)))
                ip += 1
                continue
            elif op == TLINK:
                f = stack[-1]
                if f[0] != TPUSH_F:
                    raise MachineTrap(f'tlink at {ip} without a tpush frame')
                if building:
                    label = A[ip]
                    log.link_from(f[1], None if label is None else names[label])
                ip += 1
                continue
            elif op == TPOP:
                if stack.pop()[0] != TPUSH_F:
                    raise MachineTrap(f'tpop at {ip} without a tpush frame')
                ip += 1
                continue
            elif op == TTAG:
                if building:
                    records.append((TAG, names[A[ip]], None))
                ip += 1
                continue
            elif op == TLEFTFOLD:
                if building:
                    label = A[ip]
                    records.append((FOLD, pos, None if label is None else names[label]))
                ip += 1
                continue
            elif op == TREPLACE:
                if building:
                    records.append((REPLACE, strings[A[ip]], None))
                ip += 1
                continue
            elif op == POS:
                stack.append((POS_F, pos))
                ip += 1
                continue
            elif op == BACK:
                f = stack.pop()
                if f[0] != POS_F:
                    raise MachineTrap(f'back at {ip} without a pos frame')
                pos = f[1]
                ip += 1
                continue
            elif op == FAIL:
                pass
            elif op == SYMBOL or op == IS or op == ISA:
                f = stack.pop()
                if f[0] != POS_F:
                    raise MachineTrap(f'{Op(op).mnemonic} at {ip} without a pos frame')
                name = names[A[ip]]
                value = data[f[1]:pos]
                if op == SYMBOL:
                    symtab.add(name, value)
                    ip += 1
                    continue
                if op == IS:
                    top = symtab.top(name)
                    ok = top is not None and top == value
                else:
                    ok = symtab.contains(name, value)
                if ok:
                    ip += 1
                    continue
            elif op == EXISTS:
                if symtab.count(names[A[ip]]) > 0:
                    ip += 1
                    continue
            elif op == ISDEF:
                if symtab.contains(names[A[ip]], strings[B[ip]]):
                    ip += 1
                    continue
            elif op == MATCH:
                top = symtab.top(names[A[ip]])
                if top is not None and data.startswith(top, pos):
                    pos += len(top)
                    ip += 1
                    continue
                if pos >= far:
                    if pos > far:
                        far = pos
                        expected = set()
                    expected.add(describe[ip])
            elif op == SOPEN:
                stack.append((BLOCK_F, len(sym)))
                ip += 1
                continue
            elif op == SCLOSE:
                f = stack.pop()
                if f[0] != BLOCK_F:
                    raise MachineTrap(f'sclose at {ip} without a scope frame')
                del sym[f[1]:]
                ip += 1
                continue
            elif op == SMASK:
                symtab.mask(names[A[ip]])
                ip += 1
                continue
            elif op == TSTART:
                stack.append((TX_F, len(records)))
                ip += 1
                continue
            elif op == TCOMMIT or op == TABORT:
                f = stack.pop()
                if f[0] != TX_F:
                    raise MachineTrap(f'{Op(op).mnemonic} at {ip} without a tstart frame')
                if op == TABORT:
                    del records[f[1]:]
                ip += 1
                continue
            elif op == EXIT:
                if stats is not None:
                    _finish(stats, steps, table)
                tree = build(records, data) if building else None
                return ParseResult(True, pos, tree, far, frozenset(expected))
            else:
                raise MachineTrap(f'unknown opcode {op} at {ip}')

            # failure: unwind to the innermost choice frame
            while stack:
                f = stack.pop()
                if f[0] == ALT_F:
                    ip = f[1]
                    pos = f[2]
                    del sym[f[3]:]
                    del records[f[4]:]
                    break
            else:
                if stats is not None:
                    _finish(stats, steps, table)
                return ParseResult(False, 0, None, far, frozenset(expected))


def _finish(stats: Stats, steps: int, table: MemoTable):
    stats.instructions += steps
    stats.memo_hits += table.hits
    stats.memo_misses += table.misses


def _render(p: Program, ins) -> str:
    from nez.vm.asm import render_instruction
    return render_instruction(p, ins, {})
