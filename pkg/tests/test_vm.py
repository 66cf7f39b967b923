import dataclasses
import io

import pytest

from nez import corpus, interpreter, parse_grammar, vm
from nez.errors import AsmSyntaxError, MachineTrap, StepBudgetExceeded, UnsupportedConstruct
from nez.tree import to_sexp
from nez.vm import Instruction, MemoTable, Op, Stats, assemble, compile_grammar, disassemble


def body(text, name=None):
    """The instructions of one production, as mnemonics with operands."""
    g = parse_grammar(text)
    p = compile_grammar(g, memo=False)
    lines = disassemble(p).splitlines()
    head = lines.index(f'{name or g.start}:')
    out = []
    for line in lines[head + 1:]:
        if not line.startswith('    '):
            if line.startswith('.L'):
                out.append(line)
                continue
            break
        out.append(line.strip())
    return out


class TestCompilePatterns:

    def test_empty_and_char(self):
        assert body("A = ''") == ['nop', 'ret']
        assert body("A = 'a'") == ['byte 97', 'ret']

    def test_not(self):
        assert body("A = !'a'") == ['alt .L6', 'byte 97', 'succ', 'fail', '.L6:', 'ret']

    def test_and(self):
        assert body("A = &'a'") == ['pos', 'byte 97', 'back', 'ret']

    def test_choice(self):
        assert body("A = 'a' / 'b'") == [
            'alt .L6', 'byte 97', 'succ', 'jump .L7', '.L6:', 'byte 98', '.L7:', 'ret']

    def test_repetition_loop(self):
        assert body("A = 'a'*") == ['alt .L6', 'byte 97', 'skip', 'jump A', '.L6:', 'ret']

    def test_symbol_operators(self):
        code = body("A = <symbol B> <is B> <isa B> <exists B> <exists B 'x'> <match B>\nB = 'b'")
        assert code == ['pos', 'call B', 'symbol B', 'pos', 'call B', 'is B', 'pos', 'call B',
                        'isa B', 'exists B', "isdef B 'x'", 'match B', 'ret']

    def test_scopes(self):
        assert body("A = <block 'a'> <local B 'c'>\nB = 'b'") == [
            'sopen', 'byte 97', 'sclose', 'sopen', 'smask B', 'byte 99', 'sclose', 'ret']

    def test_tree_operators(self):
        assert body("A = { 'a' #T } $(B) {$ 'c' } `x`\nB = 'b'") == [
            'tnew', 'byte 97', 'ttag T', 'tcapture', 'tpush', 'call B', 'tlink', 'tpop',
            'tleftfold', 'byte 99', 'tcapture', "treplace 'x'", 'ret']

    def test_literals_and_classes(self):
        assert body("A = 'abc' [a-z] .") == ["str 'abc'", 'set [a-z]', 'any', 'ret']

    def test_boot_code(self):
        p = compile_grammar(parse_grammar("A = 'a'"))
        assert p.code[:2] == (Instruction(Op.CALL, p.productions['A'], 0), Instruction(Op.EXIT))
        assert p.entry == p.productions['A'] and p.start == 'A'

    def test_memo_wrapper(self):
        p = compile_grammar(parse_grammar("A = B B\nB = 'b'"))
        assert p.memo_points == ('B',)
        assert 'lookup 0' in disassemble(p) and 'memofail 0' in disassemble(p)

    def test_tree_memo_wrapper(self):
        text = disassemble(compile_grammar(parse_grammar("A = B B\nB = { 'b' }")))
        assert 'tlookup 0' in text and 'tmemo 0' in text

    def test_memo_policy(self):
        g = parse_grammar("A = B B C C D\nB = 'b'\nC = <symbol B>\nD = 'd'")
        assert vm.memo_points(g) == ['B']

    def test_conditions_rejected(self):
        with pytest.raises(UnsupportedConstruct):
            compile_grammar(parse_grammar("A = <if c> 'a'"))

    def test_jump_targets_valid(self):
        for name in corpus.grammar_names():
            p = compile_grammar(vm.prepare(corpus.load(name)))
            for ins in p.code:
                if ins.op in (Op.ALT, Op.JUMP, Op.CALL, Op.LOOKUP, Op.TLOOKUP):
                    target = ins.b if ins.op in (Op.LOOKUP, Op.TLOOKUP) else ins.a
                    assert 0 <= target < len(p.code)


class TestAssembler:

    def test_nop_program(self):
        p = assemble('.start A\ncall A\nexit\nA:\nnop\nret\n')
        assert assemble(disassemble(p)) == p

    @pytest.mark.parametrize('name', corpus.grammar_names())
    def test_round_trip(self, name):
        p = compile_grammar(vm.prepare(corpus.load(name)))
        assert assemble(disassemble(p)) == p

    def test_hand_written(self):
        p = assemble("byte 'a'; exit")
        assert vm.run(p, b'a', mode='match').length == 1
        assert not vm.run(p, b'b', mode='match').success

    def test_comments(self):
        p = assemble("# leading\nbyte 97  # trailing\nstr '#;'; exit")
        assert vm.run(p, b'a#;', mode='match').length == 3

    @pytest.mark.parametrize('text,line', [
        ('nop\nfrobnicate', 2),
        ('jump nowhere', 1),
        ('exit\nbyte', 2),
        ("exit\n\nstr 'abc", 3),
        ('exit\nbyte 300', 2),
    ])
    def test_errors_carry_line(self, text, line):
        with pytest.raises(AsmSyntaxError) as info:
            assemble(text)
        assert f'line {line}' in str(info.value)


class TestMemoTable:

    def test_store_then_lookup(self):
        m = MemoTable()
        m.store(5, 2, (3, ()))
        assert m.lookup(5, 2) == (True, (3, ()))

    def test_fresh_is_miss(self):
        assert MemoTable().lookup(0, 0) == (False, None)

    def test_failure_is_a_hit(self):
        m = MemoTable()
        m.store(1, 1, vm.memo.FAILED)
        assert m.lookup(1, 1) == (True, None)

    def test_collision_overwrites(self):
        m = MemoTable(capacity=1)
        m.store(5, 2, (3, ()))
        m.store(9, 0, (1, ()))
        assert m.lookup(9, 0) == (True, (1, ()))
        assert m.lookup(5, 2) == (False, None)

    def test_no_fabrication_for_other_keys(self):
        m = MemoTable(capacity=7)
        m.store(3, 1, (2, ()))
        for pos in range(20):
            for k in range(3):
                if (pos, k) != (3, 1):
                    assert m.lookup(pos, k)[0] is False

    def test_capacity_must_be_positive(self):
        with pytest.raises(ValueError):
            MemoTable(capacity=0)


class TestMachine:

    def test_empty_grammar(self):
        assert vm.parse(parse_grammar("S = ''"), b'').length == 0

    def test_memo_hit_returns_cached_length(self):
        g = parse_grammar("S = &(A 'x') A 'y'\nA = 'a'+")
        with_memo, without = Stats(), Stats()
        r1 = vm.match(g, b'aaax', stats=with_memo)
        r2 = vm.match(g, b'aaax', memo=False, stats=without)
        assert r1.same_outcome(r2)
        assert with_memo.evaluations[(0, 'A')] == 1
        assert without.evaluations[(0, 'A')] == 2
        assert with_memo.memo_hits >= 1

    def test_tiny_memo_table_is_still_correct(self):
        g = corpus.load('expr')
        p = compile_grammar(vm.prepare(g))
        data = b'1+2*(3-4)/5'
        full = vm.run(p, data)
        for capacity in (1, 2, 3):
            assert vm.run(p, data, capacity=capacity).same_outcome(full)

    def test_trap_on_corrupted_code(self):
        p = assemble('back\nexit')
        with pytest.raises(MachineTrap):
            vm.run(p, b'')
        p = assemble('tlink\nexit')
        with pytest.raises(MachineTrap):
            vm.run(p, b'')

    def test_trap_on_bad_pool_index(self):
        good = assemble("set [a]\nexit")
        bad = dataclasses.replace(good, code=(Instruction(Op.SET, 5), Instruction(Op.EXIT)))
        with pytest.raises(MachineTrap):
            vm.run(bad, b'a')

    def test_budget(self):
        p = compile_grammar(parse_grammar("S = 'a'*"))
        with pytest.raises(StepBudgetExceeded):
            vm.run(p, b'a' * 100, budget=20)

    def test_mode_checked(self):
        with pytest.raises(ValueError):
            vm.run(compile_grammar(parse_grammar("S = 'a'")), b'a', mode='scan')

    def test_arbitrary_bytes(self):
        p = compile_grammar(vm.prepare(corpus.load('json')))
        for data in (bytes(range(256)), b'\xff' * 64, b'[' * 100):
            vm.run(p, data)

    def test_deep_nesting_needs_no_recursion(self):
        g = parse_grammar("S = '(' S ')' / 'x'")
        data = b'(' * 20000 + b'x' + b')' * 20000
        assert vm.match(g, data).length == len(data)

    def test_farthest_failure_matches_interpreter(self):
        for case in corpus.cases():
            g = case.load()
            a = interpreter.parse(g, case.input)
            b = vm.parse(g, case.input)
            assert (a.error_offset, a.expected) == (b.error_offset, b.expected), case.id

    def test_trace(self):
        out = io.StringIO()
        vm.run(compile_grammar(parse_grammar("S = 'a'")), b'a', trace=out)
        assert 'byte 97' in out.getvalue()

    def test_program_is_shareable(self):
        p = compile_grammar(vm.prepare(corpus.load('math')))
        first = vm.run(p, b'1+2')
        vm.run(p, b'3*4')
        assert vm.run(p, b'1+2') == first


@pytest.mark.parametrize('case', corpus.cases(), ids=lambda c: c.id)
@pytest.mark.parametrize('memo', [True, False], ids=['memo', 'nomemo'])
def test_corpus(case, memo):
    r = vm.parse(case.load(), case.input, memo=memo)
    assert r.success == case.accepts
    if case.accepts:
        assert r.length == case.length
        if case.tree is not None:
            assert to_sexp(r.tree) == case.tree
