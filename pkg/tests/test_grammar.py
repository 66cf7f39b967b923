import pytest

from nez import corpus, interpreter
from nez.errors import EmptyRepetitionBody, InvalidGrammar
from nez.grammar import (
    ANY, EMPTY, And, Block, Char, CharClass, Choice, Grammar, IfCond, LeftFold,
    Link, Local, New, Nonterminal, OneOrMore, Option, Repetition, Replace,
    Sequence, SymbolDef, Tag, char_class, check, choice, desugar, literal, seq,
    strip_ast_ops, uses, validate, walk,
)
from nez.syntax import parse_expression, parse_grammar


def kinds(report):
    return [(i.production, i.kind) for i in report.errors]


class TestConstruction:

    def test_sequence_collapses(self):
        assert seq() == EMPTY
        assert seq(Char(97)) == Char(97)
        assert seq(Char(97), seq(Char(98), Char(99))) == Sequence((Char(97), Char(98), Char(99)))

    def test_choice_collapses_and_flattens(self):
        assert choice(Char(97)) == Char(97)
        nested = choice(Char(97), choice(Char(98), Char(99)))
        assert isinstance(nested, Choice) and len(nested.items) == 3

    def test_char_class_covers_bytes(self):
        cls = char_class('0-9')
        assert isinstance(cls, CharClass)
        assert cls.chars == frozenset(range(48, 58))
        assert all(0 <= b < 256 for b in char_class('\\x00-\\xff').chars)

    def test_literal(self):
        assert literal(b'ab') == seq(Char(97), Char(98))
        assert literal(b'') == EMPTY

    def test_tags_are_derived(self):
        g = corpus.load('math')
        assert g.tags == {'Add', 'Sub', 'Mul', 'Div', 'Int'}

    def test_start_must_exist(self):
        with pytest.raises(KeyError):
            Grammar({'A': EMPTY}, 'B')


class TestValidate:

    def test_undefined_nonterminal(self):
        report = validate(Grammar({'A': Nonterminal('B')}, 'A'))
        assert kinds(report) == [('A', 'undefined-nonterminal')]
        assert 'B' in report.errors[0].message

    def test_direct_left_recursion(self):
        report = validate(parse_grammar("A = A 'a'"))
        assert kinds(report) == [('A', 'left-recursion')]

    def test_indirect_left_recursion_through_nullable_prefix(self):
        report = validate(parse_grammar("A = 'x'? B\nB = &'y' A 'z'"))
        assert [k for _, k in kinds(report)] == ['left-recursion']
        assert 'A -> B -> A' in report.errors[0].message

    def test_math_is_clean(self):
        assert validate(corpus.load('math')).errors == []

    def test_every_bundled_grammar_is_clean(self):
        for name in corpus.grammar_names():
            assert validate(corpus.load(name)).ok, name

    def test_empty_repetition_body(self):
        report = validate(parse_grammar("A = ('a'?)*"))
        assert kinds(report) == [('A', 'empty-repetition-body')]

    def test_symbol_only_body_counts_as_no_progress(self):
        g = parse_grammar("A = <symbol B>*\nB = 'b'?")
        assert [k for _, k in kinds(validate(g))] == ['empty-repetition-body']

    def test_unreachable_is_a_warning(self):
        report = validate(parse_grammar("A = 'a'\nB = 'b'"))
        assert report.ok and [w.production for w in report.warnings] == ['B']

    def test_check_raises(self):
        with pytest.raises(InvalidGrammar):
            check(parse_grammar('A = B'))


class TestDesugar:

    def test_option_becomes_choice(self):
        g = desugar(Grammar({'A': Option(Char(97))}, 'A'))
        assert g['A'] == Choice((Char(97), EMPTY))

    def test_option_of_empty(self):
        g = desugar(Grammar({'A': Option(EMPTY)}, 'A'))
        assert g['A'] == Choice((EMPTY, EMPTY))
        assert interpreter.match(g, b'').length == 0

    def test_plus_becomes_e_e_star(self):
        ab = seq(Char(97), Char(98))
        g = desugar(Grammar({'A': OneOrMore(ab)}, 'A'))
        assert g['A'] == Sequence((Char(97), Char(98), Repetition(ab)))

    def test_no_option_or_plus_left(self):
        for name in corpus.grammar_names():
            g = desugar(corpus.load(name))
            assert not uses(g, (Option, OneOrMore)), name

    def test_full_mode_introduces_recursion(self):
        g = desugar(parse_grammar("A = 'a'*"), full=True)
        assert not uses(g, (Repetition,))
        assert g['A'] == Nonterminal('A_rep1')
        assert g['A_rep1'] == choice(seq(Char(97), Nonterminal('A_rep1')), EMPTY)

    def test_rejects_nullable_loop(self):
        with pytest.raises(EmptyRepetitionBody):
            desugar(Grammar({'A': Repetition(Option(Char(97)))}, 'A'))

    @pytest.mark.parametrize('full', [False, True])
    def test_preserves_matching_on_corpus(self, full):
        for case in corpus.cases():
            g = case.load()
            expected = interpreter.match(g, case.input)
            got = interpreter.match(desugar(g, full=full), case.input)
            assert got.same_outcome(expected), case.id


class TestStrip:

    def test_new_with_tag(self):
        g = Grammar({'A': New(seq(Nonterminal('NUM'), Tag('Int'))), 'NUM': Char(49)}, 'A')
        assert strip_ast_ops(g)['A'] == Nonterminal('NUM')

    def test_math_val(self):
        assert strip_ast_ops(corpus.load('math'))['Val'] == parse_expression('[0-9]+')

    def test_pure_peg_fixpoint(self):
        g = parse_grammar("A = 'a' B* / !'c' .\nB = [xy]")
        assert strip_ast_ops(g) == g

    def test_keeps_symbol_and_condition_operators(self):
        g = parse_grammar("A = <block <symbol B> $(B) <if c> `x`>\nB = {'b' #T}")
        stripped = strip_ast_ops(g)
        assert not uses(stripped, (New, LeftFold, Link, Tag, Replace))
        assert uses(stripped, (Block,)) and uses(stripped, (SymbolDef,))
        assert uses(stripped, (IfCond,))

    def test_preserves_acceptance_on_corpus(self):
        for case in corpus.cases():
            g = case.load()
            parsed = interpreter.parse(g, case.input)
            matched = interpreter.Interpreter(strip_ast_ops(g), build_tree=False).parse(case.input)
            assert parsed.success == matched.success, case.id
            assert parsed.length == matched.length, case.id


def test_walk_visits_every_node():
    e = parse_expression("<local A ('a' / &.)*>")
    found = {type(x) for x in walk(e)}
    assert {Local, Repetition, Choice, Char, And, type(ANY)} <= found


def test_validated_corpus_terminates_on_large_input():
    # the default step budget is the termination guard
    data = (b'1+2*3-' * 11000)[:65536]
    for name in corpus.grammar_names():
        g = corpus.load(name)
        r = interpreter.match(g, data)
        assert r.length <= len(data)
