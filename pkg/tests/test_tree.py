import json
from importlib import resources

import jsonschema
import pytest

from nez import corpus, interpreter, parse_grammar
from nez.errors import CommitWithoutRoot, FoldWithoutLeft, StaleMark
from nez.tree import AstLog, Tree, to_json, to_sexp


def tree_of(grammar, text, start=None):
    r = interpreter.parse(corpus.load(grammar), text.encode(), start=start)
    assert r.success
    return r.tree


class TestLog:

    def test_capture_span(self):
        log = AstLog(b'0L')
        log.new(0)
        log.capture(1)
        t = log.commit()
        assert (t.start, t.end, t.value) == (0, 1, b'0')

    def test_empty_capture(self):
        log = AstLog(b'abc')
        log.new(2)
        log.capture(2)
        assert log.commit().value == b''

    def test_last_tag_wins(self):
        log = AstLog(b'')
        log.new(0)
        log.tag('A')
        log.tag('B')
        log.capture(0)
        assert log.commit().tag == 'B'

    def test_replace_overrides_text_keeps_children(self):
        log = AstLog(b'xy')
        log.new(0)
        log.link(None, Tree('C', 0, 1, b'x'))
        log.replace(b'0')
        log.capture(2)
        t = log.commit()
        assert t.value == b'0' and len(t.children) == 1

    def test_rollback_forgets(self):
        log = AstLog(b'ab')
        log.new(0)
        m = log.checkpoint()
        log.tag('Lost')
        log.link('l', Tree('X', 0, 1, b'a'))
        log.rollback(m)
        log.capture(2)
        assert log.commit() == Tree(None, 0, 2, b'ab')

    def test_link_since_builds_child(self):
        log = AstLog(b'ab')
        log.new(0)
        m = log.checkpoint()
        log.new(1)
        log.tag('B')
        log.capture(2)
        log.link_since(m, 'right')
        log.capture(2)
        t = log.commit()
        assert t.labels == ['right'] and t['right'].value == b'b'

    def test_link_without_node_is_dropped(self):
        log = AstLog(b'ab')
        log.new(0)
        m = log.checkpoint()
        log.link_since(m)
        log.capture(2)
        assert log.commit().children == ()

    def test_fold_takes_previous_node(self):
        log = AstLog(b'1+2')
        log.new(0)
        log.capture(1)
        log.fold(0, 'left')
        log.tag('Add')
        log.capture(3)
        t = log.commit()
        assert t.tag == 'Add' and t.labels == ['left'] and t['left'].value == b'1'

    def test_fold_without_left(self):
        log = AstLog(b'1')
        log.fold(0)
        with pytest.raises(FoldWithoutLeft):
            log.commit()

    def test_empty_commit(self):
        with pytest.raises(CommitWithoutRoot):
            AstLog(b'').commit()

    def test_stale_mark(self):
        log = AstLog(b'')
        a = log.checkpoint()
        log.checkpoint()
        with pytest.raises(StaleMark):
            log.release(a)

    def test_replay_is_deterministic(self):
        log = AstLog(b'1+2')
        log.new(0)
        log.capture(1)
        log.fold(0)
        log.capture(3)
        assert log.commit() == log.commit()


class TestShapes:

    def test_long_captures_digits_only(self):
        t = tree_of('ast', '0L', 'Long')
        assert (t.tag, t.value, t.end) == ('Long', b'0', 1)

    def test_int(self):
        assert to_sexp(tree_of('ast', '42', 'Int')) == "#Int['42']"

    def test_default_value(self):
        assert to_sexp(tree_of('ast', '', 'DefaultValue')) == "#Int['0']"

    def test_flat_list(self):
        assert to_sexp(tree_of('ast', '1+2+3')) == "#Add[#Int['1'] #Int['2'] #Int['3']]"

    def test_right_nested_pair(self):
        assert to_sexp(tree_of('ast', '1+2+3', 'Binary')) == \
            "#Add[#Int['1'] #Add[#Int['2'] #Int['3']]]"

    def test_left_fold(self):
        assert to_sexp(tree_of('ast', '1+2+3', 'Add')) == \
            "#Add[#Add[#Int['1'] #Int['2']] #Int['3']]"

    def test_fold_zero_times(self):
        assert to_sexp(tree_of('ast', '1', 'Add')) == "#Int['1']"

    def test_math(self):
        assert to_sexp(tree_of('math', '1+2*3')) == corpus.ADD_1_MUL_2_3

    def test_dropped_connector(self):
        g = parse_grammar("S = { $(I) '+' I #Add }\nI = { [0-9] #Int }")
        r = interpreter.parse(g, b'1+2')
        assert to_sexp(r.tree) == "#Add[#Int['1']]"
        assert (r.tree.start, r.tree.end) == (0, 3)

    def test_unconnected_node_at_top_replaces_value(self):
        g = parse_grammar("S = I '+' I\nI = { [0-9] #Int }")
        assert to_sexp(interpreter.parse(g, b'1+2').tree) == "#Int['2']"

    def test_backtracked_alternative_leaves_nothing(self):
        g = parse_grammar("S = { $(I) #A 'x' } / { $(I) #B }\nI = { [0-9] #Int }")
        assert to_sexp(interpreter.parse(g, b'1').tree) == "#B[#Int['1']]"


class TestSerialization:

    def test_if_statement_sexp(self):
        t = tree_of('if', 'if (a > b) return a; else return b;')
        assert to_sexp(t) == ("#If[#GreaterThan[#Variable['a'] #Variable['b']] "
                              "#Return[#Variable['a']] #Return[#Variable['b']]]")

    def test_pretty(self):
        text = to_sexp(tree_of('if', 'if (a > b) return a; else return b;'), pretty=True)
        assert text.splitlines() == [
            '#If[',
            '  #GreaterThan[',
            "    #Variable['a']",
            "    #Variable['b']",
            '  ]',
            "  #Return[#Variable['a']]",
            "  #Return[#Variable['b']]",
            ']',
        ]

    def test_quoting(self):
        assert to_sexp(Tree('T', 0, 3, b"a'\n")) == "#T['a\\'\\n']"
        assert to_sexp(Tree(None, 0, 0, b'')) == "#['']"

    def test_json_validates(self):
        schema = json.loads(resources.files('nez').joinpath('schema', 'ast.schema.json').read_text())
        for case in corpus.cases():
            r = interpreter.parse(case.load(), case.input)
            if r.tree is not None:
                doc = json.loads(to_json(r.tree))
                jsonschema.validate(doc, schema)

    def test_json_fields(self):
        doc = json.loads(to_json(tree_of('ast', '1+2', 'LabeledAdd')))
        # the fold node starts where its body starts
        assert doc["tag"] == "Add" and doc["span"] == [1, 3]
        assert [c['label'] for c in doc['children']] == ['left', 'right']
        assert doc['children'][1]['value'] == '2'
