import io
import json
import shutil
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from nez import corpus
from nez.cli import BENCH_COLUMNS, main
from nez.syntax import parse_grammar
from nez.vm import assemble, compile_grammar, prepare


def grammar_path(name):
    return str(resources.files('nez').joinpath('grammars', f'{name}.nez'))


def invoke(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def write(tmp_path):
    def _write(name, content):
        path = tmp_path / name
        path.write_bytes(content if isinstance(content, bytes) else content.encode())
        return str(path)
    return _write


class TestParse:

    def test_math(self, write):
        code, out = invoke('parse', grammar_path('math'), write('a.txt', '1+2*3'))
        assert code == 0
        assert out.strip() == corpus.ADD_1_MUL_2_3

    def test_strict_reports_trailing_garbage(self, write, capsys):
        path = write('b.txt', '1+2*3###')
        code, _ = invoke('parse', '--strict', grammar_path('math'), path)
        assert code == 1
        err = capsys.readouterr().err
        assert f'{path}:1:6: parse error' in err

    def test_prefix_accepted_without_strict(self, write):
        code, out = invoke('parse', grammar_path('math'), write('b.txt', '1+2*3###'))
        assert code == 0

    def test_failure_message(self, write, capsys):
        path = write('c.txt', '1\n+x')
        code, _ = invoke('parse', '--strict', grammar_path('spacing'), path)
        assert code == 1
        err = capsys.readouterr().err.strip()
        assert err.startswith(f'{path}:2:2: parse error, expected {{')

    def test_missing_input_file(self, capsys):
        code, _ = invoke('parse', grammar_path('math'), '/nonexistent/input')
        assert code == 1

    def test_bad_grammar(self, write, capsys):
        code, _ = invoke('parse', write('bad.nez', 'A = B'), write('x.txt', ''))
        assert code == 2
        assert 'undefined-nonterminal' in capsys.readouterr().err

    def test_grammar_syntax_error(self, write, capsys):
        code, _ = invoke('parse', write('bad.nez', "A = 'a"), write('x.txt', ''))
        assert code == 2

    def test_missing_grammar(self, capsys):
        assert invoke('check', '/nonexistent/g.nez')[0] == 2

    def test_json_output_validates(self, write):
        schema = json.loads(resources.files('nez').joinpath('schema', 'ast.schema.json').read_text())
        code, out = invoke('parse', '--format', 'json', grammar_path('if'),
                           write('a.txt', 'if (a > b) return a; else return b;'))
        assert code == 0
        jsonschema.validate(json.loads(out), schema)

    def test_pretty(self, write):
        code, out = invoke('parse', '--pretty', grammar_path('if'),
                           write('a.txt', 'if (a > b) return a; else return b;'))
        assert out.splitlines()[0] == '#If['

    def test_stdin(self, monkeypatch):
        monkeypatch.setattr(sys, 'stdin', io.TextIOWrapper(io.BytesIO(b'7*8')))
        code, out = invoke('parse', grammar_path('math'), '-')
        assert code == 0 and out.startswith('#Mul[')

    def test_start_flag(self, write):
        code, out = invoke('parse', '--start', 'Long', grammar_path('ast'), write('a', '0L'))
        assert out.strip() == "#Long['0']"
        assert invoke('parse', '--start', 'Nope', grammar_path('ast'), write('b', '0'))[0] == 2

    def test_worst_exit_code_wins(self, write):
        code, out = invoke('match', grammar_path('math'), write('a', '1'), write('b', 'x'))
        assert code == 1 and out.strip() == '1'

    def test_trace(self, write, capsys):
        invoke('match', '--trace', '--engine', 'interp', grammar_path('math'), write('a', '1'))
        assert 'Expr @0' in capsys.readouterr().err

    def test_desugar_full(self, write):
        code, out = invoke('parse', '--desugar-full', grammar_path('math'), write('a', '1+2*3'))
        assert out.strip() == corpus.ADD_1_MUL_2_3


class TestMatch:

    def test_length(self, write):
        assert invoke('match', grammar_path('math'), write('a', '1+2*3')) == (0, '5\n')

    def test_failure(self, write):
        assert invoke('match', grammar_path('math'), write('a', '/x'))[0] == 1


@pytest.mark.parametrize('case', corpus.cases(), ids=lambda c: c.id)
def test_engine_flag_is_transparent(case, write):
    path = write('input', case.input)
    extra = ['--start', case.start] if case.start else []
    for command in ('parse', 'match'):
        vm_run = invoke(command, *extra, grammar_path(case.grammar), path)
        interp_run = invoke(command, '--engine', 'interp', *extra, grammar_path(case.grammar), path)
        nomemo = invoke(command, '--no-memo', *extra, grammar_path(case.grammar), path)
        assert vm_run == interp_run == nomemo
        assert vm_run[0] == (0 if case.accepts else 1)


class TestEliminate:

    def test_condition_free_is_canonical(self):
        code, out = invoke('eliminate', grammar_path('math'))
        assert code == 0
        assert parse_grammar(out) == corpus.load('math')

    def test_spacing(self, write):
        code, out = invoke('eliminate', grammar_path('spacing'))
        assert code == 0
        assert '<if' not in out and '<on' not in out
        assert invoke('check', write('out.nez', out))[0] == 0


class TestCompile:

    def test_byte(self, write):
        code, out = invoke('compile', write('g.nez', "A = 'a'"))
        assert code == 0 and 'byte 97' in out

    def test_not_pattern(self, write):
        out = invoke('compile', write('g.nez', "A = !'a'"))[1]
        lines = [l.strip() for l in out.splitlines()]
        i = lines.index('byte 97')
        assert lines[i - 1].startswith('alt ') and lines[i + 1:i + 3] == ['succ', 'fail']

    def test_assembles_back(self):
        out = invoke('compile', grammar_path('math'))[1]
        assert assemble(out) == compile_grammar(prepare(corpus.load('math')))

    def test_no_memo(self):
        out = invoke('compile', '--no-memo', grammar_path('expr'))[1]
        assert 'lookup' not in out


class TestBench:

    def test_single_file(self, write, capsys):
        code, out = invoke('bench', '--iters', '2', '--warmup', '0', grammar_path('math'),
                           write('a.txt', '1+2'))
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == ','.join(BENCH_COLUMNS)
        assert len(lines) == 2
        row = lines[1].split(',')
        assert row[1:5] == ['3', 'vm', 'on', '2']
        assert float(row[5]) >= float(row[6]) >= 0
        assert '# setup_ms=' in capsys.readouterr().err

    def test_interp_reports_memo_off(self, write):
        out = invoke('bench', '--iters', '1', '--engine', 'interp', grammar_path('math'),
                     write('a.txt', '1'))[1]
        assert out.splitlines()[1].split(',')[3] == 'off'

    def test_bad_iters(self, write):
        assert invoke('bench', '--iters', '0', grammar_path('math'), write('a', '1'))[0] == 2


class TestCheck:

    def test_valid(self):
        code, out = invoke('check', grammar_path('math'))
        assert code == 0 and 'ok, 3 productions' in out

    def test_left_recursion(self, write):
        code, out = invoke('check', write('lr.nez', "A = B 'x'\nB = A 'y' / 'z'"))
        assert code == 2
        assert 'left-recursion' in out and 'A -> B -> A' in out

    def test_conditions_listed(self):
        code, out = invoke('check', grammar_path('spacing'))
        assert code == 0
        assert 'conditions: IgnoreNewLine; 6 productions after elimination' in out


@pytest.mark.skipif(shutil.which('nez') is None, reason='console script not installed')
def test_console_script(write):
    proc = subprocess.run(['nez', 'match', grammar_path('math'), write('a', '1+2*3')],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == '5\n'
