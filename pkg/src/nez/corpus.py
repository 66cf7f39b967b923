"""Bundled example grammars and inputs with their expected outcomes.

The expectations were worked out by hand from the grammar texts; the test
suites run them against both engines.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import List, Optional, Tuple

from nez.grammar import Grammar
from nez.syntax import parse_grammar


def grammar_names() -> List[str]:
    files = resources.files('nez').joinpath('grammars').iterdir()
    return sorted(f.name[:-4] for f in files if f.name.endswith('.nez'))


def grammar_text(name: str) -> str:
    return resources.files('nez').joinpath('grammars', f'{name}.nez').read_text('utf-8')


@lru_cache(maxsize=None)
def load(name: str, start: Optional[str] = None) -> Grammar:
    g = parse_grammar(grammar_text(name))
    return g.with_start(start) if start else g


@dataclass(frozen=True)
class Case:
    grammar: str
    input: bytes
    accepts: bool
    length: int = 0          # consumed bytes when accepted
    tree: Optional[str] = None  # flat S-expression, when it matters
    start: Optional[str] = None

    @property
    def id(self) -> str:
        where = f'{self.grammar}.{self.start}' if self.start else self.grammar
        return f'{where}:{self.input.decode("utf-8", "backslashreplace")!r}'

    def load(self) -> Grammar:
        return load(self.grammar, self.start)


def _c(grammar, text, accepts, length=0, tree=None, start=None):
    data = text.encode('utf-8') if isinstance(text, str) else text
    return Case(grammar, data, accepts, length, tree, start)


ADD_1_MUL_2_3 = "#Add[left: #Int['1'] right: #Mul[left: #Int['2'] right: #Int['3']]]"

CASES: Tuple[Case, ...] = (
    # arithmetic with folding
    _c('math', '1+2*3', True, 5, ADD_1_MUL_2_3),
    _c('math', '', False),
    _c('math', 'x', False),
    _c('math', '1+', True, 1, "#Int['1']"),
    _c('math', '1+2*3###', True, 5, ADD_1_MUL_2_3),
    _c('math', '1-2-3', True, 5,
       "#Sub[left: #Sub[left: #Int['1'] right: #Int['2']] right: #Int['3']]"),
    _c('math', '8/4/2*7', True, 7,
       "#Mul[left: #Div[left: #Div[left: #Int['8'] right: #Int['4']] right: #Int['2']]"
       " right: #Int['7']]"),
    # typedef names
    _c('typedef', 'typedef int uint; uint', True, 22),
    _c('typedef', 'uint', False),
    _c('typedef', 'int', True, 3),
    _c('typedef', 'typedef long size; size ', True, 24),
    _c('typedef', 'typedef int uint; uin', False),
    _c('typedef', 'typedef int a; typedef a b; b', True, 29),
    # symbol predicates
    _c('names', 'in include', True, 5),
    _c('names', 'in include', False, start='IsDemo'),
    _c('names', 'in in', True, 5, start='IsDemo'),
    _c('names', 'Apple Apples', True, 11),
    _c('names', 'Apple Apples', False, start='IsDemo'),
    # XML tags
    _c('xml', '<A><B></B></A>', True, 14),
    _c('xml', '<A><B></A></B>', False),
    _c('xml', '<A><B></B><C></C></A>', True, 21),
    _c('xml_unscoped', '<A><B></B></A>', False),
    _c('xml_unscoped', '<A><B></B></B>', True, 14),
    # AST construction
    _c('ast', '1+2+3', True, 5, "#Add[#Int['1'] #Int['2'] #Int['3']]"),
    _c('ast', '7', True, 1, "#Add[#Int['7']]"),
    _c('ast', '1+2+3', True, 5, "#Add[#Int['1'] #Add[#Int['2'] #Int['3']]]", start='Binary'),
    _c('ast', '1+2+3', True, 5, "#Add[#Add[#Int['1'] #Int['2']] #Int['3']]", start='Add'),
    _c('ast', '1+2', True, 3, "#Add[left: #Int['1'] right: #Int['2']]", start='LabeledAdd'),
    _c('ast', '0L', True, 2, "#Long['0']", start='Long'),
    _c('ast', '', True, 0, "#Int['0']", start='DefaultValue'),
    _c('ast', '12', True, 2, "#Int['12']", start='Int'),
    # conditions
    _c('spacing', '1 + 2', True, 5, "#Add[left: #Int['1'] right: #Int['2']]"),
    _c('spacing', '1\n+2', True, 4, "#Add[left: #Int['1'] right: #Int['2']]"),
    _c('spacing', '(1\n+2)', False),
    _c('spacing', '(1 +\t2)', True, 7, "#Add[left: #Int['1'] right: #Int['2']]"),
    _c('spacing', '1;\n2', True, 4),
    _c('spacing', '(1+(2\n+3))', False),
    _c('cond3', 'ab', True, 2),
    _c('cond3', 'abinc', True, 5),
    _c('cond3', 'ainbc', True, 2),
    _c('cond3', 'a', False),
    # backtracking
    _c('backtrack', 'aaaz', True, 4, "#As['aaa']"),
    _c('backtrack', 'aaax', True, 4, "#As['aaa']"),
    _c('backtrack', 'aaaw', False),
    _c('expr', '1+2*(3-4)/5', True, 11,
       "#Add[#Int['1'] #Mul[#Int['2'] #Div[#Sub[#Int['3'] #Int['4']] #Int['5']]]]"),
    _c('expr', '((1))', True, 5, "#Int['1']"),
    _c('expr', '(1+', False),
    # statements
    _c('if', 'if (a > b) return a; else return b;', True, 35,
       "#If[#GreaterThan[#Variable['a'] #Variable['b']] #Return[#Variable['a']]"
       " #Return[#Variable['b']]]"),
    _c('json', '{"a": [1, 2.5, true, null], "b": "x\\"y"}', True, 40),
    _c('json', '[1, -0.5e3, {}]', True, 15,
       "#Array[#Number['1'] #Number['-0.5e3'] #Object['{}']]"),
    _c('json', '[1,]', False),
)


def cases(grammar: Optional[str] = None) -> List[Case]:
    return [c for c in CASES if grammar is None or c.grammar == grammar]


_UNIT = b'12*(3+4)-5/6+'


def synthetic_expression(size: int) -> bytes:
    """An ``expr`` input of exactly ``size`` bytes with shallow nesting."""
    if size < 1:
        raise ValueError('size must be positive')
    units = max(0, (size - 1) // len(_UNIT))
    body = _UNIT * units
    return body + b'7' * (size - len(body))
