"""Nez: parsing expression grammars with AST construction, a symbol table
and parsing conditions, run by a reference interpreter or a packrat parsing
machine."""

from nez.conditions import eliminate
from nez.errors import (
    AsmSyntaxError, CommitWithoutRoot, DuplicateProduction, EmptyRepetitionBody,
    FoldWithoutLeft, GrammarError, GrammarSyntaxError, InvalidGrammar, MachineTrap,
    NezError, StaleMark, StepBudgetExceeded, UnsupportedConstruct,
)
from nez.grammar import Grammar, check, desugar, strip_ast_ops, validate
from nez.interpreter import Interpreter, match, parse
from nez.result import ParseResult
from nez.symtab import SymbolTable
from nez.syntax import format_expression, format_grammar, parse_expression, parse_grammar
from nez.tree import AstLog, Tree, to_json, to_sexp

__version__ = '0.1.0'

__all__ = [
    'AsmSyntaxError', 'AstLog', 'CommitWithoutRoot', 'DuplicateProduction',
    'EmptyRepetitionBody', 'FoldWithoutLeft', 'Grammar', 'GrammarError',
    'GrammarSyntaxError', 'Interpreter', 'InvalidGrammar', 'MachineTrap',
    'NezError', 'ParseResult', 'StaleMark', 'StepBudgetExceeded', 'SymbolTable',
    'Tree', 'UnsupportedConstruct', 'check', 'desugar', 'eliminate',
    'format_expression', 'format_grammar', 'match', 'parse', 'parse_expression',
    'parse_grammar', 'strip_ast_ops', 'to_json', 'to_sexp', 'validate',
]
