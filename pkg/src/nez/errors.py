"""Exception hierarchy shared by every part of the package."""

from __future__ import annotations


class NezError(Exception):
    pass


class GrammarError(NezError):
    """A grammar cannot be used (syntax error, validation error, ...)."""


class GrammarSyntaxError(GrammarError):
    def __init__(self, message, span=None, expected=()):
        self.message = message
        self.span = span
        self.expected = frozenset(expected)
        text = message
        if span is not None:
            text = f'{span.line}:{span.column}: {message}'
        if self.expected:
            text += ' (expected ' + ', '.join(sorted(self.expected)) + ')'
        super().__init__(text)


class DuplicateProduction(GrammarError):
    def __init__(self, name, span=None):
        self.name = name
        self.span = span
        where = f'{span.line}:{span.column}: ' if span is not None else ''
        super().__init__(f'{where}duplicate production {name!r}')


class EmptyRepetitionBody(GrammarError):
    pass


class InvalidGrammar(GrammarError):
    """Raised when an operation requires a grammar that passed validation."""

    def __init__(self, report):
        self.report = report
        super().__init__('; '.join(e.message for e in report.errors))


class StaleMark(NezError):
    """A checkpoint mark was consumed out of LIFO order."""


class CommitWithoutRoot(NezError):
    pass


class FoldWithoutLeft(NezError):
    pass


class StepBudgetExceeded(NezError):
    pass


class UnsupportedConstruct(NezError):
    pass


class MachineTrap(NezError):
    pass


class AsmSyntaxError(NezError):
    def __init__(self, message, line):
        self.line = line
        super().__init__(f'line {line}: {message}')
