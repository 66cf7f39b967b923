from __future__ import annotations

import sys
import threading
from dataclasses import dataclass, field
from typing import FrozenSet, Optional

from nez.tree import Tree


@dataclass(frozen=True)
class ParseResult:
    """Outcome of one parse.

    ``length`` is the number of consumed bytes on success.  ``error_offset``
    and ``expected`` describe the farthest failure seen during the parse and
    are filled in whether or not the parse succeeded.
    """
    success: bool
    length: int = 0
    tree: Optional[Tree] = None
    error_offset: int = 0
    expected: FrozenSet[str] = field(default_factory=frozenset)

    def __bool__(self):
        return self.success

    def same_outcome(self, other: 'ParseResult') -> bool:
        return (self.success == other.success and self.length == other.length
                and self.tree == other.tree)


class Farthest:
    """Tracks the farthest failing offset and what was expected there."""
    __slots__ = ('offset', 'expected')

    def __init__(self):
        self.offset = 0
        self.expected = set()

    def fail(self, offset: int, what: str):
        if offset > self.offset:
            self.offset = offset
            self.expected = {what}
        elif offset == self.offset:
            self.expected.add(what)


_DEEP_STACK = 2 << 30
_DEEP_LIMIT = 400_000


def call_with_deep_stack(fn, *args):
    """Run ``fn`` in a helper thread with a very large stack.

    Recursive evaluation of deeply nested input needs far more frames than
    the main thread's default stack allows.
    """
    outcome = []

    def target():
        try:
            outcome.append((True, fn(*args)))
        except BaseException as exc:  # re-raised in the caller's thread
            outcome.append((False, exc))

    old_size = threading.stack_size(_DEEP_STACK)
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, _DEEP_LIMIT))
    try:
        worker = threading.Thread(target=target, name='nez-deep-parse')
        worker.start()
        worker.join()
    finally:
        threading.stack_size(old_size)
        sys.setrecursionlimit(old_limit)
    ok, value = outcome[0]
    if not ok:
        raise value
    return value
