"""The symbol table: a single stack of ``(nonterminal, string)`` entries.

Scoping and backtracking both work by truncating the stack to an earlier
length.  Hiding every earlier entry of one nonterminal (``<local A e>``) pushes
a mask sentinel instead of deleting anything, so truncation undoes it too.
Lookups scan from the top, which keeps the structure a plain list.
"""

from __future__ import annotations

from typing import List, NamedTuple, Optional

from nez.errors import StaleMark


class SymbolEntry(NamedTuple):
    nonterminal: str
    value: bytes
    masked: bool = False


class Mark(NamedTuple):
    depth: int
    length: int
    serial: int


class SymbolTable:

    def __init__(self):
        self.entries: List[SymbolEntry] = []
        self._marks: List[Mark] = []
        self._serial = 0

    def __len__(self):
        return len(self.entries)

    def __repr__(self):
        body = ''.join(f'[{e.nonterminal},{"<mask>" if e.masked else e.value!r}]'
                       for e in self.entries)
        return f'SymbolTable({body or "ε"})'

    def add(self, name: str, value: bytes):
        self.entries.append(SymbolEntry(name, value))

    def mask(self, name: str):
        self.entries.append(SymbolEntry(name, b'', True))

    def _visible(self, name):
        for entry in reversed(self.entries):
            if entry.nonterminal == name:
                if entry.masked:
                    return
                yield entry.value

    def top(self, name: str) -> Optional[bytes]:
        for value in self._visible(name):
            return value
        return None

    def count(self, name: str) -> int:
        return sum(1 for _ in self._visible(name))

    def contains(self, name: str, value: bytes) -> bool:
        return any(v == value for v in self._visible(name))

    # -- scopes -----------------------------------------------------------

    def checkpoint(self) -> Mark:
        self._serial += 1
        mark = Mark(len(self._marks), len(self.entries), self._serial)
        self._marks.append(mark)
        return mark

    def _pop(self, mark: Mark):
        if not self._marks or self._marks[-1] != mark:
            raise StaleMark(f'mark {mark} is not the innermost open scope')
        self._marks.pop()

    def rollback(self, mark: Mark):
        """Discard every entry added since ``mark`` and close its scope."""
        self._pop(mark)
        del self.entries[mark.length:]

    def commit_scope(self, mark: Mark):
        """Close the scope opened by ``mark``, keeping its entries."""
        self._pop(mark)

    @property
    def open_scopes(self) -> int:
        return len(self._marks)

    # unchecked fast path used by the parsing machine, whose frame stack
    # already guarantees LIFO order
    def truncate(self, length: int):
        del self.entries[length:]
