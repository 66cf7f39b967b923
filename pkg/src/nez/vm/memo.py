"""Constant-memory memoization table.

A fixed number of slots, each holding at most one result.  A key hashes to
exactly one slot; a store overwrites whatever was there, and a lookup only
answers when the stored key matches exactly.  Collisions therefore cost
re-evaluation but can never return a wrong result.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

DEFAULT_CAPACITY = 4096

_P1 = 1_000_003
_P2 = 8_191

FAILED = None  # the stored result of a failed evaluation


class MemoTable:

    __slots__ = ('capacity', '_keys', '_results', '_stamps', '_clock', 'hits', 'misses')

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if capacity < 1:
            raise ValueError('memo table needs at least one slot')
        self.capacity = capacity
        self._keys: List[Optional[Tuple[int, int]]] = [None] * capacity
        self._results: List[object] = [None] * capacity
        self._stamps = [0] * capacity
        self._clock = 0
        self.hits = 0
        self.misses = 0

    def slot(self, pos: int, memo_id: int) -> int:
        return ((pos * _P1) ^ (memo_id * _P2)) % self.capacity

    def lookup(self, pos: int, memo_id: int):
        """Return ``(True, result)`` on a hit, ``(False, None)`` on a miss.

        ``result`` is :data:`FAILED` or a ``(length, payload)`` pair.
        """
        i = self.slot(pos, memo_id)
        if self._keys[i] == (pos, memo_id):
            self.hits += 1
            return True, self._results[i]
        self.misses += 1
        return False, None

    def store(self, pos: int, memo_id: int, result):
        i = self.slot(pos, memo_id)
        self._clock += 1
        self._keys[i] = (pos, memo_id)
        self._results[i] = result
        self._stamps[i] = self._clock

    def stamp(self, pos: int, memo_id: int) -> int:
        i = self.slot(pos, memo_id)
        return self._stamps[i] if self._keys[i] == (pos, memo_id) else 0

    def __len__(self):
        return sum(1 for k in self._keys if k is not None)
