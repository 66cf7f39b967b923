"""AST construction as an operation log.

Parsing never builds nodes directly.  It appends records to an
:class:`AstLog`; backtracking truncates the log, and the surviving records are
replayed into a :class:`Tree` once parsing is over.  A connector ``$(e)``
replays its own slice early and replaces it with a single link record that
holds the finished subtree, which keeps the log short.

Replay keeps a stack of open nodes.  Each level also remembers the node
most recently closed at that level; at the outermost level that node is the
current value, the one a later fold or tag refers to.

* new(p)      -- open a fresh node starting at ``p``
* capture(p)  -- close the innermost open node at ``p``; a node closed while
  another is still open is dropped (it was never connected)
* tag(t)      -- tag the innermost open node, else the current value
* replace(s)  -- likewise, overriding its text (children are kept)
* link(l, t)  -- append ``t`` to the innermost open node's children
* fold(p, l)  -- open a fresh node at ``p`` whose first child is the node
  last closed at this level

Records that need a node are dropped when there is none, except fold, which
raises :class:`FoldWithoutLeft`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

from nez.errors import CommitWithoutRoot, FoldWithoutLeft, StaleMark

NEW, CAPTURE, TAG, REPLACE, LINK, FOLD = range(6)
_KIND_NAMES = ('new', 'capture', 'tag', 'replace', 'link', 'fold')

Record = Tuple[int, Any, Any]


@dataclass(frozen=True)
class Tree:
    tag: Optional[str]
    start: int
    end: int
    text: bytes = b''
    replaced: Optional[bytes] = None
    children: Tuple[Tuple[Optional[str], 'Tree'], ...] = ()

    @property
    def value(self) -> bytes:
        return self.replaced if self.replaced is not None else self.text

    def __len__(self):
        return len(self.children)

    def __bool__(self):
        return True

    def __getitem__(self, index) -> 'Tree':
        if isinstance(index, str):
            for label, child in self.children:
                if label == index:
                    return child
            raise KeyError(index)
        return self.children[index][1]

    @property
    def labels(self) -> List[Optional[str]]:
        return [label for label, _ in self.children]

    def __str__(self):
        return to_sexp(self)

    def to_json(self) -> Dict[str, Any]:
        return _json_node(self)


class Mark(NamedTuple):
    depth: int
    length: int
    serial: int


class _Node:
    __slots__ = ('tag', 'start', 'end', 'replaced', 'children')

    def __init__(self, start):
        self.tag = None
        self.start = start
        self.end = None
        self.replaced = None
        self.children = []

    def freeze(self, source: bytes) -> Tree:
        end = self.start if self.end is None else self.end
        return Tree(self.tag, self.start, end, bytes(source[self.start:end]),
                    self.replaced, tuple(self.children))


def build(records: Sequence[Record], source: bytes) -> Optional[Tree]:
    """Replay ``records`` into a tree (``None`` if no node was created)."""
    # each level is [open node, last node closed inside it]; level 0 is the top
    levels: List[list] = [[None, None]]
    for kind, a, b in records:
        if kind == NEW:
            levels.append([_Node(a), None])
        elif kind == CAPTURE:
            if len(levels) > 1:
                node = levels.pop()[0]
                node.end = a
                levels[-1][1] = node
        elif kind == FOLD:
            level = levels[-1]
            left = level[1]
            if left is None:
                raise FoldWithoutLeft(f'left-folding at offset {a} has no left-hand node')
            level[1] = None
            node = _Node(a)
            node.children.append((b, left.freeze(source)))
            levels.append([node, None])
        else:
            target = levels[-1][0] if len(levels) > 1 else levels[0][1]
            if target is None:
                continue
            if kind == TAG:
                target.tag = a
            elif kind == REPLACE:
                target.replaced = a
            elif kind == LINK:
                target.children.append((a, b))
    if len(levels) > 1:
        return levels[1][0].freeze(source)
    top = levels[0][1]
    return None if top is None else top.freeze(source)


class AstLog:

    def __init__(self, source: bytes = b''):
        self.source = source
        self.records: List[Record] = []
        self._marks: List[Mark] = []
        self._serial = 0

    def __len__(self):
        return len(self.records)

    def __repr__(self):
        return 'AstLog(' + ', '.join(f'{_KIND_NAMES[k]}({a!r}' + (f', {b!r})' if b is not None else ')')
                                     for k, a, b in self.records) + ')'

    # -- operations -------------------------------------------------------

    def new(self, pos: int):
        self.records.append((NEW, pos, None))

    def capture(self, pos: int):
        self.records.append((CAPTURE, pos, None))

    def tag(self, name: str):
        self.records.append((TAG, name, None))

    def replace(self, text: bytes):
        self.records.append((REPLACE, text, None))

    def link(self, label: Optional[str], subtree: Tree):
        self.records.append((LINK, label, subtree))

    def fold(self, pos: int, label: Optional[str] = None):
        self.records.append((FOLD, pos, label))

    # -- transactions -----------------------------------------------------

    def checkpoint(self) -> Mark:
        self._serial += 1
        mark = Mark(len(self._marks), len(self.records), self._serial)
        self._marks.append(mark)
        return mark

    def _pop(self, mark: Mark):
        if not self._marks or self._marks[-1] != mark:
            raise StaleMark(f'mark {mark} is not the innermost open transaction')
        self._marks.pop()

    def rollback(self, mark: Mark):
        self._pop(mark)
        del self.records[mark.length:]

    def release(self, mark: Mark):
        """Close the transaction opened by ``mark``, keeping its records."""
        self._pop(mark)

    def link_since(self, mark: Mark, label: Optional[str] = None):
        """Close ``mark`` and turn the records made since into one child link."""
        self._pop(mark)
        self.link_from(mark.length, label)

    def commit(self) -> Tree:
        tree = build(self.records, self.source)
        if tree is None:
            raise CommitWithoutRoot('no AST node was constructed')
        return tree

    @property
    def open_transactions(self) -> int:
        return len(self._marks)

    # unchecked fast paths for the parsing machine

    def truncate(self, length: int):
        del self.records[length:]

    def link_from(self, length: int, label: Optional[str] = None):
        subtree = build(self.records[length:], self.source)
        del self.records[length:]
        if subtree is not None:
            self.records.append((LINK, label, subtree))

    def segment(self, length: int) -> Tuple[Record, ...]:
        return tuple(self.records[length:])

    def extend(self, records):
        self.records.extend(records)


# -- serialization --------------------------------------------------------

def _quote(value: bytes) -> str:
    text = value.decode('utf-8', 'backslashreplace')
    out = []
    for c in text:
        if c == "'":
            out.append("\\'")
        elif c == '\n':
            out.append('\\n')
        elif c == '\r':
            out.append('\\r')
        elif c == '\t':
            out.append('\\t')
        elif ord(c) < 32 or ord(c) == 127:
            out.append(f'\\x{ord(c):02x}')
        else:
            out.append(c)
    return "'" + ''.join(out) + "'"


def _head(tree: Tree) -> str:
    return '#' + (tree.tag or '')


def to_sexp(tree: Tree, pretty: bool = False) -> str:
    """``#Tag['text']`` for leaves, ``#Tag[child ...]`` otherwise.

    With ``pretty`` nodes are broken over indented lines, except a node whose
    only child is a leaf, which stays on one line.
    """
    if not pretty:
        return _flat(tree)
    lines: List[str] = []
    _pretty(tree, None, 0, lines)
    return '\n'.join(lines)


def _flat(tree: Tree) -> str:
    if not tree.children:
        return f'{_head(tree)}[{_quote(tree.value)}]'
    parts = [(f'{label}: ' if label else '') + _flat(child) for label, child in tree.children]
    return f'{_head(tree)}[{" ".join(parts)}]'


def _pretty(tree, label, depth, lines):
    prefix = '  ' * depth + (f'{label}: ' if label else '')
    only = tree.children[0][1] if len(tree.children) == 1 else None
    if not tree.children or (only is not None and not only.children):
        lines.append(prefix + _flat(tree))
        return
    lines.append(prefix + _head(tree) + '[')
    for child_label, child in tree.children:
        _pretty(child, child_label, depth + 1, lines)
    lines.append('  ' * depth + ']')


def _json_node(tree: Tree, label: Optional[str] = None) -> Dict[str, Any]:
    node: Dict[str, Any] = {}
    if label is not None:
        node['label'] = label
    node['tag'] = tree.tag
    node['span'] = [tree.start, tree.end]
    if not tree.children:
        node['value'] = tree.value.decode('utf-8', 'backslashreplace')
    node['children'] = [_json_node(child, lab) for lab, child in tree.children]
    return node


def to_json(tree: Tree, indent: Optional[int] = None) -> str:
    return json.dumps(_json_node(tree), indent=indent, ensure_ascii=False)
