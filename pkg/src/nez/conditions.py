"""Parsing conditions: the dynamic store used by the interpreter, and the
static elimination that turns ``<if c>`` / ``<on c e>`` into plain
productions.

Elimination gives every production one copy per assignment of the
conditions it actually depends on.  A production that never (transitively)
reaches an ``<if c>`` outside an ``<on c ...>`` keeps its name and a single
copy; the others are named ``A__c`` / ``A__not_c`` (several conditions are
joined with ``__``).  Copies of one production that end up structurally
identical are merged afterwards.  Evaluation starts with every condition
false.
"""

from __future__ import annotations

from typing import Dict, FrozenSet, List, Mapping, Optional, Set, Tuple

from nez.grammar import (
    EMPTY, FAIL, Expression, Grammar, IfCond, Nonterminal, OnCond, SymbolDef,
    Is, Isa, children, map_children, walk,
)

_CALLS = (Nonterminal, SymbolDef, Is, Isa)

Assignment = Mapping[str, bool]


def collect_conditions(g: Grammar) -> Set[str]:
    return {e.name for body in g.productions.values() for e in walk(body)
            if isinstance(e, (IfCond, OnCond))}


def has_conditions(g: Grammar) -> bool:
    return any(isinstance(e, (IfCond, OnCond))
               for body in g.productions.values() for e in walk(body))


class ConditionStore:
    """Boolean condition flags with scoped assignment; everything starts false."""

    def __init__(self):
        self._values: Dict[str, bool] = {}

    def __getitem__(self, name: str) -> bool:
        return self._values.get(name, False)

    def set(self, name: str, value: bool) -> Tuple[str, Optional[bool]]:
        token = (name, self._values.get(name))
        self._values[name] = value
        return token

    def restore(self, token: Tuple[str, Optional[bool]]):
        name, old = token
        if old is None:
            self._values.pop(name, None)
        else:
            self._values[name] = old

    def snapshot(self) -> Dict[str, bool]:
        return dict(self._values)


def dynamic_condition_state() -> ConditionStore:
    return ConditionStore()


def dependencies(g: Grammar) -> Dict[str, FrozenSet[str]]:
    """Conditions whose value can change what each production accepts."""
    deps: Dict[str, FrozenSet[str]] = {name: frozenset() for name in g.productions}
    changed = True
    while changed:
        changed = False
        for name, body in g.productions.items():
            found = _expr_deps(body, deps)
            if found != deps[name]:
                deps[name] = found
                changed = True
    return deps


def _expr_deps(e: Expression, deps) -> FrozenSet[str]:
    if isinstance(e, IfCond):
        return frozenset((e.name,))
    if isinstance(e, OnCond):
        return _expr_deps(e.expr, deps) - {e.name}
    if isinstance(e, _CALLS):
        return deps.get(e.name, frozenset())
    out: FrozenSet[str] = frozenset()
    for child in children(e):
        out |= _expr_deps(child, deps)
    return out


class Eliminator:
    """Carries the naming context for converting one grammar."""

    def __init__(self, g: Grammar, dependent_naming: bool = True, deps=None):
        self.grammar = g
        self.conditions = sorted(collect_conditions(g))
        if deps is not None:
            self.deps = deps
        elif dependent_naming:
            self.deps = dependencies(g)
        else:
            everything = frozenset(self.conditions)
            self.deps = {name: everything for name in g.productions}
        self._names: Dict[Tuple[str, Tuple[Tuple[str, bool], ...]], str] = {}
        self._taken = set(g.productions)

    def key(self, name: str, x: Assignment) -> Tuple[Tuple[str, bool], ...]:
        return tuple((c, bool(x.get(c, False))) for c in sorted(self.deps.get(name, ())))

    def instance_name(self, name: str, x: Assignment) -> str:
        key = self.key(name, x)
        if not key:
            return name
        found = self._names.get((name, key))
        if found is None:
            suffix = '__'.join(c if v else f'not_{c}' for c, v in key)
            found = f'{name}__{suffix}'
            while found in self._taken:
                found += '_'
            self._taken.add(found)
            self._names[(name, key)] = found
        return found

    def convert(self, e: Expression, x: Assignment) -> Expression:
        if isinstance(e, IfCond):
            holds = bool(x.get(e.name, False)) == e.positive
            return EMPTY if holds else FAIL
        if isinstance(e, OnCond):
            inner = dict(x)
            inner[e.name] = e.positive
            return self.convert(e.expr, inner)
        if isinstance(e, _CALLS):
            renamed = self.instance_name(e.name, x)
            if renamed == e.name:
                return e
            return type(e)(renamed)
        return map_children(e, lambda c: self.convert(c, x))

    def eliminate(self) -> Grammar:
        g = self.grammar
        initial = {c: False for c in self.conditions}
        pending = [(g.start, initial)]
        bodies: Dict[str, Expression] = {}
        origin: Dict[str, str] = {}
        while pending:
            name, x = pending.pop()
            inst = self.instance_name(name, x)
            if inst in bodies or name not in g.productions:
                continue
            restricted = dict(self.key(name, x))
            body = self.convert(g.productions[name], restricted)
            bodies[inst] = body
            origin[inst] = name
            for callee, assignment in self._calls(g.productions[name], restricted):
                pending.append((callee, assignment))
        bodies, origin, alias = _unify(bodies, origin)
        order = {name: i for i, name in enumerate(g.productions)}
        start = self.instance_name(g.start, initial)
        start = alias.get(start, start)
        names = sorted(bodies, key=lambda n: (order[origin[n]], n))
        names.remove(start)
        names.insert(0, start)
        return Grammar({n: bodies[n] for n in names}, start)

    def _calls(self, e: Expression, x: Assignment):
        if isinstance(e, OnCond):
            inner = dict(x)
            inner[e.name] = e.positive
            yield from self._calls(e.expr, inner)
            return
        if isinstance(e, (Nonterminal, SymbolDef, Is, Isa)):
            yield e.name, dict(x)
        for child in children(e):
            yield from self._calls(child, x)


def _unify(bodies: Dict[str, Expression], origin: Dict[str, str]):
    """Merge copies of the same production whose bodies became identical.

    Returns the surviving bodies, their origins and an alias map from every
    dropped or renamed instance to its final name.
    """
    alias: Dict[str, str] = {}
    while True:
        rename: Dict[str, str] = {}
        seen: Dict[Tuple[str, Expression], str] = {}
        for inst, body in bodies.items():
            key = (origin[inst], body)
            if key in seen:
                rename[inst] = seen[key]
            else:
                seen[key] = inst
        if not rename:
            break
        alias.update(rename)
        bodies = {n: _rename(b, rename) for n, b in bodies.items() if n not in rename}
    # a production left with a single copy gets its original name back
    copies: Dict[str, List[str]] = {}
    for inst in bodies:
        copies.setdefault(origin[inst], []).append(inst)
    rename = {insts[0]: name for name, insts in copies.items()
              if len(insts) == 1 and insts[0] != name and name not in bodies}
    if rename:
        alias.update(rename)
        bodies = {rename.get(n, n): _rename(b, rename) for n, b in bodies.items()}
    origin = {rename.get(n, n): o for n, o in origin.items()}
    resolved = {}
    for name in alias:
        target = name
        while target in alias:
            target = alias[target]
        resolved[name] = target
    return bodies, origin, resolved


def _rename(e: Expression, rename: Mapping[str, str]) -> Expression:
    if isinstance(e, _CALLS):
        target = rename.get(e.name)
        return e if target is None else type(e)(target)
    return map_children(e, lambda c: _rename(c, rename))


def f_convert(e: Expression, x: Assignment, g: Optional[Grammar] = None) -> Expression:
    """Convert one expression under the assignment ``x``.

    Without a grammar, nonterminals are renamed by every condition in ``x``.
    """
    if g is None:
        names = frozenset(x)
        calls = {n.name for n in walk(e) if isinstance(n, _CALLS)}
        g = Grammar({n: EMPTY for n in sorted(calls) or ['_']}, sorted(calls or ['_'])[0])
        elim = Eliminator(g, deps={n: names for n in g.productions})
    else:
        elim = Eliminator(g)
    return elim.convert(e, x)


def eliminate(g: Grammar, dependent_naming: bool = True) -> Grammar:
    """Return an equivalent grammar without ``<if>`` and ``<on>``."""
    if not has_conditions(g):
        return g
    return Eliminator(g, dependent_naming).eliminate()
