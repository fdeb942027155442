"""Classical states: the tree-shaped values indexing semi-classical tables.

A classical state is empty, a single assignment ``[x<-a]``, a concatenation
of states with disjoint domains, or a formal superposition of states.
Concatenations are kept right-associated with the empty state elided, so
``eps . s == s . eps == s`` holds structurally.  Superpositions never flatten
across nesting levels; distinct alternations keep distinct tags.

Each state has a deterministic string label ("eps", "x<-a", "(s1.s2)",
"(s1(+)s2)") used to key operator tables and to print results.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable

from .errors import DomainClashError, SemanticsError

__all__ = ["ClassicalState", "Empty", "Assign", "Concat", "Superpose",
           "EPS", "assign", "concat", "superpose", "dom", "eval_at", "label"]


class ClassicalState:
    """Base class; construct through the module-level helpers."""

    __slots__ = ()

    def __repr__(self):
        return f"<state {label(self)}>"


@dataclass(frozen=True, repr=False)
class Empty(ClassicalState):
    __slots__ = ()


@dataclass(frozen=True, repr=False)
class Assign(ClassicalState):
    var: str
    value: object

    __slots__ = ("var", "value")


@dataclass(frozen=True, repr=False)
class Concat(ClassicalState):
    left: ClassicalState
    right: ClassicalState

    __slots__ = ("left", "right")


@dataclass(frozen=True, repr=False)
class Superpose(ClassicalState):
    children: tuple

    __slots__ = ("children",)


EPS = Empty()


def assign(var: str, value) -> ClassicalState:
    return Assign(var, value)


def dom(s: ClassicalState) -> frozenset:
    if isinstance(s, Empty):
        return frozenset()
    if isinstance(s, Assign):
        return frozenset((s.var,))
    if isinstance(s, Concat):
        return dom(s.left) | dom(s.right)
    if isinstance(s, Superpose):
        return reduce(frozenset.union, (dom(c) for c in s.children), frozenset())
    raise TypeError(f"not a classical state: {s!r}")


def concat(a: ClassicalState, b: ClassicalState) -> ClassicalState:
    """Merge two states with disjoint domains; ``EPS`` is a two-sided unit."""
    overlap = dom(a) & dom(b)
    if overlap:
        raise DomainClashError(f"domains overlap on {sorted(overlap)}")
    if isinstance(a, Empty):
        return b
    if isinstance(b, Empty):
        return a
    if isinstance(a, Concat):
        return Concat(a.left, concat(a.right, b))
    return Concat(a, b)


def superpose(states: Iterable[ClassicalState]) -> ClassicalState:
    children = tuple(states)
    if not children:
        raise SemanticsError("superposition of an empty state list")
    return Superpose(children)


_UNDEFINED = object()


def eval_at(s: ClassicalState, x: str):
    """Assignment lookup; returns ``None`` when ``x`` is not in the domain.

    Only defined on superposition-free states: a superposed state does not
    assign a single value to anything.
    """
    v = _eval(s, x)
    return None if v is _UNDEFINED else v


def _eval(s: ClassicalState, x: str):
    if isinstance(s, Empty):
        return _UNDEFINED
    if isinstance(s, Assign):
        return s.value if s.var == x else _UNDEFINED
    if isinstance(s, Concat):
        v = _eval(s.left, x)
        return v if v is not _UNDEFINED else _eval(s.right, x)
    if isinstance(s, Superpose):
        raise SemanticsError("value lookup on a superposed classical state")
    raise TypeError(f"not a classical state: {s!r}")


def label(s: ClassicalState) -> str:
    if isinstance(s, Empty):
        return "eps"
    if isinstance(s, Assign):
        return f"{s.var}<-{s.value}"
    if isinstance(s, Concat):
        return f"({label(s.left)}.{label(s.right)})"
    if isinstance(s, Superpose):
        return "(" + "(+)".join(label(c) for c in s.children) + ")"
    raise TypeError(f"not a classical state: {s!r}")
