"""Atoms, subgraph expressions and expressions.

Everything here is plain data over dictionary ids; evaluation lives in
:mod:`refminer.store` and costing in :mod:`refminer.complexity`.

The five subgraph shapes, all rooted at ``x`` with at most one extra
variable ``y``::

    ONE_ATOM    p0(x, I0)
    PATH        p0(x, y) & p1(y, I1)
    PATH_STAR   p0(x, y) & p1(y, I1) & p2(y, I2)
    CLOSED2     p0(x, y) & p1(x, y)
    CLOSED3     p0(x, y) & p1(x, y) & p2(x, y)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return "?" + self.name


X = Var("x")
Y = Var("y")

Arg = Union[Var, int]


@dataclass(frozen=True)
class Atom:
    """``predicate(subject, object)``; each argument is a :class:`Var` or a term id."""

    predicate: int
    subject: Arg
    object: Arg

    def variables(self) -> list[Var]:
        return [a for a in (self.subject, self.object) if isinstance(a, Var)]


class Shape(enum.Enum):
    ONE_ATOM = "one_atom"
    PATH = "path"
    PATH_STAR = "path_star"
    CLOSED2 = "closed2"
    CLOSED3 = "closed3"

    def __lt__(self, other: Shape) -> bool:
        if not isinstance(other, Shape):
            return NotImplemented
        return _SHAPE_ORDER[self] < _SHAPE_ORDER[other]


_SHAPE_ORDER = {shape: n for n, shape in enumerate(Shape)}

_ARITY = {
    Shape.ONE_ATOM: 2,
    Shape.PATH: 3,
    Shape.PATH_STAR: 5,
    Shape.CLOSED2: 2,
    Shape.CLOSED3: 3,
}


@dataclass(frozen=True, order=True)
class SubgraphExpression:
    """A subgraph expression in canonical form.

    ``key`` packs predicate and object ids in shape order:

    * ONE_ATOM  ``(p0, I0)``
    * PATH      ``(p0, p1, I1)``
    * PATH_STAR ``(p0, p1, I1, p2, I2)`` with ``(p1, I1) < (p2, I2)``
    * CLOSED2   ``(p0, p1)`` with ``p0 < p1``
    * CLOSED3   ``(p0, p1, p2)`` with ``p0 < p1 < p2``

    Use the constructors below rather than building keys by hand; they
    canonicalize, so structurally equal expressions compare equal.
    """

    shape: Shape
    key: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.key) != _ARITY[self.shape]:
            raise ValueError(f"{self.shape.value} needs {_ARITY[self.shape]} ids, got {self.key}")
        k = self.key
        if self.shape is Shape.PATH_STAR and not (k[1], k[2]) < (k[3], k[4]):
            raise ValueError("path-star atoms must be distinct and sorted")
        if self.shape is Shape.CLOSED2 and not k[0] < k[1]:
            raise ValueError("closed predicates must be distinct and sorted")
        if self.shape is Shape.CLOSED3 and not k[0] < k[1] < k[2]:
            raise ValueError("closed predicates must be distinct and sorted")

    @classmethod
    def one_atom(cls, p0: int, obj: int) -> SubgraphExpression:
        return cls(Shape.ONE_ATOM, (p0, obj))

    @classmethod
    def path(cls, p0: int, p1: int, obj: int) -> SubgraphExpression:
        return cls(Shape.PATH, (p0, p1, obj))

    @classmethod
    def path_star(cls, p0: int, a: tuple[int, int], b: tuple[int, int]) -> SubgraphExpression:
        if a == b:
            raise ValueError("path-star atoms must be distinct")
        lo, hi = sorted((a, b))
        return cls(Shape.PATH_STAR, (p0, *lo, *hi))

    @classmethod
    def closed(cls, *preds: int) -> SubgraphExpression:
        ps = tuple(sorted(preds))
        if len(set(ps)) != len(ps):
            raise ValueError("closed predicates must be distinct")
        if len(ps) == 2:
            return cls(Shape.CLOSED2, ps)
        if len(ps) == 3:
            return cls(Shape.CLOSED3, ps)
        raise ValueError("closed shapes take 2 or 3 predicates")

    @property
    def predicates(self) -> tuple[int, ...]:
        k = self.key
        if self.shape is Shape.ONE_ATOM:
            return (k[0],)
        if self.shape is Shape.PATH:
            return (k[0], k[1])
        if self.shape is Shape.PATH_STAR:
            return (k[0], k[1], k[3])
        return k

    @property
    def bound_objects(self) -> tuple[int, ...]:
        k = self.key
        if self.shape is Shape.ONE_ATOM:
            return (k[1],)
        if self.shape is Shape.PATH:
            return (k[2],)
        if self.shape is Shape.PATH_STAR:
            return (k[2], k[4])
        return ()

    def atoms(self) -> list[Atom]:
        k = self.key
        if self.shape is Shape.ONE_ATOM:
            return [Atom(k[0], X, k[1])]
        if self.shape is Shape.PATH:
            return [Atom(k[0], X, Y), Atom(k[1], Y, k[2])]
        if self.shape is Shape.PATH_STAR:
            return [Atom(k[0], X, Y), Atom(k[1], Y, k[2]), Atom(k[3], Y, k[4])]
        return [Atom(p, X, Y) for p in k]

    def __len__(self) -> int:
        return {Shape.ONE_ATOM: 1, Shape.PATH: 2, Shape.PATH_STAR: 3,
                Shape.CLOSED2: 2, Shape.CLOSED3: 3}[self.shape]


@dataclass(frozen=True)
class Expression:
    """Conjunction of subgraph expressions that share only the root ``x``.

    ``indexes`` records the queue positions the components came from, when
    the expression was produced by a search; it is empty otherwise.
    """

    components: tuple[SubgraphExpression, ...]
    indexes: tuple[int, ...] = ()

    @classmethod
    def of(cls, components: Iterable[SubgraphExpression], indexes: Sequence[int] = ()) -> Expression:
        return cls(tuple(components), tuple(indexes))

    def __iter__(self) -> Iterator[SubgraphExpression]:
        return iter(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __and__(self, other: Expression) -> Expression:
        indexes = self.indexes + other.indexes
        # positions only make sense if both sides have them, in queue order
        keep = self.indexes and other.indexes and all(a < b for a, b in zip(indexes, indexes[1:]))
        return Expression(self.components + other.components, indexes if keep else ())
