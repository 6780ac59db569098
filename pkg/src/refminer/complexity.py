"""Estimated description length, in bits, of subgraph expressions.

Each predicate and each bound object costs ``log2`` of its rank under the
context set up by the atoms before it (chain rule).  The constant cost of
the decoder is left out; values are only ever compared with each other.
"""

from __future__ import annotations

from typing import Iterable

from refminer.patterns import Shape, SubgraphExpression
from refminer.prominence import ProminenceModel, RankContext, RankError


def code_terms(rho: SubgraphExpression) -> list[tuple[int, RankContext]]:
    """The ``(item, context)`` pairs whose code lengths make up ``rho``'s cost."""
    k = rho.key
    shape = rho.shape
    g = RankContext.global_predicate()
    if shape is Shape.ONE_ATOM:
        p0, i0 = k
        return [(p0, g), (i0, RankContext.object_of(p0))]
    if shape is Shape.PATH:
        p0, p1, i1 = k
        return [
            (p0, g),
            (p1, RankContext.join(p0)),
            (i1, RankContext.object_of_join(p0, p1)),
        ]
    if shape is Shape.PATH_STAR:
        p0, p1, i1, p2, i2 = k
        return [
            (p0, g),
            (p1, RankContext.join(p0)),
            (i1, RankContext.object_of_join(p0, p1)),
            (p2, RankContext.star(p0, p1)),
            (i2, RankContext.object_of_star(p0, p1, p2)),
        ]
    terms = [(k[0], g)]
    for n in range(1, len(k)):
        terms.append((k[n], RankContext.closing(*k[:n])))
    return terms


def bits_of_subgraph(model: ProminenceModel, rho: SubgraphExpression) -> float:
    """Cost of one subgraph expression.

    Raises :class:`~refminer.prominence.RankError` when ``rho`` has no
    match in the model's store.
    """
    if not model.store.bindings_of_subgraph(rho):
        raise RankError(f"{rho} has no match in the store")
    return sum(model.rank_bits(item, ctx) for item, ctx in code_terms(rho))


def bits_of_expression(model: ProminenceModel, expr: Iterable[SubgraphExpression]) -> float:
    # repeated predicates across components are charged again each time
    return sum(bits_of_subgraph(model, rho) for rho in expr)
