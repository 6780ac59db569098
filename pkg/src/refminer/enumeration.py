"""Candidate subgraph expressions shared by a set of target entities."""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Optional

from refminer.complexity import bits_of_subgraph
from refminer.patterns import SubgraphExpression, Var
from refminer.prominence import ProminenceModel
from refminer.store import TripleStore


@dataclass(frozen=True)
class EnumerationOptions:
    """Language bias and pruning knobs.

    ``language="standard"`` restricts candidates to single bound atoms.
    Multi-atom expressions are not derived through an object that is among
    the ``prominent_cutoff`` most frequent entities; 0 disables that cut.
    """

    language: str = "extended"
    prominent_cutoff: float = 0.05
    exclude_predicates: frozenset[str] = frozenset()
    include_inverses: bool = True

    def __post_init__(self):
        if self.language not in ("standard", "extended"):
            raise ValueError(f"unknown language {self.language!r}")
        if not 0.0 <= self.prominent_cutoff <= 1.0:
            raise ValueError("prominent_cutoff must lie in [0, 1]")
        object.__setattr__(self, "exclude_predicates", frozenset(self.exclude_predicates))


class _Enumerator:
    def __init__(self, store: TripleStore, options: EnumerationOptions):
        self.store = store
        self.options = options
        self.prominent = store.top_entities(options.prominent_cutoff) if options.prominent_cutoff else frozenset()
        excluded = {p.strip("<>") for p in options.exclude_predicates}
        self.allowed = {
            p.id
            for p in store.predicates
            if p.lexical not in excluded and (options.include_inverses or not p.is_inverse)
        }

    def of_entity(self, t: int) -> set[SubgraphExpression]:
        store = self.store
        if not store.has_term(t) or not store.is_entity(t):
            raise KeyError(f"{t} is not an entity of the store")
        atoms = [(p, o) for p, objs in store.outgoing(t).items() if p in self.allowed for o in objs]
        out = {SubgraphExpression.one_atom(p, o) for p, o in atoms if not store.is_blank(o)}
        if self.options.language == "standard":
            return out

        via: dict[int, list[int]] = defaultdict(list)
        for p, o in atoms:
            if o not in self.prominent:
                via[o].append(p)
        for y, p0s in via.items():
            p0s.sort()
            if not store.is_literal(y):
                tail = sorted(
                    (p1, obj)
                    for p1, objs in store.outgoing(y).items()
                    if p1 in self.allowed
                    for obj in objs
                    if not store.is_blank(obj)
                )
                for p0 in p0s:
                    out.update(SubgraphExpression.path(p0, p1, obj) for p1, obj in tail)
                    out.update(SubgraphExpression.path_star(p0, a, b) for a, b in combinations(tail, 2))
            for n in (2, 3):
                out.update(SubgraphExpression.closed(*ps) for ps in combinations(p0s, n))
        return out


def subgraph_expressions_of_entity(
    store: TripleStore,
    t: int,
    options: Optional[EnumerationOptions] = None,
) -> set[SubgraphExpression]:
    """Every admissible subgraph expression that ``t`` satisfies."""
    return _Enumerator(store, options or EnumerationOptions()).of_entity(t)


def common_subgraphs(
    store: TripleStore,
    targets: Iterable[int],
    options: Optional[EnumerationOptions] = None,
) -> set[SubgraphExpression]:
    targets = sorted(set(targets))
    if not targets:
        raise ValueError("targets must be non-empty")
    enum = _Enumerator(store, options or EnumerationOptions())
    common = enum.of_entity(targets[0])
    for t in targets[1:]:
        if not common:
            break
        common &= enum.of_entity(t)
    return common


def render_subgraph(store: TripleStore, rho: SubgraphExpression) -> str:
    parts = []
    for atom in rho.atoms():
        args = [str(a) if isinstance(a, Var) else str(store.term(a)) for a in (atom.subject, atom.object)]
        parts.append(f"{store.predicate(atom.predicate)}({args[0]}, {args[1]})")
    return " & ".join(parts)


@dataclass(frozen=True)
class CandidateQueue:
    """Subgraph expressions in ascending cost, ties by canonical text."""

    items: tuple[SubgraphExpression, ...] = ()
    bits: tuple[float, ...] = ()
    texts: tuple[str, ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i: int) -> tuple[SubgraphExpression, float]:
        return self.items[i], self.bits[i]

    def __iter__(self) -> Iterator[tuple[SubgraphExpression, float]]:
        return zip(self.items, self.bits)


def build_queue(
    model: ProminenceModel,
    candidates: Iterable[SubgraphExpression],
    threads: int = 1,
) -> CandidateQueue:
    store = model.store
    unique = list(set(candidates))
    if threads > 1 and len(unique) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            costs = list(pool.map(lambda rho: bits_of_subgraph(model, rho), unique))
    else:
        costs = [bits_of_subgraph(model, rho) for rho in unique]
    rows = sorted(
        ((bits, render_subgraph(store, rho), rho) for rho, bits in zip(unique, costs)),
        key=lambda row: (row[0], row[1]),
    )
    return CandidateQueue(
        items=tuple(r[2] for r in rows),
        bits=tuple(r[0] for r in rows),
        texts=tuple(r[1] for r in rows),
    )


def top_k_subgraphs(queue: CandidateQueue, k: int) -> list[SubgraphExpression]:
    if k < 0:
        raise ValueError("k must be non-negative")
    return list(queue.items[:k])
