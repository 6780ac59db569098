"""Depth-first search for the cheapest referring expression.

The search space is the tree of strictly increasing index sequences into a
:class:`~refminer.enumeration.CandidateQueue`; a node's children append a
larger index.  Because every candidate is satisfied by all targets, adding
a component can only shrink the binding set, and because the queue is
sorted by cost, both of these hold:

* once a node is a referring expression, its descendants and its later
  siblings cost at least as much (pruning by depth, side pruning);
* if a node together with every later candidate is not a referring
  expression, neither is anything in its subtree or its later siblings'
  subtrees (lookahead).

Ties on cost are broken by pre-order position, so sequential search,
parallel search and the brute-force oracle return the same expression.
"""

from __future__ import annotations

import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Callable, Iterable, Optional

from refminer.enumeration import (
    CandidateQueue,
    EnumerationOptions,
    build_queue,
    common_subgraphs,
)
from refminer.patterns import Expression
from refminer.prominence import ProminenceModel
from refminer.store import TripleStore

FOUND = "found"
NO_RE = "no_re"
TIMEOUT = "timeout"


@dataclass
class SearchStats:
    nodes_visited: int = 0
    re_tests: int = 0
    prunes_by_depth: int = 0
    side_prunes: int = 0
    bound_prunes: int = 0
    lookahead_prunes: int = 0
    queue_size: int = 0
    wall_time: float = 0.0

    def absorb(self, other: SearchStats) -> None:
        for f in fields(self):
            if f.name not in ("queue_size", "wall_time"):
                setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class SearchOutcome:
    status: str
    expression: Optional[Expression]
    bits: float
    stats: SearchStats

    @property
    def found(self) -> bool:
        return self.status == FOUND


class _Incumbent:
    """Best solution so far, as one ``(bits, indexes)`` tuple.

    Readers take the tuple without locking; writers swap it under a lock
    and only for a strictly better key.
    """

    def __init__(self):
        self.best: tuple[float, tuple[int, ...]] = (math.inf, ())
        self._lock = threading.Lock()

    def offer(self, bits: float, indexes: tuple[int, ...]) -> bool:
        with self._lock:
            if (bits, indexes) < self.best:
                self.best = (bits, indexes)
                return True
            return False


class _Cancel:
    """Smallest root index whose subtree proved that no RE exists."""

    def __init__(self):
        self.index = math.inf
        self._lock = threading.Lock()

    def signal(self, root: int) -> None:
        with self._lock:
            self.index = min(self.index, root)


class _Problem:
    def __init__(self, store: TripleStore, queue: CandidateQueue, targets: Iterable[int]):
        self.targets = frozenset(targets)
        if not self.targets:
            raise ValueError("targets must be non-empty")
        for t in self.targets:
            if not store.has_term(t) or not store.is_entity(t):
                raise ValueError(f"target {t} is not an entity of the store")
        self.queue = queue
        self.n = len(queue)
        self.bits = queue.bits
        self.bindings = [store.bindings_of_subgraph(rho) for rho in queue.items]
        for rho, b in zip(queue.items, self.bindings):
            if not self.targets <= b:
                raise ValueError(f"candidate {rho} is not satisfied by every target")
        # suffix[k] = bindings of the conjunction of candidates k..n-1
        self.suffix: list[Optional[frozenset[int]]] = [None] * (self.n + 1)
        acc = None
        for k in range(self.n - 1, -1, -1):
            acc = self.bindings[k] if acc is None else acc & self.bindings[k]
            self.suffix[k] = acc

    def expression(self, indexes: tuple[int, ...]) -> Expression:
        return Expression.of((self.queue.items[i] for i in indexes), indexes)


_DONE, _TIMED_OUT, _CANCELLED = "done", "timed_out", "cancelled"


def _explore(
    prob: _Problem,
    root: int,
    incumbent: _Incumbent,
    stats: SearchStats,
    *,
    bound: bool,
    lookahead: bool,
    deadline: Optional[float],
    cancelled: Callable[[], bool] = lambda: False,
) -> tuple[str, bool]:
    """Explore sequences that start with ``root``.

    Returns the exit status and whether the subtree provably holds no RE.
    """
    n, bits, bindings, targets = prob.n, prob.bits, prob.bindings, prob.targets
    stack = [root]
    cost = [bits[root]]
    inter = [bindings[root]]
    saw_re = False
    unsure = False

    def advance() -> None:
        # next node in pre-order that is not a descendant of the top
        while stack:
            if len(stack) == 1:
                stack.pop()
                return
            j = stack.pop()
            cost.pop()
            inter.pop()
            if j + 1 < n:
                stack.append(j + 1)
                cost.append(cost[-1] + bits[j + 1])
                inter.append(inter[-1] & bindings[j + 1])
                return

    def skip_siblings() -> None:
        if len(stack) == 1:
            stack.pop()
            return
        stack.pop()
        cost.pop()
        inter.pop()
        advance()

    while stack:
        if deadline is not None and time.monotonic() >= deadline:
            return _TIMED_OUT, False
        if cancelled():
            return _CANCELLED, False
        stats.nodes_visited += 1
        j = stack[-1]
        here = inter[-1]

        if bound and (cost[-1], tuple(stack)) >= incumbent.best:
            stats.bound_prunes += 1
            unsure = True
            skip_siblings()
            continue
        if lookahead:
            widest = here if j + 1 >= n else here & prob.suffix[j + 1]
            if widest != targets:
                stats.lookahead_prunes += 1
                skip_siblings()
                continue

        stats.re_tests += 1
        if here == targets:
            saw_re = True
            incumbent.offer(cost[-1], tuple(stack))
            if j + 1 < n:
                stats.prunes_by_depth += 1
                if len(stack) > 1:
                    stats.side_prunes += 1
            skip_siblings()
        elif j + 1 < n:
            stack.append(j + 1)
            cost.append(cost[-1] + bits[j + 1])
            inter.append(here & bindings[j + 1])
        else:
            advance()
    return _DONE, not saw_re and not unsure


def _outcome(prob: _Problem, incumbent: _Incumbent, stats: SearchStats, timed_out: bool) -> SearchOutcome:
    bits, indexes = incumbent.best
    expr = prob.expression(indexes) if indexes else None
    if timed_out:
        status = TIMEOUT
    else:
        status = FOUND if expr is not None else NO_RE
    return SearchOutcome(status, expr, bits, stats)


def min_re_from_root(
    store: TripleStore,
    queue: CandidateQueue,
    root: int,
    targets: Iterable[int],
    best: float = math.inf,
    *,
    bound_pruning: bool = True,
    lookahead: bool = True,
) -> Optional[Expression]:
    """Cheapest RE among sequences starting at queue index ``root``.

    Only solutions cheaper than ``best`` are reported.
    """
    prob = _Problem(store, queue, targets)
    incumbent = _Incumbent()
    incumbent.best = (best, ())
    _explore(prob, root, incumbent, SearchStats(), bound=bound_pruning, lookahead=lookahead, deadline=None)
    _, indexes = incumbent.best
    return prob.expression(indexes) if indexes else None


def find_min_re(
    store: TripleStore,
    queue: CandidateQueue,
    targets: Iterable[int],
    *,
    bound_pruning: bool = True,
    lookahead: bool = True,
    timeout: Optional[float] = None,
) -> SearchOutcome:
    """Sequential search over every root of the queue, cheapest first.

    With ``bound_pruning`` and ``lookahead`` both off, the traversal only
    uses pruning by depth and side pruning.
    """
    start = time.monotonic()
    deadline = None if timeout is None else start + timeout
    prob = _Problem(store, queue, targets)
    stats = SearchStats(queue_size=prob.n)
    incumbent = _Incumbent()
    timed_out = deadline is not None and time.monotonic() >= deadline
    for i in range(0 if timed_out else prob.n):
        if bound_pruning and (prob.bits[i], (i,)) >= incumbent.best:
            stats.bound_prunes += 1
            break
        status, hopeless = _explore(
            prob, i, incumbent, stats, bound=bound_pruning, lookahead=lookahead, deadline=deadline
        )
        if status == _TIMED_OUT:
            timed_out = True
            break
        if hopeless:
            # later roots only see subsets of this subtree's widest node
            break
    stats.wall_time = time.monotonic() - start
    return _outcome(prob, incumbent, stats, timed_out)


def find_min_re_parallel(
    store: TripleStore,
    queue: CandidateQueue,
    targets: Iterable[int],
    threads: int = 2,
    *,
    bound_pruning: bool = True,
    lookahead: bool = True,
    timeout: Optional[float] = None,
) -> SearchOutcome:
    """Parallel search: worker threads pull roots from the queue.

    Workers share the incumbent and a cancellation mark.  A worker whose
    root ``i`` proves hopeless marks ``i``; roots after ``i`` stop, roots
    before it run to completion.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    start = time.monotonic()
    deadline = None if timeout is None else start + timeout
    prob = _Problem(store, queue, targets)
    incumbent = _Incumbent()
    cancel = _Cancel()
    timed_out = threading.Event()
    roots = iter(range(prob.n))
    roots_lock = threading.Lock()

    def worker() -> SearchStats:
        local = SearchStats()
        while not timed_out.is_set():
            with roots_lock:
                i = next(roots, None)
            if i is None or cancel.index < i:
                break
            if bound_pruning and (prob.bits[i], (i,)) >= incumbent.best:
                local.bound_prunes += 1
                break
            status, hopeless = _explore(
                prob, i, incumbent, local,
                bound=bound_pruning, lookahead=lookahead, deadline=deadline,
                cancelled=lambda i=i: cancel.index < i,
            )
            if status == _TIMED_OUT:
                timed_out.set()
                break
            if status == _CANCELLED:
                break
            if hopeless:
                cancel.signal(i)
                break
        return local

    stats = SearchStats(queue_size=prob.n)
    if deadline is not None and time.monotonic() >= deadline:
        timed_out.set()
    elif prob.n:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for local in [pool.submit(worker) for _ in range(threads)]:
                stats.absorb(local.result())
    stats.wall_time = time.monotonic() - start
    return _outcome(prob, incumbent, stats, timed_out.is_set())


def oracle_min_re(
    store: TripleStore,
    queue: CandidateQueue,
    targets: Iterable[int],
    max_components: Optional[int] = None,
) -> Optional[Expression]:
    """Brute force: test every index sequence up to ``max_components`` long.

    Sequences are visited in pre-order and the first one reaching the
    minimum cost wins.  Exponential in the queue length.
    """
    targets = frozenset(targets)
    n = len(queue)
    limit = n if max_components is None else max_components
    best_bits = math.inf
    best: Optional[tuple[int, ...]] = None

    def visit(prefix: tuple[int, ...], start: int) -> None:
        nonlocal best_bits, best
        for j in range(start, n):
            seq = prefix + (j,)
            if store.is_referring_expression((queue.items[k] for k in seq), targets):
                cost = sum(queue.bits[k] for k in seq)
                if cost < best_bits:
                    best_bits, best = cost, seq
            if len(seq) < limit:
                visit(seq, j + 1)

    visit((), 0)
    if best is None:
        return None
    return Expression.of((queue.items[k] for k in best), best)


def oracle_node_count(n: int, max_components: Optional[int] = None) -> int:
    """Number of sequences :func:`oracle_min_re` enumerates."""
    limit = n if max_components is None else min(n, max_components)
    return sum(math.comb(n, k) for k in range(1, limit + 1))


def describe(
    store: TripleStore,
    model: ProminenceModel,
    targets: Iterable[int],
    options: Optional[EnumerationOptions] = None,
    *,
    threads: int = 1,
    timeout: Optional[float] = None,
    bound_pruning: bool = True,
    lookahead: bool = True,
) -> tuple[SearchOutcome, CandidateQueue]:
    """Enumerate shared candidates, cost them, and search for the cheapest RE."""
    targets = frozenset(targets)
    start = time.monotonic()
    queue = build_queue(model, common_subgraphs(store, targets, options), threads=threads)
    remaining = None if timeout is None else max(0.0, timeout - (time.monotonic() - start))
    kwargs = dict(bound_pruning=bound_pruning, lookahead=lookahead, timeout=remaining)
    if threads > 1:
        outcome = find_min_re_parallel(store, queue, targets, threads, **kwargs)
    else:
        outcome = find_min_re(store, queue, targets, **kwargs)
    return outcome, queue
