"""Prominence rankings and their bit costs.

A concept's code length is ``log2`` of its 1-based rank among the
candidates allowed by the context that the preceding atoms establish.
Contexts, with the candidate sets they rank:

    GLOBAL_PREDICATE              every predicate
    OBJECT_OF_PREDICATE(p)        objects I of p(x, I)
    JOIN_PREDICATE(p0)            predicates p1 with p0(x, y) & p1(y, z)
    OBJECT_OF_JOIN(p0, p1)        z in p0(x, y) & p1(y, z)
    STAR_PREDICATE(p0, p1)        same candidates as JOIN_PREDICATE(p0)
    OBJECT_OF_STAR(p0, p1, p2)    z2 in p0(x, y) & p1(y, z1) & p2(y, z2)
    CLOSING_PREDICATE(prefix)     q with prefix(x, y) & q(x, y), q not in prefix

Candidates are ordered by how many matching assignments of the context
pattern realize them, then by global prominence, then lexically.  Blank
nodes are never entity candidates.
"""

from __future__ import annotations

import enum
import math
import threading
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from refminer.store import TermKind, TripleStore

_GRID = float(2**32)


def snap_bits(value: float) -> float:
    """Round to a multiple of 2**-32 bits.

    Every code term is snapped, so sums of terms are exact in float64 and
    independent of summation order.
    """
    return round(value * _GRID) / _GRID


class ContextKind(enum.Enum):
    GLOBAL_PREDICATE = "global_predicate"
    OBJECT_OF_PREDICATE = "object_of_predicate"
    JOIN_PREDICATE = "join_predicate"
    OBJECT_OF_JOIN = "object_of_join"
    STAR_PREDICATE = "star_predicate"
    OBJECT_OF_STAR = "object_of_star"
    CLOSING_PREDICATE = "closing_predicate"


_PREDICATE_CONTEXTS = {
    ContextKind.GLOBAL_PREDICATE,
    ContextKind.JOIN_PREDICATE,
    ContextKind.STAR_PREDICATE,
    ContextKind.CLOSING_PREDICATE,
}


@dataclass(frozen=True)
class RankContext:
    kind: ContextKind
    preds: tuple[int, ...] = ()

    @classmethod
    def global_predicate(cls) -> RankContext:
        return cls(ContextKind.GLOBAL_PREDICATE)

    @classmethod
    def object_of(cls, p: int) -> RankContext:
        return cls(ContextKind.OBJECT_OF_PREDICATE, (p,))

    @classmethod
    def join(cls, p0: int) -> RankContext:
        return cls(ContextKind.JOIN_PREDICATE, (p0,))

    @classmethod
    def object_of_join(cls, p0: int, p1: int) -> RankContext:
        return cls(ContextKind.OBJECT_OF_JOIN, (p0, p1))

    @classmethod
    def star(cls, p0: int, p1: int) -> RankContext:
        return cls(ContextKind.STAR_PREDICATE, (p0, p1))

    @classmethod
    def object_of_star(cls, p0: int, p1: int, p2: int) -> RankContext:
        return cls(ContextKind.OBJECT_OF_STAR, (p0, p1, p2))

    @classmethod
    def closing(cls, *prefix: int) -> RankContext:
        return cls(ContextKind.CLOSING_PREDICATE, tuple(prefix))

    @property
    def ranks_predicates(self) -> bool:
        return self.kind in _PREDICATE_CONTEXTS


class RankError(LookupError):
    """The item is not a candidate under the given context."""


class DegenerateFit(ValueError):
    """Too few points, or no spread in frequency, to fit a power law."""


class PagerankError(ValueError):
    def __init__(self, row: int, message: str):
        super().__init__(f"pagerank row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    beta: float
    r_squared: float
    sample_size: int

    def bits(self, frequency: int) -> float:
        return max(0.0, -self.alpha * math.log2(frequency) + self.beta)


def fit_power_law(store: TripleStore, pred: int) -> PowerLawFit:
    """Least-squares fit of ``log2(rank) = -alpha * log2(freq) + beta``.

    One point per distinct non-blank object of ``pred``; ranks are ordinal
    positions by descending frequency (ties broken lexically).
    """
    counts = {o: c for o, c in store.object_counts(pred).items() if not store.is_blank(o)}
    if len(counts) < 2:
        raise DegenerateFit(f"predicate {pred} has {len(counts)} object(s)")
    ordered = sorted(counts, key=lambda o: (-counts[o], store.term(o).lexical))
    freq = np.log2([counts[o] for o in ordered])
    rank = np.log2(np.arange(1, len(ordered) + 1))
    if np.ptp(freq) == 0:
        raise DegenerateFit(f"predicate {pred} has uniform object frequencies")
    slope, intercept = np.polyfit(freq, rank, 1)
    residual = rank - (slope * freq + intercept)
    ss_tot = float(np.sum((rank - rank.mean()) ** 2))
    r2 = 1.0 - float(np.sum(residual**2)) / ss_tot
    return PowerLawFit(
        alpha=float(-slope),
        beta=float(intercept),
        r_squared=min(1.0, max(0.0, r2)),
        sample_size=len(ordered),
    )


class ProminenceModel:
    """Global and conditional prominence rankings over one store.

    ``metric`` is ``"fr"`` (fact frequency) or ``"pr"`` (pagerank, with
    frequency as fallback).  Predicates are always ranked by frequency.
    ``mode`` is ``"exact"`` or ``"fitted"``; in fitted mode the object
    term of a single atom is estimated from the per-predicate power law.

    Conditional rankings are computed on first use and memoized.
    """

    def __init__(
        self,
        store: TripleStore,
        metric: str = "fr",
        mode: str = "exact",
        pagerank: Optional[dict[str, float]] = None,
    ):
        if metric not in ("fr", "pr"):
            raise ValueError(f"unknown metric {metric!r}")
        if mode not in ("exact", "fitted"):
            raise ValueError(f"unknown mode {mode!r}")
        self.store = store
        self.metric = metric
        self.mode = mode
        self.pagerank = dict(pagerank) if pagerank is not None else None
        self.entity_score = store.occurrence_counts()
        preds = sorted(store.used_predicates(), key=self._predicate_key)
        self.predicate_rank = {p: i for i, p in enumerate(preds, start=1)}
        self.power_law: dict[int, PowerLawFit] = {}
        if mode == "fitted":
            for p in preds:
                try:
                    self.power_law[p] = fit_power_law(store, p)
                except DegenerateFit:
                    pass
        self._rankings: dict[RankContext, dict[int, int]] = {}
        self._lock = threading.Lock()

    # global prominence --------------------------------------------------

    def _predicate_key(self, p: int):
        return (-self.store.fact_count(p), self.store.predicate(p).lexical)

    def _entity_key(self, t: int):
        lexical = self.store.term(t).lexical
        fr = self.entity_score.get(t, 0)
        if self.metric == "pr" and self.pagerank is not None:
            score = self.pagerank.get(lexical) if self.store.is_entity(t) else None
            if score is not None:
                return (0, -score, lexical)
            return (1, -fr, lexical)
        return (-fr, lexical)

    # conditional rankings -----------------------------------------------

    def ranking(self, ctx: RankContext) -> dict[int, int]:
        """``candidate -> 1-based rank`` under ``ctx``."""
        cached = self._rankings.get(ctx)
        if cached is not None:
            return cached
        with self._lock:
            cached = self._rankings.get(ctx)
            if cached is None:
                cached = self._rankings[ctx] = self._build_ranking(ctx)
            return cached

    def _build_ranking(self, ctx: RankContext) -> dict[int, int]:
        if ctx.kind is ContextKind.GLOBAL_PREDICATE:
            return dict(self.predicate_rank)
        counts = _candidate_counts(self.store, ctx)
        if ctx.ranks_predicates:
            key = lambda p: (-counts[p], *self._predicate_key(p))
        elif self.metric == "pr" and self.pagerank is not None:
            def key(t):
                k = self._entity_key(t)
                return k if k[0] == 0 else (1, -counts[t], *k[1:])
        else:
            key = lambda t: (-counts[t], *self._entity_key(t))
        ordered = sorted(counts, key=key)
        return {c: i for i, c in enumerate(ordered, start=1)}

    def rank(self, item: int, ctx: RankContext) -> int:
        try:
            return self.ranking(ctx)[item]
        except KeyError:
            raise RankError(f"{item} is not a candidate under {ctx}") from None

    def rank_bits(self, item: int, ctx: RankContext) -> float:
        """Estimated code length of ``item`` under ``ctx``, in bits."""
        if self.mode == "fitted" and ctx.kind is ContextKind.OBJECT_OF_PREDICATE:
            fit = self.power_law.get(ctx.preds[0])
            if fit is not None:
                freq = self.store.object_counts(ctx.preds[0]).get(item)
                if freq is None or self.store.is_blank(item):
                    raise RankError(f"{item} is not a candidate under {ctx}")
                return snap_bits(fit.bits(freq))
        return snap_bits(math.log2(self.rank(item, ctx)))


def _candidate_counts(store: TripleStore, ctx: RankContext) -> dict[int, int]:
    """Number of context-pattern matches realizing each candidate."""
    kind, preds = ctx.kind, ctx.preds
    counts: dict[int, int] = defaultdict(int)
    if kind is ContextKind.OBJECT_OF_PREDICATE:
        return {o: c for o, c in store.object_counts(preds[0]).items() if not store.is_blank(o)}
    if kind in (ContextKind.JOIN_PREDICATE, ContextKind.STAR_PREDICATE):
        for y, xs in store.by_object(preds[0]).items():
            for p1, objs in store.outgoing(y).items():
                counts[p1] += len(xs) * len(objs)
    elif kind is ContextKind.OBJECT_OF_JOIN:
        p0, p1 = preds
        for y, xs in store.by_object(p0).items():
            for z in store.objects(y, p1):
                counts[z] += len(xs)
    elif kind is ContextKind.OBJECT_OF_STAR:
        p0, p1, p2 = preds
        for y, xs in store.by_object(p0).items():
            w = len(xs) * len(store.objects(y, p1))
            if w:
                for z in store.objects(y, p2):
                    counts[z] += w
    elif kind is ContextKind.CLOSING_PREDICATE:
        first, *rest = preds
        for y, xs in store.by_object(first).items():
            for x in xs:
                if any(y not in store.objects(x, p) for p in rest):
                    continue
                for q, objs in store.outgoing(x).items():
                    if q not in preds and y in objs:
                        counts[q] += 1
    else:
        raise ValueError(f"unsupported context {ctx}")
    if not ctx.ranks_predicates:
        return {t: c for t, c in counts.items() if not store.is_blank(t)}
    return dict(counts)


def conditional_entity_rank(model: ProminenceModel, item: int, ctx: RankContext) -> int:
    if ctx.ranks_predicates:
        raise ValueError(f"{ctx.kind.value} ranks predicates, not entities")
    return model.rank(item, ctx)


def conditional_predicate_rank(model: ProminenceModel, pred: int, ctx: RankContext) -> int:
    if not ctx.ranks_predicates:
        raise ValueError(f"{ctx.kind.value} ranks entities, not predicates")
    return model.rank(pred, ctx)


def estimated_rank_bits(model: ProminenceModel, item: int, ctx: RankContext) -> float:
    return model.rank_bits(item, ctx)


def build_frequency_model(store: TripleStore, metric: str = "fr", mode: str = "exact") -> ProminenceModel:
    return ProminenceModel(store, metric=metric, mode=mode)


def read_pagerank_rows(lines: Iterable[str]) -> list[tuple[str, float]]:
    """Parse ``<iri>\\t<score>`` lines; blank lines and ``#`` comments skip."""
    rows = []
    for n, line in enumerate(lines, start=1):
        row = _parse_line(n, line)
        if row is not None:
            rows.append(row)
    return rows


def _parse_line(n: int, line: str) -> Optional[tuple[str, float]]:
    text = line.strip()
    if not text or text.startswith("#"):
        return None
    parts = text.split("\t")
    if len(parts) != 2:
        raise PagerankError(n, f"expected 2 tab-separated fields, got {len(parts)}")
    return parts[0], _parse_score(n, parts[1])


def load_pagerank(
    model: ProminenceModel,
    rows: Iterable[Union[str, tuple[str, float]]],
) -> ProminenceModel:
    """Return a copy of ``model`` with pagerank scores attached.

    ``rows`` holds ``(iri, score)`` pairs or raw TSV lines.  IRIs unknown
    to the store are kept but never ranked.
    """
    scores: dict[str, float] = {}
    for n, row in enumerate(rows, start=1):
        if isinstance(row, str):
            parsed = _parse_line(n, row)
            if parsed is None:
                continue
            iri, score = parsed
        else:
            try:
                iri, raw = row
            except (TypeError, ValueError):
                raise PagerankError(n, f"expected (iri, score), got {row!r}") from None
            score = _parse_score(n, raw)
        iri = iri.strip()
        if iri.startswith("<") and iri.endswith(">"):
            iri = iri[1:-1]
        scores[iri] = score
    return ProminenceModel(model.store, metric=model.metric, mode=model.mode, pagerank=scores)


def _parse_score(row: int, raw) -> float:
    try:
        score = float(raw)
    except (TypeError, ValueError):
        raise PagerankError(row, f"unparseable score {raw!r}") from None
    if not math.isfinite(score) or score < 0:
        raise PagerankError(row, f"score must be finite and non-negative, got {raw!r}")
    return score
