"""Dictionary-encoded in-memory triple store.

Terms and predicates are interned to dense integer ids at load time.  The
store keeps three indexes over the encoded triples::

    spo: subject   -> predicate -> objects
    pos: predicate -> object    -> subjects
    poc: predicate -> object    -> fact count

and is immutable once built.  Query results (atom matches and subgraph
bindings) go through a per-store LRU cache, which is safe to share between
threads.
"""

from __future__ import annotations

import enum
import functools
import io
import math
import re
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Union

from refminer.patterns import Atom, Expression, Shape, SubgraphExpression, Var

__all__ = [
    "Atom",
    "INVERSE_SUFFIX",
    "NTriplesError",
    "Predicate",
    "Term",
    "TermKind",
    "TripleStore",
    "Var",
    "materialize_inverses",
    "parse_ntriples",
]

# '^' cannot occur in an N-Triples IRIREF, so synthetic names never collide.
INVERSE_SUFFIX = "^-1"

DEFAULT_CACHE_CAPACITY = 100_000


class TermKind(enum.Enum):
    ENTITY = "entity"
    LITERAL = "literal"
    BLANK = "blank"


@dataclass(frozen=True)
class Term:
    kind: TermKind
    id: int
    lexical: str

    def __str__(self) -> str:
        if self.kind is TermKind.ENTITY:
            return f"<{self.lexical}>"
        if self.kind is TermKind.BLANK:
            return f"_:{self.lexical}"
        return self.lexical


@dataclass(frozen=True)
class Predicate:
    id: int
    lexical: str
    inverse_of: Optional[int] = None

    @property
    def is_inverse(self) -> bool:
        return self.lexical.endswith(INVERSE_SUFFIX)

    def __str__(self) -> str:
        return f"<{self.lexical}>"


class NTriplesError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


_IRI = r"<([^<>\"{}|^`\\\x00-\x20]*)>"
_BNODE = r"_:([A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?)"
_LITERAL = r"(\"(?:[^\"\\\n\r]|\\.)*\"(?:@[a-zA-Z]+(?:-[a-zA-Z0-9]+)*|\^\^<[^<>\"{}|^`\\\x00-\x20]*>)?)"
_LINE = re.compile(
    rf"^\s*(?:{_IRI}|{_BNODE})\s*{_IRI}\s*(?:{_IRI}|{_BNODE}|{_LITERAL})\s*\.\s*(?:#.*)?$"
)


class TripleStore:
    """Immutable, indexed set of encoded triples.

    Build one with :func:`parse_ntriples` (or :meth:`from_triples` for
    in-code fixtures) rather than calling the constructor directly.
    """

    def __init__(
        self,
        terms: list[Term],
        predicates: list[Predicate],
        triples: Iterable[tuple[int, int, int]],
        cache_capacity: int = DEFAULT_CACHE_CAPACITY,
    ):
        self._terms = list(terms)
        self._predicates = list(predicates)
        self._term_ids = {(t.kind, t.lexical): t.id for t in self._terms}
        self._pred_ids = {p.lexical: p.id for p in self._predicates}
        self._kinds = [t.kind for t in self._terms]

        triple_set = frozenset(triples)
        spo: dict[int, dict[int, set[int]]] = defaultdict(lambda: defaultdict(set))
        pos: dict[int, dict[int, set[int]]] = defaultdict(lambda: defaultdict(set))
        for s, p, o in triple_set:
            spo[s][p].add(o)
            pos[p][o].add(s)
        self._triples = triple_set
        self._spo = {s: {p: frozenset(os) for p, os in d.items()} for s, d in spo.items()}
        self._pos = {p: {o: frozenset(ss) for o, ss in d.items()} for p, d in pos.items()}
        self._poc = {p: {o: len(ss) for o, ss in d.items()} for p, d in self._pos.items()}
        self._fact_counts = {p: sum(d.values()) for p, d in self._poc.items()}

        self.cache_capacity = cache_capacity
        self._query = functools.lru_cache(maxsize=cache_capacity)(self._run_query)

    @classmethod
    def from_triples(
        cls,
        triples: Iterable[tuple[str, str, str]],
        cache_capacity: int = DEFAULT_CACHE_CAPACITY,
    ) -> TripleStore:
        """Build from ``(subject, predicate, object)`` strings.

        Objects starting with ``"`` are literals, ``_:`` marks blank nodes and
        anything else is an entity IRI (angle brackets optional).
        """
        d = _Dictionary()
        encoded = []
        for s, p, o in triples:
            encoded.append((d.term(*_classify(s)), d.predicate(_strip_iri(p)), d.term(*_classify(o))))
        return cls(d.terms, d.predicates, encoded, cache_capacity)

    # dictionary ----------------------------------------------------------

    @property
    def terms(self) -> list[Term]:
        return list(self._terms)

    @property
    def predicates(self) -> list[Predicate]:
        return list(self._predicates)

    def term(self, term_id: int) -> Term:
        return self._terms[term_id]

    def has_term(self, term_id: int) -> bool:
        return 0 <= term_id < len(self._terms)

    def predicate(self, pred_id: int) -> Predicate:
        return self._predicates[pred_id]

    def kind(self, term_id: int) -> TermKind:
        return self._kinds[term_id]

    def is_blank(self, term_id: int) -> bool:
        return self._kinds[term_id] is TermKind.BLANK

    def is_literal(self, term_id: int) -> bool:
        return self._kinds[term_id] is TermKind.LITERAL

    def is_entity(self, term_id: int) -> bool:
        return self._kinds[term_id] is TermKind.ENTITY

    def lookup(self, lexical: str, kind: TermKind = TermKind.ENTITY) -> int:
        """Return the id of a term; raises ``KeyError`` if absent."""
        if kind is TermKind.ENTITY:
            lexical = _strip_iri(lexical)
        return self._term_ids[(kind, lexical)]

    def predicate_id(self, lexical: str) -> int:
        return self._pred_ids[_strip_iri(lexical)]

    def entity_ids(self) -> list[int]:
        return [t.id for t in self._terms if t.kind is TermKind.ENTITY]

    # raw access ----------------------------------------------------------

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[tuple[int, int, int]]:
        return iter(sorted(self._triples))

    def __contains__(self, triple: object) -> bool:
        return triple in self._triples

    def outgoing(self, subject: int) -> dict[int, frozenset[int]]:
        """``predicate -> objects`` for one subject (empty if none)."""
        return self._spo.get(subject, {})

    def objects(self, subject: int, pred: int) -> frozenset[int]:
        return self._spo.get(subject, {}).get(pred, frozenset())

    def subjects(self, pred: int, obj: int) -> frozenset[int]:
        return self._pos.get(pred, {}).get(obj, frozenset())

    def by_object(self, pred: int) -> dict[int, frozenset[int]]:
        """``object -> subjects`` for one predicate."""
        return self._pos.get(pred, {})

    def object_counts(self, pred: int) -> dict[int, int]:
        """``object -> number of facts pred(s, object)``."""
        return self._poc.get(pred, {})

    def fact_count(self, pred: int) -> int:
        return self._fact_counts.get(pred, 0)

    def used_predicates(self) -> list[int]:
        return sorted(self._pos)

    def occurrence_counts(self) -> dict[int, int]:
        """Number of facts each term occurs in, as subject or object."""
        counts: dict[int, int] = defaultdict(int)
        for s, _, o in self._triples:
            counts[s] += 1
            if o != s:
                counts[o] += 1
        return dict(counts)

    def top_entities(self, fraction: float) -> frozenset[int]:
        """The ``fraction`` most frequent entity IRIs (floor of the count).

        Ranking is by fact occurrences, descending, then IRI ascending.
        Literals and blank nodes are never selected.
        """
        if not 0.0 <= fraction <= 1.0:
            raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
        counts = self.occurrence_counts()
        entities = [t for t in counts if self._kinds[t] is TermKind.ENTITY]
        n = math.floor(fraction * len(entities) + 1e-9)
        if n == 0:
            return frozenset()
        entities.sort(key=lambda t: (-counts[t], self._terms[t].lexical))
        return frozenset(entities[:n])

    # evaluation ----------------------------------------------------------

    def match_atom(self, atom: Atom) -> list[dict[str, Term]]:
        """All assignments that turn ``atom`` into a fact of the store."""
        if not atom.variables():
            raise ValueError("atom has no variables")
        return [
            {name: self._terms[v] for name, v in row}
            for row in self._query("atom", atom)
        ]

    def bindings_of_subgraph(self, rho: SubgraphExpression) -> frozenset[int]:
        """Ids that the root variable takes over all matches of ``rho``."""
        return self._query("subgraph", rho)

    def bindings_of_expression(self, expr: Union[Expression, Iterable[SubgraphExpression]]) -> frozenset[int]:
        components = list(expr)
        if not components:
            raise ValueError("empty expression has no defined bindings")
        # components share only x, so the conjunction is an intersection
        result = self.bindings_of_subgraph(components[0])
        for rho in components[1:]:
            if not result:
                break
            result = result & self.bindings_of_subgraph(rho)
        return result

    def is_referring_expression(self, expr, targets: Iterable[int]) -> bool:
        targets = frozenset(targets)
        if not targets:
            raise ValueError("targets must be non-empty")
        return self.bindings_of_expression(expr) == targets

    def cache_info(self):
        return self._query.cache_info()

    def _run_query(self, op: str, payload):
        if op == "atom":
            return self._eval_atom(payload)
        return self._eval_subgraph(payload)

    def _eval_atom(self, atom: Atom) -> frozenset[tuple[tuple[str, int], ...]]:
        s, o = atom.subject, atom.object
        rows = set()
        for subj, objs in self._candidate_pairs(atom.predicate, s, o):
            for obj in objs:
                row = {}
                if isinstance(s, Var):
                    row[s.name] = subj
                if isinstance(o, Var):
                    if o.name in row and row[o.name] != obj:
                        continue
                    row[o.name] = obj
                rows.add(tuple(sorted(row.items())))
        return frozenset(rows)

    def _candidate_pairs(self, pred, s, o):
        if not isinstance(s, Var):
            objs = self.objects(s, pred)
            if not isinstance(o, Var):
                objs = objs & {o}
            return [(s, objs)] if objs else []
        if not isinstance(o, Var):
            return [(subj, (o,)) for subj in self.subjects(pred, o)]
        return [(subj, (obj,)) for obj, subjs in self.by_object(pred).items() for subj in subjs]

    def _eval_subgraph(self, rho: SubgraphExpression) -> frozenset[int]:
        k = rho.key
        if rho.shape is Shape.ONE_ATOM:
            return self.subjects(k[0], k[1])
        if rho.shape is Shape.PATH:
            p0, p1, obj = k
            out = set()
            for y in self.subjects(p1, obj):
                out |= self.subjects(p0, y)
            return frozenset(out)
        if rho.shape is Shape.PATH_STAR:
            p0, p1, o1, p2, o2 = k
            out = set()
            for y in self.subjects(p1, o1) & self.subjects(p2, o2):
                out |= self.subjects(p0, y)
            return frozenset(out)
        first, *rest = k
        out = set()
        for y, xs in self.by_object(first).items():
            for x in xs:
                if all(y in self.objects(x, p) for p in rest):
                    out.add(x)
        return frozenset(out)


def parse_ntriples(
    source: Union[str, Iterable[str], io.TextIOBase],
    cache_capacity: int = DEFAULT_CACHE_CAPACITY,
) -> TripleStore:
    """Parse N-Triples text (or an iterable of lines) into a store.

    Blank lines and ``#`` comments are skipped; duplicate triples collapse.
    Raises :class:`NTriplesError` carrying the 1-based line number of the
    first malformed line.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    d = _Dictionary()
    encoded = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _LINE.match(stripped)
        if m is None:
            raise NTriplesError(lineno, f"malformed triple: {stripped[:80]!r}")
        s_iri, s_blank, pred, o_iri, o_blank, o_lit = m.groups()
        s = d.term(TermKind.ENTITY, s_iri) if s_iri is not None else d.term(TermKind.BLANK, s_blank)
        if o_iri is not None:
            o = d.term(TermKind.ENTITY, o_iri)
        elif o_blank is not None:
            o = d.term(TermKind.BLANK, o_blank)
        else:
            o = d.term(TermKind.LITERAL, o_lit)
        encoded.append((s, d.predicate(pred), o))
    return TripleStore(d.terms, d.predicates, encoded, cache_capacity)


def materialize_inverses(store: TripleStore, top_fraction: float) -> TripleStore:
    """Add ``p^-1(o, s)`` for every ``p(s, o)`` whose object is a top entity.

    Only original predicates are inverted, and only when the object is an
    entity IRI among the ``top_fraction`` most frequent ones.  Inverse
    predicates get the synthetic name ``iri + INVERSE_SUFFIX`` and are linked
    to their source via ``inverse_of`` in both directions.
    """
    top = store.top_entities(top_fraction)
    if not top:
        return store
    predicates = store.predicates
    by_lexical = {p.lexical: p.id for p in predicates}
    inverse_facts = []
    for s, p, o in store:
        pred = predicates[p]
        if o not in top or pred.is_inverse:
            continue
        inv_name = pred.lexical + INVERSE_SUFFIX
        inv = by_lexical.get(inv_name)
        if inv is None:
            inv = len(predicates)
            predicates.append(Predicate(inv, inv_name, inverse_of=p))
            predicates[p] = Predicate(p, pred.lexical, inverse_of=inv)
            by_lexical[inv_name] = inv
        inverse_facts.append((o, inv, s))
    if not inverse_facts:
        return store
    return TripleStore(store.terms, predicates, list(store) + inverse_facts, store.cache_capacity)


class _Dictionary:
    def __init__(self):
        self.terms: list[Term] = []
        self.predicates: list[Predicate] = []
        self._term_ids: dict[tuple[TermKind, str], int] = {}
        self._pred_ids: dict[str, int] = {}

    def term(self, kind: TermKind, lexical: str) -> int:
        key = (kind, lexical)
        tid = self._term_ids.get(key)
        if tid is None:
            tid = self._term_ids[key] = len(self.terms)
            self.terms.append(Term(kind, tid, lexical))
        return tid

    def predicate(self, lexical: str) -> int:
        pid = self._pred_ids.get(lexical)
        if pid is None:
            pid = self._pred_ids[lexical] = len(self.predicates)
            self.predicates.append(Predicate(pid, lexical))
        return pid


def _strip_iri(text: str) -> str:
    if text.startswith("<") and text.endswith(">"):
        return text[1:-1]
    return text


def _classify(text: str) -> tuple[TermKind, str]:
    if text.startswith('"'):
        return TermKind.LITERAL, text
    if text.startswith("_:"):
        return TermKind.BLANK, text[2:]
    return TermKind.ENTITY, _strip_iri(text)
