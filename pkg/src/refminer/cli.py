"""Command-line front end.

    refminer --kb kb.nt --targets http://ex/Guyana,http://ex/Suriname
    refminer --kb kb.nt --targets @targets.txt --threads 4 --timeout 60
    refminer --kb kb.nt --targets http://ex/Paris --summarize 5 --language standard

Exactly one JSON document goes to stdout; diagnostics go to stderr.

Exit codes: 0 success (including ``no_re``), 1 input error, 2 unresolvable
target, 3 timeout without any result.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from refminer.complexity import bits_of_subgraph
from refminer.enumeration import (
    EnumerationOptions,
    build_queue,
    render_subgraph,
    subgraph_expressions_of_entity,
    top_k_subgraphs,
)
from refminer.patterns import Expression, Shape, SubgraphExpression, Var
from refminer.prominence import PagerankError, ProminenceModel, load_pagerank
from refminer.search import TIMEOUT, describe
from refminer.store import (
    DEFAULT_CACHE_CAPACITY,
    NTriplesError,
    TermKind,
    TripleStore,
    materialize_inverses,
    parse_ntriples,
)

log = logging.getLogger("refminer")

EXIT_OK, EXIT_INPUT, EXIT_RESOLUTION, EXIT_TIMEOUT = 0, 1, 2, 3

_ARG_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "role": {"enum": ["root", "existential"]},
                "var": {"type": "string"},
            },
            "required": ["role", "var"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "role": {"const": "constant"},
                "kind": {"enum": ["entity", "literal"]},
                "value": {"type": "string"},
            },
            "required": ["role", "kind", "value"],
            "additionalProperties": False,
        },
    ]
}

SUBGRAPH_SCHEMA = {
    "type": "object",
    "properties": {
        "shape": {"enum": [s.value for s in Shape]},
        "bits": {"type": "number", "minimum": 0},
        "text": {"type": "string"},
        "atoms": {
            "type": "array",
            "minItems": 1,
            "maxItems": 3,
            "items": {
                "type": "object",
                "properties": {
                    "predicate": {"type": "string"},
                    "subject": _ARG_SCHEMA,
                    "object": _ARG_SCHEMA,
                },
                "required": ["predicate", "subject", "object"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["shape", "bits", "atoms"],
}

_STATS_SCHEMA = {
    "type": "object",
    "properties": {
        name: {"type": "number", "minimum": 0}
        for name in (
            "nodes_visited", "re_tests", "prunes_by_depth", "side_prunes",
            "bound_prunes", "lookahead_prunes", "queue_size", "wall_time",
        )
    },
    "required": ["nodes_visited", "re_tests", "queue_size", "wall_time"],
}

DESCRIBE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "status": {"enum": ["found", "no_re", "timeout"]},
        "targets": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "expression": {"oneOf": [{"type": "null"}, {"type": "array", "items": SUBGRAPH_SCHEMA}]},
        "complexity_bits": {"oneOf": [{"type": "null"}, {"type": "number", "minimum": 0}]},
        "stats": _STATS_SCHEMA,
        "config": {"type": "object"},
    },
    "required": ["status", "targets", "expression", "complexity_bits", "stats", "config"],
}

SUMMARIZE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "status": {"const": "ok"},
        "target": {"type": "string"},
        "k": {"type": "integer", "minimum": 0},
        "subgraphs": {"type": "array", "items": SUBGRAPH_SCHEMA},
        "config": {"type": "object"},
    },
    "required": ["status", "target", "k", "subgraphs", "config"],
}


@dataclass
class RunConfig:
    kb_path: str
    pagerank_path: Optional[str] = None
    metric: str = "fr"
    mode: str = "exact"
    language: str = "extended"
    threads: int = 1
    timeout_seconds: Optional[float] = None
    inverse_top_fraction: float = 0.01
    prominent_cutoff_fraction: float = 0.05
    cache_capacity: int = DEFAULT_CACHE_CAPACITY
    exclude_predicates: list[str] = field(default_factory=list)
    no_inverse: bool = False
    top_k: Optional[int] = None

    def __post_init__(self):
        for name in ("inverse_top_fraction", "prominent_cutoff_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.timeout_seconds is not None and self.timeout_seconds < 0:
            raise ValueError("timeout must be non-negative")
        if self.top_k is not None and self.top_k < 0:
            raise ValueError("--summarize needs a non-negative K")

    def options(self) -> EnumerationOptions:
        return EnumerationOptions(
            language=self.language,
            prominent_cutoff=self.prominent_cutoff_fraction,
            exclude_predicates=frozenset(self.exclude_predicates),
            include_inverses=not self.no_inverse,
        )


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code = code
        self.kind = kind


def load_kb(config: RunConfig) -> tuple[TripleStore, ProminenceModel]:
    try:
        with open(config.kb_path, encoding="utf-8") as fh:
            store = parse_ntriples(fh, cache_capacity=config.cache_capacity)
    except OSError as exc:
        raise CliError(EXIT_INPUT, "input", f"cannot read KB: {exc}") from exc
    except (NTriplesError, UnicodeDecodeError) as exc:
        raise CliError(EXIT_INPUT, "parse", str(exc)) from exc
    log.info("loaded %d triples, %d terms", len(store), len(store.terms))
    if not config.no_inverse and config.inverse_top_fraction > 0:
        store = materialize_inverses(store, config.inverse_top_fraction)
        log.info("%d triples after inverse materialization", len(store))
    model = ProminenceModel(store, metric=config.metric, mode=config.mode)
    if config.pagerank_path:
        try:
            with open(config.pagerank_path, encoding="utf-8") as fh:
                model = load_pagerank(model, fh)
        except OSError as exc:
            raise CliError(EXIT_INPUT, "input", f"cannot read pagerank file: {exc}") from exc
        except PagerankError as exc:
            raise CliError(EXIT_INPUT, "parse", str(exc)) from exc
    return store, model


def parse_targets(arg: str) -> list[str]:
    """Inline comma-separated IRIs, or ``@path`` to a file with one per line."""
    if arg.startswith("@"):
        try:
            raw = Path(arg[1:]).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise CliError(EXIT_INPUT, "input", f"cannot read targets file: {exc}") from exc
    else:
        raw = arg.split(",")
    iris = []
    for item in raw:
        item = item.strip()
        if not item or item.startswith("#"):
            continue
        if item.startswith("<") and item.endswith(">"):
            item = item[1:-1]
        if item not in iris:
            iris.append(item)
    return iris


def resolve_targets(store: TripleStore, iris: Sequence[str]) -> list[int]:
    if not iris:
        raise CliError(EXIT_INPUT, "input", "no targets given")
    ids = []
    for iri in iris:
        try:
            ids.append(store.lookup(iri, TermKind.ENTITY))
        except KeyError:
            raise CliError(EXIT_RESOLUTION, "resolution", f"unknown entity: {iri}") from None
    return ids


def _arg_doc(store: TripleStore, arg) -> dict:
    if isinstance(arg, Var):
        return {"role": "root" if arg.name == "x" else "existential", "var": arg.name}
    term = store.term(arg)
    return {"role": "constant", "kind": term.kind.value, "value": term.lexical}


def subgraph_doc(store: TripleStore, rho: SubgraphExpression, bits: float) -> dict:
    return {
        "shape": rho.shape.value,
        "bits": bits,
        "text": render_subgraph(store, rho),
        "atoms": [
            {
                "predicate": store.predicate(a.predicate).lexical,
                "subject": _arg_doc(store, a.subject),
                "object": _arg_doc(store, a.object),
            }
            for a in rho.atoms()
        ],
    }


def subgraph_from_doc(store: TripleStore, doc: dict) -> SubgraphExpression:
    """Inverse of :func:`subgraph_doc`; raises ``KeyError`` on unknown names."""
    shape = Shape(doc["shape"])
    preds, objs = [], []
    for atom in doc["atoms"]:
        preds.append(store.predicate_id(atom["predicate"]))
        obj = atom["object"]
        if obj["role"] == "constant":
            objs.append(store.lookup(obj["value"], TermKind(obj["kind"])))
    if shape is Shape.ONE_ATOM:
        return SubgraphExpression.one_atom(preds[0], objs[0])
    if shape is Shape.PATH:
        return SubgraphExpression.path(preds[0], preds[1], objs[0])
    if shape is Shape.PATH_STAR:
        return SubgraphExpression.path_star(preds[0], (preds[1], objs[0]), (preds[2], objs[1]))
    return SubgraphExpression.closed(*preds)


def expression_from_doc(store: TripleStore, docs: list[dict]) -> Expression:
    return Expression.of(subgraph_from_doc(store, d) for d in docs)


def _config_doc(config: RunConfig) -> dict:
    return asdict(config)


def cmd_describe(config: RunConfig, target_iris: Sequence[str]) -> tuple[dict, int]:
    store, model = load_kb(config)
    targets = resolve_targets(store, target_iris)
    outcome, queue = describe(
        store,
        model,
        targets,
        config.options(),
        threads=config.threads,
        timeout=config.timeout_seconds,
    )
    expr = outcome.expression
    doc = {
        "status": outcome.status,
        "targets": list(target_iris),
        "expression": None,
        "complexity_bits": None,
        "stats": outcome.stats.as_dict(),
        "config": _config_doc(config),
    }
    if expr is not None:
        doc["expression"] = [subgraph_doc(store, rho, queue.bits[i]) for rho, i in zip(expr, expr.indexes)]
        doc["complexity_bits"] = outcome.bits
    code = EXIT_TIMEOUT if outcome.status == TIMEOUT and expr is None else EXIT_OK
    return doc, code


def cmd_summarize(config: RunConfig, target_iri: str, k: int) -> tuple[dict, int]:
    store, model = load_kb(config)
    (target,) = resolve_targets(store, [target_iri])
    queue = build_queue(
        model,
        subgraph_expressions_of_entity(store, target, config.options()),
        threads=config.threads,
    )
    chosen = top_k_subgraphs(queue, k)
    doc = {
        "status": "ok",
        "target": target_iri,
        "k": k,
        "subgraphs": [subgraph_doc(store, rho, bits_of_subgraph(model, rho)) for rho in chosen],
        "config": _config_doc(config),
    }
    return doc, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="refminer",
        description="Find the least complex referring expression for a set of entities.",
    )
    ap.add_argument("--kb", required=True, help="N-Triples file")
    ap.add_argument("--targets", required=True, help="comma-separated IRIs, or @FILE with one per line")
    ap.add_argument("--metric", choices=["fr", "pr"], default="fr")
    ap.add_argument("--pagerank", help="TSV of <iri>\\t<score>")
    ap.add_argument("--mode", choices=["exact", "fitted"], default="exact")
    ap.add_argument("--language", choices=["standard", "extended"], default="extended")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--timeout", type=float, default=None, help="seconds")
    ap.add_argument("--inverse-top", type=float, default=0.01,
                    help="materialize inverse facts for this fraction of most frequent objects")
    ap.add_argument("--prominent-cutoff", type=float, default=0.05,
                    help="do not extend atoms whose object is in this top fraction")
    ap.add_argument("--cache", type=int, default=DEFAULT_CACHE_CAPACITY, help="query cache entries")
    ap.add_argument("--exclude-predicate", action="append", default=[], metavar="IRI")
    ap.add_argument("--no-inverse", action="store_true", help="leave out inverse predicates")
    ap.add_argument("--summarize", type=int, metavar="K", help="list the K cheapest subgraph expressions")
    ap.add_argument("--stats", action="store_true", help="log search statistics to stderr")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def run(argv: Optional[Sequence[str]] = None) -> tuple[dict, int]:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig(
            kb_path=args.kb,
            pagerank_path=args.pagerank,
            metric=args.metric,
            mode=args.mode,
            language=args.language,
            threads=args.threads,
            timeout_seconds=args.timeout,
            inverse_top_fraction=args.inverse_top,
            prominent_cutoff_fraction=args.prominent_cutoff,
            cache_capacity=args.cache,
            exclude_predicates=list(args.exclude_predicate),
            no_inverse=args.no_inverse,
            top_k=args.summarize,
        )
    except ValueError as exc:
        return _error_doc("input", str(exc)), EXIT_INPUT
    try:
        iris = parse_targets(args.targets)
        if config.top_k is not None:
            if len(iris) != 1:
                raise CliError(EXIT_INPUT, "input", "--summarize takes exactly one target")
            doc, code = cmd_summarize(config, iris[0], config.top_k)
        else:
            doc, code = cmd_describe(config, iris)
    except CliError as exc:
        log.error("%s", exc)
        return _error_doc(exc.kind, str(exc)), exc.code
    if args.stats and "stats" in doc:
        for name, value in doc["stats"].items():
            log.warning("%s: %s", name, value)
    return doc, code


def _error_doc(kind: str, message: str) -> dict:
    return {"status": "error", "error": {"kind": kind, "message": message}}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = sys.argv[1:] if argv is None else list(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if {"-v", "--verbose"} & set(args) else logging.WARNING)
    log.propagate = False
    try:
        doc, code = run(args)
    finally:
        log.removeHandler(handler)
    json.dump(doc, sys.stdout, indent=2, ensure_ascii=False)
    sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
