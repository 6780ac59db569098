"""Mine minimal-complexity referring expressions over RDF knowledge bases."""

from refminer.store import (
    Atom,
    NTriplesError,
    Predicate,
    Term,
    TermKind,
    TripleStore,
    Var,
    materialize_inverses,
    parse_ntriples,
)
from refminer.patterns import Expression, Shape, SubgraphExpression
from refminer.prominence import (
    DegenerateFit,
    PowerLawFit,
    ProminenceModel,
    RankContext,
    build_frequency_model,
    fit_power_law,
    load_pagerank,
)
from refminer.complexity import bits_of_expression, bits_of_subgraph
from refminer.enumeration import (
    CandidateQueue,
    EnumerationOptions,
    build_queue,
    common_subgraphs,
    subgraph_expressions_of_entity,
    top_k_subgraphs,
)
from refminer.search import (
    SearchOutcome,
    SearchStats,
    find_min_re,
    find_min_re_parallel,
    oracle_min_re,
)

__all__ = [
    "Atom",
    "CandidateQueue",
    "DegenerateFit",
    "EnumerationOptions",
    "Expression",
    "NTriplesError",
    "PowerLawFit",
    "Predicate",
    "ProminenceModel",
    "RankContext",
    "SearchOutcome",
    "SearchStats",
    "Shape",
    "SubgraphExpression",
    "Term",
    "TermKind",
    "TripleStore",
    "Var",
    "bits_of_expression",
    "bits_of_subgraph",
    "build_frequency_model",
    "build_queue",
    "common_subgraphs",
    "find_min_re",
    "find_min_re_parallel",
    "fit_power_law",
    "load_pagerank",
    "materialize_inverses",
    "oracle_min_re",
    "parse_ntriples",
    "subgraph_expressions_of_entity",
    "top_k_subgraphs",
]
