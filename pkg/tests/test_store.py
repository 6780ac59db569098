import pytest

from oracles import naive_bindings
from refminer import (
    Atom,
    Expression,
    NTriplesError,
    SubgraphExpression,
    TermKind,
    TripleStore,
    Var,
    materialize_inverses,
    parse_ntriples,
)
from refminer.patterns import X, Y
from refminer.store import INVERSE_SUFFIX


def ids(store, *names):
    return frozenset(store.lookup(n) for n in names)


def one(store, p, o):
    return SubgraphExpression.one_atom(store.predicate_id(p), store.lookup(o))


def lang_path(store, family="Germanic"):
    return SubgraphExpression.path(
        store.predicate_id("officialLang"), store.predicate_id("langFamily"), store.lookup(family)
    )


class TestParse:
    def test_empty_input(self):
        assert len(parse_ntriples("")) == 0

    def test_single_fact(self):
        store = parse_ntriples("<a> <p> <b> .")
        assert len(store) == 1
        assert [t.kind for t in store.terms] == [TermKind.ENTITY, TermKind.ENTITY]
        assert len(store.predicates) == 1

    def test_malformed_line_number(self):
        with pytest.raises(NTriplesError) as err:
            parse_ntriples("<a> <p>")
        assert err.value.line == 1

    def test_error_reports_later_line(self):
        text = "# header\n<a> <p> <b> .\n\n<a> <p> \"x\n"
        with pytest.raises(NTriplesError) as err:
            parse_ntriples(text)
        assert err.value.line == 4

    def test_duplicates_collapse(self):
        store = parse_ntriples("<a> <p> <b> .\n<a> <p> <b> .\n")
        assert len(store) == 1

    def test_literals_and_blanks(self):
        text = "\n".join(
            [
                '<a> <name> "Anna"@en .',
                '<a> <age> "41"^^<http://www.w3.org/2001/XMLSchema#integer> .',
                '<a> <quote> "say \\"hi\\"" .',
                "_:n1 <p> <a> .",
                "<a> <q> _:n1 . # trailing comment",
            ]
        )
        store = parse_ntriples(text)
        assert len(store) == 5
        kinds = {t.lexical: t.kind for t in store.terms}
        assert kinds['"Anna"@en'] is TermKind.LITERAL
        assert kinds['"41"^^<http://www.w3.org/2001/XMLSchema#integer>'] is TermKind.LITERAL
        assert kinds["n1"] is TermKind.BLANK
        assert kinds["a"] is TermKind.ENTITY

    def test_accepts_line_iterables(self):
        store = parse_ntriples(iter(["<a> <p> <b> .", "<b> <p> <c> ."]))
        assert len(store) == 2

    def test_literal_subject_rejected(self):
        with pytest.raises(NTriplesError):
            parse_ntriples('"x" <p> <b> .')


class TestInverses:
    def test_zero_fraction_leaves_store(self):
        store = TripleStore.from_triples([("a", "p", "b")])
        assert materialize_inverses(store, 0.0) is store

    def test_dominant_object_gains_inverses(self):
        facts = [(f"s{i}", "p", "E") for i in range(99)] + [("a", "q", "b")]
        store = TripleStore.from_triples(facts)
        assert store.top_entities(0.01) == ids(store, "E")
        out = materialize_inverses(store, 0.01)
        inv = out.predicate_id("p" + INVERSE_SUFFIX)
        e = out.lookup("E")
        assert out.objects(e, inv) == frozenset(out.lookup(f"s{i}") for i in range(99))
        assert len(out) == 100 + 99
        assert out.predicate(inv).inverse_of == out.predicate_id("p")
        assert out.predicate(out.predicate_id("p")).inverse_of == inv
        # the source store is untouched
        assert len(store) == 100
        assert store.predicate(store.predicate_id("p")).inverse_of is None

    def test_literals_never_inverted(self):
        store = TripleStore.from_triples([("a", "p", '"x"'), ("b", "p", '"x"')])
        assert materialize_inverses(store, 1.0) is store

    def test_inverse_predicates_not_inverted_again(self):
        store = TripleStore.from_triples([("a", "p", "b")])
        once = materialize_inverses(store, 1.0)
        twice = materialize_inverses(once, 1.0)
        assert {p.lexical for p in twice.predicates} == {"p", "p" + INVERSE_SUFFIX}
        assert len(twice) == len(once) == 2


class TestMatchAtom:
    def test_bound_object(self):
        store = TripleStore.from_triples([("a", "p", "b"), ("c", "p", "b"), ("a", "p", "d")])
        rows = store.match_atom(Atom(store.predicate_id("p"), X, store.lookup("b")))
        assert sorted(r["x"].lexical for r in rows) == ["a", "c"]

    def test_empty_store(self):
        store = TripleStore.from_triples([])
        assert store.match_atom(Atom(0, X, Y)) == []

    def test_unknown_predicate_is_empty(self):
        store = TripleStore.from_triples([("a", "p", "b")])
        assert store.match_atom(Atom(42, X, Y)) == []

    def test_ground_atom_rejected(self):
        store = TripleStore.from_triples([("a", "p", "b")])
        with pytest.raises(ValueError):
            store.match_atom(Atom(0, store.lookup("a"), store.lookup("b")))

    def test_repeated_variable(self):
        store = TripleStore.from_triples([("a", "p", "a"), ("a", "p", "b")])
        rows = store.match_atom(Atom(0, X, X))
        assert [r["x"].lexical for r in rows] == ["a"]

    def test_results_go_through_cache(self):
        store = TripleStore.from_triples([("a", "p", "b")])
        atom = Atom(0, X, Y)
        store.match_atom(atom)
        store.match_atom(atom)
        assert store.cache_info().hits == 1


class TestBindings:
    def test_in_south_america(self, geo_store):
        got = geo_store.bindings_of_subgraph(one(geo_store, "in", "SA"))
        assert got == ids(geo_store, "Guyana", "Suriname", "Brazil")

    def test_germanic_language_path(self, geo_store):
        got = geo_store.bindings_of_subgraph(lang_path(geo_store))
        assert got == ids(geo_store, "Guyana", "Suriname", "Germany")

    def test_empty_store(self):
        store = TripleStore.from_triples([])
        assert store.bindings_of_subgraph(SubgraphExpression.one_atom(0, 0)) == frozenset()
        assert store.bindings_of_subgraph(SubgraphExpression.closed(0, 1)) == frozenset()

    def test_geo_expression(self, geo_store):
        e = Expression.of([one(geo_store, "in", "SA"), lang_path(geo_store)])
        assert geo_store.bindings_of_expression(e) == ids(geo_store, "Guyana", "Suriname")

    def test_singleton_expression(self, geo_store):
        rho = one(geo_store, "in", "SA")
        assert geo_store.bindings_of_expression([rho]) == geo_store.bindings_of_subgraph(rho)

    def test_contradictory_components(self):
        store = TripleStore.from_triples([("a", "p", "x"), ("b", "q", "y")])
        e = [one(store, "p", "x"), one(store, "q", "y")]
        assert store.bindings_of_expression(e) == frozenset()

    def test_empty_expression_rejected(self, geo_store):
        with pytest.raises(ValueError):
            geo_store.bindings_of_expression([])

    def test_shapes_agree_with_naive_join(self, mayor_store):
        from conftest import MAYORS

        s = mayor_store
        p = s.predicate_id
        cases = {
            SubgraphExpression.path(p("mayor"), p("party"), s.lookup("Socialist")): [
                ("mayor", "?x", "?y"), ("party", "?y", "Socialist")
            ],
            SubgraphExpression.path_star(
                p("party"), (p("member"), s.lookup("Senate")), (p("party"), s.lookup("Socialist"))
            ): None,
            SubgraphExpression.closed(p("party"), p("member")): [("party", "?x", "?y"), ("member", "?x", "?y")],
        }
        for rho, atoms in cases.items():
            if atoms is None:
                atoms = [(s.predicate(a.predicate).lexical, _name(s, a.subject), _name(s, a.object)) for a in rho.atoms()]
            expected = naive_bindings(MAYORS, atoms)
            assert {s.term(t).lexical for t in s.bindings_of_subgraph(rho)} == expected


def _name(store, arg):
    return str(arg) if isinstance(arg, Var) else store.term(arg).lexical


class TestReferringExpression:
    def test_geo_expression_refers(self, geo_store):
        e = [one(geo_store, "in", "SA"), lang_path(geo_store)]
        assert geo_store.is_referring_expression(e, ids(geo_store, "Guyana", "Suriname"))

    def test_brazil_also_binds(self, geo_store):
        e = [one(geo_store, "in", "SA")]
        assert not geo_store.is_referring_expression(e, ids(geo_store, "Guyana", "Suriname"))

    def test_all_bindings_refer(self, geo_store):
        rho = one(geo_store, "in", "Europe")
        assert geo_store.is_referring_expression([rho], geo_store.bindings_of_subgraph(rho))

    def test_empty_targets_rejected(self, geo_store):
        with pytest.raises(ValueError):
            geo_store.is_referring_expression([one(geo_store, "in", "SA")], [])


class TestFrequencies:
    def test_occurrence_counts(self):
        store = TripleStore.from_triples([("a", "p", "b"), ("a", "p", "c"), ("a", "q", "b"), ("a", "r", "a")])
        counts = store.occurrence_counts()
        assert counts[store.lookup("a")] == 4
        assert counts[store.lookup("b")] == 2

    def test_top_entities_skip_literals(self):
        store = TripleStore.from_triples([("a", "p", '"x"'), ("b", "p", '"x"'), ("a", "q", "b")])
        assert store.top_entities(0.5) == ids(store, "a")
        assert store.top_entities(1.0) == ids(store, "a", "b")
        with pytest.raises(ValueError):
            store.top_entities(1.5)
