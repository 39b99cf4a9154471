import itertools
import os

import pytest
from hypothesis import given, settings, strategies as st

from conftest import CORPUS
from kbforge.errors import EvaluationError
from kbforge.parser import parse_formula, parse_set, parse_term
from kbforge.query import TV, UNDEFINED, UNKNOWN, eval_formula, eval_term, query_set
from kbforge.structure import Table
from kbforge.typecheck import Resolver
from kbforge.workspace import Workspace, _hints


def data1_query(text):
    ws = Workspace.from_files([os.path.join(CORPUS, "data1.idp")])
    I = ws.structure("data1")
    sig = ws.sig(I.sig.voc, views=True)
    s = Resolver(sig, domains=_hints(I, sig), views=True, names_as_elements=True).set_expr(parse_set(text))
    return query_set(s, I)


def test_certainly_true_view():
    assert data1_query("{x : takes_ct(1,x)}") == [("Logic",)]
    assert data1_query("{x in course : false}") == []
    assert data1_query("{s a : student(s) & age_ct(s,a)}") == [(1, 25), (3, 30)]


def test_unknown_instances_refused():
    with pytest.raises(EvaluationError, match="_ct"):
        data1_query("{x y : takes(x,y)}")


def zero():
    ws = Workspace.from_files([os.path.join(CORPUS, "partial_functions.idp")])
    I = ws.structure("zero")
    return I, Resolver(I.sig, domains=_hints(I, I.sig))


def test_undefined_division():
    I, r = zero()
    assert eval_term(r.term(parse_term("cost/number")), I) is UNDEFINED
    assert eval_formula(r.formula(parse_formula("cost/number =< 100")), I) == TV.FALSE
    assert eval_formula(r.formula(parse_formula("~(cost/number =< 100)")), I) == TV.TRUE
    assert eval_formula(r.formula(parse_formula("~exists(cost/number) | cost/number =< 100")), I) == TV.TRUE


def test_vacuous_quantifier():
    ws = Workspace.from_text("vocabulary V is { type T; pred P[T]; }; structure S over V is { T = {}; };")
    I = ws.structure("S")
    assert eval_formula(Resolver(I.sig).formula(parse_formula("!x: P(x)")), I) == TV.TRUE


def test_unknown_stays_unknown():
    ws = Workspace.from_files([os.path.join(CORPUS, "data1.idp")])
    I = ws.structure("data1")
    r = Resolver(I.sig, domains=_hints(I, I.sig), names_as_elements=True)
    assert eval_formula(r.formula(parse_formula("takes(3,Logic)")), I) == TV.UNKNOWN
    assert eval_formula(r.formula(parse_formula("takes(3,Logic) | takes(1,Logic)")), I) == TV.TRUE
    assert eval_term(r.term(parse_term("age(2)")), I) is UNKNOWN


AGG = """vocabulary A is { type thing; pred in[thing]; func w[thing->int]; };
structure S over A is { thing = {a; b; c; d}; };"""


@settings(max_examples=200, deadline=None)
@given(st.lists(st.booleans(), min_size=4, max_size=4), st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_aggregates_against_arithmetic(chosen, weights):
    ws = Workspace.from_text(AGG)
    I = ws.structure("S")
    syms = {s.name: s for s in I.symbols()}
    things = I.domain("thing")
    I.tables[syms["in"]] = Table({(t,) for t, c in zip(things, chosen) if c}, set(), True)
    I.tables[syms["w"]] = Table({(t, x) for t, x in zip(things, weights)}, set(), True)
    r = Resolver(I.sig)
    members = [x for c, x in zip(chosen, weights) if c]
    prod = 1
    for x in members:
        prod *= x
    expected = {"#{x: in(x)}": len(members), "sum({x: in(x): w(x)})": sum(members),
                "prod({x: in(x): w(x)})": prod,
                "min({x: in(x): w(x)})": min(members) if members else UNDEFINED,
                "max({x: in(x): w(x)})": max(members) if members else UNDEFINED}
    for text, value in expected.items():
        assert eval_term(r.term(parse_term(text)), I) == value


def test_multiset_keeps_duplicates():
    ws = Workspace.from_text(AGG)
    I = ws.structure("S")
    syms = {s.name: s for s in I.symbols()}
    I.tables[syms["in"]] = Table({("a",), ("b",)}, set(), True)
    I.tables[syms["w"]] = Table({(t, 2) for t in "abcd"}, set(), True)
    assert eval_term(Resolver(I.sig).term(parse_term("sum({x: in(x): w(x)})")), I) == 4


def test_kleene_connectives():
    ws = Workspace.from_text("vocabulary V is { pred p; pred q; }; structure S over V is { p = true; };")
    I = ws.structure("S")
    r = Resolver(I.sig)
    for text, want in [("p & q", 1), ("p | q", 2), ("~q", 1), ("q => p", 2), ("p => q", 1), ("p <=> ~p", 0)]:
        assert eval_formula(r.formula(parse_formula(text)), I) == want, text
    for a, b in itertools.product(["p", "q", "~p", "~q"], repeat=2):
        x = eval_formula(r.formula(parse_formula(f"{a} & {b}")), I)
        y = eval_formula(r.formula(parse_formula(f"~(~{a} | ~{b})")), I)
        assert x == y
