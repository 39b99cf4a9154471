import os

import pytest
from hypothesis import given, settings, strategies as st

from conftest import CORPUS
from kbforge.errors import IncludeError, LexError, ParseError
from kbforge.lexer import tokenize
from kbforge.parser import flatten_includes, parse_formula, parse_specification, parse_term
from kbforge.printer import formula_str, print_component
from kbforge.syntax import (
    App, Atom, Definition, Elem, ExtExists, StructureDecl, Theory, Var, free_var_names, substitute,
)
from kbforge.workspace import Workspace


def read(name):
    with open(os.path.join(CORPUS, name), encoding="utf-8") as fh:
        return fh.read()


# ---------------------------------------------------------------- syntax helpers

def test_free_vars_respects_binders():
    f = parse_formula("P(x) & !x: Q(x)")
    assert free_var_names(f) == {"x"}
    assert free_var_names(parse_formula("!sess in session: available(teaches(courseOf(sess)), planned(sess))")) == set()
    assert free_var_names(parse_term("sum({x: P(x): t(x)})")) == set()


def test_substitute():
    assert substitute(parse_formula("P(x)"), {"x": Elem(1)}) == Atom("P", (Elem(1),))
    bound = parse_formula("!x: P(x)")
    assert substitute(bound, {"x": Elem(1)}) == bound
    q = substitute(parse_formula("Q(x,y)"), {"x": App("a")})
    assert q.args[0] == App("a") and q.args[1] == Var("y")


# ---------------------------------------------------------------- lexer

def test_tokens_of_structure_line():
    toks = [t.text for t in tokenize("takes::ct = {1,Logic};") if t.kind != "eof"]
    assert toks == ["takes", "::", "ct", "=", "{", "1", ",", "Logic", "}", ";"]


def test_comments_and_strings():
    assert [t for t in tokenize("// x") if t.kind != "eof"] == []
    (tok,) = [t for t in tokenize('"200 A"') if t.kind != "eof"]
    assert tok.kind == "string" and tok.text == "200 A"


def test_bad_character():
    with pytest.raises(LexError):
        tokenize("P(x) $ Q")


# ---------------------------------------------------------------- parser

def test_data1_structure():
    ns = parse_specification(read("data1.idp"))
    s = ns.entries["data1"]
    assert isinstance(s, StructureDecl)
    text = print_component(s)
    assert "takes::ct = {1,Logic};" in text
    assert "takes::cf = {2,Chinese};" in text


def test_empty_theory():
    th = parse_specification("theory T over V is { };").entries["T"]
    assert isinstance(th, Theory) and not th.sentences and not th.definitions


def test_no_overlap_definition_has_three_rules():
    th = parse_specification(read("no_overlap.idp")).entries["overlap"]
    (d,) = th.definitions
    assert isinstance(d, Definition) and len(d.rules) == 3
    assert d.defined_names() == ["noOverlap"]


def test_counting_quantifier():
    f = parse_formula("?>=5 stud in student: attends(stud,sess)")
    assert isinstance(f, ExtExists) and f.op == ">=" and f.bound == 5


def test_operator_precedence():
    f = parse_formula("~a | b & c => d")
    assert formula_str(f) == formula_str(parse_formula("((~a) | (b & c)) => d"))


def test_syntax_error_position():
    with pytest.raises(ParseError) as e:
        parse_specification("theory T over V is { P(x) ; ")
    assert str(e.value).startswith("1:28:")


def test_procedure_blocks_rejected():
    with pytest.raises(ParseError, match="subcommand"):
        parse_specification("procedure main() { }")


def test_includes_flatten():
    root = flatten_includes(parse_specification(read("include_schedule.idp")))
    voc = root.entries["schedule"]
    names = {s.name for s in voc.all_symbols()}
    assert {"course", "location", "session", "nameOf", "assigned"} <= names
    assert sum(1 for s in voc.all_symbols() if s.name == "assigned") == 2
    refined = {s.name for s in root.entries["names"].all_symbols()}
    assert "nameOf" in refined and "location" not in refined


def test_empty_include_and_cycles():
    root = flatten_includes(parse_specification(
        "vocabulary E is { }; vocabulary V is { include E; type T; };"))
    assert [s.name for s in root.entries["V"].all_symbols()] == ["T"]
    with pytest.raises(IncludeError, match="cycl"):
        flatten_includes(parse_specification(
            "vocabulary A is { include B; }; vocabulary B is { include A; };"))


# ---------------------------------------------------------------- printer

def test_print_empty_vocabulary():
    v = parse_specification("vocabulary V is { };").entries["V"]
    assert print_component(v) == "vocabulary V is { };"


def test_define_prints_rules_with_arrow():
    th = parse_specification(read("can_take.idp")).entries["prerequisites"]
    assert "<-" in print_component(th)


@pytest.mark.parametrize("name", sorted(os.listdir(CORPUS)))
def test_corpus_round_trip(name):
    tree = parse_specification(read(name))
    assert parse_specification(print_component(tree)) == tree


STD = os.path.join(os.path.dirname(CORPUS), "std")


@pytest.mark.parametrize("name", sorted(os.listdir(STD)))
def test_std_components_load(name):
    path = os.path.join(STD, name)
    ws = Workspace.from_files([path])
    assert ws.names()
    with open(path, encoding="utf-8") as fh:
        tree = parse_specification(fh.read())
    assert parse_specification(print_component(tree)) == tree


atoms = st.sampled_from(["P(x)", "Q(x,y)", "x = y", "f(x) < 3", "R", "denotes(g(x))"])


def formulas():
    return st.recursive(
        atoms,
        lambda sub: st.one_of(
            st.builds(lambda a: f"~{a}", sub),
            st.builds(lambda a, b: f"({a} & {b})", sub, sub),
            st.builds(lambda a, b: f"({a} | {b})", sub, sub),
            st.builds(lambda a, b: f"({a} => {b})", sub, sub),
            st.builds(lambda a, b: f"({a} <=> {b})", sub, sub),
            st.builds(lambda a: f"(!z: {a})", sub),
            st.builds(lambda a: f"(?=1 z: {a})", sub),
        ),
        max_leaves=6,
    )


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_formula_round_trip(text):
    f = parse_formula(text)
    assert parse_formula(formula_str(f)) == f
