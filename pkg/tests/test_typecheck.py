import pytest

from kbforge.errors import TypeCheckError
from kbforge.parser import parse_formula, parse_specification, parse_term
from kbforge.printer import formula_str
from kbforge.query import eval_formula
from kbforge.syntax import Exists, Forall, Var
from kbforge.typecheck import Resolver, check_welltyped, desugar
from kbforge.vocab import Sig
from kbforge.workspace import Workspace


def sig_of(text, name="V"):
    return Sig(parse_specification(text).entries[name])


OVERLOADED = """vocabulary V is {
    type T1; type T2;
    pred P[T1];
    pred P[T2];
    func P[T1->T2];
};"""


def test_single_disambiguation():
    r = Resolver(sig_of(OVERLOADED))
    q = r.formula(parse_formula("!x: P(P(x))"))
    f = q.body
    assert f.sym.args == ("T2",)
    assert f.args[0].sym.kind == "func"
    assert q.vars[0].type == "T1"


def test_one_type_fallback():
    r = Resolver(sig_of("vocabulary V is { type T; };"))
    f = r.formula(parse_formula("!x: x = x"))
    assert isinstance(f, Forall) and f.vars[0].type == "T"


def test_literal_outside_type_rejected():
    sig = sig_of("vocabulary V is { type course; pred P[course]; };")
    with pytest.raises(TypeCheckError):
        Resolver(sig).formula(parse_formula("P(1)"))


VEHICLES = """vocabulary V is {
    type vehicle;
    type car subtype of vehicle;
    pred fast[vehicle];
    func c[->car];
    func speed[vehicle->int];
};"""


def test_subtype_in_supertype_position():
    sig = sig_of(VEHICLES)
    assert check_welltyped(parse_formula("fast(c)"), sig) == []


def test_user_type_in_arithmetic_rejected():
    sig = sig_of(VEHICLES)
    assert check_welltyped(parse_formula("c + 1 > 2"), sig) != []
    assert check_welltyped(parse_formula("speed(c) + 1 > 2"), sig) == []


def test_empty_theory_is_well_typed():
    sig = sig_of(VEHICLES)
    th = parse_specification("theory T over V is { };").entries["T"]
    assert check_welltyped(th, sig) == []


def test_cyclic_hierarchy():
    with pytest.raises(TypeCheckError, match="cyclic"):
        sig_of("vocabulary V is { type a subtype of b; type b subtype of a; };")


TIMETABLE = """vocabulary V is {
    type student; type session; type teacher; type course;
    type weekday constructed from {Monday, Wednesday};
    pred attends[student,session];
    pred teaches[teacher,course];
    func A[->teacher];
    func courseOf[session->course];
    func day[session->weekday];
    pred Course[course];
};"""


def test_counting_quantifier_matches_cardinality():
    ws = Workspace.from_text(TIMETABLE + """
structure S over V is {
    student = {s1; s2; s3}; session = {x}; teacher = {t}; course = {c};
    attends = {s1,x; s2,x};
    A = t; courseOf = {x->c}; day = {x->Monday}; teaches = {}; Course = {c};
};""")
    I = ws.structure("S")
    r = Resolver(I.sig)
    for k in range(4):
        a = r.formula(parse_formula(f"!sess: ?>={k} stud in student: attends(stud,sess)"))
        b = r.formula(parse_formula(f"!sess: #{{stud in student: attends(stud,sess)}} >= {k}"))
        assert eval_formula(a, I) == eval_formula(b, I)


def test_sat_quantifier_desugars_to_implication():
    r = Resolver(sig_of(TIMETABLE))
    f = desugar(r.formula(parse_formula("!s sat teaches(A,courseOf(s)): day(s) = Wednesday")))
    g = desugar(r.formula(parse_formula("!s: teaches(A,courseOf(s)) => day(s) = Wednesday")))
    assert formula_str(f) == formula_str(g)


def test_predicate_set_cardinality():
    r = Resolver(sig_of(TIMETABLE))
    t = desugar(r.term(parse_term("#(Course)")))
    assert t.fn == "card" and t.set.cond.name == "Course"


def test_denotes_becomes_existential():
    sig = sig_of("vocabulary V is { type T; partial func g[T->T]; };")
    f = desugar(Resolver(sig).formula(parse_formula("!x: denotes(g(x))"))).body
    assert isinstance(f, Exists) and isinstance(f.vars[0], Var)
