import os

from hypothesis import given, settings, strategies as st

from conftest import CORPUS
from kbforge.structure import Table, check_integrity, merge, precision_leq, project
from kbforge.syntax import Cons
from kbforge.workspace import Workspace


def data1():
    ws = Workspace.from_files([os.path.join(CORPUS, "data1.idp")])
    return ws, ws.structure("data1")


def sym(I, name):
    return next(s for s in I.symbols() if s.name == name)


def test_ranges_and_domains():
    _, I = data1()
    assert list(I.domain("student")) == [1, 2, 3]
    assert I.domain("course") == ("Chinese", "Logic")


def test_constructed_type_in_declaration_order():
    ws = Workspace.from_files([os.path.join(CORPUS, "days.idp")])
    I = ws.structure("plain")
    d = I.domain("days")
    assert [c.name for c in d] == ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"]
    assert all(isinstance(c, Cons) for c in d)


def test_empty_type():
    ws = Workspace.from_text("vocabulary V is { type T; }; structure S over V is { T = {}; };")
    assert ws.structure("S").domain("T") == ()


def test_three_valued_lookup():
    _, I = data1()
    takes = sym(I, "takes")
    assert I.value(takes, (1, "Logic")) == 2
    assert I.value(takes, (2, "Chinese")) == 0
    assert I.value(takes, (3, "Logic")) == 1
    age = sym(I, "age")
    assert I.images(age, (1,)) == {25: 2}
    assert not I.two_valued(takes)


def test_precision_order():
    _, I = data1()
    empty = I.copy()
    empty.tables = {}
    assert precision_leq(empty, I)
    J = I.copy()
    J.set_value(sym(I, "takes"), (1, "Chinese"), True)
    assert precision_leq(I, J) and not precision_leq(J, I)
    K = I.copy()
    K.set_value(sym(I, "takes"), (3, "Chinese"), True)
    assert not precision_leq(J, K) and not precision_leq(K, J)


def test_merge():
    _, I = data1()
    empty = I.copy()
    empty.tables = {}
    assert merge(I, empty).to_text() == I.to_text()
    takes = sym(I, "takes")
    A, B = empty.copy(), empty.copy()
    A.set_value(takes, (1, "Logic"), True)
    B.set_value(takes, (2, "Logic"), True)
    assert merge(A, B).tables[takes].ct == {(1, "Logic"), (2, "Logic")}
    C = empty.copy()
    C.set_value(takes, (1, "Logic"), False)
    bad = merge(A, C)
    assert [v.kind for v in check_integrity(bad)] == ["overlap"]


def test_integrity_witnesses():
    _, I = data1()
    assert check_integrity(I) == []
    J = I.copy()
    J.set_value(sym(I, "age"), (1, 30), True)
    (v,) = check_integrity(J)
    assert v.kind == "multi-image" and v.witness == (1, 25, 30)
    ws = Workspace.from_text("""vocabulary V is { type person; type student subtype of person; };
structure S over V is { person = {2; 3}; student = {1}; };""")
    (v,) = check_integrity(ws.structure("S"))
    assert v.kind == "subtype" and v.witness == (1,)


def test_projection():
    ws = Workspace.from_files([os.path.join(CORPUS, "schedule_toy.idp")])
    I = ws.structure("db")
    assert project(I, I.sig).to_text() == I.to_text()
    P = project(I, ws.vocabulary("Vout"))
    assert {s.name for s in P.symbols()} == {"courseOf", "timeOf", "attends", "teacherOf"}
    empty = Workspace.from_text("vocabulary E is { type session; };").vocabulary("E")
    Q = project(I, empty)
    assert Q.tables == {} and Q.domain("session") == ("s1", "s2")


def test_structure_text_reparses():
    ws, I = data1()
    text = I.to_text()
    voc = open(os.path.join(CORPUS, "data1.idp"), encoding="utf-8").read().split("structure data1")[0]
    again = Workspace.from_text(voc + text).structure("data1")
    assert again.to_text() == text


@settings(max_examples=100, deadline=None)
@given(st.sets(st.tuples(st.sampled_from([1, 2, 3]), st.sampled_from(["Logic", "Chinese"]))),
       st.sets(st.tuples(st.sampled_from([1, 2, 3]), st.sampled_from(["Logic", "Chinese"]))))
def test_precision_is_monotone_under_merge(extra_ct, extra_cf):
    _, I = data1()
    takes = sym(I, "takes")
    J = I.copy()
    J.tables[takes] = Table(J.tables[takes].ct | extra_ct, J.tables[takes].cf | extra_cf)
    M = merge(I, J)
    assert precision_leq(I, M) and precision_leq(J, M)
