import os
import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import CORPUS
from oracles import TheoryGen, brute_models, model_key, search_space
from kbforge.errors import KBError
from kbforge.inference import (
    NORMALIZERS, MxTask, flatten, ground_task, model_check, model_expand, normalize, optimize, propagate,
    push_negations, simplify,
)
from kbforge.parser import parse_term
from kbforge.printer import formula_str
from kbforge.structure import Table, project
from kbforge.syntax import Theory
from kbforge.typecheck import Resolver
from kbforge.workspace import Workspace


def load(name, structure):
    ws = Workspace.from_files([os.path.join(CORPUS, name)])
    return ws, ws.structure(structure)


def sym(I, name):
    return next(s for s in I.symbols() if s.name == name)


def test_coloring_counts():
    ws, I = load("coloring.idp", "triangle")
    T = ws.theory("proper", I)
    assert len(model_expand(MxTask(T, I, nbmodels=0, symmetry=False)).models) == 6
    assert len(model_expand(MxTask(T, I, nbmodels=0)).models) == 1
    assert len(model_expand(MxTask(T, I, nbmodels=0, orbits=True)).models) == 6


def test_two_valued_input_is_its_own_model():
    ws, I = load("coloring.idp", "triangle")
    T = ws.theory("proper", I)
    M = model_expand(MxTask(T, I)).models[0]
    out = model_expand(MxTask(T, M, nbmodels=0))
    assert [m.to_text() for m in out.models] == [project(M, M.sig).to_text()]


def test_unsat_and_integrity():
    ws, I = load("pigeonhole.idp", "four")
    assert model_expand(MxTask(ws.theory("fit", I), I)).status == "unsat"
    ws, I = load("data1.idp", "data1")
    J = I.copy()
    J.set_value(sym(I, "age"), (1, 30), True)
    out = model_expand(MxTask(empty_theory(J), J))
    assert out.status == "unsat" and out.witness is not None


def empty_theory(I):
    return Theory("empty", I.sig, [], [])


def test_vout_projection():
    ws, I = load("schedule_toy.idp", "db")
    out = model_expand(MxTask(ws.theory("T", I), I, vout=ws.vocabulary("Vout")))
    names = {s.name for s in out.models[0].symbols()}
    assert names == {"courseOf", "timeOf", "attends", "teacherOf"}


def test_model_check():
    ws, I = load("no_overlap.idp", "week")
    T = ws.theory("overlap", I)
    M = model_expand(MxTask(T, I)).models[0]
    assert model_check(T, M)
    s = sym(M, "noOverlap")
    tup = next(iter(M.tables[s].ct), None) or next(iter(M.tables[s].cf))
    bad = M.copy()
    t = M.tables[s]
    bad.tables[s] = Table(t.ct ^ {tup}, set(), True)
    assert not model_check(T, bad)
    assert model_check(empty_theory(M), M)


def test_propagation():
    ws = Workspace.from_text("""vocabulary V is { type t; pred P[t]; pred p; pred q; };
theory A over V is { !x: P(x). };
theory B over V is { p | q. };
structure S over V is { t = {1; 2}; };""")
    I = ws.structure("S")
    J = propagate(ws.theory("A", I), I)
    assert J.tables[sym(I, "P")].ct == {(1,), (2,)}
    K = propagate(ws.theory("B", I), I)
    assert K.to_text() == I.to_text()


def test_optimization():
    ws, I = load("objective.idp", "stock")
    out = optimize(MxTask(ws.theory("choose", I), I, objective=ws.term("spent", I)[0]))
    assert out.optimal and out.values == [5]
    assert out.models[0].tables[sym(I, "pick")].ct == {("i4",)}
    ws, I = load("pigeonhole.idp", "four")
    placed = Resolver(I.sig).term(parse_term("#{p h: sits(p,h)}"))
    out = optimize(MxTask(ws.theory("fit", I), I, objective=placed))
    assert out.status == "unsat"


def test_normalizations():
    ws = Workspace.from_text("""vocabulary V is { type t; pred a; pred b; pred c; pred Q[t]; };
theory T over V is { (a | b) | c. ~(a & ~(b | c)). !x: Q(x) & a. };
structure S over V is { t = {1; 2}; Q = {1; 2}; };""")
    I = ws.structure("S")
    T = ws.theory("T", I)
    f0, f1, f2 = T.sentences
    assert formula_str(flatten(f0)) == "a | b | c"
    assert formula_str(flatten(push_negations(f1))) == "~a | b | c"
    assert formula_str(simplify(f2, I)) == "a"
    with pytest.raises(KBError):
        normalize(T, "no-such-pass")
    with pytest.raises(KBError):
        normalize(T, "simplify")


def random_instances(seeds, limit=1500):
    for seed in seeds:
        ws = Workspace.from_text(TheoryGen(random.Random(seed)).text())
        I = ws.structure("S")
        T = ws.theory("T", I)
        if search_space(T, I) <= limit:
            yield T, I


@settings(max_examples=40, deadline=None)
@given(st.integers(1000, 10 ** 6), st.sampled_from(sorted(NORMALIZERS)))
def test_normalization_keeps_models(seed, which):
    for T, I in random_instances([seed]):
        before = {model_key(M) for M in brute_models(T, I)}
        after = {model_key(M) for M in brute_models(normalize(T, which, I), I)}
        assert before == after


@settings(max_examples=40, deadline=None)
@given(st.integers(1000, 10 ** 6))
def test_propagation_is_sound(seed):
    for T, I in random_instances([seed]):
        J = propagate(T, I)
        models = brute_models(T, I)
        if J is None:
            assert not models
            continue
        for M in models:
            for s, t in J.tables.items():
                m = M.tables.get(s)
                assert m is None or (t.ct <= m.ct or not M.space_finite(s)), s.name


def test_seeded_runs_repeat():
    ws, I = load("coloring.idp", "triangle")
    T = ws.theory("proper", I)
    a = model_expand(MxTask(T, I, symmetry=False, seed=7)).models[0].to_text()
    b = model_expand(MxTask(T, I, symmetry=False, seed=7)).models[0].to_text()
    assert a == b


def test_ground_task():
    ws, I = load("pigeonhole.idp", "three")
    g, stats = ground_task(MxTask(ws.theory("fit", I), I))
    assert g is not None and g.natoms >= 9
