import os
import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import CORPUS
from kbforge.errors import GroundingError
from kbforge.grounder import break_symmetries, detect_symmetries, ground
from kbforge.solver import SAT, UNSAT, enumerate_models, solve
from kbforge.structure import Table
from kbforge.workspace import Workspace


def load_file(name, theory, structure):
    ws = Workspace.from_files([os.path.join(CORPUS, name)])
    I = ws.structure(structure)
    return ws.theory(theory, I), I


def count(g):
    return sum(1 for _ in enumerate_models(g))


def test_known_atoms_are_not_grounded():
    ws = Workspace.from_text("vocabulary V is { type t; pred P[t]; }; theory T over V is { !x: P(x). };"
                             "structure S over V is { t = {1..3}; P = {1; 2; 3}; };")
    I = ws.structure("S")
    g = ground(ws.theory("T", I), I)
    assert g.clauses == [] and g.natoms <= 1


def test_pigeonhole_grounding():
    T, I = load_file("pigeonhole.idp", "fit", "four")
    g = ground(T, I)
    assert len([k for k in g.atom_ids if k[0] == "sym"]) == 12
    assert solve(g).status == UNSAT
    T, I = load_file("pigeonhole.idp", "fit", "three")
    assert count(ground(T, I)) == 6


def test_empty_theory_grounds_to_nothing():
    ws = Workspace.from_text("vocabulary V is { type t; pred P[t]; }; theory T over V is { };"
                             "structure S over V is { t = {1}; };")
    I = ws.structure("S")
    g = ground(ws.theory("T", I), I)
    assert g.clauses == [] and solve(g).status == SAT


def test_infinite_quantification_rejected():
    ws = Workspace.from_text("vocabulary V is { pred P[int]; }; theory T over V is { !x: P(x). };"
                             "structure S over V is { };")
    I = ws.structure("S")
    with pytest.raises(GroundingError):
        ground(ws.theory("T", I), I)


def test_symmetry_classes():
    T, I = load_file("pigeonhole.idp", "fit", "four")
    classes = {c.type: c.elements for c in detect_symmetries(T, I)}
    assert classes == {"pigeon": (1, 2, 3, 4), "hole": (1, 2, 3)}
    ws = Workspace.from_text("""vocabulary V is { type t; pred P[t]; func age[t->int]; };
theory T over V is { !x: age(x) > 1 => P(x). };
structure S over V is { t = {a; b; c}; age = {a->1; b->2; c->3}; };""")
    I = ws.structure("S")
    assert all(len(c.elements) == 1 for c in detect_symmetries(ws.theory("T", I), I))


def test_breaking_keeps_one_model_per_orbit():
    T, I = load_file("coloring.idp", "proper", "triangle")
    g = ground(T, I)
    assert count(g) == 6
    g = break_symmetries(g, detect_symmetries(T, I), I.sig)
    assert count(g) == 1


def test_singleton_classes_change_nothing():
    ws = Workspace.from_text("""vocabulary V is { type t; pred P[t]; func c[->t]; };
theory T over V is { P(c). };
structure S over V is { t = {a; b}; c = a; };""")
    I = ws.structure("S")
    T = ws.theory("T", I)
    g = ground(T, I)
    assert all(len(c.elements) == 1 for c in detect_symmetries(T, I))
    before = list(g.clauses)
    break_symmetries(g, detect_symmetries(T, I), I.sig)
    assert g.clauses == before


GRAPH = """vocabulary G is { type node; type colour; pred edge[node,node]; func colourOf[node->colour]; };
theory proper over G is { !x y: edge(x,y) => colourOf(x) ~= colourOf(y); };
structure S over G is { node = {1..4}; colour = {r; g; b}; };"""


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(2, 3))
def test_breaking_preserves_satisfiability(seed, ncolours):
    rng = random.Random(seed)
    ws = Workspace.from_text(GRAPH.replace("{r; g; b}", "{r; g; b}" if ncolours == 3 else "{r; g}"))
    I = ws.structure("S")
    edge = next(s for s in I.symbols() if s.name == "edge")
    nodes = I.domain("node")
    I.tables[edge] = Table({(a, b) for a in nodes for b in nodes if a < b and rng.random() < 0.5}, set(), True)
    T = ws.theory("proper", I)
    plain = count(ground(T, I))
    broken = count(break_symmetries(ground(T, I), detect_symmetries(T, I), I.sig))
    assert (plain == 0) == (broken == 0)
    assert broken <= plain

