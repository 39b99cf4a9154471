"""Inductive definitions: graph translation, completion, classification and the
parametrised well-founded model.

The well-founded model is computed as the well-founded fixpoint of the
three-valued immediate-consequence approximator: the lower bound grows by
a least fixpoint of rule bodies that are true with the current upper bound
fixed, the upper bound shrinks to the least fixpoint of bodies that are not
false with the new lower bound fixed, and both repeat until stable.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import EvaluationError, Inconsistent, NotTotalError
from .query import Evaluator, WILD
from .structure import PartialStructure, Table
from .syntax import (
    Agg, And, App, Atom, Cmp, Definition, Denotes, ExtExists, Exists, Forall, Not, Or,
    Rule, SetExpr, Theory, Var, conj, disj, format_element, implies, sort_tuples, symbols_in,
)
from .typecheck import fresh_var


# ---------------------------------------------------------------- generic fixpoint

def well_founded(rules, evaluate):
    """Well-founded fixpoint over abstract ground rules.

    ``rules`` is a list of ``(head, body)``; ``evaluate(body, lower, upper)``
    returns the Kleene value (0/1/2) of a body when atoms in ``lower`` are
    true, atoms outside ``upper`` are false and the rest unknown.  Returns
    ``(true_atoms, possible_atoms)`` and records the successive bounds.
    """
    heads = {h for h, _ in rules}
    lower, upper = set(), set(heads)
    trace = [(frozenset(lower), frozenset(upper))]
    while True:
        new_lower = _lfp(rules, lambda b, z: evaluate(b, z, upper) == 2)
        new_upper = _lfp(rules, lambda b, z: evaluate(b, new_lower, z) >= 1)
        if new_lower == lower and new_upper == upper:
            break
        lower, upper = new_lower, new_upper
        trace.append((frozenset(lower), frozenset(upper)))
    well_founded.trace = trace
    return lower, upper


def _lfp(rules, fires):
    z = set()
    changed = True
    while changed:
        changed = False
        for h, body in rules:
            if h in z:
                continue
            if fires(body, z):
                z.add(h)
                changed = True
    return z


# ---------------------------------------------------------------- ground rule sets

def eval_ground(body, lower, upper) -> int:
    """Kleene value of a ground body built from atom ids, ``('not', b)``,
    ``('and', [..])``, ``('or', [..])`` and ``True``/``False``."""
    if body is True:
        return 2
    if body is False:
        return 0
    if isinstance(body, tuple):
        op = body[0]
        if op == "not":
            return 2 - eval_ground(body[1], lower, upper)
        if op == "and":
            return min((eval_ground(b, lower, upper) for b in body[1]), default=2)
        if op == "or":
            return max((eval_ground(b, lower, upper) for b in body[1]), default=0)
        raise ValueError(f"bad body {body!r}")
    if body in lower:
        return 2
    return 1 if body in upper else 0


def wfm_ground(rules, opens=()):
    """Well-founded model of ground rules; ``opens`` are atoms fixed true.

    Returns ``(true, unknown)`` sets of defined atoms.
    """
    opens = set(opens)
    rules = list(rules) + [(a, True) for a in opens]
    lo, up = well_founded(rules, eval_ground)
    return lo, up - lo


# ---------------------------------------------------------------- definitions over structures

class _Overlay(PartialStructure):
    """A structure whose defined symbols follow a (lower, upper) pair of atom sets."""

    def __init__(self, base: PartialStructure, defined):
        super().__init__(base.sig, base.name, base.given, base.tables)
        self._dom_cache = base._dom_cache
        self.defined = set(defined)
        self.lower = set()
        self.upper = set()
        self._low_idx = {}

    def set_bounds(self, lower, upper):
        self.lower, self.upper = lower, upper
        idx = {}
        for sym, tup in lower:
            if sym.kind == "func":
                idx.setdefault((sym, tup[:-1]), []).append(tup[-1])
        self._low_idx = idx

    def value(self, sym, tup):
        if sym in self.defined:
            key = (sym, tup)
            if key in self.lower:
                return 2
            return 1 if key in self.upper else 0
        return super().value(sym, tup)

    def images(self, sym, args):
        if sym in self.defined:
            certain = self._low_idx.get((sym, args))
            if certain:
                return {v: 2 for v in certain}
            dom = self.domain(sym.out)
            if dom is None:
                return None
            return {v: 1 for v in dom if (sym, args + (v,)) in self.upper}
        return super().images(sym, args)


@dataclass
class WFModel:
    """Well-founded interpretation of the defined symbols."""
    true: dict = field(default_factory=dict)  # Symbol -> set of graph tuples
    unknown: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)

    @property
    def two_valued(self) -> bool:
        return not any(self.unknown.values())

    def value(self, sym, tup) -> int:
        if tup in self.true.get(sym, ()):
            return 2
        return 1 if tup in self.unknown.get(sym, ()) else 0


def ground_rules(d: Definition, structure: PartialStructure):
    """Instantiate rules: list of ``((sym, head tuple), (body, binding))``."""
    ev = Evaluator(structure)
    out = []
    for r in d.rules:
        sym = r.head.sym
        head_terms = r.head.args + ((r.value,) if r.value is not None else ())
        types = sym.args + ((sym.out,) if r.value is not None else ())
        for v in r.vars:
            if structure.domain(v.type) is None:
                raise EvaluationError(f"rule variable {v.name} ranges over type {v.type}, which is not finite")
        for b in ev.instances(r.vars, {}):
            tup = []
            ok = True
            for t, ty in zip(head_terms, types):
                vals = ev.term(t, b)
                if vals is WILD or len(vals) > 1 or (vals and 2 not in vals.values()):
                    raise EvaluationError(f"head term of {sym.name} is not determined by the structure")
                if not vals:
                    ok = False
                    break
                (e,) = vals
                if not structure.contains(ty, e):
                    ok = False
                    break
                tup.append(e)
            if ok:
                out.append(((sym, tuple(tup)), (r.body, b)))
    return out


def wfm(d: Definition, structure: PartialStructure) -> WFModel:
    """The parametrised well-founded model of ``d`` given the opens in ``structure``."""
    defined = d.defined_symbols()
    rules = ground_rules(d, structure)
    ov = _Overlay(structure, defined)
    ev = Evaluator(ov)

    def evaluate(body, lower, upper):
        formula, binding = body
        ov.set_bounds(lower, upper)
        return ev.formula(formula, binding)

    lo, up = well_founded(rules, evaluate)
    m = WFModel(trace=list(well_founded.trace))
    for sym in defined:
        m.true[sym] = {t for s, t in lo if s == sym}
        m.unknown[sym] = {t for s, t in up - lo if s == sym}
    _check_functions(m, defined, structure)
    return m


def _check_functions(m: WFModel, defined, structure):
    for sym in defined:
        if sym.kind != "func":
            continue
        imgs = {}
        for t in m.true[sym]:
            imgs.setdefault(t[:-1], []).append(t[-1])
        for args, vals in imgs.items():
            if len(vals) > 1:
                w = args + tuple(sorted(vals, key=str))
                raise Inconsistent(f"definition gives {sym.name}{_fmt(args)} several values", (sym.name, w))
        if sym.partial or not m.two_valued:
            continue
        doms = [structure.domain(a) for a in sym.args]
        if any(dm is None for dm in doms):
            continue
        for args in itertools.product(*doms):
            if args not in imgs:
                raise Inconsistent(f"definition gives total function {sym.name} no value for {_fmt(args)}",
                                   (sym.name, args))


def _fmt(t):
    return "(" + ",".join(format_element(e) for e in t) + ")"


# ---------------------------------------------------------------- structure of definitions

def _user(sym) -> bool:
    return sym.kind in ("pred", "func") and not sym.builtin and not sym.constructor and sym.view is None


def open_symbols(d: Definition) -> list:
    defined = set(d.defined_symbols())
    out = set()
    for r in d.rules:
        out |= symbols_in(r.body)
        for t in r.head.args + ((r.value,) if r.value is not None else ()):
            out |= symbols_in(t)
    return sorted((s for s in out if _user(s) and s not in defined), key=str)


def dependency_graph(d: Definition) -> dict:
    """Head symbol -> {body symbol: set of polarities ('+', '-', '?')}."""
    g = {s: {} for s in d.defined_symbols()}
    for r in d.rules:
        deps = g[r.head.sym]
        _polar(r.body, True, deps)
    return g


def _polar(n, positive, acc, neutral=False):
    if isinstance(n, (Atom,)):
        if n.sym is not None and _user(n.sym):
            acc.setdefault(n.sym, set()).add("?" if neutral else ("+" if positive else "-"))
        for a in n.args:
            _polar(a, positive, acc, True)
        return
    if isinstance(n, App):
        if n.sym is not None and _user(n.sym):
            acc.setdefault(n.sym, set()).add("?")
        for a in n.args:
            _polar(a, positive, acc, True)
        return
    if isinstance(n, Not):
        _polar(n.f, not positive, acc, neutral)
        return
    if isinstance(n, (And, Or)):
        for g in n.fs:
            _polar(g, positive, acc, neutral)
        return
    if isinstance(n, (Forall, Exists)):
        _polar(n.body, positive, acc, neutral)
        return
    if isinstance(n, (ExtExists, Agg, SetExpr, Cmp, Denotes)):
        from .syntax import children
        for c in children(n):
            _polar(c, positive, acc, True)
        return


def split_definition(d: Definition) -> list:
    """Split into strongly connected components, dependencies first."""
    g = dependency_graph(d)
    nodes = list(g)
    index, low, stack, on, comps = {}, {}, [], set(), []
    counter = itertools.count()

    def strong(v):
        index[v] = low[v] = next(counter)
        stack.append(v)
        on.add(v)
        for w in g[v]:
            if w not in g:
                continue
            if w not in index:
                strong(w)
                low[v] = min(low[v], low[w])
            elif w in on:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on.discard(w)
                comp.append(w)
                if w == v:
                    break
            comps.append(comp)

    for v in nodes:
        if v not in index:
            strong(v)
    out = []
    for comp in comps:  # Tarjan emits dependencies before dependants
        cs = set(comp)
        out.append(Definition(tuple(r for r in d.rules if r.head.sym in cs)))
    return out


def stratified(d: Definition) -> bool:
    """No recursion through negation or non-monotone constructs."""
    g = dependency_graph(d)
    for part in split_definition(d):
        syms = set(part.defined_symbols())
        for s in syms:
            for t, pols in g[s].items():
                if t in syms and pols - {"+"}:
                    return False
    return True


def classify(d: Definition, theory: Theory | None, structure: PartialStructure) -> str:
    """'input-star', 'output-star' or 'neither'."""
    opens = open_symbols(d)
    typed = all(structure.domain(v.type) is not None for r in d.rules for v in r.vars)
    if typed and all(structure.two_valued(s) for s in opens):
        return "input-star"
    defined = set(d.defined_symbols())
    if any(s.kind == "func" for s in defined):
        return "neither"
    for s in defined:
        t = structure.tables.get(s)
        if t is not None and (t.ct or t.cf or t.closed):
            return "neither"
    if theory is not None:
        used = set()
        for f in theory.sentences:
            used |= symbols_in(f)
        for other in theory.definitions:
            if other is d:
                continue
            for r in other.rules:
                if r.head.sym in defined:
                    return "neither"
                used |= symbols_in(r.body)
                for a in r.head.args:
                    used |= symbols_in(a)
        extra = getattr(theory, "objective_symbols", set())
        if (used | extra) & defined:
            return "neither"
    if not stratified(d):
        return "neither"
    return "output-star"


def fold(structure: PartialStructure, m: WFModel, name="definition") -> PartialStructure:
    """Write a two-valued well-founded model into a copy of the structure."""
    out = structure.copy()
    for sym, true in m.true.items():
        old = structure.tables.get(sym)
        if old is not None:
            for tup in sort_tuples(true):
                if structure.value(sym, tup) == 0:
                    raise Inconsistent(f"{name} derives {sym.name}{_fmt(tup)}, which the structure makes false",
                                       (sym.name, tup))
            for tup in sort_tuples(old.ct):
                if tup not in true:
                    raise Inconsistent(f"{name} does not derive {sym.name}{_fmt(tup)}, which the structure makes true",
                                       (sym.name, tup))
        out.tables[sym] = Table(set(true), set(), True)
    return out


def evaluate_input_defs(theory: Theory, structure: PartialStructure):
    """Evaluate input-* definitions until none remain; returns (residual theory, structure)."""
    parts = [p for d in theory.definitions for p in split_definition(d)]
    current = structure
    progress = True
    while progress:
        progress = False
        for p in list(parts):
            if classify(p, None, current) != "input-star":
                continue
            m = wfm(p, current)
            if not m.two_valued:
                sym = next(s for s, u in m.unknown.items() if u)
                tup = sort_tuples(m.unknown[sym])[0]
                raise Inconsistent(f"definition of {sym.name} is not total: {sym.name}{_fmt(tup)} stays unknown",
                                   (sym.name, tup))
            current = fold(current, m)
            parts.remove(p)
            progress = True
    residual = Theory(theory.name, theory.vocabulary, list(theory.sentences), parts)
    return residual, current


# ---------------------------------------------------------------- graph translation and completion

def _graph_atom(app: App, value):
    return Atom(app.sym.name, app.args + (value,), app.sym)


def _unnest_term(t, outer):
    """Replace user function applications inside ``t`` by fresh variables.

    ``outer`` collects (var, graph atom) pairs, innermost first.
    """
    if isinstance(t, App):
        args = tuple(_unnest_term(a, outer) for a in t.args)
        t = App(t.name, args, t.sym)
        if _user(t.sym):
            x = fresh_var(t.sym.out)
            outer.append((x, _graph_atom(t, x)))
            return x
        return t
    if isinstance(t, Agg):
        return Agg(t.fn, _unnest_set(t.set))
    return t


def _unnest_set(s: SetExpr) -> SetExpr:
    cond = _unnest(s.cond)
    outer = []
    terms = tuple(_unnest_term(t, outer) for t in s.terms)
    if not outer:
        return SetExpr(s.vars, cond, terms)
    vs = s.vars + tuple(x for x, _ in outer)
    return SetExpr(vs, conj([cond] + [a for _, a in outer]), terms)


def _unnest(f):
    if isinstance(f, (Atom, Cmp, Denotes)):
        outer = []
        if isinstance(f, Atom):
            g = Atom(f.name, tuple(_unnest_term(a, outer) for a in f.args), f.sym)
        elif isinstance(f, Cmp):
            g = Cmp(f.op, _unnest_term(f.left, outer), _unnest_term(f.right, outer))
        else:
            g = Denotes(_unnest_term(f.term, outer))
        if isinstance(g, Denotes) and isinstance(g.term, Var):
            g = And(())
        for x, atom in reversed(outer):
            g = Exists((x,), And((g, atom)) if g != And(()) else atom)
        return g
    if isinstance(f, Not):
        return Not(_unnest(f.f))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_unnest(g) for g in f.fs))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.vars, _unnest(f.body))
    if isinstance(f, ExtExists):
        return ExtExists(f.op, f.bound, f.vars, _unnest(f.body))
    return f


def graph_translate(d: Definition) -> Definition:
    """Predicate-only form: function heads become graph atoms, nested applications are unnested."""
    rules = []
    for r in d.rules:
        head = r.head
        if r.value is not None:
            head = Atom(head.name, head.args + (r.value,), head.sym)
        rules.append(Rule(r.vars, head, _unnest(r.body)))
    return Definition(tuple(rules))


def completion(d: Definition) -> list:
    """Rule-wise implications plus one closure sentence per defined symbol."""
    d = graph_translate(d)
    out = []
    for r in d.rules:
        s = implies(r.body, r.head) if r.body != And(()) else r.head
        out.append(Forall(r.vars, s) if r.vars else s)
    for sym in d.defined_symbols():
        types = sym.args + ((sym.out,) if sym.kind == "func" else ())
        xs = tuple(fresh_var(t) for t in types)
        cases = []
        for r in d.rules:
            if r.head.sym != sym:
                continue
            eqs = [Cmp("=", x, a) for x, a in zip(xs, r.head.args)]
            body = conj(eqs + ([r.body] if r.body != And(()) else [])) if eqs or r.body != And(()) else And(())
            cases.append(Exists(r.vars, body) if r.vars else body)
        closure = implies(Atom(sym.name, xs, sym), disj(cases) if cases else Or(()))
        out.append(Forall(xs, closure) if xs else closure)
    return out


def delta_model_expand(d: Definition, structure: PartialStructure) -> PartialStructure:
    m = wfm(d, structure)
    if not m.two_valued:
        sym = next(s for s, u in m.unknown.items() if u)
        raise NotTotalError(f"definition not total on this input: {sym.name}"
                            f"{_fmt(sort_tuples(m.unknown[sym])[0])} is unknown")
    return fold(structure, m)
