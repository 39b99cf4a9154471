"""Inference tasks: model expansion, optimization, model checking, propagation
and the normalization passes over theories."""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field, replace

from .errors import EvaluationError, Inconsistent, KBError
from .groundtheory import AggConstraint
from .grounder import break_symmetries, detect_symmetries, ground
from .query import Evaluator
from .solver import Solver, minimize as bb_minimize
from .structure import PartialStructure, Table, check_integrity, project
from .syntax import (
    And, App, Atom, Cmp, Definition, Denotes, Elem, ExtExists, Exists, Forall, GenQuant, Not,
    Or, Theory, Var, free_vars, sort_tuples, substitute, symbols_in,
)
from .typecheck import desugar, term_type
from .vocab import Sig
from .wfs import classify, evaluate_input_defs, fold, split_definition, wfm

log = logging.getLogger(__name__)


@dataclass
class MxTask:
    theory: Theory
    structure: PartialStructure
    vout: Sig | None = None
    objective: object = None
    nbmodels: int | None = 1  # None or 0: all models
    symmetry: bool = True
    orbits: bool = False
    seed: int | None = None


@dataclass
class MxOutcome:
    status: str  # 'sat' | 'unsat' | 'unknown'
    models: list = field(default_factory=list)
    values: list = field(default_factory=list)
    optimal: bool = False
    witness: object = None
    message: str = ""
    stats: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status == "sat"


class _Timer:
    def __init__(self, stats):
        self.stats = stats

    def __call__(self, name):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t = time.perf_counter()

            def __exit__(self, *exc):
                dt = time.perf_counter() - self.t
                timer.stats[name + "_s"] = round(dt, 6)
                log.info("%s took %.3fs", name, dt)
        return _Ctx()


# ---------------------------------------------------------------- preparation

@dataclass
class _Prepared:
    theory: Theory  # residual, output-* definitions removed
    full: Theory  # residual including output-* definitions
    structure: PartialStructure
    outdefs: list
    vout_syms: set
    touch: set


def _vout_symbols(task: MxTask, sig) -> set:
    if task.vout is None:
        return set(sig.user_symbols())
    wanted = set(task.vout.user_symbols())
    return {s for s in sig.user_symbols() if s in wanted}


def _prepare(task: MxTask, stats) -> _Prepared | MxOutcome:
    timer = _Timer(stats)
    I = task.structure
    with timer("integrity"):
        bad = check_integrity(I)
    if bad:
        return MxOutcome("unsat", witness=bad, message="; ".join(str(v) for v in bad))
    with timer("input_definitions"):
        try:
            residual, I2 = evaluate_input_defs(task.theory, I)
        except Inconsistent as e:
            return MxOutcome("unsat", witness=e.witness, message=str(e))
    residual.objective_symbols = symbols_in(task.objective) if task.objective is not None else set()
    outdefs, keep = [], []
    for d in residual.definitions:
        (outdefs if classify(d, residual, I2) == "output-star" else keep).append(d)
    theory = Theory(residual.name, residual.vocabulary, list(residual.sentences), keep)
    vout = _vout_symbols(task, I.sig)
    out_defined = {s for d in outdefs for s in d.defined_symbols()}
    touch = set(vout) - out_defined
    for d in outdefs:
        for r in d.rules:
            for s in symbols_in(r.body) | {x for a in r.head.args for x in symbols_in(a)}:
                if s.kind in ("pred", "func") and not s.builtin and not s.constructor \
                        and s not in out_defined:
                    touch.add(s)
    stats["output_definitions"] = len(outdefs)
    stats["input_definitions"] = len(split_parts(task.theory)) - len(residual.definitions)
    return _Prepared(theory, residual, I2, outdefs, vout, touch)


def split_parts(theory: Theory) -> list:
    return [p for d in theory.definitions for p in split_definition(d)]


# ---------------------------------------------------------------- post-processing

def _complete(base: PartialStructure, g, model, skip=()) -> PartialStructure:
    """The structure given by a solver model, with untouched unknowns filled in.

    Symbols in ``skip`` (those of output definitions) are left as they are."""
    out = base.copy()
    for sym, t in list(out.tables.items()):
        out.tables[sym] = t.copy()
    for key, a in g.atom_ids.items():
        if key[0] != "sym":
            continue
        sym, tup = key[1], key[2]
        t = out.tables.setdefault(sym, Table())
        if t.closed:
            continue
        if model[a]:
            t.ct.add(tup)
        else:
            t.cf.add(tup)
    for sym in base.sig.user_symbols():
        if sym in skip or not base.space_finite(sym):
            continue
        t = out.tables.setdefault(sym, Table())
        if t.closed:
            continue
        if sym.kind == "pred":
            t.closed = True
            continue
        images = t.by_input()
        for args in itertools.product(*[base.domain(a) for a in sym.args]):
            if args in images:
                continue
            if not sym.partial:
                cands = [v for v in base.domain(sym.out) if args + (v,) not in t.cf]
                if cands:
                    t.ct.add(args + (cands[0],))
        t.closed = True
    return out


def _evaluate_outdefs(M: PartialStructure, outdefs) -> PartialStructure:
    pending = [p for d in outdefs for p in split_definition(d)]
    while pending:
        for p in pending:
            if classify(p, None, M) == "input-star":
                m = wfm(p, M)
                if not m.two_valued:
                    raise Inconsistent("output definition is not total on this model")
                M = fold(M, m)
                pending.remove(p)
                break
        else:
            raise KBError("output definitions could not be evaluated")
    return M


def _key(J: PartialStructure):
    out = []
    for sym in sorted(J.tables, key=str):
        t = J.tables[sym]
        out.append((str(sym), tuple(map(str, sort_tuples(t.ct)))))
    return tuple(out)


def _out_sig(task: MxTask):
    return task.vout if task.vout is not None else task.structure.sig


def _swap_structure(M: PartialStructure, cls_type, a, b) -> PartialStructure:
    sig = M.sig
    out = M.copy()
    for sym, t in M.tables.items():
        pos = sym.args + ((sym.out,) if sym.kind == "func" else ())
        mask = [sig.compatible(p, cls_type) for p in pos]
        if not any(mask):
            out.tables[sym] = t.copy()
            continue

        def sw(tup):
            return tuple((b if x == a else a if x == b else x) if m else x for x, m in zip(tup, mask))
        out.tables[sym] = Table({sw(x) for x in t.ct}, {sw(x) for x in t.cf}, t.closed)
    return out


def orbit(M: PartialStructure, classes) -> list:
    """All structures reachable from ``M`` by swapping interchangeable elements."""
    gens = [(c.type, a, b) for c in classes for a, b in zip(c.elements, c.elements[1:])]
    seen = {_key(M): M}
    frontier = [M]
    while frontier:
        nxt = []
        for X in frontier:
            for ty, a, b in gens:
                Y = _swap_structure(X, ty, a, b)
                k = _key(Y)
                if k not in seen:
                    seen[k] = Y
                    nxt.append(Y)
        frontier = nxt
    return list(seen.values())


# ---------------------------------------------------------------- model expansion

def _ground_task(task, prep, stats, objective=None):
    timer = _Timer(stats)
    classes = []
    with timer("ground"):
        g = ground(prep.theory, prep.structure, objective, vout=prep.touch)
    if task.symmetry:
        with timer("symmetry"):
            classes = detect_symmetries(prep.full, prep.structure, objective)
            if any(len(c.elements) > 1 for c in classes):
                break_symmetries(g, classes, prep.structure.sig)
            else:
                classes = []
    stats.update(atoms=g.natoms, clauses=len(g.clauses), rules=len(g.rules),
                 aggregates=len(g.aggregates))
    return g, classes


def ground_task(task: MxTask):
    """The ground theory the solver would see; ``(None, outcome)`` when preprocessing already decides it."""
    stats = {}
    prep = _prepare(task, stats)
    if isinstance(prep, MxOutcome):
        return None, prep
    g, _ = _ground_task(task, prep, stats, task.objective)
    return g, stats


def _finish(task, prep, g, model, classes):
    skip = {s for d in prep.outdefs for s in d.defined_symbols()}
    M = _complete(prep.structure, g, model, skip)
    M = _evaluate_outdefs(M, prep.outdefs)
    full = orbit(M, classes) if (classes and task.orbits) else [M]
    return [project(X, _out_sig(task)) for X in full]


def model_expand(task: MxTask) -> MxOutcome:
    """Models of the theory expanding the structure, projected to the output vocabulary."""
    stats = {}
    prep = _prepare(task, stats)
    if isinstance(prep, MxOutcome):
        return prep
    g, classes = _ground_task(task, prep, stats)
    limit = task.nbmodels or None
    s = Solver(g, seed=task.seed)
    found = {}
    timer = _Timer(stats)
    with timer("search"):
        while limit is None or len(found) < limit:
            r = s.solve()
            if not r.sat:
                break
            for J in _finish(task, prep, g, r.model, classes):
                found.setdefault(_key(J), J)
            atoms = sorted(g.output_atoms)
            if not atoms or not s.add_clause([(-a if r.model[a] else a) for a in atoms]):
                break
    models = [found[k] for k in sorted(found)]
    if limit is not None:
        models = models[:limit]
    stats.update(s._stats())
    return MxOutcome("sat" if models else "unsat", models, stats=stats)


def optimize(task: MxTask, callback=None, interrupt=None) -> MxOutcome:
    """Branch-and-bound minimization of ``task.objective``; improving models stream to ``callback``."""
    if task.objective is None:
        raise KBError("optimization needs an objective term")
    stats = {}
    prep = _prepare(task, stats)
    if isinstance(prep, MxOutcome):
        return prep
    g, classes = _ground_task(task, prep, stats, task.objective)

    def on_model(model, value):
        if callback is not None:
            return callback(_finish(task, prep, g, model, [])[0], value)
        return None

    timer = _Timer(stats)
    with timer("search"):
        res = bb_minimize(g, on_model, interrupt, seed=task.seed)
    if res.model is None:
        return MxOutcome("unsat" if res.status == "unsat" else "unknown", stats=stats)
    models = _finish(task, prep, g, res.model, [])
    values = [res.value]
    limit = task.nbmodels or None
    if res.optimal and (limit is None or limit > 1):
        s = Solver(g, seed=task.seed)
        s.add_aggregate(AggConstraint(s.true_var, "sum", list(g.objective),
                                      "=", res.value - g.objective_offset))
        found = {_key(models[0]): models[0]}
        while limit is None or len(found) < limit:
            r = s.solve()
            if not r.sat:
                break
            J = _finish(task, prep, g, r.model, [])[0]
            found.setdefault(_key(J), J)
            atoms = sorted(g.output_atoms)
            if not atoms or not s.add_clause([(-a if r.model[a] else a) for a in atoms]):
                break
        models = list(found.values())
        values = [res.value] * len(models)
    stats["history"] = res.history
    return MxOutcome("sat", models, values, res.optimal, stats=stats)


def model_check(theory: Theory, structure: PartialStructure) -> bool:
    """Whether a two-valued structure satisfies every sentence and definition."""
    for sym in theory.vocabulary.user_symbols() if isinstance(theory.vocabulary, Sig) else []:
        if structure.space_finite(sym) and not structure.two_valued(sym):
            raise KBError(f"structure is not two-valued on {sym.name}")
    ev = Evaluator(structure)
    for f in theory.sentences:
        if ev.formula(f, {}) != 2:
            return False
    for d in theory.definitions:
        try:
            m = wfm(d, structure)
        except Inconsistent:
            return False
        if not m.two_valued:
            return False
        for sym in d.defined_symbols():
            t = structure.tables.get(sym)
            ct = set(t.ct) if t is not None else set()
            if ct != m.true.get(sym, set()):
                return False
    return True


def propagate(theory: Theory, structure: PartialStructure) -> PartialStructure | None:
    """A more precise structure approximating all models; None when the theory has none."""
    if check_integrity(structure):
        return None
    try:
        residual, I2 = evaluate_input_defs(theory, structure)
    except Inconsistent:
        return None
    g = ground(residual, I2)
    s = Solver(g)
    fixed = s.root_literals()
    if fixed is None:
        return None
    out = I2.copy()
    for sym, t in list(out.tables.items()):
        out.tables[sym] = t.copy()
    for lit in fixed:
        key = g.origins[abs(lit)]
        if not (isinstance(key, tuple) and len(key) == 3 and key[0] == "sym"):
            continue
        sym, tup = key[1], key[2]
        out.set_value(sym, tup, lit > 0)
    return out


# ---------------------------------------------------------------- normalization

def flatten(f):
    """Nested conjunctions and disjunctions become n-ary."""
    if isinstance(f, (And, Or)):
        out = []
        for g in f.fs:
            g = flatten(g)
            if type(g) is type(f):
                out.extend(g.fs)
            else:
                out.append(g)
        return type(f)(tuple(out))
    return _map(f, flatten)


def push_negations(f):
    """Negation normal form: negations only above atoms, comparisons and counts."""
    if isinstance(f, Not):
        g = f.f
        if isinstance(g, Not):
            return push_negations(g.f)
        if isinstance(g, And):
            return Or(tuple(push_negations(Not(x)) for x in g.fs))
        if isinstance(g, Or):
            return And(tuple(push_negations(Not(x)) for x in g.fs))
        if isinstance(g, Forall):
            return Exists(g.vars, push_negations(Not(g.body)))
        if isinstance(g, Exists):
            return Forall(g.vars, push_negations(Not(g.body)))
        if isinstance(g, GenQuant):
            return push_negations(Not(desugar(g)))
        return Not(_map(g, push_negations))
    return _map(f, push_negations)


def push_quantifications(f, structure: PartialStructure | None = None):
    """Move quantifiers into the subformulas that use their variables."""
    f = _map(f, lambda x: push_quantifications(x, structure))
    if isinstance(f, (Forall, Exists)):
        inner = And if isinstance(f, Forall) else Or
        body = f.body
        if isinstance(body, inner):
            # distribute over the matching connective
            return inner(tuple(push_quantifications(type(f)(f.vars, g), structure) for g in body.fs))
        other = Or if inner is And else And
        if isinstance(body, other):
            names = {v.name for v in f.vars}
            dep = [g for g in body.fs if names & {v.name for v in free_vars(g)}]
            indep = [g for g in body.fs if not names & {v.name for v in free_vars(g)}]
            if indep and dep and _nonempty(f.vars, structure):
                q = type(f)(f.vars, dep[0] if len(dep) == 1 else other(tuple(dep)))
                return other(tuple(indep) + (q,))
        used = {v.name for v in free_vars(body)}
        keep = tuple(v for v in f.vars if v.name in used)
        if len(keep) < len(f.vars) and _nonempty([v for v in f.vars if v.name not in used], structure):
            return type(f)(keep, body) if keep else body
    return f


def _nonempty(vs, structure) -> bool:
    if structure is None:
        return False
    for v in vs:
        d = structure.domain(v.type)
        if not d:
            return False
    return True


def _total_term(t) -> bool:
    if isinstance(t, (Var, Elem)):
        return True
    if isinstance(t, App) and t.sym is not None:
        if t.sym.partial or (t.sym.builtin and t.name in ("/", "%", "min", "max", "succ", "pred")):
            return False
        return all(_total_term(a) for a in t.args)
    return False


def nest_variables(f):
    """Replace ``x`` by ``t`` using ``x = t`` under the quantifier of ``x``."""
    f = _map(f, nest_variables)
    if isinstance(f, (Exists, Forall)):
        conn = And if isinstance(f, Exists) else Or
        parts = list(f.body.fs) if isinstance(f.body, conn) else [f.body]
        for i, p in enumerate(parts):
            eq = p if isinstance(f, Exists) else (p.f if isinstance(p, Not) else None)
            if not isinstance(eq, Cmp) or eq.op != "=":
                continue
            for x, t in ((eq.left, eq.right), (eq.right, eq.left)):
                if not (isinstance(x, Var) and any(v.name == x.name for v in f.vars)):
                    continue
                if x.name in {v.name for v in free_vars(t)} or not _total_term(t):
                    continue
                if term_type(t) != x.type:
                    continue
                rest = parts[:i] + parts[i + 1:]
                body = substitute(conn(tuple(rest)) if len(rest) != 1 else rest[0], {x.name: t}) \
                    if rest else (And(()) if conn is And else Or(()))
                vs = tuple(v for v in f.vars if v.name != x.name)
                return nest_variables(type(f)(vs, body) if vs else body)
    return f


def simplify(f, structure: PartialStructure):
    """Replace subformulas whose value is known in the structure by true or false."""
    ev = Evaluator(structure)

    def known(g, scope):
        fv = [v for v in free_vars(g)]
        vals = set()
        try:
            if any(structure.domain(v.type) is None for v in fv):
                return None
            for nb in ev.instances(fv, {}):
                vals.add(ev.formula(g, nb))
                if len(vals) > 1 or 1 in vals:
                    return None
        except (EvaluationError, KeyError):
            return None
        return vals.pop() if vals else None

    def walk(g, scope):
        if not _is_formula(g):
            return g
        v = known(g, scope)
        if v == 2:
            return And(())
        if v == 0:
            return Or(())
        return _fold(_map(g, lambda x: walk(x, scope)), structure)

    return walk(f, ())


TRUE_F, FALSE_F = And(()), Or(())


def _fold(f, structure):
    """Propagate true and false through one connective or quantifier."""
    if isinstance(f, Not) and f.f in (TRUE_F, FALSE_F):
        return FALSE_F if f.f == TRUE_F else TRUE_F
    if isinstance(f, (And, Or)):
        unit, zero = (TRUE_F, FALSE_F) if isinstance(f, And) else (FALSE_F, TRUE_F)
        if zero in f.fs:
            return zero
        fs = tuple(g for g in f.fs if g != unit)
        return fs[0] if len(fs) == 1 else type(f)(fs)
    if isinstance(f, (Forall, Exists)):
        if f.body in (TRUE_F, FALSE_F) and _nonempty(f.vars, structure):
            return f.body
        if isinstance(f, Forall) and f.body == TRUE_F or isinstance(f, Exists) and f.body == FALSE_F:
            return f.body
        used = {v.name for v in free_vars(f.body)}
        unused = [v for v in f.vars if v.name not in used]
        if unused and _nonempty(unused, structure):
            keep = tuple(v for v in f.vars if v.name in used)
            return type(f)(keep, f.body) if keep else f.body
    return f


def _is_formula(n) -> bool:
    return isinstance(n, (Atom, Cmp, Not, And, Or, Forall, Exists, ExtExists, Denotes, GenQuant))


def _map(f, fn):
    """Apply ``fn`` to the direct sub-formulas of ``f``."""
    if isinstance(f, Not):
        return Not(fn(f.f))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(fn(g) for g in f.fs))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.vars, fn(f.body))
    if isinstance(f, ExtExists):
        return replace(f, body=fn(f.body))
    return f


NORMALIZERS = {
    "flatten": lambda f, s: flatten(f),
    "simplify": lambda f, s: simplify(f, s),
    "push-negations": lambda f, s: push_negations(f),
    "push-quantifications": lambda f, s: push_quantifications(f, s),
    "nest-variables": lambda f, s: nest_variables(f),
}


def normalize(theory: Theory, which: str, structure: PartialStructure | None = None) -> Theory:
    """Apply one model-preserving rewriting to every sentence and rule body."""
    fn = NORMALIZERS.get(which)
    if fn is None:
        raise KBError(f"unknown normalization {which}; choose from {', '.join(NORMALIZERS)}")
    if which == "simplify" and structure is None:
        raise KBError("simplify needs a structure")
    sentences = [fn(f, structure) for f in theory.sentences]
    defs = [Definition(tuple(replace(r, body=fn(r.body, structure)) for r in d.rules))
            for d in theory.definitions]
    return Theory(theory.name, theory.vocabulary, sentences, defs)


def delta_model_expand(d: Definition, structure: PartialStructure) -> PartialStructure:
    from .wfs import delta_model_expand as _dme
    return _dme(d, structure)
