"""Top-down grounding of kernel theories into propositional ground theories.

Each sentence is instantiated depth first.  Atoms, comparisons and other
leaves are first evaluated against the input structure; known leaves are
replaced by their truth value and the connectives above them simplify.
What remains is a negation normal form tree over ground atoms which is
turned into clauses with one-sided auxiliary atoms.  Terms ground to a
list of ``(value, condition)`` cases with mutually exclusive conditions;
unknown functions contribute graph atoms together with their
exactly-one (or at-most-one, for partial functions) constraints.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

from .errors import EvaluationError, GroundingError
from .groundtheory import AggConstraint, GroundRule, GroundTheory
from .query import Evaluator, _CMP
from .solver import agg_status
from .structure import PartialStructure, Table
from .syntax import (
    Agg, And, App, Atom, Cmp, Definition, Denotes, Elem, ExtExists, Exists, Forall,
    GenQuant, Not, Or, PredSet, Theory, Var, children, sort_elements,
)
from .typecheck import desugar, term_type

log = logging.getLogger(__name__)

TRUE, FALSE = True, False
_SWAP = {"<": ">", ">": "<", "=<": ">=", ">=": "=<", "=": "=", "~=": "~="}


# ---------------------------------------------------------------- ground formula trees

def g_and(items):
    out = []
    for x in items:
        if x is FALSE:
            return FALSE
        if x is TRUE:
            continue
        if isinstance(x, tuple) and x[0] == "and":
            out.extend(x[1])
        else:
            out.append(x)
    out = list(dict.fromkeys(out))
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return ("and", tuple(out))


def g_or(items):
    out = []
    for x in items:
        if x is TRUE:
            return TRUE
        if x is FALSE:
            continue
        if isinstance(x, tuple) and x[0] == "or":
            out.extend(x[1])
        else:
            out.append(x)
    out = list(dict.fromkeys(out))
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return ("or", tuple(out))


def g_not(x):
    if x is TRUE:
        return FALSE
    if x is FALSE:
        return TRUE
    if isinstance(x, int):
        return -x
    op, items = x
    return (g_or if op == "and" else g_and)([g_not(i) for i in items])


# ---------------------------------------------------------------- grounder

class Grounder:
    """Grounds one theory (with optional objective term) against one structure."""

    def __init__(self, theory: Theory, structure: PartialStructure, objective=None, vout=None):
        self.theory = theory
        self.I = structure
        self.objective = objective
        self.defined = {}  # Symbol -> definition index (1-based)
        for k, d in enumerate(theory.definitions, 1):
            for s in d.defined_symbols():
                self.defined[s] = k
        # defined symbols are unknown during grounding; facts the structure knows become units
        self.S = structure.copy()
        for s in self.defined:
            self.S.tables[s] = Table()
        self.ev = Evaluator(self.S)
        self.g = GroundTheory()
        self.vout = vout
        self._true = None
        self._funcs = {}  # (sym, args) -> {value: literal}
        self._pos = {}
        self._eq = {}
        self._def_aux = {}
        self._reified = {}
        self._bodies = {}  # defined atom -> list of bodies
        self._heads = {}  # defined atom -> definition index

    # -------------------------------------------------------- atoms
    def true_lit(self) -> int:
        if self._true is None:
            self._true = self.g.new_atom(("true",))
            self.g.clauses.append([self._true])
        return self._true

    def lit_of_const(self, v) -> int:
        return self.true_lit() if v else -self.true_lit()

    def sym_atom(self, sym, tup) -> int:
        key = ("sym", sym, tup)
        a = self.g.atom_ids.get(key)
        if a is None:
            a = self.g.atom(key)
            k = self.defined.get(sym)
            if k is not None:
                self._heads[a] = k
                known = self.I.value(sym, tup)
                if known != 1:
                    self.g.clauses.append([a if known == 2 else -a])
                    self.g.fixed.append(a if known == 2 else -a)
        return a

    def func_atoms(self, sym, args) -> dict:
        """Graph literals of ``sym(args)`` for each possible value, with functionality constraints."""
        key = (sym, args)
        got = self._funcs.get(key)
        if got is not None:
            return got
        if sym in self.defined:
            dom = self.S.domain(sym.out)
            if dom is None:
                raise GroundingError(f"output type {sym.out} of {sym.name} is not finite")
            cands = {v: 1 for v in dom if self.I.value(sym, args + (v,)) != 0}
        else:
            cands = self.S.images(sym, args)
            if cands is None:
                raise GroundingError(f"output type {sym.out} of {sym.name} is not finite")
        lits = {}
        if any(t == 2 for t in cands.values()) and sym not in self.defined:
            for v, t in cands.items():
                lits[v] = self.true_lit() if t == 2 else -self.true_lit()
        else:
            for v in sort_elements(cands):
                lits[v] = self.sym_atom(sym, args + (v,))
            ls = list(lits.values())
            if not sym.partial:
                self.g.clauses.append(list(ls))
            if len(ls) <= 12:
                for a, b in itertools.combinations(ls, 2):
                    self.g.clauses.append([-a, -b])
            elif ls:
                self.g.aggregates.append(AggConstraint(self.true_lit(), "card", [(1, l) for l in ls], "=<", 1))
        self._funcs[key] = lits
        return lits

    def value_lit(self, sym, tup):
        """Ground value of a (graph) atom: TRUE, FALSE or a literal."""
        if sym.kind == "type":
            c = self.S.contains(sym.name, tup[0])
            if c is None:
                raise GroundingError(f"type {sym.name} is not two-valued")
            return TRUE if c else FALSE
        if sym.kind == "func":
            if sym.builtin or sym.constructor:
                vals = self.ev.images(sym, tup[:-1])
                return TRUE if vals.get(tup[-1]) == 2 else FALSE
            lits = self.func_atoms(sym, tup[:-1])
            l = lits.get(tup[-1])
            if l is None:
                return FALSE
            return self._const(l)
        if sym in self.defined:
            return self.sym_atom(sym, tup)
        v = self.S.value(sym, tup)
        if v == 2:
            return TRUE
        if v == 0:
            return FALSE
        return self.sym_atom(sym, tup)

    def _const(self, l):
        if self._true is not None and abs(l) == self._true:
            return TRUE if l > 0 else FALSE
        return l

    # -------------------------------------------------------- domains
    def domain(self, v: Var):
        d = self.S.domain(v.type)
        if d is None:
            raise GroundingError(f"variable {v.name} ranges over type {v.type}, which is not finite")
        return d

    def instances(self, vs, b):
        doms = [self.domain(v) for v in vs]
        for combo in itertools.product(*doms):
            nb = dict(b)
            for v, e in zip(vs, combo):
                nb[v.name] = e
            yield nb

    def fits(self, tname, e) -> bool:
        c = self.S.contains(tname, e)
        if c is None:
            raise GroundingError(f"type {tname} is not two-valued")
        return c

    # -------------------------------------------------------- terms
    def term(self, t, b, mode):
        """Cases ``[(value, condition)]`` with exclusive conditions; none means undefined."""
        if isinstance(t, Var):
            return [(b[t.name], TRUE)]
        if isinstance(t, Elem):
            return [(t.value, TRUE)]
        if isinstance(t, App):
            return self.app(t, b, mode)
        if isinstance(t, Agg):
            return self.agg_term(t, b, mode)
        raise GroundingError(f"not a term: {t!r}")

    def app(self, t: App, b, mode):
        sym = t.sym
        argcases = [self.term(a, b, mode) for a in t.args]
        out = {}
        for combo in itertools.product(*argcases):
            args = tuple(v for v, _ in combo)
            cond = g_and([c for _, c in combo])
            if cond is FALSE:
                continue
            if sym.builtin or sym.constructor:
                try:
                    vals = self.ev.images(sym, args)
                except EvaluationError as e:
                    raise GroundingError(str(e)) from None
                for v in vals:
                    out.setdefault(v, []).append(cond)
                continue
            if not all(self.fits(ty, a) for ty, a in zip(sym.args, args)):
                continue
            for v, l in self.func_atoms(sym, args).items():
                c = g_and([cond, self._const(l)])
                if c is not FALSE:
                    out.setdefault(v, []).append(c)
        return [(v, g_or(cs)) for v, cs in out.items() if g_or(cs) is not FALSE]

    def set_elements(self, s, b, mode, fn):
        """Weighted elements ``(weight, condition)`` of a set expression."""
        if isinstance(s, PredSet):
            s = desugar(Agg(fn, s)).set
        out = []
        for nb in self.instances(s.vars, b):
            cond = self.formula(s.cond, nb, mode)
            if cond is FALSE:
                continue
            if fn == "card":
                out.append((1, cond))
                continue
            for v, c in self.term(s.terms[0], nb, mode):
                cc = g_and([cond, c])
                if cc is FALSE:
                    continue
                if not isinstance(v, int):
                    raise GroundingError(f"aggregate {fn} over non-integer value {v!r}")
                out.append((v, cc))
        return out

    def reify(self, fn, elems, op, bound, mode):
        """Condition equivalent to ``fn(elems) op bound``."""
        certain = [w for w, c in elems if c is TRUE]
        maybe = [w for w, c in elems if c is not TRUE]
        st = agg_status(fn, op, bound, certain, maybe)
        if st is not None:
            return TRUE if st else FALSE
        lits = tuple((w, self.lit_equiv(c, mode)) for w, c in elems)
        key = (fn, lits, op, bound, mode)
        h = self._reified.get(key)
        if h is None:
            h = self.g.new_atom(("agg", fn, op, bound))
            self.g.aggregates.append(AggConstraint(h, fn, list(lits), op, bound))
            self._reified[key] = h
        return h

    def agg_term(self, t: Agg, b, mode):
        vals = self.ev.aggregate(desugar(t) if isinstance(t.set, PredSet) else t, b)
        if len(vals) == 1 and 2 in vals.values():
            return [(next(iter(vals)), TRUE)]
        elems = self.set_elements(t.set, b, mode, t.fn)
        out = []
        for v in sort_elements(vals):
            if not isinstance(v, int):
                raise GroundingError(f"aggregate {t.fn} over non-integer value {v!r}")
            c = self.reify(t.fn, elems, "=", v, mode)
            if c is not FALSE:
                out.append((v, c))
        return out

    # -------------------------------------------------------- formulas
    def formula(self, f, b, mode=None):
        """Ground ``f`` under binding ``b`` into a negation normal form tree."""
        if isinstance(f, (Atom, Cmp, Denotes, ExtExists)):
            try:
                v = self.ev.formula(f, b)
            except EvaluationError as e:
                raise GroundingError(str(e)) from None
            if v == 2:
                return TRUE
            if v == 0:
                return FALSE
        if isinstance(f, Atom):
            return self.atom(f, b, mode)
        if isinstance(f, Cmp):
            return self.cmp(f, b, mode)
        if isinstance(f, Not):
            return g_not(self.formula(f.f, b, mode))
        if isinstance(f, And):
            out = []
            for x in f.fs:
                g = self.formula(x, b, mode)
                if g is FALSE:
                    return FALSE
                out.append(g)
            return g_and(out)
        if isinstance(f, Or):
            out = []
            for x in f.fs:
                g = self.formula(x, b, mode)
                if g is TRUE:
                    return TRUE
                out.append(g)
            return g_or(out)
        if isinstance(f, Forall):
            out = []
            for nb in self.instances(f.vars, b):
                g = self.formula(f.body, nb, mode)
                if g is FALSE:
                    return FALSE
                out.append(g)
            return g_and(out)
        if isinstance(f, Exists):
            out = []
            for nb in self.instances(f.vars, b):
                g = self.formula(f.body, nb, mode)
                if g is TRUE:
                    return TRUE
                out.append(g)
            return g_or(out)
        if isinstance(f, ExtExists):
            elems = [(1, self.formula(f.body, nb, mode)) for nb in self.instances(f.vars, b)]
            elems = [(w, c) for w, c in elems if c is not FALSE]
            return self.reify("card", elems, f.op, f.bound, mode)
        if isinstance(f, Denotes):
            return g_or([c for _, c in self.term(f.term, b, mode)])
        if isinstance(f, GenQuant):
            return self.formula(desugar(f), b, mode)
        raise GroundingError(f"cannot ground {type(f).__name__}")

    def atom(self, f: Atom, b, mode):
        sym = f.sym
        types = sym.args + ((sym.out,) if sym.kind == "func" else ())
        argcases = [self.term(a, b, mode) for a in f.args]
        out = []
        for combo in itertools.product(*argcases):
            tup = tuple(v for v, _ in combo)
            cond = g_and([c for _, c in combo])
            if cond is FALSE:
                continue
            if sym.kind != "type" and not all(self.fits(ty, e) for ty, e in zip(types, tup)):
                continue
            out.append(g_and([cond, self.value_lit(sym, tup)]))
        return g_or(out)

    def cmp(self, f: Cmp, b, mode):
        lin = _linear(f.left)
        other, op = f.right, f.op
        if lin is None or _has_agg(f.right):
            lin = _linear(f.right)
            other, op = f.left, _SWAP[f.op]
            if lin is not None and _has_agg(f.left):
                lin = None
        if lin is not None:
            agg, sign, rest = lin
            # sign*agg + rest op other  <=>  agg op' sign*(other - rest)
            ks = {}
            for combo in itertools.product(self.term(other, b, mode),
                                           *[self.term(t, b, mode) for _, t in rest]):
                vals = [v for v, _ in combo]
                if not all(isinstance(v, int) for v in vals):
                    continue
                k = vals[0] - sum(s * v for (s, _), v in zip(rest, vals[1:]))
                cond = g_and([c for _, c in combo])
                if cond is not FALSE:
                    ks.setdefault(k, []).append(cond)
            if not ks:
                return FALSE
            elems = self.set_elements(agg.set, b, mode, agg.fn)
            if sign < 0:
                op = _SWAP[op]
            out = []
            for k in sorted(ks):
                c = self.reify(agg.fn, elems, op, sign * k, mode)
                out.append(g_and([g_or(ks[k]), c]))
            return g_or(out)
        cmp = _CMP[f.op]
        out = []
        for (a, ca), (c, cc) in itertools.product(self.term(f.left, b, mode), self.term(f.right, b, mode)):
            if cmp(a, c):
                out.append(g_and([ca, cc]))
        return g_or(out)

    # -------------------------------------------------------- clause generation
    def pos_lit(self, x) -> int:
        """A literal that implies ``x``."""
        if x is TRUE or x is FALSE:
            return self.lit_of_const(x)
        if isinstance(x, int):
            return x
        got = self._eq.get(x) or self._pos.get(x)
        if got is not None:
            return got
        op, items = x
        a = self.g.new_atom(("aux",))
        if op == "and":
            for i in items:
                self.g.clauses.append([-a, self.pos_lit(i)])
        else:
            self.g.clauses.append([-a] + [self.pos_lit(i) for i in items])
        self._pos[x] = a
        return a

    def lit_equiv(self, x, mode=None) -> int:
        """A literal equivalent to ``x`` (rule-defined inside definitions)."""
        if mode is not None:
            return self.def_lit(x, mode)
        if x is TRUE or x is FALSE:
            return self.lit_of_const(x)
        if isinstance(x, int):
            return x
        got = self._eq.get(x)
        if got is not None:
            return got
        op, items = x
        ls = [self.lit_equiv(i) for i in items]
        a = self.g.new_atom(("aux",))
        if op == "and":
            for l in ls:
                self.g.clauses.append([-a, l])
            self.g.clauses.append([a] + [-l for l in ls])
        else:
            self.g.clauses.append([-a] + ls)
            for l in ls:
                self.g.clauses.append([a, -l])
        self._eq[x] = a
        return a

    def def_lit(self, x, k) -> int:
        """A literal for ``x`` whose auxiliary atoms are defined by rules of definition ``k``."""
        if x is TRUE or x is FALSE:
            return self.lit_of_const(x)
        if isinstance(x, int):
            return x
        got = self._def_aux.get((x, k))
        if got is not None:
            return got
        op, items = x
        ls = [self.def_lit(i, k) for i in items]
        a = self.g.new_atom(("aux",))
        self.g.rules.append(GroundRule(a, op, ls, k))
        self._def_aux[(x, k)] = a
        return a

    def add_sentence(self, x):
        if x is TRUE:
            return
        if x is FALSE:
            self.g.clauses.append([])
            return
        if isinstance(x, int):
            self.g.clauses.append([x])
            return
        op, items = x
        if op == "and":
            for i in items:
                self.add_sentence(i)
        else:
            self.g.clauses.append([self.pos_lit(i) for i in items])

    # -------------------------------------------------------- definitions
    def ground_definition(self, d: Definition, k: int):
        for r in d.rules:
            sym = r.head.sym
            head_terms = r.head.args + ((r.value,) if r.value is not None else ())
            types = sym.args + ((sym.out,) if r.value is not None else ())
            for nb in self.instances(r.vars, {}):
                body = self.formula(r.body, nb, k)
                if body is FALSE:
                    continue
                for combo in itertools.product(*[self.term(t, nb, k) for t in head_terms]):
                    tup = tuple(v for v, _ in combo)
                    if not all(self.fits(ty, e) for ty, e in zip(types, tup)):
                        continue
                    cond = g_and([c for _, c in combo] + [body])
                    if cond is FALSE:
                        continue
                    if r.value is not None:
                        self.func_atoms(sym, tup[:-1])
                    h = self.sym_atom(sym, tup)
                    self._bodies.setdefault(h, []).append(cond)

    def close_definitions(self):
        """One normalized rule per defined atom; atoms without bodies get an empty disjunction."""
        for h in sorted(self._heads):
            k = self._heads[h]
            bodies = self._bodies.get(h, [])
            if len(bodies) == 1 and isinstance(bodies[0], tuple) and bodies[0][0] == "and":
                self.g.rules.append(GroundRule(h, "and", [self.def_lit(i, k) for i in bodies[0][1]], k))
                continue
            items = []
            for body in bodies:
                if isinstance(body, tuple) and body[0] == "or":
                    items.extend(body[1])
                else:
                    items.append(body)
            self.g.rules.append(GroundRule(h, "or", [self.def_lit(i, k) for i in items], k))

    # -------------------------------------------------------- objective
    def objective_terms(self, t, sign=1):
        """Weighted literals and a constant for a linear objective term."""
        if isinstance(t, App) and t.sym.builtin and t.name in ("+", "-") and len(t.args) == 2:
            e1, c1 = self.objective_terms(t.args[0], sign)
            e2, c2 = self.objective_terms(t.args[1], sign if t.name == "+" else -sign)
            return e1 + e2, c1 + c2
        if isinstance(t, Agg) and t.fn in ("card", "sum"):
            elems = self.set_elements(t.set, {}, None, t.fn)
            out, const = [], 0
            for w, c in elems:
                if c is TRUE:
                    const += sign * w
                else:
                    out.append((sign * w, self.lit_equiv(c)))
            return out, const
        cases = self.term(t, {}, None)
        if not cases:
            raise GroundingError("objective term is undefined")
        out, const = [], 0
        for v, c in cases:
            if not isinstance(v, int):
                raise GroundingError("objective term is not an integer")
            if c is TRUE:
                const += sign * v
            else:
                out.append((sign * v, self.lit_equiv(c)))
        return out, const

    # -------------------------------------------------------- driver
    def run(self) -> GroundTheory:
        for k, d in enumerate(self.theory.definitions, 1):
            self.ground_definition(d, k)
        for s in self.theory.sentences:
            self.add_sentence(self.formula(s, {}))
        if self.objective is not None:
            elems, const = self.objective_terms(self.objective)
            self.g.objective = elems
            self.g.objective_offset = const
        self.touch_outputs()
        self.close_definitions()
        g = self.g
        for key, a in g.atom_ids.items():
            if key[0] == "sym" and (self.vout is None or key[1] in self.vout):
                g.output_atoms.add(a)
        return g

    def touch_outputs(self):
        """Create atoms for every unknown tuple of an output symbol."""
        syms = self.vout if self.vout is not None else self.S.sig.user_symbols()
        for sym in sorted(syms, key=str):
            if sym.builtin or sym.constructor or sym.kind == "type":
                continue
            doms = [self.domain(Var(f"arg{i}", a)) for i, a in enumerate(sym.args)]
            for args in itertools.product(*doms):
                args = tuple(args)
                if sym.kind == "func":
                    self.func_atoms(sym, args)
                else:
                    self.value_lit(sym, args)


def _has_agg(t) -> bool:
    if isinstance(t, Agg):
        return True
    if isinstance(t, App):
        return any(_has_agg(a) for a in t.args)
    return False


def _linear(t):
    """``(agg, sign, rest)`` when ``t = sign*agg + sum(s*r for s, r in rest)`` with one aggregate."""
    if isinstance(t, Agg):
        return t, 1, []
    if isinstance(t, App) and t.sym is not None and t.sym.builtin and t.name in ("+", "-") \
            and len(t.args) == 2:
        a, c = t.args
        if isinstance(a, Agg) and not _has_agg(c):
            return a, 1, [(1 if t.name == "+" else -1, c)]
        if isinstance(c, Agg) and not _has_agg(a):
            return c, (1 if t.name == "+" else -1), [(1, a)]
    return None


def ground(theory: Theory, structure: PartialStructure, objective=None, vout=None) -> GroundTheory:
    """Ground ``theory`` (its definitions included) over ``structure``."""
    g = Grounder(theory, structure, objective, vout).run()
    log.info("ground: %d atoms, %d clauses, %d rules, %d aggregates",
             g.natoms, len(g.clauses), len(g.rules), len(g.aggregates))
    return g


# ---------------------------------------------------------------- symmetries

@dataclass
class SymmetryClass:
    type: str
    elements: tuple


def _ordered_types(node, sig, acc):
    """Types whose elements are compared by order, used in arithmetic or aggregated."""
    if isinstance(node, Cmp) and node.op not in ("=", "~="):
        for t in (node.left, node.right):
            ty = _safe_type(t)
            if ty:
                acc.add(ty)
    if isinstance(node, App) and node.sym is not None and node.sym.builtin:
        for a in node.args:
            ty = _safe_type(a)
            if ty:
                acc.add(ty)
        if node.sym.out:
            acc.add(node.sym.out)
    if isinstance(node, Agg):
        if node.fn != "card":
            s = node.set
            if isinstance(s, PredSet):
                acc.add(s.sym.args[0])
            elif s.terms:
                ty = _safe_type(s.terms[0])
                if ty:
                    acc.add(ty)
    for c in children(node):
        _ordered_types(c, sig, acc)


def _safe_type(t):
    try:
        return term_type(t)
    except Exception:
        return None


def _constants(node, acc):
    if isinstance(node, Elem):
        acc.add(node.value)
    for c in children(node):
        _constants(c, acc)


def detect_symmetries(theory: Theory, structure: PartialStructure, objective=None) -> list:
    """Classes of interchangeable elements per user type."""
    sig = structure.sig
    ordered, consts = set(), set()
    nodes = list(theory.sentences)
    for d in theory.definitions:
        for r in d.rules:
            nodes += [r.head, r.body] + ([r.value] if r.value is not None else [])
    if objective is not None:
        nodes.append(objective)
    for n in nodes:
        _ordered_types(n, sig, ordered)
        _constants(n, consts)
    out = []
    for t in sorted(sig.user_types()):
        td = sig.types[t]
        if td.constructors is not None:
            continue
        dom = structure.domain(t)
        if not dom:
            continue
        if any(sig.compatible(t, o) for o in ordered if o in sig.types):
            continue
        if sig.parents.get(t):  # classes are formed on root types
            continue
        related = [ty for ty in sig.types if sig.compatible(ty, t)]
        syms = [s for s in structure.tables if any(sig.compatible(a, t) for a in _positions(s))]
        classes = []
        for e in dom:
            if e in consts:
                out.append(SymmetryClass(t, (e,)))
                continue
            for cls in classes:
                if _swappable(structure, sig, t, related, syms, cls[0], e):
                    cls.append(e)
                    break
            else:
                classes.append([e])
        out.extend(SymmetryClass(t, tuple(c)) for c in classes)
    return out


def _positions(sym):
    return sym.args + ((sym.out,) if sym.kind == "func" else ())


def _swap_tuple(tup, mask, a, b):
    return tuple((b if x == a else a if x == b else x) if m else x for x, m in zip(tup, mask))


def _swappable(structure, sig, t, related, syms, a, b) -> bool:
    for ty in related:
        d = structure.domain(ty)
        if d is not None and ((a in d) != (b in d)):
            return False
    for s in syms:
        mask = [sig.compatible(p, t) for p in _positions(s)]
        tab = structure.tables[s]
        for part in (tab.ct, tab.cf):
            for tup in part:
                if _swap_tuple(tup, mask, a, b) not in part:
                    return False
    return True


def swap_permutation(g: GroundTheory, sig, cls_type, a, b):
    """Atom permutation induced by swapping ``a`` and ``b``; None if not closed over G's atoms."""
    perm = {}
    for key, x in g.atom_ids.items():
        if key[0] != "sym":
            continue
        sym, tup = key[1], key[2]
        mask = [sig.compatible(p, cls_type) for p in _positions(sym)]
        img = _swap_tuple(tup, mask, a, b)
        if img == tup:
            continue
        y = g.atom_ids.get(("sym", sym, img))
        if y is None:
            return None
        perm[x] = y
    return perm


def break_symmetries(g: GroundTheory, classes, sig, all_pairs=False) -> GroundTheory:
    """Add lex-leader constraints for element swaps within each class."""
    for cls in classes:
        els = list(cls.elements)
        if len(els) < 2:
            continue
        pairs = list(itertools.combinations(els, 2)) if all_pairs else list(zip(els, els[1:]))
        for a, b in pairs:
            perm = swap_permutation(g, sig, cls.type, a, b)
            if not perm:
                continue
            g.symmetries.append(perm)
            _lex_leader(g, perm)
    return g


def _lex_leader(g: GroundTheory, perm):
    """Clauses stating that the assignment is lexicographically at most its image."""
    seq = [(x, perm[x]) for x in sorted(perm) if x < perm[x]]
    prev = None  # literal meaning "prefix equal"; None is true
    for i, (x, y) in enumerate(seq):
        pre = [] if prev is None else [-prev]
        g.clauses.append(pre + [-x, y])
        if i == len(seq) - 1:
            break
        e = g.new_atom(("lex",))
        g.clauses.append(pre + [-x, -y, e])
        g.clauses.append(pre + [x, y, e])
        prev = e
