"""Name resolution, variable typing, well-typedness checks and desugaring.

Resolution works per sentence (or rule, or term).  Every name occurrence
gets a list of candidate symbols; each combination of candidates is typed
and checked, and exactly one combination must survive.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

from .errors import AmbiguityError, TypeCheckError
from .syntax import (
    Agg, And, App, Atom, Cmp, Definition, Denotes, Elem, ExtExists, Exists, Forall,
    GenQuant, Not, Or, PredSet, Rule, SetExpr, Symbol, Theory, TRUE, Var, conj, implies,
)
from .vocab import ARITH_OPS, Sig, parse_ref

MAX_COMBINATIONS = 4096


@dataclass
class _Slot:
    """A variable being typed."""
    id: int
    name: str
    declared: str | None = None
    strong: list = field(default_factory=list)
    weak: list = field(default_factory=list)
    links: list = field(default_factory=list)


class _Fail(Exception):
    pass


class _Walk:
    """One traversal of a sentence under a fixed choice of candidate symbols.

    With ``combo is None`` the walk only records candidate lists.
    """

    def __init__(self, res: "Resolver", combo=None):
        self.res = res
        self.sig = res.sig
        self.combo = combo
        self.k = 0
        self.cands = []
        self.slots = []
        self.free = {}
        self.checks = []  # (descriptor, position type, where)
        self.pairs = []  # (descriptor, descriptor, where) for comparisons

    # -------------------------------------------------------- helpers
    def choose(self, cands, what):
        if self.combo is None:
            if not cands:
                raise TypeCheckError(f"no symbol matches {what}")
            self.cands.append((what, cands))
            return cands[0]
        s = self.combo[self.k]
        self.k += 1
        return s

    def new_slot(self, name, declared=None):
        s = _Slot(len(self.slots), name, declared)
        self.slots.append(s)
        return s

    def var(self, slot):
        return Var(slot.name, f"?{slot.id}")

    def declare(self, vs, scope):
        """Open a scope for quantified variables; returns (typed vars, guards, scope)."""
        scope = dict(scope)
        out, guards = [], []
        for v in vs:
            declared = None
            guard = None
            if v.type is not None:
                tname = v.type.split("::")[-1]
                if tname in self.sig.types:
                    declared = tname
                else:
                    preds = [s for s in self.sig.matching(v.type, kinds=("pred",), arity=1)]
                    if not preds:
                        raise TypeCheckError(f"unknown type {v.type} for variable {v.name}")
                    p = self.choose(preds, v.type)
                    declared = p.args[0]
                    guard = p
            slot = self.new_slot(v.name, declared)
            scope[v.name] = slot
            out.append(self.var(slot))
            if guard is not None:
                guards.append(Atom(guard.name, (self.var(slot),), guard))
        return tuple(out), guards, scope

    # -------------------------------------------------------- descriptors
    def desc(self, t):
        """Static type descriptor of a built term."""
        if isinstance(t, Var):
            return ("var", int(t.type[1:]))
        if isinstance(t, Elem):
            return ("lit", t.value)
        if isinstance(t, App):
            return ("type", t.sym.out)
        if isinstance(t, Agg):
            if t.fn in ("card", "sum", "prod"):
                return ("type", "int")
            s = t.set
            if isinstance(s, PredSet):
                return ("type", s.sym.args[0])
            return self.desc(s.terms[0])
        raise TypeError(t)

    def at_position(self, t, ptype, where, strong=True):
        d = self.desc(t)
        if d[0] == "var":
            (self.slots[d[1]].strong if strong else self.slots[d[1]].weak).append(ptype)
        self.checks.append((d, ptype, where))

    # -------------------------------------------------------- terms
    def term(self, t, scope):
        if isinstance(t, Var):
            if t.name in scope:
                return self.var(scope[t.name])
            consts = [s for s in self.sig.by_name.get(t.name, ()) if s.kind == "func" and s.arity == 0
                      and not s.builtin]
            if consts:
                s = self.choose(consts, t.name)
                return App(t.name, (), s)
            if self.res.names_as_elements and self.res.known_element(t.name):
                return Elem(t.name)
            if not self.res.allow_free:
                raise TypeCheckError(f"unknown name {t.name}")
            if t.name not in self.free:
                self.free[t.name] = self.new_slot(t.name)
            return self.var(self.free[t.name])
        if isinstance(t, Elem):
            if isinstance(t.value, float):
                raise TypeCheckError(f"real number {t.value} is not supported")
            return t
        if isinstance(t, App):
            if t.name in ARITH_OPS:
                cands = [c for c in self.sig.by_name[t.name] if c.builtin]
            else:
                cands = self.sig.matching(parse_ref(t.name), kinds=("func",), arity=len(t.args))
            s = self.choose(cands, t.name)
            args = tuple(self.term(a, scope) for a in t.args)
            strong = not s.builtin
            for a, at in zip(args, s.args):
                self.at_position(a, at, f"argument of {s}", strong)
            return App(s.name, args, s)
        if isinstance(t, Agg):
            st = self.set_or_pred(t.set, t.fn, scope)
            if isinstance(st, SetExpr) and t.fn != "card":
                if len(st.terms) != 1:
                    raise TypeCheckError(f"{t.fn} needs a set with exactly one term")
                if t.fn in ("sum", "prod"):
                    self.at_position(st.terms[0], "int", f"term of {t.fn}", strong=False)
            return Agg(t.fn, st)
        raise TypeError(f"not a term: {t!r}")

    def set_or_pred(self, s, fn, scope):
        if isinstance(s, PredSet):
            want = 1 if fn != "card" else None
            cands = self.sig.matching(s.name, kinds=("pred", "type"), arity=want)
            if not self.res.views:
                cands = [c for c in cands if c.view is None]
            sym = self.choose(cands, s.name)
            if fn in ("sum", "prod"):
                self.checks.append((("type", sym.args[0]), "int", f"{fn}({s.name})"))
            return PredSet(sym.name, sym)
        return self.set_expr(s, scope)

    def set_expr(self, s, scope):
        vs, guards, inner = self.declare(s.vars, scope)
        cond = self.formula(s.cond, inner)
        if guards:
            cond = conj(guards + [cond])
        terms = tuple(self.term(t, inner) for t in s.terms)
        return SetExpr(vs, cond, terms)

    # -------------------------------------------------------- formulas
    def formula(self, f, scope):
        if isinstance(f, Atom):
            ref = parse_ref(f.name)
            if not f.args and len(ref.path) == 1 and ref.sig is None and ref.name in scope:
                raise TypeCheckError(f"variable {ref.name} used as a formula")
            cands = self.sig.matching(ref, kinds=("pred", "type"), arity=len(f.args))
            if not self.res.views:
                cands = [c for c in cands if c.view is None]
            s = self.choose(cands, f.name)
            args = tuple(self.term(a, scope) for a in f.args)
            for a, at in zip(args, s.args):
                self.at_position(a, at, f"argument of {s}")
            return Atom(s.name, args, s)
        if isinstance(f, Cmp):
            l = self.term(f.left, scope)
            r = self.term(f.right, scope)
            self.pairs.append((self.desc(l), self.desc(r), f"comparison {f.op}"))
            return Cmp(f.op, l, r)
        if isinstance(f, Not):
            return Not(self.formula(f.f, scope))
        if isinstance(f, And):
            return And(tuple(self.formula(g, scope) for g in f.fs))
        if isinstance(f, Or):
            return Or(tuple(self.formula(g, scope) for g in f.fs))
        if isinstance(f, (Forall, Exists)):
            vs, guards, inner = self.declare(f.vars, scope)
            body = self.formula(f.body, inner)
            if guards:
                g = conj(guards)
                body = implies(g, body) if isinstance(f, Forall) else And((g, body))
            return type(f)(vs, body)
        if isinstance(f, ExtExists):
            vs, guards, inner = self.declare(f.vars, scope)
            body = self.formula(f.body, inner)
            if guards:
                body = conj(guards + [body])
            return ExtExists(f.op, f.bound, vs, body)
        if isinstance(f, Denotes):
            return Denotes(self.term(f.term, scope))
        if isinstance(f, GenQuant):
            return self.genquant(f, scope)
        raise TypeError(f"not a formula: {f!r}")

    def genquant(self, f, scope):
        flat = [v for t in f.tuples for v in t]
        vs, _, inner = self.declare(tuple(Var(v.name) for v in flat), scope)
        tuples, k = [], 0
        for t in f.tuples:
            tuples.append(vs[k:k + len(t)])
            k += len(t)
        if f.style == "in":
            cands = self.sig.matching(f.guard, kinds=("pred", "type"))
            if not self.res.views:
                cands = [c for c in cands if c.view is None]
            arities = {len(t) for t in tuples}
            cands = [c for c in cands if c.arity in arities and len(arities) == 1]
            sym = self.choose(cands, f.guard)
            for t in tuples:
                for v, at in zip(t, sym.args):
                    self.at_position(v, at, f"argument of {sym}")
            guard = sym
        else:
            guard = self.formula(f.guard, inner)
        body = self.formula(f.body, inner)
        return GenQuant(f.q, tuple(tuples), f.style, guard, body)

    # -------------------------------------------------------- rules
    def rule(self, r: Rule, scope):
        vs, guards, inner = self.declare(r.vars, scope)
        is_fn = r.value is not None
        ref = parse_ref(r.head.name)
        kinds = ("func",) if is_fn else ("pred",)
        cands = [c for c in self.sig.matching(ref, kinds=kinds, arity=len(r.head.args))
                 if not c.builtin and not c.constructor and c.view is None]
        s = self.choose(cands, r.head.name)
        args = tuple(self.term(a, inner) for a in r.head.args)
        for a, at in zip(args, s.args):
            self.at_position(a, at, f"argument of {s}")
        value = None
        if is_fn:
            value = self.term(r.value, inner)
            self.at_position(value, s.out, f"value of {s}")
        body = self.formula(r.body, inner)
        if guards:
            body = conj(guards + ([body] if body != TRUE else []))
        return Rule(vs, Atom(s.name, args, s), body, value)

    # -------------------------------------------------------- typing
    def solve_types(self):
        sig = self.sig
        for dl, dr, where in self.pairs:
            if dl[0] == "var" and dr[0] == "var":
                self.slots[dl[1]].links.append(dr[1])
                self.slots[dr[1]].links.append(dl[1])
            elif dl[0] == "var" and dr[0] == "type":
                self.slots[dl[1]].weak.append(dr[1])
            elif dr[0] == "var" and dl[0] == "type":
                self.slots[dr[1]].weak.append(dl[1])
        types = {}
        for s in self.slots:
            if s.declared is not None:
                types[s.id] = s.declared
            elif s.strong:
                types[s.id] = sig.lub(s.strong)
            elif s.weak:
                types[s.id] = sig.lub(s.weak)
        changed = True
        while changed:
            changed = False
            for s in self.slots:
                if s.id in types:
                    continue
                known = [types[o] for o in s.links if o in types]
                if known:
                    types[s.id] = sig.lub(known)
                    changed = True
        user_types = sig.user_types()
        for s in self.slots:
            if s.id not in types:
                if len(user_types) == 1:
                    types[s.id] = user_types[0]
                    continue
                raise TypeCheckError(f"cannot derive a type for variable {s.name}")
        return types

    def check(self, types):
        for d, ptype, where in self.checks:
            self.compatible(d, ptype, where, types)
        for dl, dr, where in self.pairs:
            tl = self.concrete(dl, types)
            tr = self.concrete(dr, types)
            if tl is not None and tr is not None:
                if not self.sig.compatible(tl, tr):
                    raise _Fail(f"{where} between types {tl} and {tr}")
            elif tl is not None:
                self.compatible(dr, tl, where, types)
            elif tr is not None:
                self.compatible(dl, tr, where, types)

    def concrete(self, d, types):
        if d[0] == "var":
            return types[d[1]]
        if d[0] == "type":
            return d[1]
        return None

    def compatible(self, d, ptype, where, types):
        if d[0] == "lit":
            if not self.res.literal_ok(d[1], ptype):
                raise _Fail(f"element {d[1]!r} cannot occur in a position of type {ptype} ({where})")
            return
        t = self.concrete(d, types)
        if not self.sig.compatible(t, ptype):
            raise _Fail(f"term of type {t} in a position of type {ptype} ({where})")


def _retype(n, types):
    """Replace slot placeholders in variable types by the solved types."""
    if isinstance(n, Var):
        if n.type is not None and n.type.startswith("?"):
            return Var(n.name, types[int(n.type[1:])])
        return n
    if isinstance(n, (Elem, PredSet, Symbol)) or n is None or isinstance(n, str):
        return n
    if isinstance(n, App):
        return replace(n, args=tuple(_retype(a, types) for a in n.args))
    if isinstance(n, Atom):
        return replace(n, args=tuple(_retype(a, types) for a in n.args))
    if isinstance(n, Agg):
        return Agg(n.fn, _retype(n.set, types))
    if isinstance(n, SetExpr):
        return SetExpr(tuple(_retype(v, types) for v in n.vars), _retype(n.cond, types),
                       tuple(_retype(t, types) for t in n.terms))
    if isinstance(n, Cmp):
        return Cmp(n.op, _retype(n.left, types), _retype(n.right, types))
    if isinstance(n, Not):
        return Not(_retype(n.f, types))
    if isinstance(n, (And, Or)):
        return type(n)(tuple(_retype(g, types) for g in n.fs))
    if isinstance(n, (Forall, Exists)):
        return type(n)(tuple(_retype(v, types) for v in n.vars), _retype(n.body, types))
    if isinstance(n, ExtExists):
        return ExtExists(n.op, n.bound, tuple(_retype(v, types) for v in n.vars), _retype(n.body, types))
    if isinstance(n, Denotes):
        return Denotes(_retype(n.term, types))
    if isinstance(n, GenQuant):
        tuples = tuple(tuple(_retype(v, types) for v in t) for t in n.tuples)
        return GenQuant(n.q, tuples, n.style, _retype(n.guard, types), _retype(n.body, types))
    if isinstance(n, Rule):
        return Rule(tuple(_retype(v, types) for v in n.vars), _retype(n.head, types),
                    _retype(n.body, types), _retype(n.value, types))
    raise TypeError(f"cannot retype {n!r}")


class Resolver:
    """Disambiguates and types formulas, terms, sets and rules over one vocabulary.

    ``domains`` (type name -> set of elements) lets literals stand in
    positions of user types when they belong to that type's domain.
    """

    def __init__(self, sig: Sig, domains=None, views=False, names_as_elements=False):
        self.sig = sig
        self.domains = domains
        self.views = views
        self.names_as_elements = names_as_elements
        self.allow_free = True

    def literal_ok(self, v, ptype) -> bool:
        if isinstance(v, bool):
            return False
        if isinstance(v, int) and self.sig.is_numeric(ptype):
            return True
        if isinstance(v, str) and self.sig.is_stringy(ptype):
            return True
        if self.domains is not None:
            dom = self.domains.get(ptype)
            return dom is not None and v in dom
        return False

    def known_element(self, name) -> bool:
        return self.domains is not None and any(name in d for d in self.domains.values())

    def _run(self, build):
        """Try every candidate combination; ``build(walk)`` returns the raw result."""
        probe = _Walk(self)
        build(probe)
        lists = [c for _, c in probe.cands]
        total = 1
        for c in lists:
            total *= len(c)
        if total > MAX_COMBINATIONS:
            raise TypeCheckError("too many overloaded names to disambiguate; qualify some of them")
        found, errors = [], []
        for combo in itertools.product(*lists):
            w = _Walk(self, combo)
            try:
                node = build(w)
                types = w.solve_types()
                w.check(types)
            except (_Fail, AmbiguityError) as e:
                errors.append(e)
                continue
            except TypeCheckError as e:
                if len(lists) and total > 1:
                    errors.append(e)
                    continue
                raise
            out = (_retype(node, types), w, types)
            if all(out[0] != f[0] for f in found):
                found.append(out)
        if not found:
            first = errors[0] if errors else TypeCheckError("no disambiguation")
            if isinstance(first, AmbiguityError):
                raise first
            raise TypeCheckError(f"no disambiguation: {first}", [str(e) for e in errors])
        if len(found) > 1:
            detail = []
            for (what, cands), picks in zip(probe.cands, zip(*[f[1].combo for f in found])):
                if len(set(picks)) > 1:
                    detail.append(f"{what}: " + ", ".join(s.fqn or str(s) for s in dict.fromkeys(picks)))
            raise AmbiguityError("ambiguous names, add detail: " + "; ".join(detail),
                                 [f[0] for f in found])
        return found[0]

    def _free_vars(self, w, types):
        return tuple(Var(s.name, types[s.id]) for s in w.free.values())

    def sentence(self, f):
        """Resolve a sentence; free names become universally quantified variables."""
        node, w, types = self._run(lambda w: w.formula(f, {}))
        free = self._free_vars(w, types)
        return desugar(Forall(free, node) if free else node)

    def formula(self, f, scope_vars=()):
        """Resolve a formula whose free variables are the given typed ``Var`` objects."""
        def build(w):
            scope = {}
            for v in scope_vars:
                s = w.new_slot(v.name, v.type)
                scope[v.name] = s
            return w.formula(f, scope)
        self.allow_free = False
        try:
            node, _, _ = self._run(build)
        finally:
            self.allow_free = True
        return desugar(node)

    def term(self, t):
        self.allow_free = False
        try:
            node, _, _ = self._run(lambda w: w.term(t, {}))
        finally:
            self.allow_free = True
        return desugar(node)

    def set_expr(self, s):
        self.allow_free = False
        try:
            node, _, _ = self._run(lambda w: w.set_expr(s, {}))
        finally:
            self.allow_free = True
        return desugar(node)

    def rule(self, r):
        node, w, types = self._run(lambda w: w.rule(r, {}))
        free = self._free_vars(w, types)
        node = desugar(node)
        return replace(node, vars=node.vars + free)

    def definition(self, d):
        return Definition(tuple(self.rule(r) for r in d.rules))

    def theory(self, th: Theory) -> Theory:
        sentences = [self.sentence(f) for f in th.sentences]
        defs = [self.definition(d) for d in th.definitions]
        return Theory(th.name, self.sig, sentences, defs)


# ---------------------------------------------------------------- desugaring

_fresh = itertools.count(1)


def fresh_var(type_name):
    return Var(f"v'{next(_fresh)}", type_name)


def term_type(t) -> str:
    """The declared type of a resolved term; ``None`` for a literal."""
    if isinstance(t, Var):
        return t.type
    if isinstance(t, App):
        return t.sym.out
    if isinstance(t, Agg):
        if t.fn in ("card", "sum", "prod"):
            return "int"
        s = t.set
        if isinstance(s, PredSet):
            return s.sym.args[0]
        return term_type(s.terms[0])
    if isinstance(t, Elem):
        if isinstance(t.value, int):
            return "int"
        if isinstance(t.value, str):
            return "string"
    return None


def desugar(n):
    """Rewrite generalized quantifiers, predicate sets and ``denotes`` into kernel form."""
    if isinstance(n, (Var, Elem)) or n is None:
        return n
    if isinstance(n, App):
        return replace(n, args=tuple(desugar(a) for a in n.args))
    if isinstance(n, Atom):
        return replace(n, args=tuple(desugar(a) for a in n.args))
    if isinstance(n, Agg):
        s = n.set
        if isinstance(s, PredSet):
            vs = tuple(fresh_var(a) for a in s.sym.args)
            terms = () if n.fn == "card" else (vs[0],)
            return Agg(n.fn, SetExpr(vs, Atom(s.sym.name, vs, s.sym), terms))
        return Agg(n.fn, desugar(s))
    if isinstance(n, SetExpr):
        return SetExpr(n.vars, desugar(n.cond), tuple(desugar(t) for t in n.terms))
    if isinstance(n, Cmp):
        return Cmp(n.op, desugar(n.left), desugar(n.right))
    if isinstance(n, Not):
        return Not(desugar(n.f))
    if isinstance(n, (And, Or)):
        return type(n)(tuple(desugar(g) for g in n.fs))
    if isinstance(n, (Forall, Exists)):
        return type(n)(n.vars, desugar(n.body))
    if isinstance(n, ExtExists):
        return ExtExists(n.op, n.bound, n.vars, desugar(n.body))
    if isinstance(n, Denotes):
        t = desugar(n.term)
        if isinstance(t, (Var, Elem)):
            return TRUE
        if not (isinstance(t, App) and not t.sym.builtin):
            # arithmetic and aggregate values may lie outside every finite type
            return Denotes(t)
        x = fresh_var(term_type(t))
        return Exists((x,), Cmp("=", t, x))
    if isinstance(n, GenQuant):
        body = desugar(n.body)
        vs = tuple(v for t in n.tuples for v in t)
        if n.style == "in":
            sym = n.guard
            if sym.kind == "type":
                guards = [Atom(sym.name, t, sym) for t in n.tuples
                          if t[0].type is None or t[0].type != sym.name]
            else:
                guards = [Atom(sym.name, t, sym) for t in n.tuples]
        else:
            guards = [desugar(n.guard)]
        if not guards:
            return (Forall if n.q == "!" else Exists)(vs, body)
        g = conj(guards)
        if n.q == "!":
            return Forall(vs, implies(g, body))
        return Exists(vs, And((g, body)))
    if isinstance(n, Rule):
        return Rule(n.vars, desugar(n.head), desugar(n.body), desugar(n.value))
    if isinstance(n, Definition):
        return Definition(tuple(desugar(r) for r in n.rules))
    if isinstance(n, Theory):
        return Theory(n.name, n.vocabulary, [desugar(f) for f in n.sentences],
                      [desugar(d) for d in n.definitions])
    raise TypeError(f"cannot desugar {n!r}")


# ---------------------------------------------------------------- checks

def check_welltyped(component, sig: Sig | None = None, domains=None) -> list:
    """Return a list of violation messages; empty when the component is well typed."""
    from .syntax import Vocabulary
    try:
        if isinstance(component, Vocabulary):
            Sig(component)
            return []
        if sig is None:
            raise TypeCheckError("a vocabulary is needed to check this component")
        r = Resolver(sig, domains)
        if isinstance(component, Theory):
            r.theory(component)
        elif isinstance(component, Definition):
            r.definition(component)
        elif isinstance(component, SetExpr):
            r.set_expr(component)
        elif isinstance(component, (Var, Elem, App, Agg)):
            r.term(component)
        else:
            r.sentence(component)
        return []
    except TypeCheckError as e:
        return e.violations or [str(e)]
