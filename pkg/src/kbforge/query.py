"""Three-valued evaluation of terms, formulas and set expressions over a structure.

Truth values are 0 (false), 1 (unknown) and 2 (true); connectives follow
the Kleene tables (and = min, or = max, not = 2 - x).  A term evaluates to
a dict mapping each value it may take to 2 (certainly) or 1 (possibly);
an empty dict means the term is undefined.  An atom is true when some
value of each argument makes it true, which is exactly the reading of
nested functions through their graph predicates.
"""
from __future__ import annotations

import itertools
import operator
from enum import IntEnum

from .errors import EvaluationError
from .structure import PartialStructure
from .syntax import (
    Agg, And, App, Atom, Cmp, Definition, Denotes, Elem, ExtExists, Exists, Forall, GenQuant,
    Not, Or, PredSet, SetExpr, Var, elem_key, sort_tuples,
)

MAX_AGG_VALUES = 200_000


class TV(IntEnum):
    FALSE = 0
    UNKNOWN = 1
    TRUE = 2


class _Undefined:
    def __repr__(self):
        return "UNDEFINED"


class _Unknown:
    def __repr__(self):
        return "UNKNOWN"


UNDEFINED = _Undefined()
UNKNOWN = _Unknown()
WILD = None  # term values that cannot be enumerated (unbounded and unknown)

_CMP = {
    "=": lambda a, b: a == b,
    "~=": lambda a, b: a != b,
    "<": lambda a, b: elem_key(a) < elem_key(b),
    ">": lambda a, b: elem_key(a) > elem_key(b),
    "=<": lambda a, b: elem_key(a) <= elem_key(b),
    ">=": lambda a, b: elem_key(a) >= elem_key(b),
}


def _div(a, b):
    if b == 0:
        return None
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _mod(a, b):
    if b == 0:
        return None
    return a - b * _div(a, b)


_ARITH = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": _div, "%": _mod}


class Evaluator:
    """Evaluates resolved (kernel or sugared) syntax against one structure."""

    def __init__(self, structure: PartialStructure, active_domain=False):
        self.s = structure
        self.sig = structure.sig
        self.active = None
        if active_domain:
            self.active = set()
            for d in structure.given.values():
                self.active |= set(d)
            for t in structure.tables.values():
                for tup in t.ct | t.cf:
                    self.active |= set(tup)

    # -------------------------------------------------------- helpers
    def domain(self, v: Var):
        d = self.s.domain(v.type)
        if d is None:
            if self.active is not None:
                from .syntax import sort_elements
                return sort_elements(e for e in self.active if self.s.contains(v.type, e))
            raise EvaluationError(f"variable {v.name} ranges over type {v.type}, which is not finite")
        return d

    def instances(self, vs, b):
        doms = [self.domain(v) for v in vs]
        for combo in itertools.product(*doms):
            nb = dict(b)
            for v, e in zip(vs, combo):
                nb[v.name] = e
            yield nb

    def _fits(self, tname, e, static_type):
        if static_type is not None and self.sig.is_subtype(static_type, tname):
            return 2
        c = self.s.contains(tname, e)
        return 1 if c is None else (2 if c else 0)

    # -------------------------------------------------------- terms
    def term(self, t, b):
        """Possible values of ``t``: dict value -> 1|2, or ``WILD`` when not enumerable."""
        if isinstance(t, Var):
            try:
                return {b[t.name]: 2}
            except KeyError:
                raise EvaluationError(f"unbound variable {t.name}") from None
        if isinstance(t, Elem):
            return {t.value: 2}
        if isinstance(t, App):
            return self.app(t, b)
        if isinstance(t, Agg):
            return self.aggregate(t, b)
        raise EvaluationError(f"not a term: {t!r}")

    def app(self, t: App, b):
        sym = t.sym
        argvals = [self.term(a, b) for a in t.args]
        if any(a is WILD for a in argvals):
            return WILD
        out = {}
        for combo in itertools.product(*[list(a.items()) for a in argvals]):
            args = tuple(v for v, _ in combo)
            w = min((tv for _, tv in combo), default=2)
            for a, at, arg_t in zip(args, sym.args, t.args):
                w = min(w, self._fits(at, a, _static(arg_t)) if not sym.builtin else 2)
            if w == 0:
                continue
            imgs = self.images(sym, args)
            if imgs is WILD:
                return WILD
            for v, tv in imgs.items():
                x = min(w, tv)
                if x > out.get(v, 0):
                    out[v] = x
        return out

    def images(self, sym, args):
        if sym.builtin:
            return self.builtin(sym, args)
        if sym.constructor:
            from .syntax import Cons
            rank = self.sig.constructor_rank[(sym.out, sym.name)]
            return {Cons(sym.name, args, rank): 2}
        imgs = self.s.images(sym, args)
        if imgs is None:
            return WILD
        return imgs

    def builtin(self, sym, args):
        n = sym.name
        if n in _ARITH:
            a, c = args
            if not (isinstance(a, int) and isinstance(c, int)):
                return {}
            r = _ARITH[n](a, c)
            return {} if r is None else {r: 2}
        if n in ("min", "max") and not args:
            d = self.s.domain(sym.out)
            if d is None:
                raise EvaluationError(f"{n}[{sym.out}] needs a finite type")
            if not d:
                return {}
            return {d[0] if n == "min" else d[-1]: 2}
        if n in ("succ", "pred"):
            (a,) = args
            d = self.s.domain(sym.out)
            if d is None:
                if isinstance(a, int):
                    return {a + 1 if n == "succ" else a - 1: 2}
                return {}
            try:
                k = d.index(a)
            except ValueError:
                return {}
            k = k + 1 if n == "succ" else k - 1
            return {d[k]: 2} if 0 <= k < len(d) else {}
        raise EvaluationError(f"unknown builtin {sym}")

    # -------------------------------------------------------- aggregates
    def set_members(self, s: SetExpr, b):
        """Per instantiation: (membership truth, term value dict or None for tuples)."""
        out = []
        for nb in self.instances(s.vars, b):
            m = self.formula(s.cond, nb)
            if m == 0:
                continue
            if not s.terms:
                out.append((m, None))
                continue
            tv = self.term(s.terms[0], nb)
            if tv is WILD:
                raise EvaluationError("aggregate term values cannot be enumerated")
            if not tv:
                continue
            out.append((m, tv))
        return out

    def aggregate(self, t: Agg, b):
        s = t.set
        if isinstance(s, PredSet):
            from .typecheck import desugar
            return self.aggregate(desugar(t), b)
        members = self.set_members(s, b)
        fn = t.fn
        certain = all(m == 2 and (tv is None or (len(tv) == 1 and 2 in tv.values()))
                      for m, tv in members)
        # options per member: value contributed, or None when absent
        opts = []
        for m, tv in members:
            o = []
            if tv is None:
                o.append(1)
            else:
                o.extend(tv.keys())
            maybe_absent = m < 2 or tv is not None and not (len(tv) == 1 and 2 in tv.values())
            if maybe_absent:
                o.append(None)
            opts.append(o)
        if fn == "card":
            states = {0}
            step = lambda acc, v: acc + 1
        elif fn == "sum":
            states = {0}
            step = lambda acc, v: acc + v
        elif fn == "prod":
            states = {1}
            step = lambda acc, v: acc * v
        elif fn == "min":
            states = {None}
            step = lambda acc, v: v if acc is None or elem_key(v) < elem_key(acc) else acc
        else:
            states = {None}
            step = lambda acc, v: v if acc is None or elem_key(v) > elem_key(acc) else acc
        for o in opts:
            nxt = set()
            for acc in states:
                for v in o:
                    if v is None:
                        nxt.add(acc)
                    else:
                        if fn in ("sum", "prod") and not isinstance(v, int):
                            raise EvaluationError(f"{fn} over a non-integer value {v!r}")
                        nxt.add(step(acc, v))
            states = nxt
            if len(states) > MAX_AGG_VALUES:
                raise EvaluationError("aggregate has too many possible values")
        states.discard(None)
        level = 2 if certain else 1
        return {v: level for v in states}

    # -------------------------------------------------------- formulas
    def formula(self, f, b) -> int:
        if isinstance(f, Atom):
            return self.atom(f, b)
        if isinstance(f, Cmp):
            lv = self.term(f.left, b)
            rv = self.term(f.right, b)
            if lv is WILD or rv is WILD:
                if lv == {} or rv == {}:
                    return 0
                return 1
            op = _CMP[f.op]
            best = 0
            for a, ta in lv.items():
                for c, tc in rv.items():
                    if op(a, c):
                        w = min(ta, tc)
                        if w > best:
                            best = w
                            if best == 2:
                                return 2
            return best
        if isinstance(f, Not):
            return 2 - self.formula(f.f, b)
        if isinstance(f, And):
            r = 2
            for g in f.fs:
                r = min(r, self.formula(g, b))
                if r == 0:
                    return 0
            return r
        if isinstance(f, Or):
            r = 0
            for g in f.fs:
                r = max(r, self.formula(g, b))
                if r == 2:
                    return 2
            return r
        if isinstance(f, Forall):
            r = 2
            for nb in self.instances(f.vars, b):
                r = min(r, self.formula(f.body, nb))
                if r == 0:
                    return 0
            return r
        if isinstance(f, Exists):
            r = 0
            for nb in self.instances(f.vars, b):
                r = max(r, self.formula(f.body, nb))
                if r == 2:
                    return 2
            return r
        if isinstance(f, ExtExists):
            lo = hi = 0
            for nb in self.instances(f.vars, b):
                v = self.formula(f.body, nb)
                if v == 2:
                    lo += 1
                if v >= 1:
                    hi += 1
            op = _CMP[f.op]
            outcomes = {op(c, f.bound) for c in range(lo, hi + 1)}
            return 2 if outcomes == {True} else 0 if outcomes == {False} else 1
        if isinstance(f, Denotes):
            tv = self.term(f.term, b)
            if tv is WILD:
                return 1
            if not tv:
                return 0
            return 2 if 2 in tv.values() else 1
        if isinstance(f, GenQuant):
            from .typecheck import desugar
            return self.formula(desugar(f), b)
        if isinstance(f, Definition):
            raise EvaluationError("definitions are evaluated by the well-founded semantics")
        raise EvaluationError(f"not a formula: {f!r}")

    def atom(self, f: Atom, b) -> int:
        sym = f.sym
        argvals = [self.term(a, b) for a in f.args]
        if any(a is WILD for a in argvals):
            return 0 if any(a == {} for a in argvals if a is not WILD) else 1
        types = sym.args + ((sym.out,) if sym.kind == "func" else ())
        best = 0
        for combo in itertools.product(*[list(a.items()) for a in argvals]):
            w = min((tv for _, tv in combo), default=2)
            if w <= best:
                continue
            tup = tuple(v for v, _ in combo)
            if sym.kind != "type" and sym.view is None:
                for e, ty, arg_t in zip(tup, types, f.args):
                    w = min(w, self._fits(ty, e, _static(arg_t)))
            if w <= best:
                continue
            w = min(w, self.s.value(sym, tup))
            if w > best:
                best = w
                if best == 2:
                    return 2
        return best


def _static(t):
    if isinstance(t, Var):
        return t.type
    if isinstance(t, App) and t.sym is not None and not t.sym.builtin:
        return t.sym.out
    return None


# ---------------------------------------------------------------- public API

def eval_formula(f, structure: PartialStructure, binding=None) -> TV:
    return TV(Evaluator(structure).formula(f, dict(binding or {})))


def eval_term(t, structure: PartialStructure, binding=None):
    """The value of a term, ``UNDEFINED``, or ``UNKNOWN`` when the structure does not pin it."""
    tv = Evaluator(structure).term(t, dict(binding or {}))
    if tv is WILD:
        return UNKNOWN
    if not tv:
        return UNDEFINED
    if len(tv) == 1:
        (v, w), = tv.items()
        if w == 2:
            return v
    return UNKNOWN


def query_set(s: SetExpr, structure: PartialStructure) -> list:
    """The sorted tuples satisfying a set expression; errors on unknown instances."""
    ev = Evaluator(structure, active_domain=True)
    out = set()
    for nb in ev.instances(s.vars, {}):
        v = ev.formula(s.cond, nb)
        if v == 1:
            name = _first_unknown(ev, s.cond, nb)
            raise EvaluationError(f"symbol {name} is not two-valued; query its _ct or _cf view")
        if v == 0:
            continue
        if s.terms:
            vals = [ev.term(t, nb) for t in s.terms]
            if any(x is WILD or len(x) != 1 or 2 not in x.values() for x in vals if x):
                raise EvaluationError("set term value is not known")
            if any(not x for x in vals):
                continue
            out.add(tuple(next(iter(x)) for x in vals))
        else:
            out.add(tuple(nb[v.name] for v in s.vars))
    return sort_tuples(out)


def _first_unknown(ev, f, b):
    from .syntax import symbols_in
    for sym in sorted(symbols_in(f), key=str):
        if sym.kind in ("pred", "func") and not sym.builtin and not sym.constructor and sym.view is None:
            if not ev.s.two_valued(sym):
                return sym.name
    return "?"
