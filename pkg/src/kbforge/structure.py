"""Three-valued structures: type domains plus certainly-true/certainly-false tables."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import StructureError
from .syntax import (
    Cons, Range, StructureDecl, Symbol, format_element, is_element, sort_elements, sort_tuples,
)
from .vocab import Sig


@dataclass
class Table:
    """ct/cf tuples of one symbol; ``closed`` means every tuple outside ct is false."""
    ct: set = field(default_factory=set)
    cf: set = field(default_factory=set)
    closed: bool = False

    def copy(self) -> "Table":
        return Table(set(self.ct), set(self.cf), self.closed)

    def by_input(self) -> dict:
        """Certain images of a function graph, keyed by input tuple."""
        key = (id(self.ct), len(self.ct))
        cache = self.__dict__.get("_idx")
        if cache is None or cache[0] != key:
            idx = {}
            for tup in self.ct:
                idx.setdefault(tup[:-1], []).append(tup[-1])
            cache = (key, idx)
            self.__dict__["_idx"] = cache
        return cache[1]


@dataclass(frozen=True)
class Violation:
    kind: str  # overlap | multi-image | no-image | subtype | out-of-type
    symbol: str
    witness: tuple
    message: str

    def __str__(self):
        return self.message


class PartialStructure:
    """Domains for types and ct/cf tables for predicates and function graphs."""

    def __init__(self, sig: Sig, name: str = "", domains=None, tables=None):
        self.sig = sig
        self.name = name
        self.given = dict(domains or {})  # type name -> tuple of elements, as interpreted
        self.tables = dict(tables or {})  # Symbol -> Table
        self._dom_cache = {}

    # -------------------------------------------------------- basics
    def copy(self, name=None) -> "PartialStructure":
        return PartialStructure(self.sig, self.name if name is None else name, dict(self.given),
                                {s: t.copy() for s, t in self.tables.items()})

    def symbols(self) -> list:
        return self.sig.user_symbols()

    def table(self, sym: Symbol) -> Table:
        t = self.tables.get(sym)
        if t is None:
            t = self.tables[sym] = Table()
        return t

    def set_domain(self, tname: str, elements):
        self.given[tname] = tuple(sort_elements(set(elements)))
        self._dom_cache.clear()

    # -------------------------------------------------------- domains
    def domain(self, tname: str):
        """Sorted elements of a type, or ``None`` when the type is not finitely interpreted."""
        if tname in self._dom_cache:
            return self._dom_cache[tname]
        d = self._domain(tname, set())
        self._dom_cache[tname] = d
        return d

    def _domain(self, tname, seen):
        if tname in seen:
            return None
        seen = seen | {tname}
        if tname in self.given:
            return self.given[tname]
        td = self.sig.types.get(tname)
        if td is None:
            raise StructureError(f"unknown type {tname}")
        if td.constructors is not None:
            out = []
            for rank, (cname, cargs) in enumerate(td.constructors):
                doms = [self._domain(a, seen) for a in cargs]
                if any(d is None for d in doms):
                    return None
                for args in itertools.product(*doms):
                    out.append(Cons(cname, tuple(args), rank))
            return tuple(sort_elements(out))
        subs = [u for u, d in self.sig.types.items() if tname in d.supertypes]
        subs += list(td.subtypes)
        if subs and td.builtin is None:
            acc = set()
            for u in subs:
                d = self._domain(u, seen)
                if d is None:
                    return None
                acc |= set(d)
            return tuple(sort_elements(acc))
        return None

    def enumerate_type(self, tname: str) -> list:
        d = self.domain(tname)
        if d is None:
            raise StructureError(f"type {tname} is not interpreted by a finite set")
        return list(d)

    def contains(self, tname: str, e):
        """Type membership: True, False, or None when unknown."""
        td = self.sig.types.get(tname)
        if td is None:
            return False
        d = self.domain(tname)
        if d is not None:
            return e in d
        if td.builtin == "int":
            return isinstance(e, int)
        if td.builtin == "nat":
            return isinstance(e, int) and e >= 0
        if td.builtin == "string":
            return isinstance(e, str)
        # not interpreted: rule out elements of incompatible roots
        for a in self.sig.ancestors(tname):
            if a in self.given or self.sig.types[a].builtin or self.sig.types[a].constructors is not None:
                if self.contains(a, e) is False:
                    return False
        return None

    def finite(self, tname) -> bool:
        return self.domain(tname) is not None

    def space(self, sym: Symbol):
        """All well-typed graph tuples of a symbol (finite types required)."""
        types = sym.args + ((sym.out,) if sym.kind == "func" else ())
        doms = []
        for t in types:
            d = self.domain(t)
            if d is None:
                raise StructureError(f"type {t} of {sym} is not finitely interpreted")
            doms.append(d)
        return itertools.product(*doms)

    def space_finite(self, sym: Symbol) -> bool:
        types = sym.args + ((sym.out,) if sym.kind == "func" else ())
        return all(self.finite(t) for t in types)

    # -------------------------------------------------------- truth values
    def value(self, sym: Symbol, tup: tuple) -> int:
        """0 false, 1 unknown, 2 true for a (graph) tuple of ``sym``."""
        if sym.kind == "type":
            c = self.contains(sym.name, tup[0])
            return 1 if c is None else (2 if c else 0)
        if sym.view is not None:
            v = self.value(sym.base, tup)
            return 2 if (v == 2 if sym.view == "ct" else v == 0) else 0
        t = self.tables.get(sym)
        if t is None:
            return 1
        if tup in t.ct:
            return 2
        if tup in t.cf or t.closed:
            return 0
        if sym.kind == "func":
            # another certain image rules this one out
            if tup[:-1] in t.by_input():
                return 0
        return 1

    def images(self, sym: Symbol, args: tuple):
        """Candidate images of a function: dict value -> truth (1 or 2); ``None`` if unbounded."""
        t = self.tables.get(sym)
        if t is not None:
            certain = t.by_input().get(args)
            if certain:
                return {certain[0]: 2} if len(certain) == 1 else {v: 2 for v in certain}
        dom = self.domain(sym.out)
        if dom is None:
            if t is not None and t.closed:
                return {}
            return None
        if t is None:
            return {v: 1 for v in dom}
        if t.closed:
            return {}
        return {v: 1 for v in dom if args + (v,) not in t.cf}

    def two_valued(self, sym: Symbol) -> bool:
        t = self.tables.get(sym)
        if t is None:
            return False
        if sym.kind == "func":
            inputs = t.by_input()
            if any(len(v) > 1 for v in inputs.values()):
                return False
            if not all(self.finite(a) for a in sym.args):
                return t.closed
            for args in itertools.product(*[self.domain(a) for a in sym.args]):
                if args in inputs:
                    continue
                if sym.partial and self.images(sym, args) == {}:
                    continue
                return False
            return True
        if t.closed:
            return True
        if not self.space_finite(sym):
            return False
        return all(tup in t.ct or tup in t.cf for tup in self.space(sym))

    def is_two_valued(self) -> bool:
        return all(self.two_valued(s) for s in self.symbols())

    def consistent(self) -> bool:
        return not check_integrity(self)

    def set_value(self, sym: Symbol, tup: tuple, truth: bool):
        t = self.table(sym)
        (t.ct if truth else t.cf).add(tup)

    def close(self):
        """Materialise the false tuples of closed tables over finite spaces."""
        for sym, t in self.tables.items():
            if t.closed and self.space_finite(sym):
                t.cf = {tup for tup in self.space(sym) if tup not in t.ct}
                t.closed = False
        return self

    # -------------------------------------------------------- printing
    def to_text(self) -> str:
        lines = [f"structure {self.name or 'S'} over {self.sig.name} is {{"]
        for tn in self.sig.user_types():
            if tn in self.given:
                lines.append(f"    {tn} = {_set_text(((e,) for e in self.given[tn]), False)};")
        overloaded = {s.name for s in self.symbols() if len(self.sig.by_name[s.name]) > 1}
        for sym in self.symbols():
            t = self.tables.get(sym)
            if t is None or (not t.ct and not t.cf and not t.closed):
                continue
            name = sym.signature() if sym.name in overloaded else sym.name
            fn = sym.kind == "func"
            if self.two_valued(sym):
                if sym.arity == 0 and not fn:
                    lines.append(f"    {name} = {'true' if () in t.ct else 'false'};")
                elif sym.arity == 0 and fn and len(t.ct) == 1:
                    lines.append(f"    {name} = {format_element(next(iter(t.ct))[0])};")
                else:
                    lines.append(f"    {name} = {_set_text(t.ct, fn)};")
                continue
            if t.ct:
                lines.append(f"    {name}::ct = {_set_text(t.ct, fn)};")
            cf = t.cf
            if t.closed and self.space_finite(sym):
                cf = {tup for tup in self.space(sym) if tup not in t.ct}
            if cf:
                lines.append(f"    {name}::cf = {_set_text(cf, fn)};")
        lines.append("};")
        return "\n".join(lines)

    def __str__(self):
        return self.to_text()

    def __eq__(self, other):
        if not isinstance(other, PartialStructure):
            return NotImplemented
        return precision_leq(self, other) and precision_leq(other, self)


def _set_text(tuples, is_func) -> str:
    tuples = list(tuples)
    items = []
    for tup in sort_tuples(tuples):
        els = [format_element(e) for e in tup]
        if is_func:
            items.append((",".join(els[:-1]) + "->" + els[-1]) if len(els) > 1 else "->" + els[0])
        else:
            items.append(",".join(els) if els else "()")
    if not is_func and all(len(t) == 1 for t in tuples) and items:
        vals = [t[0] for t in sort_tuples(tuples)]
        if all(isinstance(v, int) for v in vals) and len(vals) > 2 \
                and vals == list(range(vals[0], vals[0] + len(vals))):
            return "{" + f"{vals[0]}..{vals[-1]}" + "}"
    return "{" + "; ".join(items) + "}"


# ---------------------------------------------------------------- construction

def build_structure(decl: StructureDecl, sig: Sig) -> PartialStructure:
    """Interpret the assignments of a parsed structure block over ``sig``."""
    s = PartialStructure(sig, decl.name)
    pending = []
    for a in decl.assignments:
        name = a.target.name
        is_type = name in sig.types and a.target.sig is None
        if is_type:
            if sig.types[name].builtin is not None and name not in ("int", "nat", "string"):
                raise StructureError(f"cannot interpret builtin type {name}")
            if a.mode:
                raise StructureError(f"type {name} must be interpreted completely")
            if sig.types[name].constructors is not None:
                raise StructureError(f"constructed type {name} cannot be interpreted")
            elems = []
            for item in _items(a):
                if len(item) != 1:
                    raise StructureError(f"type {name} takes single elements")
                elems.append(item[0])
            s.given[name] = tuple(sort_elements(set(s.given.get(name, ())) | set(elems)))
        else:
            pending.append(a)
    s._dom_cache.clear()
    for a in pending:
        items = _items(a)
        sym = _target_symbol(sig, a, items)
        t = s.table(sym)
        for item in items:
            if sym.kind == "pred" and sym.arity == 0 and item == ():
                pass
            if len(item) != sym.graph_arity:
                raise StructureError(f"tuple {item} does not fit {sym}")
        if a.mode == "":
            t.ct |= set(items)
            t.closed = True
        elif a.mode == "ct":
            t.ct |= set(items)
        else:
            t.cf |= set(items)
    s._dom_cache.clear()
    return s


def _items(a) -> list:
    v = a.value
    if not isinstance(v, tuple):
        return [(v,)]
    out = []
    for item in v:
        if isinstance(item, Range):
            if not (isinstance(item.lo, int) and isinstance(item.hi, int)):
                raise StructureError("ranges need integer bounds")
            out.extend((i,) for i in range(item.lo, item.hi + 1))
        else:
            out.append(tuple(item))
    return out


def _target_symbol(sig: Sig, a, items) -> Symbol:
    cands = [c for c in sig.matching(a.target, kinds=("pred", "func"))
             if not c.builtin and not c.constructor and c.view is None]
    if not isinstance(a.value, tuple):
        cands = [c for c in cands if c.kind == "func" and c.arity == 0]
    lengths = {len(i) for i in items}
    if lengths:
        cands = [c for c in cands if c.graph_arity in lengths]
    if a.is_func:
        cands = [c for c in cands if c.kind == "func"]
    if len(cands) > 1:
        typed = [c for c in cands if _fits(sig, c, items)]
        cands = typed or cands
    if not cands:
        raise StructureError(f"no symbol {a.target} fits the given tuples")
    if len(cands) > 1:
        raise StructureError(f"ambiguous structure target {a.target}: "
                             + ", ".join(c.signature() for c in cands))
    return cands[0]


def _fits(sig, sym, items) -> bool:
    types = sym.args + ((sym.out,) if sym.kind == "func" else ())
    for item in items:
        for e, t in zip(item, types):
            if isinstance(e, int) and not sig.is_numeric(t) and sig.types[t].builtin is not None:
                return False
            if isinstance(e, str) and sig.is_numeric(t):
                return False
    return True


# ---------------------------------------------------------------- operations

def _same_vocabulary(i: PartialStructure, j: PartialStructure):
    if i.sig.voc != j.sig.voc:
        raise StructureError("structures are over different vocabularies")


def _cf_subset(i, j, sym) -> bool:
    ti, tj = i.tables.get(sym, Table()), j.tables.get(sym, Table())
    if tj.closed:
        return not (ti.cf & tj.ct) and (not ti.closed or ti.ct <= tj.ct)
    if ti.closed:
        if not i.space_finite(sym):
            return False
        return all(tup in tj.cf for tup in i.space(sym) if tup not in ti.ct)
    return ti.cf <= tj.cf


def precision_leq(i: PartialStructure, j: PartialStructure) -> bool:
    """True when ``j`` is at least as precise as ``i``."""
    _same_vocabulary(i, j)
    for tn in set(i.given) | set(j.given):
        if i.domain(tn) != j.domain(tn):
            return False
    for sym in set(i.tables) | set(j.tables):
        ti, tj = i.tables.get(sym, Table()), j.tables.get(sym, Table())
        if not ti.ct <= tj.ct:
            return False
        if not _cf_subset(i, j, sym):
            return False
    return True


def merge(i: PartialStructure, j: PartialStructure) -> PartialStructure:
    """Tablewise union; the result may be inconsistent."""
    _same_vocabulary(i, j)
    out = i.copy()
    for tn, d in j.given.items():
        out.given[tn] = tuple(sort_elements(set(out.given.get(tn, ())) | set(d)))
    out._dom_cache.clear()
    for sym, tj in j.tables.items():
        t = out.table(sym)
        if (t.closed or tj.closed) and out.space_finite(sym):
            out.close()
            tj = tj.copy()
            if tj.closed:
                tj.cf = {tup for tup in out.space(sym) if tup not in tj.ct}
                tj.closed = False
            t = out.table(sym)
        elif t.closed != tj.closed and (t.closed or tj.closed):
            if not ((t.closed and tj.ct <= t.ct) or (tj.closed and t.ct <= tj.ct)):
                raise StructureError(f"cannot merge the closed table of {sym} over an infinite type")
            t.closed = True
            t.ct = t.ct | tj.ct
            t.cf |= tj.cf
            continue
        t.ct |= tj.ct
        t.cf |= tj.cf
    return out


def project(i: PartialStructure, out_sig: Sig) -> PartialStructure:
    """Restrict a structure to the symbols and types of ``out_sig``."""
    out = PartialStructure(out_sig, i.name)
    for tn in out_sig.user_types():
        if tn not in i.sig.types:
            raise StructureError(f"type {tn} is not in the vocabulary of {i.name}")
        if tn in i.given or (i.domain(tn) is not None and out_sig.types[tn].constructors is None):
            d = i.domain(tn)
            if d is not None:
                out.given[tn] = d
    for sym in out_sig.user_symbols():
        match = [s for s in i.sig.user_symbols() if s == sym]
        if not match:
            raise StructureError(f"symbol {sym} is not in the vocabulary of {i.name}")
        t = i.tables.get(match[0])
        if t is not None:
            out.tables[sym] = t.copy()
    return out


def check_integrity(i: PartialStructure) -> list:
    """Concrete witnesses of inconsistency or ill-typed content."""
    out = []
    sig = i.sig
    for tn in sig.user_types():
        d = i.domain(tn)
        if d is None:
            continue
        for sup in sorted(sig.parents.get(tn, ())):
            for e in d:
                if i.contains(sup, e) is False:
                    out.append(Violation("subtype", tn, (e,),
                                         f"element {format_element(e)} of {tn} is not in supertype {sup}"))
    for sym in i.symbols():
        t = i.tables.get(sym)
        if t is None:
            continue
        types = sym.args + ((sym.out,) if sym.kind == "func" else ())
        for tup in sort_tuples(t.ct & t.cf):
            out.append(Violation("overlap", sym.name, tup,
                                 f"{sym.name}{_tup(tup)} is both certainly true and certainly false"))
        for tup in sort_tuples(t.ct | t.cf):
            for e, ty in zip(tup, types):
                if not is_element(e) or i.contains(ty, e) is False:
                    out.append(Violation("out-of-type", sym.name, tup,
                                         f"{sym.name}{_tup(tup)}: {format_element(e)} is not of type {ty}"))
                    break
        if sym.kind != "func":
            continue
        by_input = {}
        for tup in t.ct:
            by_input.setdefault(tup[:-1], []).append(tup[-1])
        for args in sort_tuples(by_input):
            vals = sort_elements(by_input[args])
            if len(vals) > 1:
                w = args + tuple(vals)
                out.append(Violation("multi-image", sym.name, w,
                                     f"{sym.name}{_tup(args)} has several images: "
                                     + ", ".join(format_element(v) for v in vals)))
        if sym.partial or not all(i.finite(a) for a in sym.args):
            continue
        for args in itertools.product(*[i.domain(a) for a in sym.args]):
            if args in by_input:
                continue
            if i.images(sym, args) == {}:
                out.append(Violation("no-image", sym.name, args,
                                     f"total function {sym.name} has no possible image for {_tup(args)}"))
    return out


def _tup(t) -> str:
    return "(" + ",".join(format_element(e) for e in t) + ")"
