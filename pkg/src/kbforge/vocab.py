"""Resolved vocabularies: type hierarchy, builtin symbols and name matching."""
from __future__ import annotations

from collections import defaultdict

from .errors import AmbiguityError, TypeCheckError
from .syntax import Ref, Symbol, TypeDecl, Vocabulary

NUMERIC_ROOT = "int"
BUILTIN_TYPE_DECLS = {
    "int": TypeDecl("int", builtin="int"),
    "nat": TypeDecl("nat", supertypes=("int",), builtin="nat"),
    "string": TypeDecl("string", builtin="string"),
}
ARITH_OPS = ("+", "-", "*", "/", "%")


def parse_ref(text: str) -> Ref:
    from .lexer import tokenize
    from .parser import Parser
    p = Parser(tokenize(text))
    r = p.ref()
    p.expect_eof()
    return r


class Sig:
    """A vocabulary ready for name resolution and typing.

    Holds the user symbols plus constructor symbols, type symbols and
    builtins.  ``views=True`` adds the derived ``P_ct``/``P_cf`` symbols.
    """

    def __init__(self, voc: Vocabulary, views: bool = False):
        self.voc = voc
        self.name = voc.name
        self.fqn = voc.fqn or f"global::{voc.name}"
        self.types = dict(BUILTIN_TYPE_DECLS)
        self.types.update(voc.types)
        for n in voc.isa:
            preds = [s for s in voc.symbols if s.name == n and s.kind == "pred" and s.arity == 1]
            if not preds:
                raise TypeCheckError(f"'{n} isa type' needs a unary predicate {n}")
            self.types[n] = TypeDecl(n, supertypes=preds[0].args, isa=True)
        for tn, td in list(self.types.items()):
            for ref in td.supertypes + td.subtypes:
                if ref not in self.types:
                    raise TypeCheckError(f"type {tn} refers to undeclared type {ref}")
        self._check_acyclic()
        self.parents = defaultdict(set)
        for tn, td in self.types.items():
            for sup in td.supertypes:
                self.parents[tn].add(sup)
            for sub in td.subtypes:
                self.parents[sub].add(tn)
        self._anc = {}
        for tn in self.types:
            self.ancestors(tn)

        syms = []
        for tn, td in self.types.items():
            syms.append(Symbol("type", tn, (tn,), fqn=f"{self.fqn}::{tn}", builtin=td.builtin is not None))
        for s in voc.symbols:
            if s.name in voc.isa and s.kind == "pred" and s.arity == 1:
                continue
            for t in s.args + ((s.out,) if s.out else ()):
                if t not in self.types:
                    raise TypeCheckError(f"symbol {s} uses undeclared type {t}")
            syms.append(s)
        for tn, td in self.types.items():
            for rank, (cname, cargs) in enumerate(td.constructors or ()):
                for a in cargs:
                    if a not in self.types:
                        raise TypeCheckError(f"constructor {cname} uses undeclared type {a}")
                syms.append(Symbol("func", cname, tuple(cargs), tn, fqn=f"{self.fqn}::{cname}",
                                   constructor=True))
        self.constructor_rank = {}
        for tn, td in self.types.items():
            for rank, (cname, cargs) in enumerate(td.constructors or ()):
                self.constructor_rank[(tn, cname)] = rank
        for op in ARITH_OPS:
            syms.append(Symbol("func", op, ("int", "int"), "int", partial=op in ("/", "%"),
                               fqn=f"builtin::{op}", builtin=True))
        for tn in self.types:
            if tn in ("int", "nat", "string"):
                continue
            syms.append(Symbol("func", "min", (), tn, partial=True, fqn=f"builtin::min[->{tn}]", builtin=True))
            syms.append(Symbol("func", "max", (), tn, partial=True, fqn=f"builtin::max[->{tn}]", builtin=True))
        for tn in self.roots():
            if tn in ("string", "nat"):
                continue
            for fn in ("succ", "pred"):
                syms.append(Symbol("func", fn, (tn,), tn, partial=True, fqn=f"builtin::{fn}[{tn}->{tn}]",
                                   builtin=True))
        if views:
            for s in list(syms):
                if s.builtin or s.constructor:
                    continue
                args = s.args + ((s.out,) if s.kind == "func" else ())
                for v in ("ct", "cf"):
                    syms.append(Symbol("pred", f"{s.name}_{v}", args, fqn=f"{s.fqn}_{v}", view=v, base=s))
        self.symbols = syms
        self.by_name = defaultdict(list)
        for s in syms:
            self.by_name[s.name].append(s)

    # ------------------------------------------------------------ hierarchy
    def _check_acyclic(self):
        # dependency edges follow the declarations, in both directions
        deps = defaultdict(set)
        for tn, td in self.types.items():
            deps[tn] |= set(td.supertypes) | set(td.subtypes)
        state = {}
        path = []

        def dfs(u):
            state[u] = 1
            path.append(u)
            for v in sorted(deps[u]):
                if state.get(v) == 1:
                    cyc = path[path.index(v):] + [v]
                    raise TypeCheckError("cyclic type hierarchy: " + " -> ".join(cyc))
                if v not in state:
                    dfs(v)
            path.pop()
            state[u] = 2

        for t in sorted(self.types):
            if t not in state:
                dfs(t)

    def ancestors(self, t: str) -> frozenset:
        """Reflexive-transitive supertypes of ``t``."""
        if t in self._anc:
            return self._anc[t]
        out = {t}
        for p in self.parents.get(t, ()):
            out |= self.ancestors(p)
        self._anc[t] = frozenset(out)
        return self._anc[t]

    def is_subtype(self, a: str, b: str) -> bool:
        return b in self.ancestors(a)

    def subtypes_of(self, t: str) -> list:
        return [u for u in self.types if u != t and t in self.ancestors(u)]

    def roots(self) -> list:
        return [t for t in self.types if not self.parents.get(t)]

    def root(self, t: str) -> str:
        rs = [a for a in self.ancestors(t) if not self.parents.get(a)]
        return sorted(rs)[0]

    def compatible(self, a: str, b: str) -> bool:
        return bool(self.ancestors(a) & self.ancestors(b))

    def lub(self, types) -> str:
        """The most specific common supertype; errors when none or several exist."""
        types = list(dict.fromkeys(types))
        common = set(self.ancestors(types[0]))
        for t in types[1:]:
            common &= self.ancestors(t)
        if not common:
            raise TypeCheckError(f"types {', '.join(types)} have no common supertype")
        minimal = [c for c in common if not any(d != c and c in self.ancestors(d) for d in common)]
        if len(minimal) > 1:
            raise AmbiguityError(
                f"types {', '.join(types)} have several most specific supertypes: {', '.join(sorted(minimal))}",
                sorted(minimal))
        return minimal[0]

    def is_numeric(self, t: str) -> bool:
        return NUMERIC_ROOT in self.ancestors(t)

    def is_stringy(self, t: str) -> bool:
        return "string" in self.ancestors(t)

    # ------------------------------------------------------------ lookup
    def matching(self, written: str, kinds=None, arity=None) -> list:
        ref = parse_ref(written) if not isinstance(written, Ref) else written
        out = []
        for s in self.by_name.get(ref.name, ()):
            if kinds is not None and s.kind not in kinds:
                continue
            if arity is not None and s.arity != arity:
                continue
            if ref.arity is not None and s.arity != ref.arity:
                continue
            if ref.sig is not None:
                args, out_t = ref.sig
                if s.kind == "type":
                    continue
                if s.builtin and s.name in ("min", "max") and not s.args:
                    if tuple(args) != () or out_t != s.out:
                        continue
                elif tuple(args) != s.args or out_t != s.out:
                    continue
            if len(ref.path) > 1:
                prefix = "::".join(ref.path[:-1])
                base = s.fqn.rsplit("::", 1)[0] if s.fqn else ""
                if not (base == prefix or base.endswith("::" + prefix)):
                    continue
            out.append(s)
        return out

    def type_named(self, written: str) -> str:
        name = written.split("::")[-1]
        if name not in self.types:
            raise TypeCheckError(f"unknown type {written}")
        return name

    def user_symbols(self) -> list:
        return [s for s in self.symbols if not s.builtin and not s.constructor and s.view is None
                and s.kind != "type"]

    def user_types(self) -> list:
        return [t for t, td in self.types.items() if td.builtin is None]

    def symbol(self, name: str, arity=None) -> Symbol:
        c = [s for s in self.by_name.get(name, ()) if arity is None or s.arity == arity]
        c = [s for s in c if not s.builtin] or c
        if len(c) != 1:
            raise TypeCheckError(f"cannot identify a unique symbol {name}")
        return c[0]


def annotate_fqns(root, prefix=("global",)):
    """Fill in the fully qualified names of vocabulary symbols, in place."""
    from .syntax import Namespace
    for name, comp in root.entries.items():
        if isinstance(comp, Namespace):
            annotate_fqns(comp, prefix + (name,))
        elif isinstance(comp, Vocabulary):
            comp.fqn = "::".join(prefix + (name,))
            comp.symbols = [_with_fqn(s, comp.fqn) for s in comp.symbols]


def _with_fqn(s: Symbol, vfqn: str) -> Symbol:
    if s.fqn:
        return s
    from dataclasses import replace
    return replace(s, fqn=f"{vfqn}::{s.signature()}")
