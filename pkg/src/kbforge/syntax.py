"""Immutable syntax objects shared by every stage of the pipeline.

Domain elements are plain ``int`` and ``str`` values plus :class:`Cons`
for elements of constructed types.  All AST nodes are frozen dataclasses,
so equality is structural and nodes can be used as dict keys.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Union


# ---------------------------------------------------------------- elements

@dataclass(frozen=True)
class Cons:
    """A domain element built by a constructor of a constructed type."""
    name: str
    args: tuple = ()
    rank: int = field(default=0, compare=False)

    def __str__(self):
        if not self.args:
            return self.name
        return f"{self.name}({','.join(format_element(a) for a in self.args)})"


Element = Union[int, str, Cons]

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_']*\Z")


def is_element(v) -> bool:
    return (isinstance(v, int) and not isinstance(v, bool)) or isinstance(v, (str, Cons))


def elem_key(e):
    """Sort key realising the global order: integers, then strings, then constructed values."""
    if isinstance(e, int):
        return (0, e)
    if isinstance(e, str):
        return (1, e)
    return (2, e.rank, e.name, tuple(elem_key(a) for a in e.args))


def tuple_key(t):
    return tuple(elem_key(e) for e in t)


def sort_elements(es: Iterable[Element]) -> list:
    return sorted(es, key=elem_key)


def sort_tuples(ts: Iterable[tuple]) -> list:
    return sorted(ts, key=tuple_key)


def format_element(e) -> str:
    if isinstance(e, int):
        return str(e)
    if isinstance(e, str):
        if _IDENT.match(e) and e not in KEYWORDS:
            return e
        return '"' + e.replace('\\', '\\\\').replace('"', '\\"') + '"'
    return str(e)


KEYWORDS = frozenset("""
vocabulary theory structure term namespace procedure include require over is
type pred func partial subtype supertype of constructed from isa define
in sat denotes exists true false sum prod min max card count
""".split())


# ---------------------------------------------------------------- symbols

@dataclass(frozen=True)
class Symbol:
    """A predicate, function or type symbol.

    Type symbols carry ``args == (name,)`` so they can be used as unary
    predicates.  ``view`` is set for the derived ``P_ct``/``P_cf`` symbols
    and ``base`` then points at the underlying symbol.
    """
    kind: str  # 'pred' | 'func' | 'type'
    name: str
    args: tuple = ()
    out: Optional[str] = None
    partial: bool = False
    fqn: str = field(default="", compare=False)
    builtin: bool = False
    constructor: bool = False
    view: Optional[str] = None
    base: Optional["Symbol"] = None

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_func(self) -> bool:
        return self.kind == 'func'

    @property
    def graph_arity(self) -> int:
        return len(self.args) + (1 if self.kind == 'func' else 0)

    def signature(self) -> str:
        if self.kind == 'func':
            return f"{self.name}[{','.join(self.args)}->{self.out}]"
        if self.kind == 'type':
            return self.name
        return f"{self.name}[{','.join(self.args)}]"

    def __str__(self):
        return self.signature()


@dataclass(frozen=True)
class TypeDecl:
    name: str
    supertypes: tuple = ()
    subtypes: tuple = ()
    constructors: Optional[tuple] = None  # tuple of (name, argtypes)
    builtin: Optional[str] = None  # None | 'int' | 'nat' | 'string'
    isa: bool = False  # introduced by ``P isa type`` from a unary predicate


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class Var:
    name: str
    type: Optional[str] = None

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Elem:
    value: Element

    def __str__(self):
        return format_element(self.value)


@dataclass(frozen=True)
class App:
    """Function application; ``name`` is the written reference, ``sym`` the resolved symbol."""
    name: str
    args: tuple = ()
    sym: Optional[Symbol] = None


@dataclass(frozen=True)
class SetExpr:
    vars: tuple
    cond: "Formula"
    terms: tuple = ()


@dataclass(frozen=True)
class PredSet:
    """A predicate used where a multiset is expected, e.g. ``#(Course)``."""
    name: str
    sym: Optional[Symbol] = None


@dataclass(frozen=True)
class Agg:
    fn: str  # card | sum | prod | min | max
    set: Union[SetExpr, PredSet]


Term = Union[Var, Elem, App, Agg]


# ---------------------------------------------------------------- formulas

@dataclass(frozen=True)
class Atom:
    name: str
    args: tuple = ()
    sym: Optional[Symbol] = None


@dataclass(frozen=True)
class Cmp:
    op: str  # = ~= < > =< >=
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    f: "Formula"


@dataclass(frozen=True)
class And:
    fs: tuple


@dataclass(frozen=True)
class Or:
    fs: tuple


@dataclass(frozen=True)
class Forall:
    vars: tuple
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    vars: tuple
    body: "Formula"


@dataclass(frozen=True)
class ExtExists:
    """Counting quantifier: the number of satisfying instantiations compared with ``bound``."""
    op: str
    bound: int
    vars: tuple
    body: "Formula"


@dataclass(frozen=True)
class Denotes:
    term: Term


@dataclass(frozen=True)
class GenQuant:
    """Generalized quantifier over tuples drawn from a set or a guard formula.

    ``style == 'in'``: ``!(x,y)(z,w) in S: body`` with ``guard`` the name S.
    ``style == 'sat'``: ``!(x,y) sat guard: body``.
    """
    q: str  # '!' or '?'
    tuples: tuple  # tuple of tuples of Var
    style: str
    guard: object
    body: "Formula"


TRUE = And(())
FALSE = Or(())

Formula = Union[Atom, Cmp, Not, And, Or, Forall, Exists, ExtExists, Denotes, GenQuant]


# ---------------------------------------------------------------- definitions and components

@dataclass(frozen=True)
class Rule:
    vars: tuple
    head: Atom  # for function rules: Atom(f, args) with ``value`` set
    body: Formula
    value: Optional[Term] = None

    @property
    def defines_function(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class Definition:
    rules: tuple

    def defined_symbols(self) -> list:
        seen = []
        for r in self.rules:
            s = r.head.sym
            if s is not None and s not in seen:
                seen.append(s)
        return seen

    def defined_names(self) -> list:
        seen = []
        for r in self.rules:
            if r.head.name not in seen:
                seen.append(r.head.name)
        return seen


@dataclass(frozen=True)
class Ref:
    """A (possibly qualified) name reference such as ``V::courseOf`` or ``P/2``."""
    path: tuple
    sig: Optional[tuple] = None  # (argtypes, outtype-or-None) when written as name[...]
    arity: Optional[int] = None

    @property
    def name(self) -> str:
        return self.path[-1]

    def __str__(self):
        s = "::".join(self.path)
        if self.sig is not None:
            args, out = self.sig
            s += "[" + ",".join(args) + (("->" + out) if out is not None else "") + "]"
        if self.arity is not None:
            s += f"/{self.arity}"
        return s


@dataclass
class Vocabulary:
    name: str
    types: dict = field(default_factory=dict)  # name -> TypeDecl
    symbols: list = field(default_factory=list)  # pred/func Symbols (types excluded)
    includes: list = field(default_factory=list)  # Refs
    isa: list = field(default_factory=list)  # names declared with ``P isa type``
    fqn: str = ""

    def type_symbol(self, name: str) -> Symbol:
        return Symbol('type', name, (name,), fqn=f"{self.fqn}::{name}")

    def all_symbols(self) -> list:
        return [self.type_symbol(t) for t in self.types] + list(self.symbols)

    def lookup(self, name: str) -> list:
        return [s for s in self.all_symbols() if s.name == name]

    def copy(self) -> "Vocabulary":
        return Vocabulary(self.name, dict(self.types), list(self.symbols), list(self.includes),
                          list(self.isa), self.fqn)

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return (self.name == other.name and self.types == other.types
                and self.symbols == other.symbols and self.includes == other.includes
                and self.isa == other.isa)


@dataclass
class Theory:
    name: str
    vocabulary: object  # Ref before resolution, Vocabulary after
    sentences: list = field(default_factory=list)
    definitions: list = field(default_factory=list)
    includes: list = field(default_factory=list)

    def __eq__(self, other):
        if not isinstance(other, Theory):
            return NotImplemented
        return (self.name == other.name and self.vocabulary == other.vocabulary
                and self.sentences == other.sentences and self.definitions == other.definitions
                and self.includes == other.includes)


@dataclass(frozen=True)
class Range:
    lo: Element
    hi: Element


@dataclass(frozen=True)
class Assignment:
    """One interpretation statement of a structure block."""
    target: Ref
    mode: str  # '' | 'ct' | 'cf'
    value: object  # tuple of tuples | Range | Element (0-ary function)
    is_func: bool = False  # tuples written with ``->``


@dataclass
class StructureDecl:
    name: str
    vocabulary: object
    assignments: list = field(default_factory=list)
    includes: list = field(default_factory=list)

    def __eq__(self, other):
        if not isinstance(other, StructureDecl):
            return NotImplemented
        return (self.name == other.name and self.vocabulary == other.vocabulary
                and self.assignments == other.assignments and self.includes == other.includes)


@dataclass
class TermDecl:
    name: str
    vocabulary: object
    term: Term

    def __eq__(self, other):
        if not isinstance(other, TermDecl):
            return NotImplemented
        return (self.name, self.vocabulary, self.term) == (other.name, other.vocabulary, other.term)


@dataclass
class Namespace:
    name: str
    entries: dict = field(default_factory=dict)
    requires: list = field(default_factory=list)
    includes: list = field(default_factory=list)
    fqn: str = "global"

    def __eq__(self, other):
        if not isinstance(other, Namespace):
            return NotImplemented
        return (self.name == other.name and self.entries == other.entries
                and self.requires == other.requires and self.includes == other.includes)

    def walk(self, prefix=()):
        """Yield ``(path, component)`` for every component, depth first."""
        for k, v in self.entries.items():
            if isinstance(v, Namespace):
                yield from v.walk(prefix + (k,))
            else:
                yield prefix + (k,), v


# ---------------------------------------------------------------- generic traversal

def children(node) -> tuple:
    if isinstance(node, (Var, Elem, PredSet)):
        return ()
    if isinstance(node, (App, Atom)):
        return node.args
    if isinstance(node, Agg):
        return (node.set,)
    if isinstance(node, SetExpr):
        return (node.cond,) + node.terms
    if isinstance(node, Cmp):
        return (node.left, node.right)
    if isinstance(node, Not):
        return (node.f,)
    if isinstance(node, (And, Or)):
        return node.fs
    if isinstance(node, (Forall, Exists, ExtExists)):
        return (node.body,)
    if isinstance(node, Denotes):
        return (node.term,)
    if isinstance(node, GenQuant):
        g = (node.guard,) if not isinstance(node.guard, str) else ()
        return g + (node.body,)
    raise TypeError(f"not an AST node: {node!r}")


def bound_here(node) -> tuple:
    if isinstance(node, (Forall, Exists, ExtExists, SetExpr)):
        return node.vars
    if isinstance(node, GenQuant):
        return tuple(v for t in node.tuples for v in t)
    return ()


def free_vars(node) -> set:
    """The free variables of a term or formula, as :class:`Var` objects."""
    out = {}

    def go(n, bound):
        if isinstance(n, Var):
            if n.name not in bound:
                out.setdefault(n.name, n)
            return
        inner = bound | {v.name for v in bound_here(n)}
        if isinstance(n, GenQuant):
            # the guard formula sees the quantified variables too
            for c in children(n):
                go(c, inner)
            return
        for c in children(n):
            go(c, inner)

    go(node, frozenset())
    return set(out.values())


def free_var_names(node) -> set:
    return {v.name for v in free_vars(node)}


def substitute(node, binding: Mapping):
    """Replace free variables by domain elements (or terms); bound occurrences are untouched."""
    b = {}
    for k, v in binding.items():
        name = k.name if isinstance(k, Var) else k
        b[name] = v if isinstance(v, (Var, Elem, App, Agg)) else Elem(v)
    return _subst(node, b)


def _subst(n, b):
    if not b:
        return n
    if isinstance(n, Var):
        return b.get(n.name, n)
    if isinstance(n, (Elem, PredSet)):
        return n
    if isinstance(n, App):
        return replace(n, args=tuple(_subst(a, b) for a in n.args))
    if isinstance(n, Atom):
        return replace(n, args=tuple(_subst(a, b) for a in n.args))
    if isinstance(n, Agg):
        return replace(n, set=_subst(n.set, b))
    if isinstance(n, Cmp):
        return replace(n, left=_subst(n.left, b), right=_subst(n.right, b))
    if isinstance(n, Not):
        return Not(_subst(n.f, b))
    if isinstance(n, And):
        return And(tuple(_subst(f, b) for f in n.fs))
    if isinstance(n, Or):
        return Or(tuple(_subst(f, b) for f in n.fs))
    if isinstance(n, Denotes):
        return Denotes(_subst(n.term, b))
    inner = {k: v for k, v in b.items() if k not in {v_.name for v_ in bound_here(n)}}
    if isinstance(n, SetExpr):
        return SetExpr(n.vars, _subst(n.cond, inner), tuple(_subst(t, inner) for t in n.terms))
    if isinstance(n, (Forall, Exists)):
        return type(n)(n.vars, _subst(n.body, inner))
    if isinstance(n, ExtExists):
        return replace(n, body=_subst(n.body, inner))
    if isinstance(n, GenQuant):
        guard = n.guard if isinstance(n.guard, str) else _subst(n.guard, inner)
        return replace(n, guard=guard, body=_subst(n.body, inner))
    raise TypeError(f"not an AST node: {n!r}")


def conj(fs) -> Formula:
    fs = tuple(fs)
    return fs[0] if len(fs) == 1 else And(fs)


def disj(fs) -> Formula:
    fs = tuple(fs)
    return fs[0] if len(fs) == 1 else Or(fs)


def implies(a, b) -> Formula:
    return Or((Not(a), b))


def symbols_in(node, acc=None) -> set:
    """All resolved symbols occurring in a node."""
    if acc is None:
        acc = set()
    if isinstance(node, (App, Atom)) and node.sym is not None:
        acc.add(node.sym)
    if isinstance(node, PredSet) and node.sym is not None:
        acc.add(node.sym)
    for c in children(node):
        if not isinstance(c, str):
            symbols_in(c, acc)
    return acc


def elements_in(node, acc=None) -> set:
    """Domain elements written literally in a node."""
    if acc is None:
        acc = set()
    if isinstance(node, Elem):
        acc.add(node.value)
    for c in children(node):
        if not isinstance(c, str):
            elements_in(c, acc)
    return acc
