"""Propositional theories produced by grounding and consumed by the solver."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import GroundingError, KBError


@dataclass
class AggConstraint:
    """``head <=> fn{w : l in elems} op bound``; min/max over an empty set is false."""
    head: int
    fn: str  # card | sum | prod | min | max
    elems: list  # (weight, literal)
    op: str  # = ~= < > =< >=
    bound: int


@dataclass
class GroundRule:
    """``head <- AND(body)`` or ``head <- OR(body)`` inside definition ``defn``."""
    head: int
    kind: str  # 'and' | 'or'
    body: list
    defn: int = 0


@dataclass
class GroundTheory:
    natoms: int = 0
    origins: list = field(default_factory=lambda: [None])  # index = atom id
    clauses: list = field(default_factory=list)
    rules: list = field(default_factory=list)
    aggregates: list = field(default_factory=list)
    objective: list | None = None  # (weight, literal) list
    objective_offset: int = 0
    fixed: list = field(default_factory=list)
    symmetries: list = field(default_factory=list)  # dict atom -> atom
    output_atoms: set = field(default_factory=set)
    atom_ids: dict = field(default_factory=dict)  # origin key -> id

    def new_atom(self, origin) -> int:
        self.natoms += 1
        self.origins.append(origin)
        return self.natoms

    def atom(self, key, origin=None) -> int:
        a = self.atom_ids.get(key)
        if a is None:
            a = self.new_atom(origin if origin is not None else key)
            self.atom_ids[key] = a
        return a

    def is_symbol_atom(self, a: int) -> bool:
        o = self.origins[a]
        return isinstance(o, tuple) and len(o) == 3 and o[0] == "sym"

    def defined_atoms(self) -> set:
        return {r.head for r in self.rules}

    # -------------------------------------------------------- export
    def to_cnf(self, lossy: bool = False) -> str:
        """DIMACS text; rules and aggregates are refused unless ``lossy``."""
        clauses = [list(c) for c in self.clauses]
        if self.rules or self.aggregates:
            if not lossy:
                raise GroundingError("theory has rules or aggregates; CNF export would be lossy")
            clauses += completion_clauses(self.rules)
        n = self.natoms
        out = [f"p cnf {n} {len(clauses)}"]
        out += [" ".join(str(l) for l in c) + " 0" for c in clauses]
        return "\n".join(out) + "\n"

    def to_text(self) -> str:
        """Line-oriented native format."""
        lines = [f"c ground theory with {self.natoms} atoms"]
        for c in self.clauses:
            lines.append("CLAUSE " + " ".join(str(l) for l in c))
        for r in self.rules:
            lines.append(f"RULE {r.head} <- {r.kind.upper()} " + " ".join(str(l) for l in r.body)
                         + (f" ; {r.defn}" if r.defn else ""))
        for g in self.aggregates:
            els = " ".join(f"({w},{l})" for w, l in g.elems)
            lines.append(f"AGG {g.head} <=> {g.fn} {g.op} {g.bound} : {els}")
        if self.objective is not None:
            els = " ".join(f"({w},{l})" for w, l in self.objective)
            lines.append(f"MIN {self.objective_offset} : {els}")
        for a in range(1, self.natoms + 1):
            lines.append(f"ATOM {a} {origin_text(self.origins[a])}")
        return "\n".join(lines) + "\n"


def origin_text(o) -> str:
    from .syntax import format_element
    if isinstance(o, tuple) and len(o) == 3 and o[0] == "sym":
        sym, tup = o[1], o[2]
        return f"{sym.name}({','.join(format_element(e) for e in tup)})"
    if isinstance(o, tuple):
        return "aux:" + str(o[0])
    return "aux:" + str(o)


def parse_ground_text(text: str) -> GroundTheory:
    g = GroundTheory()
    maxatom = 0

    def lits(parts):
        nonlocal maxatom
        out = [int(p) for p in parts]
        for l in out:
            maxatom = max(maxatom, abs(l))
        return out

    def pairs(s):
        out = []
        for item in s.split():
            w, l = item.strip("()").split(",")
            out.append((int(w), lits([l])[0]))
        return out

    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        kw, _, rest = line.partition(" ")
        try:
            if kw == "CLAUSE":
                g.clauses.append(lits(rest.split()))
            elif kw == "RULE":
                head, _, body = rest.partition("<-")
                body, _, defn = body.partition(";")
                parts = body.split()
                g.rules.append(GroundRule(lits([head])[0], parts[0].lower(), lits(parts[1:]),
                                          int(defn) if defn.strip() else 0))
            elif kw == "AGG":
                left, _, els = rest.partition(":")
                head, _, spec = left.partition("<=>")
                fn, op, bound = spec.split()
                g.aggregates.append(AggConstraint(lits([head])[0], fn, pairs(els), op, int(bound)))
            elif kw == "MIN":
                off, _, els = rest.partition(":")
                g.objective = pairs(els)
                g.objective_offset = int(off)
            elif kw == "ATOM":
                a, _, name = rest.partition(" ")
                a = int(a)
                maxatom = max(maxatom, a)
                while len(g.origins) <= a:
                    g.origins.append(None)
                g.origins[a] = ("text", name)
            else:
                raise ValueError(kw)
        except (ValueError, IndexError):
            raise KBError(f"line {ln}: malformed ground theory line") from None
    g.natoms = maxatom
    while len(g.origins) <= maxatom:
        g.origins.append(None)
    return g


def completion_clauses(rules) -> list:
    """Clauses of ``head <=> AND/OR(body)`` for each rule."""
    out = []
    for r in rules:
        h = r.head
        if r.kind == "and":
            for l in r.body:
                out.append([-h, l])
            out.append([h] + [-l for l in r.body])
        else:
            out.append([-h] + list(r.body))
            for l in r.body:
                out.append([h, -l])
    return out


def parse_dimacs(text: str):
    """Return (number of variables, clause list) from DIMACS text."""
    n = 0
    clauses, cur = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            n = int(line.split()[2])
            continue
        for tok in line.split():
            v = int(tok)
            if v == 0:
                clauses.append(cur)
                cur = []
            else:
                cur.append(v)
    if cur:
        clauses.append(cur)
    return n, clauses
