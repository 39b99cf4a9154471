"""Loading specification files and resolving their components."""
from __future__ import annotations

import os

from .errors import KBError, TypeCheckError
from .parser import flatten_includes, lookup, parse_specification
from .structure import PartialStructure, build_structure, check_integrity
from .syntax import Namespace, StructureDecl, TermDecl, Theory, Vocabulary
from .typecheck import Resolver
from .vocab import Sig, annotate_fqns


def merge_namespaces(into: Namespace, other: Namespace):
    """Add the entries of ``other`` to ``into``; namespaces of the same name combine."""
    for name, comp in other.entries.items():
        old = into.entries.get(name)
        if old is None:
            into.entries[name] = comp
        elif isinstance(old, Namespace) and isinstance(comp, Namespace):
            merge_namespaces(old, comp)
        else:
            raise KBError(f"duplicate component {name}")
    into.requires.extend(other.requires)
    into.includes.extend(other.includes)


def load_files(paths) -> Namespace:
    """Parse files and, transitively, the files they ``require`` (each loaded once)."""
    root = Namespace("global")
    seen = set()
    queue = [os.path.abspath(p) for p in paths]
    while queue:
        path = queue.pop(0)
        if path in seen:
            continue
        seen.add(path)
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise KBError(f"cannot read {path}: {e.strerror}") from None
        ns = parse_specification(text, path)
        base = os.path.dirname(path)
        for req in _requires(ns):
            queue.append(os.path.abspath(os.path.join(base, req)))
        _drop_requires(ns)
        merge_namespaces(root, ns)
    return root


def _requires(ns):
    out = list(ns.requires)
    for c in ns.entries.values():
        if isinstance(c, Namespace):
            out.extend(_requires(c))
    return out


def _drop_requires(ns):
    ns.requires = []
    for c in ns.entries.values():
        if isinstance(c, Namespace):
            _drop_requires(c)


class Workspace:
    """A loaded specification with include-flattened, lazily resolved components."""

    def __init__(self, root: Namespace):
        annotate_fqns(root)
        self.raw = root
        self.root = flatten_includes(root)
        self._sigs = {}

    @classmethod
    def from_files(cls, paths) -> "Workspace":
        return cls(load_files(paths))

    @classmethod
    def from_text(cls, text: str) -> "Workspace":
        return cls(parse_specification(text))

    # -------------------------------------------------------- lookup
    def components(self, kind=None) -> list:
        return [(path, c) for path, c in self.root.walk() if kind is None or isinstance(c, kind)]

    def find(self, name: str, kind):
        """Locate a component by (possibly qualified) name; returns ``(scope, component)``."""
        path = tuple(p for p in name.split("::") if p)
        if path and path[0] == "global":
            path = path[1:]
        hits = [(p, c) for p, c in self.components(kind) if p[-len(path):] == path]
        exact = [(p, c) for p, c in hits if p == path]
        if exact:
            hits = exact
        if not hits:
            raise KBError(f"no {kind.__name__.lower()} named {name}")
        if len(hits) > 1:
            raise KBError(f"{name} is ambiguous: " + ", ".join("::".join(p) for p, _ in hits))
        p, c = hits[0]
        return p[:-1], c

    def names(self) -> list:
        return ["::".join(p) for p, _ in self.components()]

    def sig_of(self, comp, scope=(), views=False) -> Sig:
        ref = comp.vocabulary
        voc, rest = lookup(self.root, scope, ref.path)
        if not isinstance(voc, Vocabulary) or rest:
            raise TypeCheckError(f"{comp.name}: unknown vocabulary {ref}")
        return self.sig(voc, views)

    def sig(self, voc, views=False) -> Sig:
        if isinstance(voc, str):
            _, voc = self.find(voc, Vocabulary)
        key = (id(voc), views)
        if key not in self._sigs:
            self._sigs[key] = Sig(voc, views=views)
        return self._sigs[key]

    # -------------------------------------------------------- resolution
    def structure(self, name: str) -> PartialStructure:
        scope, decl = self.find(name, StructureDecl)
        return build_structure(decl, self.sig_of(decl, scope))

    def theory(self, name: str, structure: PartialStructure | None = None) -> Theory:
        scope, th = self.find(name, Theory)
        sig = self.sig_of(th, scope)
        return Resolver(sig, domains=_hints(structure, sig)).theory(th)

    def term(self, name: str, structure: PartialStructure | None = None):
        scope, td = self.find(name, TermDecl)
        sig = self.sig_of(td, scope)
        return Resolver(sig, domains=_hints(structure, sig)).term(td.term), sig

    def vocabulary(self, name: str) -> Sig:
        return self.sig(name)

    def check(self) -> list:
        """Type errors and integrity violations over every component, as messages."""
        problems = []
        for path, c in self.components():
            label = "::".join(path)
            try:
                if isinstance(c, Vocabulary):
                    self.sig(c)
                elif isinstance(c, Theory):
                    self.theory(label)
                elif isinstance(c, TermDecl):
                    self.term(label)
                elif isinstance(c, StructureDecl):
                    s = self.structure(label)
                    problems += [f"{label}: {v}" for v in check_integrity(s)]
            except KBError as e:
                problems.append(f"{label}: {e}")
        return problems


def _hints(structure, sig):
    if structure is None:
        return None
    out = {}
    for t in sig.types:
        if structure.sig.types.get(t) is None:
            continue
        d = structure.domain(t)
        if d is not None:
            out[t] = set(d)
    return out
