"""Text rendering of components in re-parsable concrete syntax."""
from __future__ import annotations

from .syntax import (
    Agg, And, App, Assignment, Atom, Cmp, Definition, Denotes, Elem, ExtExists, Exists,
    Forall, GenQuant, Namespace, Not, Or, PredSet, Range, Ref, Rule, SetExpr, StructureDecl,
    Symbol, TermDecl, Theory, TypeDecl, Var, Vocabulary, format_element,
)

ARITH = ("+", "-", "*", "/", "%")
INDENT = "    "


def _name(n) -> str:
    if isinstance(n, (App, Atom)) and n.sym is not None and not n.sym.builtin:
        return n.sym.name if n.sym.view is None else n.sym.name
    return n.name


def term_str(t) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Elem):
        v = t.value
        return repr(v) if isinstance(v, float) else format_element(v)
    if isinstance(t, App):
        name = _name(t)
        if t.sym is not None and t.sym.builtin and t.sym.name in ("min", "max") and not t.args:
            return f"{t.sym.name}[{t.sym.out}]"
        if name in ARITH and len(t.args) == 2:
            return f"({term_str(t.args[0])} {name} {term_str(t.args[1])})"
        if not t.args:
            return name
        return f"{name}({', '.join(term_str(a) for a in t.args)})"
    if isinstance(t, Agg):
        word = "#" if t.fn == "card" else t.fn
        if isinstance(t.set, PredSet):
            return f"{word}({t.set.name})"
        return f"{word}({set_str(t.set)})"
    raise TypeError(f"not a term: {t!r}")


def vars_str(vs) -> str:
    return ", ".join(f"{v.name} in {v.type}" if v.type else v.name for v in vs)


def set_str(s: SetExpr) -> str:
    out = "{" + vars_str(s.vars) + ": " + formula_str(s.cond)
    if len(s.terms) == 1:
        out += " : " + term_str(s.terms[0])
    elif s.terms:
        out += " : (" + ", ".join(term_str(t) for t in s.terms) + ")"
    return out + "}"


def _atomic(f) -> bool:
    return isinstance(f, (Atom, Cmp, Denotes)) or (isinstance(f, (And, Or)) and not f.fs)


def _wrap(f) -> str:
    s = formula_str(f)
    return s if _atomic(f) or isinstance(f, Not) else f"({s})"


def formula_str(f) -> str:
    if isinstance(f, Atom):
        name = _name(f)
        return name if not f.args else f"{name}({', '.join(term_str(a) for a in f.args)})"
    if isinstance(f, Cmp):
        return f"{term_str(f.left)} {f.op} {term_str(f.right)}"
    if isinstance(f, Not):
        return "~" + _wrap(f.f)
    if isinstance(f, And):
        return " & ".join(_wrap(g) for g in f.fs) if f.fs else "true"
    if isinstance(f, Or):
        return " | ".join(_wrap(g) for g in f.fs) if f.fs else "false"
    if isinstance(f, (Forall, Exists)):
        q = "!" if isinstance(f, Forall) else "?"
        return f"{q}{vars_str(f.vars)}: {formula_str(f.body)}"
    if isinstance(f, ExtExists):
        return f"?{f.op}{f.bound} {vars_str(f.vars)}: {formula_str(f.body)}"
    if isinstance(f, Denotes):
        return f"denotes({term_str(f.term)})"
    if isinstance(f, GenQuant):
        tup = "".join("(" + ",".join(v.name for v in t) + ")" for t in f.tuples)
        if f.style == "in":
            return f"{f.q}{tup} in {f.guard}: {formula_str(f.body)}"
        return f"{f.q}{tup} sat {formula_str(f.guard)}: {formula_str(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def rule_str(r: Rule) -> str:
    prefix = f"!{vars_str(r.vars)}: " if r.vars else ""
    head = formula_str(r.head)
    if r.value is not None:
        head += f" = {term_str(r.value)}"
    if r.body == And(()):
        return prefix + head
    return f"{prefix}{head} <- {formula_str(r.body)}"


def definition_str(d: Definition, indent=INDENT) -> str:
    lines = [indent + "define {"]
    for r in d.rules:
        lines.append(indent + INDENT + rule_str(r) + ";")
    lines.append(indent + "};")
    return "\n".join(lines)


def _ref(r) -> str:
    return str(r) if isinstance(r, Ref) else getattr(r, "name", str(r))


def typedecl_str(td: TypeDecl) -> str:
    s = f"type {td.name}"
    if td.supertypes:
        s += " subtype of " + ", ".join(td.supertypes)
    if td.subtypes:
        s += " supertype of " + ", ".join(td.subtypes)
    if td.constructors is not None:
        cs = [c if not a else f"{c}({','.join(a)})" for c, a in td.constructors]
        s += " constructed from {" + ", ".join(cs) + "}"
    return s + ";"


def symbol_decl_str(s: Symbol) -> str:
    if s.kind == "pred":
        return f"pred {s.name}[{','.join(s.args)}];"
    kw = "partial func" if s.partial else "func"
    return f"{kw} {s.name}[{','.join(s.args)}->{s.out}];"


def vocabulary_str(v: Vocabulary, indent="") -> str:
    body = [f"include {_ref(r)};" for r in v.includes]
    body += [typedecl_str(td) for td in v.types.values() if td.builtin is None]
    body += [symbol_decl_str(s) for s in v.symbols if not s.builtin and not s.constructor]
    body += [f"{n} isa type;" for n in v.isa]
    if not body:
        return f"{indent}vocabulary {v.name} is {{ }};"
    inner = "\n".join(indent + INDENT + b for b in body)
    return f"{indent}vocabulary {v.name} is {{\n{inner}\n{indent}}};"


def theory_str(t: Theory, indent="") -> str:
    body = [indent + INDENT + f"include {_ref(r)};" for r in t.includes]
    body += [indent + INDENT + formula_str(f) + ";" for f in t.sentences]
    body += [definition_str(d, indent + INDENT) for d in t.definitions]
    if not body:
        return f"{indent}theory {t.name} over {_ref(t.vocabulary)} is {{ }};"
    return f"{indent}theory {t.name} over {_ref(t.vocabulary)} is {{\n" + "\n".join(body) + f"\n{indent}}};"


def _item_str(item, is_func) -> str:
    if isinstance(item, Range):
        return f"{format_element(item.lo)}..{format_element(item.hi)}"
    if len(item) == 0:
        return "()"
    els = [repr(e) if isinstance(e, float) else format_element(e) for e in item]
    if is_func:
        if len(els) == 1:
            return "->" + els[0]
        return ",".join(els[:-1]) + "->" + els[-1]
    return ",".join(els)


def assignment_str(a: Assignment) -> str:
    lhs = _ref(a.target) + (f"::{a.mode}" if a.mode else "")
    v = a.value
    if not isinstance(v, tuple):
        return f"{lhs} = {repr(v) if isinstance(v, float) else format_element(v)};"
    if v == ((),):
        return f"{lhs} = true;"
    if v == ():
        return f"{lhs} = {{}};"
    return f"{lhs} = {{" + "; ".join(_item_str(i, a.is_func) for i in v) + "};"


def structure_decl_str(s: StructureDecl, indent="") -> str:
    body = [f"include {_ref(r)};" for r in s.includes]
    body += [assignment_str(a) for a in s.assignments]
    if not body:
        return f"{indent}structure {s.name} over {_ref(s.vocabulary)} is {{ }};"
    inner = "\n".join(indent + INDENT + b for b in body)
    return f"{indent}structure {s.name} over {_ref(s.vocabulary)} is {{\n{inner}\n{indent}}};"


def termdecl_str(t: TermDecl, indent="") -> str:
    return f"{indent}term {t.name} over {_ref(t.vocabulary)} is {term_str(t.term)};"


def namespace_str(ns: Namespace, indent="") -> str:
    parts = [f'{indent}require "{r}";' for r in ns.requires]
    parts += [f"{indent}include {_ref(r)};" for r in ns.includes]
    for name, comp in ns.entries.items():
        if isinstance(comp, Namespace):
            inner = namespace_str(comp, indent + INDENT)
            parts.append(f"{indent}namespace {name} is {{\n{inner}\n{indent}}};")
        else:
            parts.append(print_component(comp, indent=indent))
    return "\n".join(parts)


def print_component(comp, fmt: str = "idp", indent="") -> str:
    """Render any component; parsing the output yields an equal component."""
    if fmt != "idp":
        raise ValueError(f"unknown output format {fmt!r}")
    if isinstance(comp, Namespace):
        return namespace_str(comp, indent) if comp.name == "global" else \
            f"{indent}namespace {comp.name} is {{\n{namespace_str(comp, indent + INDENT)}\n{indent}}};"
    if isinstance(comp, Vocabulary):
        return vocabulary_str(comp, indent)
    if isinstance(comp, Theory):
        return theory_str(comp, indent)
    if isinstance(comp, StructureDecl):
        return structure_decl_str(comp, indent)
    if isinstance(comp, TermDecl):
        return termdecl_str(comp, indent)
    if hasattr(comp, "to_text"):
        return comp.to_text()
    if isinstance(comp, Definition):
        return definition_str(comp, indent)
    if isinstance(comp, SetExpr):
        return set_str(comp)
    try:
        return formula_str(comp)
    except TypeError:
        return term_str(comp)
