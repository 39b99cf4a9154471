"""Recursive-descent parser for specification files.

Names are kept as written (qualified names, signatures) and resolved later
by :mod:`kbforge.typecheck`.  Bare identifiers in term position become
:class:`Var` nodes; the type checker turns them into constants when a
0-ary symbol of that name exists.
"""
from __future__ import annotations

from .errors import IncludeError, ParseError, UnsupportedFeature
from .lexer import Token, tokenize
from .syntax import (
    Agg, And, App, Assignment, Atom, Cmp, Cons, Definition, Denotes, Elem, ExtExists,
    Exists, FALSE, Forall, GenQuant, Namespace, Not, Or, PredSet, Range, Ref, Rule,
    SetExpr, StructureDecl, Symbol, TRUE, TermDecl, Theory, TypeDecl, Var, Vocabulary,
)

CMP_OPS = ("=", "~=", "<", ">", "=<", ">=")
AGG_WORDS = {"#": "card", "card": "card", "count": "card", "sum": "sum", "prod": "prod",
             "min": "min", "max": "max"}
BUILTIN_TYPES = ("int", "nat", "string")


def parse_specification(source, filename: str = "<input>") -> Namespace:
    """Parse text (or a token list) into the root ``global`` namespace."""
    toks = tokenize(source) if isinstance(source, str) else list(source)
    return Parser(toks, filename).parse_root()


def parse_formula(text: str):
    p = Parser(tokenize(text))
    f = p.formula()
    p.expect_eof()
    return f


def parse_term(text: str):
    p = Parser(tokenize(text))
    t = p.term()
    p.expect_eof()
    return t


def parse_set(text: str):
    p = Parser(tokenize(text))
    s = p.set_or_formula_query()
    p.expect_eof()
    return s


class Parser:
    def __init__(self, toks, filename="<input>"):
        self.toks = list(toks)
        last = self.toks[-1] if self.toks else None
        line = last.line if last else 1
        col = (last.col + len(last.text)) if last else 1
        self.toks.append(Token("eof", "", line, col))
        self.i = 0
        self.filename = filename
        self._fresh = 0

    # ------------------------------------------------------------ token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts) -> bool:
        t = self.tok
        return t.kind in ("op", "punct", "ident") and t.text in texts

    def at_kw(self, *words) -> bool:
        return self.tok.kind == "ident" and self.tok.text in words

    def error(self, msg, expected=()):
        t = self.tok
        got = repr(t.text) if t.kind != "eof" else "end of input"
        raise ParseError(f"{msg}, got {got}", t.line, t.col, expected)

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text) -> Token:
        if self.tok.text == text and self.tok.kind in ("op", "punct", "ident"):
            return self.advance()
        self.error(f"expected {text!r}", [text])

    def accept(self, text) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "punct", "ident"):
            self.advance()
            return True
        return False

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error("expected a name", ["<name>"])
        return self.advance().text

    def expect_eof(self):
        if self.tok.kind != "eof":
            self.error("unexpected trailing input", ["<end>"])

    # ------------------------------------------------------------ blocks
    def parse_root(self) -> Namespace:
        root = Namespace("global")
        self.blocks(root, top=True)
        return root

    def blocks(self, ns: Namespace, top=False):
        while True:
            if top and self.tok.kind == "eof":
                return
            if not top and self.at("}"):
                return
            self.block(ns)

    def block(self, ns: Namespace):
        t = self.tok
        if self.at_kw("vocabulary"):
            v = self.vocabulary()
            self._add(ns, v.name, v, t)
        elif self.at_kw("theory"):
            th = self.theory()
            self._add(ns, th.name, th, t)
        elif self.at_kw("structure"):
            s = self.structure()
            self._add(ns, s.name, s, t)
        elif self.at_kw("term"):
            td = self.term_block()
            self._add(ns, td.name, td, t)
        elif self.at_kw("namespace"):
            self.advance()
            name = self.ident()
            self.accept("is")
            self.expect("{")
            sub = ns.entries.get(name)
            if not isinstance(sub, Namespace):
                sub = Namespace(name, fqn=f"{ns.fqn}::{name}")
                self._add(ns, name, sub, t)
            self.blocks(sub)
            self.expect("}")
            self.accept(";")
        elif self.at_kw("include"):
            self.advance()
            ns.includes.append(self.ref())
            self.expect(";")
        elif self.at_kw("require"):
            self.advance()
            if self.tok.kind == "string":
                ns.requires.append(self.advance().text)
            else:
                ns.requires.append(self.ident())
            self.expect(";")
        elif self.at_kw("procedure"):
            raise UnsupportedFeature(
                "unsupported feature: procedure blocks; use the CLI subcommands (mx, opt, query, ...) instead",
                t.line, t.col)
        else:
            self.error("expected a block",
                       ["vocabulary", "theory", "structure", "term", "namespace", "include", "require"])

    def _add(self, ns, name, comp, t):
        if name in ns.entries:
            old = ns.entries[name]
            if not (isinstance(old, Namespace) and isinstance(comp, Namespace)):
                raise ParseError(f"duplicate name {name!r} in namespace {ns.name}", t.line, t.col)
        ns.entries[name] = comp

    def _over(self):
        self.expect("over")
        return self.ref()

    # ------------------------------------------------------------ names
    def ref(self, allow_arity=True) -> Ref:
        path = [self.ident()]
        while self.at("::") and self.peek().kind == "ident":
            self.advance()
            path.append(self.ident())
        sig = None
        if self.at("["):
            sig = self.signature()
        arity = None
        if allow_arity and self.at("/") and self.peek().kind == "int":
            self.advance()
            arity = int(self.advance().text)
        return Ref(tuple(path), sig, arity)

    def signature(self):
        self.expect("[")
        args = []
        out = None
        if not self.at("]") and not self.at("->"):
            args.append(self.type_name())
            while self.accept(","):
                if self.at("]", "->"):
                    break
                args.append(self.type_name())
        if self.accept("->"):
            out = self.type_name()
        self.expect("]")
        return (tuple(args), out)

    def type_name(self) -> str:
        path = [self.ident()]
        while self.at("::") and self.peek().kind == "ident":
            self.advance()
            path.append(self.ident())
        return "::".join(path)

    # ------------------------------------------------------------ vocabulary
    def vocabulary(self) -> Vocabulary:
        self.expect("vocabulary")
        name = self.ident()
        self.accept("is")
        self.expect("{")
        v = Vocabulary(name)
        while not self.at("}"):
            if self.accept(";"):
                continue
            self.vocab_entry(v)
        self.expect("}")
        self.accept(";")
        return v

    def vocab_entry(self, v: Vocabulary):
        t = self.tok
        if self.at_kw("include"):
            self.advance()
            v.includes.append(self.ref())
            self.expect(";")
            return
        if self.at_kw("type"):
            self.advance()
            self.type_decl(v, t)
            while self.accept(","):
                self.type_decl(v, t)
            self.expect(";")
            return
        partial = False
        kind = None
        if self.at_kw("partial"):
            self.advance()
            partial = True
            kind = "func"
            self.accept("func")
        elif self.at_kw("pred"):
            self.advance()
            kind = "pred"
        elif self.at_kw("func"):
            self.advance()
            kind = "func"
        name = self.ident()
        if self.at_kw("isa") and kind is None:
            self.advance()
            self.expect("type")
            self.expect(";")
            v.isa.append(name)
            return
        args, out = (), None
        if self.at("["):
            args, out = self.signature()
        elif self.accept("->"):
            out = self.type_name()
        if kind is None:
            kind = "func" if out is not None else "pred"
        if kind == "func" and out is None:
            raise ParseError(f"function {name} needs an output type", t.line, t.col, ["->"])
        if kind == "pred" and out is not None:
            raise ParseError(f"predicate {name} cannot have an output type", t.line, t.col)
        sym = Symbol(kind, name, tuple(args), out, partial)
        if sym in v.symbols:
            raise ParseError(f"duplicate declaration of {sym}", t.line, t.col)
        v.symbols.append(sym)
        self.expect(";")

    def type_decl(self, v: Vocabulary, t):
        name = self.ident()
        sup, sub, cons = [], [], None
        while True:
            if self.at_kw("subtype"):
                self.advance()
                self.expect("of")
                sup.append(self.type_name())
                while self.accept(","):
                    sup.append(self.type_name())
            elif self.at_kw("supertype"):
                self.advance()
                self.expect("of")
                sub.append(self.type_name())
                while self.accept(","):
                    sub.append(self.type_name())
            elif self.at_kw("isa"):
                self.advance()
                sup.append(self.type_name())
            elif self.at_kw("constructed"):
                self.advance()
                self.expect("from")
                cons = self.constructors()
            else:
                break
        if name in v.types:
            raise ParseError(f"duplicate type {name}", t.line, t.col)
        v.types[name] = TypeDecl(name, tuple(sup), tuple(sub), cons)

    def constructors(self):
        braced = self.accept("{")
        out = []
        while True:
            if braced and self.at("}"):
                break
            cname = self.ident()
            args = ()
            if self.accept("("):
                a = [self.type_name()]
                while self.accept(","):
                    a.append(self.type_name())
                self.expect(")")
                args = tuple(a)
            elif self.at("["):
                args, _ = self.signature()
            out.append((cname, tuple(args)))
            if not self.accept(","):
                break
        if braced:
            self.expect("}")
        return tuple(out)

    # ------------------------------------------------------------ theory
    def theory(self) -> Theory:
        self.expect("theory")
        name = self.ident()
        voc = self._over()
        self.accept("is")
        self.expect("{")
        th = Theory(name, voc)
        while not self.at("}"):
            if self.accept(";"):
                continue
            if self.at_kw("include"):
                self.advance()
                th.includes.append(self.ref())
                self.expect(";")
            elif self.at_kw("define") or self.at("{"):
                th.definitions.append(self.definition())
            else:
                th.sentences.append(self.formula())
                self.end_statement()
        self.expect("}")
        self.accept(";")
        return th

    def end_statement(self):
        if self.accept(";") or self.accept("."):
            return
        if self.at("}"):
            return
        self.error("expected ';'", [";"])

    def definition(self) -> Definition:
        self.accept("define")
        self.expect("{")
        rules = []
        while not self.at("}"):
            if self.accept(";"):
                continue
            rules.append(self.rule())
            self.end_statement()
        self.expect("}")
        self.accept(";")
        return Definition(tuple(rules))

    def rule(self) -> Rule:
        vars_ = []
        guards = []
        while self.at("!"):
            self.advance()
            vs, gs = self.rule_vars()
            vars_.extend(vs)
            guards.extend(gs)
            self.expect(":")
        t = self.tok
        head = self.unary()
        value = None
        if isinstance(head, Atom):
            atom = head
        elif isinstance(head, Cmp) and head.op == "=" and isinstance(head.left, (App, Var)):
            lhs = head.left
            atom = Atom(lhs.name, lhs.args if isinstance(lhs, App) else ())
            value = head.right
        else:
            raise ParseError("a rule head must be an atom or f(t)=v", t.line, t.col)
        body = TRUE
        if self.accept("<-"):
            body = self.formula()
        if guards:
            body = And(tuple(guards) + ((body,) if body != TRUE else ()))
        return Rule(tuple(vars_), atom, body, value)

    def rule_vars(self):
        """Variables after ``!`` in a rule head; tuple guards over a set become body conditions."""
        vs, guards = [], []
        if self.at("("):
            tuples = self.var_tuples()
            self.expect("in")
            sname = str(self.ref())
            for tup in tuples:
                if len(tup) == 1:
                    vs.append(Var(tup[0].name, sname))
                else:
                    vs.extend(tup)
                    guards.append(Atom(sname, tuple(tup)))
            return vs, guards
        return self.typed_vars(), guards

    def var_tuples(self):
        tuples = []
        while self.at("("):
            self.advance()
            tup = [Var(self.ident())]
            while self.accept(","):
                tup.append(Var(self.ident()))
            self.expect(")")
            tuples.append(tuple(tup))
        return tuples

    def typed_vars(self):
        """``x y z``, ``x in T``, ``x in T, y in U`` and mixtures thereof."""
        out = []
        while True:
            if self.tok.kind != "ident" or self.tok.text in ("in", "sat"):
                if not out:
                    self.error("expected a variable", ["<variable>"])
                break
            name = self.advance().text
            if self.at_kw("in") and self.peek().kind == "ident":
                self.advance()
                out.append(Var(name, self.type_name()))
            else:
                out.append(Var(name))
            if self.at(","):
                # a comma continues the list only when another variable follows
                if self.peek().kind == "ident":
                    self.advance()
                    continue
                break
            if self.tok.kind != "ident" or self.tok.text in ("in", "sat"):
                break
        return out

    # ------------------------------------------------------------ formulas
    def formula(self):
        return self.equiv()

    def equiv(self):
        left = self.impl()
        while self.accept("<=>"):
            right = self.impl()
            left = And((Or((Not(left), right)), Or((left, Not(right)))))
        return left

    def impl(self):
        left = self.disj()
        if self.accept("=>"):
            right = self.impl()
            return Or((Not(left), right))
        if self.accept("<="):
            right = self.impl()
            return Or((left, Not(right)))
        return left

    def disj(self):
        fs = [self.conj()]
        while self.accept("|"):
            fs.append(self.conj())
        return fs[0] if len(fs) == 1 else Or(tuple(fs))

    def conj(self):
        fs = [self.unary()]
        while self.accept("&"):
            fs.append(self.unary())
        return fs[0] if len(fs) == 1 else And(tuple(fs))

    def unary(self):
        if self.accept("~"):
            return Not(self.unary())
        if self.at("!", "?"):
            return self.quantified()
        return self.primary()

    def quantified(self):
        q = self.advance().text
        ext = None
        if q == "?" and self.tok.kind == "op" and self.tok.text in CMP_OPS:
            op = self.advance().text
            if self.tok.kind != "int":
                self.error("expected a count after extended quantifier", ["<int>"])
            ext = (op, int(self.advance().text))
        if self.at("("):
            tuples = self.var_tuples()
            if self.at_kw("in"):
                self.advance()
                guard = str(self.ref())
                style = "in"
            else:
                self.expect("sat")
                guard = self.formula()
                style = "sat"
            self.expect(":")
            body = self.formula()
            if ext is not None:
                raise ParseError("counting quantifiers take plain variables", self.tok.line, self.tok.col)
            return GenQuant(q, tuple(tuples), style, guard, body)
        vs = self.typed_vars()
        if self.at_kw("sat"):
            self.advance()
            guard = self.formula()
            self.expect(":")
            body = self.formula()
            return GenQuant(q, (tuple(vs),), "sat", guard, body)
        self.expect(":")
        body = self.formula()
        if ext is not None:
            return ExtExists(ext[0], ext[1], tuple(vs), body)
        return (Forall if q == "!" else Exists)(tuple(vs), body)

    def primary(self):
        t = self.tok
        if self.at_kw("true"):
            self.advance()
            return TRUE
        if self.at_kw("false"):
            self.advance()
            return FALSE
        if self.at_kw("denotes", "exists") and self.peek().text == "(":
            self.advance()
            self.expect("(")
            term = self.term()
            self.expect(")")
            return Denotes(term)
        if self.at("("):
            save = self.i
            try:
                self.advance()
                f = self.formula()
                self.expect(")")
                if not (self.tok.kind == "op" and self.tok.text in CMP_OPS + ("+", "-", "*", "/", "%")):
                    return f
            except ParseError:
                pass
            self.i = save
        left = self.term()
        if self.tok.kind == "op" and self.tok.text in CMP_OPS:
            cmps = []
            while self.tok.kind == "op" and self.tok.text in CMP_OPS:
                op = self.advance().text
                right = self.term()
                cmps.append(Cmp(op, left, right))
                left = right
            return cmps[0] if len(cmps) == 1 else And(tuple(cmps))
        if isinstance(left, App):
            return Atom(left.name, left.args)
        if isinstance(left, Var):
            return Atom(left.name, ())
        raise ParseError("expected a formula", t.line, t.col, ["<atom>", "<comparison>"])

    # ------------------------------------------------------------ terms
    def term(self):
        left = self.mul_term()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.advance().text
            left = App(op, (left, self.mul_term()))
        return left

    def mul_term(self):
        left = self.unary_term()
        while self.tok.kind == "op" and self.tok.text in ("*", "/", "%"):
            op = self.advance().text
            left = App(op, (left, self.unary_term()))
        return left

    def unary_term(self):
        if self.at("-"):
            self.advance()
            if self.tok.kind == "int":
                return Elem(-int(self.advance().text))
            if self.tok.kind == "float":
                return Elem(-float(self.advance().text))
            return App("-", (Elem(0), self.unary_term()))
        return self.term_primary()

    def term_primary(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Elem(int(t.text))
        if t.kind == "float":
            self.advance()
            return Elem(float(t.text))
        if t.kind == "string":
            self.advance()
            return Elem(t.text)
        if self.at("("):
            self.advance()
            x = self.term()
            self.expect(")")
            return x
        if self.at("#") or (t.kind == "ident" and t.text in AGG_WORDS and self.peek().text in ("(", "{")):
            return self.aggregate()
        if t.kind == "ident":
            if t.text in ("min", "max") and self.peek().text == "[":
                self.advance()
                self.expect("[")
                self.accept("->")
                ty = self.type_name()
                self.expect("]")
                return App(f"{t.text}[->{ty}]", ())
            ref = self.ref(allow_arity=False)
            name = str(ref)
            if self.accept("("):
                args = []
                if not self.at(")"):
                    args.append(self.term())
                    while self.accept(","):
                        if self.at(")"):
                            break
                        args.append(self.term())
                self.expect(")")
                return App(name, tuple(args))
            if ref.sig is not None or len(ref.path) > 1:
                return App(name, ())
            return Var(name)
        self.error("expected a term", ["<term>"])

    def aggregate(self):
        word = self.advance().text
        fn = AGG_WORDS[word]
        if self.at("{"):
            return Agg(fn, self.set_expr())
        self.expect("(")
        if self.at("{"):
            s = self.set_expr()
        else:
            s = PredSet(str(self.ref()))
        self.expect(")")
        return Agg(fn, s)

    def set_expr(self) -> SetExpr:
        self.expect("{")
        vs = []
        if not self.at(":"):
            vs = self.typed_vars()
        self.expect(":")
        cond = self.formula()
        terms = ()
        if self.accept(":"):
            if self.at("("):
                save = self.i
                self.advance()
                first = self.term()
                if self.at(","):
                    ts = [first]
                    while self.accept(","):
                        ts.append(self.term())
                    self.expect(")")
                    terms = tuple(ts)
                else:
                    self.i = save
                    terms = (self.term(),)
            else:
                terms = (self.term(),)
        self.expect("}")
        return SetExpr(tuple(vs), cond, terms)

    def set_or_formula_query(self):
        if self.at("{"):
            return self.set_expr()
        return self.formula()

    # ------------------------------------------------------------ structure
    def structure(self) -> StructureDecl:
        self.expect("structure")
        name = self.ident()
        voc = self._over()
        self.accept("is")
        self.expect("{")
        s = StructureDecl(name, voc)
        while not self.at("}"):
            if self.accept(";"):
                continue
            if self.at_kw("include"):
                self.advance()
                s.includes.append(self.ref())
                self.expect(";")
                continue
            s.assignments.append(self.assignment())
            self.expect(";")
        self.expect("}")
        self.accept(";")
        return s

    def assignment(self) -> Assignment:
        ref = self.ref(allow_arity=False)
        mode = ""
        if self.at("::") and self.peek().text in ("ct", "cf"):
            self.advance()
            mode = self.advance().text
        elif len(ref.path) > 1 and ref.path[-1] in ("ct", "cf") and ref.sig is None:
            mode = ref.path[-1]
            ref = Ref(ref.path[:-1])
        self.expect("=")
        if self.at_kw("true"):
            self.advance()
            return Assignment(ref, mode, ((),))
        if self.at_kw("false"):
            self.advance()
            return Assignment(ref, mode, ())
        if not self.at("{"):
            return Assignment(ref, mode, self.element(), True)
        self.advance()
        items = []
        is_func = False
        while not self.at("}"):
            if self.accept(";"):
                continue
            item, arrow = self.struct_item()
            is_func = is_func or arrow
            items.append(item)
            if not self.at("}"):
                self.expect(";")
        self.expect("}")
        return Assignment(ref, mode, tuple(items), is_func)

    def struct_item(self):
        paren = False
        if self.at("(") :
            self.advance()
            paren = True
            if self.accept(")"):
                return (), False
        elems = [self.element()]
        if not paren and self.accept(".."):
            hi = self.element()
            return Range(elems[0], hi), False
        arrow = False
        while True:
            if self.accept(","):
                elems.append(self.element())
            elif self.accept("->"):
                elems.append(self.element())
                arrow = True
            else:
                break
        if paren:
            self.expect(")")
        return tuple(elems), arrow

    def element(self):
        t = self.tok
        if self.at("-") and self.peek().kind in ("int", "float"):
            self.advance()
            v = self.advance().text
            return -int(v) if "." not in v else -float(v)
        if t.kind == "int":
            self.advance()
            return int(t.text)
        if t.kind == "float":
            self.advance()
            return float(t.text)
        if t.kind == "string":
            self.advance()
            return t.text
        if t.kind == "ident":
            self.advance()
            if self.accept("("):
                args = [self.element()]
                while self.accept(","):
                    args.append(self.element())
                self.expect(")")
                return Cons(t.text, tuple(args))
            return t.text
        self.error("expected a domain element", ["<element>"])

    # ------------------------------------------------------------ term block
    def term_block(self) -> TermDecl:
        self.expect("term")
        name = self.ident()
        voc = self._over()
        self.accept("is")
        braced = self.accept("{")
        t = self.term()
        if braced:
            self.accept(";")
            self.expect("}")
        self.accept(";")
        return TermDecl(name, voc, t)


# ---------------------------------------------------------------- name lookup and includes

def lookup(root: Namespace, scope: tuple, path: tuple):
    """Resolve a component path from the namespace at ``scope`` outwards.

    Returns ``(component, rest)`` where ``rest`` is the unresolved suffix
    (non-empty only when the path descends into a vocabulary, e.g.
    ``V::courseOf``), or ``(None, None)``.
    """
    if path and path[0] == "global":
        scopes = [()]
        path = path[1:]
    else:
        scopes = [scope[:k] for k in range(len(scope), -1, -1)]
    for sc in scopes:
        ns = _namespace_at(root, sc)
        if ns is None:
            continue
        found = _walk(ns, path)
        if found[0] is not None:
            return found
    return None, None


def _namespace_at(root, scope):
    ns = root
    for name in scope:
        ns = ns.entries.get(name)
        if not isinstance(ns, Namespace):
            return None
    return ns


def _walk(ns, path):
    cur = ns
    for k, name in enumerate(path):
        if not isinstance(cur, Namespace):
            return cur, tuple(path[k:])
        if name not in cur.entries:
            return None, None
        cur = cur.entries[name]
    return cur, ()


def flatten_includes(root: Namespace) -> Namespace:
    """Return a copy of ``root`` with every ``include`` replaced by the referenced content."""
    from copy import deepcopy

    src = root
    out = deepcopy(root)
    done = {}
    active = []

    def key(scope, name):
        return "::".join(("global",) + scope + (name,))

    def flat_component(scope, name):
        k = key(scope, name)
        if k in done:
            return done[k]
        if k in active:
            cyc = active[active.index(k):] + [k]
            raise IncludeError("cyclic include: " + " -> ".join(cyc))
        active.append(k)
        comp = _namespace_at(out, scope).entries[name]
        if isinstance(comp, Vocabulary):
            _flatten_vocab(comp, scope)
        elif isinstance(comp, Theory):
            for ref in comp.includes:
                other, sc2, rest = resolve(scope, ref, Theory)
                comp.sentences = list(other.sentences) + list(comp.sentences)
                comp.definitions = list(other.definitions) + list(comp.definitions)
            comp.includes = []
        elif isinstance(comp, StructureDecl):
            for ref in comp.includes:
                other, sc2, rest = resolve(scope, ref, StructureDecl)
                comp.assignments = list(other.assignments) + list(comp.assignments)
            comp.includes = []
        active.pop()
        done[k] = comp
        return comp

    def resolve(scope, ref, kind):
        comp, rest = lookup(out, scope, ref.path)
        if comp is None:
            raise IncludeError(f"cannot resolve include target {ref}")
        sc = _scope_of(out, comp)
        if isinstance(comp, Namespace):
            if kind is not Namespace:
                raise IncludeError(f"include target {ref} is a namespace")
            return comp, sc, rest
        flat = flat_component(sc[:-1], sc[-1])
        if rest and not isinstance(flat, Vocabulary):
            raise IncludeError(f"cannot resolve include target {ref}")
        if kind is not None and not rest and not isinstance(flat, kind):
            raise IncludeError(f"include target {ref} is not a {kind.__name__.lower()}")
        return flat, sc, rest

    def _flatten_vocab(v: Vocabulary, scope):
        types, syms, isa = {}, [], []
        for ref in v.includes:
            other, sc, rest = resolve(scope, Ref(ref.path, None, None), Vocabulary)
            if not isinstance(other, Vocabulary):
                raise IncludeError(f"include target {ref} is not a vocabulary")
            if not rest:
                for tn, td in other.types.items():
                    types.setdefault(tn, td)
                for s in other.symbols:
                    if s not in syms:
                        syms.append(s)
                for n in other.isa:
                    if n not in isa:
                        isa.append(n)
                continue
            (sname,) = rest[-1:]
            picked = [s for s in other.symbols if s.name == sname
                      and (ref.sig is None or (s.args, s.out) == ref.sig)
                      and (ref.arity is None or s.arity == ref.arity)]
            if sname in other.types:
                _pull_type(other, sname, types)
            elif not picked:
                raise IncludeError(f"cannot resolve include target {ref}")
            for s in picked:
                if s not in syms:
                    syms.append(s)
                for tn in s.args + ((s.out,) if s.out else ()):
                    _pull_type(other, tn, types)
                if s.name in other.isa and s.name not in isa:
                    isa.append(s.name)
        for tn, td in v.types.items():
            types[tn] = td
        for s in v.symbols:
            if s not in syms:
                syms.append(s)
        for n in v.isa:
            if n not in isa:
                isa.append(n)
        v.types, v.symbols, v.isa, v.includes = types, syms, isa, []

    def _pull_type(voc, tn, types):
        if tn in BUILTIN_TYPES or tn in types:
            return
        td = voc.types.get(tn)
        if td is None:
            pred = [s for s in voc.symbols if s.name == tn and s.arity == 1]
            if pred and tn in voc.isa:
                for a in pred[0].args:
                    _pull_type(voc, a, types)
            return
        types[tn] = td
        for sup in td.supertypes:
            _pull_type(voc, sup, types)
        for _cname, cargs in td.constructors or ():
            for a in cargs:
                _pull_type(voc, a, types)

    def walk(ns, scope):
        for ref in ns.includes:
            other, sc, rest = resolve(scope, ref, Namespace)
            for k, v in other.entries.items():
                ns.entries.setdefault(k, v)
        ns.includes = []
        for name, comp in list(ns.entries.items()):
            if isinstance(comp, Namespace):
                walk(comp, scope + (name,))
            else:
                flat_component(scope, name)

    walk(out, ())
    del src
    return out


def _scope_of(root, comp, scope=()):
    for k, v in root.entries.items():
        if v is comp:
            return scope + (k,)
        if isinstance(v, Namespace):
            r = _scope_of(v, comp, scope + (k,))
            if r is not None:
                return r
    return None if scope else ()
