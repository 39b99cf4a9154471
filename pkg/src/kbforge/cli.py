"""Command-line front end and interactive shell."""
from __future__ import annotations

import argparse
import logging
import os
import shlex
import sys
from dataclasses import dataclass, field, fields

from .errors import KBError
from .groundtheory import GroundTheory
from .inference import MxTask, ground_task, model_check, model_expand, normalize, optimize, propagate
from .parser import parse_set
from .printer import print_component
from .structure import Table, check_integrity
from .syntax import format_element
from .typecheck import Resolver
from .wfs import wfm
from .workspace import Workspace, _hints

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_UNSAT = 0, 1, 2, 10

log = logging.getLogger("kbforge")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")

    def exit(self, status=0, message=None):
        if message:
            sys.stderr.write(message)
        raise SystemExit(status)


@dataclass
class Options:
    """Session defaults; command-line flags override them per command."""
    nbmodels: int = 1
    seed: int | None = None
    symmetry: bool = True
    orbits: bool = False
    verbose: bool = False


@dataclass
class Session:
    files: list = field(default_factory=list)
    options: Options = field(default_factory=Options)
    _ws: Workspace | None = None

    def workspace(self, files=()) -> Workspace:
        if files:
            return Workspace.from_files(files)
        if not self.files:
            raise KBError("no files given")
        if self._ws is None:
            self._ws = Workspace.from_files(self.files)
        return self._ws

    def load(self, path):
        if not os.path.exists(path):
            raise KBError(f"cannot read {path}")
        self.files.append(path)
        self._ws = None
        self.workspace()


class _Style:
    def __init__(self, stream):
        self.on = not os.environ.get("NO_COLOR") and hasattr(stream, "isatty") and stream.isatty()

    def __call__(self, text, code):
        return f"\033[{code}m{text}\033[0m" if self.on else text


# ---------------------------------------------------------------- argument parsing

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kbforge", description="Model expansion and querying for typed first-order knowledge bases.")
    p.add_argument("-v", "--verbose", action="store_true", help="log pipeline timings")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def files(sp, required=True):
        sp.add_argument("files", nargs="+" if required else "*", metavar="FILE")

    def search(sp):
        sp.add_argument("--theory", required=True)
        sp.add_argument("--structure", required=True)
        sp.add_argument("--vout", help="output vocabulary")
        sp.add_argument("-n", "--nbmodels", type=int, help="number of models, 0 for all")
        sp.add_argument("--no-symmetry", dest="symmetry", action="store_false", default=None)
        sp.add_argument("--orbits", action="store_true", default=None,
                        help="expand symmetry-broken models to their full orbits")
        sp.add_argument("--seed", type=int)

    sp = sub.add_parser("check", help="parse, typecheck and integrity-check")
    files(sp)
    sp = sub.add_parser("mx", help="model expansion")
    files(sp, False)
    search(sp)
    sp = sub.add_parser("opt", help="minimize a term")
    files(sp, False)
    search(sp)
    sp.add_argument("--term", required=True)
    sp = sub.add_parser("query", help="evaluate a set expression")
    files(sp, False)
    sp.add_argument("--set", required=True, dest="set_expr")
    sp.add_argument("--structure", required=True)
    sp = sub.add_parser("wfm", help="well-founded model of the definitions of a theory")
    files(sp, False)
    sp.add_argument("--definition", required=True, help="theory holding the definitions")
    sp.add_argument("--structure", required=True)
    sp = sub.add_parser("propagate", help="literals implied by a theory")
    files(sp, False)
    sp.add_argument("--theory", required=True)
    sp.add_argument("--structure", required=True)
    sp = sub.add_parser("modelcheck", help="does a two-valued structure satisfy a theory")
    files(sp, False)
    sp.add_argument("--theory", required=True)
    sp.add_argument("--structure", required=True)
    sp = sub.add_parser("normalize", help="rewrite a theory")
    files(sp, False)
    sp.add_argument("--theory", required=True)
    sp.add_argument("--structure")
    sp.add_argument("--pass", dest="which", required=True)
    sp = sub.add_parser("ground", help="ground a theory")
    files(sp, False)
    search(sp)
    sp.add_argument("--term", help="objective term")
    out = sp.add_mutually_exclusive_group()
    out.add_argument("--cnf", metavar="PATH", help="write DIMACS CNF")
    out.add_argument("--ecnf", metavar="PATH", help="write the native ground format")
    sp.add_argument("--lossy", action="store_true", help="allow CNF export of rules via completion")
    sp = sub.add_parser("repl", help="interactive shell")
    files(sp, False)
    return p


# ---------------------------------------------------------------- commands

def _task(ws, args, opts: Options, term=None) -> MxTask:
    I = ws.structure(args.structure)
    T = ws.theory(args.theory, I)
    obj = ws.term(term, I)[0] if term else None
    n = args.nbmodels if args.nbmodels is not None else opts.nbmodels
    return MxTask(
        T, I,
        vout=ws.vocabulary(args.vout) if args.vout else None,
        objective=obj,
        nbmodels=n,
        symmetry=opts.symmetry if args.symmetry is None else args.symmetry,
        orbits=opts.orbits if args.orbits is None else args.orbits,
        seed=args.seed if args.seed is not None else opts.seed,
    )


def _log_stats(stats):
    for k, v in stats.items():
        if k.startswith("time_"):
            log.info("%s: %.3fs", k[5:], v)
        elif isinstance(v, (int, float)):
            log.info("%s: %s", k, v)


def _models(out, ctx, values=None):
    for k, M in enumerate(out.models, 1):
        ctx.emit(ctx.style(f"=== model {k} ===", "1"))
        if values:
            ctx.emit(f"// value: {values[k - 1]}")
        ctx.emit(M.to_text())


def cmd_check(ws, args, ctx):
    problems = ws.check()
    for p in problems:
        ctx.error(p)
    if problems:
        return EXIT_INPUT
    ctx.emit("ok")
    return EXIT_OK


def cmd_mx(ws, args, ctx):
    out = model_expand(_task(ws, args, ctx.opts))
    _log_stats(out.stats)
    if not out.sat:
        ctx.emit("unsat" + (f": {out.message}" if out.message else ""))
        return EXIT_UNSAT
    _models(out, ctx)
    return EXIT_OK


def cmd_opt(ws, args, ctx):
    out = optimize(_task(ws, args, ctx.opts, args.term),
                   callback=lambda M, v: log.info("improved: %s", v))
    _log_stats(out.stats)
    if not out.sat:
        ctx.emit("unsat" + (f": {out.message}" if out.message else ""))
        return EXIT_UNSAT
    _models(out, ctx, out.values)
    ctx.emit(f"// optimal: {'yes' if out.optimal else 'not proven'}")
    return EXIT_OK


def cmd_query(ws, args, ctx):
    from .query import query_set

    I = ws.structure(args.structure)
    sig = ws.sig(I.sig.voc, views=True)
    s = Resolver(sig, domains=_hints(I, sig), views=True, names_as_elements=True).set_expr(parse_set(args.set_expr))
    tuples = query_set(s, I)
    ctx.emit("{" + "; ".join(",".join(format_element(e) for e in t) for t in tuples) + "}")
    return EXIT_OK


def cmd_wfm(ws, args, ctx):
    I = ws.structure(args.structure)
    T = ws.theory(args.definition, I)
    if not T.definitions:
        raise KBError(f"theory {args.definition} has no definitions")
    out = I.copy()
    for d in T.definitions:
        m = wfm(d, I)
        for sym in d.defined_symbols():
            true = m.true.get(sym, set())
            unknown = m.unknown.get(sym, set())
            if I.space_finite(sym):
                cf = {t for t in I.space(sym) if t not in true and t not in unknown}
            else:
                cf = set()
            out.tables[sym] = Table(set(true), cf, not unknown)
    ctx.emit(out.to_text())
    return EXIT_OK


def cmd_propagate(ws, args, ctx):
    I = ws.structure(args.structure)
    J = propagate(ws.theory(args.theory, I), I)
    if J is None:
        ctx.emit("unsat")
        return EXIT_UNSAT
    ctx.emit(J.to_text())
    return EXIT_OK


def cmd_modelcheck(ws, args, ctx):
    I = ws.structure(args.structure)
    bad = check_integrity(I)
    for v in bad:
        ctx.emit(str(v))
    ok = not bad and model_check(ws.theory(args.theory, I), I)
    ctx.emit("model" if ok else "not a model")
    return EXIT_OK if ok else EXIT_UNSAT


def cmd_normalize(ws, args, ctx):
    I = ws.structure(args.structure) if args.structure else None
    T = normalize(ws.theory(args.theory, I), args.which, I)
    ctx.emit(print_component(T))
    return EXIT_OK


def cmd_ground(ws, args, ctx):
    g, info = ground_task(_task(ws, args, ctx.opts, args.term))
    if g is None:
        ctx.emit("unsat" + (f": {info.message}" if info.message else ""))
        g = GroundTheory(clauses=[[]])
    else:
        _log_stats(info)
    if args.cnf:
        text = g.to_cnf(lossy=args.lossy)
    else:
        text = g.to_text()
    path = args.cnf or args.ecnf
    if path:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as e:
            raise KBError(f"cannot write {path}: {e.strerror}") from None
        ctx.emit(f"wrote {path}: {g.natoms} atoms, {len(g.clauses)} clauses")
    else:
        ctx.emit(text.rstrip("\n"))
    return EXIT_OK


COMMANDS = {
    "check": cmd_check, "mx": cmd_mx, "opt": cmd_opt, "query": cmd_query, "wfm": cmd_wfm,
    "propagate": cmd_propagate, "modelcheck": cmd_modelcheck, "normalize": cmd_normalize,
    "ground": cmd_ground,
}


class _Context:
    def __init__(self, opts, out, err):
        self.opts = opts
        self.out, self.err = out, err
        self.style = _Style(out)
        self._err_style = _Style(err)

    def emit(self, text):
        self.out.write(text + "\n")

    def error(self, text):
        self.err.write(self._err_style(text, "31") + "\n")


def run(argv, session: Session | None = None, out=None, err=None) -> int:
    """Execute one command line; returns the exit status."""
    out = out or sys.stdout
    err = err or sys.stderr
    session = session or Session()
    ctx = _Context(session.options, out, err)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        ctx.error(str(e))
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return EXIT_OK if not e.code else EXIT_USAGE
    if args.verbose or session.options.verbose:
        logging.basicConfig(level=logging.INFO, format="%(message)s", stream=err, force=True)
    if args.command is None:
        ctx.error("kbforge: a command is required (try --help)")
        return EXIT_USAGE
    if args.command == "repl":
        for f in args.files:
            session.load(f)
        return repl(session, out=out, err=err)
    try:
        ws = session.workspace(args.files)
        return COMMANDS[args.command](ws, args, ctx)
    except KBError as e:
        ctx.error(f"error: {e}")
        return EXIT_INPUT


# ---------------------------------------------------------------- shell

def _set_option(opts: Options, text: str):
    name, eq, value = text.partition("=")
    name = name.strip()
    known = {f.name: f for f in fields(Options)}
    if not eq or name not in known:
        raise KBError(f"usage: :set OPTION=VALUE with OPTION one of {', '.join(known)}")
    value = value.strip()
    current = getattr(opts, name)
    if isinstance(current, bool):
        if value.lower() not in ("on", "off", "true", "false", "1", "0"):
            raise KBError(f"{name} takes on/off")
        setattr(opts, name, value.lower() in ("on", "true", "1"))
    elif name == "seed" and value.lower() in ("none", ""):
        opts.seed = None
    else:
        try:
            setattr(opts, name, int(value))
        except ValueError:
            raise KBError(f"{name} takes an integer") from None


class _Completer:
    def __init__(self, session: Session):
        self.session = session
        self.matches = []

    def words(self):
        out = [f":{c}" for c in ("load", "set", "list", "quit", "help")] + list(COMMANDS)
        out += [f"--{f}" for f in ("theory", "structure", "vout", "term", "set", "definition",
                                    "nbmodels", "no-symmetry", "orbits", "seed", "cnf", "ecnf")]
        if self.session.files:
            try:
                out += self.session.workspace().names()
            except KBError:
                pass
        return out

    def __call__(self, text, state):
        if state == 0:
            self.matches = sorted(w for w in set(self.words()) if w.startswith(text))
        return self.matches[state] if state < len(self.matches) else None


HELP = """commands:
  :load FILE          load a specification file
  :set OPTION=VALUE   nbmodels, seed, symmetry, orbits, verbose
  :list               list loaded components
  :quit               leave the shell
  any subcommand without files, e.g. mx --theory T --structure S"""


def repl(session: Session | None = None, inp=None, out=None, err=None) -> int:
    """Read commands until end of input; errors are reported and the loop continues."""
    session = session or Session()
    inp = inp or sys.stdin
    out = out or sys.stdout
    err = err or sys.stderr
    interactive = inp is sys.stdin and inp.isatty()
    if interactive:
        try:
            import readline

            readline.set_completer(_Completer(session))
            readline.set_completer_delims(" \t")
            readline.parse_and_bind("tab: complete")
        except ImportError:
            pass
    ctx = _Context(session.options, out, err)
    while True:
        if interactive:
            try:
                line = input("kbforge> ")
            except EOFError:
                out.write("\n")
                break
            except KeyboardInterrupt:
                out.write("\n")
                continue
        else:
            line = inp.readline()
            if not line:
                break
        line = line.strip()
        if not line or line.startswith("//"):
            continue
        try:
            if line in (":quit", ":q", ":exit"):
                break
            if line == ":help":
                ctx.emit(HELP)
            elif line.startswith(":load"):
                path = line[5:].strip()
                if not path:
                    raise KBError("usage: :load FILE")
                session.load(path)
                ctx.emit(f"loaded {path}")
            elif line.startswith(":set"):
                _set_option(session.options, line[4:])
            elif line == ":list":
                ws = session.workspace()
                for path, c in ws.components():
                    ctx.emit(f"{type(c).__name__.lower()} {'::'.join(path)}")
            elif line.startswith(":"):
                raise KBError(f"unknown command {line.split()[0]} (try :help)")
            else:
                argv = shlex.split(line)
                if argv and argv[0] == "repl":
                    raise KBError("already in the shell")
                run(argv, session, out, err)
        except (KBError, ValueError) as e:
            ctx.error(f"error: {e}")
    return EXIT_OK


def main(argv=None) -> int:
    status = run(sys.argv[1:] if argv is None else argv)
    sys.exit(status)


if __name__ == "__main__":
    main()
