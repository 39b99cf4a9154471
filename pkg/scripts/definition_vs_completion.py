"""Count models of a cyclic definition and of its completion on growing cycles without base edges."""
import argparse
import itertools

from kbforge.grounder import ground
from kbforge.groundtheory import parse_dimacs
from kbforge.solver import enumerate_models
from kbforge.workspace import Workspace

TEMPLATE = """vocabulary G is {{ type node; pred edge[node,node]; pred start[node]; pred reach[node]; }};
theory T over G is {{
    define {{
        !x: reach(x) <- start(x).
        !y: reach(y) <- ?x: reach(x) & edge(x,y).
    }};
}};
structure S over G is {{ node = {{1..{n}}}; edge = {{{edges}}}; start = {{}}; }};"""


def count_cnf(nvars, clauses):
    return sum(all(any((l > 0) == bits[abs(l) - 1] for l in c) for c in clauses)
               for bits in itertools.product([False, True], repeat=nvars))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max", type=int, default=5)
    args = ap.parse_args()
    print(f"{'cycle':>5} {'definition':>10} {'completion':>10}")
    for n in range(2, args.max + 1):
        edges = "; ".join(f"{i},{i % n + 1}" for i in range(1, n + 1))
        ws = Workspace.from_text(TEMPLATE.format(n=n, edges=edges))
        I = ws.structure("S")
        g = ground(ws.theory("T", I), I)
        with_rules = sum(1 for _ in enumerate_models(g))
        nvars, clauses = parse_dimacs(g.to_cnf(lossy=True))
        print(f"{n:>5} {with_rules:>10} {count_cnf(nvars, clauses):>10}")


if __name__ == "__main__":
    main()
