"""Compare model expansion, propagation and orbit enumeration against brute force on random theories."""
import argparse
import os
import random
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "tests"))

from oracles import TheoryGen, brute_models, model_key, search_space, unsound_literals  # noqa: E402

from kbforge.inference import MxTask, model_expand, propagate  # noqa: E402
from kbforge.workspace import Workspace  # noqa: E402


def check(seed, limit):
    """None when skipped, else a list of problems found for this seed."""
    text = TheoryGen(random.Random(seed)).text()
    ws = Workspace.from_text(text)
    I = ws.structure("S")
    T = ws.theory("T", I)
    if search_space(T, I) > limit:
        return None
    expected = {model_key(M) for M in brute_models(T, I)}
    problems = []
    plain = model_expand(MxTask(T, I, nbmodels=0, symmetry=False))
    if {model_key(M) for M in plain.models} != expected:
        problems.append("models differ")
    orbits = model_expand(MxTask(T, I, nbmodels=0, orbits=True))
    if {model_key(M) for M in orbits.models} != expected:
        problems.append("orbit expansion differs")
    P = propagate(T, I)
    if P is None:
        if expected:
            problems.append("propagation claims unsat")
    elif unsound_literals(I, P, brute_models(T, I)):
        problems.append("unsound propagation")
    return problems


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--start", type=int, default=0)
    ap.add_argument("--limit", type=int, default=4000, help="largest brute-force search space")
    ap.add_argument("--show", action="store_true", help="print the text of failing theories")
    args = ap.parse_args()
    start = time.perf_counter()
    checked = failed = 0
    for seed in range(args.start, args.start + args.seeds):
        problems = check(seed, args.limit)
        if problems is None:
            continue
        checked += 1
        if problems:
            failed += 1
            print(f"seed {seed}: {', '.join(problems)}")
            if args.show:
                print(TheoryGen(random.Random(seed)).text())
    print(f"{checked} theories checked, {failed} with discrepancies, {time.perf_counter() - start:.1f}s")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
