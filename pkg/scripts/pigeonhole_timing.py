"""Time the pigeonhole family with and without static symmetry breaking."""
import argparse
import time

from kbforge.inference import MxTask, model_expand
from kbforge.workspace import Workspace

TEMPLATE = """vocabulary PH is {{ type pigeon; type hole; pred sits[pigeon, hole]; }};
theory fit over PH is {{ !p: ?h: sits(p,h); !h p1 p2: sits(p1,h) & sits(p2,h) => p1 = p2; }};
structure s over PH is {{ pigeon = {{1..{n}}}; hole = {{1..{h}}}; }};"""


def timed(n, symmetry):
    ws = Workspace.from_text(TEMPLATE.format(n=n, h=n - 1))
    I = ws.structure("s")
    start = time.perf_counter()
    out = model_expand(MxTask(ws.theory("fit", I), I, symmetry=symmetry))
    return out.status, time.perf_counter() - start


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--plain-max", type=int, default=8, help="largest n solved without breaking")
    ap.add_argument("--broken-max", type=int, default=12, help="largest n solved with breaking")
    args = ap.parse_args()
    print(f"{'n':>3} {'breaking':>9} {'status':>7} {'seconds':>8}")
    for symmetry, top in ((False, args.plain_max), (True, args.broken_max)):
        for n in range(3, top + 1):
            status, secs = timed(n, symmetry)
            print(f"{n:>3} {'on' if symmetry else 'off':>9} {status:>7} {secs:>8.3f}")


if __name__ == "__main__":
    main()
