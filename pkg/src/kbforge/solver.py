"""CDCL search over ground theories.

Clauses use two watched literals; conflicts are analysed to the first unique
implication point; branching follows VSIDS activities (ties to the lowest
atom id, polarity false) with Luby restarts.  Reified aggregates get a
bound-propagating module that explains each inference with a clause.
Definitions contribute completion clauses; when an assignment is total each
definition's well-founded model is recomputed from the assignment's opens
and mismatches are turned into loop or blocking clauses.
"""
from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field

from .groundtheory import AggConstraint, GroundTheory, completion_clauses

SAT, UNSAT, UNSAT_ASSUMPTIONS, UNKNOWN = "sat", "unsat", "unsat-assumptions", "unknown"


@dataclass
class SolveResult:
    status: str
    model: list | None = None  # index = atom id, values are bools
    stats: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status == SAT

    def true_atoms(self) -> list:
        return [a for a in range(1, len(self.model)) if self.model[a]] if self.model else []


def luby(i: int) -> int:
    """The i-th element (from 1) of the Luby sequence 1,1,2,1,1,2,4,..."""
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while True:
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1


_FLIP = {"<": ">=", ">=": "<", ">": "=<", "=<": ">", "=": "~=", "~=": "="}


def compare(a, op, b) -> bool:
    if op == "=":
        return a == b
    if op == "~=":
        return a != b
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "=<":
        return a <= b
    return a >= b


def _interval_status(lo, hi, op, b):
    """True/False when every/no value in [lo, hi] satisfies ``x op b``; else None."""
    if op == "=":
        if lo == hi == b:
            return True
        return False if b < lo or b > hi else None
    if op == "~=":
        if lo == hi == b:
            return False
        return True if b < lo or b > hi else None
    if op == "<":
        return True if hi < b else False if lo >= b else None
    if op == "=<":
        return True if hi <= b else False if lo > b else None
    if op == ">":
        return True if lo > b else False if hi <= b else None
    return True if lo >= b else False if hi < b else None


def agg_value(fn, weights):
    """Direct arithmetic value of an aggregate over a list of weights (None if undefined)."""
    if fn == "card":
        return len(weights)
    if fn == "sum":
        return sum(weights)
    if fn == "prod":
        return math.prod(weights)
    if not weights:
        return None
    return min(weights) if fn == "min" else max(weights)


def agg_holds(c: AggConstraint, weights) -> bool:
    v = agg_value(c.fn, weights)
    return v is not None and compare(v, c.op, c.bound)


def agg_status(fn, op, bound, certain, maybe):
    """Status of ``fn(S) op bound`` where S contains ``certain`` plus any subset of ``maybe``
    (lists of weights): True, False or None."""
    if fn in ("card", "sum"):
        base = sum(certain)
        lo = base + sum(w for w in maybe if w < 0)
        hi = base + sum(w for w in maybe if w > 0)
        return _interval_status(lo, hi, op, bound)
    if fn == "prod":
        # extremes of x * w are reached at the extremes of x, so tracking both ends is exact
        lo = hi = math.prod(certain)
        for w in maybe:
            ends = (lo, hi, lo * w, hi * w)
            lo, hi = min(ends), max(ends)
        return _interval_status(lo, hi, op, bound)
    # min / max: the achievable values are exact
    pick = min if fn == "min" else max
    outcomes = set()
    if certain:
        best = pick(certain)
        outcomes.add(best)
        for w in maybe:
            if pick(w, best) == w:
                outcomes.add(w)
        can_be_empty = False
    else:
        outcomes.update(maybe)
        can_be_empty = True
    results = {compare(v, op, bound) for v in outcomes}
    if can_be_empty:
        results.add(False)
    if results == {True}:
        return True
    if results == {False}:
        return False
    return None


class Solver:
    """A CDCL solver instance over one ground theory; clauses may be added between calls."""

    def __init__(self, g: GroundTheory, conflict_limit: int | None = None, seed: int | None = None):
        self.g = g
        n = g.natoms + 1  # one extra variable that is always true
        self.n = n
        self.true_var = n
        self.lv = [0] * (2 * n + 1)
        self.level = [0] * (n + 1)
        self.reason = [None] * (n + 1)
        self.watches = [[] for _ in range(2 * n + 1)]
        self.bins = [[] for _ in range(2 * n + 1)]
        self.trail = []
        self.trail_lim = []
        self.qhead = 0
        self.act = [0.0] * (n + 1)
        self.inc = 1.0
        if seed is not None:
            # small random initial activities vary the search while staying reproducible
            rng = random.Random(seed)
            self.act = [rng.random() * 1e-3 for _ in range(n + 1)]
        self.heap = [(-self.act[v], v) for v in range(1, n + 1)]
        heapq.heapify(self.heap)
        self.clauses = []
        self.learnts = []
        self.max_learnts = 1000
        self.ok = True
        self.conflicts = 0
        self.decisions = 0
        self.conflict_limit = conflict_limit
        self.aggs = []
        self.agg_occ = [()] * (n + 1)
        self.pending = set()
        self.seen = [False] * (n + 1)
        self._defs = None
        self.add_clause([self.true_var])
        seen = set()
        for c in g.clauses:
            key = tuple(sorted(set(c)))
            if key in seen:
                continue
            seen.add(key)
            self.add_clause(list(key))
        for c in completion_clauses(g.rules):
            self.add_clause(c)
        for a in g.aggregates:
            self.add_aggregate(a)
        self._prepare_definitions()

    # -------------------------------------------------------- basics
    def value(self, lit: int) -> int:
        return self.lv[lit]

    def decision_level(self) -> int:
        return len(self.trail_lim)

    def _enqueue(self, lit, why):
        v = lit if lit > 0 else -lit
        self.lv[lit] = 1
        self.lv[-lit] = -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = why
        self.trail.append(lit)

    def add_clause(self, lits) -> bool:
        """Add a permanent clause (at decision level 0)."""
        if not self.ok:
            return False
        if self.trail_lim:
            self.backtrack(0)
        lits = list(dict.fromkeys(lits))
        if any(-l in lits for l in lits):
            return True
        lits = [l for l in lits if self.lv[l] != -1 or self.level[abs(l)] > 0]
        if any(self.lv[l] == 1 for l in lits):
            return True
        if not lits:
            self.ok = False
            return False
        if len(lits) == 1:
            self._enqueue(lits[0], None)
            if self.propagate() is not None:
                self.ok = False
            return self.ok
        self.clauses.append(lits)
        self._watch(lits)
        return True

    def _watch(self, c):
        if len(c) == 2:
            self.bins[c[0]].append(c[1])
            self.bins[c[1]].append(c[0])
        else:
            self.watches[c[0]].append(c)
            self.watches[c[1]].append(c)

    def add_aggregate(self, c: AggConstraint):
        if self.trail_lim:
            self.backtrack(0)
        k = len(self.aggs)
        self.aggs.append(c)
        for v in {abs(c.head)} | {abs(l) for _, l in c.elems}:
            self.agg_occ[v] = self.agg_occ[v] + (k,)
        self.pending.add(k)
        if self.ok and self.propagate() is not None:
            self.ok = False

    def backtrack(self, lvl):
        if len(self.trail_lim) <= lvl:
            return
        lv, heap, act = self.lv, self.heap, self.act
        start = self.trail_lim[lvl]
        for lit in self.trail[start:]:
            v = lit if lit > 0 else -lit
            lv[lit] = 0
            lv[-lit] = 0
            self.reason[v] = None
            heapq.heappush(heap, (-act[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)
        self.pending.clear()
        if len(heap) > 6 * self.n + 100:
            self._rebuild_heap()

    def _rebuild_heap(self):
        self.heap = [(-self.act[v], v) for v in range(1, self.n + 1) if self.lv[v] == 0]
        heapq.heapify(self.heap)

    # -------------------------------------------------------- propagation
    def propagate(self):
        """Unit propagation over clauses and aggregates; returns a conflict clause or None."""
        lv, watches, bins, trail = self.lv, self.watches, self.bins, self.trail
        while True:
            while self.qhead < len(trail):
                p = trail[self.qhead]
                self.qhead += 1
                occ = self.agg_occ[p if p > 0 else -p]
                if occ:
                    self.pending.update(occ)
                false_lit = -p
                for o in bins[false_lit]:
                    x = lv[o]
                    if x == 1:
                        continue
                    if x == -1:
                        self.qhead = len(trail)
                        return [o, false_lit]
                    self._enqueue(o, [o, false_lit])
                ws = watches[false_lit]
                i = j = 0
                nws = len(ws)
                while i < nws:
                    c = ws[i]
                    i += 1
                    if c[0] == false_lit:
                        c[0] = c[1]
                        c[1] = false_lit
                    first = c[0]
                    if lv[first] == 1:
                        ws[j] = c
                        j += 1
                        continue
                    for k in range(2, len(c)):
                        lk = c[k]
                        if lv[lk] != -1:
                            c[1] = lk
                            c[k] = false_lit
                            watches[lk].append(c)
                            break
                    else:
                        ws[j] = c
                        j += 1
                        if lv[first] == -1:
                            while i < nws:
                                ws[j] = ws[i]
                                j += 1
                                i += 1
                            del ws[j:]
                            self.qhead = len(trail)
                            return c
                        self._enqueue(first, c)
                del ws[j:]
            if not self.pending:
                return None
            k = min(self.pending)
            self.pending.discard(k)
            confl = self._propagate_agg(self.aggs[k])
            if confl is not None:
                self.pending.clear()
                self.qhead = len(trail)
                return confl

    def _propagate_agg(self, c: AggConstraint):
        lv = self.lv
        certain, maybe, free, assigned = [], [], [], []
        for w, l in c.elems:
            x = lv[l]
            if x == 1:
                certain.append(w)
                assigned.append(-l)
            elif x == -1:
                assigned.append(l)
            else:
                maybe.append(w)
                free.append((w, l))
        st = agg_status(c.fn, c.op, c.bound, certain, maybe)
        h = c.head
        hv = lv[h]
        if st is not None:
            want = h if st else -h
            if lv[want] == 1:
                return None
            expl = [want] + assigned
            if lv[want] == -1:
                return expl
            self._enqueue(want, expl)
            return None
        if hv == 0:
            return None
        target = hv == 1  # the constraint must hold (or must fail)
        hl = -h if hv == 1 else h
        for idx, (w, l) in enumerate(free):
            if lv[l] != 0:
                continue
            rest = [fw for j, (fw, _) in enumerate(free) if j != idx and lv[free[j][1]] == 0]
            extra_t = [fw for fw, fl in free if lv[fl] == 1]
            cur_certain = certain + extra_t
            with_true = agg_status(c.fn, c.op, c.bound, cur_certain + [w], rest)
            with_false = agg_status(c.fn, c.op, c.bound, cur_certain, rest)
            bad_t = with_true is (not target)
            bad_f = with_false is (not target)
            if not (bad_t or bad_f):
                continue
            expl_rest = [hl] + assigned + [(-fl if lv[fl] == 1 else fl) for fw, fl in free if lv[fl] != 0]
            if bad_t and bad_f:
                return expl_rest
            forced = -l if bad_t else l
            self._enqueue(forced, [forced] + expl_rest)
        return None

    # -------------------------------------------------------- conflict analysis
    def _bump(self, v):
        self.act[v] += self.inc
        if self.act[v] > 1e100:
            self.act = [a * 1e-100 for a in self.act]
            self.inc *= 1e-100
            self._rebuild_heap()
        elif self.lv[v] == 0:
            heapq.heappush(self.heap, (-self.act[v], v))

    def analyze(self, confl):
        seen, level, reason, trail = self.seen, self.level, self.reason, self.trail
        cur = len(self.trail_lim)
        learnt = [0]
        path = 0
        idx = len(trail) - 1
        p = 0
        touched = []
        clause = confl
        while True:
            for q in clause:
                if q == p:
                    continue
                v = q if q > 0 else -q
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    touched.append(v)
                    self._bump(v)
                    if level[v] >= cur:
                        path += 1
                    else:
                        learnt.append(q)
            while True:
                lit = trail[idx]
                if seen[lit if lit > 0 else -lit]:
                    break
                idx -= 1
            p = trail[idx]
            idx -= 1
            v = p if p > 0 else -p
            seen[v] = False
            path -= 1
            if path <= 0:
                break
            clause = reason[v]
        learnt[0] = -p
        # drop literals implied by the rest of the clause
        keep = [learnt[0]]
        for q in learnt[1:]:
            r = reason[abs(q)]
            if r is None or not all(seen[abs(x)] or level[abs(x)] == 0 for x in r if x != -q):
                keep.append(q)
        for v in touched:
            seen[v] = False
        learnt = keep
        if len(learnt) == 1:
            bj = 0
        else:
            mi = max(range(1, len(learnt)), key=lambda i: level[abs(learnt[i])])
            learnt[1], learnt[mi] = learnt[mi], learnt[1]
            bj = level[abs(learnt[1])]
        self.inc /= 0.95
        return learnt, bj

    def _learn(self, learnt, bj):
        self.backtrack(bj)
        if len(learnt) == 1:
            self._enqueue(learnt[0], None)
        else:
            self.learnts.append(learnt)
            self._watch(learnt)
            self._enqueue(learnt[0], learnt)

    def _handle_conflict(self, confl) -> bool:
        """Resolve a conflict clause whose literals are all false; False when unsat."""
        self.conflicts += 1
        level = self.level
        top = max((level[abs(l)] for l in confl), default=0)
        if top == 0:
            return False
        if top < len(self.trail_lim):
            self.backtrack(top)
        at_top = [l for l in confl if level[abs(l)] == top]
        if len(at_top) == 1:
            lit = at_top[0]
            rest = [level[abs(l)] for l in confl if l != lit]
            bj = max(rest, default=0)
            clause = [lit] + [l for l in confl if l != lit]
            self.backtrack(bj)
            if len(clause) > 1:
                mi = max(range(1, len(clause)), key=lambda i: level[abs(clause[i])])
                clause[1], clause[mi] = clause[mi], clause[1]
                self.learnts.append(clause)
                self._watch(clause)
            self._enqueue(lit, clause if len(clause) > 1 else None)
            return True
        learnt, bj = self.analyze(confl)
        self._learn(learnt, bj)
        return True

    def _reduce_db(self):
        locked = set()
        for lit in self.trail:
            r = self.reason[abs(lit)]
            if r is not None:
                locked.add(id(r))
        ranked = sorted(self.learnts, key=len)
        keep_n = len(ranked) // 2
        keep = ranked[:keep_n] + [c for c in ranked[keep_n:] if id(c) in locked or len(c) <= 2]
        kept = {id(c) for c in keep}
        dropped = {id(c) for c in self.learnts} - kept
        if dropped:
            for ws in self.watches:
                if ws:
                    ws[:] = [c for c in ws if id(c) not in dropped]
        self.learnts = keep
        self.max_learnts = int(self.max_learnts * 1.1)

    # -------------------------------------------------------- search
    def _pick(self):
        heap, lv, act = self.heap, self.lv, self.act
        while heap:
            a, v = heapq.heappop(heap)
            if lv[v] == 0 and -a == act[v]:
                return v
        for v in range(1, self.n + 1):
            if lv[v] == 0:
                return v
        return 0

    def solve(self, assumptions=(), interrupt=None) -> SolveResult:
        if not self.ok:
            return SolveResult(UNSAT)
        self.backtrack(0)
        if self.propagate() is not None:
            self.ok = False
            return SolveResult(UNSAT)
        assumptions = list(assumptions)
        restart_no = 1
        budget = luby(restart_no) * 64
        since_restart = 0
        while True:
            confl = self.propagate()
            if confl is not None:
                if not self._handle_conflict(confl):
                    self.ok = False
                    return SolveResult(UNSAT, stats=self._stats())
                since_restart += 1
                if self.conflict_limit is not None and self.conflicts >= self.conflict_limit:
                    return SolveResult(UNKNOWN, stats=self._stats())
                if interrupt is not None and interrupt():
                    return SolveResult(UNKNOWN, stats=self._stats())
                continue
            if since_restart >= budget:
                restart_no += 1
                budget = luby(restart_no) * 64
                since_restart = 0
                self.backtrack(0)
                if len(self.learnts) > self.max_learnts:
                    self._reduce_db()
                continue
            dl = len(self.trail_lim)
            if dl < len(assumptions):
                a = assumptions[dl]
                if self.lv[a] == 1:
                    self.trail_lim.append(len(self.trail))
                    continue
                if self.lv[a] == -1:
                    return SolveResult(UNSAT_ASSUMPTIONS, stats=self._stats())
                self.trail_lim.append(len(self.trail))
                self._enqueue(a, None)
                continue
            v = self._pick()
            if v == 0:
                extra = self.check_definitions()
                if not extra:
                    model = [False] + [self.lv[a] == 1 for a in range(1, self.g.natoms + 1)]
                    return SolveResult(SAT, model, self._stats())
                failed = False
                for cl in extra:
                    if all(self.lv[l] == -1 for l in cl):
                        if not self._handle_conflict(cl):
                            failed = True
                        break
                    self._attach(cl)
                if failed:
                    self.ok = False
                    return SolveResult(UNSAT, stats=self._stats())
                continue
            self.decisions += 1
            self.trail_lim.append(len(self.trail))
            self._enqueue(-v, None)

    def _attach(self, cl):
        if len(cl) == 1:
            lit = cl[0]
            if self.lv[lit] != 1:
                self.backtrack(0)
                if self.lv[lit] == -1:
                    self.ok = False
                else:
                    self._enqueue(lit, None)
            return
        cl = sorted(cl, key=lambda l: (self.lv[l] == -1, -self.level[abs(l)]))
        self.learnts.append(cl)
        self._watch(cl)

    def _stats(self):
        return {"conflicts": self.conflicts, "decisions": self.decisions,
                "learnts": len(self.learnts)}

    # -------------------------------------------------------- definitions
    def _prepare_definitions(self):
        g = self.g
        if not g.rules:
            self._defs = []
            return
        groups = {}
        for r in g.rules:
            groups.setdefault(r.defn, {})[r.head] = r
        agg_by_head = {}
        for c in g.aggregates:
            if c.head > 0:
                agg_by_head.setdefault(c.head, []).append(c)
        defs = []
        for key in sorted(groups):
            rules = groups[key]
            defined = set(rules)
            # aggregates whose value depends on defined atoms behave like formula nodes
            dep_aggs = {}
            changed = True
            while changed:
                changed = False
                for h, cs in agg_by_head.items():
                    if h in dep_aggs or h in defined:
                        continue
                    if any(abs(l) in defined or abs(l) in dep_aggs for c in cs for _, l in c.elems):
                        dep_aggs[h] = cs
                        changed = True
            opens = set()
            for r in rules.values():
                for l in r.body:
                    if abs(l) not in defined and abs(l) not in dep_aggs:
                        opens.add(abs(l))
            for cs in dep_aggs.values():
                for c in cs:
                    for _, l in c.elems:
                        if abs(l) not in defined and abs(l) not in dep_aggs:
                            opens.add(abs(l))
            occurs = {}
            for h, r in rules.items():
                for l in r.body:
                    occurs.setdefault(abs(l), set()).add(h)
            for h, cs in dep_aggs.items():
                for c in cs:
                    for _, l in c.elems:
                        occurs.setdefault(abs(l), set()).add(h)
            defs.append({"rules": rules, "defined": defined, "aggs": dep_aggs,
                         "opens": sorted(opens), "occurs": occurs})
        self._defs = defs

    def check_definitions(self) -> list:
        """Clauses refuting the current total assignment, or [] if every definition holds."""
        out = []
        for d in self._defs:
            cl = self._check_definition(d)
            if cl:
                out.extend(cl)
                break
        return out

    def _check_definition(self, d):
        lv = self.lv
        rules, defined, aggs = d["rules"], d["defined"], d["aggs"]
        lower, upper = ground_wfm(rules, defined, aggs, lambda a: lv[a] == 1, d["occurs"])
        actual = {a for a in defined if lv[a] == 1}
        if lower == upper == actual:
            return []
        if not aggs:
            stable = _lfp_ground(rules, defined, {}, lambda a: lv[a] == 1, d["occurs"],
                                 lambda a, z: a in z, lambda a, z: a in actual)
            unfounded = actual - stable
            if unfounded:
                ext = []
                for h in sorted(unfounded):
                    r = rules[h]
                    if r.kind == "or":
                        ext += [l for l in r.body if not (l > 0 and l in unfounded)]
                ext = list(dict.fromkeys(ext))
                return [[-h] + ext for h in sorted(unfounded)]
        block = [(-a if lv[a] == 1 else a) for a in d["opens"]]
        if lower == upper:
            for a in sorted(defined):
                want = a in lower
                if (lv[a] == 1) != want:
                    return [block + [a if want else -a]]
        return [block]

    # -------------------------------------------------------- root propagation
    def root_literals(self):
        """Literals fixed at decision level 0, or None if the theory is refuted there."""
        if not self.ok:
            return None
        self.backtrack(0)
        if self.propagate() is not None:
            self.ok = False
            return None
        return [l for l in self.trail if abs(l) != self.true_var]


def _lit3(lit, val):
    return val if lit > 0 else 2 - val


def ground_wfm(rules, defined, aggs, open_true, occurs):
    """Well-founded model of normalized ground rules with opens fixed by ``open_true``.

    Returns ``(lower, upper)`` sets of defined atoms."""
    lower, upper = set(), set(defined)
    while True:
        new_lower = _lfp_ground(rules, defined, aggs, open_true, occurs,
                                lambda a, z: a in z, lambda a, z, up=upper: a in up)
        new_upper = _lfp_ground(rules, defined, aggs, open_true, occurs,
                                lambda a, z, lo=new_lower: a in lo, lambda a, z: a in z,
                                need=1)
        if new_lower == lower and new_upper == upper:
            return lower, upper
        lower, upper = new_lower, new_upper


def _lfp_ground(rules, defined, aggs, open_true, occurs, is_true, is_possible, need=2):
    """Least set z of defined atoms closed under bodies whose value reaches ``need``.

    Defined atoms are true when ``is_true(a, z)``, possible when
    ``is_possible(a, z)``; both grow with z."""
    cache = {}

    def atom(a, z):
        if a in defined:
            if is_true(a, z):
                return 2
            return 1 if is_possible(a, z) else 0
        if a in aggs:
            if a not in cache:
                cache[a] = min(_agg3(c, lambda l: lit(l, z)) for c in aggs[a])
            return cache[a]
        return 2 if open_true(a) else 0

    def lit(l, z):
        v = atom(abs(l), z)
        return v if l > 0 else 2 - v

    def body(r, z):
        if r.kind == "and":
            return min((lit(l, z) for l in r.body), default=2)
        return max((lit(l, z) for l in r.body), default=0)

    z = set()
    work = list(rules)
    queued = set(work)
    while work:
        h = work.pop()
        queued.discard(h)
        if h in z:
            continue
        if body(rules[h], z) >= need:
            z.add(h)
            cache.clear()
            stack = [h]
            while stack:
                x = stack.pop()
                for dep in occurs.get(x, ()):
                    if dep in aggs:
                        stack.append(dep)
                    elif dep not in z and dep not in queued:
                        queued.add(dep)
                        work.append(dep)
    return z


def _agg3(c: AggConstraint, value):
    certain, maybe = [], []
    for w, l in c.elems:
        v = value(l)
        if v == 2:
            certain.append(w)
        elif v == 1:
            maybe.append(w)
    st = agg_status(c.fn, c.op, c.bound, certain, maybe)
    return 1 if st is None else (2 if st else 0)


# ---------------------------------------------------------------- entry points

def solve(g: GroundTheory, assumptions=(), conflict_limit=None) -> SolveResult:
    return Solver(g, conflict_limit).solve(assumptions)


def propagate_root(g: GroundTheory):
    """Literals true in every model found by root-level propagation, or None on conflict."""
    return Solver(g).root_literals()


def enumerate_models(g: GroundTheory, limit=None, project=None, seed=None):
    """Yield models, blocking each on the ``project`` atoms (default: output atoms)."""
    s = Solver(g, seed=seed)
    atoms = sorted(project if project is not None else g.output_atoms)
    count = 0
    while limit is None or count < limit:
        r = s.solve()
        if not r.sat:
            return
        yield r
        count += 1
        if not atoms:
            return
        if not s.add_clause([(-a if r.model[a] else a) for a in atoms]):
            return


@dataclass
class OptResult:
    status: str
    model: list | None = None
    value: int | None = None
    optimal: bool = False
    history: list = field(default_factory=list)


def objective_value(g: GroundTheory, model) -> int:
    return g.objective_offset + sum(w for w, l in g.objective
                                    if (model[abs(l)] if l > 0 else not model[abs(l)]))


def minimize(g: GroundTheory, callback=None, interrupt=None, conflict_limit=None,
             seed=None) -> OptResult:
    """Branch and bound: each model found tightens ``objective < value``.

    ``callback(model, value)`` sees every improving model; returning False, or
    ``interrupt()`` returning True, stops with the best model so far."""
    s = Solver(g, conflict_limit, seed)
    best = OptResult(UNSAT)
    objective = list(g.objective or [])
    while True:
        r = s.solve(interrupt=interrupt)
        if r.status == UNKNOWN:
            return best
        if not r.sat:
            if best.model is not None:
                best.optimal = True
                best.status = SAT
            return best
        value = objective_value(g, r.model)
        best.status, best.model, best.value = SAT, r.model, value
        best.history.append(value)
        stop = callback is not None and callback(r.model, value) is False
        if stop or (interrupt is not None and interrupt()):
            return best
        if not objective:
            best.optimal = True
            return best
        s.add_aggregate(AggConstraint(s.true_var, "sum", objective, "<", value - g.objective_offset))
        if not s.ok:
            best.optimal = True
            return best
