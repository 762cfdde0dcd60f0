"""Brute-force reference checker on the classical region graph.

Deliberately shares nothing with the zone library, the symbolic semantics or
the synthesis engine: clock constraints are evaluated directly on regions and
every total memoryless strategy is enumerated and checked on its own region
graph.  Only tiny inputs are accepted.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Tuple

from .language import And, Const, LocRef, Mode, Not, Or, Prop, StctlProperty
from .model import AtomicConstraint, Network
from .strategy import Strategy, render_strategy

MAX_CLOCKS = 3
MAX_CONSTANT = 8
MAX_STRATEGIES = 10_000

BEFORE, INSIDE, AFTER = 0, 1, 2
PENDING, HIT, VIOLATED = "pending", "hit", "violated"


class OracleRefused(ValueError):
    """The input is outside the oracle's size limits."""


@dataclass(frozen=True)
class Region:
    """Integer parts (``cap + 1`` means above the cap) and fractional order.

    ``zero`` holds uncapped clocks with zero fraction; ``groups`` lists the
    remaining uncapped clocks by increasing fraction, equal fractions grouped.
    """

    ints: Tuple[int, ...]
    zero: FrozenSet[int]
    groups: Tuple[FrozenSet[int], ...]


class RegionSpace:
    def __init__(self, caps: List[int]):
        self.caps = caps

    def initial(self) -> Region:
        k = len(self.caps)
        return Region((0,) * k, frozenset(range(k)), ())

    def capped(self, r: Region, c: int) -> bool:
        return r.ints[c] > self.caps[c]

    def holds(self, r: Region, a: AtomicConstraint, clock: Optional[int] = None) -> bool:
        c = a.clock if clock is None else clock
        k, rel = a.bound, a.relation
        if self.capped(r, c):
            return rel in (">", ">=")
        v = r.ints[c]
        if c in r.zero:
            return {"<": v < k, "<=": v <= k, "=": v == k, ">=": v >= k, ">": v > k}[rel]
        return {"<": v < k, "<=": v < k, "=": False, ">=": v >= k, ">": v >= k}[rel]

    def delay(self, r: Region) -> Region:
        ints = list(r.ints)
        if r.zero:
            moving = set()
            for c in r.zero:
                if ints[c] == self.caps[c]:
                    ints[c] += 1
                else:
                    moving.add(c)
            groups = ((frozenset(moving),) if moving else ()) + r.groups
            return Region(tuple(ints), frozenset(), groups)
        if r.groups:
            top = r.groups[-1]
            for c in top:
                ints[c] += 1
            return Region(tuple(ints), top, r.groups[:-1])
        return r

    def reset(self, r: Region, clocks) -> Region:
        clocks = set(clocks)
        ints = tuple(0 if c in clocks else v for c, v in enumerate(r.ints))
        groups = tuple(g - clocks for g in r.groups)
        return Region(ints, r.zero | clocks, tuple(g for g in groups if g))


def _caps(n: Network, formula_cap: int) -> List[int]:
    caps = [0] * n.nclocks
    for g in n.agents:
        for loc in g.locations:
            for a in loc.invariant:
                caps[a.clock] = max(caps[a.clock], a.bound)
        for e in g.edges:
            for a in e.guard:
                caps[a.clock] = max(caps[a.clock], a.bound)
    return caps + [formula_cap]


def _interval_cap(iv) -> int:
    return max(iv.lower, iv.upper if iv.upper is not None else 0)


def _eval(f, n: Network, loc) -> bool:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Prop):
        return any(f.name in g.locations[loc[g.id]].labels for g in n.agents)
    if isinstance(f, LocRef):
        g = n.agent_named(f.agent)
        return g.locations[loc[g.id]].name == f.location
    if isinstance(f, Not):
        return not _eval(f.arg, n, loc)
    if isinstance(f, And):
        return _eval(f.left, n, loc) and _eval(f.right, n, loc)
    if isinstance(f, Or):
        return _eval(f.left, n, loc) or _eval(f.right, n, loc)
    raise TypeError(f"not a state formula: {f!r}")


class RegionGraph:
    """Region successors for a network plus the formula clock (last index)."""

    def __init__(self, n: Network, formula_cap: int):
        self.net = n
        self.space = RegionSpace(_caps(n, formula_cap))
        self.f = n.nclocks

    def invariant_ok(self, loc, r: Region) -> bool:
        return all(self.space.holds(r, a) for g in self.net.agents
                   for a in g.locations[loc[g.id]].invariant)

    def moves(self, loc):
        """``(action, [(agent, edge), ...])`` for every synchronised move at ``loc``."""
        n = self.net
        out = []
        for a in range(len(n.action_names)):
            owners = sorted({g.id for g in n.agents for e in g.edges if e.action == a})
            if not owners:
                continue
            options = []
            for g in owners:
                es = [e for e in n.agents[g].edges if e.source == loc[g] and e.action == a]
                if not es:
                    break
                options.append([(g, e) for e in es])
            else:
                for combo in itertools.product(*options):
                    out.append((a, list(combo)))
        return out

    def successors(self, loc, r: Region, allowed) -> List[tuple]:
        out = []
        d = self.space.delay(r)
        if self.invariant_ok(loc, d):
            out.append((loc, d))
        for a, combo in self.moves(loc):
            if not allowed(loc, a, combo):
                continue
            if not all(self.space.holds(r, x) for _, e in combo for x in e.guard):
                continue
            target = list(loc)
            resets = set()
            for g, e in combo:
                target[g] = e.target
                resets |= e.resets
            target = tuple(target)
            r2 = self.space.reset(r, resets)
            if self.invariant_ok(target, r2):
                out.append((target, r2))
        return out

    def part(self, r: Region, iv) -> int:
        lo = AtomicConstraint(self.f, ">" if iv.lower_strict else ">=", iv.lower)
        if not self.space.holds(r, lo):
            return BEFORE
        if iv.upper is None:
            return INSIDE
        hi = AtomicConstraint(self.f, "<" if iv.upper_strict else "<=", iv.upper)
        return INSIDE if self.space.holds(r, hi) else AFTER


def build_region_graph(n: Network, formula_cap: int = 0) -> RegionGraph:
    if n.nclocks + 1 > MAX_CLOCKS:
        raise OracleRefused(f"{n.nclocks + 1} clocks exceed the oracle limit of {MAX_CLOCKS}")
    caps = _caps(n, formula_cap)
    if max(caps) > MAX_CONSTANT:
        raise OracleRefused(f"constant {max(caps)} exceeds the oracle limit of {MAX_CONSTANT}")
    return RegionGraph(n, formula_cap)


def reachable_nodes(rg: RegionGraph) -> set:
    """Every ``(global location, region)`` reachable with all moves allowed."""
    root = (rg.net.initial_locations(), rg.space.initial())
    seen = {root}
    queue = deque([root])
    while queue:
        loc, r = queue.popleft()
        for w in rg.successors(loc, r, lambda *_: True):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def reachable_locations(n: Network) -> set:
    return {loc for loc, _ in reachable_nodes(build_region_graph(n))}


def _status(o, n, loc, part) -> str:
    left, right = _eval(o.left, n, loc), _eval(o.right, n, loc)
    if o.operator == "U":
        if part == INSIDE and right:
            return HIT
        if part == AFTER or not left:
            return VIOLATED
        return PENDING
    if part == INSIDE and not right:
        return VIOLATED
    if part == AFTER or (left and (part == BEFORE or right)):
        return HIT
    return PENDING


def _has_cycle(nodes, succ) -> bool:
    indeg = {v: 0 for v in nodes}
    for v in nodes:
        for w in succ[v]:
            if w in indeg:
                indeg[w] += 1
    queue = deque(v for v, d in indeg.items() if d == 0)
    removed = 0
    while queue:
        v = queue.popleft()
        removed += 1
        for w in succ[v]:
            if w in indeg:
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue.append(w)
    return removed < len(nodes)


def check_strategy(rg: RegionGraph, p: StctlProperty, choices: Dict[Tuple[int, int], int]):
    """Verdict of one total strategy plus the pending coalition locals it visits."""
    n, o = rg.net, p.objective
    coalition = p.coalition

    def allowed(loc, a, combo):
        return all(choices.get((g, loc[g])) == a for g, _ in combo if g in coalition)

    root = (n.initial_locations(), rg.space.initial())
    status = {}
    succ = {}
    queue = deque([root])
    status[root] = _status(o, n, root[0], rg.part(root[1], o.interval))
    while queue:
        v = queue.popleft()
        if status[v] != PENDING:
            continue
        succ[v] = rg.successors(v[0], v[1], allowed)
        for w in succ[v]:
            if w not in status:
                status[w] = _status(o, n, w[0], rg.part(w[1], o.interval))
                queue.append(w)
    pending = [v for v, s in status.items() if s == PENDING]
    hit = any(s == HIT for s in status.values())
    violated = any(s == VIOLATED for s in status.values())
    stuck = any(not succ[v] for v in pending)
    cycle = _has_cycle(pending, succ)
    if o.quantifier == "E":
        ok = hit if o.operator == "U" else (hit or stuck or cycle)
    else:
        ok = (not violated) if o.operator == "R" else not (violated or stuck or cycle)
    visited = {(g, v[0][g]) for v in pending for g in coalition}
    return ok, visited


@dataclass
class OracleResult:
    verdict: bool
    strategies: List[Strategy]


def enumerate_and_check(n: Network, p: StctlProperty) -> OracleResult:
    """Check every total strategy; return the satisfying ones in canonical form."""
    rg = build_region_graph(n, _interval_cap(p.objective.interval))
    slots = [(g, l) for g in sorted(p.coalition) for l in range(len(n.agents[g].locations))
             if any(e.source == l for e in n.agents[g].edges)]
    options = [sorted({e.action for e in n.agents[g].edges if e.source == l}) for g, l in slots]
    total = 1
    for opt in options:
        total *= len(opt)
    if total > MAX_STRATEGIES:
        raise OracleRefused(f"{total} strategies exceed the oracle limit of {MAX_STRATEGIES}")
    found = set()
    for combo in itertools.product(*options):
        choices = dict(zip(slots, combo))
        ok, visited = check_strategy(rg, p, choices)
        if ok:
            found.add(Strategy(p.coalition, {k: v for k, v in choices.items() if k in visited}))
            if p.mode is Mode.CHECK:
                break
    strategies = sorted(found, key=lambda s: render_strategy(s, n))
    return OracleResult(bool(found), strategies)
