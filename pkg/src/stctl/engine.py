"""Strategy-branching breadth-first synthesis.

Every exploration *branch* carries one partial strategy for the coalition and
the outcome graph explored under it so far.  When a pending state puts a
coalition agent in a location whose choice is still open, the branch forks
once per available action; work already done is shared with every child
because nothing explored before the fork depended on the new binding.

States are ``(global location, part, zone)`` where *part* says whether the
formula clock lies before, inside or after the property interval.  Each state
gets an objective status from its location and part alone:

========  =============================  ===============================
operator  target hit                     violated
========  =============================  ===============================
U         inside and right               after, or left false
R         after, or left and (before     inside and right false
          or right)
========  =============================  ===============================

Everything else is pending.  Only pending states are expanded.
"""
from __future__ import annotations

import enum
import threading
import time
from collections import deque
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Set, Tuple

from .language import Mode, StctlProperty, compile_formula
from .model import Network
from .semantics import Semantics, _semantics
from .strategy import Strategy, canonical_form, render_strategy
from .zones import Dbm, covered_by, constrain, includes, intersect, split_on_interval, time_elapse

BEFORE, INSIDE, AFTER = 0, 1, 2
PART_NAMES = ("before", "inside", "after")


class Status(enum.Enum):
    PENDING = "Pending"
    TARGET_HIT = "TargetHit"
    VIOLATED = "Violated"


class Termination(enum.Enum):
    COMPLETE = "Complete"
    TIMEOUT = "Timeout"
    STATE_BUDGET = "StateBudget"
    STRATEGY_BUDGET = "StrategyBudget"


@dataclass
class Budget:
    timeout_seconds: float = 120.0
    max_states: int = 0
    max_strategies: int = 0


@dataclass
class Stats:
    explored: int = 0
    frontier_peak: int = 0
    wall_seconds: float = 0.0
    branches: int = 0
    raw_strategies: int = 0  # satisfying branches before canonical deduplication


@dataclass
class SynthesisResult:
    mode: Mode
    verdict: Optional[bool]
    strategies: List[Strategy]
    stats: Stats
    termination: Termination
    graphs: List["OutcomeGraph"] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return self.termination is Termination.COMPLETE


@dataclass
class Objective:
    """A compiled temporal objective."""

    quantifier: str
    operator: str
    interval: object
    left: Callable
    right: Callable

    @classmethod
    def from_property(cls, p: StctlProperty, n: Network) -> "Objective":
        o = p.objective
        return cls(o.quantifier, o.operator, o.interval,
                   compile_formula(o.left, n), compile_formula(o.right, n))

    def status(self, loc, part: int) -> Status:
        if self.operator == "U":
            if part == INSIDE and self.right(loc):
                return Status.TARGET_HIT
            if part == AFTER or not self.left(loc):
                return Status.VIOLATED
            return Status.PENDING
        if part == INSIDE and not self.right(loc):
            return Status.VIOLATED
        if part == AFTER or (self.left(loc) and (part == BEFORE or self.right(loc))):
            return Status.TARGET_HIT
        return Status.PENDING

    @property
    def reachability_only(self) -> bool:
        """True when the verdict only needs reachability of a terminal status."""
        return (self.quantifier, self.operator) in (("E", "U"), ("A", "R"))


@dataclass
class OutcomeGraph:
    """States explored under one strategy, with the facts evaluation needs.

    ``stuck`` holds pending states containing a valuation from which neither
    delay nor any allowed move is possible; ``divergent`` holds pending states
    in which time can grow without bound.
    """

    strategy: Strategy
    locs: List[tuple]
    parts: List[int]
    zones: List[Dbm]
    status: List[Status]
    succ: Dict[int, List[int]]
    stuck: Set[int]
    divergent: Set[int]
    root: int = 0

    def pending_cycle(self) -> bool:
        pending = [i for i, s in enumerate(self.status) if s is Status.PENDING]
        color = {i: 0 for i in pending}
        for start in pending:
            if color[start]:
                continue
            stack = [(start, iter(self.succ.get(start, ())))]
            color[start] = 1
            while stack:
                node, it = stack[-1]
                for nxt in it:
                    c = color.get(nxt)
                    if c is None:
                        continue
                    if c == 1:
                        return True
                    if c == 0:
                        color[nxt] = 1
                        stack.append((nxt, iter(self.succ.get(nxt, ()))))
                        break
                else:
                    color[node] = 2
                    stack.pop()
        return False

    def has_status(self, s: Status) -> bool:
        return any(x is s for x in self.status)


def evaluate_existential(g: OutcomeGraph, operator: str) -> bool:
    """Some outcome path satisfies the objective."""
    if g.has_status(Status.TARGET_HIT):
        return True
    if operator == "U":
        return False
    # release also holds on paths that never leave pending states
    return bool(g.stuck or g.divergent) or g.pending_cycle()


def evaluate_universal(g: OutcomeGraph, operator: str) -> bool:
    """Every outcome path satisfies the objective (graph must be complete)."""
    if g.has_status(Status.VIOLATED):
        return False
    if operator == "R":
        return True
    return not (g.stuck or g.divergent) and not g.pending_cycle()


def evaluate(g: OutcomeGraph, objective: Objective) -> bool:
    if objective.quantifier == "E":
        return evaluate_existential(g, objective.operator)
    return evaluate_universal(g, objective.operator)


# ---------------------------------------------------------------------------
# exploration
# ---------------------------------------------------------------------------

class _Shared:
    """Strategy-independent successor data shared by all branches."""

    def __init__(self, sem: Semantics, interval):
        self.sem = sem
        self.interval = interval
        self.fclock = sem.formula_clock
        self._succ: Dict[tuple, tuple] = {}
        self._stuck: Dict[tuple, bool] = {}
        self._lock = threading.Lock()

    def split(self, zone):
        inside, before, after = split_on_interval(zone, self.fclock, self.interval)
        return before, inside, after

    def settle(self, loc, zone, part):
        """Delay-close ``zone`` at ``loc`` and keep the given part, extrapolated."""
        z = self.sem.delay_closure(zone, loc)
        if z.is_empty:
            return None
        p = self.split(z)[part]
        return None if p is None else self.sem.extrapolate(p)

    def root(self, loc):
        sem = self.sem
        z = intersect(Dbm.zero(sem.nclk), sem.invariant(loc))
        for part, piece in enumerate(self.split(z)):
            if piece is not None:
                return part, self.settle(loc, piece, part)
        raise AssertionError("root zone lost while splitting")

    def successors(self, loc, part, zone):
        """``(per-move successor lists, delay successor)`` for one state.

        The per-move list is indexed like ``sem.candidate_moves(loc)``.
        """
        key = (loc, part, zone.key())
        got = self._succ.get(key)
        if got is not None:
            return got
        sem = self.sem
        per_move = []
        for entry in sem.candidate_moves(loc):
            land = sem.landing(zone, entry)
            outs = []
            if not land.is_empty:
                target = entry[3]
                for p, piece in enumerate(self.split(land)):
                    if piece is None:
                        continue
                    z = self.settle(target, piece, p)
                    if z is not None:
                        outs.append((target, p, z))
            per_move.append(outs)
        delay = None
        if part < AFTER:
            z = self.settle(loc, zone, part + 1)
            if z is not None:
                delay = (loc, part + 1, z)
        got = (per_move, delay)
        with self._lock:
            self._succ[key] = got
        return got

    def is_stuck(self, loc, part, zone, allowed: Tuple[int, ...]) -> bool:
        key = (loc, part, zone.key(), allowed)
        got = self._stuck.get(key)
        if got is not None:
            return got
        sem = self.sem
        moves = sem.candidate_moves(loc)
        escape = [moves[i][4] for i in allowed if not moves[i][4].is_empty]
        got = False
        for a in sem.upper_atoms(loc):
            # valuations where this invariant bound is tight: no further delay
            top = constrain(zone, 0, a.clock + 1, -2 * a.bound + 1)
            if not top.is_empty and not covered_by(top, escape):
                got = True
                break
        with self._lock:
            self._stuck[key] = got
        return got

    def is_divergent(self, loc, part) -> bool:
        if self.sem.upper_atoms(loc):
            return False
        return part == AFTER or (part == INSIDE and self.interval.upper is None)


class _Branch:
    __slots__ = ("strategy", "locs", "parts", "zones", "status", "index", "by_lp",
                 "succ", "stuck", "divergent", "frontier", "hit", "dead", "witness")

    def fork(self, strategy: Strategy) -> "_Branch":
        b = _Branch.__new__(_Branch)
        b.strategy = strategy
        b.locs = list(self.locs)
        b.parts = list(self.parts)
        b.zones = list(self.zones)
        b.status = list(self.status)
        b.index = dict(self.index)
        b.by_lp = {k: list(v) for k, v in self.by_lp.items()}
        b.succ = dict(self.succ)
        b.stuck = set(self.stuck)
        b.divergent = set(self.divergent)
        b.frontier = deque(self.frontier)
        b.hit = self.hit
        b.dead = self.dead
        b.witness = self.witness
        return b

    def graph(self) -> OutcomeGraph:
        return OutcomeGraph(self.strategy, self.locs, self.parts, self.zones, self.status,
                            self.succ, self.stuck, self.divergent)


class _Outcome(enum.Enum):
    FORKED = 1
    DONE = 2
    DEAD = 3
    OUT_OF_BUDGET = 4


class Explorer:
    """Runs the strategy-branching search for one network and property."""

    def __init__(self, n: Network, p: StctlProperty, budget: Optional[Budget] = None,
                 threads: int = 1, record_graphs: bool = False, restrict: bool = True):
        self.net = n
        self.prop = p
        self.budget = budget or Budget()
        self.threads = max(1, int(threads))
        self.record_graphs = record_graphs
        # restrict=False explores the unrestricted product (no strategy filter)
        self.restrict = restrict
        self.objective = Objective.from_property(p, n)
        self.sem = _semantics(n, p.objective.interval.max_constant)
        self.shared = _Shared(self.sem, p.objective.interval)
        self.coalition = tuple(sorted(p.coalition))
        self.subsume = self.objective.reachability_only
        self.stats = Stats()
        self._lock = threading.Lock()
        self._deadline = None
        self._stop = None

    # -- budget ------------------------------------------------------------
    def _charge(self) -> bool:
        with self._lock:
            self.stats.explored += 1
            if self.budget.max_states and self.stats.explored > self.budget.max_states:
                self._stop = self._stop or Termination.STATE_BUDGET
        if self._deadline is not None and time.perf_counter() > self._deadline:
            self._stop = self._stop or Termination.TIMEOUT
        return self._stop is None

    # -- branch construction ----------------------------------------------------
    def _new_root(self) -> _Branch:
        b = _Branch.__new__(_Branch)
        b.strategy = Strategy(self.coalition)
        b.locs, b.parts, b.zones, b.status = [], [], [], []
        b.index, b.by_lp, b.succ = {}, {}, {}
        b.stuck, b.divergent = set(), set()
        b.frontier = deque()
        b.hit = b.dead = False
        b.witness = False
        loc = self.net.initial_locations()
        part, zone = self.shared.root(loc)
        self._add(b, loc, part, zone)
        return b

    def _add(self, b: _Branch, loc, part, zone) -> int:
        key = (loc, part, zone.key())
        nid = b.index.get(key)
        if nid is not None:
            return nid
        if self.subsume:
            for other in b.by_lp.get((loc, part), ()):
                if includes(b.zones[other], zone):
                    return other
        nid = len(b.locs)
        b.index[key] = nid
        b.by_lp.setdefault((loc, part), []).append(nid)
        b.locs.append(loc)
        b.parts.append(part)
        b.zones.append(zone)
        st = self.objective.status(loc, part)
        b.status.append(st)
        if st is Status.PENDING:
            b.frontier.append(nid)
        elif st is Status.TARGET_HIT:
            b.hit = True
        else:
            b.dead = True
        return nid

    def _open_choice(self, b: _Branch, loc):
        if not self.restrict:
            return None
        for g in self.coalition:
            l = loc[g]
            if self.net.available_actions(g, l) and b.strategy.choice_of(g, l) is None:
                return g, l
        return None

    def _allowed(self, b: _Branch, loc) -> Tuple[int, ...]:
        moves = self.sem.candidate_moves(loc)
        if not self.restrict:
            return tuple(range(len(moves)))
        out = []
        coal = b.strategy.coalition
        for i, entry in enumerate(moves):
            m = entry[0]
            if all(b.strategy.choice_of(g, loc[g]) == m.action for g in m.agents if g in coal):
                out.append(i)
        return tuple(out)

    def _expand(self, b: _Branch, nid: int):
        loc, part, zone = b.locs[nid], b.parts[nid], b.zones[nid]
        per_move, delay = self.shared.successors(loc, part, zone)
        allowed = self._allowed(b, loc)
        targets = []
        for i in allowed:
            for (l2, p2, z2) in per_move[i]:
                targets.append(self._add(b, l2, p2, z2))
        if delay is not None:
            targets.append(self._add(b, *delay))
        b.succ[nid] = targets
        if self.shared.is_divergent(loc, part):
            b.divergent.add(nid)
        if self.shared.is_stuck(loc, part, zone, allowed):
            b.stuck.add(nid)

    def _decided(self, b: _Branch) -> None:
        """Record on-the-fly conclusions that every extension inherits."""
        o = self.objective
        if o.quantifier == "E":
            if b.hit or (o.operator == "R" and (b.stuck or b.divergent)):
                b.witness = True
        else:
            if b.dead or (o.operator == "U" and (b.stuck or b.divergent)):
                b.dead = True

    def run_branch(self, b: _Branch, greedy: bool = False):
        """Advance ``b`` until it forks, finishes, dies or runs out of budget."""
        universal = self.objective.quantifier == "A"
        while b.frontier:
            self._decided(b)
            if universal and b.dead:
                return _Outcome.DEAD, None
            nid = b.frontier[0]
            choice = self._open_choice(b, b.locs[nid])
            if choice is not None:
                g, l = choice
                acts = self.net.available_actions(g, l)
                if greedy:
                    b.strategy = b.strategy.extend(g, l, acts[0])
                    continue
                return _Outcome.FORKED, [b.fork(b.strategy.extend(g, l, a)) for a in acts]
            if not self._charge():
                return _Outcome.OUT_OF_BUDGET, None
            b.frontier.popleft()
            self._expand(b, nid)
            with self._lock:
                if len(b.frontier) > self.stats.frontier_peak:
                    self.stats.frontier_peak = len(b.frontier)
        self._decided(b)
        if universal and b.dead:
            return _Outcome.DEAD, None
        return _Outcome.DONE, None

    def reachable_locals(self, b: _Branch):
        out = set()
        for loc, st in zip(b.locs, b.status):
            if st is not Status.PENDING:
                continue
            for g in self.coalition:
                if self.net.available_actions(g, loc[g]):
                    out.add((g, loc[g]))
        return out

    # -- driver ------------------------------------------------------------
    def run(self) -> SynthesisResult:
        t0 = time.perf_counter()
        if self.budget.timeout_seconds:
            self._deadline = t0 + self.budget.timeout_seconds
        mode = self.prop.mode
        found: List[Strategy] = []
        graphs: List[OutcomeGraph] = []
        early = False

        def finish(b: _Branch) -> bool:
            """Handle a finished branch; True when the search may stop."""
            if self.record_graphs:
                graphs.append(b.graph())
            g = b.graph()
            if evaluate(g, self.objective):
                found.append(canonical_form(b.strategy, self.reachable_locals(b)))
                if mode is Mode.CHECK:
                    return True
                if self.budget.max_strategies and len(found) >= self.budget.max_strategies:
                    self._stop = self._stop or Termination.STRATEGY_BUDGET
                    return True
            return False

        def step(b: _Branch):
            outcome, children = self.run_branch(b)
            if (outcome is _Outcome.FORKED and mode is Mode.CHECK
                    and self.objective.quantifier == "E" and b.witness):
                # every completion satisfies: finish one deterministically
                outcome, children = self.run_branch(b, greedy=True)
            return b, outcome, children

        queue = deque([self._new_root()])
        self.stats.branches = 1
        if self.threads == 1:
            while queue and not early and self._stop is None:
                b, outcome, children = step(queue.popleft())
                early = self._handle(b, outcome, children, queue, finish, graphs)
        else:
            with ThreadPoolExecutor(self.threads) as pool:
                running, seq = {}, 0
                while (queue or running) and not early:
                    while queue and len(running) < self.threads and self._stop is None:
                        running[pool.submit(step, queue.popleft())] = seq
                        seq += 1
                    if not running:
                        break
                    done, _ = wait(running, return_when=FIRST_COMPLETED)
                    # handle in submission order
                    for fut in sorted(done, key=running.__getitem__):
                        del running[fut]
                        b, outcome, children = fut.result()
                        early = self._handle(b, outcome, children, queue, finish, graphs) or early
                for fut in running:
                    fut.cancel()

        termination = self._stop or Termination.COMPLETE
        if early and mode is Mode.CHECK:
            termination = Termination.COMPLETE
        self.stats.raw_strategies = len(found)
        found = sorted(set(found), key=lambda s: render_strategy(s, self.net))
        self.stats.wall_seconds = time.perf_counter() - t0
        if mode is Mode.CHECK:
            verdict = True if found else (False if termination is Termination.COMPLETE else None)
        else:
            verdict = bool(found) if (found or termination is Termination.COMPLETE) else None
        return SynthesisResult(mode, verdict, found, self.stats, termination, graphs)

    def _handle(self, b, outcome, children, queue, finish, graphs) -> bool:
        if outcome is _Outcome.FORKED:
            queue.extend(children)
            with self._lock:
                self.stats.branches += len(children) - 1
            return False
        if outcome is _Outcome.DONE:
            return finish(b)
        if outcome is _Outcome.DEAD and self.record_graphs:
            graphs.append(b.graph())
        return False


def explore(n: Network, p: StctlProperty, budget: Optional[Budget] = None, threads: int = 1,
            record_graphs: bool = False) -> SynthesisResult:
    return Explorer(n, p, budget, threads, record_graphs).run()


def unrestricted_graph(n: Network, p: StctlProperty) -> OutcomeGraph:
    """The product explored without strategy filtering or objective truncation."""
    ex = Explorer(n, p, Budget(timeout_seconds=0), restrict=False)
    ex.subsume = False
    ex.objective = _NoObjective()
    b = ex._new_root()
    outcome, _ = ex.run_branch(b)
    assert outcome is _Outcome.DONE
    return b.graph()


class _NoObjective:
    quantifier = "E"
    operator = "U"
    reachability_only = False

    def status(self, loc, part):
        return Status.PENDING
